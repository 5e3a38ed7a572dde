//! The telescoping identity relating χ − μ to the per-step router errors,
//! evaluated on a stored trace for every vertex.

use detwalk::analysis::lemma1_residual;
use detwalk::chain::stationary_distribution;
use detwalk::chains::random_reversible_chain;
use detwalk::engine::{run, InitialConfig, RunOptions};
use detwalk::router::RouterKind;

fn main() -> detwalk::Result<()> {
    let p = random_reversible_chain(8, 3, 11, true)?;
    let pi = stationary_distribution(&p)?;
    let chi0 = InitialConfig::Uniform.build(p.n(), 77)?;
    let steps = 40;
    for kind in [RouterKind::Srt, RouterKind::Billiard, RouterKind::Vdc] {
        let trace = run(&chi0, &p, kind, steps, RunOptions { store_flows: true })?;
        let worst = (0..p.n())
            .map(|w| lemma1_residual(&trace, &p, &pi, steps, w))
            .collect::<detwalk::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("{kind:<8} max residual over w: {worst:.3e}");
    }
    Ok(())
}
