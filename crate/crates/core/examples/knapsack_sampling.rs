//! Quasi-random tokens on the knapsack chain: the normalized configuration
//! approaches the uniform distribution as the token count grows.

use detwalk::chain::{mixing_rate, point_wise_distance};
use detwalk::chains::knapsack_chain;
use detwalk::engine::{run, InitialConfig, RunOptions};
use detwalk::router::RouterKind;

fn main() -> detwalk::Result<()> {
    let (p, inst) = knapsack_chain(&[1; 8], 4)?;
    let profile = mixing_rate(&p, 0.25, 10_000)?;
    let steps = 10 * profile.tau_checked(0.25)?;
    println!("knapsack n=8 b=4: {} solutions, T={steps}", inst.states.len());
    for tokens in [100u64, 1_000, 10_000, 100_000] {
        let chi0 = InitialConfig::PointMass(0).build(p.n(), tokens)?;
        let trace = run(&chi0, &p, RouterKind::Vdc, steps, RunOptions::default())?;
        let last = trace.chi.last().unwrap().as_f64();
        let normalized: Vec<f64> = last.iter().map(|c| c / tokens as f64).collect();
        let d = point_wise_distance(&normalized, profile.pi.as_slice())?;
        println!("  M={tokens:<7} d_pw = {d:.3e}");
    }
    Ok(())
}
