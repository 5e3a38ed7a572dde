//! All four routers on one random reversible chain: discrepancy against the
//! expected evolution and the applicable bounds.

use detwalk::analysis::{bound_coefficients, check_bounds, discrepancy, BoundInputs};
use detwalk::chain::mixing_rate;
use detwalk::chains::random_reversible_chain;
use detwalk::engine::{run, InitialConfig, RunOptions};
use detwalk::router::{max_rotor_period, RouterKind};

fn main() -> detwalk::Result<()> {
    let p = random_reversible_chain(20, 4, 7, false)?;
    let profile = mixing_rate(&p, 0.25, 10_000)?;
    let t_star = profile.tau_checked(0.25)?;
    let tokens = 10_000;
    let steps = 10 * t_star;
    let chi0 = InitialConfig::PointMass(0).build(p.n(), tokens)?;
    println!("N={} Delta={} t*={t_star} M={tokens} T={steps}", p.n(), p.max_degree());
    for kind in RouterKind::ALL {
        let trace = run(&chi0, &p, kind, steps, RunOptions::default())?;
        let mut report = discrepancy(&trace);
        let delta_bar = (kind == RouterKind::Rotor).then(|| max_rotor_period(&p)).transpose()?;
        let inputs = BoundInputs::from_profile(&profile, 0.25, tokens, delta_bar)?;
        check_bounds(&mut report, &bound_coefficients(kind, &inputs, Some(trace.psi_measured))?, &profile.pi);
        println!("{kind:<8} max |chi - mu| = {:<8.4} psi = {:.4}", report.global_max, report.psi_measured);
        for (name, b) in &report.bounds {
            println!("    {name:<17} {:>10.1}  {}", b.value, if b.satisfied { "ok" } else { "VIOLATED" });
        }
    }
    Ok(())
}
