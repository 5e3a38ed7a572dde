//! Exact mixing times and the h / h̄ profiles of small chains.

use detwalk::chain::{mixing_profile, TransitionMatrix};
use detwalk::chains::linear_extension_chain;

fn main() -> detwalk::Result<()> {
    let lazy = TransitionMatrix::from_rows(vec![vec![(0, 0.75), (1, 0.25)], vec![(0, 0.25), (1, 0.75)]])?;
    let prof = mixing_profile(&lazy, 8)?;
    println!("lazy two-state chain");
    for (t, (h, hb)) in prof.h.iter().zip(prof.h_bar.as_ref().unwrap()).enumerate() {
        println!("  t={t:<2} h={h:<12} h_bar={hb}");
    }
    println!("  t* = {:?}", prof.t_star());

    let (p, _) = linear_extension_chain(4, &[(0, 2), (1, 3)])?;
    let prof = mixing_profile(&p, 60)?;
    println!("linear extensions of 1<3, 2<4 ({} states)", p.n());
    for (eps, tau) in prof.tau_table() {
        match tau {
            Some(t) => println!("  tau({eps}) = {t}"),
            None => println!("  tau({eps}) not reached by t={}", prof.t_max),
        }
    }
    Ok(())
}
