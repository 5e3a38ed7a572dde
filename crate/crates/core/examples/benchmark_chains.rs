//! Sizes and mixing rates of the enumerated benchmark chains.

use detwalk::chain::{mixing_rate, validate_chain};
use detwalk::chains::{knapsack_chain, linear_extension_chain, matching_chain};

fn report(name: &str, p: &detwalk::TransitionMatrix) -> detwalk::Result<()> {
    let v = validate_chain(p);
    let t_star = mixing_rate(p, 0.25, 100_000)?.tau_checked(0.25)?;
    println!(
        "{name:<28} N={:<6} Delta={:<3} ergodic={} reversible={} t*={t_star}",
        p.n(),
        p.max_degree(),
        v.is_ergodic(),
        v.reversible
    );
    Ok(())
}

fn main() -> detwalk::Result<()> {
    for n in [4, 6, 8, 10] {
        let (p, _) = knapsack_chain(&vec![1; n], n as u64 / 2)?;
        report(&format!("knapsack n={n} b={}", n / 2), &p)?;
    }
    let (p, _) = knapsack_chain(&[3, 5, 2, 7, 4], 9)?;
    report("knapsack a=3,5,2,7,4 b=9", &p)?;
    for n in [3, 5, 6] {
        let (p, _) = linear_extension_chain(n, &[])?;
        report(&format!("linext antichain n={n}"), &p)?;
    }
    let (p, _) = linear_extension_chain(6, &[(0, 3), (1, 3), (2, 4), (3, 5)])?;
    report("linext n=6 with 4 relations", &p)?;
    for m in [4, 8] {
        let path: Vec<_> = (0..m).map(|i| (i, i + 1)).collect();
        let (p, _) = matching_chain(&path)?;
        report(&format!("matching path m={m}"), &p)?;
        let cycle: Vec<_> = (0..m).map(|i| (i, (i + 1) % m)).collect();
        let (p, _) = matching_chain(&cycle)?;
        report(&format!("matching cycle m={m}"), &p)?;
    }
    Ok(())
}
