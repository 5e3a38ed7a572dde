//! Two steps of the functional-router process driven by hand-written
//! routers: seven tokens on vertex 1 become (4,3) and then (5,2).

use detwalk::chain::TransitionMatrix;
use detwalk::engine::{step, TokenConfiguration};
use detwalk::router::ScriptedRouter;

fn main() -> detwalk::Result<()> {
    let p = TransitionMatrix::from_rows(vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 0.5), (1, 0.5)]])?;
    // vertex 1 routes 4/3 tokens on serves [0,7), then 3/1 on [7,11)
    let s1 = [0, 1, 0, 1, 0, 1, 0, 0, 0, 1, 0];
    // vertex 2 routes 2/1 tokens on serves [0,3)
    let s2 = [0, 1, 0];
    let mut routers = vec![ScriptedRouter::new(0, p.row(0), &s1)?, ScriptedRouter::new(1, p.row(1), &s2)?];
    let mut chi = TokenConfiguration::new(vec![7, 0]);
    println!("chi(0) = {:?}", chi.counts());
    for t in 1..=2 {
        let (next, flow) = step(&chi, &mut routers, &p)?;
        println!("chi({t}) = {:?}  flows {:?} {:?}", next.counts(), flow.slots(0), flow.slots(1));
        chi = next;
    }
    Ok(())
}
