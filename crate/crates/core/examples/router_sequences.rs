//! The first serves of each router kind on one probability row, with the
//! largest prefix deviation |I[0,z) − zP| seen.

use detwalk::router::{RouterKind, RouterState};

fn main() -> detwalk::Result<()> {
    let rows: [(&str, Vec<f64>); 3] = [
        ("(1/2, 1/4, 1/4)", vec![0.5, 0.25, 0.25]),
        ("(2/3, 1/3)", vec![2.0 / 3.0, 1.0 / 3.0]),
        ("(√2/4, 1−√2/4)", vec![std::f64::consts::SQRT_2 / 4.0, 1.0 - std::f64::consts::SQRT_2 / 4.0]),
    ];
    for (name, probs) in rows {
        println!("row {name}");
        let row: Vec<(usize, f64)> = probs.iter().copied().enumerate().collect();
        for kind in RouterKind::ALL {
            let mut r = match RouterState::new(kind, 0, &row) {
                Ok(r) => r,
                Err(e) => {
                    println!("  {kind:<8} unavailable: {e}");
                    continue;
                }
            };
            let mut counts = vec![0u64; probs.len()];
            let mut worst = 0.0f64;
            let mut head = Vec::new();
            for z in 1..=1000u64 {
                let u = r.next()?;
                if head.len() < 16 {
                    head.push(u.to_string());
                }
                counts[u] += 1;
                for (c, p) in counts.iter().zip(&probs) {
                    worst = worst.max((*c as f64 - z as f64 * p).abs());
                }
            }
            println!("  {kind:<8} {}  max prefix deviation {worst:.4}", head.join(""));
        }
    }
    Ok(())
}
