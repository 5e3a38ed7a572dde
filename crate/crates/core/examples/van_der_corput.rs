//! The van der Corput sequence and its window counts.

use detwalk::router::{van_der_corput, vdc_window_count};

fn main() -> detwalk::Result<()> {
    for i in 0..16u64 {
        println!("psi({i:>2}) = {}", van_der_corput(i));
    }
    let (x, y) = (0.2, 0.7);
    println!("points of psi[z0, z0+z) in [{x}, {y})");
    for (z0, z) in [(0, 10), (5, 100), (1000, 1000), (12345, 4096)] {
        let count = vdc_window_count(z0, z, x, y)?;
        let expected = z as f64 * (y - x);
        let slack = 2.0 * (z as f64).log2().floor() + 2.0;
        println!("  z0={z0:<6} z={z:<5} count={count:<5} expected={expected:<7} |diff| < {slack}");
    }
    Ok(())
}
