//! Window sweeps of single router rows, as done by `detwalk verify-router`.

use detwalk::cli::{parse_row, verify_router};
use detwalk::router::RouterKind;

fn main() -> detwalk::Result<()> {
    let cases = [
        (RouterKind::Srt, "2/3,1/3"),
        (RouterKind::Srt, "sqrt(2)/4,1-sqrt(2)/4"),
        (RouterKind::Billiard, "0.1,0.2,0.3,0.4"),
        (RouterKind::Vdc, "1/7,2/7,4/7"),
        (RouterKind::Rotor, "1/2,1/4,1/4"),
    ];
    for (kind, spec) in cases {
        let probs = parse_row(spec, false)?;
        for c in verify_router(kind, &probs, 5_000, 42, 5_000)? {
            let verdict = if c.passed() { "pass" } else { "FAIL" };
            println!("{kind:<8} {spec:<24} {:<7} {:<20} worst {:.4} {verdict}", c.name, c.limit, c.worst);
        }
    }
    Ok(())
}
