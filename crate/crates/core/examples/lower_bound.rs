//! With too few masks, some other basis vector produces the same intensities
//! as e₁. The collision probability falls off once L exceeds about log₂ d.

use phaselift::experiments::{lower_bound_exact, run_lower_bound};

fn main() -> phaselift::Result<()> {
    println!("d = 3, L = 1: exact {}", lower_bound_exact(3, 1, 1 << 20)?);
    for (d, l) in [(3, 1), (64, 2), (64, 6), (64, 12), (64, 60)] {
        let e = run_lower_bound(d, l, 10_000, 0)?;
        println!("d = {d:>2}, L = {l:>2}: collision rate {:.4} ± {:.4}", e.probability, e.sigma);
    }
    Ok(())
}
