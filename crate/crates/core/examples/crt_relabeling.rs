//! For coprime d₁, d₂ the 2-D DFT basis is a relabeling of the 1-D basis of
//! dimension d₁d₂, so 2-D masks inherit the 1-D guarantee.

use phaselift::coded::crt_relabeling;

fn main() -> phaselift::Result<()> {
    for (d1, d2) in [(3, 5), (5, 7), (4, 9)] {
        let r = crt_relabeling(d1, d2)?;
        println!(
            "({d1}, {d2}): permutation {}, max deviation {:.1e}",
            r.is_permutation(),
            r.max_deviation()?
        );
    }
    match crt_relabeling(3, 6) {
        Err(e) => println!("(3, 6): {e}"),
        Ok(_) => unreachable!("3 and 6 share a factor"),
    }
    Ok(())
}
