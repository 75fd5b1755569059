//! Newton from many random starting points lands on the same grid function.
//!
//! `cargo run --release --example uniqueness`

use dirichlet::corpus;
use dirichlet::solver::{multi_start, multi_start_uniqueness};
use dirichlet::SolverConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SolverConfig::default();
    let n = 50;
    for name in ["f1", "f2", "f3", "zero"] {
        let spec = corpus::get(name).expect("built-in problem").spec();
        let spread = multi_start_uniqueness(&spec, n, &cfg, 8, 10.0, 7)?;
        println!("{name:<5} 8 starts, amplitude 10: max pairwise sup distance {spread:.3e}");
    }

    let spec = corpus::get("f2").expect("built-in problem").spec();
    let reports = multi_start(&spec, n, &cfg, 5, 1000.0, 11)?;
    println!("\nf2 from amplitude-1000 starts:");
    for (i, r) in reports.iter().enumerate() {
        println!(
            "  start {i}: {} iterations, x(1/2) = {:+.12}",
            r.iterations,
            r.solution.values()[n / 2]
        );
    }
    Ok(())
}
