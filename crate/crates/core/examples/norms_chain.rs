//! Four norms of one grid function, and the inequality chain that ties them.
//!
//! `cargo run --example norms_chain`

use dirichlet::grid::summation_by_parts_residual;
use dirichlet::GridFunction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = GridFunction::from_values(vec![0.0, 1.0, 4.0, 3.0, 0.0])?;
    let n = x.n();
    let norms = x.norms();
    println!("x = {:?}", x.values());
    println!(
        "|x|_N = {:.6}  (sqrt 26 = {:.6})",
        norms.n_norm,
        26f64.sqrt()
    );
    println!(
        "|x|_D = {:.6}  (sqrt 20 = {:.6})",
        norms.delta_norm,
        20f64.sqrt()
    );
    println!(
        "|x|_E = {:.6}  (sqrt 24 = {:.6})",
        norms.e_norm,
        24f64.sqrt()
    );
    println!("|x|_inf = {}", norms.sup_norm);

    let labels = ["E/4", "D/2", "N", "sqrt(N) inf", "N D", "N^2 E"];
    for (label, value) in labels.iter().zip(norms.chain(n)) {
        println!("  {label:>12} = {value:.6}");
    }
    println!("smallest gap in the chain: {:.6}", norms.chain_slack(n));

    // Σ a Δb + Σ b(k+1) Δa = a(m+1)b(m+1) - a(1)b(1)
    let a: Vec<f64> = (0..=8).map(|k| (k as f64).sin()).collect();
    let b: Vec<f64> = (0..=8).map(|k| 1.0 / (1.0 + k as f64)).collect();
    println!(
        "summation by parts residual: {:e}",
        summation_by_parts_residual(&a, &b, 8)?
    );
    Ok(())
}
