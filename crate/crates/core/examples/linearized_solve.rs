//! The linearised operator at a point, its tridiagonal solve, and the
//! quadratic functional it minimises.
//!
//! `cargo run --example linearized_solve`

use dirichlet::corpus;
use dirichlet::discrete_op::{jacobian, linearized_solve, phi_n, residual};
use dirichlet::GridFunction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = corpus::get("f3").expect("f3 is in the corpus").spec();
    let n = 12;
    let x = GridFunction::from_fn(n, |k| (k as f64 / n as f64 * 3.0).sin())?;
    let a: Vec<f64> = (1..n).map(|k| (-1f64).powi(k as i32) * 0.1).collect();

    let j = jacobian(&spec, &x)?;
    println!("diagonal of D_N'(x): {:.5?}", j.diag());
    let h = linearized_solve(&spec, &x, &a)?;
    println!("h = {:.5?}", h.values());
    let jh = j.matvec(h.interior());
    let err = jh
        .iter()
        .zip(&a)
        .map(|(l, r)| (l - r).abs())
        .fold(0.0, f64::max);
    println!("max |D_N'(x) h - a| = {err:e}");

    let best = phi_n(&spec, &x, &a, &h)?;
    println!("Phi_N(h) = {best:.8}");
    for (i, eps) in [1e-1, 1e-2, 1e-3].iter().enumerate() {
        let bump = GridFunction::from_fn(n, |k| if k == i + 3 { *eps } else { 0.0 })?;
        let moved = phi_n(&spec, &x, &a, &(&h + &bump))?;
        println!(
            "  Phi_N(h + {eps:e} e_{}) - Phi_N(h) = {:e}",
            i + 3,
            moved - best
        );
    }

    println!("residual norm at x: {:e}", residual(&spec, &x)?.norm);
    Ok(())
}
