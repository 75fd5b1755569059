//! Newton iteration on one grid, with its convergence trace.
//!
//! `cargo run --example newton_solve -- f2 64`

use dirichlet::corpus;
use dirichlet::problem::apriori_bound;
use dirichlet::{newton_solve, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "f1".to_string());
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);
    let Some(entry) = corpus::get(&name) else {
        let names: Vec<_> = corpus::entries().iter().map(|e| e.name).collect();
        eprintln!("unknown problem {name}; choose one of {names:?}");
        std::process::exit(1);
    };
    let spec = entry.study_problem()?.spec().clone();

    let report = newton_solve(&spec, n, &SolverConfig::default())?;
    println!(
        "{name}, N = {n}: {:?} after {} iterations",
        report.status, report.iterations
    );
    for step in &report.step_trace {
        println!(
            "  iter {:>2}  residual {:.3e}  step {}",
            step.iteration, step.residual_norm, step.step_length
        );
    }
    println!(
        "final residual {:.3e} (tolerance {:.3e})",
        report.residual_norm, report.tolerance
    );

    let x = &report.solution;
    let v_sup = spec.v_sup_on_grid(n)?;
    println!(
        "sup|x_N| = {:.6}, a-priori bound {:.6}",
        x.sup_norm(),
        apriori_bound(&spec, v_sup)?
    );
    let stride = (n / 8).max(1);
    for k in (0..=n).step_by(stride) {
        println!("  x({:.3}) = {:+.8}", x.node(k), x.values()[k]);
    }
    Ok(())
}
