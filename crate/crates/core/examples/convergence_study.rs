//! Grid refinement: sup-norm errors, observed orders and the difference
//! quotient bound, against a known solution and against a fine grid.
//!
//! `cargo run --release --example convergence_study`

use dirichlet::convergence::{derivative_bound_check, Provenance};
use dirichlet::{corpus, run_study, ConvergenceTable, SolverConfig};

fn show(table: &ConvergenceTable) {
    let source = match table.provenance {
        Provenance::Manufactured => "exact solution".to_string(),
        Provenance::FineGrid { n_ref } => format!("reference grid N = {n_ref}"),
    };
    println!("{} (errors against {source})", table.problem_id);
    println!(
        "{:>6} {:>12} {:>8} {:>10}",
        "N", "sup error", "order", "N|Δx|"
    );
    for row in &table.rows {
        let order = row
            .empirical_order
            .map_or("-".to_string(), |p| format!("{p:.3}"));
        println!(
            "{:>6} {:>12.4e} {:>8} {:>10.5}",
            row.n, row.sup_error, order, row.derivative_bound
        );
    }
    println!(
        "errors strictly decreasing: {}\n",
        table.strictly_decreasing()
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SolverConfig::default();
    let ns = [8, 16, 32, 64, 128, 256];
    for name in ["f1_sine", "f2_sine", "f3_bump", "f3"] {
        let problem = corpus::get(name)
            .expect("built-in problem")
            .study_problem()?;
        let table = run_study(&problem, name, &ns, &cfg)?;
        show(&table);
        derivative_bound_check(&table)?;
    }
    Ok(())
}
