//! Classifies the built-in problems and samples their structural conditions.
//!
//! `cargo run --release --example check_conditions`

use dirichlet::corpus;
use dirichlet::problem::{apriori_bound, check_fx_lower, check_growth, classify, default_x_range};
use dirichlet::{Constants, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:<10} {:>6} {:>6} {:>9} {:>6} {:>6} {:>9} {:>9}",
        "problem", "A", "B", "fx_lower", "cont", "disc", "growth", "f_x"
    );
    for entry in corpus::entries() {
        let spec = entry.spec();
        let c = spec.constants();
        let class = classify(&spec);
        let range = default_x_range(&spec)?;
        let growth = check_growth(&spec, range, 101, 1001)?;
        let fx = check_fx_lower(&spec, range, 101, 1001)?;
        println!(
            "{:<10} {:>6} {:>6} {:>9.5} {:>6} {:>6} {:>9} {:>9}",
            entry.name,
            c.a,
            c.b,
            c.fx_lower,
            class.continuous_theorem_applies,
            class.discrete_theorem_applies,
            if growth.violated() { "violated" } else { "ok" },
            if fx.violated() { "violated" } else { "ok" },
        );
    }

    // A declaration the sampler refutes.
    let spec = ProblemSpec::parse("-2*x", "1", Constants::new(2.0, 1.0, -1.0))?;
    let report = check_fx_lower(&spec, 10.0, 11, 21)?;
    let w = report.worst().expect("f_x = -2 is below -1 everywhere");
    println!(
        "\nf = -2x, fx_lower = -1: f_x({}, {}) = {} < {}",
        w.t, w.x, w.lhs, w.rhs
    );
    println!(
        "continuous theorem still applies: {}",
        classify(&spec).continuous_theorem_applies
    );

    let f1 = corpus::get("f1").expect("f1 is in the corpus").spec();
    println!(
        "\nf1 with v = 1: every solution has sup|x| <= {}",
        apriori_bound(&f1, 1.0)?
    );
    Ok(())
}
