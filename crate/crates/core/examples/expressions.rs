//! Parsing, evaluating and differentiating right-hand sides.
//!
//! `cargo run --example expressions -- "x*exp(t - pi) - atan(x)"`

use dirichlet::{parse, Var};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "(t + sin(x))/(2*x^2 + 4)".to_string());
    let f = match parse(&text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{text}\n{}^ {e}", " ".repeat(e.pos));
            std::process::exit(1);
        }
    };
    let fx = f.diff(Var::X)?;
    println!("f     = {f}");
    println!("df/dx = {fx}");
    println!(
        "{:>6} {:>6} {:>14} {:>14} {:>14}",
        "t", "x", "f", "f_x", "central diff"
    );
    let h = 1e-6;
    for &(t, x) in &[(0.0, 0.0), (0.5, 1.0), (1.0, -2.5)] {
        let fd = (f.eval(t, x + h)? - f.eval(t, x - h)?) / (2.0 * h);
        println!(
            "{t:>6} {x:>6} {:>14.8} {:>14.8} {:>14.8}",
            f.eval(t, x)?,
            fx.eval(t, x)?,
            fd
        );
    }

    // Substituting a curve for x gives a function of t alone.
    let curve = parse("sin(pi*t)")?;
    let along = f.substitute(Var::X, &curve);
    println!(
        "f(t, sin(pi t)) at t = 0.25: {}",
        along.eval(0.25, f64::NAN)?
    );
    Ok(())
}
