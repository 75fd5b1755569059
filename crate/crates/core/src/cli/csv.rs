//! CSV rendering. Reals are written with 17 significant digits in
//! scientific notation so every value round-trips exactly.

use std::io::{self, Write};

use crate::convergence::ConvergenceTable;
use crate::grid::GridFunction;

pub fn real(value: f64) -> String {
    format!("{value:.16e}")
}

fn optional(value: Option<f64>) -> String {
    value.map(real).unwrap_or_default()
}

/// Columns `k,t,x`, one row per node including the boundary.
pub fn write_solution<W: Write + ?Sized>(out: &mut W, x: &GridFunction) -> io::Result<()> {
    writeln!(out, "k,t,x")?;
    for (k, value) in x.values().iter().enumerate() {
        writeln!(out, "{k},{},{}", real(x.node(k)), real(*value))?;
    }
    Ok(())
}

/// Columns `N,sup_error,empirical_order,derivative_bound`; a missing order
/// is an empty field.
pub fn write_convergence<W: Write + ?Sized>(
    out: &mut W,
    table: &ConvergenceTable,
) -> io::Result<()> {
    writeln!(out, "N,sup_error,empirical_order,derivative_bound")?;
    for row in &table.rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.n,
            real(row.sup_error),
            optional(row.empirical_order),
            real(row.derivative_bound)
        )?;
    }
    Ok(())
}
