//! Built-in demonstration problems.
//!
//! The three nonlinearities `f1`, `f2`, `f3` satisfy the discrete
//! solvability hypotheses with the constants below. Each constant was
//! obtained by bounding the expression by hand and confirming on a dense
//! sample of `[0,1] × [-1000, 1000]`:
//!
//! | problem | A    | B    | inf f_x observed | declared fx_lower |
//! |---------|------|------|------------------|-------------------|
//! | f1      | 0.1  | 0.5  | -0.158           | -0.25             |
//! | f2      | 0.12 | 4.3  | e^-π - 1         | -0.9568           |
//! | f3      | 0.5  | 0.9  | -0.245           | -0.25             |

use std::f64::consts::PI;

use crate::convergence::{manufacture, ManufacturedProblem, StudyError, StudyProblem};
use crate::expr::parse;
use crate::problem::{Constants, ProblemSpec};

pub const F1: &str = "(t + sin(x))/(2*x^2 + 4)";
pub const F2: &str = "x*exp(t - pi) - atan(x) + exp(t)";
pub const F3: &str = "(x^3 + x^2 - x)/(2*x^2 + 5) + t^3 - sin(t)";

/// Forcing term for an entry: either given directly or manufactured from
/// a known solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Forcing {
    Given(&'static str),
    Manufactured { x_star: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub f: &'static str,
    pub forcing: Forcing,
    pub constants: Constants,
}

pub fn f1_constants() -> Constants {
    Constants::new(0.1, 0.5, -0.25)
}

pub fn f2_constants() -> Constants {
    // inf f2_x = e^-π - 1 ≈ -0.956786, attained at t = 0, x = 0.
    Constants::new(0.12, 4.3, (-PI).exp() - 1.0)
}

pub fn f3_constants() -> Constants {
    Constants::new(0.5, 0.9, -0.25)
}

pub fn entries() -> Vec<CorpusEntry> {
    use Forcing::*;
    let e = |name, f, forcing, constants| CorpusEntry {
        name,
        f,
        forcing,
        constants,
    };
    vec![
        e("f1", F1, Given("1"), f1_constants()),
        e("f2", F2, Given("1"), f2_constants()),
        e("f3", F3, Given("1"), f3_constants()),
        e(
            "quadratic",
            "0",
            Manufactured { x_star: "t^2 - t" },
            Constants::new(0.1, 0.1, 0.0),
        ),
        e(
            "zero",
            "0.5*sin(x)",
            Given("0"),
            Constants::new(0.5, 0.01, -0.5),
        ),
        e(
            "f1_sine",
            F1,
            Manufactured {
                x_star: "sin(pi*t)",
            },
            f1_constants(),
        ),
        e(
            "f2_sine",
            F2,
            Manufactured {
                x_star: "sin(pi*t)",
            },
            f2_constants(),
        ),
        e(
            "f3_bump",
            F3,
            Manufactured {
                x_star: "t*(1 - t)*exp(t)",
            },
            f3_constants(),
        ),
    ]
}

pub fn get(name: &str) -> Option<CorpusEntry> {
    entries().into_iter().find(|e| e.name == name)
}

impl CorpusEntry {
    pub fn study_problem(&self) -> Result<StudyProblem, StudyError> {
        let f = parse(self.f).expect("corpus expressions parse");
        match self.forcing {
            Forcing::Given(v) => {
                let v = parse(v).expect("corpus expressions parse");
                Ok(StudyProblem::Plain(ProblemSpec::new(f, v, self.constants)?))
            }
            Forcing::Manufactured { x_star } => {
                let x_star = parse(x_star).expect("corpus expressions parse");
                Ok(StudyProblem::Manufactured(manufacture(
                    &f,
                    &x_star,
                    self.constants,
                )?))
            }
        }
    }

    pub fn spec(&self) -> ProblemSpec {
        self.study_problem()
            .expect("corpus entries are valid")
            .spec()
            .clone()
    }

    pub fn manufactured(&self) -> Option<ManufacturedProblem> {
        match self.study_problem().ok()? {
            StudyProblem::Manufactured(m) => Some(m),
            StudyProblem::Plain(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{check_fx_lower, check_growth, classify};

    #[test]
    fn every_entry_builds_and_classifies_discrete() {
        for e in entries() {
            let spec = e.spec();
            assert!(classify(&spec).discrete_theorem_applies, "{}", e.name);
        }
    }

    #[test]
    fn declared_constants_survive_the_falsifier() {
        for name in ["f1", "f2", "f3"] {
            let spec = get(name).unwrap().spec();
            assert!(
                !check_growth(&spec, 1000.0, 21, 20001).unwrap().violated(),
                "{name}"
            );
            assert!(
                !check_fx_lower(&spec, 1000.0, 21, 20001).unwrap().violated(),
                "{name}"
            );
        }
    }
}
