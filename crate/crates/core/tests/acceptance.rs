//! Acceptance suite. One PASS/FAIL line per criterion; exits nonzero if any
//! criterion fails. Reference values come from closed forms and finite
//! differences computed here, not from the library.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use dirichlet::convergence::derivative_bound_check;
use dirichlet::corpus;
use dirichlet::discrete_op::{jacobian, phi_n, residual};
use dirichlet::problem::{apriori_bound, check_fx_lower};
use dirichlet::solver::{merit, merit_gradient, multi_start_uniqueness};
use dirichlet::{
    manufacture, newton_solve, parse, run_study, Constants, GridFunction, ProblemSpec,
    SolverConfig, StudyProblem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_grid(rng: &mut ChaCha8Rng, n: usize, amplitude: f64) -> GridFunction {
    GridFunction::from_fn(n, |_| rng.gen_range(-amplitude..amplitude)).unwrap()
}

fn sum_sq(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum()
}

/// `‖d‖²_Δ = Σ_{i=1}^N |d(i) − d(i−1)|²`, straight from the values.
fn delta_norm_sq(d: &[f64]) -> f64 {
    sum_sq(d.windows(2).map(|w| w[1] - w[0]))
}

fn norm_chain() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = f64::INFINITY;
    for n in 2..=64usize {
        for _ in 0..1000 {
            let amplitude = 10f64.powf(rng.gen_range(-4.0..4.0));
            let x = random_grid(&mut rng, n, amplitude);
            let v = x.values();
            let nf = n as f64;
            let e = sum_sq(v.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0])).sqrt();
            let d = delta_norm_sq(v).sqrt();
            let l2 = sum_sq(v[1..n].iter().copied()).sqrt();
            let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let chain = [0.25 * e, 0.5 * d, l2, nf.sqrt() * sup, nf * d, nf * nf * e];

            let norms = x.norms();
            let lib = norms.chain(n);
            for (a, b) in chain.iter().zip(lib) {
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
                    return Err(format!(
                        "library norms disagree at N = {n}: {lib:?} vs {chain:?}"
                    ));
                }
            }
            for w in chain.windows(2) {
                worst = worst.min((w[1] - w[0]) / amplitude);
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(
        worst >= -1e-12 && elapsed < Duration::from_secs(5),
        format!("min slack / amplitude {worst:.3e}, {elapsed:.2?}"),
    )
}

fn quadratic_exactness() -> Outcome {
    let cfg = SolverConfig::default();
    let plain = ProblemSpec::parse("0", "2", Constants::new(0.1, 0.1, 0.0)).unwrap();
    let manufactured = StudyProblem::Manufactured(
        manufacture(
            &parse("0").unwrap(),
            &parse("t^2 - t").unwrap(),
            Constants::new(0.1, 0.1, 0.0),
        )
        .unwrap(),
    );
    let mut worst = 0.0f64;
    for n in [4usize, 10, 100] {
        let report = newton_solve(&plain, n, &cfg).unwrap();
        if !report.converged() {
            return Err(format!("N = {n}: {:?}", report.status));
        }
        let nf = n as f64;
        for (k, x) in report.solution.values().iter().enumerate() {
            let kf = k as f64;
            worst = worst.max((x - (kf * kf - nf * kf) / (nf * nf)).abs());
        }
    }
    let table = run_study(&manufactured, "quadratic", &[4, 10, 100], &cfg).unwrap();
    let study = table.sup_errors().into_iter().fold(0.0, f64::max);
    ensure(
        worst <= 1e-12 && study <= 1e-12,
        format!("closed form deviation {worst:.2e}, sup_error vs t^2 - t {study:.2e}"),
    )
}

fn jacobian_checks() -> Outcome {
    let n = 32;
    let eps = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let problems: Vec<ProblemSpec> = ["f1", "f2", "f3"]
        .iter()
        .map(|p| corpus::get(p).unwrap().spec())
        .collect();
    let mut worst_res = 0.0f64;
    let mut worst_merit = 0.0f64;
    for pair in 0..100 {
        let spec = &problems[pair % problems.len()];
        let x = random_grid(&mut rng, n, 2.0);
        let h = random_grid(&mut rng, n, 1.0);
        let plus = x.axpy(eps, &h);
        let minus = x.axpy(-eps, &h);

        let rp = residual(spec, &plus).unwrap().vector;
        let rm = residual(spec, &minus).unwrap().vector;
        let jh = jacobian(spec, &x).unwrap().matvec(h.interior());
        let fd: Vec<f64> = rp
            .iter()
            .zip(&rm)
            .map(|(p, m)| (p - m) / (2.0 * eps))
            .collect();
        let diff = sum_sq(fd.iter().zip(&jh).map(|(a, b)| a - b)).sqrt();
        worst_res = worst_res.max(diff / sum_sq(jh.iter().copied()).sqrt());

        let g = merit_gradient(spec, &x).unwrap();
        let analytic: f64 = g.iter().zip(h.interior()).map(|(a, b)| a * b).sum();
        let fd = (merit(spec, &plus).unwrap() - merit(spec, &minus).unwrap()) / (2.0 * eps);
        // Relative to the Cauchy–Schwarz scale |∇m|·|h|, so near-orthogonal
        // directions do not divide by a vanishing derivative.
        let scale = sum_sq(g.iter().copied()).sqrt() * sum_sq(h.interior().iter().copied()).sqrt();
        worst_merit = worst_merit.max((fd - analytic).abs() / scale);
    }
    ensure(
        worst_res <= 1e-5 && worst_merit <= 1e-5,
        format!("residual rel. error {worst_res:.2e}, merit rel. error {worst_merit:.2e}"),
    )
}

fn uniqueness() -> Outcome {
    let cfg = SolverConfig::default();
    let mut details = Vec::new();
    let mut ok = true;
    for name in ["f1", "f2"] {
        let spec = corpus::get(name).unwrap().spec();
        match multi_start_uniqueness(&spec, 50, &cfg, 5, 10.0, 2024) {
            Ok(spread) => {
                ok &= spread <= 1e-8;
                details.push(format!("{name} spread {spread:.2e}"));
            }
            Err(e) => {
                ok = false;
                details.push(format!("{name}: {e}"));
            }
        }
    }
    ensure(ok, details.join(", "))
}

fn apriori() -> Outcome {
    let cfg = SolverConfig::default();
    let mut worst = f64::NEG_INFINITY;
    let mut where_ = String::new();
    for entry in corpus::entries() {
        let problem = entry.study_problem().unwrap();
        let spec = problem.spec();
        for n in 8..=256usize {
            let report = newton_solve(spec, n, &cfg).unwrap();
            if !report.converged() {
                return Err(format!("{} N = {n}: {:?}", entry.name, report.status));
            }
            // sup |v| over the nodes, evaluated here.
            let v_sup = (0..=n)
                .map(|k| spec.v().eval(k as f64 / n as f64, 0.0).unwrap().abs())
                .fold(0.0, f64::max);
            let c = spec.constants();
            let m = (v_sup + c.b) / (1.0 - c.a);
            debug_assert!((m - apriori_bound(spec, v_sup).unwrap()).abs() <= 1e-12 * m);
            let excess = report.solution.sup_norm() - m;
            if excess > worst {
                worst = excess;
                where_ = format!("{} N = {n}", entry.name);
            }
        }
    }
    ensure(
        worst <= 1e-8,
        format!("max sup|x_N| - M = {worst:.3e} ({where_})"),
    )
}

fn sine_study() -> Result<dirichlet::ConvergenceTable, String> {
    let problem = corpus::get("f1_sine")
        .unwrap()
        .study_problem()
        .map_err(|e| e.to_string())?;
    run_study(
        &problem,
        "f1_sine",
        &[8, 16, 32, 64, 128],
        &SolverConfig::default(),
    )
    .map_err(|e| e.to_string())
}

fn convergence() -> Outcome {
    let start = Instant::now();
    let table = sine_study()?;
    let elapsed = start.elapsed();
    let errors = table.sup_errors();
    let last = *errors.last().unwrap();
    // Order between the last two rows, recomputed from the errors.
    let order = (errors[3] / errors[4]).ln() / 2f64.ln();
    ensure(
        table.strictly_decreasing()
            && last <= 1e-3
            && order >= 1.8
            && elapsed < Duration::from_secs(10),
        format!(
            "errors [{}], last order {order:.3}, {elapsed:.2?}",
            errors
                .iter()
                .map(|e| format!("{e:.3e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn derivative_bound() -> Outcome {
    let table = sine_study()?;
    derivative_bound_check(&table).map_err(|e| e.to_string())?;
    let q: Vec<f64> = table.rows.iter().map(|r| r.derivative_bound).collect();
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = q.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(
        min > 0.0 && max / min <= 10.0,
        format!("max N|Δx_N| per N {q:.4?}, ratio {:.3}", max / min),
    )
}

fn falsifier() -> Outcome {
    let bad = ProblemSpec::parse("-2*x", "1", Constants::new(2.0, 1.0, -1.0)).unwrap();
    let report = check_fx_lower(&bad, 10.0, 201, 2001).unwrap();
    let witness = report.worst().cloned();
    let f2 = ProblemSpec::parse(
        corpus::F2,
        "1",
        Constants::new(0.12, 4.3, (-PI).exp() - 1.0),
    )
    .unwrap();
    let clean = check_fx_lower(&f2, 10.0, 201, 2001).unwrap();
    let ok =
        report.violated() && witness.as_ref().is_some_and(|w| w.lhs < w.rhs) && !clean.violated();
    ensure(
        ok,
        format!(
            "-2x witness {:?}; f2 violations {}",
            witness.map(|w| (w.t, w.x, w.lhs)),
            clean.witnesses.len()
        ),
    )
}

fn convexity() -> Outcome {
    let n = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::INFINITY;
    let mut where_ = String::new();
    for entry in corpus::entries()
        .into_iter()
        .filter(|e| e.constants.fx_lower > -1.0)
    {
        let spec = entry.study_problem().unwrap().spec().clone();
        let lower = spec.constants().fx_lower;
        for _ in 0..100 {
            let x = random_grid(&mut rng, n, 2.0);
            let a: Vec<f64> = (1..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u = random_grid(&mut rng, n, 1.0);
            let w = random_grid(&mut rng, n, 1.0);
            let mid = (&u + &w).scale(0.5);
            let phi = |h: &GridFunction| phi_n(&spec, &x, &a, h).unwrap();
            let gap = 0.5 * phi(&u) + 0.5 * phi(&w) - phi(&mid);
            let d: Vec<f64> = u
                .values()
                .iter()
                .zip(w.values())
                .map(|(p, q)| p - q)
                .collect();
            let required = 0.25 * (1.0 + lower) * delta_norm_sq(&d) - 1e-10;
            let margin = gap - required;
            if margin < worst {
                worst = margin;
                where_ = format!("{}: gap {gap:.4e} < required {required:.4e}", entry.name);
            }
        }
    }
    ensure(
        worst >= 0.0,
        format!("min gap - 1/4(1+fx_lower)|u-w|_D^2 = {worst:.3e} ({where_})"),
    )
}

fn determinism() -> Outcome {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/f1_sine.cfg");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_dirichlet"))
            .args(["converge", "--config", config, "--seed", "17"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(
        a.status.success() && b.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout,
        format!(
            "{} bytes, exit {:?}/{:?}",
            a.stdout.len(),
            a.status.code(),
            b.status.code()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("norm chain, N = 2..64, 1000 samples each", norm_chain),
        ("quadratic exactness, N = 4, 10, 100", quadratic_exactness),
        (
            "residual and merit derivatives vs finite differences",
            jacobian_checks,
        ),
        ("uniqueness from 5 random starts, f1 and f2", uniqueness),
        ("a-priori bound on the corpus, N = 8..256", apriori),
        ("manufactured sin(pi t) convergence with f1", convergence),
        ("bounded N|Δx_N| across refinement", derivative_bound),
        ("condition falsifier", falsifier),
        (
            "midpoint gap of Phi_N >= 1/4(1 + fx_lower)|u - w|_D^2",
            convexity,
        ),
        ("byte-identical converge output", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  [{:>2}] {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  [{:>2}] {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
