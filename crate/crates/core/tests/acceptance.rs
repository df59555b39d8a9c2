//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use opradius::bounds::{evaluate_bound, BoundOutcome, BoundParams, TolerancePolicy};
use opradius::harness::{generate, run_suite, EnsembleKind, EnsembleSpec, SuiteConfig, SuiteReport};
use opradius::linalg::{aluthge, operator_norm, CMatrix, C64};
use opradius::radius::{davis_wielandt, f_radius, numerical_radius, oracle_radius, q_radius, OperatorTuple, OptimizerOptions};
use opradius::ScalarMap;

const FIXTURE_TOL: f64 = 1e-8;
const FIXTURE_SECONDS: f64 = 1.0;
const EQUALITY_TOL: f64 = 1e-10;
const SUITE_SECONDS: f64 = 600.0;
const ORACLE_INSTANCES: usize = 25;
const ORACLE_SAMPLES: usize = 1_000_000;
const ORACLE_AGREEMENT: f64 = 1e-4;
const ORACLE_FLOOR: f64 = 1e-9;
const REDUCTION_DRAWS: usize = 100;
const REDUCTION_TOL: f64 = 1e-8;
const MONOTONE_PAIRS: usize = 50;
const MONOTONE_TOL: f64 = 1e-8;
const SYMMETRY_INSTANCES: usize = 50;
const SYMMETRY_TOL: f64 = 1e-6;

struct Line {
    id: usize,
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Line {
    fn new(id: usize, pass: bool, summary: String) -> Self {
        Line {
            id,
            pass,
            summary,
            details: Vec::new(),
        }
    }
}

fn jordan() -> CMatrix {
    CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
}

fn tuple(kind: EnsembleKind, d: usize, n: usize, seed: u64) -> OperatorTuple {
    OperatorTuple::new(generate(&EnsembleSpec::new(kind, d, n, seed)).unwrap()).unwrap()
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let p2 = ScalarMap::power(2.0).unwrap();
    let opts = OptimizerOptions::default();
    let j = jordan();
    let i2 = CMatrix::identity(2);
    let fixtures: Vec<(&str, f64, f64)> = vec![
        ("w(J)", numerical_radius(&j).unwrap().value, 0.5),
        ("||J||", operator_norm(&j), 1.0),
        ("dw(J)", davis_wielandt(&j, &p2, &opts).unwrap().value, 1.0),
        ("||Aluthge(J)||", aluthge(&j).unwrap().frobenius_norm(), 0.0),
        (
            "w_e(J, J*)",
            f_radius(&OperatorTuple::new(vec![j.clone(), j.adjoint()]).unwrap(), &p2, &opts).unwrap().value,
            std::f64::consts::FRAC_1_SQRT_2,
        ),
        (
            "w_e(I, I)",
            f_radius(&OperatorTuple::new(vec![i2.clone(), i2]).unwrap(), &p2, &opts).unwrap().value,
            2f64.sqrt(),
        ),
        (
            "||[[1,1],[0,1]]||",
            operator_norm(&CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])),
            (1.0 + 5f64.sqrt()) / 2.0,
        ),
    ];
    let elapsed = start.elapsed().as_secs_f64();
    let worst = fixtures.iter().map(|(_, got, want)| (got - want).abs()).fold(0.0, f64::max);
    let pass = worst <= FIXTURE_TOL && elapsed < FIXTURE_SECONDS;
    let mut line = Line::new(
        1,
        pass,
        format!(
            "analytic fixtures: worst |error| {worst:.2e} over {} values in {elapsed:.3} s (tol {FIXTURE_TOL:e}, limit {FIXTURE_SECONDS} s)",
            fixtures.len()
        ),
    );
    for (name, got, want) in &fixtures {
        if (got - want).abs() > FIXTURE_TOL {
            line.details.push(format!("{name} = {got} expected {want}"));
        }
    }
    line
}

fn criterion_2() -> Line {
    let out = evaluate_bound(
        "B2",
        &OperatorTuple::single(jordan()),
        &ScalarMap::power(2.0).unwrap(),
        &BoundParams::default(),
        &TolerancePolicy::default(),
    )
    .unwrap();
    match out {
        BoundOutcome::Checked(r) => {
            let pass = (r.lhs - 0.5).abs() <= EQUALITY_TOL && (r.rhs - 0.5).abs() <= EQUALITY_TOL && r.slack.abs() <= EQUALITY_TOL && r.pass;
            Line::new(
                2,
                pass,
                format!(
                    "B2 equality at J: lhs {:.15} rhs {:.15} slack {:.2e} (tol {EQUALITY_TOL:e})",
                    r.lhs, r.rhs, r.slack
                ),
            )
        }
        BoundOutcome::Skipped { reason, .. } => Line::new(2, false, format!("B2 skipped: {reason}")),
    }
}

fn criterion_3(report: &SuiteReport) -> Line {
    let failing: Vec<_> = report.bounds.iter().filter(|b| !b.stats.pass()).collect();
    let rechecks: usize = report.bounds.iter().map(|b| b.stats.oracle_rechecks).sum();
    let pass = report.overall_pass && report.wall_time_secs <= SUITE_SECONDS;
    let mut line = Line::new(
        3,
        pass,
        format!(
            "full suite: {} instances, {} failing results in {} bounds, {} errors, {} oracle re-checks, {:.0} s (limit {SUITE_SECONDS} s)",
            report.instances,
            report.failures.len(),
            failing.len(),
            report.errors.len(),
            rechecks,
            report.wall_time_secs
        ),
    );
    for b in &failing {
        let s = &b.stats;
        let at = s.argmin.as_ref().map_or(String::new(), |fp| {
            format!(
                " at {} d={} n={} map={} trial={}",
                fp.ensemble.as_deref().unwrap_or("-"),
                fp.dim,
                fp.n,
                fp.map,
                fp.trial.unwrap_or(0)
            )
        });
        let mut maps: Vec<String> = report.failures.iter().filter(|f| f.id == b.id).map(|f| f.fingerprint.map.clone()).collect();
        maps.sort();
        maps.dedup();
        line.details.push(format!(
            "{}: {} of {} failed (maps {}), worst slack {:.3e}{at}",
            b.id,
            s.failures + s.errors,
            s.checked,
            maps.join(", "),
            s.min_slack.unwrap_or(f64::NAN)
        ));
    }
    line.details.extend(report.render_text().lines().map(String::from));
    line
}

fn criterion_4() -> Line {
    let f = ScalarMap::power(2.0).unwrap();
    let mut worst_gap: f64 = 0.0;
    let mut worst_shortfall = f64::NEG_INFINITY;
    let mut details = Vec::new();
    for k in 0..ORACLE_INSTANCES {
        let t = tuple(EnsembleKind::Ginibre, 2, 2, 4000 + k as u64);
        let ms = f_radius(&t, &f, &OptimizerOptions::with_seed(k as u64)).unwrap().value;
        let oracle = oracle_radius(&t, &f, ORACLE_SAMPLES, 9000 + k as u64).unwrap().value;
        worst_gap = worst_gap.max((ms - oracle).abs());
        worst_shortfall = worst_shortfall.max(oracle - ms);
        if (ms - oracle).abs() > ORACLE_AGREEMENT || ms < oracle - ORACLE_FLOOR {
            details.push(format!("instance {k}: multistart {ms} oracle {oracle}"));
        }
    }
    let mut line = Line::new(
        4,
        details.is_empty(),
        format!(
            "oracle agreement on {ORACLE_INSTANCES} (d=2, n=2, power:2) tuples: max |multistart - oracle| {worst_gap:.2e} (tol {ORACLE_AGREEMENT:e}), max oracle - multistart {worst_shortfall:.2e} (tol {ORACLE_FLOOR:e})"
        ),
    );
    line.details = details;
    line
}

fn criterion_5() -> Line {
    let f = ScalarMap::power(2.0).unwrap();
    let mut worst_reduction: f64 = 0.0;
    let mut details = Vec::new();
    for k in 0..REDUCTION_DRAWS {
        let d = 2 + k % 3;
        let t = generate(&EnsembleSpec::new(EnsembleKind::Ginibre, d, 1, 5000 + k as u64)).unwrap().remove(0);
        let w = numerical_radius(&t).unwrap().value;
        let wf = f_radius(&OperatorTuple::single(t), &f, &OptimizerOptions::with_seed(k as u64)).unwrap().value;
        worst_reduction = worst_reduction.max((w - wf).abs());
        if (w - wf).abs() > REDUCTION_TOL {
            details.push(format!("draw {k} (d={d}): w {w} w_f {wf}"));
        }
    }
    let mut worst_slack = f64::INFINITY;
    for k in 0..MONOTONE_PAIRS {
        let d = 2 + k % 3;
        let t = tuple(EnsembleKind::Ginibre, d, 2, 6000 + k as u64);
        let opts = OptimizerOptions::with_seed(k as u64);
        let v: Vec<f64> = [1.0, 2.0, 3.0, 4.0].iter().map(|&q| q_radius(&t, q, &opts).unwrap().value).collect();
        for w in v.windows(2) {
            worst_slack = worst_slack.min(w[0] - w[1]);
        }
        if v.windows(2).any(|w| w[0] - w[1] < -MONOTONE_TOL) {
            details.push(format!("pair {k} (d={d}): w_q for q=1..4 {v:?}"));
        }
    }
    let mut line = Line::new(
        5,
        details.is_empty(),
        format!(
            "reduction: max |w_f(T) - w(T)| {worst_reduction:.2e} over {REDUCTION_DRAWS} draws (tol {REDUCTION_TOL:e}); monotone in q: min slack {worst_slack:.2e} over {MONOTONE_PAIRS} pairs (tol {MONOTONE_TOL:e})"
        ),
    );
    line.details = details;
    line
}

fn criterion_6() -> Line {
    let maps = [
        ScalarMap::power(2.0).unwrap(),
        ScalarMap::power(1.0).unwrap(),
        ScalarMap::power(3.0).unwrap(),
        ScalarMap::power(0.5).unwrap(),
    ];
    let mut worst = [0.0f64; 3];
    let mut details = Vec::new();
    for k in 0..SYMMETRY_INSTANCES {
        let d = 2 + k % 3;
        let f = &maps[k % maps.len()];
        let t = tuple(EnsembleKind::Ginibre, d, 2, 7000 + k as u64);
        let opts = OptimizerOptions::with_seed(k as u64);
        let base = f_radius(&t, f, &opts).unwrap().value;
        let tol = SYMMETRY_TOL * base.max(1.0);

        let adj = f_radius(&t.adjoint(), f, &opts).unwrap().value;
        let u = generate(&EnsembleSpec::new(EnsembleKind::HaarUnitary, d, 1, 8000 + k as u64)).unwrap().remove(0);
        let conj = f_radius(&t.map(|m| &(&u.adjoint() * m) * &u), f, &opts).unwrap().value;
        let alpha = C64::from_polar(0.3 + 2.0 * (k as f64 / SYMMETRY_INSTANCES as f64), 0.7 * k as f64);
        let scaled = f_radius(&t.map(|m| m.scale(alpha)), f, &opts).unwrap().value;

        let errors = [(adj - base).abs(), (conj - base).abs(), (scaled - alpha.norm() * base).abs()];
        for (w, e) in worst.iter_mut().zip(errors) {
            *w = w.max(e / base.max(1.0));
        }
        for (name, e) in ["adjoint", "unitary", "homogeneity"].iter().zip(errors) {
            if e > tol * if *name == "homogeneity" { alpha.norm().max(1.0) } else { 1.0 } {
                details.push(format!("instance {k} ({}, d={d}) {name}: error {e:.2e} on value {base}", f.name()));
            }
        }
    }
    let mut line = Line::new(
        6,
        details.is_empty(),
        format!(
            "symmetry on {SYMMETRY_INSTANCES} tuples each: max relative error adjoint {:.2e}, unitary {:.2e}, homogeneity {:.2e} (tol {SYMMETRY_TOL:e})",
            worst[0], worst[1], worst[2]
        ),
    );
    line.details = details;
    line
}

fn criterion_7(first: &SuiteReport) -> Line {
    let second = run_suite(&SuiteConfig::full()).unwrap();
    let a = first.without_timing().to_json().unwrap();
    let b = second.without_timing().to_json().unwrap();
    let first_diff = a.lines().zip(b.lines()).position(|(x, y)| x != y);
    let mut line = Line::new(
        7,
        a == b,
        format!("determinism: two full-suite runs give {} JSON reports ({} bytes)", if a == b { "identical" } else { "different" }, a.len()),
    );
    if let Some(i) = first_diff {
        line.details.push(format!("first difference at line {}", i + 1));
    }
    line
}

fn main() -> ExitCode {
    let mut lines = vec![criterion_1(), criterion_2()];
    let report = run_suite(&SuiteConfig::full()).unwrap();
    lines.push(criterion_3(&report));
    lines.push(criterion_4());
    lines.push(criterion_5());
    lines.push(criterion_6());
    lines.push(criterion_7(&report));

    lines.sort_by_key(|l| l.id);
    for l in &lines {
        println!("criterion {} {}: {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.summary);
        for d in &l.details {
            println!("    {d}");
        }
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("acceptance: {} of {} criteria pass", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
