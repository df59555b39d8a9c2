use opradius::bounds::{
    check_furuta_pointwise, evaluate_bound, furuta_sides, BoundCheckResult, BoundOutcome, BoundParams, Instance,
    TolerancePolicy, CATALOG,
};
use opradius::harness::{generate, EnsembleKind, EnsembleSpec};
use opradius::linalg::{CMatrix, C64};
use opradius::radius::{OperatorTuple, OptimizerOptions};
use opradius::{Error, ScalarMap};

fn jordan() -> CMatrix {
    CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
}

fn checked(out: BoundOutcome) -> BoundCheckResult {
    match out {
        BoundOutcome::Checked(r) => r,
        BoundOutcome::Skipped { id, reason } => panic!("{id} skipped: {reason}"),
    }
}

fn eval(id: &str, tuple: &OperatorTuple, f: &ScalarMap, params: &BoundParams) -> BoundCheckResult {
    checked(evaluate_bound(id, tuple, f, params, &TolerancePolicy::default()).unwrap())
}

fn ginibre(d: usize, count: usize, seed: u64) -> Vec<CMatrix> {
    generate(&EnsembleSpec::new(EnsembleKind::Ginibre, d, count, seed)).unwrap()
}

#[test]
fn kittaneh_is_tight_at_jordan() {
    let r = eval("B2", &OperatorTuple::single(jordan()), &ScalarMap::power(2.0).unwrap(), &BoundParams::default());
    assert!((r.lhs - 0.5).abs() <= 1e-12 && (r.rhs - 0.5).abs() <= 1e-12);
    assert!(r.slack.abs() <= 1e-10);
    assert!(r.pass);
    assert_eq!(r.pass, r.lhs <= r.rhs + r.tolerance_used);
}

#[test]
fn davis_wielandt_sandwich_at_jordan() {
    let r = eval("B5", &OperatorTuple::single(jordan()), &ScalarMap::power(2.0).unwrap(), &BoundParams::default());
    assert!(r.pass);
    // max(w, |T|^2) = 1 = dw(J) <= sqrt(1/4 + 1)
    assert!((r.links[0].lhs - 1.0).abs() < 1e-12);
    assert!((r.links[0].rhs - 1.0).abs() < 1e-9);
    assert!((r.links[1].rhs - 1.25f64.sqrt()).abs() < 1e-12);
}

#[test]
fn repeated_tuple_collapses_at_one_operator() {
    let t = OperatorTuple::single(ginibre(3, 1, 4).remove(0));
    let r = eval("B13", &t, &ScalarMap::power(2.0).unwrap(), &BoundParams::default());
    assert!(r.pass);
    for l in &r.links {
        assert!((l.lhs - l.rhs).abs() <= 1e-8, "{}: {} vs {}", l.label, l.lhs, l.rhs);
    }
}

#[test]
fn every_bound_holds_on_a_hermitian_pair_with_power_two() {
    let ops = generate(&EnsembleSpec::new(EnsembleKind::GueHermitian, 3, 4, 9)).unwrap();
    let tuple = OperatorTuple::new(ops[..2].to_vec()).unwrap();
    let params = BoundParams {
        alpha: 0.3,
        beta: 0.8,
        p: 3.0,
        q: 1.5,
        weights: vec![0.25, 0.75],
        lambdas: vec![vec![C64::new(0.0, 1.0), C64::new(-1.0, 0.0)]],
        companion: Some(OperatorTuple::new(ops[2..].to_vec()).unwrap()),
    };
    let f = ScalarMap::power(2.0).unwrap();
    let instance = Instance::new(tuple, params, OptimizerOptions::default(), TolerancePolicy::default()).unwrap();
    for spec in CATALOG.iter().filter(|s| s.id != "B22") {
        match instance.evaluate(spec.id, &f).unwrap() {
            BoundOutcome::Checked(r) => assert!(r.pass, "{} failed: {r:?}", spec.id),
            BoundOutcome::Skipped { reason, .. } => assert!(spec.id == "B8" || spec.id == "B14", "{}: {reason}", spec.id),
        }
    }
}

#[test]
fn final_davis_wielandt_upper_bound_fails_at_jordan() {
    // w_1(J, J*J) = sup sqrt(t(1-t)) + t = (1 + sqrt 2)/2 while the right side is (1 + 0 + 1 + 0)/2
    let r = eval("B22", &OperatorTuple::single(jordan()), &ScalarMap::power(1.0).unwrap(), &BoundParams::default());
    assert!((r.lhs - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-8, "{}", r.lhs);
    assert!((r.rhs - 1.0).abs() < 1e-12);
    assert!(!r.pass);
}

#[test]
fn triangle_inequality_fails_for_square_root() {
    // f = t^(1/2): w_f(A, A) = 4 w(A) but w_f(A, 0) + w_f(0, A) = 2 w(A)
    let a = ginibre(2, 1, 21).remove(0);
    let z = CMatrix::zeros(2);
    let params = BoundParams {
        companion: Some(OperatorTuple::new(vec![z.clone(), a.clone()]).unwrap()),
        ..Default::default()
    };
    let tuple = OperatorTuple::new(vec![a, z]).unwrap();
    let r = eval("B-P3", &tuple, &ScalarMap::power(0.5).unwrap(), &params);
    assert!((r.lhs - 2.0 * r.rhs).abs() < 1e-6 * r.lhs, "{} vs {}", r.lhs, r.rhs);
    assert!(!r.pass);
    // f = t^2 keeps the triangle inequality on the same tuples
    assert!(eval("B-P3", &tuple, &ScalarMap::power(2.0).unwrap(), &params).pass);
}

#[test]
fn gating_and_errors() {
    let t = OperatorTuple::single(jordan());
    let p = BoundParams::default();
    let tol = TolerancePolicy::default();
    let concave_only = evaluate_bound("B7", &t, &ScalarMap::log1p(), &p, &tol).unwrap();
    assert!(matches!(concave_only, BoundOutcome::Skipped { ref reason, .. } if reason.contains("convex")));
    let no_companion = evaluate_bound("B-P3", &t, &ScalarMap::power(2.0).unwrap(), &p, &tol).unwrap();
    assert!(no_companion.is_skipped());
    assert_eq!(
        evaluate_bound("B23", &t, &ScalarMap::power(2.0).unwrap(), &p, &tol).unwrap_err(),
        Error::UnknownBound("B23".into())
    );
    let bad = BoundParams {
        companion: Some(OperatorTuple::single(CMatrix::identity(3))),
        ..Default::default()
    };
    assert!(matches!(
        evaluate_bound("B-P3", &t, &ScalarMap::power(2.0).unwrap(), &bad, &tol),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn results_serialize_as_flat_objects() {
    let r = eval("B1", &OperatorTuple::single(CMatrix::identity(2)), &ScalarMap::power(2.0).unwrap(), &BoundParams::default());
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    for key in ["id", "lhs", "rhs", "slack", "pass", "tolerance_used", "fingerprint"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let back: BoundCheckResult = serde_json::from_value(v).unwrap();
    assert_eq!(back, r);
}

#[test]
fn furuta_examples() {
    let t = ginibre(3, 1, 8).remove(0);
    let r = check_furuta_pointwise(&t, 0.7, 0.6, 10_000, 3).unwrap();
    assert!(r.pass, "{r:?}");
    // a = b = 1 is Cauchy-Schwarz for T|T|
    assert!(check_furuta_pointwise(&t, 1.0, 1.0, 2_000, 4).unwrap().pass);
    let e2 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let (lhs, _) = furuta_sides(&jordan(), 0.5, 0.5, &e2, &e2).unwrap();
    assert_eq!(lhs, 0.0);
    assert!(check_furuta_pointwise(&t, 0.2, 0.3, 10, 1).is_err());
}
