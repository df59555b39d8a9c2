use opradius::harness::{generate, run_suite, EnsembleKind, EnsembleSpec, SuiteConfig};
use opradius::linalg::CMatrix;

fn config(kind: EnsembleKind, dim: usize, ns: &[usize], bounds: &[&str], maps: &[&str], trials: usize) -> SuiteConfig {
    let mut cfg = SuiteConfig::grid(&[kind], &[dim], ns, trials, 42);
    cfg.bounds = bounds.iter().map(|s| s.to_string()).collect();
    cfg.maps = maps.iter().map(|s| s.to_string()).collect();
    cfg
}

#[test]
fn norm_sandwich_over_ginibre() {
    let r = run_suite(&config(EnsembleKind::Ginibre, 2, &[1], &["B1"], &["power:2"], 50)).unwrap();
    let b1 = r.bound("B1").unwrap();
    assert_eq!(b1.stats.checked, 50);
    assert_eq!(b1.stats.passes, 50);
    assert_eq!(b1.stats.failures, 0);
    assert!(r.overall_pass);
}

#[test]
fn kittaneh_slack_vanishes_on_nilpotent_jordan() {
    let r = run_suite(&config(EnsembleKind::NilpotentJordan, 2, &[1], &["B2"], &["power:2"], 10)).unwrap();
    let b2 = r.bound("B2").unwrap();
    assert!(r.overall_pass);
    assert!(b2.stats.min_slack.unwrap().abs() <= 1e-10);
}

#[test]
fn repeated_tuple_is_tight_at_one_operator() {
    let r = run_suite(&config(EnsembleKind::Ginibre, 3, &[1], &["B13"], &["power:2"], 5)).unwrap();
    assert!(r.overall_pass);
    assert!(r.bound("B13").unwrap().stats.min_slack.unwrap().abs() <= 1e-8);
}

#[test]
fn skips_are_counted_per_map() {
    let r = run_suite(&config(EnsembleKind::Psd, 2, &[2], &["B8", "B7"], &["power:2", "log1p"], 3)).unwrap();
    let b8 = &r.bound("B8").unwrap().stats;
    let b7 = &r.bound("B7").unwrap().stats;
    assert_eq!((b8.checked, b8.skips), (3, 3));
    assert_eq!((b7.checked, b7.skips), (3, 3));
    assert_eq!(r.cells.len(), 4);
}

#[test]
fn reports_are_reproducible() {
    let mut cfg = SuiteConfig::grid(&[EnsembleKind::Ginibre, EnsembleKind::HaarUnitary], &[2, 3], &[1, 2], 2, 5);
    cfg.bounds = vec!["B4".into(), "B9".into(), "B17".into(), "B-P3".into()];
    let a = run_suite(&cfg).unwrap().without_timing().to_json().unwrap();
    let b = run_suite(&cfg).unwrap().without_timing().to_json().unwrap();
    assert_eq!(a, b);
    cfg.seed = 6;
    let c = run_suite(&cfg).unwrap().without_timing().to_json().unwrap();
    assert_ne!(a, c);
}

#[test]
fn text_report_lists_every_bound() {
    let r = run_suite(&config(EnsembleKind::Ginibre, 2, &[1], &["B1", "B3"], &["power:2"], 2)).unwrap();
    let text = r.render_text();
    assert!(text.lines().any(|l| l.starts_with("B1 ")));
    assert!(text.lines().any(|l| l.starts_with("B3 ")));
    assert!(text.trim_end().ends_with("overall: PASS"));
}

#[test]
fn ensemble_examples() {
    let j = generate(&EnsembleSpec::new(EnsembleKind::NilpotentJordan, 2, 1, 0)).unwrap();
    assert_eq!(j, vec![CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])]);
    for h in generate(&EnsembleSpec::new(EnsembleKind::GueHermitian, 5, 10, 1)).unwrap() {
        assert_eq!(h.hermitian_deviation(), 0.0);
    }
    let spec = EnsembleSpec::new(EnsembleKind::ScaledMix, 3, 12, 77);
    assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
}
