use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{generate, EnsembleKind, EnsembleSpec};
use crate::bounds::{bound_spec, BoundCheckResult, BoundOutcome, BoundParams, Fingerprint, Instance, TolerancePolicy};
use crate::error::{Error, Result};
use crate::radius::{OperatorTuple, OptimizerOptions};
use crate::scalarmap::ScalarMap;

/// Coefficient vectors sampled from the torus for B9.
pub const TORUS_SAMPLES: usize = 64;

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn mix(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6f70_7261_6469_7573, |acc, &p| splitmix(acc ^ splitmix(p)))
}

const STREAM_OPS: u64 = 1;
const STREAM_COMPANION: u64 = 2;
const STREAM_PARAMS: u64 = 3;
const STREAM_OPTIMIZER: u64 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Kind, dimension, and scale of each ensemble. `count` is replaced by
    /// `trials * n` per cell and `seed` is mixed into the cell seed.
    pub ensembles: Vec<EnsembleSpec>,
    /// Map spec strings, as accepted by [`ScalarMap::parse`].
    pub maps: Vec<String>,
    pub bounds: Vec<String>,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: TolerancePolicy,
    /// Random optimizer starts; `None` for the default `max(20, 10 d)`.
    pub restarts: Option<usize>,
}

impl SuiteConfig {
    /// Every catalog bound on `kinds x dims x ns` with the six standard maps.
    pub fn grid(kinds: &[EnsembleKind], dims: &[usize], ns: &[usize], trials: usize, seed: u64) -> Self {
        let ensembles = kinds
            .iter()
            .flat_map(|&k| dims.iter().map(move |&d| EnsembleSpec::new(k, d, 1, 0)))
            .collect();
        SuiteConfig {
            ensembles,
            maps: standard_maps(),
            bounds: crate::bounds::bound_ids().map(String::from).collect(),
            ns: ns.to_vec(),
            trials,
            seed,
            tolerance: TolerancePolicy::default(),
            restarts: None,
        }
    }

    /// Five ensembles, `d in {2, 3, 4}`, `n in {1, 2, 3}`, 50 trials, seed 42.
    pub fn full() -> Self {
        use EnsembleKind::*;
        Self::grid(&[Ginibre, GueHermitian, HaarUnitary, NilpotentJordan, Psd], &[2, 3, 4], &[1, 2, 3], 50, 42)
    }
}

pub fn standard_maps() -> Vec<String> {
    ["power:1", "power:2", "power:3", "power:1/2", "expm1", "log1p"]
        .into_iter()
        .map(String::from)
        .collect()
}

/// Aggregate over one (bound, ensemble, dim, n, map) cell, or over a whole bound.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub checked: usize,
    pub passes: usize,
    pub failures: usize,
    pub skips: usize,
    pub errors: usize,
    pub oracle_rechecks: usize,
    pub min_slack: Option<f64>,
    pub argmin: Option<Fingerprint>,
    pub argmin_lhs: Option<f64>,
    pub argmin_rhs: Option<f64>,
}

impl Aggregate {
    fn record(&mut self, r: &BoundCheckResult) {
        self.checked += 1;
        if r.pass {
            self.passes += 1;
        } else {
            self.failures += 1;
        }
        if r.oracle_recheck.is_some() {
            self.oracle_rechecks += 1;
        }
        if self.min_slack.map_or(true, |m| r.slack < m) {
            self.min_slack = Some(r.slack);
            self.argmin = Some(r.fingerprint.clone());
            self.argmin_lhs = Some(r.lhs);
            self.argmin_rhs = Some(r.rhs);
        }
    }

    fn merge(&mut self, other: &Aggregate) {
        self.checked += other.checked;
        self.passes += other.passes;
        self.failures += other.failures;
        self.skips += other.skips;
        self.errors += other.errors;
        self.oracle_rechecks += other.oracle_rechecks;
        if let Some(s) = other.min_slack {
            if self.min_slack.map_or(true, |m| s < m) {
                self.min_slack = Some(s);
                self.argmin = other.argmin.clone();
                self.argmin_lhs = other.argmin_lhs;
                self.argmin_rhs = other.argmin_rhs;
            }
        }
    }

    pub fn pass(&self) -> bool {
        self.failures == 0 && self.errors == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub bound: String,
    pub ensemble: EnsembleKind,
    pub dim: usize,
    pub n: usize,
    pub map: String,
    #[serde(flatten)]
    pub stats: Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub id: String,
    pub description: String,
    #[serde(flatten)]
    pub stats: Aggregate,
}

/// An evaluation that raised an error instead of producing a result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationError {
    pub bound: String,
    pub fingerprint: Fingerprint,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub instances: usize,
    pub bounds: Vec<BoundReport>,
    pub cells: Vec<CellReport>,
    pub failures: Vec<BoundCheckResult>,
    pub errors: Vec<EvaluationError>,
    pub overall_pass: bool,
    pub wall_time_secs: f64,
}

impl SuiteReport {
    /// Copy with timing fields zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> SuiteReport {
        SuiteReport {
            wall_time_secs: 0.0,
            ..self.clone()
        }
    }

    pub fn bound(&self, id: &str) -> Option<&BoundReport> {
        self.bounds.iter().find(|b| b.id == id)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Json(e.to_string()))
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<6} {:>8} {:>8} {:>6} {:>8} {:>6} {:>12}  argmin",
            "bound", "checked", "passed", "failed", "skipped", "oracle", "min slack"
        );
        for b in &self.bounds {
            let s = &b.stats;
            let slack = s.min_slack.map_or("-".to_string(), |v| format!("{v:.3e}"));
            let at = s.argmin.as_ref().map_or(String::from("-"), |fp| {
                format!(
                    "{} d={} n={} map={} trial={}",
                    fp.ensemble.as_deref().unwrap_or("-"),
                    fp.dim,
                    fp.n,
                    fp.map,
                    fp.trial.map_or("-".into(), |t| t.to_string())
                )
            });
            let _ = writeln!(
                out,
                "{:<6} {:>8} {:>8} {:>6} {:>8} {:>6} {:>12}  {}",
                b.id,
                s.checked,
                s.passes,
                s.failures + s.errors,
                s.skips,
                s.oracle_rechecks,
                slack,
                at
            );
        }
        let _ = writeln!(
            out,
            "instances: {}  failures: {}  errors: {}  wall time: {:.1}s",
            self.instances,
            self.failures.len(),
            self.errors.len(),
            self.wall_time_secs
        );
        let _ = writeln!(out, "overall: {}", if self.overall_pass { "PASS" } else { "FAIL" });
        out
    }
}

type CellKey = (String, EnsembleKind, usize, usize, String);

struct Job {
    ensemble: EnsembleSpec,
    n: usize,
    cell_seed: u64,
    trial: usize,
}

/// Per-instance parameter draw.
pub fn draw_params(rng: &mut ChaCha8Rng, n: usize) -> BoundParams {
    let alpha: f64 = rng.random_range(0.0..=1.0);
    let beta: f64 = rng.random_range(1.0 - alpha..=1.0);
    let p: f64 = rng.random_range(1.1..=4.0);
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    let lambdas = (0..TORUS_SAMPLES)
        .map(|_| {
            (0..n)
                .map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
                .collect()
        })
        .collect();
    BoundParams {
        alpha,
        beta,
        p,
        q: p / (p - 1.0),
        weights: e.iter().map(|x| x / total).collect(),
        lambdas,
        companion: None,
    }
}

/// The `trial`-th tuple of a cell, its companion, and its parameters.
pub fn cell_instance(ensemble: &EnsembleSpec, n: usize, trials: usize, cell_seed: u64, trial: usize) -> Result<(OperatorTuple, BoundParams)> {
    let draw = |stream: u64| -> Result<OperatorTuple> {
        let spec = EnsembleSpec {
            count: trials * n,
            seed: mix(&[cell_seed, stream]),
            ..ensemble.clone()
        };
        let all = generate(&spec)?;
        OperatorTuple::new(all[trial * n..(trial + 1) * n].to_vec())
    };
    let tuple = draw(STREAM_OPS)?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[cell_seed, STREAM_PARAMS, trial as u64]));
    let mut params = draw_params(&mut rng, n);
    params.companion = Some(draw(STREAM_COMPANION)?);
    Ok((tuple, params))
}

pub fn cell_seed(seed: u64, ensemble: &EnsembleSpec, n: usize) -> u64 {
    mix(&[seed, ensemble.seed, ensemble.kind.code(), ensemble.dim as u64, n as u64])
}

type Outcomes = Vec<(CellKey, std::result::Result<BoundOutcome, EvaluationError>)>;

fn run_job(job: &Job, cfg: &SuiteConfig, maps: &[ScalarMap]) -> Outcomes {
    let kind = job.ensemble.kind;
    let dim = job.ensemble.dim;
    let n = job.n;
    let base = Fingerprint {
        seed: job.cell_seed,
        dim,
        n,
        ensemble: Some(kind.name().to_string()),
        trial: Some(job.trial),
        ..Default::default()
    };
    let key = |bound: &str, map: &str| (bound.to_string(), kind, dim, n, map.to_string());
    let fail_all = |message: String| -> Outcomes {
        cfg.bounds
            .iter()
            .map(|b| {
                let e = EvaluationError {
                    bound: b.clone(),
                    fingerprint: base.clone(),
                    message: message.clone(),
                };
                (key(b, "none"), Err(e))
            })
            .collect()
    };
    let built = cell_instance(&job.ensemble, n, cfg.trials, job.cell_seed, job.trial).and_then(|(tuple, params)| {
        let opts = OptimizerOptions {
            restarts: cfg.restarts,
            ..OptimizerOptions::with_seed(mix(&[job.cell_seed, STREAM_OPTIMIZER, job.trial as u64]))
        };
        Instance::new(tuple, params, opts, cfg.tolerance.clone())
    });
    let instance = match built {
        Ok(i) => i.with_provenance(job.cell_seed, Some(kind.name().to_string()), Some(job.trial)),
        Err(e) => return fail_all(e.to_string()),
    };

    let mut out = Vec::new();
    for id in &cfg.bounds {
        let spec = bound_spec(id).expect("validated");
        let maps_here: Vec<Option<&ScalarMap>> = if spec.uses_map { maps.iter().map(Some).collect() } else { vec![None] };
        for m in maps_here {
            let (f, name) = match m {
                Some(f) => (f, f.name().to_string()),
                None => (&maps[0], "none".to_string()),
            };
            let r = instance.evaluate(id, f).map_err(|e| EvaluationError {
                bound: id.clone(),
                fingerprint: Fingerprint {
                    map: name.clone(),
                    ..base.clone()
                },
                message: e.to_string(),
            });
            out.push((key(id, &name), r));
        }
    }
    out
}

/// Run every requested bound on every (ensemble, n, trial) instance and map.
///
/// Instances are independent work items. Outcomes are merged in job order,
/// so the report does not depend on scheduling.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let started = Instant::now();
    if cfg.ensembles.is_empty() || cfg.maps.is_empty() || cfg.bounds.is_empty() || cfg.ns.is_empty() {
        return Err(Error::InvalidParameter("suite needs at least one ensemble, map, bound, and n".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("suite needs at least one trial".into()));
    }
    if let Some(&n) = cfg.ns.iter().find(|&&n| n == 0) {
        return Err(Error::InvalidParameter(format!("tuple size must be at least 1, got {n}")));
    }
    for id in &cfg.bounds {
        bound_spec(id)?;
    }
    for e in &cfg.ensembles {
        EnsembleSpec { count: 1, ..e.clone() }.validate()?;
    }
    let maps = cfg.maps.iter().map(|s| ScalarMap::parse(s)).collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for e in &cfg.ensembles {
        for &n in &cfg.ns {
            let cs = cell_seed(cfg.seed, e, n);
            for trial in 0..cfg.trials {
                jobs.push(Job {
                    ensemble: e.clone(),
                    n,
                    cell_seed: cs,
                    trial,
                });
            }
        }
    }
    let results: Vec<Outcomes> = jobs.par_iter().map(|j| run_job(j, cfg, &maps)).collect();

    let mut cells: BTreeMap<CellKey, Aggregate> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut errors = Vec::new();
    for (key, outcome) in results.into_iter().flatten() {
        let agg = cells.entry(key).or_default();
        match outcome {
            Ok(BoundOutcome::Checked(r)) => {
                agg.record(&r);
                if !r.pass {
                    failures.push(r);
                }
            }
            Ok(BoundOutcome::Skipped { .. }) => agg.skips += 1,
            Err(e) => {
                agg.errors += 1;
                errors.push(e);
            }
        }
    }

    let bounds: Vec<BoundReport> = cfg
        .bounds
        .iter()
        .map(|id| {
            let mut stats = Aggregate::default();
            for (_, a) in cells.iter().filter(|(k, _)| &k.0 == id) {
                stats.merge(a);
            }
            BoundReport {
                id: id.clone(),
                description: bound_spec(id).expect("validated").description.to_string(),
                stats,
            }
        })
        .collect();
    let cells = cells
        .into_iter()
        .map(|((bound, ensemble, dim, n, map), stats)| CellReport {
            bound,
            ensemble,
            dim,
            n,
            map,
            stats,
        })
        .collect();
    Ok(SuiteReport {
        config: cfg.clone(),
        instances: jobs.len(),
        bounds,
        cells,
        overall_pass: failures.is_empty() && errors.is_empty(),
        failures,
        errors,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_draws_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let p = draw_params(&mut rng, 3);
            assert!((0.0..=1.0).contains(&p.alpha) && (0.0..=1.0).contains(&p.beta));
            assert!(p.alpha + p.beta >= 1.0 - 1e-15);
            assert!((1.0 / p.p + 1.0 / p.q - 1.0).abs() < 1e-12);
            assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(p.lambdas.len(), TORUS_SAMPLES);
            assert!(p.lambdas.iter().flatten().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn seeds_separate_cells() {
        let a = EnsembleSpec::new(EnsembleKind::Ginibre, 2, 1, 0);
        let b = EnsembleSpec::new(EnsembleKind::Ginibre, 3, 1, 0);
        assert_ne!(cell_seed(42, &a, 1), cell_seed(42, &b, 1));
        assert_ne!(cell_seed(42, &a, 1), cell_seed(42, &a, 2));
        assert_eq!(cell_seed(42, &a, 1), cell_seed(42, &a, 1));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = SuiteConfig::grid(&[EnsembleKind::Ginibre], &[2], &[1], 1, 0);
        cfg.bounds = vec!["B0".into()];
        assert_eq!(run_suite(&cfg).unwrap_err(), Error::UnknownBound("B0".into()));
        cfg.bounds = vec!["B1".into()];
        cfg.trials = 0;
        assert!(run_suite(&cfg).is_err());
    }
}
