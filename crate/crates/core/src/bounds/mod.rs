//! Executable catalog of inequalities between operator radii, norms, and
//! functional-calculus expressions.
//!
//! Each bound is a chain of links `lhs <= rhs`. A side is `exact` when it is
//! computed by a direct spectral method and `optimized` when it involves an
//! f-radius from the multistart optimizer. Optimized values are attained
//! lower bounds of the true supremum, which decides where tolerance is spent.

mod furuta;
mod instance;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radius::{OperatorTuple, OptimizerOptions};
use crate::scalarmap::{MapFlag, ScalarMap};

pub use furuta::{check_furuta_pointwise, furuta_sides, FURUTA_TOL};
pub use instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideKind {
    Exact,
    Optimized,
}

/// Extra parameter families a bound draws on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamUse {
    Alpha,
    AlphaBeta,
    Holder,
    Weights,
    Lambdas,
    Companion,
}

/// One catalog row. Every bound is oriented `lhs <= rhs`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundSpec {
    pub id: &'static str,
    pub description: &'static str,
    /// Flags the map must declare; empty for map-independent bounds.
    pub requires: &'static [MapFlag],
    /// Whether the bound depends on the scalar map at all.
    pub uses_map: bool,
    /// Whether the bound reads the whole tuple (otherwise only `T_1`).
    pub uses_tuple: bool,
    pub params: &'static [ParamUse],
    pub lhs_kind: SideKind,
    pub rhs_kind: SideKind,
}

use MapFlag::{Concave, Convex, GeometricallyConvex, Increasing, Supermultiplicative, ZeroAtZero};
use SideKind::{Exact, Optimized};

const fn spec(
    id: &'static str,
    description: &'static str,
    requires: &'static [MapFlag],
    uses_map: bool,
    uses_tuple: bool,
    params: &'static [ParamUse],
    lhs_kind: SideKind,
    rhs_kind: SideKind,
) -> BoundSpec {
    BoundSpec {
        id,
        description,
        requires,
        uses_map,
        uses_tuple,
        params,
        lhs_kind,
        rhs_kind,
    }
}

const CONVEX: &[MapFlag] = &[Increasing, Convex];
const CONCAVE_ZERO: &[MapFlag] = &[Increasing, Concave, ZeroAtZero];

pub static CATALOG: [BoundSpec; 23] = [
    spec("B1", "||T||/2 <= w(T) <= ||T||", &[], false, false, &[], Exact, Exact),
    spec("B2", "w(T) <= || |T| + |T*| || / 2", &[], false, false, &[], Exact, Exact),
    spec("B3", "w(T)^2 <= || |T|^2 + |T*|^2 || / 2", &[], false, false, &[], Exact, Exact),
    spec("B4", "w(T) <= (||T|| + ||T^2||^(1/2)) / 2", &[], false, false, &[], Exact, Exact),
    spec("B5", "max(w(T), ||T||^2) <= dw(T) <= sqrt(w(T)^2 + ||T||^4)", &[], false, false, &[], Exact, Optimized),
    spec("B6", "w(T) <= (||T|| + w(Aluthge(T))) / 2", &[], false, false, &[], Exact, Exact),
    spec("B7", "w_f <= f^-1(sum f(w(T_j))) <= sum w(T_j)", CONVEX, true, true, &[], Optimized, Exact),
    spec("B8", "||sum T_j||/2 <= w(sum T_j) <= w_f", CONCAVE_ZERO, true, true, &[], Exact, Optimized),
    spec("B9", "sup_lambda ||sum lambda_j T_j / n||/2 <= sup_lambda w(sum lambda_j T_j / n) <= w_f", CONVEX, true, true, &[ParamUse::Lambdas], Exact, Optimized),
    spec("B10", "max ||T_j|| / 2n <= max w(T_j) / n <= w_f", CONVEX, true, true, &[], Exact, Optimized),
    spec("B11", "max ||sum +-T_j|| / 2n <= max w(sum +-T_j) / n <= w_f", CONVEX, true, true, &[], Exact, Optimized),
    spec("B12", "w(T)/2 <= w_f(B, C) for T = B + iC", CONVEX, true, false, &[], Exact, Optimized),
    spec("B13", "w(T) <= w_f(T, ..., T) <= n w(T)", CONVEX, true, false, &[], Exact, Optimized),
    spec("B14", "||Re T + T*T|| + |w(T + T*T) - w(T* + T*T)|/2 <= w_f(T, T*T)", CONCAVE_ZERO, true, false, &[], Exact, Optimized),
    spec("B15", "max(w(T), ||T||^2)/2 and ||Re T + T*T||/2 + |w(T + T*T) - w(T* + T*T)|/4 are <= w_f(T, T*T)", CONVEX, true, false, &[], Exact, Optimized),
    spec("B16", "w_f(T_j |T_j|^(a+b-1)) <= ||f^-1(sum f^(p/2)(|T_j|^2a)/p + f^(q/2)(|T_j*|^2b)/q)||", &[Increasing, GeometricallyConvex], true, true, &[ParamUse::AlphaBeta, ParamUse::Holder], Optimized, Exact),
    spec("B17", "w_f <= ||f^-1(sum (f(|T_j|^2a) + f(|T_j*|^2(1-a)))/2)||", CONVEX, true, true, &[ParamUse::Alpha], Optimized, Exact),
    spec("B18", "w_f(p_j T_j) <= ||f^-1(sum p_j (f(|T_j|^2a) + f(|T_j*|^2(1-a)))/2)||", CONVEX, true, true, &[ParamUse::Alpha, ParamUse::Weights], Optimized, Exact),
    spec("B19", "w_f <= ||f^-1(sqrt(n sum f((T_j*T_j + T_jT_j*)/2)))||", &[Increasing, Convex, Supermultiplicative], true, true, &[], Optimized, Exact),
    spec("B20", "w_f <= ||f^-1(sum f(|B_j| + |C_j|))||", &[Increasing, Convex, ZeroAtZero], true, true, &[], Optimized, Exact),
    spec("B21", "w_f <= f^-1(sum (f(||T_j||) + f(w(Aluthge(T_j))))/2)", CONVEX, true, true, &[], Optimized, Exact),
    spec("B22", "w_f(T, T*T) <= f^-1((f(||T||) + f(w(Aluthge(T))) + f(||T||^2) + f(w(|T|U|T|)))/2)", CONVEX, true, false, &[], Optimized, Exact),
    spec("B-P3", "w_f(T_j + T_j') <= w_f(T_j) + w_f(T_j')", &[Increasing, GeometricallyConvex], true, true, &[ParamUse::Companion], Optimized, Optimized),
];

/// Catalog row for `id`.
pub fn bound_spec(id: &str) -> Result<&'static BoundSpec> {
    CATALOG
        .iter()
        .find(|b| b.id == id)
        .ok_or_else(|| Error::UnknownBound(id.to_string()))
}

pub fn bound_ids() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|b| b.id)
}

/// Per-instance parameters. Empty `weights` means uniform; empty `lambdas`
/// restricts B9 to sign patterns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub weights: Vec<f64>,
    pub lambdas: Vec<Vec<C64>>,
    #[serde(skip)]
    pub companion: Option<OperatorTuple>,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            alpha: 0.5,
            beta: 0.5,
            p: 2.0,
            q: 2.0,
            weights: Vec::new(),
            lambdas: Vec::new(),
            companion: None,
        }
    }
}

const PARAM_TOL: f64 = 1e-12;

impl BoundParams {
    /// Why the parameters fall outside `uses`, if they do.
    pub fn violation(&self, uses: &[ParamUse], n: usize) -> Option<String> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        for u in uses {
            match u {
                ParamUse::Alpha if !unit(self.alpha) => {
                    return Some(format!("alpha = {} outside [0, 1]", self.alpha));
                }
                ParamUse::AlphaBeta => {
                    if !unit(self.alpha) || !unit(self.beta) || self.alpha + self.beta < 1.0 - PARAM_TOL {
                        return Some(format!(
                            "(alpha, beta) = ({}, {}) needs both in [0, 1] with alpha + beta >= 1",
                            self.alpha, self.beta
                        ));
                    }
                }
                ParamUse::Holder => {
                    if !(self.p > 1.0 && self.q > 1.0) || (1.0 / self.p + 1.0 / self.q - 1.0).abs() > PARAM_TOL {
                        return Some(format!("(p, q) = ({}, {}) are not conjugate exponents", self.p, self.q));
                    }
                }
                ParamUse::Weights if !self.weights.is_empty() => {
                    let sum: f64 = self.weights.iter().sum();
                    if self.weights.len() != n || self.weights.iter().any(|&w| !(w > 0.0)) || (sum - 1.0).abs() > 1e-9 {
                        return Some(format!("weights {:?} are not a positive probability vector of length {n}", self.weights));
                    }
                }
                ParamUse::Lambdas => {
                    if let Some(l) = self
                        .lambdas
                        .iter()
                        .find(|l| l.len() != n || l.iter().any(|z| z.norm() > 1.0 + PARAM_TOL))
                    {
                        return Some(format!("lambda sample {l:?} is not in the closed unit polydisc of dimension {n}"));
                    }
                }
                ParamUse::Companion if self.companion.is_none() => {
                    return Some("no companion tuple supplied".into());
                }
                _ => {}
            }
        }
        None
    }

    pub fn uniform_weights(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }
}

/// Tolerances for the one-sided comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub exact_abs: f64,
    pub exact_rel: f64,
    /// Optimized radius on the right of a lower bound, relative to `max(1, scale)`.
    pub optimized: f64,
    /// Optimized radii on both sides.
    pub both_optimized: f64,
    /// Oracle samples for the re-check of failing lower bounds.
    pub oracle_samples: usize,
    pub oracle_max_dim: usize,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            exact_abs: 1e-8,
            exact_rel: 1e-9,
            optimized: 1e-6,
            both_optimized: 1e-5,
            oracle_samples: 100_000,
            oracle_max_dim: 3,
        }
    }
}

impl TolerancePolicy {
    /// Allowed excess of `lhs` over `rhs`.
    ///
    /// An optimized value underestimates its supremum, so on the left of an
    /// upper bound it can only help and the exact tolerance applies.
    pub fn allowance(&self, lhs_kind: SideKind, rhs_kind: SideKind, lhs: f64, rhs: f64) -> f64 {
        let scale = lhs.abs().max(rhs.abs());
        match (lhs_kind, rhs_kind) {
            (_, Exact) => self.exact_abs + self.exact_rel * scale,
            (Exact, Optimized) => self.optimized * scale.max(1.0),
            (Optimized, Optimized) => self.both_optimized * scale.max(1.0),
        }
    }
}

/// One link of a bound's chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_kind: SideKind,
    pub rhs_kind: SideKind,
    pub slack: f64,
    pub tolerance_used: f64,
    pub pass: bool,
}

/// Identifies the instance a result came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub seed: u64,
    pub dim: usize,
    pub n: usize,
    pub map: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ensemble: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trial: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights: Option<Vec<f64>>,
    /// The sampled coefficient vector attaining the supremum (B9).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<Vec<C64>>,
}

/// Before/after record of an oracle escalation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRecheck {
    pub samples: usize,
    pub initial_lhs: f64,
    pub initial_rhs: f64,
    pub initial_slack: f64,
}

/// Result of checking one bound on one instance. `lhs`/`rhs` are those of
/// the link closest to failing, so `pass == (lhs <= rhs + tolerance_used)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckResult {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub tolerance_used: f64,
    pub link: String,
    pub links: Vec<LinkResult>,
    pub fingerprint: Fingerprint,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_recheck: Option<OracleRecheck>,
}

impl BoundCheckResult {
    pub(crate) fn from_links(id: &str, links: Vec<LinkResult>, fingerprint: Fingerprint) -> Self {
        let worst = links
            .iter()
            .min_by(|a, b| (a.slack + a.tolerance_used).total_cmp(&(b.slack + b.tolerance_used)))
            .expect("every bound has at least one link")
            .clone();
        BoundCheckResult {
            id: id.to_string(),
            lhs: worst.lhs,
            rhs: worst.rhs,
            slack: worst.slack,
            pass: links.iter().all(|l| l.pass),
            tolerance_used: worst.tolerance_used,
            link: worst.label,
            links,
            fingerprint,
            oracle_recheck: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundOutcome {
    Checked(BoundCheckResult),
    Skipped { id: String, reason: String },
}

impl BoundOutcome {
    pub fn checked(&self) -> Option<&BoundCheckResult> {
        match self {
            BoundOutcome::Checked(r) => Some(r),
            BoundOutcome::Skipped { .. } => None,
        }
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self, BoundOutcome::Skipped { .. })
    }
}

/// Evaluate bound `id` on a tuple. Unmet map hypotheses or out-of-range
/// parameters give [`BoundOutcome::Skipped`].
pub fn evaluate_bound(
    id: &str,
    tuple: &OperatorTuple,
    f: &ScalarMap,
    params: &BoundParams,
    tol: &TolerancePolicy,
) -> Result<BoundOutcome> {
    let instance = Instance::new(tuple.clone(), params.clone(), OptimizerOptions::default(), tol.clone())?;
    instance.evaluate(id, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    fn jordan() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    fn check(id: &str, tuple: OperatorTuple, f: &ScalarMap) -> BoundCheckResult {
        let out = evaluate_bound(id, &tuple, f, &BoundParams::default(), &TolerancePolicy::default()).unwrap();
        out.checked().cloned().unwrap_or_else(|| panic!("{id} skipped: {out:?}"))
    }

    #[test]
    fn kittaneh_equality_at_jordan() {
        let r = check("B2", OperatorTuple::single(jordan()), &ScalarMap::power(2.0).unwrap());
        assert!((r.lhs - 0.5).abs() < 1e-12);
        assert!((r.rhs - 0.5).abs() < 1e-12);
        assert!(r.slack.abs() <= 1e-10);
        assert!(r.pass);
    }

    #[test]
    fn norm_sandwich_at_identity() {
        let r = check("B1", OperatorTuple::single(CMatrix::identity(2)), &ScalarMap::power(2.0).unwrap());
        assert!(r.pass);
        let values: Vec<(f64, f64)> = r.links.iter().map(|l| (l.lhs, l.rhs)).collect();
        assert_eq!(values.len(), 2);
        assert!((values[0].0 - 0.5).abs() < 1e-12 && (values[0].1 - 1.0).abs() < 1e-12);
        assert!((values[1].0 - 1.0).abs() < 1e-12 && (values[1].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_chain_for_identity_pair() {
        let ii = OperatorTuple::new(vec![CMatrix::identity(2), CMatrix::identity(2)]).unwrap();
        let r = check("B7", ii, &ScalarMap::power(2.0).unwrap());
        assert!(r.pass);
        let first = &r.links[0];
        assert!((first.lhs - 2f64.sqrt()).abs() < 1e-9);
        let last = r.links.last().unwrap();
        assert!((last.rhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hypothesis_gating() {
        let convex = ScalarMap::power(2.0).unwrap();
        let out = evaluate_bound(
            "B8",
            &OperatorTuple::single(jordan()),
            &convex,
            &BoundParams::default(),
            &TolerancePolicy::default(),
        )
        .unwrap();
        assert!(out.is_skipped());
        let err = evaluate_bound(
            "B99",
            &OperatorTuple::single(jordan()),
            &convex,
            &BoundParams::default(),
            &TolerancePolicy::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::UnknownBound("B99".into()));
    }

    #[test]
    fn parameter_violations_skip() {
        let params = BoundParams {
            alpha: 0.2,
            beta: 0.3,
            ..Default::default()
        };
        let out = evaluate_bound(
            "B16",
            &OperatorTuple::single(jordan()),
            &ScalarMap::power(2.0).unwrap(),
            &params,
            &TolerancePolicy::default(),
        )
        .unwrap();
        assert!(out.is_skipped());
    }

    #[test]
    fn tolerance_policy_is_one_sided() {
        let t = TolerancePolicy::default();
        assert_eq!(t.allowance(Optimized, Exact, 1.0, 1.0), t.allowance(Exact, Exact, 1.0, 1.0));
        assert!(t.allowance(Exact, Optimized, 1.0, 1.0) > t.allowance(Exact, Exact, 1.0, 1.0));
        assert!(t.allowance(Optimized, Optimized, 1.0, 1.0) > t.allowance(Exact, Optimized, 1.0, 1.0));
    }

    #[test]
    fn catalog_ids_are_unique() {
        let mut ids: Vec<&str> = bound_ids().collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), CATALOG.len());
    }
}
