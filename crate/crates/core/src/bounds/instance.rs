//! Evaluation of the catalog on one operator tuple, with the spectral data
//! and radii shared between bounds and maps computed once.

use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;
use std::rc::Rc;

use num_complex::Complex64 as C64;

use super::{
    bound_spec, BoundCheckResult, BoundOutcome, BoundParams, BoundSpec, Fingerprint, LinkResult, OracleRecheck,
    ParamUse, SideKind, TolerancePolicy,
};
use crate::error::{Error, Result};
use crate::linalg::{
    aluthge_from_polar, cartesian, hermitian_abs, hermitian_eig, hermitian_norm, operator_norm, polar_decompose,
    try_apply_map_hermitian, apply_map_hermitian, CMatrix, EigenDecomposition, PolarParts,
};
use crate::radius::{davis_wielandt_tuple, f_radius, numerical_radius, oracle_radius, OperatorTuple, OptimizerOptions};
use crate::scalarmap::{MapFlag, ScalarMap};

use SideKind::{Exact, Optimized};

/// Tuples whose f-radius some bound needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum TupleKind {
    Main,
    /// `(B, C)` with `T_1 = B + iC`.
    Cartesian,
    /// `n` copies of `T_1`.
    Repeated,
    /// `(T_1, T_1* T_1)`.
    DavisWielandt,
    /// `(T_j |T_j|^(alpha + beta - 1))`.
    Furuta,
    /// `(p_j T_j)`.
    Weighted,
    Companion,
    /// `(T_j + T_j')`.
    Sum,
}

impl TupleKind {
    fn salt(self) -> u64 {
        (self as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
    }
}

struct Built {
    tuple: OperatorTuple,
    hints: Vec<Vec<C64>>,
}

/// `(||X||, omega(X))` for a combination `X` of the operators.
#[derive(Clone, Copy)]
struct Combination {
    norm: f64,
    omega: f64,
}

/// Terms of the Davis-Wielandt lower bounds.
struct DwTerms {
    re_norm: f64,
    omega_plus: f64,
    omega_star: f64,
}

impl DwTerms {
    fn gap(&self) -> f64 {
        (self.omega_plus - self.omega_star).abs()
    }
}

/// One operator tuple with its parameters, ready to evaluate any catalog entry.
pub struct Instance {
    tuple: OperatorTuple,
    params: BoundParams,
    opts: OptimizerOptions,
    tol: TolerancePolicy,
    base: Fingerprint,
    omegas: OnceCell<Vec<(f64, Vec<C64>)>>,
    norms: OnceCell<Vec<f64>>,
    /// Spectra of `T_j* T_j` and `T_j T_j*`.
    grams: OnceCell<Vec<(EigenDecomposition, EigenDecomposition)>>,
    polars: OnceCell<Vec<PolarParts>>,
    aluthge_omegas: OnceCell<Vec<f64>>,
    signs: OnceCell<Vec<Combination>>,
    torus: OnceCell<Vec<Combination>>,
    dw_terms: OnceCell<DwTerms>,
    built: RefCell<HashMap<TupleKind, Rc<Built>>>,
    radii: RefCell<HashMap<(TupleKind, String, bool), f64>>,
}

fn try_init<'a, T>(cell: &'a OnceCell<T>, init: impl FnOnce() -> Result<T>) -> Result<&'a T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = init()?;
    Ok(cell.get_or_init(|| v))
}

/// `||f^{-1}(M)||` for positive semidefinite `M`, by functional calculus.
pub(crate) fn inverse_norm(f: &ScalarMap, m: &CMatrix) -> Result<f64> {
    hermitian_norm(&try_apply_map_hermitian(m, |t| f.inverse(t))?)
}

/// `phi` applied to the spectrum, with round-off negatives clamped.
fn psd_with(e: &EigenDecomposition, phi: impl Fn(f64) -> f64) -> CMatrix {
    e.reconstruct_with(|l| phi(l.max(0.0)))
}

fn sum_matrices(dim: usize, terms: impl IntoIterator<Item = CMatrix>) -> CMatrix {
    terms.into_iter().fold(CMatrix::zeros(dim), |acc, m| &acc + &m)
}

fn sign_combination(ops: &[CMatrix], mask: usize) -> CMatrix {
    let mut s = ops[0].clone();
    for (j, t) in ops.iter().enumerate().skip(1) {
        s = if mask >> (j - 1) & 1 == 1 { &s - t } else { &s + t };
    }
    s
}

impl Instance {
    pub fn new(tuple: OperatorTuple, params: BoundParams, opts: OptimizerOptions, tol: TolerancePolicy) -> Result<Self> {
        if let Some(c) = &params.companion {
            if c.dim() != tuple.dim() {
                return Err(Error::DimensionMismatch {
                    left: tuple.dim(),
                    right: c.dim(),
                });
            }
            tuple.add(c)?;
        }
        let base = Fingerprint {
            seed: opts.seed,
            dim: tuple.dim(),
            n: tuple.len(),
            ..Default::default()
        };
        Ok(Instance {
            tuple,
            params,
            opts,
            tol,
            base,
            omegas: OnceCell::new(),
            norms: OnceCell::new(),
            grams: OnceCell::new(),
            polars: OnceCell::new(),
            aluthge_omegas: OnceCell::new(),
            signs: OnceCell::new(),
            torus: OnceCell::new(),
            dw_terms: OnceCell::new(),
            built: RefCell::new(HashMap::new()),
            radii: RefCell::new(HashMap::new()),
        })
    }

    /// Record provenance (seed, ensemble, trial) in every result.
    pub fn with_provenance(mut self, seed: u64, ensemble: Option<String>, trial: Option<usize>) -> Self {
        self.base.seed = seed;
        self.base.ensemble = ensemble;
        self.base.trial = trial;
        self
    }

    pub fn tuple(&self) -> &OperatorTuple {
        &self.tuple
    }

    pub fn params(&self) -> &BoundParams {
        &self.params
    }

    fn n(&self) -> usize {
        self.tuple.len()
    }

    fn dim(&self) -> usize {
        self.tuple.dim()
    }

    fn t1(&self) -> &CMatrix {
        &self.tuple.ops()[0]
    }

    fn omegas(&self) -> Result<&Vec<(f64, Vec<C64>)>> {
        try_init(&self.omegas, || {
            self.tuple
                .ops()
                .iter()
                .map(|t| numerical_radius(t).map(|e| (e.value, e.witness)))
                .collect()
        })
    }

    fn omega(&self, j: usize) -> Result<f64> {
        Ok(self.omegas()?[j].0)
    }

    fn norms(&self) -> &Vec<f64> {
        self.norms.get_or_init(|| self.tuple.ops().iter().map(operator_norm).collect())
    }

    fn grams(&self) -> Result<&Vec<(EigenDecomposition, EigenDecomposition)>> {
        try_init(&self.grams, || {
            self.tuple
                .ops()
                .iter()
                .map(|t| {
                    let ts = t.adjoint();
                    Ok((hermitian_eig(&(&ts * t))?, hermitian_eig(&(t * &ts))?))
                })
                .collect()
        })
    }

    fn polars(&self) -> Result<&Vec<PolarParts>> {
        try_init(&self.polars, || self.tuple.ops().iter().map(polar_decompose).collect())
    }

    fn aluthge_omegas(&self) -> Result<&Vec<f64>> {
        try_init(&self.aluthge_omegas, || {
            self.polars()?
                .iter()
                .map(|p| Ok(numerical_radius(&aluthge_from_polar(p)?)?.value))
                .collect()
        })
    }

    /// `sum_j +-T_j` over the `2^(n-1)` sign patterns with a leading `+`.
    fn signs(&self) -> Result<&Vec<Combination>> {
        try_init(&self.signs, || {
            let ops = self.tuple.ops();
            (0..1usize << (ops.len() - 1))
                .map(|mask| {
                    let s = sign_combination(ops, mask);
                    Ok(Combination {
                        norm: operator_norm(&s),
                        omega: numerical_radius(&s)?.value,
                    })
                })
                .collect()
        })
    }

    /// `sum_j lambda_j T_j / n` for the sampled coefficient vectors.
    fn torus(&self) -> Result<&Vec<Combination>> {
        try_init(&self.torus, || {
            let n = self.n() as f64;
            self.params
                .lambdas
                .iter()
                .map(|lam| {
                    let x = self
                        .tuple
                        .ops()
                        .iter()
                        .zip(lam)
                        .fold(CMatrix::zeros(self.dim()), |acc, (t, l)| &acc + &t.scale(l / n));
                    Ok(Combination {
                        norm: operator_norm(&x),
                        omega: numerical_radius(&x)?.value,
                    })
                })
                .collect()
        })
    }

    fn dw_terms(&self) -> Result<&DwTerms> {
        try_init(&self.dw_terms, || {
            let t = self.t1();
            let ts = t.adjoint();
            let tst = &ts * t;
            Ok(DwTerms {
                re_norm: hermitian_norm(&(&t.real_part() + &tst))?,
                omega_plus: numerical_radius(&(t + &tst))?.value,
                omega_star: numerical_radius(&(&ts + &tst))?.value,
            })
        })
    }

    fn weights(&self) -> Vec<f64> {
        if self.params.weights.is_empty() {
            BoundParams::uniform_weights(self.n())
        } else {
            self.params.weights.clone()
        }
    }

    fn build(&self, kind: TupleKind) -> Result<Built> {
        let witnesses = || -> Result<Vec<Vec<C64>>> { Ok(self.omegas()?.iter().map(|(_, w)| w.clone()).collect()) };
        let t1 = self.t1();
        let companion = || {
            self.params
                .companion
                .clone()
                .ok_or_else(|| Error::InvalidParameter("no companion tuple supplied".into()))
        };
        let tuple = match kind {
            TupleKind::Main => {
                return Ok(Built {
                    tuple: self.tuple.clone(),
                    hints: witnesses()?,
                })
            }
            TupleKind::Weighted => {
                // positive scaling leaves every numerical-radius witness in place
                let ops = self.tuple.ops().iter().zip(self.weights()).map(|(t, p)| t.scale_real(p)).collect();
                let tuple = OperatorTuple::new(ops)?;
                return Ok(Built {
                    tuple,
                    hints: witnesses()?,
                });
            }
            TupleKind::Repeated => {
                let w = self.omegas()?[0].1.clone();
                return Ok(Built {
                    tuple: OperatorTuple::new(vec![t1.clone(); self.n()])?,
                    hints: vec![w],
                });
            }
            TupleKind::Cartesian => {
                let (b, c) = cartesian(t1);
                OperatorTuple::new(vec![b, c])?
            }
            TupleKind::DavisWielandt => davis_wielandt_tuple(t1),
            TupleKind::Furuta => {
                let gamma = self.params.alpha + self.params.beta - 1.0;
                let grams = self.grams()?;
                let ops = self
                    .tuple
                    .ops()
                    .iter()
                    .zip(grams)
                    .map(|(t, (g, _))| t * &psd_with(g, |l| l.powf(gamma / 2.0)))
                    .collect();
                OperatorTuple::new(ops)?
            }
            TupleKind::Companion => companion()?,
            TupleKind::Sum => self.tuple.add(&companion()?)?,
        };
        let hints = tuple
            .ops()
            .iter()
            .map(|t| numerical_radius(t).map(|e| e.witness))
            .collect::<Result<_>>()?;
        Ok(Built { tuple, hints })
    }

    fn built(&self, kind: TupleKind) -> Result<Rc<Built>> {
        let kind = if kind == TupleKind::Repeated && self.n() == 1 { TupleKind::Main } else { kind };
        if let Some(b) = self.built.borrow().get(&kind) {
            return Ok(b.clone());
        }
        let b = Rc::new(self.build(kind)?);
        self.built.borrow_mut().insert(kind, b.clone());
        Ok(b)
    }

    /// f-radius of a derived tuple; `boosted` takes the larger of the
    /// multistart value and the sampling oracle.
    fn radius(&self, kind: TupleKind, f: &ScalarMap, boosted: bool) -> Result<f64> {
        let kind = if kind == TupleKind::Repeated && self.n() == 1 { TupleKind::Main } else { kind };
        let key = (kind, f.name().to_string(), boosted);
        if let Some(&v) = self.radii.borrow().get(&key) {
            return Ok(v);
        }
        let value = if boosted {
            let base = self.radius(kind, f, false)?;
            let built = self.built(kind)?;
            let seed = self.opts.seed ^ kind.salt();
            base.max(oracle_radius(&built.tuple, f, self.tol.oracle_samples, seed)?.value)
        } else {
            let built = self.built(kind)?;
            let opts = OptimizerOptions {
                witness_hints: built.hints.clone(),
                ..self.opts.clone()
            };
            f_radius(&built.tuple, f, &opts)?.value
        };
        self.radii.borrow_mut().insert(key, value);
        Ok(value)
    }

    fn link(&self, label: &str, lhs: f64, rhs: f64, lhs_kind: SideKind, rhs_kind: SideKind) -> LinkResult {
        let tolerance_used = self.tol.allowance(lhs_kind, rhs_kind, lhs, rhs);
        LinkResult {
            label: label.to_string(),
            lhs,
            rhs,
            lhs_kind,
            rhs_kind,
            slack: rhs - lhs,
            tolerance_used,
            pass: lhs <= rhs + tolerance_used,
        }
    }

    /// Every f-dependent bound is stated for `f(0) = 0` since the radius itself needs it.
    fn missing_flags(spec: &BoundSpec, f: &ScalarMap) -> Vec<MapFlag> {
        if !spec.uses_map {
            return Vec::new();
        }
        let mut missing: Vec<MapFlag> = spec.requires.iter().copied().filter(|fl| !f.has(*fl)).collect();
        if !f.has(MapFlag::ZeroAtZero) && !missing.contains(&MapFlag::ZeroAtZero) {
            missing.push(MapFlag::ZeroAtZero);
        }
        missing
    }

    fn fingerprint(&self, spec: &BoundSpec, f: &ScalarMap) -> Result<Fingerprint> {
        let mut fp = self.base.clone();
        fp.map = if spec.uses_map {
            f.name().to_string()
        } else if spec.id == "B5" {
            ScalarMap::power(2.0)?.name().to_string()
        } else {
            "none".into()
        };
        for u in spec.params {
            match u {
                ParamUse::Alpha => fp.alpha = Some(self.params.alpha),
                ParamUse::AlphaBeta => {
                    fp.alpha = Some(self.params.alpha);
                    fp.beta = Some(self.params.beta);
                }
                ParamUse::Holder => {
                    fp.p = Some(self.params.p);
                    fp.q = Some(self.params.q);
                }
                ParamUse::Weights => fp.weights = Some(self.weights()),
                ParamUse::Lambdas => fp.lambda = Some(self.b9_argmax()?),
                ParamUse::Companion => {}
            }
        }
        Ok(fp)
    }

    /// Coefficients attaining the sampled supremum in B9.
    fn b9_argmax(&self) -> Result<Vec<C64>> {
        let n = self.n();
        let mut best = (f64::NEG_INFINITY, Vec::new());
        for (mask, c) in self.signs()?.iter().enumerate() {
            let w = c.omega / n as f64;
            if w > best.0 {
                let lam = (0..n)
                    .map(|j| {
                        let neg = j > 0 && mask >> (j - 1) & 1 == 1;
                        C64::new(if neg { -1.0 } else { 1.0 }, 0.0)
                    })
                    .collect();
                best = (w, lam);
            }
        }
        for (c, lam) in self.torus()?.iter().zip(&self.params.lambdas) {
            if c.omega > best.0 {
                best = (c.omega, lam.clone());
            }
        }
        Ok(best.1)
    }

    /// Evaluate catalog entry `id` with map `f`.
    pub fn evaluate(&self, id: &str, f: &ScalarMap) -> Result<BoundOutcome> {
        let spec = bound_spec(id)?;
        let missing = Self::missing_flags(spec, f);
        if !missing.is_empty() {
            let names: Vec<&str> = missing.iter().map(|m| m.name()).collect();
            return Ok(BoundOutcome::Skipped {
                id: id.to_string(),
                reason: format!("hypothesis: {} is not {}", f.name(), names.join(", ")),
            });
        }
        if let Some(reason) = self.params.violation(spec.params, self.n()) {
            return Ok(BoundOutcome::Skipped {
                id: id.to_string(),
                reason: format!("parameters: {reason}"),
            });
        }
        let links = self.links(spec, f, false)?;
        let mut result = BoundCheckResult::from_links(id, links, self.fingerprint(spec, f)?);
        let optimized_failure = result.links.iter().any(|l| !l.pass && l.rhs_kind == Optimized);
        if optimized_failure && self.dim() <= self.tol.oracle_max_dim {
            let before = (result.lhs, result.rhs, result.slack);
            let mut boosted = BoundCheckResult::from_links(id, self.links(spec, f, true)?, result.fingerprint.clone());
            boosted.oracle_recheck = Some(OracleRecheck {
                samples: self.tol.oracle_samples,
                initial_lhs: before.0,
                initial_rhs: before.1,
                initial_slack: before.2,
            });
            result = boosted;
        }
        Ok(BoundOutcome::Checked(result))
    }

    fn links(&self, spec: &BoundSpec, f: &ScalarMap, boosted: bool) -> Result<Vec<LinkResult>> {
        let n = self.n();
        let nf = n as f64;
        let d = self.dim();
        let t = self.t1();
        let wf = |kind: TupleKind| self.radius(kind, f, boosted);
        let links = match spec.id {
            "B1" => {
                let (w, nrm) = (self.omega(0)?, self.norms()[0]);
                vec![
                    self.link("||T||/2 <= w(T)", nrm / 2.0, w, Exact, Exact),
                    self.link("w(T) <= ||T||", w, nrm, Exact, Exact),
                ]
            }
            "B2" => {
                let (g, h) = &self.grams()?[0];
                let m = &psd_with(g, f64::sqrt) + &psd_with(h, f64::sqrt);
                vec![self.link("w(T) <= || |T| + |T*| ||/2", self.omega(0)?, hermitian_norm(&m)? / 2.0, Exact, Exact)]
            }
            "B3" => {
                let ts = t.adjoint();
                let m = &(&ts * t) + &(t * &ts);
                let w = self.omega(0)?;
                vec![self.link("w(T)^2 <= || |T|^2 + |T*|^2 ||/2", w * w, hermitian_norm(&m)? / 2.0, Exact, Exact)]
            }
            "B4" => {
                let sq = operator_norm(&(t * t));
                let rhs = (self.norms()[0] + sq.sqrt()) / 2.0;
                vec![self.link("w(T) <= (||T|| + ||T^2||^(1/2))/2", self.omega(0)?, rhs, Exact, Exact)]
            }
            "B5" => {
                let p2 = ScalarMap::power(2.0)?;
                let dw = self.radius(TupleKind::DavisWielandt, &p2, boosted)?;
                let (w, nrm) = (self.omega(0)?, self.norms()[0]);
                vec![
                    self.link("max(w(T), ||T||^2) <= dw(T)", w.max(nrm * nrm), dw, Exact, Optimized),
                    self.link("dw(T) <= sqrt(w(T)^2 + ||T||^4)", dw, (w * w + nrm.powi(4)).sqrt(), Optimized, Exact),
                ]
            }
            "B6" => {
                let rhs = (self.norms()[0] + self.aluthge_omegas()?[0]) / 2.0;
                vec![self.link("w(T) <= (||T|| + w(Aluthge T))/2", self.omega(0)?, rhs, Exact, Exact)]
            }
            "B7" => {
                let w: Vec<f64> = self.omegas()?.iter().map(|(w, _)| *w).collect();
                let mid = f.inverse(w.iter().map(|&x| f.eval(x)).sum())?;
                vec![
                    self.link("w_f <= f^-1(sum f(w(T_j)))", wf(TupleKind::Main)?, mid, Optimized, Exact),
                    self.link("f^-1(sum f(w(T_j))) <= sum w(T_j)", mid, w.iter().sum(), Exact, Exact),
                ]
            }
            "B8" => {
                let s = sum_matrices(d, self.tuple.ops().iter().cloned());
                let w = numerical_radius(&s)?.value;
                vec![
                    self.link("||sum T_j||/2 <= w(sum T_j)", operator_norm(&s) / 2.0, w, Exact, Exact),
                    self.link("w(sum T_j) <= w_f", w, wf(TupleKind::Main)?, Exact, Optimized),
                ]
            }
            "B9" => {
                let signs = self.signs()?.iter().map(|c| Combination {
                    norm: c.norm / nf,
                    omega: c.omega / nf,
                });
                let all: Vec<Combination> = signs.chain(self.torus()?.iter().copied()).collect();
                let sup_norm = all.iter().map(|c| c.norm).fold(0.0, f64::max);
                let sup_w = all.iter().map(|c| c.omega).fold(0.0, f64::max);
                vec![
                    self.link("sup ||sum lambda_j T_j/n||/2 <= sup w(sum lambda_j T_j/n)", sup_norm / 2.0, sup_w, Exact, Exact),
                    self.link("sup w(sum lambda_j T_j/n) <= w_f", sup_w, wf(TupleKind::Main)?, Exact, Optimized),
                ]
            }
            "B10" => {
                let max_norm = self.norms().iter().cloned().fold(0.0, f64::max);
                let max_w = self.omegas()?.iter().map(|(w, _)| *w).fold(0.0, f64::max);
                vec![
                    self.link("max ||T_j||/(2n) <= max w(T_j)/n", max_norm / (2.0 * nf), max_w / nf, Exact, Exact),
                    self.link("max w(T_j)/n <= w_f", max_w / nf, wf(TupleKind::Main)?, Exact, Optimized),
                ]
            }
            "B11" => {
                let signs = self.signs()?;
                let max_norm = signs.iter().map(|c| c.norm).fold(0.0, f64::max);
                let max_w = signs.iter().map(|c| c.omega).fold(0.0, f64::max);
                vec![
                    self.link("max ||sum +-T_j||/(2n) <= max w(sum +-T_j)/n", max_norm / (2.0 * nf), max_w / nf, Exact, Exact),
                    self.link("max w(sum +-T_j)/n <= w_f", max_w / nf, wf(TupleKind::Main)?, Exact, Optimized),
                ]
            }
            "B12" => vec![self.link("w(T)/2 <= w_f(B, C)", self.omega(0)? / 2.0, wf(TupleKind::Cartesian)?, Exact, Optimized)],
            "B13" => {
                let w = self.omega(0)?;
                let rep = wf(TupleKind::Repeated)?;
                vec![
                    self.link("w(T) <= w_f(T, ..., T)", w, rep, Exact, Optimized),
                    self.link("w_f(T, ..., T) <= n w(T)", rep, nf * w, Optimized, Exact),
                ]
            }
            "B14" => {
                let dw = self.dw_terms()?;
                let lhs = dw.re_norm + dw.gap() / 2.0;
                vec![self.link("||Re T + T*T|| + |w(T + T*T) - w(T* + T*T)|/2 <= w_f(T, T*T)", lhs, wf(TupleKind::DavisWielandt)?, Exact, Optimized)]
            }
            "B15" => {
                let dw = self.dw_terms()?;
                let (w, nrm) = (self.omega(0)?, self.norms()[0]);
                let r = wf(TupleKind::DavisWielandt)?;
                vec![
                    self.link("max(w(T), ||T||^2)/2 <= w_f(T, T*T)", w.max(nrm * nrm) / 2.0, r, Exact, Optimized),
                    self.link("||Re T + T*T||/2 + |w(T + T*T) - w(T* + T*T)|/4 <= w_f(T, T*T)", dw.re_norm / 2.0 + dw.gap() / 4.0, r, Exact, Optimized),
                ]
            }
            "B16" => {
                let BoundParams { alpha, beta, p, q, .. } = self.params;
                let m = sum_matrices(
                    d,
                    self.grams()?.iter().flat_map(|(g, h)| {
                        [
                            psd_with(g, |l| f.eval(l.powf(alpha)).powf(p / 2.0) / p),
                            psd_with(h, |l| f.eval(l.powf(beta)).powf(q / 2.0) / q),
                        ]
                    }),
                );
                vec![self.link(
                    "w_f(T_j |T_j|^(a+b-1)) <= ||f^-1(sum f^(p/2)(|T_j|^2a)/p + f^(q/2)(|T_j*|^2b)/q)||",
                    wf(TupleKind::Furuta)?,
                    inverse_norm(f, &m)?,
                    Optimized,
                    Exact,
                )]
            }
            "B17" | "B18" => {
                let alpha = self.params.alpha;
                let weighted = spec.id == "B18";
                let w = if weighted { self.weights() } else { vec![1.0; n] };
                let m = sum_matrices(
                    d,
                    self.grams()?.iter().zip(&w).flat_map(|((g, h), &p)| {
                        [
                            psd_with(g, |l| p * f.eval(l.powf(alpha)) / 2.0),
                            psd_with(h, |l| p * f.eval(l.powf(1.0 - alpha)) / 2.0),
                        ]
                    }),
                );
                let (label, kind) = if weighted {
                    ("w_f(p_j T_j) <= ||f^-1(sum p_j (f(|T_j|^2a) + f(|T_j*|^2(1-a)))/2)||", TupleKind::Weighted)
                } else {
                    ("w_f <= ||f^-1(sum (f(|T_j|^2a) + f(|T_j*|^2(1-a)))/2)||", TupleKind::Main)
                };
                vec![self.link(label, wf(kind)?, inverse_norm(f, &m)?, Optimized, Exact)]
            }
            "B19" => {
                let sym: Vec<CMatrix> = self
                    .tuple
                    .ops()
                    .iter()
                    .map(|t| {
                        let ts = t.adjoint();
                        &(&ts * t) + &(t * &ts)
                    })
                    .collect();
                let m = sum_matrices(
                    d,
                    sym.iter()
                        .map(|a| apply_map_hermitian(&a.scale_real(0.5), |l| f.eval(l)))
                        .collect::<Result<Vec<_>>>()?,
                );
                let rhs = hermitian_norm(&try_apply_map_hermitian(&m, |l| f.inverse((nf * l).sqrt()))?)?;
                let r = wf(TupleKind::Main)?;
                let mut links = vec![self.link("w_f <= ||f^-1(sqrt(n sum f((T_j*T_j + T_jT_j*)/2)))||", r, rhs, Optimized, Exact)];
                if let Some(qe) = f.power_exponent() {
                    let powers = sum_matrices(
                        d,
                        sym.iter()
                            .map(|a| apply_map_hermitian(a, |l| l.powf(qe)))
                            .collect::<Result<Vec<_>>>()?,
                    );
                    let rhs = nf.sqrt() / 2f64.powf(qe / 2.0) * hermitian_norm(&powers)?.sqrt();
                    links.push(self.link(
                        "w_f^q <= sqrt(n)/2^(q/2) ||sum (T_j*T_j + T_jT_j*)^q||^(1/2)",
                        r.powf(qe),
                        rhs,
                        Optimized,
                        Exact,
                    ));
                }
                links
            }
            "B20" => {
                let m = sum_matrices(
                    d,
                    self.tuple
                        .ops()
                        .iter()
                        .map(|t| {
                            let (b, c) = cartesian(t);
                            let s = &hermitian_abs(&b)? + &hermitian_abs(&c)?;
                            apply_map_hermitian(&s, |l| f.eval(l))
                        })
                        .collect::<Result<Vec<_>>>()?,
                );
                vec![self.link("w_f <= ||f^-1(sum f(|B_j| + |C_j|))||", wf(TupleKind::Main)?, inverse_norm(f, &m)?, Optimized, Exact)]
            }
            "B21" => {
                let s: f64 = self
                    .norms()
                    .iter()
                    .zip(self.aluthge_omegas()?)
                    .map(|(&nrm, &wa)| (f.eval(nrm) + f.eval(wa)) / 2.0)
                    .sum();
                vec![self.link("w_f <= f^-1(sum (f(||T_j||) + f(w(Aluthge T_j)))/2)", wf(TupleKind::Main)?, f.inverse(s)?, Optimized, Exact)]
            }
            "B22" => {
                let polar = &self.polars()?[0];
                let m = &(&polar.modulus * &polar.isometry) * &polar.modulus;
                let nrm = self.norms()[0];
                let s = f.eval(nrm) + f.eval(self.aluthge_omegas()?[0]) + f.eval(nrm * nrm) + f.eval(numerical_radius(&m)?.value);
                vec![self.link(
                    "w_f(T, T*T) <= f^-1((f(||T||) + f(w(Aluthge T)) + f(||T||^2) + f(w(|T|U|T|)))/2)",
                    wf(TupleKind::DavisWielandt)?,
                    f.inverse(s / 2.0)?,
                    Optimized,
                    Exact,
                )]
            }
            "B-P3" => {
                let rhs = wf(TupleKind::Main)? + wf(TupleKind::Companion)?;
                vec![self.link("w_f(T_j + T_j') <= w_f(T_j) + w_f(T_j')", wf(TupleKind::Sum)?, rhs, Optimized, Optimized)]
            }
            other => return Err(Error::UnknownBound(other.to_string())),
        };
        Ok(links)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_norm_matches_spectral_mapping() {
        let m = CMatrix::from_rows(&[
            &[C64::new(2.0, 0.0), C64::new(0.5, -0.3), C64::new(0.0, 0.2)],
            &[C64::new(0.5, 0.3), C64::new(1.0, 0.0), C64::new(0.1, 0.0)],
            &[C64::new(0.0, -0.2), C64::new(0.1, 0.0), C64::new(0.4, 0.0)],
        ]);
        let top = hermitian_eig(&m).unwrap().max_eigenvalue();
        for f in [
            ScalarMap::power(1.0).unwrap(),
            ScalarMap::power(2.0).unwrap(),
            ScalarMap::power(0.5).unwrap(),
            ScalarMap::exp_minus_one(),
            ScalarMap::log1p(),
        ] {
            let direct = f.inverse(top).unwrap();
            let calculus = inverse_norm(&f, &m).unwrap();
            assert!((direct - calculus).abs() < 1e-10 * direct.max(1.0), "{}: {direct} vs {calculus}", f.name());
        }
    }

    #[test]
    fn companion_dimension_is_checked() {
        let t = OperatorTuple::single(CMatrix::identity(2));
        let params = BoundParams {
            companion: Some(OperatorTuple::single(CMatrix::identity(3))),
            ..Default::default()
        };
        let err = Instance::new(t, params, OptimizerOptions::default(), TolerancePolicy::default()).err();
        assert_eq!(err, Some(Error::DimensionMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn sign_combinations_cover_patterns() {
        let a = CMatrix::identity(2);
        let b = CMatrix::from_diag(&[1.0, 2.0]);
        let c = CMatrix::from_diag(&[0.0, 3.0]);
        let ops = [a, b, c];
        let got: Vec<CMatrix> = (0..4).map(|m| sign_combination(&ops, m)).collect();
        assert_eq!(got[0], CMatrix::from_diag(&[2.0, 6.0]));
        assert_eq!(got[1], CMatrix::from_diag(&[0.0, 2.0]));
        assert_eq!(got[2], CMatrix::from_diag(&[2.0, 0.0]));
        assert_eq!(got[3], CMatrix::from_diag(&[0.0, -4.0]));
    }
}
