//! Numerical radius, f-operator radius, q-radius, and the generalized
//! Davis-Wielandt radius.
//!
//! Every [`RadiusEstimate`] carries a unit witness vector at which the
//! defining objective attains the reported value, so the value is always a
//! certified lower bound on the supremum.

mod ascent;
mod objective;
mod oracle;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cartesian, hermitian_eig, normalized, CMatrix, MaxEigWorkspace};
use crate::scalarmap::{MapFlag, ScalarMap};

pub use oracle::{oracle_radius, ORACLE_KEEP, ORACLE_REFINE_STEPS};

pub(crate) use objective::Objective;

/// Ordered, nonempty tuple of equal-dimension operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CMatrix>", into = "Vec<CMatrix>")]
pub struct OperatorTuple {
    ops: Vec<CMatrix>,
}

impl TryFrom<Vec<CMatrix>> for OperatorTuple {
    type Error = Error;
    fn try_from(ops: Vec<CMatrix>) -> Result<Self> {
        OperatorTuple::new(ops)
    }
}

impl From<OperatorTuple> for Vec<CMatrix> {
    fn from(t: OperatorTuple) -> Self {
        t.ops
    }
}

impl OperatorTuple {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptyTuple)?;
        let d = first.dim();
        if let Some(bad) = ops.iter().find(|m| m.dim() != d) {
            return Err(Error::DimensionMismatch {
                left: d,
                right: bad.dim(),
            });
        }
        Ok(OperatorTuple { ops })
    }

    pub fn single(t: CMatrix) -> Self {
        OperatorTuple { ops: vec![t] }
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    /// Apply `g` to every operator.
    pub fn map(&self, g: impl Fn(&CMatrix) -> CMatrix) -> Self {
        OperatorTuple {
            ops: self.ops.iter().map(g).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        self.map(CMatrix::adjoint)
    }

    /// Entrywise sum of two tuples of the same shape.
    pub fn add(&self, other: &OperatorTuple) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::InvalidParameter(format!(
                "tuple lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(OperatorTuple { ops })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ThetaSweep,
    Multistart,
    Oracle,
}

/// A radius value together with the unit vector that attains it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub value: f64,
    pub witness: Vec<C64>,
    pub method: Method,
    pub starts_used: usize,
    pub converged: bool,
}

/// Options for the multistart sphere optimizer.
#[derive(Clone, Debug)]
pub struct OptimizerOptions {
    /// Random starts; `None` means `max(20, 10 * dim)`.
    pub restarts: Option<usize>,
    pub seed: u64,
    /// Stop an ascent when a step improves the objective by less than this (relative to `max(1, h)`).
    pub step_tol: f64,
    pub max_iter: usize,
    /// Central-difference step.
    pub fd_step: f64,
    /// Precomputed numerical-radius witnesses of the operators, in tuple order.
    /// Computed on demand when empty.
    pub witness_hints: Vec<Vec<C64>>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            restarts: None,
            seed: 0x5eed,
            step_tol: 1e-12,
            max_iter: 1000,
            fd_step: 1e-6,
            witness_hints: Vec::new(),
        }
    }
}

impl OptimizerOptions {
    pub fn with_seed(seed: u64) -> Self {
        OptimizerOptions {
            seed,
            ..Default::default()
        }
    }

    pub fn random_starts(&self, dim: usize) -> usize {
        self.restarts.unwrap_or_else(|| (10 * dim).max(20))
    }
}

/// Grid resolution of the theta sweep.
pub const THETA_GRID: usize = 720;
/// Golden-section tolerance in theta.
pub const THETA_TOL: f64 = 1e-12;

/// `|<T x, x>|` for unit `x`.
pub fn numerical_range_modulus(t: &CMatrix, x: &[C64]) -> f64 {
    t.quadratic_form(x).norm()
}

/// `omega(T) = max_theta lambda_max(Re(e^{i theta} T))`.
///
/// A 720-point theta grid locates candidate peaks; each candidate within
/// grid resolution of the best is refined by golden-section search. The
/// witness is the top eigenvector at the best theta and the reported value
/// is `|<T x, x>|` at that witness.
pub fn numerical_radius(t: &CMatrix) -> Result<RadiusEstimate> {
    if t.is_hermitian() {
        let e = hermitian_eig(t)?;
        let k = if e.max_eigenvalue().abs() >= e.min_eigenvalue().abs() {
            e.dim() - 1
        } else {
            0
        };
        let x = e.vector(k);
        return Ok(RadiusEstimate {
            value: numerical_range_modulus(t, &x),
            witness: x,
            method: Method::ThetaSweep,
            starts_used: 1,
            converged: true,
        });
    }
    let (b, c) = cartesian(t);
    let d = t.dim();
    let mut ws = MaxEigWorkspace::new(d);
    let (be, ce) = (b.entries(), c.entries());
    // Weyl: lambda_max moves by at most |dtheta| (|B| + |C|) between evaluations
    let lipschitz = (b.frobenius_norm() + c.frobenius_norm()) * (1.0 + 1e-10);
    let mut last: Option<(f64, f64)> = None;
    let mut lambda = |theta: f64| {
        let (s, co) = theta.sin_cos();
        for ((h, x), y) in ws.matrix_mut().iter_mut().zip(be).zip(ce) {
            *h = x * co - y * s;
        }
        let upper = last.map_or(f64::INFINITY, |(t, v): (f64, f64)| {
            v + (theta - t).abs() * lipschitz + 1e-14 * lipschitz
        });
        let v = ws.max_eigenvalue_below(upper);
        last = Some((theta, v));
        v
    };
    let step = 2.0 * PI / THETA_GRID as f64;
    let grid: Vec<f64> = (0..THETA_GRID).map(|k| lambda(k as f64 * step)).collect();
    let best = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let margin = t.frobenius_norm() * step * step;
    let mut theta_best = 0.0;
    let mut value_best = f64::NEG_INFINITY;
    for k in 0..THETA_GRID {
        let prev = grid[(k + THETA_GRID - 1) % THETA_GRID];
        let next = grid[(k + 1) % THETA_GRID];
        if grid[k] < prev || grid[k] < next || grid[k] < best - margin {
            continue;
        }
        let center = k as f64 * step;
        let (theta, value) = golden_section_max(&mut lambda, center - step, center + step, THETA_TOL);
        let (theta, value) = if value >= grid[k] { (theta, value) } else { (center, grid[k]) };
        if value > value_best {
            value_best = value;
            theta_best = theta;
        }
    }
    let (s, co) = theta_best.sin_cos();
    let h = &b.scale_real(co) - &c.scale_real(s);
    let e = hermitian_eig(&h)?;
    let x = e.vector(e.dim() - 1);
    Ok(RadiusEstimate {
        value: numerical_range_modulus(t, &x),
        witness: x,
        method: Method::ThetaSweep,
        starts_used: THETA_GRID,
        converged: true,
    })
}

fn golden_section_max(g: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = g(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `sum_j f(|<T_j x, x>|)` at a unit vector.
pub fn tuple_objective(tuple: &OperatorTuple, f: &ScalarMap, x: &[C64]) -> f64 {
    tuple
        .ops()
        .iter()
        .map(|t| f.eval(numerical_range_modulus(t, x)))
        .sum()
}

/// `f^{-1}(sum_j f(|<T_j x, x>|))` at a unit vector: the quantity whose supremum is the f-radius.
pub fn f_objective(tuple: &OperatorTuple, f: &ScalarMap, x: &[C64]) -> Result<f64> {
    f.inverse(tuple_objective(tuple, f, x))
}

pub(crate) fn standard_complex_gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re * s, im * s)
        })
        .collect()
}

pub(crate) fn random_unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<C64> {
    loop {
        if let Some(v) = normalized(&standard_complex_gaussian(rng, d)) {
            return v;
        }
    }
}

/// Basis vectors `e_k` and rotated pairs `(e_k + i e_{k+1})/sqrt(2)`.
fn structured_starts(d: usize) -> Vec<Vec<C64>> {
    let mut out = Vec::with_capacity(2 * d);
    for k in 0..d {
        let mut e = vec![C64::new(0.0, 0.0); d];
        e[k] = C64::new(1.0, 0.0);
        out.push(e);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..d {
        let mut e = vec![C64::new(0.0, 0.0); d];
        e[k] += C64::new(s, 0.0);
        e[(k + 1) % d] += C64::new(0.0, s);
        out.push(normalized(&e).unwrap_or_else(|| {
            let mut e = vec![C64::new(0.0, 0.0); d];
            e[k] = C64::new(0.0, 1.0);
            e
        }));
    }
    out
}

fn check_map(f: &ScalarMap) -> Result<()> {
    f.require(&[MapFlag::Increasing, MapFlag::ZeroAtZero])
}

/// f-operator radius `sup_{|x|=1} f^{-1}(sum_j f(|<T_j x, x>|))`.
///
/// Maximizes `h(x) = sum_j f(|<T_j x, x>|)` from `max(20, 10 d)` seeded
/// random starts, the `2d` structured starts, and the numerical-radius
/// witness of every operator, then applies `f^{-1}` once to the best
/// attained value. Ties keep the earliest start.
pub fn f_radius(tuple: &OperatorTuple, f: &ScalarMap, opts: &OptimizerOptions) -> Result<RadiusEstimate> {
    check_map(f)?;
    let d = tuple.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts: Vec<Vec<C64>> = (0..opts.random_starts(d))
        .map(|_| random_unit_vector(&mut rng, d))
        .collect();
    starts.extend(structured_starts(d));
    if opts.witness_hints.is_empty() {
        for t in tuple.ops() {
            starts.push(numerical_radius(t)?.witness);
        }
    } else {
        starts.extend(opts.witness_hints.iter().filter(|w| w.len() == d).cloned());
    }

    let obj = Objective::new(tuple.ops(), f);
    let mut best: Option<ascent::AscentResult> = None;
    for start in &starts {
        let r = ascent::ascend(&obj, start, opts.fd_step, opts.step_tol, opts.max_iter);
        if best.as_ref().map_or(true, |b| r.value > b.value) {
            best = Some(r);
        }
    }
    let best = best.expect("at least one start");
    let witness = best.point;
    let h = tuple_objective(tuple, f, &witness);
    Ok(RadiusEstimate {
        value: f.inverse(h)?,
        witness,
        method: Method::Multistart,
        starts_used: starts.len(),
        converged: best.converged,
    })
}

/// `omega_q = f`-radius with `f = t^q`, `q >= 1`. `q = 2` is the Euclidean operator radius.
pub fn q_radius(tuple: &OperatorTuple, q: f64, opts: &OptimizerOptions) -> Result<RadiusEstimate> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("q-radius needs q >= 1, got {q}")));
    }
    f_radius(tuple, &ScalarMap::power(q)?, opts)
}

/// The pair `(T, T*T)`.
pub fn davis_wielandt_tuple(t: &CMatrix) -> OperatorTuple {
    OperatorTuple {
        ops: vec![t.clone(), &t.adjoint() * t],
    }
}

/// Generalized Davis-Wielandt radius `omega_f(T, T*T)`; `f = t^2` gives `dw(T)`.
pub fn davis_wielandt(t: &CMatrix, f: &ScalarMap, opts: &OptimizerOptions) -> Result<RadiusEstimate> {
    f_radius(&davis_wielandt_tuple(t), f, opts)
}
