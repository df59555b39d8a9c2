//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation zeroes one off-diagonal pair `(p, q)`. The rotation is the
//! real Jacobi rotation conjugated by the diagonal phase that makes `h[p][q]`
//! real, so the update stays unitary and the diagonal stays real.

use num_complex::Complex64 as C64;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Relative off-diagonal Frobenius threshold for convergence.
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
/// Sweep cap.
pub const MAX_SWEEPS: usize = 100;
/// Relative Hermitian-ness required of the input.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V diag(phi(lambda)) V*`.
    pub fn reconstruct_with(&self, phi: impl Fn(f64) -> f64) -> CMatrix {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| phi(l)).collect();
        self.reconstruct_from(&mapped)
    }

    /// As [`Self::reconstruct_with`] for a map that can fail.
    pub fn try_reconstruct_with(&self, phi: impl Fn(f64) -> Result<f64>) -> Result<CMatrix> {
        let mapped = self.eigenvalues.iter().map(|&l| phi(l)).collect::<Result<Vec<f64>>>()?;
        Ok(self.reconstruct_from(&mapped))
    }

    fn reconstruct_from(&self, mapped: &[f64]) -> CMatrix {
        let d = self.dim();
        let v = &self.vectors;
        let mut out = CMatrix::zeros(d);
        for i in 0..d {
            for j in i..d {
                let mut acc = C64::new(0.0, 0.0);
                for (k, &m) in mapped.iter().enumerate() {
                    acc += v[(i, k)] * v[(j, k)].conj() * m;
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
            out[(i, i)] = C64::new(out[(i, i)].re, 0.0);
        }
        out
    }
}

/// Full decomposition of a Hermitian matrix.
pub fn hermitian_eig(h: &CMatrix) -> Result<EigenDecomposition> {
    let (vals, vecs) = jacobi(h, true)?;
    Ok(EigenDecomposition {
        eigenvalues: vals,
        vectors: vecs.expect("vectors requested"),
    })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    Ok(jacobi(h, false)?.0)
}

/// Largest eigenvalue of an exactly Hermitian matrix, skipping validation.
/// Used in inner loops where the caller builds the matrix Hermitian by construction.
#[cfg(test)]
fn max_eigenvalue_unchecked(h: &CMatrix) -> f64 {
    let mut ws = MaxEigWorkspace::new(h.dim());
    ws.matrix_mut().copy_from_slice(h.entries());
    ws.max_eigenvalue()
}

/// Reusable buffers for repeated largest-eigenvalue evaluations of
/// Hermitian matrices of one dimension.
pub(crate) struct MaxEigWorkspace {
    dim: usize,
    a: Vec<C64>,
    u: Vec<C64>,
    w: Vec<C64>,
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl MaxEigWorkspace {
    pub fn new(dim: usize) -> Self {
        MaxEigWorkspace {
            dim,
            a: vec![C64::new(0.0, 0.0); dim * dim],
            u: vec![C64::new(0.0, 0.0); dim],
            w: vec![C64::new(0.0, 0.0); dim],
            diag: vec![0.0; dim],
            off: vec![0.0; dim.saturating_sub(1)],
        }
    }

    /// Row-major matrix to be filled by the caller before [`Self::max_eigenvalue`].
    pub fn matrix_mut(&mut self) -> &mut [C64] {
        &mut self.a
    }

    /// Largest eigenvalue of the (Hermitian) matrix in the buffer; the buffer is overwritten.
    #[cfg(test)]
    pub fn max_eigenvalue(&mut self) -> f64 {
        self.max_eigenvalue_below(f64::INFINITY)
    }

    /// As [`Self::max_eigenvalue`], starting the root search from `upper`
    /// when it is a valid upper bound (checked, so a wrong hint only costs time).
    pub fn max_eigenvalue_below(&mut self, upper: f64) -> f64 {
        let d = self.dim;
        match d {
            1 => self.a[0].re,
            2 => {
                let half = 0.5 * (self.a[0].re - self.a[3].re);
                0.5 * (self.a[0].re + self.a[3].re) + half.hypot(self.a[2].norm())
            }
            _ => {
                self.tridiagonalize();
                tridiagonal_max_eigenvalue(&self.diag, &self.off, upper)
            }
        }
    }

    /// Householder reduction to real symmetric tridiagonal form: fills the
    /// diagonal and the moduli of the subdiagonal.
    fn tridiagonalize(&mut self) {
        let d = self.dim;
        let MaxEigWorkspace { a, u, w, diag, off, .. } = self;
        for k in 0..d - 1 {
            let lo = k + 1;
            let norm = (lo..d).map(|i| a[i * d + k].norm_sqr()).sum::<f64>().sqrt();
            let x0 = a[lo * d + k];
            if norm == 0.0 || (lo + 1..d).all(|i| a[i * d + k] == C64::new(0.0, 0.0)) {
                off[k] = x0.norm();
                continue;
            }
            let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
            // v = x + phase * norm * e_1 avoids cancellation; H x = -phase * norm * e_1
            for i in lo..d {
                u[i] = a[i * d + k];
            }
            u[lo] += phase * norm;
            let vnorm = (lo..d).map(|i| u[i].norm_sqr()).sum::<f64>().sqrt();
            let scale = std::f64::consts::SQRT_2 / vnorm;
            for i in lo..d {
                u[i] *= scale;
            }
            // w = A u on the trailing block, then q = w - (u* w / 2) u
            for i in lo..d {
                w[i] = (lo..d).map(|j| a[i * d + j] * u[j]).sum();
            }
            let half: C64 = (lo..d).map(|i| u[i].conj() * w[i]).sum::<C64>() * 0.5;
            for i in lo..d {
                w[i] -= half * u[i];
            }
            for i in lo..d {
                for j in lo..d {
                    a[i * d + j] -= u[i] * w[j].conj() + w[i] * u[j].conj();
                }
            }
            off[k] = norm;
        }
        for i in 0..d {
            diag[i] = a[i * d + i].re;
        }
    }
}

/// Pivots of the LDL* factorization of `T - lambda I`, returning
/// `(number of nonnegative pivots, d/dlambda log|det|)`.
fn pivots(diag: &[f64], off: &[f64], lambda: f64) -> (usize, f64) {
    let mut q = diag[0] - lambda;
    let mut dq = -1.0;
    let mut nonneg = usize::from(q >= 0.0);
    let mut slope = dq / q;
    for i in 1..diag.len() {
        let e2 = off[i - 1] * off[i - 1];
        let prev = if q == 0.0 { -f64::EPSILON * (e2.sqrt() + diag[i].abs()).max(f64::MIN_POSITIVE) } else { q };
        let next = diag[i] - lambda - e2 / prev;
        dq = -1.0 + e2 * dq / (prev * prev);
        q = next;
        nonneg += usize::from(q >= 0.0);
        slope += dq / q;
    }
    (nonneg, slope)
}

/// Largest eigenvalue of a real symmetric tridiagonal matrix: Newton's
/// method from an upper bound, kept inside a bracket maintained by Sylvester
/// inertia counts and falling back to bisection when a step leaves it.
fn tridiagonal_max_eigenvalue(diag: &[f64], off: &[f64], upper: f64) -> f64 {
    let d = diag.len();
    let radius = |i: usize| {
        let l = if i > 0 { off[i - 1] } else { 0.0 };
        let r = if i + 1 < d { off[i] } else { 0.0 };
        l + r
    };
    let mut hi = (0..d).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    let mut lo = (0..d).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let scale = hi.abs().max(lo.abs());
    if scale == 0.0 {
        return 0.0;
    }
    let resolution = 4.0 * f64::EPSILON * scale;
    // the Gershgorin bound may be attained exactly, so nudge above it
    hi += resolution;
    lo -= resolution;
    let mut x = if upper < hi && upper > lo { upper } else { hi };
    for _ in 0..200 {
        let (nonneg, slope) = pivots(diag, off, x);
        if nonneg == 0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= resolution {
            break;
        }
        // below the second eigenvalue Newton may lock onto the wrong root
        let newton = x - 1.0 / slope;
        if nonneg <= 1 && (newton - x).abs() <= resolution {
            return newton.max(x);
        }
        let trusted = nonneg <= 1 && newton.is_finite() && newton < hi && newton > lo;
        let next = if trusted { newton } else { 0.5 * (lo + hi) };
        x = next;
    }
    hi
}

fn symmetrize(a: &mut CMatrix) {
    let d = a.dim();
    for i in 0..d {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in i + 1..d {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
}

fn jacobi(h: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    let d = h.dim();
    let scale = h.frobenius_norm();
    let deviation = h.hermitian_deviation();
    let tolerance = HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE);
    if deviation > tolerance {
        return Err(Error::NotHermitian {
            deviation,
            tolerance,
        });
    }
    let mut a = h.clone();
    symmetrize(&mut a);
    let mut v = want_vectors.then(|| CMatrix::identity(d));
    rotate_to_diagonal(&mut a, v.as_mut())?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let vals = order.iter().map(|&i| a[(i, i)].re).collect();
    let vecs = v.map(|v| {
        let mut sorted = CMatrix::zeros(d);
        for (new, &old) in order.iter().enumerate() {
            for r in 0..d {
                sorted[(r, new)] = v[(r, old)];
            }
        }
        sorted
    });
    Ok((vals, vecs))
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let d = a.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate_to_diagonal(a: &mut CMatrix, mut v: Option<&mut CMatrix>) -> Result<()> {
    let d = a.dim();
    let threshold = OFF_DIAGONAL_TOL * a.frobenius_norm();
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(a) <= threshold {
            return Ok(());
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if tau.is_infinite() {
                    0.0
                } else {
                    let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
                    sign / (tau.abs() + tau.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                // R[p][p] = R[q][q] = c, R[p][q] = s*phase, R[q][p] = -s*conj(phase)
                let sp = phase * s;
                let spc = sp.conj();
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * spc;
                    a[(k, q)] = akp * sp + akq * c;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * sp;
                    a[(q, k)] = apk * spc + aqk * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                if let Some(v) = v.as_deref_mut() {
                    for k in 0..d {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c - vkq * spc;
                        v[(k, q)] = vkp * sp + vkq * c;
                    }
                }
            }
        }
    }
    let residual = off_diagonal_norm(a);
    if residual <= threshold {
        Ok(())
    } else {
        Err(Error::NoConvergence {
            sweeps: MAX_SWEEPS,
            residual,
        })
    }
}
