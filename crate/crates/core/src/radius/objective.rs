//! `h(z) = sum_j f(|<T_j z, z>| / |z|^2)` over `z` in `C^d \ {0}` and its
//! central-difference gradient.
//!
//! Perturbing one coordinate `z_k -> z_k + c` changes the quadratic forms by
//! `c conj((T* z)_k) + conj(c) (T z)_k + |c|^2 T_kk`, so each difference
//! quotient costs O(n) after one O(n d^2) setup.

use std::cell::RefCell;

use num_complex::Complex64 as C64;

use crate::linalg::CMatrix;
use crate::scalarmap::ScalarMap;

pub(crate) struct Objective<'a> {
    ops: &'a [CMatrix],
    f: &'a ScalarMap,
    dim: usize,
    scratch: RefCell<Probe>,
}

/// Products at the current point, flattened as `[j * d + k]`.
struct Probe {
    tz: Vec<C64>,
    tsz: Vec<C64>,
    q: Vec<C64>,
    diag: Vec<C64>,
}

impl<'a> Objective<'a> {
    pub fn new(ops: &'a [CMatrix], f: &'a ScalarMap) -> Self {
        let dim = ops[0].dim();
        let n = ops.len();
        let diag = ops
            .iter()
            .flat_map(|t| (0..dim).map(move |k| t[(k, k)]))
            .collect();
        Objective {
            ops,
            f,
            dim,
            scratch: RefCell::new(Probe {
                tz: vec![C64::new(0.0, 0.0); n * dim],
                tsz: vec![C64::new(0.0, 0.0); n * dim],
                q: vec![C64::new(0.0, 0.0); n],
                diag,
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Objective value at `z` (need not be normalized).
    pub fn value(&self, z: &[C64]) -> f64 {
        let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        self.ops
            .iter()
            .map(|t| self.f.eval(t.quadratic_form(z).norm() / s))
            .sum()
    }

    fn fill(&self, p: &mut Probe, z: &[C64]) {
        let d = self.dim;
        for (j, t) in self.ops.iter().enumerate() {
            let e = t.entries();
            let tz = &mut p.tz[j * d..(j + 1) * d];
            let tsz = &mut p.tsz[j * d..(j + 1) * d];
            tz.fill(C64::new(0.0, 0.0));
            tsz.fill(C64::new(0.0, 0.0));
            for r in 0..d {
                let row = &e[r * d..(r + 1) * d];
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..d {
                    acc += row[c] * z[c];
                    // (T* z)_c = sum_r conj(T_rc) z_r
                    tsz[c] += row[c].conj() * z[r];
                }
                tz[r] = acc;
            }
            p.q[j] = tz.iter().zip(z).map(|(a, b)| a * b.conj()).sum();
        }
    }

    /// Value and central-difference gradient with respect to the `2d` real
    /// coordinates, packed as complex numbers `(d/d re, d/d im)`.
    pub fn value_and_gradient(&self, z: &[C64], step: f64, grad: &mut [C64]) -> f64 {
        let mut p = self.scratch.borrow_mut();
        self.fill(&mut p, z);
        let d = self.dim;
        let norm_sqr: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        let h = p.q.iter().map(|q| self.f.eval(q.norm() / norm_sqr)).sum();
        let shifted = |k: usize, c: C64| -> f64 {
            let c2 = c.norm_sqr();
            let s = norm_sqr + 2.0 * (z[k].conj() * c).re + c2;
            let mut h = 0.0;
            for j in 0..self.ops.len() {
                let i = j * d + k;
                let dq = c * p.tsz[i].conj() + c.conj() * p.tz[i] + p.diag[i] * c2;
                h += self.f.eval((p.q[j] + dq).norm() / s);
            }
            h
        };
        let inv = 0.5 / step;
        let re = C64::new(step, 0.0);
        let im = C64::new(0.0, step);
        for k in 0..d {
            let gr = (shifted(k, re) - shifted(k, -re)) * inv;
            let gi = (shifted(k, im) - shifted(k, -im)) * inv;
            grad[k] = C64::new(gr, gi);
        }
        h
    }
}
