use num_complex::Complex64 as C64;

use super::objective::Objective;
use crate::linalg::vec_norm;

/// Armijo sufficient-increase constant.
const ARMIJO: f64 = 1e-4;
/// Length of the first trial step on the unit sphere.
const FIRST_STEP: f64 = 0.25;

pub(crate) struct AscentResult {
    pub point: Vec<C64>,
    pub value: f64,
    pub converged: bool,
}

fn normalize_in_place(z: &mut [C64]) -> bool {
    let n = vec_norm(z);
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    z.iter_mut().for_each(|c| *c /= n);
    true
}

/// Projected gradient ascent on the unit sphere with Barzilai-Borwein trial
/// steps and Armijo backtracking. Stops when an accepted step improves the
/// objective by less than `tol * max(1, |h|)`.
pub(crate) fn ascend(
    obj: &Objective<'_>,
    start: &[C64],
    fd_step: f64,
    tol: f64,
    max_iter: usize,
) -> AscentResult {
    let d = obj.dim();
    let mut z = start.to_vec();
    if !normalize_in_place(&mut z) {
        z = vec![C64::new(0.0, 0.0); d];
        z[0] = C64::new(1.0, 0.0);
    }
    let mut grad = vec![C64::new(0.0, 0.0); d];
    let mut h = obj.value_and_gradient(&z, fd_step, &mut grad);
    let mut gnorm = vec_norm(&grad);
    let mut t = if gnorm > 0.0 { FIRST_STEP / gnorm } else { 0.0 };
    let mut trial = vec![C64::new(0.0, 0.0); d];
    let mut next_grad = vec![C64::new(0.0, 0.0); d];

    for _ in 0..max_iter {
        if !(gnorm > 0.0) || !h.is_finite() {
            return AscentResult { point: z, value: h, converged: true };
        }
        let g2 = gnorm * gnorm;
        let h_next;
        loop {
            for k in 0..d {
                trial[k] = z[k] + grad[k] * t;
            }
            if normalize_in_place(&mut trial) {
                let v = obj.value(&trial);
                if v >= h + ARMIJO * t * g2 {
                    h_next = v;
                    break;
                }
            }
            t *= 0.5;
            if t * gnorm < 1e-15 {
                // no ascent direction at working precision
                return AscentResult { point: z, value: h, converged: true };
            }
        }
        let improvement = h_next - h;
        let h_eval = obj.value_and_gradient(&trial, fd_step, &mut next_grad);
        // s = trial - z, y = next_grad - grad
        let mut ss = 0.0;
        let mut sy = 0.0;
        for k in 0..d {
            let s = trial[k] - z[k];
            let y = next_grad[k] - grad[k];
            ss += s.norm_sqr();
            sy += s.re * y.re + s.im * y.im;
        }
        std::mem::swap(&mut z, &mut trial);
        std::mem::swap(&mut grad, &mut next_grad);
        h = h_eval;
        gnorm = vec_norm(&grad);
        if improvement < tol * h.abs().max(1.0) {
            return AscentResult { point: z, value: h, converged: true };
        }
        // ascent on a concave model wants s.y < 0
        t = if sy < 0.0 {
            ss / -sy
        } else {
            2.0 * t
        };
        if gnorm > 0.0 {
            t = t.min(1.0 / gnorm);
        }
    }
    AscentResult { point: z, value: h, converged: false }
}
