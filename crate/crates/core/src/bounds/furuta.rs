//! Pointwise mixed Schwarz inequality
//! `|<T|T|^(a+b-1) x, y>|^2 <= <|T|^2a x, x> <|T*|^2b y, y>`.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BoundCheckResult, Fingerprint, LinkResult, SideKind};
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, psd_power, CMatrix};
use crate::radius::random_unit_vector;

/// Relative tolerance, scaled by `max(1, ||T||^(2(a+b)))`.
pub const FURUTA_TOL: f64 = 1e-10;

struct Sides {
    mixed: CMatrix,
    left: CMatrix,
    right: CMatrix,
}

fn validate(alpha: f64, beta: f64) -> Result<()> {
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    if !unit(alpha) || !unit(beta) || alpha + beta < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "need alpha, beta in [0, 1] with alpha + beta >= 1, got ({alpha}, {beta})"
        )));
    }
    Ok(())
}

fn sides(t: &CMatrix, alpha: f64, beta: f64) -> Result<Sides> {
    validate(alpha, beta)?;
    let ts = t.adjoint();
    let gram = &ts * t;
    let cogram = t * &ts;
    Ok(Sides {
        mixed: t * &psd_power(&gram, (alpha + beta - 1.0) / 2.0)?,
        left: psd_power(&gram, alpha)?,
        right: psd_power(&cogram, beta)?,
    })
}

impl Sides {
    fn eval(&self, x: &[C64], y: &[C64]) -> (f64, f64) {
        // <A x, y> = y* A x
        let ax = self.mixed.mul_vec(x);
        let cross: C64 = ax.iter().zip(y).map(|(a, b)| a * b.conj()).sum();
        let lhs = cross.norm_sqr();
        let rhs = self.left.quadratic_form(x).re * self.right.quadratic_form(y).re;
        (lhs, rhs)
    }
}

/// Both sides at one pair of vectors.
pub fn furuta_sides(t: &CMatrix, alpha: f64, beta: f64, x: &[C64], y: &[C64]) -> Result<(f64, f64)> {
    let d = t.dim();
    if x.len() != d || y.len() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: if x.len() != d { x.len() } else { y.len() },
        });
    }
    Ok(sides(t, alpha, beta)?.eval(x, y))
}

/// Worst slack over `trials` random unit pairs.
pub fn check_furuta_pointwise(t: &CMatrix, alpha: f64, beta: f64, trials: usize, seed: u64) -> Result<BoundCheckResult> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let s = sides(t, alpha, beta)?;
    let d = t.dim();
    let tol = FURUTA_TOL * operator_norm(t).powf(2.0 * (alpha + beta)).max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (f64::INFINITY, 0.0, 0.0);
    for _ in 0..trials {
        let x = random_unit_vector(&mut rng, d);
        let y = random_unit_vector(&mut rng, d);
        let (lhs, rhs) = s.eval(&x, &y);
        if rhs - lhs < worst.0 {
            worst = (rhs - lhs, lhs, rhs);
        }
    }
    let (slack, lhs, rhs) = worst;
    let link = LinkResult {
        label: "|<T|T|^(a+b-1) x, y>|^2 <= <|T|^2a x, x> <|T*|^2b y, y>".into(),
        lhs,
        rhs,
        lhs_kind: SideKind::Exact,
        rhs_kind: SideKind::Exact,
        slack,
        tolerance_used: tol,
        pass: lhs <= rhs + tol,
    };
    let fp = Fingerprint {
        seed,
        dim: d,
        n: 1,
        map: "none".into(),
        alpha: Some(alpha),
        beta: Some(beta),
        ..Default::default()
    };
    Ok(BoundCheckResult::from_links("furuta", vec![link], fp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jordan_basis_vector_gives_zero() {
        let j = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e2 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let (lhs, _) = furuta_sides(&j, 0.5, 0.5, &e2, &e2).unwrap();
        assert_eq!(lhs, 0.0);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        let t = CMatrix::identity(2);
        assert!(check_furuta_pointwise(&t, 0.3, 0.3, 10, 1).is_err());
        assert!(check_furuta_pointwise(&t, 1.2, 0.3, 10, 1).is_err());
        assert!(check_furuta_pointwise(&t, 0.5, 0.5, 0, 1).is_err());
    }
}
