use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::eig::{hermitian_eig, EigenDecomposition};
use super::matrix::{inner, vec_norm, CMatrix};
use crate::error::{Error, Result};

/// Eigenvalues above `-CLAMP_TOL * ||h||` are treated as round-off and clamped to zero.
pub const CLAMP_TOL: f64 = 1e-12;
/// Eigenvalues below `-DOMAIN_TOL * ||h||` are a domain error for maps on `[0, inf)`.
pub const DOMAIN_TOL: f64 = 1e-8;

/// `T = U |T|` with `U` a partial isometry and `|T|` positive semidefinite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolarParts {
    pub isometry: CMatrix,
    pub modulus: CMatrix,
}

/// Thin singular value decomposition restricted to the numerical range of `T`.
#[derive(Clone, Debug)]
pub struct SingularTriplets {
    /// Singular values, descending, all strictly above the rank threshold.
    pub values: Vec<f64>,
    pub left: Vec<Vec<C64>>,
    pub right: Vec<Vec<C64>>,
    /// Largest singular value (also reported when the rank is zero).
    pub sigma_max: f64,
}

/// `sqrt(lambda_max(T* T))`.
pub fn operator_norm(t: &CMatrix) -> f64 {
    let tt = &t.adjoint() * t;
    match hermitian_eig(&tt) {
        Ok(e) => e.max_eigenvalue().max(0.0).sqrt(),
        // T*T is Hermitian by construction, so only non-convergence lands here
        Err(_) => t.frobenius_norm(),
    }
}

/// Spectral norm of a Hermitian matrix: `max |lambda|`.
pub fn hermitian_norm(h: &CMatrix) -> Result<f64> {
    let e = hermitian_eig(h)?;
    Ok(e.max_eigenvalue().abs().max(e.min_eigenvalue().abs()))
}

fn clamp_psd(e: &mut EigenDecomposition, scale: f64) -> Result<()> {
    let floor = -DOMAIN_TOL * scale.max(f64::MIN_POSITIVE);
    for l in e.eigenvalues.iter_mut() {
        if *l < floor {
            return Err(Error::Domain { eigenvalue: *l });
        }
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    Ok(())
}

/// Functional calculus `phi(H) = V diag(phi(lambda)) V*` for maps defined on `[0, inf)`.
///
/// Slightly negative round-off eigenvalues are clamped to zero; materially
/// negative ones are rejected.
pub fn apply_map_hermitian(h: &CMatrix, phi: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let mut e = hermitian_eig(h)?;
    let scale = e.max_eigenvalue().abs().max(e.min_eigenvalue().abs());
    clamp_psd(&mut e, scale)?;
    Ok(e.reconstruct_with(phi))
}

/// As [`apply_map_hermitian`] for a map that can fail.
pub fn try_apply_map_hermitian(h: &CMatrix, phi: impl Fn(f64) -> Result<f64>) -> Result<CMatrix> {
    let mut e = hermitian_eig(h)?;
    let scale = e.max_eigenvalue().abs().max(e.min_eigenvalue().abs());
    clamp_psd(&mut e, scale)?;
    e.try_reconstruct_with(phi)
}

/// `H^alpha` for positive semidefinite `H`, with the convention `0^0 = 1`.
pub fn psd_power(h: &CMatrix, alpha: f64) -> Result<CMatrix> {
    apply_map_hermitian(h, |t| t.powf(alpha))
}

/// Functional calculus for arbitrary real maps on the whole spectrum.
pub fn apply_real_map(h: &CMatrix, phi: impl Fn(f64) -> f64) -> Result<CMatrix> {
    Ok(hermitian_eig(h)?.reconstruct_with(phi))
}

/// `|T| = (T* T)^{1/2}`.
pub fn abs_op(t: &CMatrix) -> Result<CMatrix> {
    psd_power(&(&t.adjoint() * t), 0.5)
}

/// `|H|` for Hermitian `H` via its own spectrum (sign-free).
pub fn hermitian_abs(h: &CMatrix) -> Result<CMatrix> {
    apply_real_map(h, f64::abs)
}

/// `(B, C)` with `B = (T + T*)/2`, `C = (T - T*)/(2i)`, so `T = B + iC`.
pub fn cartesian(t: &CMatrix) -> (CMatrix, CMatrix) {
    let d = t.dim();
    let mut b = CMatrix::zeros(d);
    let mut c = CMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let tij = t[(i, j)];
            let tji = t[(j, i)].conj();
            b[(i, j)] = (tij + tji) * 0.5;
            // (x - y)/(2i) = -i (x - y)/2
            c[(i, j)] = (tij - tji) * C64::new(0.0, -0.5);
        }
    }
    (b, c)
}

/// Singular triplets from the spectrum of `T* T`, with left vectors `T v / ||T v||`.
///
/// Left vectors are Gram-Schmidt re-orthonormalized in order of decreasing
/// singular value so that `sum w_k v_k*` is an exact partial isometry even
/// when a tiny singular value sits just above the rank threshold.
pub fn singular_triplets(t: &CMatrix) -> Result<SingularTriplets> {
    let d = t.dim();
    let e = hermitian_eig(&(&t.adjoint() * t))?;
    let sigma_max = e.max_eigenvalue().max(0.0).sqrt();
    let tau = d as f64 * f64::EPSILON * sigma_max;
    let mut values = Vec::new();
    let mut left: Vec<Vec<C64>> = Vec::new();
    let mut right = Vec::new();
    for k in (0..d).rev() {
        let v = e.vector(k);
        let tv = t.mul_vec(&v);
        let sigma = vec_norm(&tv);
        if !(sigma > tau) {
            continue;
        }
        let mut w: Vec<C64> = tv.iter().map(|z| z / sigma).collect();
        for prev in &left {
            let proj = inner(&w, prev);
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= pi * proj;
            }
        }
        let n = vec_norm(&w);
        if n < 0.5 {
            // numerically dependent on earlier directions; treat as null
            continue;
        }
        w.iter_mut().for_each(|z| *z /= n);
        values.push(sigma);
        left.push(w);
        right.push(v);
    }
    Ok(SingularTriplets {
        values,
        left,
        right,
        sigma_max,
    })
}

/// Polar decomposition `T = U|T|` with `U` the range-restricted partial isometry.
pub fn polar_decompose(t: &CMatrix) -> Result<PolarParts> {
    let d = t.dim();
    let svd = singular_triplets(t)?;
    let mut u = CMatrix::zeros(d);
    for (w, v) in svd.left.iter().zip(&svd.right) {
        let outer = CMatrix::outer(w, v);
        u = &u + &outer;
    }
    let modulus = abs_op(t)?;
    Ok(PolarParts {
        isometry: u,
        modulus,
    })
}

/// Aluthge transform `|T|^{1/2} U |T|^{1/2}`.
pub fn aluthge(t: &CMatrix) -> Result<CMatrix> {
    let polar = polar_decompose(t)?;
    aluthge_from_polar(&polar)
}

pub fn aluthge_from_polar(polar: &PolarParts) -> Result<CMatrix> {
    let root = psd_power(&polar.modulus, 0.5)?;
    Ok(&(&root * &polar.isometry) * &root)
}

/// Full set of decompositions reported by the `decompose` command.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Decompositions {
    pub abs: CMatrix,
    pub polar: PolarParts,
    pub aluthge: CMatrix,
    pub cartesian: CartesianParts,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CartesianParts {
    pub real: CMatrix,
    pub imag: CMatrix,
}

pub fn decompose_all(t: &CMatrix) -> Result<Decompositions> {
    let polar = polar_decompose(t)?;
    let aluthge = aluthge_from_polar(&polar)?;
    let (real, imag) = cartesian(t);
    Ok(Decompositions {
        abs: polar.modulus.clone(),
        polar,
        aluthge,
        cartesian: CartesianParts { real, imag },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn jordan() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    fn hadamard_like() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_rows(&[&[c(s, 0.0), c(0.0, s)], &[c(0.0, s), c(s, 0.0)]])
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&jordan()) - 1.0).abs() < 1e-14);
        let t = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((operator_norm(&t) - golden).abs() < 1e-12);
        assert_eq!(operator_norm(&CMatrix::zeros(3)), 0.0);
    }

    #[test]
    fn abs_examples() {
        assert!(abs_op(&jordan()).unwrap().max_abs_diff(&CMatrix::from_diag(&[0.0, 1.0])) < 1e-14);
        assert!(abs_op(&CMatrix::from_diag(&[2.0, -3.0])).unwrap().max_abs_diff(&CMatrix::from_diag(&[2.0, 3.0])) < 1e-14);
        assert!(abs_op(&hadamard_like()).unwrap().max_abs_diff(&CMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn polar_of_jordan() {
        let p = polar_decompose(&jordan()).unwrap();
        assert!(p.isometry.max_abs_diff(&jordan()) < 1e-14);
        assert!(p.modulus.max_abs_diff(&CMatrix::from_diag(&[0.0, 1.0])) < 1e-14);
        assert!((&p.isometry * &p.modulus).max_abs_diff(&jordan()) < 1e-14);
        let u = &p.isometry;
        assert!((&(u * &u.adjoint()) * u).max_abs_diff(u) < 1e-14);
    }

    #[test]
    fn polar_of_signed_diagonal() {
        let p = polar_decompose(&CMatrix::from_diag(&[2.0, -3.0])).unwrap();
        assert!(p.isometry.max_abs_diff(&CMatrix::from_diag(&[1.0, -1.0])) < 1e-14);
        assert!(p.modulus.max_abs_diff(&CMatrix::from_diag(&[2.0, 3.0])) < 1e-14);
    }

    #[test]
    fn polar_of_zero() {
        let p = polar_decompose(&CMatrix::zeros(2)).unwrap();
        assert!(p.isometry.is_zero());
        assert!(p.modulus.is_zero());
    }

    #[test]
    fn aluthge_examples() {
        assert!(aluthge(&jordan()).unwrap().max_abs_diff(&CMatrix::zeros(2)) < 1e-14);
        let z = CMatrix::from_diag(&[1.0, -1.0]);
        assert!(aluthge(&z).unwrap().max_abs_diff(&z) < 1e-14);
        let u = hadamard_like();
        assert!(aluthge(&u).unwrap().max_abs_diff(&u) < 1e-13);
    }

    #[test]
    fn cartesian_examples() {
        let (b, cc) = cartesian(&jordan());
        assert_eq!(b, CMatrix::from_real_rows(&[&[0.0, 0.5], &[0.5, 0.0]]));
        let expected_c = CMatrix::from_rows(&[&[c(0.0, 0.0), c(0.0, -0.5)], &[c(0.0, 0.5), c(0.0, 0.0)]]);
        assert!(cc.max_abs_diff(&expected_c) == 0.0);
        let back = &b + &cc.scale(c(0.0, 1.0));
        assert_eq!(back, jordan());

        let h = CMatrix::from_rows(&[&[c(1.0, 0.0), c(2.0, -1.0)], &[c(2.0, 1.0), c(-3.0, 0.0)]]);
        let (b, cc) = cartesian(&h);
        assert_eq!(b, h);
        assert!(cc.is_zero());
        let (b, cc) = cartesian(&h.scale(c(0.0, 1.0)));
        assert!(b.is_zero());
        assert_eq!(cc, h);
    }

    #[test]
    fn functional_calculus_examples() {
        let sq = |t: f64| t * t;
        assert!(apply_map_hermitian(&CMatrix::from_diag(&[0.0, 1.0]), sq).unwrap().max_abs_diff(&CMatrix::from_diag(&[0.0, 1.0])) < 1e-15);
        let x = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(apply_real_map(&x, sq).unwrap().max_abs_diff(&CMatrix::identity(2)) < 1e-14);
        assert!(apply_map_hermitian(&CMatrix::from_diag(&[4.0, 9.0]), f64::sqrt).unwrap().max_abs_diff(&CMatrix::from_diag(&[2.0, 3.0])) < 1e-14);
    }

    #[test]
    fn functional_calculus_domain_error() {
        let err = apply_map_hermitian(&CMatrix::from_diag(&[1.0, -0.5]), f64::sqrt).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
        // round-off-sized negatives are clamped
        let m = apply_map_hermitian(&CMatrix::from_diag(&[1.0, -1e-17]), f64::sqrt).unwrap();
        assert!(m[(1, 1)].re == 0.0);
    }

    #[test]
    fn zero_power_is_identity() {
        let m = psd_power(&CMatrix::from_diag(&[0.0, 2.0]), 0.0).unwrap();
        assert!(m.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }
}
