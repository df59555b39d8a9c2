use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

/// Wire form: `{"dim": d, "entries": [[re, im], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        let data = m.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        CMatrix::from_entries(m.dim, data)
    }
}

impl From<CMatrix> for MatrixJson {
    fn from(m: CMatrix) -> Self {
        MatrixJson {
            dim: m.dim,
            entries: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// Operand kinds accepted by [`arithmetic`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
    Scale,
    Adjoint,
}

/// Right-hand operand for [`arithmetic`].
#[derive(Clone, Debug)]
pub enum Operand<'a> {
    Matrix(&'a CMatrix),
    Scalar(C64),
    None,
}

/// Checked matrix arithmetic. Binary kinds require equal dimensions.
pub fn arithmetic(a: &CMatrix, b: Operand<'_>, kind: ArithKind) -> Result<CMatrix> {
    match (kind, b) {
        (ArithKind::Adjoint, _) => Ok(a.adjoint()),
        (ArithKind::Scale, Operand::Scalar(s)) => Ok(a.scale(s)),
        (ArithKind::Add, Operand::Matrix(b)) => a.checked_add(b),
        (ArithKind::Sub, Operand::Matrix(b)) => a.checked_sub(b),
        (ArithKind::Mul, Operand::Matrix(b)) => a.checked_mul(b),
        (kind, _) => Err(Error::InvalidParameter(format!(
            "operand does not match arithmetic kind {kind:?}"
        ))),
    }
}

impl CMatrix {
    /// Build from row-major entries, rejecting empty, short, or non-finite input.
    pub fn from_entries(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != dim * dim {
            return Err(Error::EntryCount {
                dim,
                expected: dim * dim,
                got: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k / dim,
                col: k % dim,
            });
        }
        Ok(CMatrix { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        CMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Real matrix from rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = C64::new(v, 0.0);
            }
        }
        m
    }

    /// Complex matrix from rows. Panics on ragged input.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            m.data[i * dim..(i + 1) * dim].copy_from_slice(row);
        }
        m
    }

    /// Outer product `u v*`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let dim = u.len();
        assert_eq!(v.len(), dim);
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = u[i] * v[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self.data[i * self.dim + j]).collect()
    }

    pub fn adjoint(&self) -> CMatrix {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn check_dim(&self, other: &CMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_dim(other)?;
        Ok(CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_dim(other)?;
        Ok(CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn checked_mul(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_dim(other)?;
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        Ok(out)
    }

    /// `T x`.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let d = self.dim;
        assert_eq!(x.len(), d, "vector length does not match matrix dimension");
        (0..d)
            .map(|i| {
                self.data[i * d..(i + 1) * d]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `<T x, x> = x* T x`.
    pub fn quadratic_form(&self, x: &[C64]) -> C64 {
        let d = self.dim;
        assert_eq!(x.len(), d, "vector length does not match matrix dimension");
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            let row: C64 = self.data[i * d..(i + 1) * d].iter().zip(x).map(|(a, b)| a * b).sum();
            acc += row * x[i].conj();
        }
        acc
    }

    /// Hermitian part `(T + T*)/2`.
    pub fn real_part(&self) -> CMatrix {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[i * d + j] = (self.data[i * d + j] + self.data[j * d + i].conj()) * 0.5;
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self*`.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() == 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}

/// `<u, v> = sum_i u_i conj(v_i)`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Scale to unit length. Returns `None` for the zero vector.
pub fn normalized(v: &[C64]) -> Option<Vec<C64>> {
    let n = vec_norm(v);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some(v.iter().map(|z| z / n).collect())
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

// Operator forms panic on dimension mismatch; use `checked_*` or `arithmetic` for fallible input.
impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.checked_add(rhs).expect("matrix add")
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.checked_sub(rhs).expect("matrix sub")
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.checked_mul(rhs).expect("matrix mul")
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
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

    #[test]
    fn adjoint_of_jordan_block() {
        let expected = CMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(arithmetic(&jordan(), Operand::None, ArithKind::Adjoint).unwrap(), expected);
    }

    #[test]
    fn scale_identity_by_i() {
        let out = arithmetic(&CMatrix::identity(2), Operand::Scalar(c(0.0, 1.0)), ArithKind::Scale).unwrap();
        let expected = CMatrix::from_rows(&[&[c(0.0, 1.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(0.0, 1.0)]]);
        assert_eq!(out, expected);
    }

    #[test]
    fn jordan_times_adjoint() {
        let j = jordan();
        let out = arithmetic(&j, Operand::Matrix(&j.adjoint()), ArithKind::Mul).unwrap();
        assert_eq!(out, CMatrix::from_diag(&[1.0, 0.0]));
    }

    #[test]
    fn dimension_mismatch_names_both_dims() {
        let err = CMatrix::identity(2).checked_add(&CMatrix::identity(3)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 3 });
        assert!(err.to_string().contains("2x2") && err.to_string().contains("3x3"));
    }

    #[test]
    fn mismatched_operand_is_rejected() {
        let i = CMatrix::identity(2);
        assert!(arithmetic(&i, Operand::Scalar(c(1.0, 0.0)), ArithKind::Add).is_err());
    }

    #[test]
    fn rejects_bad_entries() {
        assert_eq!(CMatrix::from_entries(0, vec![]), Err(Error::EmptyMatrix));
        assert!(matches!(
            CMatrix::from_entries(2, vec![c(0.0, 0.0); 3]),
            Err(Error::EntryCount { got: 3, .. })
        ));
        let mut data = vec![c(0.0, 0.0); 4];
        data[3] = c(f64::NAN, 0.0);
        assert_eq!(CMatrix::from_entries(2, data), Err(Error::NonFinite { row: 1, col: 1 }));
    }

    #[test]
    fn json_wire_format() {
        let m = CMatrix::from_rows(&[&[c(1.0, 2.0), c(0.0, 0.0)], &[c(0.0, -1.0), c(3.5, 0.0)]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"dim":2,"entries":[[1.0,2.0],[0.0,0.0],[0.0,-1.0],[3.5,0.0]]}"#);
        let back: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<CMatrix>(r#"{"dim":2,"entries":[[1,0]]}"#).is_err());
    }

    #[test]
    fn quadratic_form_matches_definition() {
        let t = CMatrix::from_rows(&[&[c(1.0, 1.0), c(2.0, 0.0)], &[c(0.0, -1.0), c(0.5, 0.0)]]);
        let x = [c(0.6, 0.0), c(0.0, 0.8)];
        let tx = t.mul_vec(&x);
        let expected = tx[0] * x[0].conj() + tx[1] * x[1].conj();
        assert!((t.quadratic_form(&x) - expected).norm() < 1e-15);
    }
}
