use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{vec_norm, CMatrix};
use crate::radius::standard_complex_gaussian;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Ginibre,
    GueHermitian,
    HaarUnitary,
    NilpotentJordan,
    Psd,
    /// Cycles through the other kinds with a log-uniform scale in `[0.1, 10]`.
    ScaledMix,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 6] = [
        EnsembleKind::Ginibre,
        EnsembleKind::GueHermitian,
        EnsembleKind::HaarUnitary,
        EnsembleKind::NilpotentJordan,
        EnsembleKind::Psd,
        EnsembleKind::ScaledMix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Ginibre => "ginibre",
            EnsembleKind::GueHermitian => "gue_hermitian",
            EnsembleKind::HaarUnitary => "haar_unitary",
            EnsembleKind::NilpotentJordan => "nilpotent_jordan",
            EnsembleKind::Psd => "psd",
            EnsembleKind::ScaledMix => "scaled_mix",
        }
    }

    pub(crate) fn code(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EnsembleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown ensemble `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    pub scale: f64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, dim: usize, count: usize, seed: u64) -> Self {
        EnsembleSpec {
            kind,
            dim,
            count,
            seed,
            scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if self.count == 0 {
            return Err(Error::InvalidParameter("ensemble count must be at least 1".into()));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidParameter(format!("ensemble scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }
}

fn ginibre(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    CMatrix::from_entries(d, standard_complex_gaussian(rng, d * d)).expect("d*d entries")
}

fn gue(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = ginibre(rng, d);
    let mut h = CMatrix::zeros(d);
    for i in 0..d {
        h[(i, i)] = C64::new(g[(i, i)].re, 0.0);
        for j in i + 1..d {
            let v = (g[(i, j)] + g[(j, i)].conj()) * 0.5;
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    h
}

/// Modified Gram-Schmidt on the columns of a Ginibre draw.
fn haar(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    'draw: loop {
        let g = ginibre(rng, d);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
        for j in 0..d {
            let mut v = g.column(j);
            for q in &cols {
                let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= proj * y);
            }
            let n = vec_norm(&v);
            if n < 1e-10 {
                continue 'draw;
            }
            cols.push(v.iter().map(|z| z / n).collect());
        }
        let mut u = CMatrix::zeros(d);
        for (j, c) in cols.iter().enumerate() {
            for (i, z) in c.iter().enumerate() {
                u[(i, j)] = *z;
            }
        }
        return u;
    }
}

/// `J_d` for the first draw, then weighted shifts with Gaussian superdiagonal.
fn jordan(rng: &mut ChaCha8Rng, d: usize, first: bool) -> CMatrix {
    let mut j = CMatrix::zeros(d);
    for i in 0..d.saturating_sub(1) {
        j[(i, i + 1)] = if first {
            C64::new(1.0, 0.0)
        } else {
            standard_complex_gaussian(rng, 1)[0]
        };
    }
    j
}

fn psd(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = ginibre(rng, d);
    let p = &g.adjoint() * &g;
    let mut h = CMatrix::zeros(d);
    for i in 0..d {
        h[(i, i)] = C64::new(p[(i, i)].re, 0.0);
        for j in i + 1..d {
            h[(i, j)] = p[(i, j)];
            h[(j, i)] = p[(i, j)].conj();
        }
    }
    h
}

fn draw(kind: EnsembleKind, rng: &mut ChaCha8Rng, d: usize, k: usize) -> CMatrix {
    match kind {
        EnsembleKind::Ginibre => ginibre(rng, d),
        EnsembleKind::GueHermitian => gue(rng, d),
        EnsembleKind::HaarUnitary => haar(rng, d),
        EnsembleKind::NilpotentJordan => jordan(rng, d, k == 0),
        EnsembleKind::Psd => psd(rng, d),
        EnsembleKind::ScaledMix => {
            let inner = EnsembleKind::ALL[k % 5];
            let s = 10f64.powf(rng.random_range(-1.0..=1.0));
            draw(inner, rng, d, k / 5).scale_real(s)
        }
    }
}

/// Deterministic draw of `spec.count` matrices.
pub fn generate(spec: &EnsembleSpec) -> Result<Vec<CMatrix>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.count)
        .map(|k| {
            let m = draw(spec.kind, &mut rng, spec.dim, k);
            if spec.scale == 1.0 {
                m
            } else {
                m.scale_real(spec.scale)
            }
        })
        .collect())
}
