//! Brute-force reference for the f-radius: uniform sampling of the sphere
//! followed by local random refinement of the best samples.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_map, random_unit_vector, standard_complex_gaussian, tuple_objective, Method, OperatorTuple, RadiusEstimate};
use crate::error::{Error, Result};
use crate::linalg::normalized;
use crate::scalarmap::ScalarMap;

/// Samples kept for refinement.
pub const ORACLE_KEEP: usize = 10;
/// Perturbation rounds per kept sample.
pub const ORACLE_REFINE_STEPS: usize = 1000;

/// Sample `samples` uniform unit vectors, keep the best [`ORACLE_KEEP`], and
/// refine each with [`ORACLE_REFINE_STEPS`] random perturbations of
/// geometrically shrinking size. Only improving moves are accepted, so the
/// result is a certified lower bound.
pub fn oracle_radius(tuple: &OperatorTuple, f: &ScalarMap, samples: usize, seed: u64) -> Result<RadiusEstimate> {
    check_map(f)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("oracle needs at least one sample".into()));
    }
    let d = tuple.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept: Vec<(f64, Vec<C64>)> = Vec::with_capacity(ORACLE_KEEP + 1);
    for _ in 0..samples {
        let x = random_unit_vector(&mut rng, d);
        let h = tuple_objective(tuple, f, &x);
        if kept.len() < ORACLE_KEEP || h > kept[kept.len() - 1].0 {
            let pos = kept.partition_point(|(v, _)| *v >= h);
            kept.insert(pos, (h, x));
            kept.truncate(ORACLE_KEEP);
        }
    }

    let shrink = (1e-6f64).powf(1.0 / ORACLE_REFINE_STEPS as f64);
    let mut best: Option<(f64, Vec<C64>)> = None;
    for (mut h, mut x) in kept {
        let mut radius = 0.5;
        for _ in 0..ORACLE_REFINE_STEPS {
            let noise = standard_complex_gaussian(&mut rng, d);
            let scale = radius * rng.random_range(0.0..1.0f64);
            let trial: Vec<C64> = x.iter().zip(&noise).map(|(a, b)| a + b * scale).collect();
            if let Some(y) = normalized(&trial) {
                let v = tuple_objective(tuple, f, &y);
                if v > h {
                    h = v;
                    x = y;
                }
            }
            radius *= shrink;
        }
        if best.as_ref().map_or(true, |(b, _)| h > *b) {
            best = Some((h, x));
        }
    }
    let (h, witness) = best.expect("at least one sample");
    Ok(RadiusEstimate {
        value: f.inverse(h)?,
        witness,
        method: Method::Oracle,
        starts_used: samples,
        converged: true,
    })
}
