//! Increasing scalar maps `f: [0, inf) -> [0, inf)` with declared analytic
//! properties, closed-form or numeric inverses, and empirical certification
//! of the declared properties.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Analytic properties a map may declare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapFlag {
    Increasing,
    ZeroAtZero,
    Convex,
    Concave,
    GeometricallyConvex,
    Multiplicative,
    Supermultiplicative,
}

impl MapFlag {
    pub const ALL: [MapFlag; 7] = [
        MapFlag::Increasing,
        MapFlag::ZeroAtZero,
        MapFlag::Convex,
        MapFlag::Concave,
        MapFlag::GeometricallyConvex,
        MapFlag::Multiplicative,
        MapFlag::Supermultiplicative,
    ];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn name(self) -> &'static str {
        match self {
            MapFlag::Increasing => "increasing",
            MapFlag::ZeroAtZero => "zero_at_zero",
            MapFlag::Convex => "convex",
            MapFlag::Concave => "concave",
            MapFlag::GeometricallyConvex => "geometrically_convex",
            MapFlag::Multiplicative => "multiplicative",
            MapFlag::Supermultiplicative => "supermultiplicative",
        }
    }
}

impl fmt::Display for MapFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Small set of [`MapFlag`]s.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FlagSet(u8);

impl FlagSet {
    pub fn new(flags: &[MapFlag]) -> Self {
        FlagSet(flags.iter().fold(0, |acc, f| acc | f.bit()))
    }

    pub fn contains(self, flag: MapFlag) -> bool {
        self.0 & flag.bit() != 0
    }

    pub fn contains_all(self, flags: &[MapFlag]) -> bool {
        flags.iter().all(|&f| self.contains(f))
    }

    pub fn insert(&mut self, flag: MapFlag) {
        self.0 |= flag.bit();
    }

    pub fn iter(self) -> impl Iterator<Item = MapFlag> {
        MapFlag::ALL.into_iter().filter(move |f| self.contains(*f))
    }
}

impl fmt::Debug for FlagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Power(f64),
    ExpMinusOne,
    Log1p,
    Custom { eval: RealFn, inverse: Option<RealFn> },
}

/// A continuous increasing map on `[0, inf)`.
#[derive(Clone)]
pub struct ScalarMap {
    name: String,
    kind: Kind,
    flags: FlagSet,
    /// Growth factor of the upper bracket during numeric inversion.
    domain_hint: f64,
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarMap")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .finish()
    }
}

impl ScalarMap {
    /// Built-in maps: `power` (params `[q]`, `q > 0`), `exp_minus_one`, `log1p`, `identity`.
    pub fn builtin(name: &str, params: &[f64]) -> Result<Self> {
        match name {
            "power" => {
                let q = *params
                    .first()
                    .ok_or_else(|| Error::InvalidParameter("power requires an exponent".into()))?;
                Self::power(q)
            }
            "exp_minus_one" | "expm1" => Ok(Self::exp_minus_one()),
            "log1p" => Ok(Self::log1p()),
            "identity" | "id" => Self::power(1.0),
            other => Err(Error::UnknownMap(other.to_string())),
        }
    }

    /// Parse a map spec string: `power:q`, `expm1`, `log1p`, `id`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(q) = spec.strip_prefix("power:") {
            let q: f64 = parse_exponent(q)?;
            return Self::power(q);
        }
        match spec {
            "expm1" | "exp_minus_one" => Ok(Self::exp_minus_one()),
            "log1p" => Ok(Self::log1p()),
            "id" | "identity" => Self::power(1.0),
            other => Err(Error::UnknownMap(other.to_string())),
        }
    }

    /// `t^q`.
    pub fn power(q: f64) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::InvalidParameter(format!("power exponent must be > 0, got {q}")));
        }
        use MapFlag::*;
        let mut flags = FlagSet::new(&[Increasing, ZeroAtZero, GeometricallyConvex, Multiplicative]);
        if q >= 1.0 {
            flags.insert(Convex);
            flags.insert(Supermultiplicative);
        }
        if q <= 1.0 {
            flags.insert(Concave);
        }
        Ok(ScalarMap {
            name: format!("power:{}", format_exponent(q)),
            kind: Kind::Power(q),
            flags,
            domain_hint: 2.0,
        })
    }

    /// `e^t - 1`.
    pub fn exp_minus_one() -> Self {
        use MapFlag::*;
        ScalarMap {
            name: "expm1".into(),
            kind: Kind::ExpMinusOne,
            flags: FlagSet::new(&[Increasing, ZeroAtZero, Convex]),
            domain_hint: 2.0,
        }
    }

    /// `ln(1 + t)`.
    pub fn log1p() -> Self {
        use MapFlag::*;
        ScalarMap {
            name: "log1p".into(),
            kind: Kind::Log1p,
            flags: FlagSet::new(&[Increasing, ZeroAtZero, Concave]),
            domain_hint: 2.0,
        }
    }

    /// User-supplied map. Flags are taken on trust; see [`certify_flags`].
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        inverse: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
        flags: &[MapFlag],
    ) -> Self {
        ScalarMap {
            name: name.into(),
            kind: Kind::Custom {
                eval: Arc::new(eval),
                inverse,
            },
            flags: FlagSet::new(flags),
            domain_hint: 2.0,
        }
    }

    pub fn with_domain_hint(mut self, growth: f64) -> Self {
        assert!(growth > 1.0, "bracket growth factor must exceed 1");
        self.domain_hint = growth;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> FlagSet {
        self.flags
    }

    pub fn has(&self, flag: MapFlag) -> bool {
        self.flags.contains(flag)
    }

    pub fn domain_hint(&self) -> f64 {
        self.domain_hint
    }

    /// Exponent when this is a power map.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.kind {
            Kind::Power(q) => Some(q),
            _ => None,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Power(q) => {
                if *q == 1.0 {
                    t
                } else if *q == 2.0 {
                    t * t
                } else {
                    t.powf(*q)
                }
            }
            Kind::ExpMinusOne => t.exp_m1(),
            Kind::Log1p => t.ln_1p(),
            Kind::Custom { eval, .. } => eval(t),
        }
    }

    /// `f^{-1}(y)`, closed form when known and numeric otherwise.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        match &self.kind {
            Kind::Power(q) => Ok(if *q == 1.0 {
                y
            } else if *q == 2.0 {
                y.sqrt()
            } else {
                y.powf(1.0 / q)
            }),
            Kind::ExpMinusOne => Ok(y.ln_1p()),
            Kind::Log1p => Ok(y.exp_m1()),
            Kind::Custom {
                inverse: Some(inv), ..
            } => Ok(inv(y)),
            Kind::Custom { inverse: None, .. } => invert_numeric(self, y),
        }
    }

    pub fn has_closed_form_inverse(&self) -> bool {
        !matches!(self.kind, Kind::Custom { inverse: None, .. })
    }

    /// Error unless every listed flag is declared.
    pub fn require(&self, flags: &[MapFlag]) -> Result<()> {
        let missing: Vec<&str> = flags.iter().filter(|f| !self.has(**f)).map(|f| f.name()).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Hypothesis {
                map: self.name.clone(),
                missing: missing.join(", "),
            })
        }
    }
}

fn parse_exponent(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| Error::UnknownMap(format!("power:{s}")))?;
        let den: f64 = den.trim().parse().map_err(|_| Error::UnknownMap(format!("power:{s}")))?;
        return Ok(num / den);
    }
    s.parse().map_err(|_| Error::UnknownMap(format!("power:{s}")))
}

fn format_exponent(q: f64) -> String {
    if q == q.trunc() && q.abs() < 1e15 {
        format!("{}", q as i64)
    } else {
        format!("{q}")
    }
}

/// Maximum bisection steps in [`invert_numeric`].
pub const MAX_BISECTION: usize = 200;

/// Solve `f(t) = y` for increasing `f` by bracket growth from `[0, 1]`, then
/// bisection down to the floating-point resolution of the bracket.
pub fn invert_numeric(m: &ScalarMap, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::InvalidParameter(format!("cannot invert at negative value {y}")));
    }
    if (m.eval(0.0) - y).abs() <= 1e-12 * y.max(1.0) {
        return Ok(0.0);
    }
    let growth = m.domain_hint();
    let limit = 2f64.powi(64);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while m.eval(hi) < y {
        lo = hi;
        hi *= growth;
        if hi > limit {
            return Err(Error::Bracket { y });
        }
    }
    let mut best = hi;
    let mut best_err = (m.eval(hi) - y).abs();
    for _ in 0..MAX_BISECTION {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = m.eval(mid);
        let err = (fm - y).abs();
        if err < best_err {
            best = mid;
            best_err = err;
        }
        if err == 0.0 {
            return Ok(mid);
        }
        if fm < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Outcome of testing one declared (or implied) property.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlagCheck {
    pub property: String,
    /// Largest violation of the defining inequality, relative to the magnitude of its terms.
    pub worst_violation: f64,
    pub worst_pair: (f64, f64),
    pub samples_used: usize,
    /// Pairs skipped because some term overflowed.
    pub samples_skipped: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlagReport {
    pub map: String,
    pub checks: Vec<FlagCheck>,
}

impl FlagReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, property: &str) -> Option<&FlagCheck> {
        self.checks.iter().find(|c| c.property == property)
    }
}

/// Relative violation threshold for [`certify_flags`].
pub const CERTIFY_TOL: f64 = 1e-9;
const SAMPLE_LO: f64 = 1e-3;
const SAMPLE_HI: f64 = 1e3;

/// Test each declared property (plus super/subadditivity implied by
/// convexity/concavity) on `samples` log-uniform pairs in `[1e-3, 1e3]`.
pub fn certify_flags(m: &ScalarMap, samples: usize, seed: u64) -> FlagReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ln_lo, ln_hi) = (SAMPLE_LO.ln(), SAMPLE_HI.ln());
    let pairs: Vec<(f64, f64)> = (0..samples.max(1))
        .map(|_| {
            (
                rng.random_range(ln_lo..ln_hi).exp(),
                rng.random_range(ln_lo..ln_hi).exp(),
            )
        })
        .collect();
    let f = |t: f64| m.eval(t);

    let mut checks = Vec::new();
    for flag in m.flags().iter() {
        let check = match flag {
            MapFlag::ZeroAtZero => {
                let v = f(0.0).abs();
                FlagCheck {
                    property: flag.name().into(),
                    worst_violation: v,
                    worst_pair: (0.0, 0.0),
                    samples_used: 1,
                    samples_skipped: 0,
                    pass: v <= CERTIFY_TOL,
                }
            }
            MapFlag::Increasing => run_pairs(flag.name(), &pairs, |a, b| {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let (flo, fhi) = (f(lo), f(hi));
                (flo - fhi, [flo, fhi])
            }),
            MapFlag::Convex => run_pairs(flag.name(), &pairs, |a, b| {
                let mid = f(0.5 * (a + b));
                let avg = 0.5 * (f(a) + f(b));
                (mid - avg, [mid, avg])
            }),
            MapFlag::Concave => run_pairs(flag.name(), &pairs, |a, b| {
                let mid = f(0.5 * (a + b));
                let avg = 0.5 * (f(a) + f(b));
                (avg - mid, [mid, avg])
            }),
            MapFlag::GeometricallyConvex => run_pairs(flag.name(), &pairs, |a, b| {
                let lhs = f((a * b).sqrt());
                let rhs = (f(a) * f(b)).sqrt();
                (lhs - rhs, [lhs, rhs])
            }),
            MapFlag::Multiplicative => run_pairs(flag.name(), &pairs, |a, b| {
                let lhs = f(a * b);
                let rhs = f(a) * f(b);
                ((lhs - rhs).abs(), [lhs, rhs])
            }),
            MapFlag::Supermultiplicative => run_pairs(flag.name(), &pairs, |a, b| {
                let lhs = f(a) * f(b);
                let rhs = f(a * b);
                (lhs - rhs, [lhs, rhs])
            }),
        };
        checks.push(check);
    }
    if m.has(MapFlag::Convex) && m.has(MapFlag::ZeroAtZero) {
        checks.push(run_pairs("superadditive", &pairs, |a, b| {
            let lhs = f(a) + f(b);
            let rhs = f(a + b);
            (lhs - rhs, [lhs, rhs])
        }));
    }
    if m.has(MapFlag::Concave) {
        checks.push(run_pairs("subadditive", &pairs, |a, b| {
            let lhs = f(a + b);
            let rhs = f(a) + f(b);
            (lhs - rhs, [lhs, rhs])
        }));
    }
    FlagReport {
        map: m.name().to_string(),
        checks,
    }
}

fn run_pairs(property: &str, pairs: &[(f64, f64)], test: impl Fn(f64, f64) -> (f64, [f64; 2])) -> FlagCheck {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_pair = (0.0, 0.0);
    let mut used = 0;
    let mut skipped = 0;
    for &(a, b) in pairs {
        let (violation, terms) = test(a, b);
        if !violation.is_finite() || !terms.iter().all(|t| t.is_finite()) {
            skipped += 1;
            continue;
        }
        used += 1;
        let scale = terms.iter().fold(1.0f64, |acc, t| acc.max(t.abs()));
        let rel = violation / scale;
        if rel > worst {
            worst = rel;
            worst_pair = (a, b);
        }
    }
    let worst = worst.max(0.0);
    FlagCheck {
        property: property.into(),
        worst_violation: worst,
        worst_pair,
        samples_used: used,
        samples_skipped: skipped,
        pass: used > 0 && worst <= CERTIFY_TOL,
    }
}
