//! The skew product `T(x, y) = (x + α, x + y)` on the two-torus.
//!
//! Coordinates are stored as fixed-point fractions of `2^64`, so every mod-1
//! reduction is an exact wrapping operation. The only rounding happens when
//! converting from and to `f64`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const UNIT: f64 = 18_446_744_073_709_551_616.0;

/// Absolute error charged per reduction when comparing against tolerances.
pub const ERROR_BUDGET_PER_STEP: f64 = 1e-9;

/// Golden mean fractional part, the default rotation.
pub const GOLDEN_ALPHA: f64 = 0.618_033_988_749_894_9;

const IRRATIONALITY_DENOMINATOR: u64 = 1_000_000;

/// A point of `R/Z` as `raw / 2^64`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Circle(u64);

#[allow(clippy::should_implement_trait)]
impl Circle {
    pub const ZERO: Circle = Circle(0);

    pub fn from_f64(v: f64) -> Self {
        let frac = v - v.floor();
        let scaled = (frac * UNIT).round();
        if scaled >= UNIT || !scaled.is_finite() {
            Circle(0)
        } else {
            Circle(scaled as u64)
        }
    }

    pub const fn from_raw(raw: u64) -> Self {
        Circle(raw)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        let v = self.0 as f64 / UNIT;
        if v >= 1.0 {
            0.0
        } else {
            v
        }
    }

    /// Circle distance in units of `2^-64`.
    #[inline]
    pub fn dist_raw(self, other: Circle) -> u64 {
        let d = self.0.wrapping_sub(other.0);
        d.min(d.wrapping_neg())
    }

    #[inline]
    pub fn dist(self, other: Circle) -> f64 {
        self.dist_raw(other) as f64 / UNIT
    }

    #[inline]
    pub fn add(self, other: Circle) -> Circle {
        Circle(self.0.wrapping_add(other.0))
    }

    #[inline]
    pub fn sub(self, other: Circle) -> Circle {
        Circle(self.0.wrapping_sub(other.0))
    }

    /// `n · self mod 1`, exact.
    #[inline]
    pub fn times(self, n: u64) -> Circle {
        Circle(self.0.wrapping_mul(n))
    }

    #[inline]
    pub fn times_signed(self, n: i64) -> Circle {
        Circle(self.0.wrapping_mul(n as u64))
    }
}

impl fmt::Display for Circle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_f64().fmt(f)
    }
}

impl Serialize for Circle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Circle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Circle::from_f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x: Circle,
    pub y: Circle,
}

impl TorusPoint {
    pub fn new(x: f64, y: f64) -> Self {
        TorusPoint {
            x: Circle::from_f64(x),
            y: Circle::from_f64(y),
        }
    }

    /// Max of the two circle distances.
    #[inline]
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        self.x.dist(other.x).max(self.y.dist(other.y))
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewSystem {
    alpha: Circle,
    alpha_f64: f64,
}

impl SkewSystem {
    /// Rejects `α` outside `(0, 1)` or within rounding of `p/q`, `q <= 10^6`.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidSystem(format!("alpha must lie in (0,1), got {alpha}")));
        }
        let a = Circle::from_f64(alpha);
        let slack = 1u64 << 11;
        for q in 1..=IRRATIONALITY_DENOMINATOR {
            if a.times(q).dist_raw(Circle::ZERO) <= q * slack {
                return Err(Error::InvalidSystem(format!(
                    "alpha {alpha} is numerically rational with denominator {q}"
                )));
            }
        }
        Ok(SkewSystem { alpha: a, alpha_f64: alpha })
    }

    pub fn golden() -> Self {
        SkewSystem::new(GOLDEN_ALPHA).expect("golden mean is irrational")
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_f64
    }

    pub fn alpha_circle(&self) -> Circle {
        self.alpha
    }

    pub fn step(&self, p: TorusPoint) -> TorusPoint {
        TorusPoint {
            x: p.x.add(self.alpha),
            y: p.x.add(p.y),
        }
    }

    /// `T^{-1}(x, y) = (x − α, y − x + α)`.
    pub fn inverse_step(&self, p: TorusPoint) -> TorusPoint {
        TorusPoint {
            x: p.x.sub(self.alpha),
            y: p.y.sub(p.x).add(self.alpha),
        }
    }

    /// `T^n(x, y) = (x + nα, nx + y + n(n−1)/2 α)` for any integer `n`.
    pub fn power_signed(&self, n: i64, p: TorusPoint) -> TorusPoint {
        let tri = (n as i128 * (n as i128 - 1) / 2) as u64;
        TorusPoint {
            x: p.x.add(self.alpha.times_signed(n)),
            y: p.x.times_signed(n).add(p.y).add(self.alpha.times(tri)),
        }
    }

    pub fn power(&self, n: u64, p: TorusPoint) -> TorusPoint {
        let tri = ((n as u128 * (n as u128).wrapping_sub(1)) / 2) as u64;
        let tri = if n == 0 { 0 } else { tri };
        TorusPoint {
            x: p.x.add(self.alpha.times(n)),
            y: p.x.times(n).add(p.y).add(self.alpha.times(tri)),
        }
    }

    /// `(n + 1)α/2 mod 1`, the half taken on the double cover so that it is exact.
    fn half_multiple(&self, m: u64) -> Circle {
        let twice = self.alpha.0 as u128 * m as u128;
        Circle(((twice % (1u128 << 65)) >> 1) as u64)
    }

    /// `x_n = x + (y − x)/n − (n − 1)α/2 mod 1`, with `y − x` read in `[0, 1)`.
    pub fn seed_for_target(&self, x: Circle, y: Circle, n: u64) -> Result<Circle> {
        if n == 0 {
            return Err(Error::InvalidArgument("seed_for_target needs n >= 1".into()));
        }
        let delta = y.sub(x).raw() / n;
        Ok(x.add(Circle(delta)).sub(self.half_multiple(n - 1)))
    }

    /// Scans `n ∈ [2, horizon]` for `nx ≈ x` and `(n + 1)α/2 ≈ 0`.
    pub fn search_identity_times(&self, x: Circle, horizon: u64, tol: f64) -> Result<TimeSearchResult> {
        if horizon < 2 {
            return Err(Error::InvalidArgument(format!("horizon must be >= 2, got {horizon}")));
        }
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let tol_raw = if tol >= 0.5 { u64::MAX } else { (tol * UNIT) as u64 };
        const CHUNK: u64 = 1 << 16;
        let chunks: Vec<(u64, u64)> = (0..)
            .map(|i| 2 + i * CHUNK)
            .take_while(|&lo| lo <= horizon)
            .map(|lo| (lo, (lo + CHUNK - 1).min(horizon)))
            .collect();
        let step_alpha = self.alpha.0 as u128;
        let parts: Vec<(Vec<TimeHit>, TimeHit)> = chunks
            .par_iter()
            .map(|&(lo, hi)| {
                let mut nx = x.times(lo - 1);
                let mut acc = (self.alpha.0 as u128 * (lo + 1) as u128) % (1u128 << 65);
                let mut hits = Vec::new();
                let mut best = TimeHit { n: lo, score_raw: u64::MAX };
                for n in lo..=hi {
                    let s1 = nx.dist_raw(Circle::ZERO);
                    let s2 = Circle((acc >> 1) as u64).dist_raw(Circle::ZERO);
                    let score = s1.max(s2);
                    if score < best.score_raw {
                        best = TimeHit { n, score_raw: score };
                    }
                    if score <= tol_raw {
                        hits.push(TimeHit { n, score_raw: score });
                    }
                    nx = nx.add(x);
                    acc += step_alpha;
                    if acc >= 1u128 << 65 {
                        acc -= 1u128 << 65;
                    }
                }
                (hits, best)
            })
            .collect();
        let mut hits = Vec::new();
        let mut best = TimeHit { n: 2, score_raw: u64::MAX };
        for (h, b) in parts {
            hits.extend(h);
            if b.score_raw < best.score_raw {
                best = b;
            }
        }
        Ok(TimeSearchResult {
            x,
            horizon,
            tolerance: tol,
            found: !hits.is_empty(),
            hits,
            best,
        })
    }

    /// Per-target best approach of `T^n(x_n, 0)` to `(x, y)` over the searched times.
    pub fn verify_density(&self, targets: &[TorusPoint], horizon: u64, tol: f64) -> Result<DensityReport> {
        let approaches = targets
            .par_iter()
            .map(|t| {
                let search = self.search_identity_times(t.x, horizon, tol)?;
                let mut best: Option<(u64, f64)> = None;
                for hit in &search.hits {
                    let seed = self.seed_for_target(t.x, t.y, hit.n)?;
                    let image = self.power(hit.n, TorusPoint { x: seed, y: Circle::ZERO });
                    let d = image.distance(t);
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((hit.n, d));
                    }
                }
                Ok(TargetApproach {
                    target: *t,
                    found: search.found,
                    hits: search.hits.len(),
                    best_time: best.map(|b| b.0),
                    approach: best.map(|b| b.1),
                    best_search: search.best,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DensityReport {
            horizon,
            search_tolerance: tol,
            error_budget: ERROR_BUDGET_PER_STEP * 4.0,
            targets: approaches,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimeHit {
    pub n: u64,
    pub score_raw: u64,
}

impl TimeHit {
    pub fn score(&self) -> f64 {
        self.score_raw as f64 / UNIT
    }
}

impl Serialize for TimeHit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TimeHit", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("score", &self.score())?;
        st.end()
    }
}

/// Every time within tolerance, sorted by `n`, plus the overall best time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSearchResult {
    pub x: Circle,
    pub horizon: u64,
    pub tolerance: f64,
    pub found: bool,
    pub hits: Vec<TimeHit>,
    pub best: TimeHit,
}

impl TimeSearchResult {
    pub fn times(&self) -> Vec<u64> {
        self.hits.iter().map(|h| h.n).collect()
    }

    /// Hits whose score does not exceed any earlier score: the certificate
    /// subsequence along which the scores are nonincreasing.
    pub fn records(&self) -> Vec<TimeHit> {
        let mut out: Vec<TimeHit> = Vec::new();
        for h in &self.hits {
            if out.last().is_none_or(|l| h.score_raw <= l.score_raw) {
                out.push(*h);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetApproach {
    pub target: TorusPoint,
    pub found: bool,
    pub hits: usize,
    pub best_time: Option<u64>,
    pub approach: Option<f64>,
    pub best_search: TimeHit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub horizon: u64,
    pub search_tolerance: f64,
    pub error_budget: f64,
    pub targets: Vec<TargetApproach>,
}

impl DensityReport {
    /// Every target found and approached within `threshold` plus the budget.
    pub fn all_within(&self, threshold: f64) -> bool {
        self.targets
            .iter()
            .all(|t| t.approach.is_some_and(|d| d <= threshold + self.error_budget))
    }

    pub fn worst_approach(&self) -> Option<f64> {
        self.targets
            .iter()
            .map(|t| t.approach.unwrap_or(f64::INFINITY))
            .fold(None, |m, d| Some(m.map_or(d, |m: f64| m.max(d))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_examples() {
        let s = SkewSystem::golden();
        let p = s.step(TorusPoint::new(0.0, 0.0));
        assert!((p.x.to_f64() - GOLDEN_ALPHA).abs() < 1e-15);
        assert_eq!(p.y, Circle::ZERO);
        let q = s.step(TorusPoint::new(0.9, 0.8));
        assert!(q.x.to_f64() < 1.0 && q.y.to_f64() < 1.0);
        assert!((q.y.to_f64() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn power_matches_iteration_bitwise() {
        let s = SkewSystem::golden();
        let mut p = TorusPoint::new(0.3, 0.77);
        let start = p;
        for n in 1..=2000u64 {
            p = s.step(p);
            assert_eq!(s.power(n, start), p);
            assert_eq!(s.power_signed(n as i64, start), p);
        }
        assert_eq!(s.power(0, start), start);
        assert_eq!(s.power_signed(-5, s.power(5, start)), start);
    }

    #[test]
    fn inverse_undoes_step() {
        let s = SkewSystem::golden();
        let p = TorusPoint::new(0.123, 0.987);
        assert_eq!(s.inverse_step(s.step(p)), p);
    }

    #[test]
    fn rejects_rational_alpha() {
        assert!(SkewSystem::new(0.5).is_err());
        assert!(SkewSystem::new(16.0 / 113.0).is_err());
        assert!(SkewSystem::new(0.0).is_err());
        assert!(SkewSystem::new(1.0).is_err());
    }

    #[test]
    fn seed_examples() {
        let s = SkewSystem::golden();
        let x = Circle::from_f64(0.3);
        assert_eq!(s.seed_for_target(x, x, 1).unwrap(), x);
        assert!(s.seed_for_target(x, x, 0).is_err());
    }

    #[test]
    fn loose_tolerance_returns_every_time() {
        let s = SkewSystem::golden();
        let r = s.search_identity_times(Circle::from_f64(0.37), 50, 0.5).unwrap();
        assert_eq!(r.times(), (2..=50).collect::<Vec<_>>());
    }

    #[test]
    fn search_matches_naive_scan() {
        let s = SkewSystem::golden();
        let x = Circle::from_f64(0.25);
        let r = s.search_identity_times(x, 200_000, 0.01).unwrap();
        // Oracle: direct per-n evaluation in f64.
        let expected: Vec<u64> = (2..=200_000u64)
            .filter(|&n| {
                let a = ((n - 1) as f64 * 0.25).fract();
                let b = ((n + 1) as f64 * GOLDEN_ALPHA / 2.0).fract();
                let c = |v: f64| v.min(1.0 - v);
                c(a).max(c(b)) <= 0.01 - 1e-9
            })
            .collect();
        let got = r.times();
        for n in &expected {
            assert!(got.contains(n), "missing {n}");
        }
        assert!(got.len() <= expected.len() + 2);
    }
}
