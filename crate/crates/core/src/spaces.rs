//! Points, systems and metrics for the two concrete flows.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{Base, Substitution};
use crate::torus::{Circle, SkewSystem, TorusPoint};

/// Radius up to which symbolic points are compared letter by letter.
pub const COMPARISON_HORIZON: u32 = 1 << 14;

/// A concrete flow with its metric.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemSpec {
    Subshift(Substitution),
    TorusSkew(SkewSystem),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    SubstitutionSubshift,
    TorusSkew,
}

impl SystemSpec {
    pub fn morse_square() -> Self {
        SystemSpec::Subshift(Substitution::morse_square())
    }

    pub fn furstenberg(alpha: f64) -> Result<Self> {
        Ok(SystemSpec::TorusSkew(SkewSystem::new(alpha)?))
    }

    pub fn golden_furstenberg() -> Self {
        SystemSpec::TorusSkew(SkewSystem::golden())
    }

    pub fn kind(&self) -> SystemKind {
        match self {
            SystemSpec::Subshift(_) => SystemKind::SubstitutionSubshift,
            SystemSpec::TorusSkew(_) => SystemKind::TorusSkew,
        }
    }

    pub fn subshift(&self) -> Option<&Substitution> {
        match self {
            SystemSpec::Subshift(s) => Some(s),
            SystemSpec::TorusSkew(_) => None,
        }
    }

    pub fn torus(&self) -> Option<&SkewSystem> {
        match self {
            SystemSpec::TorusSkew(s) => Some(s),
            SystemSpec::Subshift(_) => None,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        matches!(
            (self, p),
            (SystemSpec::Subshift(_), Point::Symbolic(_)) | (SystemSpec::TorusSkew(_), Point::Torus(_))
        )
    }

    pub(crate) fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::DomainMismatch(format!(
                "{} point does not belong to a {:?} system",
                p.kind_name(),
                self.kind()
            )))
        }
    }

    pub fn point_distance(&self, x: &Point, y: &Point) -> Result<MetricValue> {
        self.check(x)?;
        self.check(y)?;
        Ok(MetricValue(self.dist(x, y)))
    }

    /// Distance without membership checks; mismatched points are at distance 1.
    #[inline]
    pub(crate) fn dist(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (SystemSpec::Subshift(s), Point::Symbolic(p), Point::Symbolic(q)) => s.distance(p, q),
            (SystemSpec::TorusSkew(_), Point::Torus(p), Point::Torus(q)) => p.distance(q),
            _ => 1.0,
        }
    }

    /// `σ^n p` or `T^n p`.
    pub fn act(&self, p: &Point, n: i64) -> Point {
        match (self, p) {
            (SystemSpec::TorusSkew(t), Point::Torus(q)) => Point::Torus(t.power_signed(n, *q)),
            (_, Point::Symbolic(q)) => Point::Symbolic(q.shifted(n)),
            (SystemSpec::Subshift(_), Point::Torus(q)) => Point::Torus(*q),
        }
    }

    /// Greedy net in input order: a point is kept iff it is farther than
    /// `eps / 2` from every point kept before it.
    pub fn epsilon_net_prune(&self, points: &[Point], eps: f64) -> Result<Vec<Point>> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        for p in points {
            self.check(p)?;
        }
        let kept = match self {
            SystemSpec::Subshift(s) => prune_symbolic(s, points, eps),
            SystemSpec::TorusSkew(_) => prune_torus(points, eps),
        };
        Ok(kept.unwrap_or_else(|| prune_brute(self, points, eps)))
    }
}

pub(crate) fn prune_brute(sys: &SystemSpec, points: &[Point], eps: f64) -> Vec<Point> {
    let half = eps / 2.0;
    let mut kept: Vec<Point> = Vec::new();
    for p in points {
        if kept.iter().all(|k| sys.dist(k, p) > half) {
            kept.push(p.clone());
        }
    }
    kept
}

/// Smallest `m` with `2^-m <= r`.
pub(crate) fn dyadic_radius(r: f64) -> u32 {
    let mut m = 0u32;
    while (-(m as f64)).exp2() > r {
        m += 1;
    }
    m
}

/// `d <= 2^-m` holds iff the letters at `|k| < m` agree, so for `m <= 32` the
/// central word of radius `m - 1` (plus index `m - 1`) is a complete key.
pub(crate) fn symbolic_key(s: &Substitution, p: &SymbolicPoint, m: u32) -> Option<u64> {
    if m == 0 {
        return Some(0);
    }
    let r = m as i64 - 1;
    s.bits(p, -r, (2 * r + 1) as usize).map(|b| b.extract(0, (2 * r + 1) as usize))
}

fn prune_symbolic(s: &Substitution, points: &[Point], eps: f64) -> Option<Vec<Point>> {
    let m = dyadic_radius(eps / 2.0);
    if m > 32 {
        return None;
    }
    let mut keys = Vec::with_capacity(points.len());
    for p in points {
        match p {
            Point::Symbolic(q) => keys.push(symbolic_key(s, q, m)?),
            Point::Torus(_) => return None,
        }
    }
    let mut seen = std::collections::HashSet::new();
    Some(
        points
            .iter()
            .zip(keys)
            .filter(|(_, k)| seen.insert(*k))
            .map(|(p, _)| p.clone())
            .collect(),
    )
}

fn prune_torus(points: &[Point], eps: f64) -> Option<Vec<Point>> {
    let half = eps / 2.0;
    let cells = (1.0 / half).floor();
    if cells < 3.0 {
        return None;
    }
    let cells = cells as u64;
    let cell_of = |c: Circle| ((c.raw() as u128 * cells as u128) >> 64) as u64;
    let mut grid: HashMap<(u64, u64), Vec<TorusPoint>> = HashMap::new();
    let mut kept = Vec::new();
    for p in points {
        let Point::Torus(t) = p else { return None };
        let (cx, cy) = (cell_of(t.x), cell_of(t.y));
        let near = (0..3).any(|i| {
            (0..3).any(|j| {
                let key = ((cx + cells + i - 1) % cells, (cy + cells + j - 1) % cells);
                grid.get(&key).is_some_and(|v| v.iter().any(|q| q.distance(t) <= half))
            })
        });
        if !near {
            grid.entry((cx, cy)).or_default().push(*t);
            kept.push(p.clone());
        }
    }
    Some(kept)
}

/// A nonnegative distance value.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetricValue(pub f64);

impl MetricValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for MetricValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// How the letters of a symbolic point are produced.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Seed {
    /// The two-sided fixed point extending a seed pair; complements are the
    /// complementary seed pairs.
    Orbit(Base),
    /// Explicit letters at indices `-r .. r`, unknown elsewhere.
    Word(Arc<[u8]>),
}

/// A point of the subshift: the seed sequence read from index `shift` on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolicPoint {
    seed: Seed,
    shift: i64,
}

impl SymbolicPoint {
    /// `σ^shift` of a distinguished fixed point.
    pub fn orbit(base: Base, shift: i64) -> Self {
        SymbolicPoint {
            seed: Seed::Orbit(base),
            shift,
        }
    }

    /// A centered word of even length, letters at `-len/2 .. len/2`.
    pub fn from_window(word: &[u8]) -> Result<Self> {
        if word.is_empty() || !word.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "explicit window must have positive even length, got {}",
                word.len()
            )));
        }
        if word.iter().any(|&l| l > 1) {
            return Err(Error::InvalidArgument("explicit window letters must be 0 or 1".into()));
        }
        Ok(SymbolicPoint {
            seed: Seed::Word(word.into()),
            shift: 0,
        })
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn base(&self) -> Option<Base> {
        match self.seed {
            Seed::Orbit(b) => Some(b),
            Seed::Word(_) => None,
        }
    }

    pub fn shifted(&self, n: i64) -> Self {
        SymbolicPoint {
            seed: self.seed.clone(),
            shift: self.shift + n,
        }
    }

    pub fn complement(&self) -> Self {
        let seed = match &self.seed {
            Seed::Orbit(b) => Seed::Orbit(b.complement()),
            Seed::Word(w) => Seed::Word(w.iter().map(|l| l ^ 1).collect()),
        };
        SymbolicPoint {
            seed,
            shift: self.shift,
        }
    }

    fn tag(&self) -> (u8, u8) {
        match &self.seed {
            Seed::Orbit(b) => (0, b.index() as u8),
            Seed::Word(_) => (1, 0),
        }
    }
}

impl Ord for SymbolicPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.tag()
            .cmp(&other.tag())
            .then(self.shift.cmp(&other.shift))
            .then_with(|| match (&self.seed, &other.seed) {
                (Seed::Word(a), Seed::Word(b)) => a.len().cmp(&b.len()).then_with(|| a.cmp(b)),
                _ => Ordering::Equal,
            })
    }
}

impl PartialOrd for SymbolicPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SymbolicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.seed {
            Seed::Orbit(b) if self.shift == 0 => write!(f, "{b}"),
            Seed::Orbit(b) => write!(f, "σ^{} {b}", self.shift),
            Seed::Word(w) => {
                let len = w.len();
                if self.shift != 0 {
                    write!(f, "σ^{} ", self.shift)?;
                }
                write!(f, "[{len}-letter window]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Symbolic(SymbolicPoint),
    Torus(TorusPoint),
}

impl Point {
    pub fn orbit(base: Base, shift: i64) -> Self {
        Point::Symbolic(SymbolicPoint::orbit(base, shift))
    }

    pub fn torus(x: f64, y: f64) -> Self {
        Point::Torus(TorusPoint::new(x, y))
    }

    pub fn as_symbolic(&self) -> Option<&SymbolicPoint> {
        match self {
            Point::Symbolic(p) => Some(p),
            Point::Torus(_) => None,
        }
    }

    pub fn as_torus(&self) -> Option<&TorusPoint> {
        match self {
            Point::Torus(p) => Some(p),
            Point::Symbolic(_) => None,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Point::Symbolic(_) => "symbolic",
            Point::Torus(_) => "torus",
        }
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = ser.serialize_map(Some(2))?;
        match self {
            Point::Symbolic(p) => {
                match p.seed() {
                    Seed::Orbit(b) => m.serialize_entry("base", b.name())?,
                    Seed::Word(w) => {
                        let word: String = w.iter().map(|&l| (b'0' + l) as char).collect();
                        m.serialize_entry("window", &word)?
                    }
                }
                m.serialize_entry("shift", &p.shift())?;
            }
            Point::Torus(t) => {
                m.serialize_entry("x", &t.x)?;
                m.serialize_entry("y", &t.y)?;
            }
        }
        m.end()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Symbolic(p) => p.fmt(f),
            Point::Torus(p) => p.fmt(f),
        }
    }
}
