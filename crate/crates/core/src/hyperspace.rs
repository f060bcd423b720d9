//! Finite-resolution model of the hyperspace of closed sets.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spaces::{Point, SymbolicPoint, SystemSpec};
use crate::symbolic::{Base, Substitution};

const PARALLEL_PAIRS: usize = 1 << 14;

/// A nonempty finite point list standing in for a closed set at `resolution`.
#[derive(Clone, Debug)]
pub struct FiniteClosedSet {
    system: Arc<SystemSpec>,
    points: Vec<Point>,
    resolution: f64,
}

impl PartialEq for FiniteClosedSet {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && *self.system == *other.system
    }
}

impl FiniteClosedSet {
    /// Sorts, drops points at distance zero from an earlier one, and checks membership.
    pub fn new(system: Arc<SystemSpec>, mut points: Vec<Point>, resolution: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("closed sets must be nonempty".into()));
        }
        if resolution.is_nan() || resolution <= 0.0 {
            return Err(Error::InvalidArgument(format!("resolution must be positive, got {resolution}")));
        }
        for p in &points {
            system.check(p)?;
        }
        points.sort();
        points.dedup();
        if matches!(*system, SystemSpec::Subshift(_)) {
            let mut kept: Vec<Point> = Vec::with_capacity(points.len());
            for p in points {
                if kept.iter().all(|k| system.dist(k, &p) > 0.0) {
                    kept.push(p);
                }
            }
            points = kept;
        }
        Ok(FiniteClosedSet {
            system,
            points,
            resolution,
        })
    }

    /// `{σ^k base}` for the given pairs.
    pub fn from_orbit_points(system: Arc<SystemSpec>, pts: &[(Base, i64)], resolution: f64) -> Result<Self> {
        let points = pts.iter().map(|&(b, k)| Point::orbit(b, k)).collect();
        Self::new(system, points, resolution)
    }

    /// `{σ^j p : |j| <= radius}`, the subshift stand-in for `X` when `p` is minimal.
    pub fn orbit_segment(system: Arc<SystemSpec>, p: &Point, radius: i64, resolution: f64) -> Result<Self> {
        let points = (-radius..=radius).map(|j| system.act(p, j)).collect();
        Self::new(system, points, resolution)
    }

    /// The `k × k` grid `{(i/k, j/k)}`, the torus stand-in for `X`.
    pub fn torus_grid(system: Arc<SystemSpec>, k: u32) -> Result<Self> {
        if system.torus().is_none() {
            return Err(Error::DomainMismatch("grid stand-ins live on the torus".into()));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("grid size must be positive".into()));
        }
        let f = k as f64;
        let points = (0..k)
            .flat_map(|i| (0..k).map(move |j| Point::torus(i as f64 / f, j as f64 / f)))
            .collect();
        Self::new(system, points, 1.0 / f)
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn system_arc(&self) -> Arc<SystemSpec> {
        self.system.clone()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = resolution;
        self
    }

    fn same_system(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.system, &other.system) || *self.system == *other.system {
            Ok(())
        } else {
            Err(Error::DomainMismatch("sets live in different systems".into()))
        }
    }

    pub fn hausdorff(&self, other: &Self) -> Result<f64> {
        self.same_system(other)?;
        Ok(hausdorff_points(&self.system, &self.points, &other.points))
    }

    /// Every point lies in some ball and every ball meets the set.
    pub fn vietoris_contains(&self, cover: &BallCover) -> Result<bool> {
        for (c, _) in cover.balls() {
            self.system.check(c)?;
        }
        let inside = |p: &Point, (c, r): &(Point, f64)| self.system.dist(p, c) < *r;
        let covered = self.points.iter().all(|p| cover.balls().iter().any(|b| inside(p, b)));
        let met = cover.balls().iter().all(|b| self.points.iter().any(|p| inside(p, b)));
        Ok(covered && met)
    }

    /// `tA = {ta : a ∈ A}`.
    pub fn induced_step(&self, t: i64) -> Self {
        let points = self.points.iter().map(|p| self.system.act(p, t)).collect();
        Self::new(self.system.clone(), points, self.resolution).expect("image of a valid set is valid")
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_system(other)?;
        let points = self.points.iter().chain(&other.points).cloned().collect();
        Self::new(self.system.clone(), points, self.resolution.min(other.resolution))
    }

    /// Greedy `eps`-net of the canonical point list.
    pub fn pruned(&self, eps: f64) -> Result<Self> {
        let points = self.system.epsilon_net_prune(&self.points, eps)?;
        Self::new(self.system.clone(), points, self.resolution.max(eps))
    }

    /// Every point of `self` within `r` of `other` (directed Hausdorff bound).
    pub fn within(&self, other: &Self, r: f64) -> Result<bool> {
        self.same_system(other)?;
        Ok(directed(&self.system, &self.points, &other.points) <= r)
    }
}

/// Letters at `0, 1, -1, 2, -2, …, 31, -31` packed so that the first
/// disagreement of two points is the lowest set bit of the xor of their keys.
pub(crate) fn interleaved_key(s: &Substitution, p: &SymbolicPoint) -> Option<u64> {
    let b = s.bits(p, -31, 63)?;
    let mut key = b.get(31) as u64;
    for m in 1..32usize {
        key |= (b.get(31 + m) as u64) << (2 * m - 1);
        key |= (b.get(31 - m) as u64) << (2 * m);
    }
    Some(key)
}

fn sketch<'a>(s: &Substitution, pts: &'a [Point]) -> Option<Vec<(u64, &'a SymbolicPoint)>> {
    pts.iter()
        .map(|p| {
            let q = p.as_symbolic()?;
            Some((interleaved_key(s, q)?, q))
        })
        .collect()
}

fn keyed_directed(s: &Substitution, from: &[Point], to: &[Point]) -> Option<f64> {
    let (kf, kt) = (sketch(s, from)?, sketch(s, to)?);
    let nearest = |&(ka, pa): &(u64, &SymbolicPoint)| {
        let mut best_m = 0u32;
        for &(kb, pb) in &kt {
            let x = ka ^ kb;
            if x == 0 {
                let d = s.distance(pa, pb);
                if d == 0.0 {
                    return 0.0;
                }
                best_m = best_m.max(-d.log2() as u32);
            } else {
                best_m = best_m.max(x.trailing_zeros().div_ceil(2));
            }
        }
        (-(best_m as f64)).exp2()
    };
    Some(if kf.len() * kt.len() >= PARALLEL_PAIRS {
        kf.par_iter().map(nearest).reduce(|| 0.0, f64::max)
    } else {
        kf.iter().map(nearest).fold(0.0, f64::max)
    })
}

impl serde::Serialize for FiniteClosedSet {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("FiniteClosedSet", 2)?;
        st.serialize_field("resolution", &self.resolution)?;
        st.serialize_field("points", &self.points)?;
        st.end()
    }
}

/// `sup_{a ∈ from} inf_{b ∈ to} d(a, b)`.
pub(crate) fn directed(sys: &SystemSpec, from: &[Point], to: &[Point]) -> f64 {
    if let SystemSpec::Subshift(s) = sys {
        if from.len() * to.len() >= 64 {
            if let Some(d) = keyed_directed(s, from, to) {
                return d;
            }
        }
    }
    directed_brute(sys, from, to)
}

pub(crate) fn directed_brute(sys: &SystemSpec, from: &[Point], to: &[Point]) -> f64 {
    let nearest = |a: &Point| {
        let mut best = f64::INFINITY;
        for b in to {
            let d = sys.dist(a, b);
            if d < best {
                best = d;
                if d == 0.0 {
                    break;
                }
            }
        }
        best
    };
    if from.len() * to.len() >= PARALLEL_PAIRS {
        from.par_iter().map(nearest).reduce(|| 0.0, f64::max)
    } else {
        from.iter().map(nearest).fold(0.0, f64::max)
    }
}

pub(crate) fn hausdorff_points(sys: &SystemSpec, a: &[Point], b: &[Point]) -> f64 {
    directed(sys, a, b).max(directed(sys, b, a))
}

/// Largest distance from a probe to the set: the set is `r`-dense in the probes iff this is `<= r`.
pub fn covering_radius(set: &FiniteClosedSet, probes: &[Point]) -> f64 {
    directed(set.system(), probes, set.points())
}

/// Metric balls standing in for the open sets of a Vietoris neighbourhood.
#[derive(Clone, Debug, PartialEq)]
pub struct BallCover {
    balls: Vec<(Point, f64)>,
}

impl BallCover {
    pub fn new(balls: Vec<(Point, f64)>) -> Result<Self> {
        if balls.is_empty() {
            return Err(Error::InvalidArgument("a ball cover needs at least one ball".into()));
        }
        if let Some((_, r)) = balls.iter().find(|(_, r)| (*r).is_nan() || *r <= 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {r}")));
        }
        Ok(BallCover { balls })
    }

    pub fn balls(&self) -> &[(Point, f64)] {
        &self.balls
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus() -> Arc<SystemSpec> {
        Arc::new(SystemSpec::golden_furstenberg())
    }

    fn morse() -> Arc<SystemSpec> {
        Arc::new(SystemSpec::morse_square())
    }

    fn tset(sys: &Arc<SystemSpec>, pts: &[(f64, f64)]) -> FiniteClosedSet {
        FiniteClosedSet::new(sys.clone(), pts.iter().map(|&(x, y)| Point::torus(x, y)).collect(), 0.01).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let sys = torus();
        let a = tset(&sys, &[(0.0, 0.0), (0.5, 0.0)]);
        assert_eq!(a.hausdorff(&a).unwrap(), 0.0);
        let p = tset(&sys, &[(0.0, 0.0)]);
        let q = tset(&sys, &[(0.5, 0.0)]);
        assert_eq!(p.hausdorff(&q).unwrap(), 0.5);
        let b = tset(&sys, &[(0.25, 0.0)]);
        assert_eq!(a.hausdorff(&b).unwrap(), 0.25);
        let m = FiniteClosedSet::from_orbit_points(morse(), &[(Base::A, 0)], 0.1).unwrap();
        assert!(matches!(m.hausdorff(&a), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn vietoris_examples() {
        let sys = morse();
        let a = Point::orbit(Base::A, 0);
        let b = Point::orbit(Base::B, 0);
        let set_a = FiniteClosedSet::new(sys.clone(), vec![a.clone()], 0.1).unwrap();
        let set_ab = FiniteClosedSet::new(sys.clone(), vec![a.clone(), b], 0.1).unwrap();
        let one = BallCover::new(vec![(a.clone(), 0.1)]).unwrap();
        assert!(set_a.vietoris_contains(&one).unwrap());
        assert!(!set_ab.vietoris_contains(&one).unwrap());
        let two = BallCover::new(vec![(a, 0.1), (Point::orbit(Base::ABar, 0), 0.1)]).unwrap();
        assert!(!set_a.vietoris_contains(&two).unwrap());
    }

    #[test]
    fn induced_step_and_union() {
        let sys = morse();
        let ab = FiniteClosedSet::from_orbit_points(sys.clone(), &[(Base::A, 0), (Base::B, 0)], 0.1).unwrap();
        assert_eq!(ab.induced_step(0), ab);
        let shifted = FiniteClosedSet::from_orbit_points(sys.clone(), &[(Base::A, 1), (Base::B, 1)], 0.1).unwrap();
        assert_eq!(ab.induced_step(1), shifted);
        assert_eq!(ab.induced_step(5).induced_step(-2), ab.induced_step(3));
        assert_eq!(ab.union(&ab).unwrap(), ab);
        let a = FiniteClosedSet::from_orbit_points(sys.clone(), &[(Base::A, 0)], 0.1).unwrap();
        let b = FiniteClosedSet::from_orbit_points(sys, &[(Base::B, 0)], 0.05).unwrap();
        let u = a.union(&b).unwrap();
        assert_eq!(u, ab);
        assert_eq!(u.resolution(), 0.05);
    }

    #[test]
    fn grid_step_stays_dense() {
        let sys = torus();
        let grid = FiniteClosedSet::torus_grid(sys.clone(), 40).unwrap();
        let probes = FiniteClosedSet::torus_grid(sys, 200).unwrap();
        let eps = covering_radius(&grid, probes.points());
        let stepped = grid.induced_step(1);
        assert!(covering_radius(&stepped, probes.points()) <= 2.0 * eps);
    }

    #[test]
    fn keyed_hausdorff_matches_brute_force() {
        let sys = morse();
        let s = sys.subshift().unwrap();
        let a: Vec<Point> = (0..30).map(|k| Point::orbit(Base::A, k * 37 - 500)).collect();
        let b: Vec<Point> = Base::ALL
            .iter()
            .flat_map(|&base| (0..8).map(move |k| Point::orbit(base, k * 5 - 20)))
            .chain([Point::orbit(Base::A, -463)])
            .collect();
        assert_eq!(keyed_directed(s, &a, &b).unwrap(), directed_brute(&sys, &a, &b));
        assert_eq!(keyed_directed(s, &b, &a).unwrap(), directed_brute(&sys, &b, &a));
        // Equal central words beyond the key radius fall back to exact comparison.
        let far = [Point::orbit(Base::A, 0), Point::orbit(Base::B, 40)];
        let near = [Point::orbit(Base::B, 0), Point::orbit(Base::A, 40)];
        assert_eq!(keyed_directed(s, &far, &near).unwrap(), directed_brute(&sys, &far, &near));
    }

    #[test]
    fn empty_sets_are_rejected() {
        assert!(FiniteClosedSet::new(morse(), vec![], 0.1).is_err());
    }
}
