//! Time nets, cluster sets, recurrence and proximality reports, orbit
//! closures in the hyperspace, and quasifactor checks.

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitBuf;
use crate::error::{Error, Result};
use crate::hyperspace::{hausdorff_points, FiniteClosedSet};
use crate::spaces::{dyadic_radius, symbolic_key, Point, Seed, SymbolicPoint, SystemSpec};
use crate::symbolic::{Base, IdempotentTable, OffOrbitPanel, Substitution};
use crate::torus::{Circle, SkewSystem, TorusPoint};

/// Largest window radius a net level can certify (two words of 64 bits).
pub const MAX_NET_RADIUS: u32 = 32;

const SCAN_CHUNK: i64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetKind {
    IdempotentApprox,
    IdentityApprox,
    Raw,
    Composed,
}

/// What a single time of a net is known to achieve.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Certificate {
    /// Agreement with the table image on the window of this radius.
    Window { radius: u32 },
    /// Largest constraint deviation of the torus identity search.
    Score { score: f64 },
    /// A group element, no approximation involved.
    Exact,
    Composed { outer: i64, inner: i64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetLevel {
    pub time: i64,
    pub certificate: Certificate,
}

/// Why an idempotent net stopped before its last requested radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Truncation {
    pub radius: u32,
    pub horizon: u64,
    pub best_time: i64,
    pub best_satisfied: usize,
    pub constraints: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeNet {
    pub kind: NetKind,
    pub label: String,
    pub levels: Vec<NetLevel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<IdempotentTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub panel: Option<OffOrbitPanel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
    #[serde(skip)]
    factors: Option<Box<(TimeNet, TimeNet)>>,
}

impl TimeNet {
    pub fn times(&self) -> Vec<i64> {
        self.levels.iter().map(|l| l.time).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// The constant net `{t}`.
    pub fn constant(t: i64) -> Self {
        TimeNet {
            kind: NetKind::Raw,
            label: format!("const({t})"),
            levels: vec![NetLevel {
                time: t,
                certificate: Certificate::Exact,
            }],
            table: None,
            panel: None,
            truncation: None,
            factors: None,
        }
    }

    /// The outer and inner factor of a composed net.
    pub fn factors(&self) -> Option<(&TimeNet, &TimeNet)> {
        self.factors.as_deref().map(|(p, q)| (p, q))
    }
}

/// Constraint words for one radius: the letters every candidate must reproduce.
struct NetTargets {
    radius: u32,
    bases: [u64; 4],
    panel: Vec<(i64, u64)>,
}

impl NetTargets {
    fn new(s: &Substitution, table: &IdempotentTable, panel: &[i64], radius: u32) -> Self {
        let w = radius as i64;
        let len = 2 * radius as usize;
        let word = |base: Base, at: i64| s.fill_seeded(base, at - w, len).extract(0, len);
        NetTargets {
            radius,
            bases: Base::ALL.map(|b| word(table.image(b), 0)),
            panel: panel.iter().map(|&n| (n, word(Base::A, n))).collect(),
        }
    }

    fn constraints(&self) -> usize {
        4 + self.panel.len()
    }
}

/// Letters of all four bases around a block of candidate times, with the
/// panel filled lazily.
struct ScanBlock<'a> {
    s: &'a Substitution,
    start: i64,
    radius: u32,
    bases: [BitBuf; 4],
}

impl<'a> ScanBlock<'a> {
    fn new(s: &'a Substitution, start: i64, len: usize, radius: u32) -> Self {
        let w = radius as i64;
        let bases = Base::ALL.map(|b| s.fill_seeded(b, start - w, len + 2 * radius as usize));
        ScanBlock {
            s,
            start,
            radius,
            bases,
        }
    }

    fn base_matches(&self, t: &NetTargets, i: usize) -> usize {
        let len = 2 * self.radius as usize;
        Base::ALL
            .iter()
            .filter(|b| self.bases[b.index()].extract(i, len) == t.bases[b.index()])
            .count()
    }

    fn panel_matches(&self, t: &NetTargets, n: i64) -> usize {
        let w = self.radius as i64;
        let len = 2 * self.radius as usize;
        t.panel
            .iter()
            .filter(|(shift, word)| self.s.fill_seeded(Base::A, shift + n - w, len).extract(0, len) == *word)
            .count()
    }
}

/// Smallest `|n|` in `[from, horizon]` satisfying every constraint, positive
/// first on ties, together with the best partial match seen.
fn scan_for_time(s: &Substitution, t: &NetTargets, from: u64, horizon: u64) -> (Option<i64>, (i64, usize)) {
    let mut best = (0i64, 0usize);
    let mut lo = from.max(1) as i64;
    let horizon = horizon as i64;
    while lo <= horizon {
        let len = SCAN_CHUNK.min(horizon - lo + 1) as usize;
        let pos = ScanBlock::new(s, lo, len, t.radius);
        let neg = ScanBlock::new(s, -lo - len as i64 + 1, len, t.radius);
        for i in 0..len {
            let m = lo + i as i64;
            for (block, n) in [(&pos, m), (&neg, -m)] {
                let idx = (n - block.start) as usize;
                let hit = block.base_matches(t, idx);
                let total = if hit == 4 { 4 + block.panel_matches(t, n) } else { hit };
                if total > best.1 {
                    best = (n, total);
                }
                if total == t.constraints() {
                    return (Some(n), best);
                }
            }
        }
        lo += len as i64;
    }
    (None, best)
}

/// Certified times approximating `table`: for each radius the smallest `|n|`
/// moving every base onto its image and every panel point onto itself.
pub fn timenet_for_idempotent(
    s: &Substitution,
    table: &IdempotentTable,
    radii: &[u32],
    horizon: u64,
    panel: &OffOrbitPanel,
) -> Result<TimeNet> {
    if let Some(&r) = radii.iter().find(|&&r| r == 0 || r > MAX_NET_RADIUS) {
        return Err(Error::InvalidArgument(format!(
            "net radii must lie in 1..={MAX_NET_RADIUS}, got {r}"
        )));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("net radii must be strictly increasing".into()));
    }
    let mut net = TimeNet {
        kind: NetKind::IdempotentApprox,
        label: table.name.clone(),
        levels: Vec::new(),
        table: Some(table.clone()),
        panel: Some(panel.clone()),
        truncation: None,
        factors: None,
    };
    let mut from = 1u64;
    for (i, &radius) in radii.iter().enumerate() {
        let targets = NetTargets::new(s, table, &panel.shifts, radius);
        match scan_for_time(s, &targets, from, horizon) {
            (Some(n), _) => {
                net.levels.push(NetLevel {
                    time: n,
                    certificate: Certificate::Window { radius },
                });
                from = n.unsigned_abs() + 1;
            }
            (None, (best_time, best_satisfied)) => {
                if i == 0 {
                    return Err(Error::EmptyNet {
                        radius,
                        horizon,
                        best_time,
                        best_satisfied,
                        constraints: targets.constraints(),
                    });
                }
                net.truncation = Some(Truncation {
                    radius,
                    horizon,
                    best_time,
                    best_satisfied,
                    constraints: targets.constraints(),
                });
                break;
            }
        }
    }
    Ok(net)
}


/// The four minimal idempotent nets on a common radius schedule.
pub fn idempotent_catalog(
    s: &Substitution,
    radii: &[u32],
    horizon: u64,
    panel: &OffOrbitPanel,
) -> Result<Vec<TimeNet>> {
    IdempotentTable::minimal()
        .iter()
        .map(|t| timenet_for_idempotent(s, t, radii, horizon, panel))
        .collect()
}

/// Identity-approximating times of the skew product at `x`: the record-breaking
/// hits of the time search, so that scores never increase along the net.
pub fn timenet_for_identity(sys: &SkewSystem, x: Circle, horizon: u64, tol: f64) -> Result<TimeNet> {
    let search = sys.search_identity_times(x, horizon, tol)?;
    if !search.found {
        return Err(Error::NoIdentityTimes {
            horizon,
            best_time: search.best.n,
            best_score: search.best.score(),
        });
    }
    Ok(TimeNet {
        kind: NetKind::IdentityApprox,
        label: format!("id@{x}"),
        levels: search
            .records()
            .iter()
            .map(|h| NetLevel {
                time: h.n as i64,
                certificate: Certificate::Score { score: h.score() },
            })
            .collect(),
        table: None,
        panel: None,
        truncation: None,
        factors: None,
    })
}

/// Levelwise product `p ∘ q`: level `i` moves by `q_i` and then by `p_i`.
pub fn compose_nets(p: &TimeNet, q: &TimeNet) -> Result<TimeNet> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::InvalidArgument("composed nets must be nonempty".into()));
    }
    let levels = p
        .levels
        .iter()
        .zip(&q.levels)
        .map(|(a, b)| NetLevel {
            time: a.time + b.time,
            certificate: Certificate::Composed {
                outer: a.time,
                inner: b.time,
            },
        })
        .collect();
    Ok(TimeNet {
        kind: NetKind::Composed,
        label: format!("{}∘{}", p.label, q.label),
        levels,
        table: None,
        panel: None,
        truncation: None,
        factors: Some(Box::new((p.clone(), q.clone()))),
    })
}

/// Replaces explicit windows that sit on a distinguished orbit by the seeded point.
fn normalize(s: &Substitution, p: &SymbolicPoint) -> SymbolicPoint {
    match p.seed() {
        Seed::Word(_) => match s.locate_on_orbit(p) {
            Some((base, k)) => SymbolicPoint::orbit(base, k),
            None => p.clone(),
        },
        Seed::Orbit(_) => p.clone(),
    }
}

/// Image of a point at one level of an idempotent net. A seeded point near
/// the seam is replaced by the distinguished point its image matches on
/// half the certified window, when that match is unique.
fn snap(s: &Substitution, p: &SymbolicPoint, n: i64, radius: u32) -> Result<SymbolicPoint> {
    let p = normalize(s, p);
    let image = p.shifted(n);
    let Some(_) = p.base() else {
        return Err(Error::InvalidArgument(
            "explicit off-orbit windows cannot be pushed along idempotent nets".into(),
        ));
    };
    let k = p.shift();
    let r = (radius / 2).max(1) as i64;
    if k.abs() > r {
        return Ok(image);
    }
    let len = 2 * r as usize;
    let seen = s.bits(&image, -r, len);
    let mut matches = Base::ALL
        .into_iter()
        .filter(|&b| s.bits(&SymbolicPoint::orbit(b, k), -r, len) == seen);
    match (matches.next(), matches.next()) {
        (Some(b), None) => Ok(SymbolicPoint::orbit(b, k)),
        _ => Ok(image),
    }
}

fn level_image(sys: &SystemSpec, net: &TimeNet, i: usize, p: &Point) -> Result<Point> {
    if let Some((outer, inner)) = net.factors() {
        let mid = level_image(sys, inner, i, p)?;
        return level_image(sys, outer, i, &mid);
    }
    let level = &net.levels[i];
    match (&level.certificate, sys, p) {
        (Certificate::Window { radius }, SystemSpec::Subshift(s), Point::Symbolic(q)) => {
            Ok(Point::Symbolic(snap(s, q, level.time, *radius)?))
        }
        (Certificate::Window { .. }, _, _) => Err(Error::DomainMismatch(
            "idempotent nets act on the substitution subshift".into(),
        )),
        _ => Ok(sys.act(p, level.time)),
    }
}

/// `D_p(A)` along a finite net: one pruned image per level, the last one
/// reported, with the Hausdorff distances between consecutive levels as the
/// stabilization witness.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterSet {
    #[serde(skip)]
    pub result: FiniteClosedSet,
    #[serde(skip)]
    pub input: FiniteClosedSet,
    pub net: TimeNet,
    pub eps: f64,
    pub partial_sizes: Vec<usize>,
    pub witness: Vec<f64>,
    pub converged: bool,
}

pub fn cluster_set(a: &FiniteClosedSet, net: &TimeNet, eps: f64) -> Result<ClusterSet> {
    if net.is_empty() {
        return Err(Error::InvalidArgument("cluster sets need a nonempty net".into()));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let sys = a.system();
    let mut partials: Vec<FiniteClosedSet> = Vec::with_capacity(net.levels.len());
    for i in 0..net.levels.len() {
        let images = a
            .points()
            .iter()
            .map(|p| level_image(sys, net, i, p))
            .collect::<Result<Vec<_>>>()?;
        let kept = sys.epsilon_net_prune(&images, eps)?;
        partials.push(FiniteClosedSet::new(a.system_arc(), kept, eps)?);
    }
    let witness = partials
        .windows(2)
        .map(|w| w[0].hausdorff(&w[1]))
        .collect::<Result<Vec<_>>>()?;
    let converged = match witness.last() {
        Some(&d) => d <= eps,
        None => matches!(net.levels[0].certificate, Certificate::Exact),
    };
    Ok(ClusterSet {
        partial_sizes: partials.iter().map(|p| p.len()).collect(),
        result: partials.pop().expect("nonempty net"),
        input: a.clone(),
        net: net.clone(),
        eps,
        witness,
        converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecurrenceVerdict {
    SyndeticAtHorizon,
    GapGrowth,
}

/// Returns of a set (or tuple) into its `eps`-neighbourhood up to the horizon.
///
/// Gaps are measured from `0` to the first return and between consecutive
/// returns; each belongs to the half of the horizon containing the return
/// that closes it. The time after the last return is a censored gap counted
/// in the second half.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub eps: f64,
    pub horizon: u64,
    pub return_times: Vec<u64>,
    pub distances: Vec<f64>,
    pub gaps: Vec<u64>,
    pub censored_gap: u64,
    pub max_gap: u64,
    pub first_half_max_gap: u64,
    pub second_half_max_gap: u64,
    pub verdict: RecurrenceVerdict,
}

impl RecurrenceReport {
    fn from_returns(eps: f64, horizon: u64, returns: Vec<(u64, f64)>) -> Self {
        let mut gaps = Vec::with_capacity(returns.len());
        let (mut first, mut second) = (0u64, 0u64);
        let mut prev = 0u64;
        for &(n, _) in &returns {
            let gap = n - prev;
            gaps.push(gap);
            if n <= horizon / 2 {
                first = first.max(gap);
            } else {
                second = second.max(gap);
            }
            prev = n;
        }
        let censored_gap = horizon + 1 - prev;
        second = second.max(censored_gap);
        let verdict = if second <= 2 * first {
            RecurrenceVerdict::SyndeticAtHorizon
        } else {
            RecurrenceVerdict::GapGrowth
        };
        RecurrenceReport {
            eps,
            horizon,
            return_times: returns.iter().map(|r| r.0).collect(),
            distances: returns.iter().map(|r| r.1).collect(),
            max_gap: first.max(second),
            gaps,
            censored_gap,
            first_half_max_gap: first,
            second_half_max_gap: second,
            verdict,
        }
    }
}

fn check_recurrence_args(eps: f64, horizon: u64) -> Result<()> {
    if horizon < 16 {
        return Err(Error::InvalidArgument(format!("horizon must be >= 16, got {horizon}")));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// `n ∈ [1, horizon]` with `d_H(T^n A, A) <= eps`.
pub fn recurrence_report(a: &FiniteClosedSet, eps: f64, horizon: u64) -> Result<RecurrenceReport> {
    check_recurrence_args(eps, horizon)?;
    let sys = a.system();
    let returns: Vec<(u64, f64)> = (1..=horizon)
        .into_par_iter()
        .filter_map(|n| {
            let image: Vec<Point> = a.points().iter().map(|p| sys.act(p, n as i64)).collect();
            let d = hausdorff_points(sys, &image, a.points());
            (d <= eps).then_some((n, d))
        })
        .collect();
    Ok(RecurrenceReport::from_returns(eps, horizon, returns))
}

/// Recurrence of the tuple as one point of the product flow with the max metric.
pub fn ap_set_test(sys: &SystemSpec, tuple: &[Point], eps: f64, horizon: u64) -> Result<RecurrenceReport> {
    check_recurrence_args(eps, horizon)?;
    if tuple.is_empty() {
        return Err(Error::InvalidArgument("tuple must be nonempty".into()));
    }
    for p in tuple {
        sys.check(p)?;
    }
    let returns: Vec<(u64, f64)> = (1..=horizon)
        .into_par_iter()
        .filter_map(|n| {
            let d = tuple
                .iter()
                .map(|p| sys.dist(&sys.act(p, n as i64), p))
                .fold(0.0, f64::max);
            (d <= eps).then_some((n, d))
        })
        .collect();
    Ok(RecurrenceReport::from_returns(eps, horizon, returns))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairVerdict {
    ProximalAtHorizon,
    DistalAtHorizon,
    Undecided,
}

/// `liminf_estimate` is the minimum of `d(T^n x, T^n y)` over `n ∈ [0, horizon]`,
/// `tail_floor` the minimum over the second half.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairReport {
    pub horizon: u64,
    pub threshold: f64,
    pub liminf_estimate: f64,
    pub argmin: u64,
    pub tail_floor: f64,
    pub verdict: PairVerdict,
}

pub const SUBSHIFT_PROXIMAL_THRESHOLD: f64 = 1.0 / 1024.0;
pub const TORUS_PROXIMAL_THRESHOLD: f64 = 1e-3;

/// A distal verdict needs the floor to stay this many thresholds away.
const DISTAL_MARGIN: f64 = 8.0;

pub fn proximal_pair(sys: &SystemSpec, x: &Point, y: &Point, horizon: u64) -> Result<PairReport> {
    let threshold = match sys {
        SystemSpec::Subshift(_) => SUBSHIFT_PROXIMAL_THRESHOLD,
        SystemSpec::TorusSkew(_) => TORUS_PROXIMAL_THRESHOLD,
    };
    proximal_pair_with_threshold(sys, x, y, horizon, threshold)
}

pub fn proximal_pair_with_threshold(
    sys: &SystemSpec,
    x: &Point,
    y: &Point,
    horizon: u64,
    threshold: f64,
) -> Result<PairReport> {
    sys.check(x)?;
    sys.check(y)?;
    let dists: Vec<f64> = (0..=horizon)
        .into_par_iter()
        .map(|n| sys.dist(&sys.act(x, n as i64), &sys.act(y, n as i64)))
        .collect();
    let (mut argmin, mut min) = (0u64, f64::INFINITY);
    for (n, &d) in dists.iter().enumerate() {
        if d < min {
            min = d;
            argmin = n as u64;
        }
    }
    let tail_floor = dists[(horizon / 2) as usize..].iter().copied().fold(f64::INFINITY, f64::min);
    let verdict = if min <= threshold {
        PairVerdict::ProximalAtHorizon
    } else if min >= DISTAL_MARGIN * threshold {
        PairVerdict::DistalAtHorizon
    } else {
        PairVerdict::Undecided
    };
    Ok(PairReport {
        horizon,
        threshold,
        liminf_estimate: min,
        argmin,
        tail_floor,
        verdict,
    })
}

/// Estimate of the prolongation `D(x)`: forward orbits of `x` and of up to
/// `sample - 1` further points within `delta` of it, pruned at `eps`.
pub fn prolongation_point(
    sys: &Arc<SystemSpec>,
    x: &Point,
    delta: f64,
    sample: usize,
    horizon: u64,
    eps: f64,
) -> Result<FiniteClosedSet> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if sample == 0 {
        return Err(Error::InvalidArgument("sample must be >= 1".into()));
    }
    sys.check(x)?;
    let mut starts = vec![x.clone()];
    match (&**sys, x) {
        (SystemSpec::Subshift(_), Point::Symbolic(_)) => {
            const SEARCH: i64 = 1 << 16;
            let mut j = 0i64;
            'outer: while j <= SEARCH {
                for n in if j == 0 { vec![0] } else { vec![j, -j] } {
                    for base in Base::ALL {
                        if starts.len() >= sample {
                            break 'outer;
                        }
                        let c = Point::orbit(base, n);
                        let d = sys.dist(&c, x);
                        if d <= delta && d > 0.0 && !starts.contains(&c) {
                            starts.push(c);
                        }
                    }
                }
                j += 1;
            }
        }
        (SystemSpec::TorusSkew(_), Point::Torus(t)) => {
            let side = ((sample as f64).sqrt().ceil() as i64) | 1;
            let half = side / 2;
            let step = delta / (half.max(1) as f64);
            let mut offsets: Vec<(i64, i64)> = (-half..=half)
                .flat_map(|i| (-half..=half).map(move |j| (i, j)))
                .filter(|&o| o != (0, 0))
                .collect();
            offsets.sort_by_key(|&(i, j)| (i.abs().max(j.abs()), i, j));
            for (i, j) in offsets.into_iter().take(sample - 1) {
                let p = TorusPoint {
                    x: t.x.add(Circle::from_f64(i as f64 * step)),
                    y: t.y.add(Circle::from_f64(j as f64 * step)),
                };
                starts.push(Point::Torus(p));
            }
        }
        _ => unreachable!("membership checked above"),
    }
    let visits: Vec<Point> = starts
        .iter()
        .flat_map(|s| forward_orbit(sys, s, horizon))
        .collect();
    let kept = sys.epsilon_net_prune(&visits, eps)?;
    FiniteClosedSet::new(sys.clone(), kept, eps)
}

fn forward_orbit(sys: &SystemSpec, p: &Point, horizon: u64) -> Vec<Point> {
    match (sys, p) {
        (SystemSpec::TorusSkew(t), Point::Torus(q)) => {
            let mut cur = *q;
            let mut out = Vec::with_capacity(horizon as usize + 1);
            for _ in 0..=horizon {
                out.push(Point::Torus(cur));
                cur = t.step(cur);
            }
            out
        }
        _ => (0..=horizon as i64).map(|n| sys.act(p, n)).collect(),
    }
}

/// Canonical key set of a symbolic set at agreement radius `m`, when available.
fn key_set(s: &Substitution, points: &[Point], m: u32) -> Option<Vec<u64>> {
    let mut keys = points
        .iter()
        .map(|p| symbolic_key(s, p.as_symbolic()?, m))
        .collect::<Option<Vec<_>>>()?;
    keys.sort_unstable();
    keys.dedup();
    Some(keys)
}

/// Agreement radius deciding `d_H <= r` by key-set equality, if small enough.
fn keyed_radius(sys: &SystemSpec, r: f64) -> Option<(&Substitution, u32)> {
    let s = sys.subshift()?;
    let m = dyadic_radius(r);
    (m <= 32).then_some((s, m))
}

/// Orbit `{T^n A : |n| <= horizon}` in the hyperspace, visited as
/// `0, 1, -1, 2, -2, …` and pruned greedily at `eps` under `d_H`.
pub fn d_star_estimate(a: &FiniteClosedSet, horizon: u64, eps: f64) -> Result<Vec<FiniteClosedSet>> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let sys = a.system();
    let times = std::iter::once(0).chain((1..=horizon as i64).flat_map(|n| [n, -n]));
    let mut members: Vec<FiniteClosedSet> = Vec::new();
    if let Some((s, m)) = keyed_radius(sys, eps / 2.0) {
        if key_set(s, a.points(), m).is_some() {
            let mut seen = HashSet::new();
            for n in times {
                let image = a.induced_step(n);
                let keys = key_set(s, image.points(), m).expect("seeded points have keys");
                if seen.insert(keys) {
                    members.push(image.with_resolution(eps));
                }
            }
            return Ok(members);
        }
    }
    for n in times {
        let image = a.induced_step(n);
        let far = members
            .iter()
            .all(|m| hausdorff_points(sys, m.points(), image.points()) > eps / 2.0);
        if far {
            members.push(image.with_resolution(eps));
        }
    }
    Ok(members)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasifactorWitness {
    /// Member whose orbit fails to approach `unreached`.
    pub from: usize,
    pub unreached: usize,
    pub best_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasifactorReport {
    pub eps: f64,
    pub horizon: u64,
    pub members: usize,
    pub minimal: bool,
    pub witness: Option<QuasifactorWitness>,
}

/// Minimal at resolution iff the forward orbit of every member comes within
/// `eps` of every member.
pub fn quasifactor_check(collection: &[FiniteClosedSet], eps: f64, horizon: u64) -> Result<QuasifactorReport> {
    let Some(first) = collection.first() else {
        return Err(Error::InvalidArgument("collection must be nonempty".into()));
    };
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    for m in collection {
        if m.system() != first.system() {
            return Err(Error::DomainMismatch("collection spans several systems".into()));
        }
    }
    let sys = first.system();
    let keyed = keyed_radius(sys, eps).and_then(|(s, m)| {
        let keys = collection
            .iter()
            .map(|c| key_set(s, c.points(), m))
            .collect::<Option<Vec<_>>>()?;
        Some((s, m, keys))
    });

    let unreached_from = |i: usize| -> Option<usize> {
        let member = &collection[i];
        let mut reached = vec![false; collection.len()];
        let mut left = collection.len();
        for n in 0..=horizon as i64 {
            let image: Vec<Point> = member.points().iter().map(|p| sys.act(p, n)).collect();
            match &keyed {
                Some((s, m, keys)) => {
                    let k = key_set(s, &image, *m).expect("keys exist for members");
                    for (j, kj) in keys.iter().enumerate() {
                        if !reached[j] && *kj == k {
                            reached[j] = true;
                            left -= 1;
                        }
                    }
                }
                None => {
                    for (j, c) in collection.iter().enumerate() {
                        if !reached[j] && hausdorff_points(sys, &image, c.points()) <= eps {
                            reached[j] = true;
                            left -= 1;
                        }
                    }
                }
            }
            if left == 0 {
                return None;
            }
        }
        reached.iter().position(|r| !r)
    };
    let failures: Vec<Option<usize>> = (0..collection.len()).into_par_iter().map(unreached_from).collect();
    let witness = failures.iter().enumerate().find_map(|(i, f)| f.map(|j| (i, j)));
    let witness = witness.map(|(from, unreached)| {
        let target = collection[unreached].points();
        let best_distance = (0..=horizon as i64)
            .into_par_iter()
            .map(|n| {
                let image: Vec<Point> = collection[from].points().iter().map(|p| sys.act(p, n)).collect();
                hausdorff_points(sys, &image, target)
            })
            .reduce(|| f64::INFINITY, f64::min);
        QuasifactorWitness {
            from,
            unreached,
            best_distance,
        }
    });
    Ok(QuasifactorReport {
        eps,
        horizon,
        members: collection.len(),
        minimal: witness.is_none(),
        witness,
    })
}

/// How the orbit-closure estimate compares with the cluster sets of a net catalog.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogCheck {
    pub nets: Vec<String>,
    pub converged: Vec<bool>,
    /// Largest distance from a cluster set to the nearest orbit member.
    pub catalog_to_orbit: f64,
    /// Largest distance from an orbit member to the nearest cluster set.
    pub orbit_to_catalog: f64,
    pub tolerance: f64,
    pub clusters_in_orbit: bool,
}

pub fn catalog_cross_check(
    a: &FiniteClosedSet,
    members: &[FiniteClosedSet],
    nets: &[TimeNet],
    eps: f64,
) -> Result<CatalogCheck> {
    let clusters = nets
        .iter()
        .map(|n| cluster_set(a, n, eps))
        .collect::<Result<Vec<_>>>()?;
    let nearest = |x: &FiniteClosedSet, ys: &mut dyn Iterator<Item = &FiniteClosedSet>| -> Result<f64> {
        let mut best = f64::INFINITY;
        for y in ys {
            best = best.min(x.hausdorff(y)?);
        }
        Ok(best)
    };
    let mut catalog_to_orbit = 0.0f64;
    for c in &clusters {
        catalog_to_orbit = catalog_to_orbit.max(nearest(&c.result, &mut members.iter())?);
    }
    let mut orbit_to_catalog = 0.0f64;
    for m in members {
        orbit_to_catalog = orbit_to_catalog.max(nearest(m, &mut clusters.iter().map(|c| &c.result))?);
    }
    Ok(CatalogCheck {
        nets: nets.iter().map(|n| n.label.clone()).collect(),
        converged: clusters.iter().map(|c| c.converged).collect(),
        catalog_to_orbit,
        orbit_to_catalog,
        tolerance: 2.0 * eps,
        clusters_in_orbit: catalog_to_orbit <= 2.0 * eps,
    })
}

/// Idempotent nets plus the constant nets `{t}`, `|t| <= 8`.
pub fn shipped_catalog(s: &Substitution, radii: &[u32], horizon: u64) -> Result<Vec<TimeNet>> {
    let mut nets = idempotent_catalog(s, radii, horizon, &OffOrbitPanel::standard())?;
    nets.extend((-8..=8).map(TimeNet::constant));
    Ok(nets)
}
