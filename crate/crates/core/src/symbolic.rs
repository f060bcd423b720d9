//! The square of the Morse-Thue substitution, its two-sided fixed points, and
//! the exact action of the four minimal idempotents on them.
//!
//! A seeded point is the unique fixed point of the substitution whose letters
//! at indices `-1, 0` are the seed pair, translated by an integer shift. The
//! letter at index `g` is found by descending through the block structure
//! `x[g] = Q^c(x[floor(g / L^c)])[g mod L^c]` until the index hits the seed.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitBuf;
use crate::error::{Error, Result};
use crate::hyperspace::FiniteClosedSet;
use crate::spaces::{Point, Seed, SymbolicPoint, COMPARISON_HORIZON};

/// Shifts beyond this are treated as off the distinguished orbits.
pub const ORBIT_HORIZON: i64 = 1 << 12;

const MAX_BLOCK_LEN: u64 = 4096;

/// A constant-length substitution over `{0, 1}`.
#[derive(Clone, Debug)]
pub struct Substitution {
    rules: [Vec<u8>; 2],
    block_len: u64,
    block_shift: Option<u32>,
    blocks: [BitBuf; 2],
    complement_symmetric: bool,
}

impl PartialEq for Substitution {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl Substitution {
    pub fn new(rule0: &[u8], rule1: &[u8]) -> Result<Self> {
        let len = rule0.len();
        if len < 2 || rule1.len() != len {
            return Err(Error::InvalidSystem(format!(
                "rules must be nonempty words of one common length >= 2 (got {} and {})",
                rule0.len(),
                rule1.len()
            )));
        }
        for (c, rule) in [rule0, rule1].into_iter().enumerate() {
            if rule.iter().any(|&l| l > 1) {
                return Err(Error::InvalidSystem(format!("rule {c} uses a letter outside {{0,1}}")));
            }
            if rule[0] as usize != c || rule[len - 1] as usize != c {
                return Err(Error::InvalidSystem(format!(
                    "rule {c} must start and end with {c} for two-sided fixed points"
                )));
            }
        }
        let rules = [rule0.to_vec(), rule1.to_vec()];

        let mut block_len = 1u64;
        while block_len * len as u64 <= MAX_BLOCK_LEN {
            block_len *= len as u64;
        }
        let mut words = [vec![0u8], vec![1u8]];
        while words[0].len() as u64 != block_len {
            for w in words.iter_mut() {
                *w = w.iter().flat_map(|&l| rules[l as usize].iter().copied()).collect();
            }
        }
        let blocks = [BitBuf::from_letters(&words[0]), BitBuf::from_letters(&words[1])];
        let block_shift = block_len.is_power_of_two().then(|| block_len.trailing_zeros());
        let complement_symmetric = rules[0].iter().zip(&rules[1]).all(|(a, b)| a ^ b == 1);

        Ok(Substitution {
            rules,
            block_len,
            block_shift,
            blocks,
            complement_symmetric,
        })
    }

    /// `Q(0) = 0110, Q(1) = 1001`.
    pub fn morse_square() -> Self {
        Substitution::new(&[0, 1, 1, 0], &[1, 0, 0, 1]).expect("shipped rules are valid")
    }

    pub fn rule(&self, letter: u8) -> &[u8] {
        &self.rules[letter as usize]
    }

    pub fn rule_len(&self) -> usize {
        self.rules[0].len()
    }

    pub fn substitute(&self, word: &[u8]) -> Vec<u8> {
        word.iter()
            .flat_map(|&l| self.rules[l as usize].iter().copied())
            .collect()
    }

    /// Seed pairs that extend to two-sided fixed points.
    pub fn fixed_point(&self, left: u8, right: u8) -> Result<SymbolicPoint> {
        let base = Base::from_seed(left, right).ok_or(Error::UnsupportedSeed(left, right))?;
        Ok(SymbolicPoint::orbit(base, 0))
    }

    #[inline]
    fn split(&self, g: i64) -> (i64, usize) {
        match self.block_shift {
            Some(s) => (g >> s, (g & (self.block_len as i64 - 1)) as usize),
            None => {
                let b = self.block_len as i64;
                (g.div_euclid(b), g.rem_euclid(b) as usize)
            }
        }
    }

    /// Letter at index `g` of the fixed point seeded by `base`.
    #[inline]
    pub fn seed_letter(&self, base: Base, g: i64) -> u8 {
        let (left, right) = base.seed();
        let mut offsets = [0usize; 24];
        let mut depth = 0;
        let mut g = g;
        while g != 0 && g != -1 {
            let (blk, off) = self.split(g);
            offsets[depth] = off;
            depth += 1;
            g = blk;
        }
        let mut letter = if g == 0 { right } else { left };
        for &off in offsets[..depth].iter().rev() {
            letter = self.blocks[letter as usize].get(off);
        }
        letter
    }

    /// Letters of the seeded fixed point at indices `start .. start + len`.
    pub(crate) fn fill_seeded(&self, base: Base, start: i64, len: usize) -> BitBuf {
        let mut out = BitBuf::zeros(len);
        let mut pos = 0usize;
        while pos < len {
            let (blk, off) = self.split(start + pos as i64);
            let letter = self.seed_letter(base, blk);
            let take = (self.block_len as usize - off).min(len - pos);
            let src = &self.blocks[letter as usize];
            let mut done = 0;
            while done < take {
                let n = (take - done).min(64);
                out.or_bits(pos + done, n, src.extract(off + done, n));
                done += n;
            }
            pos += take;
        }
        out
    }

    /// Letter of `p` at index `k`, `None` outside an explicit window.
    #[inline]
    pub fn letter(&self, p: &SymbolicPoint, k: i64) -> Option<u8> {
        let g = k + p.shift();
        match p.seed() {
            Seed::Orbit(base) => Some(self.seed_letter(*base, g)),
            Seed::Word(word) => {
                let r = (word.len() / 2) as i64;
                (-r..r).contains(&g).then(|| word[(g + r) as usize])
            }
        }
    }

    /// Letters of `p` at `from .. from + len`, `None` if any are unknown.
    pub(crate) fn bits(&self, p: &SymbolicPoint, from: i64, len: usize) -> Option<BitBuf> {
        let g = from + p.shift();
        match p.seed() {
            Seed::Orbit(base) => Some(self.fill_seeded(*base, g, len)),
            Seed::Word(word) => {
                let r = (word.len() / 2) as i64;
                if g < -r || g + len as i64 > r {
                    return None;
                }
                let start = (g + r) as usize;
                Some(BitBuf::from_letters(&word[start..start + len]))
            }
        }
    }

    /// Letters at indices `-radius .. radius` (length `2 * radius`).
    pub fn window(&self, p: &SymbolicPoint, radius: u32) -> Result<Vec<u8>> {
        if radius == 0 {
            return Err(Error::InvalidArgument("window radius must be >= 1".into()));
        }
        let r = radius as i64;
        self.bits(p, -r, 2 * radius as usize)
            .map(|b| b.to_letters())
            .ok_or_else(|| {
                Error::InvalidArgument(format!("explicit window does not cover radius {radius}"))
            })
    }

    /// Smallest `|k| <= horizon` at which `p` and `q` differ.
    pub fn first_disagreement(&self, p: &SymbolicPoint, q: &SymbolicPoint, horizon: u32) -> Option<u32> {
        if p == q {
            return None;
        }
        if let (Seed::Orbit(bp), Seed::Orbit(bq)) = (p.seed(), q.seed()) {
            if p.shift() == q.shift() && self.complement_symmetric {
                return seam_disagreement(*bp, *bq, p.shift()).filter(|&m| m <= horizon);
            }
        }
        let (plo, phi) = known_range(p);
        let (qlo, qhi) = known_range(q);
        let (lo, hi) = (plo.max(qlo), phi.min(qhi));
        let horizon = horizon as i64;
        for j in 0..=horizon {
            let right = j < hi;
            let left = -j >= lo;
            if !right && !left {
                return None;
            }
            for (k, ok) in [(j, right), (-j, left)] {
                if ok && self.letter(p, k) != self.letter(q, k) {
                    return Some(j as u32);
                }
            }
        }
        None
    }

    /// `2^-m` with `m` the first disagreement radius, `0` beyond the comparison horizon.
    pub fn distance(&self, p: &SymbolicPoint, q: &SymbolicPoint) -> f64 {
        match self.first_disagreement(p, q, COMPARISON_HORIZON) {
            Some(m) => (-(m as f64)).exp2(),
            None => 0.0,
        }
    }

    /// Locates `p` on a distinguished orbit within [`ORBIT_HORIZON`].
    pub fn locate_on_orbit(&self, p: &SymbolicPoint) -> Option<(Base, i64)> {
        match p.seed() {
            Seed::Orbit(base) => (p.shift().abs() <= ORBIT_HORIZON).then_some((*base, p.shift())),
            Seed::Word(word) => {
                let r = (word.len() / 2) as i64;
                let lo = -r - p.shift();
                let target = BitBuf::from_letters(word);
                let n = word.len();
                let bufs = Base::ALL.map(|base| {
                    self.fill_seeded(base, lo - ORBIT_HORIZON, n + 2 * ORBIT_HORIZON as usize)
                });
                signed_by_magnitude(ORBIT_HORIZON).find_map(|j| {
                    Base::ALL
                        .into_iter()
                        .find(|b| bufs[b.index()].matches((j + ORBIT_HORIZON) as usize, &target, n))
                        .map(|b| (b, j))
                })
            }
        }
    }
}

/// First disagreement of two seeded points with a common shift, for
/// substitutions whose rules are letterwise complements.
fn seam_disagreement(p: Base, q: Base, shift: i64) -> Option<u32> {
    let (pl, pr) = p.seed();
    let (ql, qr) = q.seed();
    // Indices k >= -shift read the right half, k < -shift the left half.
    let right = (pr != qr).then(|| if shift >= 0 { 0 } else { shift.unsigned_abs() });
    let left = (pl != ql).then(|| if shift < 0 { 0 } else { shift as u64 + 1 });
    match (left, right) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
    .map(|m| m.min(u32::MAX as u64) as u32)
}

/// Indices `lo .. hi` at which the letters of `p` are known.
fn known_range(p: &SymbolicPoint) -> (i64, i64) {
    match p.seed() {
        Seed::Orbit(_) => (i64::MIN, i64::MAX),
        Seed::Word(word) => {
            let r = (word.len() / 2) as i64;
            (-r - p.shift(), r - p.shift())
        }
    }
}

/// `0, 1, -1, 2, -2, ...` up to `max` in magnitude.
fn signed_by_magnitude(max: i64) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=max).flat_map(|m| [m, -m]))
}

/// The four fixed points `a, b, ā, b̄`, named by their seed pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "abar")]
    ABar,
    #[serde(rename = "bbar")]
    BBar,
}

impl Base {
    pub const ALL: [Base; 4] = [Base::A, Base::B, Base::ABar, Base::BBar];

    /// Letters at indices `-1` and `0`.
    pub fn seed(self) -> (u8, u8) {
        match self {
            Base::A => (1, 1),
            Base::B => (0, 1),
            Base::ABar => (0, 0),
            Base::BBar => (1, 0),
        }
    }

    pub fn from_seed(left: u8, right: u8) -> Option<Base> {
        Base::ALL.into_iter().find(|b| b.seed() == (left, right))
    }

    pub fn complement(self) -> Base {
        match self {
            Base::A => Base::ABar,
            Base::B => Base::BBar,
            Base::ABar => Base::A,
            Base::BBar => Base::B,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Base::A => "a",
            Base::B => "b",
            Base::ABar => "abar",
            Base::BBar => "bbar",
        }
    }

    pub fn from_name(name: &str) -> Option<Base> {
        Base::ALL.into_iter().find(|b| b.name() == name)
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A self-map of `X` that permutes the distinguished orbits by a table on
/// their bases and fixes every other point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdempotentTable {
    pub name: String,
    pub map: [Base; 4],
}

impl IdempotentTable {
    pub fn new(name: impl Into<String>, map: [Base; 4]) -> Self {
        IdempotentTable {
            name: name.into(),
            map,
        }
    }

    pub fn u1() -> Self {
        use Base::*;
        // a, b, ā, b̄
        Self::new("u1", [B, B, BBar, BBar])
    }

    pub fn v1() -> Self {
        use Base::*;
        Self::new("v1", [BBar, B, B, BBar])
    }

    pub fn u2() -> Self {
        use Base::*;
        Self::new("u2", [A, A, ABar, ABar])
    }

    pub fn v2() -> Self {
        use Base::*;
        Self::new("v2", [A, ABar, ABar, A])
    }

    /// The identity map, not a minimal idempotent.
    pub fn identity() -> Self {
        Self::new("id", Base::ALL)
    }

    pub fn minimal() -> [Self; 4] {
        [Self::u1(), Self::v1(), Self::u2(), Self::v2()]
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "u1" => Some(Self::u1()),
            "v1" => Some(Self::v1()),
            "u2" => Some(Self::u2()),
            "v2" => Some(Self::v2()),
            "id" => Some(Self::identity()),
            _ => None,
        }
    }

    pub fn image(&self, base: Base) -> Base {
        self.map[base.index()]
    }

    /// `(self ∘ inner)(p) = self(inner(p))`.
    pub fn compose(&self, inner: &IdempotentTable) -> IdempotentTable {
        let map = Base::ALL.map(|b| self.image(inner.image(b)));
        IdempotentTable::new(format!("{}∘{}", self.name, inner.name), map)
    }

    /// Equality as maps on the four bases (off-orbit behaviour is always identity).
    pub fn same_action(&self, other: &IdempotentTable) -> bool {
        self.map == other.map
    }

    pub fn is_idempotent(&self) -> bool {
        self.compose(self).same_action(self)
    }

    pub fn apply(&self, subst: &Substitution, p: &SymbolicPoint) -> SymbolicPoint {
        match subst.locate_on_orbit(p) {
            Some((base, k)) => SymbolicPoint::orbit(self.image(base), k),
            None => p.clone(),
        }
    }

    /// Membership in `F_u = {x : ux = x}`, exact for seeded points.
    pub fn fixes(&self, subst: &Substitution, p: &SymbolicPoint) -> bool {
        let image = self.apply(subst, p);
        image == *p || subst.distance(&image, p) == 0.0
    }

    /// Elementwise image of a finite set, duplicates merged.
    pub fn apply_to_set(&self, set: &FiniteClosedSet) -> Result<FiniteClosedSet> {
        let subst = set.system().subshift().ok_or_else(|| {
            Error::DomainMismatch("idempotent tables act on the substitution subshift".into())
        })?;
        let points = set
            .points()
            .iter()
            .map(|p| match p {
                Point::Symbolic(s) => Ok(Point::Symbolic(self.apply(subst, s))),
                Point::Torus(_) => Err(Error::DomainMismatch("torus point in a subshift set".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteClosedSet::new(set.system_arc(), points, set.resolution())
    }
}

impl fmt::Display for IdempotentTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name)?;
        for (i, b) in Base::ALL.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} -> {}", b, self.image(*b))?;
        }
        Ok(())
    }
}

/// Position of two idempotents in the order `u > v iff uv = v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuasiOrder {
    SAboveT,
    TAboveS,
    Equivalent,
    Incomparable,
}

pub fn quasi_order(s: &IdempotentTable, t: &IdempotentTable) -> QuasiOrder {
    let s_above = s.compose(t).same_action(t);
    let t_above = t.compose(s).same_action(s);
    match (s_above, t_above) {
        (true, true) => QuasiOrder::Equivalent,
        (true, false) => QuasiOrder::SAboveT,
        (false, true) => QuasiOrder::TAboveS,
        (false, false) => QuasiOrder::Incomparable,
    }
}

/// Fixed by every minimal idempotent, i.e. a distal point.
pub fn is_distal_point(subst: &Substitution, p: &SymbolicPoint) -> bool {
    IdempotentTable::minimal().iter().all(|t| t.fixes(subst, p))
}

/// Generic points `σ^N a` with large pseudo-random `N`, far from every seam.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffOrbitPanel {
    pub seed: u64,
    pub shifts: Vec<i64>,
}

impl OffOrbitPanel {
    pub const DEFAULT_SEED: u64 = 0x5eed_0f0f;
    pub const DEFAULT_SIZE: usize = 8;

    pub fn generate(seed: u64, count: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shifts = (0..count).map(|_| rng.gen_range((1i64 << 36)..(1i64 << 40))).collect();
        OffOrbitPanel { seed, shifts }
    }

    pub fn standard() -> Self {
        Self::generate(Self::DEFAULT_SEED, Self::DEFAULT_SIZE)
    }

    pub fn points(&self) -> Vec<SymbolicPoint> {
        self.shifts.iter().map(|&n| SymbolicPoint::orbit(Base::A, n)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str) -> Vec<u8> {
        s.bytes().map(|c| c - b'0').collect()
    }

    fn show(w: &[u8]) -> String {
        w.iter().map(|&l| (b'0' + l) as char).collect()
    }

    #[test]
    fn substitute_examples() {
        let q = Substitution::morse_square();
        assert_eq!(q.substitute(&word("0")), word("0110"));
        assert_eq!(q.substitute(&[]), Vec::<u8>::new());
        assert_eq!(q.substitute(&word("01")), word("01101001"));
    }

    #[test]
    fn fixed_point_windows() {
        let q = Substitution::morse_square();
        let cases = [((1, 1), "10011001"), ((0, 1), "01101001"), ((0, 0), "01100110"), ((1, 0), "10010110")];
        for ((l, r), expected) in cases {
            let p = q.fixed_point(l, r).unwrap();
            assert_eq!(show(&q.window(&p, 4).unwrap()), expected);
        }
        assert!(matches!(q.fixed_point(2, 1), Err(Error::UnsupportedSeed(2, 1))));
    }

    #[test]
    fn letters_match_naive_iteration() {
        // Oracle: iterate the substitution on the seed pair directly.
        let q = Substitution::morse_square();
        for base in Base::ALL {
            let (l, r) = base.seed();
            let (mut left, mut right) = (vec![l], vec![r]);
            for _ in 0..7 {
                left = q.substitute(&left);
                right = q.substitute(&right);
            }
            for (i, &letter) in right.iter().enumerate() {
                assert_eq!(q.seed_letter(base, i as i64), letter);
            }
            for (i, &letter) in left.iter().rev().enumerate() {
                assert_eq!(q.seed_letter(base, -1 - i as i64), letter);
            }
        }
    }

    #[test]
    fn fill_matches_letterwise() {
        let q = Substitution::morse_square();
        for start in [-10_000i64, -4097, -1, 0, 4095, 1 << 33] {
            let buf = q.fill_seeded(Base::B, start, 9000);
            for i in (0..9000).step_by(7) {
                assert_eq!(buf.get(i), q.seed_letter(Base::B, start + i as i64));
            }
        }
    }

    #[test]
    fn non_power_of_two_blocks() {
        let s = Substitution::new(&[0, 1, 0], &[1, 0, 1]).unwrap();
        let (mut right, mut left) = (vec![1u8], vec![0u8]);
        for _ in 0..9 {
            right = s.substitute(&right);
            left = s.substitute(&left);
        }
        for (i, &l) in right.iter().enumerate().step_by(13) {
            assert_eq!(s.seed_letter(Base::B, i as i64), l);
        }
        for (i, &l) in left.iter().rev().enumerate().step_by(11) {
            assert_eq!(s.seed_letter(Base::B, -1 - i as i64), l);
        }
    }

    #[test]
    fn rejects_rules_without_two_sided_extension() {
        assert!(Substitution::new(&[0, 1], &[1, 0]).is_err());
        assert!(Substitution::new(&[0, 1, 1, 0], &[1, 0, 0]).is_err());
        assert!(Substitution::new(&[], &[1]).is_err());
    }

    #[test]
    fn seam_fast_path_agrees_with_scan() {
        let q = Substitution::morse_square();
        let plain = Substitution::new(&[0, 1, 1, 0], &[1, 0, 0, 1]).unwrap();
        for p in Base::ALL {
            for r in Base::ALL {
                for shift in [-40i64, -3, -1, 0, 1, 2, 17] {
                    let x = SymbolicPoint::orbit(p, shift);
                    let y = SymbolicPoint::orbit(r, shift);
                    let fast = q.first_disagreement(&x, &y, 100);
                    // Scan oracle, index by index.
                    let slow = (0..=100i64).find(|&j| {
                        q.seed_letter(p, j + shift) != q.seed_letter(r, j + shift)
                            || q.seed_letter(p, -j + shift) != q.seed_letter(r, -j + shift)
                    });
                    assert_eq!(fast, slow.map(|j| j as u32), "{p} {r} {shift}");
                    let _ = &plain;
                }
            }
        }
    }

    #[test]
    fn table_images_and_fixed_sets() {
        let q = Substitution::morse_square();
        let u1 = IdempotentTable::u1();
        let a = SymbolicPoint::orbit(Base::A, 0);
        let b = SymbolicPoint::orbit(Base::B, 0);
        assert_eq!(u1.apply(&q, &a), b);
        assert!(u1.fixes(&q, &b));
        assert!(!u1.fixes(&q, &a));
        let shifted = SymbolicPoint::orbit(Base::A, 3);
        assert_eq!(u1.apply(&q, &shifted), SymbolicPoint::orbit(Base::B, 3));
        for x in OffOrbitPanel::standard().points() {
            assert_eq!(u1.apply(&q, &x), x);
            assert!(is_distal_point(&q, &x));
        }
    }

    #[test]
    fn explicit_windows_are_located_on_orbits() {
        let q = Substitution::morse_square();
        let p = SymbolicPoint::orbit(Base::ABar, -37);
        let w = q.window(&p, 200).unwrap();
        let explicit = SymbolicPoint::from_window(&w).unwrap();
        assert_eq!(q.locate_on_orbit(&explicit), Some((Base::ABar, -37)));
        let image = IdempotentTable::u1().apply(&q, &explicit);
        assert_eq!(image, SymbolicPoint::orbit(Base::BBar, -37));

        // Contains a cube, so no fixed point has this window.
        let mut w = q.window(&SymbolicPoint::orbit(Base::A, 5), 64).unwrap();
        w[10..13].copy_from_slice(&[0, 0, 0]);
        let explicit = SymbolicPoint::from_window(&w).unwrap();
        assert_eq!(q.locate_on_orbit(&explicit), None);
        assert!(IdempotentTable::u1().fixes(&q, &explicit));
        assert!(is_distal_point(&q, &explicit));

        let far = SymbolicPoint::orbit(Base::A, 987_654_321);
        assert_eq!(q.locate_on_orbit(&far), None);
    }

    #[test]
    fn quasi_order_examples() {
        let (u1, v1, u2) = (IdempotentTable::u1(), IdempotentTable::v1(), IdempotentTable::u2());
        assert_eq!(quasi_order(&u1, &v1), QuasiOrder::Equivalent);
        assert_eq!(quasi_order(&u1, &u1), QuasiOrder::Equivalent);
        assert_eq!(quasi_order(&u1, &u2), QuasiOrder::Incomparable);
        assert_eq!(quasi_order(&IdempotentTable::identity(), &u1), QuasiOrder::SAboveT);
    }
}
