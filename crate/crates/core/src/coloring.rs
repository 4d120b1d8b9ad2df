//! Colorings of pairs and the predicates the rest of the crate is built on.
//!
//! A coloring assigns each unordered pair `{x, y}` of its domain a color in
//! `[0, k)`. [`PairColoring`] stores the assignment for a finite ground set;
//! [`FnColoring`] computes it on demand, which is how the large randomized
//! fixtures are built.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::finset::FinSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("element {0} is not in the coloring's ground set")]
    NotSubset(u64),
    #[error("family members do not share a ground set and two colors")]
    GroundMismatch,
    #[error("color {color} out of range for {count} colors")]
    ColorOutOfRange { color: u32, count: u32 },
    #[error("a coloring needs at least one color")]
    NoColors,
    #[error("family of {0} members does not fit in 32-bit colors")]
    FamilyTooLarge(usize),
    #[error("pair ({0}, {1}) is invalid: {2}")]
    BadPair(u64, u64, &'static str),
    #[error("pair ({0}, {1}) is missing")]
    MissingPair(u64, u64),
}

pub type Result<T> = std::result::Result<T, ColoringError>;

/// Anything that colors pairs of naturals.
pub trait Coloring: Sync {
    fn color_count(&self) -> u32;

    /// Whether `x` is in the domain.
    fn contains(&self, x: u64) -> bool;

    /// Color of the unordered pair `{x, y}`, `x != y`, both in the domain.
    fn color(&self, x: u64, y: u64) -> u32;
}

impl<C: Coloring + ?Sized> Coloring for &C {
    fn color_count(&self) -> u32 {
        (**self).color_count()
    }
    fn contains(&self, x: u64) -> bool {
        (**self).contains(x)
    }
    fn color(&self, x: u64, y: u64) -> u32 {
        (**self).color(x, y)
    }
}

/// Index of pair `i < j` in the packed triangular layout.
#[inline]
fn pair_rank(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

/// `C(n, 2)`.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// A total coloring of the pairs of a finite ground set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairColoring {
    ground: FinSet,
    colors: u32,
    values: Vec<u32>,
}

impl PairColoring {
    pub fn from_fn(ground: FinSet, colors: u32, mut f: impl FnMut(u64, u64) -> u32) -> Result<Self> {
        if colors == 0 {
            return Err(ColoringError::NoColors);
        }
        let els = ground.as_slice();
        let mut values = Vec::with_capacity(pair_count(els.len()));
        for j in 0..els.len() {
            for i in 0..j {
                let c = f(els[i], els[j]);
                if c >= colors {
                    return Err(ColoringError::ColorOutOfRange { color: c, count: colors });
                }
                values.push(c);
            }
        }
        Ok(PairColoring {
            ground,
            colors,
            values,
        })
    }

    pub fn constant(ground: FinSet, colors: u32, color: u32) -> Result<Self> {
        Self::from_fn(ground, colors, |_, _| color)
    }

    /// The coloring with mixed-radix rank `rank`: digit `p` (least
    /// significant first) is the color of the `p`-th pair in packed order.
    pub fn from_rank(ground: FinSet, colors: u32, mut rank: u64) -> Result<Self> {
        if colors == 0 {
            return Err(ColoringError::NoColors);
        }
        let n = pair_count(ground.len());
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push((rank % colors as u64) as u32);
            rank /= colors as u64;
        }
        Ok(PairColoring {
            ground,
            colors,
            values,
        })
    }

    pub fn ground(&self) -> &FinSet {
        &self.ground
    }

    /// Colors in packed triangular order: pair `(g[i], g[j])`, `i < j`, sits at
    /// `j(j-1)/2 + i`.
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Color by ground positions `i != j`.
    #[inline]
    pub fn color_at(&self, i: usize, j: usize) -> u32 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.values[pair_rank(i, j)]
    }

    /// All pairs `(x, y, color)` with `x < y`, ordered by `(x, y)`.
    pub fn triples(&self) -> Vec<[u64; 3]> {
        let els = self.ground.as_slice();
        let mut out = Vec::with_capacity(self.values.len());
        for i in 0..els.len() {
            for j in i + 1..els.len() {
                out.push([els[i], els[j], self.color_at(i, j) as u64]);
            }
        }
        out
    }

    /// The restriction to `subset`, which must lie in the ground.
    pub fn restrict(&self, subset: &FinSet) -> Result<PairColoring> {
        let idx = ground_indices(self, subset)?;
        let mut values = Vec::with_capacity(pair_count(idx.len()));
        for j in 0..idx.len() {
            for i in 0..j {
                values.push(self.color_at(idx[i], idx[j]));
            }
        }
        Ok(PairColoring {
            ground: subset.clone(),
            colors: self.colors,
            values,
        })
    }
}

impl Coloring for PairColoring {
    fn color_count(&self) -> u32 {
        self.colors
    }

    fn contains(&self, x: u64) -> bool {
        self.ground.contains(x)
    }

    fn color(&self, x: u64, y: u64) -> u32 {
        let i = self.ground.index_of(x).expect("element in ground");
        let j = self.ground.index_of(y).expect("element in ground");
        self.color_at(i, j)
    }
}

#[derive(Serialize, Deserialize)]
struct PairColoringWire {
    ground: FinSet,
    colors: u32,
    pairs: Vec<[u64; 3]>,
}

impl Serialize for PairColoring {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PairColoringWire {
            ground: self.ground.clone(),
            colors: self.colors,
            pairs: self.triples(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PairColoring {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = PairColoringWire::deserialize(deserializer)?;
        PairColoring::from_wire(wire).map_err(D::Error::custom)
    }
}

impl PairColoring {
    fn from_wire(wire: PairColoringWire) -> Result<Self> {
        if wire.colors == 0 {
            return Err(ColoringError::NoColors);
        }
        let n = wire.ground.len();
        let mut values: Vec<Option<u32>> = vec![None; pair_count(n)];
        for [x, y, c] in wire.pairs {
            if x >= y {
                return Err(ColoringError::BadPair(x, y, "expected x < y"));
            }
            let (Some(i), Some(j)) = (wire.ground.index_of(x), wire.ground.index_of(y)) else {
                return Err(ColoringError::BadPair(x, y, "not in ground"));
            };
            if c >= wire.colors as u64 {
                return Err(ColoringError::ColorOutOfRange {
                    color: c.min(u32::MAX as u64) as u32,
                    count: wire.colors,
                });
            }
            let slot = &mut values[pair_rank(i, j)];
            if slot.is_some() {
                return Err(ColoringError::BadPair(x, y, "listed twice"));
            }
            *slot = Some(c as u32);
        }
        let els = wire.ground.as_slice();
        let mut out = Vec::with_capacity(values.len());
        for j in 0..n {
            for i in 0..j {
                match values[pair_rank(i, j)] {
                    Some(c) => out.push(c),
                    None => return Err(ColoringError::MissingPair(els[i], els[j])),
                }
            }
        }
        Ok(PairColoring {
            ground: wire.ground,
            colors: wire.colors,
            values: out,
        })
    }
}

/// A coloring computed by a closure, optionally restricted to a domain.
pub struct FnColoring<F> {
    colors: u32,
    domain: Option<FinSet>,
    f: F,
}

impl<F: Fn(u64, u64) -> u32 + Sync> FnColoring<F> {
    /// `f` receives `x < y` and must return a color below `colors`.
    pub fn new(colors: u32, f: F) -> Self {
        FnColoring {
            colors,
            domain: None,
            f,
        }
    }

    pub fn on(domain: FinSet, colors: u32, f: F) -> Self {
        FnColoring {
            colors,
            domain: Some(domain),
            f,
        }
    }

    pub fn materialize(&self, ground: FinSet) -> Result<PairColoring> {
        PairColoring::from_fn(ground, self.colors, |x, y| (self.f)(x, y))
    }
}

impl<F: Fn(u64, u64) -> u32 + Sync> Coloring for FnColoring<F> {
    fn color_count(&self) -> u32 {
        self.colors
    }

    fn contains(&self, x: u64) -> bool {
        self.domain.as_ref().is_none_or(|d| d.contains(x))
    }

    fn color(&self, x: u64, y: u64) -> u32 {
        let (x, y) = if x < y { (x, y) } else { (y, x) };
        (self.f)(x, y)
    }
}

/// SplitMix64 finalizer; a keyed hash for reproducible pseudo-random colorings.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce5_e9b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A pseudo-random coloring of all pairs of naturals, fixed by `seed`.
pub fn hashed_coloring(seed: u64, colors: u32) -> FnColoring<impl Fn(u64, u64) -> u32 + Sync> {
    assert!(colors > 0, "hashed_coloring needs at least one color");
    FnColoring::new(colors, move |x, y| {
        let h = mix64(mix64(seed ^ mix64(x)) ^ y.rotate_left(17));
        (h % colors as u64) as u32
    })
}

fn ground_indices(c: &PairColoring, subset: &FinSet) -> Result<Vec<usize>> {
    subset
        .iter()
        .map(|x| c.ground.index_of(x).ok_or(ColoringError::NotSubset(x)))
        .collect()
}

fn check_subset<C: Coloring + ?Sized>(c: &C, set: &FinSet) -> Result<()> {
    match set.iter().find(|&x| !c.contains(x)) {
        Some(x) => Err(ColoringError::NotSubset(x)),
        None => Ok(()),
    }
}

/// Lexicographically least `(x, y, z)`, `x < y < z` in `set`, where `bad`
/// holds for `(c(x,y), c(y,z), c(x,z))`.
fn first_bad_triple<C: Coloring + ?Sized>(
    c: &C,
    set: &FinSet,
    bad: impl Fn(u32, u32, u32) -> bool,
) -> Result<Option<[u64; 3]>> {
    check_subset(c, set)?;
    let els = set.as_slice();
    let n = els.len();
    for i in 0..n {
        for j in i + 1..n {
            let xy = c.color(els[i], els[j]);
            for k in j + 1..n {
                if bad(xy, c.color(els[j], els[k]), c.color(els[i], els[k])) {
                    return Ok(Some([els[i], els[j], els[k]]));
                }
            }
        }
    }
    Ok(None)
}

/// Least triple violating `c(x,z) ∈ {c(x,y), c(y,z)}`.
pub fn fallow_violation<C: Coloring + ?Sized>(c: &C, set: &FinSet) -> Result<Option<[u64; 3]>> {
    first_bad_triple(c, set, |xy, yz, xz| xz != xy && xz != yz)
}

pub fn is_fallow<C: Coloring + ?Sized>(c: &C, set: &FinSet) -> Result<bool> {
    Ok(fallow_violation(c, set)?.is_none())
}

/// Least triple with `c(x,y) = c(y,z) != c(x,z)`.
pub fn transitive_violation<C: Coloring + ?Sized>(c: &C, set: &FinSet) -> Result<Option<[u64; 3]>> {
    first_bad_triple(c, set, |xy, yz, xz| xy == yz && xz != xy)
}

pub fn is_transitive<C: Coloring + ?Sized>(c: &C, set: &FinSet) -> Result<bool> {
    Ok(transitive_violation(c, set)?.is_none())
}

/// Packs a family of 2-colorings into one coloring whose `i`-th bit is member `i`.
pub fn encode_family(family: &[PairColoring]) -> Result<PairColoring> {
    let Some(first) = family.first() else {
        return Err(ColoringError::GroundMismatch);
    };
    if family.len() > 31 {
        return Err(ColoringError::FamilyTooLarge(family.len()));
    }
    if family
        .iter()
        .any(|m| m.colors != 2 || m.ground != first.ground)
    {
        return Err(ColoringError::GroundMismatch);
    }
    let values = (0..first.values.len())
        .map(|p| {
            family
                .iter()
                .enumerate()
                .map(|(bit, m)| m.values[p] << bit)
                .sum()
        })
        .collect();
    Ok(PairColoring {
        ground: first.ground.clone(),
        colors: 1 << family.len(),
        values,
    })
}

/// The 2-coloring that is 1 exactly where `c` has color `i`.
pub fn indicator(c: &PairColoring, i: u32) -> Result<PairColoring> {
    if i >= c.colors {
        return Err(ColoringError::ColorOutOfRange {
            color: i,
            count: c.colors,
        });
    }
    Ok(PairColoring {
        ground: c.ground.clone(),
        colors: 2,
        values: c.values.iter().map(|&v| (v == i) as u32).collect(),
    })
}

/// Bit `i` of every color of `c`, as a 2-coloring.
pub fn bit_member(c: &PairColoring, i: u32) -> PairColoring {
    PairColoring {
        ground: c.ground.clone(),
        colors: 2,
        values: c.values.iter().map(|&v| (v >> i) & 1).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityEntry {
    pub x: u64,
    pub limit_color: Option<u32>,
    /// Least ground element `m > x` with `c(x, n)` constant for ground `n` in `[m, horizon]`.
    pub witness: Option<u64>,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityProfile {
    pub horizon: u64,
    pub entries: Vec<StabilityEntry>,
}

/// Finite-horizon stability of each row `c(x, ·)`.
///
/// Row `x` counts as stable when its constant tail up to `horizon` holds at
/// least two ground elements; a one-point tail is always constant and says
/// nothing.
pub fn stability_profile(c: &PairColoring, horizon: u64) -> StabilityProfile {
    let els = c.ground.as_slice();
    let end = els.partition_point(|&n| n <= horizon);
    let entries = (0..end)
        .filter(|&i| els[i] < horizon)
        .map(|i| {
            let tail = i + 1..end;
            let last = end - 1;
            let final_color = c.color_at(i, last);
            let mut start = last;
            while start > tail.start && c.color_at(i, start - 1) == final_color {
                start -= 1;
            }
            let stable = start < last;
            StabilityEntry {
                x: els[i],
                limit_color: stable.then_some(final_color),
                witness: stable.then_some(els[start]),
                stable,
            }
        })
        .collect();
    StabilityProfile { horizon, entries }
}

/// The triple coloring `c'(x,y,z) = 1` iff `c` is transitive on `{x,y,z}`.
pub struct TripleColoring<'a> {
    pairs: &'a PairColoring,
}

pub fn triple_coloring(c: &PairColoring) -> TripleColoring<'_> {
    TripleColoring { pairs: c }
}

impl TripleColoring<'_> {
    /// Value at ground positions `i < j < k`.
    pub fn value_at(&self, i: usize, j: usize, k: usize) -> u8 {
        let xy = self.pairs.color_at(i, j);
        let yz = self.pairs.color_at(j, k);
        let xz = self.pairs.color_at(i, k);
        (xy != yz || xz == xy) as u8
    }

    pub fn value(&self, x: u64, y: u64, z: u64) -> Result<u8> {
        let g = &self.pairs.ground;
        let mut pos = [0usize; 3];
        for (p, v) in pos.iter_mut().zip([x, y, z]) {
            *p = g.index_of(v).ok_or(ColoringError::NotSubset(v))?;
        }
        pos.sort_unstable();
        Ok(self.value_at(pos[0], pos[1], pos[2]))
    }

    /// All `((x, y, z), value)` with `x < y < z`, lexicographic.
    pub fn table(&self) -> Vec<([u64; 3], u8)> {
        let els = self.pairs.ground.as_slice();
        let n = els.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    out.push(([els[i], els[j], els[k]], self.value_at(i, j, k)));
                }
            }
        }
        out
    }

    /// A 4-subset of the ground all of whose triples have value 0.
    pub fn zero_homogeneous_quadruple(&self) -> Option<[u64; 4]> {
        let els = self.pairs.ground.as_slice();
        let n = els.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if self.value_at(a, b, c) != 0 {
                        continue;
                    }
                    for d in c + 1..n {
                        if self.value_at(a, b, d) == 0
                            && self.value_at(a, c, d) == 0
                            && self.value_at(b, c, d) == 0
                        {
                            return Some([els[a], els[b], els[c], els[d]]);
                        }
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[u64]) -> FinSet {
        FinSet::new(v.to_vec()).unwrap()
    }

    fn three_point(xy: u32, yz: u32, xz: u32) -> PairColoring {
        PairColoring::from_fn(set(&[1, 2, 3]), 3, |x, y| match (x, y) {
            (1, 2) => xy,
            (2, 3) => yz,
            _ => xz,
        })
        .unwrap()
    }

    #[test]
    fn fallow_examples() {
        let c = PairColoring::constant(FinSet::interval(0, 6).unwrap(), 3, 2).unwrap();
        assert!(is_fallow(&c, c.ground()).unwrap());
        let bad = three_point(0, 0, 1);
        assert!(is_fallow(&bad, &set(&[1, 3])).unwrap());
        assert_eq!(fallow_violation(&bad, bad.ground()).unwrap(), Some([1, 2, 3]));
        assert_eq!(
            fallow_violation(&bad, &set(&[1, 9])),
            Err(ColoringError::NotSubset(9))
        );
    }

    #[test]
    fn transitive_examples() {
        let c = PairColoring::constant(FinSet::interval(0, 4).unwrap(), 1, 0).unwrap();
        assert!(is_transitive(&c, c.ground()).unwrap());
        let rainbow = three_point(0, 1, 2);
        assert!(is_transitive(&rainbow, rainbow.ground()).unwrap());
        assert!(!is_fallow(&rainbow, rainbow.ground()).unwrap());
        let bad = three_point(0, 0, 1);
        assert_eq!(transitive_violation(&bad, bad.ground()).unwrap(), Some([1, 2, 3]));
    }

    #[test]
    fn least_violation_is_lexicographic() {
        let g = FinSet::interval(0, 5).unwrap();
        // Violations at (1,2,4) and (0,3,5) etc.; the least must come first.
        let c = PairColoring::from_fn(g.clone(), 2, |x, y| ((x == 1 && y == 4) || (x == 0 && y == 5)) as u32)
            .unwrap();
        assert_eq!(transitive_violation(&c, &g).unwrap(), Some([0, 1, 5]));
    }

    #[test]
    fn encode_and_indicator_examples() {
        let g = set(&[1, 2, 3]);
        let ones = PairColoring::constant(g.clone(), 2, 1).unwrap();
        let enc = encode_family(std::slice::from_ref(&ones)).unwrap();
        assert!(enc.values().iter().all(|&v| v == 1));
        let zeros = PairColoring::constant(g.clone(), 2, 0).unwrap();
        let enc = encode_family(&[ones.clone(), zeros]).unwrap();
        assert_eq!(enc.color_count(), 4);
        assert!(enc.values().iter().all(|&v| v == 1));
        let other = PairColoring::constant(set(&[1, 2]), 2, 0).unwrap();
        assert_eq!(encode_family(&[ones, other]), Err(ColoringError::GroundMismatch));

        let c = PairColoring::from_fn(g, 2, |x, y| (x == 1 && y == 3) as u32).unwrap();
        // Packed order: (1,2), (1,3), (2,3) -> values (0,1,0).
        assert_eq!(c.values(), &[0, 1, 0]);
        assert_eq!(indicator(&c, 0).unwrap().values(), &[1, 0, 1]);
        assert!(matches!(indicator(&c, 2), Err(ColoringError::ColorOutOfRange { .. })));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let c = three_point(0, 2, 1);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"ground":[1,2,3],"colors":3,"pairs":[[1,2,0],[1,3,1],[2,3,2]]}"#);
        assert_eq!(serde_json::from_str::<PairColoring>(&json).unwrap(), c);
        let missing = r#"{"ground":[1,2,3],"colors":3,"pairs":[[1,2,0],[1,3,1]]}"#;
        assert!(serde_json::from_str::<PairColoring>(missing).is_err());
        let dup = r#"{"ground":[1,2],"colors":3,"pairs":[[1,2,0],[1,2,1]]}"#;
        assert!(serde_json::from_str::<PairColoring>(dup).is_err());
        let range = r#"{"ground":[1,2],"colors":2,"pairs":[[1,2,5]]}"#;
        assert!(serde_json::from_str::<PairColoring>(range).is_err());
        let reversed = r#"{"ground":[1,2],"colors":2,"pairs":[[2,1,0]]}"#;
        assert!(serde_json::from_str::<PairColoring>(reversed).is_err());
    }

    #[test]
    fn rank_enumeration_covers_space() {
        let g = set(&[0, 1, 2]);
        let all: std::collections::HashSet<Vec<u32>> = (0..27)
            .map(|r| PairColoring::from_rank(g.clone(), 3, r).unwrap().values().to_vec())
            .collect();
        assert_eq!(all.len(), 27);
    }

    #[test]
    fn stability_examples() {
        let g = FinSet::interval(0, 20).unwrap();
        let by_x = PairColoring::from_fn(g.clone(), 3, |x, _| (x % 3) as u32).unwrap();
        let p = stability_profile(&by_x, 20);
        for e in &p.entries {
            if e.x < 19 {
                assert_eq!(e.witness, Some(e.x + 1));
                assert_eq!(e.limit_color, Some((e.x % 3) as u32));
            }
        }
        let parity = PairColoring::from_fn(g.clone(), 2, |_, y| (y % 2) as u32).unwrap();
        assert!(stability_profile(&parity, 20).entries.iter().all(|e| !e.stable && e.witness.is_none()));
        let settle0 = PairColoring::from_fn(FinSet::interval(0, 20).unwrap(), 2, |_, y| {
            if y >= 10 { 0 } else { (y % 2 == 1) as u32 }
        })
        .unwrap();
        for e in stability_profile(&settle0, 20).entries.iter().filter(|e| e.x < 9) {
            assert_eq!(e.witness, Some(10));
        }
    }

    #[test]
    fn triple_coloring_examples() {
        let c = PairColoring::constant(FinSet::interval(0, 5).unwrap(), 2, 1).unwrap();
        assert!(triple_coloring(&c).table().iter().all(|(_, v)| *v == 1));
        let bad = three_point(0, 0, 1);
        assert_eq!(triple_coloring(&bad).value(1, 2, 3).unwrap(), 0);
        assert_eq!(triple_coloring(&bad).value(3, 1, 2).unwrap(), 0);
        assert!(triple_coloring(&bad).value(1, 2, 7).is_err());
    }

    #[test]
    fn hashed_coloring_is_deterministic() {
        let a = hashed_coloring(7, 4);
        let b = hashed_coloring(7, 4);
        let c = hashed_coloring(8, 4);
        let same = (4..200u64).all(|y| a.color(3, y) == b.color(y, 3));
        assert!(same);
        assert!((4..200u64).any(|y| a.color(3, y) != c.color(3, y)));
        assert!((4..200u64).all(|y| a.color(3, y) < 4));
    }
}
