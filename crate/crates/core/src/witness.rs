//! Constructive extractors: the min-homogeneous fallow chain, stabilization
//! of a pool against anchors, groupings, and EM witnesses for ω^n.
//!
//! Every extractor checks its own output before returning it. A failed
//! check is reported as [`WitnessError::VerificationFailed`]; it means the
//! construction is wrong, not that the input was too small.

use serde::Serialize;
use thiserror::Error;

use crate::coloring::{fallow_violation, transitive_violation, Coloring, ColoringError};
use crate::finset::{FinSet, SetError};
use crate::largeness::{is_alpha_large, residue, shortest_large_prefix, LargenessError};
use crate::ordinal::{Ordinal, DEFAULT_COEFFICIENT_CAP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error("insufficient input: {0}")]
    InsufficientInput(String),
    #[error("greedy chain stalled after {picks} of {needed} picks")]
    ChainStalled { picks: usize, needed: usize },
    #[error("split failed at round {round}: neither side is {demand}-large")]
    SplitFailed { round: usize, demand: Ordinal },
    #[error("grouping shortfall: {reason}")]
    GroupingShortfall { reason: String, partial: Grouping },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Largeness(#[from] LargenessError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Set(#[from] SetError),
}

impl WitnessError {
    /// Errors that mean "the input is too small", as opposed to a bug.
    pub fn is_shortfall(&self) -> bool {
        matches!(
            self,
            WitnessError::InsufficientInput(_)
                | WitnessError::ChainStalled { .. }
                | WitnessError::SplitFailed { .. }
                | WitnessError::GroupingShortfall { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, WitnessError>;

/// Hypotheses under which the extractors are stated, recorded in certificates.
pub mod nominal {
    pub const BASE: &[&str] = &["X is w^3-large", "min X > 3", "P: [X]^2 -> min X"];
    pub const STABILIZE: &[&str] = &[
        "X is w^(n+1)-large and w^3-sparse",
        "4^(c^2) <= min X",
        "|anchors| <= c",
        "P: [anchors u X]^2 -> c",
    ];
    pub const GROUPING: &[&str] = &["X is w^(n+6k)-large and w^3-sparse", "P: [X]^2 -> min X"];
    pub const EM: &[&str] = &["X is w^(18n)-large", "min X > 3", "P: [X]^2 -> min X"];
}

fn check_domain<C: Coloring + ?Sized>(p: &C, set: &FinSet) -> Result<()> {
    match set.iter().find(|&x| !p.contains(x)) {
        Some(x) => Err(ColoringError::NotSubset(x).into()),
        None => Ok(()),
    }
}

fn check_colors_below_min<C: Coloring + ?Sized>(p: &C, set: &FinSet) -> Result<()> {
    let a = set.min()?;
    if u64::from(p.color_count()) > a {
        return Err(WitnessError::Precondition(format!(
            "coloring uses {} colors but min X = {a}",
            p.color_count()
        )));
    }
    Ok(())
}

/// Builds the chain `a_0 < a_1 < … < a_a`, `a = min X`, where each `a_i` is
/// the least remaining element and the remainder keeps only the largest
/// color class of `P(a_i, ·)` (least color on ties).
///
/// With `strict`, requires `|X| > (a+1)^(a+1)`, which makes every class
/// choice leave enough room. The result is min-homogeneous, hence fallow and
/// transitive, and ω-large.
pub fn fallow_base_witness<C: Coloring + ?Sized>(set: &FinSet, p: &C, strict: bool) -> Result<FinSet> {
    let a = set.min()?;
    check_domain(p, set)?;
    check_colors_below_min(p, set)?;
    let needed = usize::try_from(a)
        .ok()
        .and_then(|a| a.checked_add(1))
        .ok_or_else(|| WitnessError::InsufficientInput(format!("min X = {a} is too large")))?;
    if strict {
        let bound = u32::try_from(needed)
            .ok()
            .and_then(|e| (needed as u128).checked_pow(e));
        let enough = matches!(bound, Some(b) if (set.len() as u128) > b);
        if !enough {
            return Err(WitnessError::InsufficientInput(format!(
                "|X| = {} is not above ({needed})^{needed}",
                set.len()
            )));
        }
    }

    let colors = p.color_count() as usize;
    let mut pool: Vec<u64> = set.as_slice().to_vec();
    let mut chain = Vec::with_capacity(needed);
    let mut counts = vec![0usize; colors];
    while chain.len() < needed {
        let Some((&head, rest)) = pool.split_first() else {
            return Err(WitnessError::ChainStalled {
                picks: chain.len(),
                needed,
            });
        };
        chain.push(head);
        if chain.len() == needed {
            break;
        }
        counts.iter_mut().for_each(|c| *c = 0);
        for &b in rest {
            counts[p.color(head, b) as usize] += 1;
        }
        // max_by_key keeps the last maximum; iterate in reverse for the least color.
        let (best, _) = counts
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|&(_, &n)| n)
            .expect("at least one color");
        pool = rest
            .iter()
            .copied()
            .filter(|&b| p.color(head, b) as usize == best)
            .collect();
    }

    let witness = FinSet::new(chain)?;
    verify_base_witness(&witness, a, p)?;
    Ok(witness)
}

fn verify_base_witness<C: Coloring + ?Sized>(y: &FinSet, a: u64, p: &C) -> Result<()> {
    let fail = |what: String| Err(WitnessError::VerificationFailed(what));
    if y.len() as u64 != a + 1 || y.min()? != a {
        return fail(format!("chain {y} does not have {} elements from {a}", a + 1));
    }
    if !is_alpha_large(y, &Ordinal::omega())? {
        return fail(format!("chain {y} is not w-large"));
    }
    let els = y.as_slice();
    for i in 0..els.len() {
        for j in i + 1..els.len() {
            if p.color(els[i], els[j]) != p.color(els[i], els[els.len() - 1]) {
                return fail(format!("chain is not min-homogeneous at {}", els[i]));
            }
        }
    }
    if let Some(t) = fallow_violation(p, y)? {
        return fail(format!("chain is not fallow at {t:?}"));
    }
    if let Some(t) = transitive_violation(p, y)? {
        return fail(format!("chain is not transitive at {t:?}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnchorSide {
    /// Every anchor lies below `min X`; stabilizes `P(x, y)` for anchor `x`.
    AnchorsBelow,
    /// Every anchor lies above `max X`; stabilizes `P(y, x)`.
    AnchorsAbove,
}

/// `ω^n · 4^e`, or a resource error if the coefficient does not fit the cap.
fn scaled_power(n: u32, e: u64) -> Result<Ordinal> {
    let coefficient = u32::try_from(e)
        .ok()
        .and_then(|e| 4u64.checked_pow(e))
        .filter(|&k| k <= DEFAULT_COEFFICIENT_CAP)
        .ok_or_else(|| {
            LargenessError::ResourceLimit(format!("4^{e} exceeds the coefficient cap"))
        })?;
    Ok(Ordinal::monomial(n, coefficient))
}

/// Shrinks `X \ {min X}` to an ω^n-large `Y` on which every anchor sees a
/// single color.
///
/// With `c = max(|anchors|, colors)` (0 when there are no anchors), round
/// `i = j1·c + j2` splits the pool by whether `P(anchor j1, y) = j2` and
/// keeps the side that is `ω^n·4^(c²-i-1)`-large, preferring the equal side.
pub fn stabilize<C: Coloring + ?Sized>(
    set: &FinSet,
    anchors: &FinSet,
    p: &C,
    n: u32,
    side: AnchorSide,
) -> Result<FinSet> {
    let lo = set.min()?;
    let hi = set.max()?;
    check_domain(p, set)?;
    check_domain(p, anchors)?;
    let placed = match side {
        AnchorSide::AnchorsBelow => anchors.max().map_or(true, |m| m < lo),
        AnchorSide::AnchorsAbove => anchors.min().map_or(true, |m| m > hi),
    };
    if !placed {
        return Err(WitnessError::Precondition(format!(
            "anchors {anchors} are not on the {side:?} side of X"
        )));
    }
    let c = if anchors.is_empty() {
        0
    } else {
        anchors.len().max(p.color_count() as usize)
    };
    let total = (c * c) as u64;
    let mut pool = set.without_min();
    for (j1, x) in anchors.iter().enumerate() {
        for j2 in 0..c {
            let round = j1 * c + j2;
            let demand = scaled_power(n, total - round as u64 - 1)?;
            let equal = pool.filter(|y| p.color(x, y) as usize == j2);
            if is_alpha_large(&equal, &demand)? {
                pool = equal;
                continue;
            }
            let other = pool.filter(|y| p.color(x, y) as usize != j2);
            if is_alpha_large(&other, &demand)? {
                pool = other;
            } else {
                return Err(WitnessError::SplitFailed { round, demand });
            }
        }
    }
    if !is_alpha_large(&pool, &Ordinal::omega_pow(n))? {
        return Err(WitnessError::InsufficientInput(format!(
            "X \\ {{min X}} is not w^{n}-large"
        )));
    }
    for x in anchors.iter() {
        if let Some(first) = pool.iter().next() {
            let c0 = p.color(x, first);
            if let Some(y) = pool.iter().find(|&y| p.color(x, y) != c0) {
                return Err(WitnessError::VerificationFailed(format!(
                    "anchor {x} sees colors {c0} and {} (at {y})",
                    p.color(x, y)
                )));
            }
        }
    }
    Ok(pool)
}

/// A sequence of blocks meant to form an (α, β)-grouping for some coloring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Grouping {
    pub blocks: Vec<FinSet>,
    pub alpha: Ordinal,
    pub beta: Ordinal,
}

impl Grouping {
    /// `{max F_i}`; empty blocks are skipped.
    pub fn max_set(&self) -> FinSet {
        FinSet::from_unsorted(self.blocks.iter().filter_map(|b| b.max().ok()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum GroupingViolation {
    /// Condition 1: `max F_i < min F_j` fails for consecutive blocks, or a block is empty.
    Order { block: usize, detail: String },
    /// Condition 2.
    BlockNotLarge { block: usize, residue: Ordinal },
    /// Condition 3.
    MaxSetNotLarge { residue: Ordinal },
    /// Condition 4: two cross pairs between blocks `i < j` with different colors.
    Incoherent {
        i: usize,
        j: usize,
        first: [u64; 3],
        second: [u64; 3],
    },
    NotInDomain { element: u64 },
}

impl GroupingViolation {
    pub fn condition(&self) -> u8 {
        match self {
            GroupingViolation::Order { .. } => 1,
            GroupingViolation::BlockNotLarge { .. } => 2,
            GroupingViolation::MaxSetNotLarge { .. } => 3,
            GroupingViolation::Incoherent { .. } => 4,
            GroupingViolation::NotInDomain { .. } => 0,
        }
    }
}

/// Checks all four grouping conditions; an empty list means `g` is a grouping for `p`.
pub fn verify_grouping<C: Coloring + ?Sized>(g: &Grouping, p: &C) -> Result<Vec<GroupingViolation>> {
    let mut out = Vec::new();
    for block in &g.blocks {
        if let Some(x) = block.iter().find(|&x| !p.contains(x)) {
            out.push(GroupingViolation::NotInDomain { element: x });
            return Ok(out);
        }
    }
    for (i, block) in g.blocks.iter().enumerate() {
        if block.is_empty() {
            out.push(GroupingViolation::Order {
                block: i,
                detail: "empty block".into(),
            });
        }
    }
    for i in 1..g.blocks.len() {
        if let (Ok(prev_max), Ok(min)) = (g.blocks[i - 1].max(), g.blocks[i].min()) {
            if prev_max >= min {
                out.push(GroupingViolation::Order {
                    block: i,
                    detail: format!("max of block {} is {prev_max} >= min {min}", i - 1),
                });
            }
        }
    }
    for (i, block) in g.blocks.iter().enumerate() {
        let left = residue(block.iter(), &g.alpha)?;
        if !left.is_zero() {
            out.push(GroupingViolation::BlockNotLarge {
                block: i,
                residue: left,
            });
        }
    }
    let left = residue(g.max_set().iter(), &g.beta)?;
    if !left.is_zero() {
        out.push(GroupingViolation::MaxSetNotLarge { residue: left });
    }
    for i in 0..g.blocks.len() {
        for j in i + 1..g.blocks.len() {
            let (Ok(x0), Ok(y0)) = (g.blocks[i].min(), g.blocks[j].min()) else {
                continue;
            };
            let reference = p.color(x0, y0);
            let clash = g.blocks[i].iter().find_map(|x| {
                g.blocks[j]
                    .iter()
                    .find(|&y| p.color(x, y) != reference)
                    .map(|y| [x, y, u64::from(p.color(x, y))])
            });
            if let Some(second) = clash {
                out.push(GroupingViolation::Incoherent {
                    i,
                    j,
                    first: [x0, y0, u64::from(reference)],
                    second,
                });
            }
        }
    }
    Ok(out)
}

/// Knobs for [`build_grouping_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupingPlan {
    /// For `k >= 2` the outer grouping has blocks `ω^(n + outer_offset·(k-1))`-large.
    pub outer_offset: u32,
}

impl Default for GroupingPlan {
    fn default() -> Self {
        GroupingPlan { outer_offset: 6 }
    }
}

pub fn build_grouping<C: Coloring + ?Sized>(set: &FinSet, p: &C, n: u32, k: u32) -> Result<Grouping> {
    build_grouping_with(set, p, n, k, &GroupingPlan::default())
}

/// Builds an `(ω^n, ω^k)`-grouping for `p` inside `set`.
///
/// `k <= 1` carves blocks left to right: each block is the shortest
/// ω^n-large prefix of the pool, after which the pool keeps only the
/// elements that see one common color from every element of that block (the
/// largest such class, least color on ties). `k >= 2` follows the induction
/// on `k`: an outer `(ω^(n+offset·(k-1)), ω)`-grouping `Y_0, …, Y_l`, then
/// `(ω^n, ω^(k-1))`-groupings inside each `Y_i`, `i >= 1`, concatenated
/// after `Y_0`. The result is verified before it is returned.
pub fn build_grouping_with<C: Coloring + ?Sized>(
    set: &FinSet,
    p: &C,
    n: u32,
    k: u32,
    plan: &GroupingPlan,
) -> Result<Grouping> {
    check_domain(p, set)?;
    check_colors_below_min(p, set)?;
    let grouping = if k <= 1 {
        carve_grouping(set, p, n, k)?
    } else {
        let outer_exp = plan
            .outer_offset
            .checked_mul(k - 1)
            .and_then(|e| e.checked_add(n))
            .ok_or_else(|| WitnessError::Precondition("exponent overflow".into()))?;
        let outer = build_grouping_with(set, p, outer_exp, 1, plan)?;
        let mut blocks = vec![outer.blocks[0].clone()];
        for y in &outer.blocks[1..] {
            match build_grouping_with(y, p, n, k - 1, plan) {
                Ok(inner) => blocks.extend(inner.blocks),
                Err(WitnessError::GroupingShortfall { reason, partial }) => {
                    blocks.extend(partial.blocks);
                    return Err(WitnessError::GroupingShortfall {
                        reason: format!("inside outer block {y}: {reason}"),
                        partial: Grouping {
                            blocks,
                            alpha: Ordinal::omega_pow(n),
                            beta: Ordinal::omega_pow(k),
                        },
                    });
                }
                Err(e) => return Err(e),
            }
        }
        Grouping {
            blocks,
            alpha: Ordinal::omega_pow(n),
            beta: Ordinal::omega_pow(k),
        }
    };
    let violations = verify_grouping(&grouping, p)?;
    if !violations.is_empty() {
        return Err(WitnessError::VerificationFailed(format!(
            "built grouping violates {:?}",
            violations.iter().map(|v| v.condition()).collect::<Vec<_>>()
        )));
    }
    Ok(grouping)
}

fn carve_grouping<C: Coloring + ?Sized>(set: &FinSet, p: &C, n: u32, k: u32) -> Result<Grouping> {
    let alpha = Ordinal::omega_pow(n);
    let beta = Ordinal::omega_pow(k);
    let colors = p.color_count() as usize;
    let mut pool: Vec<u64> = set.as_slice().to_vec();
    let mut blocks: Vec<FinSet> = Vec::new();
    let mut maxes: Vec<u64> = Vec::new();
    loop {
        if residue(maxes.iter().copied(), &beta)?.is_zero() {
            break;
        }
        if let Some(last) = blocks.last() {
            // Elements of the pool that see the same color from all of `last`.
            let mut classes: Vec<Vec<u64>> = vec![Vec::new(); colors];
            for &y in &pool {
                let mut it = last.iter();
                let c0 = p.color(it.next().expect("blocks are nonempty"), y);
                if it.all(|x| p.color(x, y) == c0) {
                    classes[c0 as usize].push(y);
                }
            }
            let best = (0..colors)
                .rev()
                .max_by_key(|&c| classes[c].len())
                .expect("at least one color");
            pool = std::mem::take(&mut classes[best]);
        }
        let Some(len) = shortest_large_prefix(&pool, &alpha, DEFAULT_COEFFICIENT_CAP)?.filter(|&l| l > 0)
        else {
            return Err(WitnessError::GroupingShortfall {
                reason: format!(
                    "pool of {} elements has no w^{n}-large prefix after {} blocks",
                    pool.len(),
                    blocks.len()
                ),
                partial: Grouping {
                    blocks,
                    alpha,
                    beta,
                },
            });
        };
        let block: Vec<u64> = pool.drain(..len).collect();
        maxes.push(*block.last().expect("nonempty"));
        blocks.push(FinSet::new(block)?);
    }
    Ok(Grouping {
        blocks,
        alpha,
        beta,
    })
}

/// Chooses an ω-large subset of a set on which a coloring is fallow.
pub trait BaseStrategy: Sync {
    fn name(&self) -> &'static str;

    fn witness(&self, set: &FinSet, p: &dyn Coloring) -> Result<FinSet>;
}

/// [`fallow_base_witness`] in strict mode.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyChain;

impl BaseStrategy for GreedyChain {
    fn name(&self) -> &'static str {
        "greedy-chain"
    }

    fn witness(&self, set: &FinSet, p: &dyn Coloring) -> Result<FinSet> {
        fallow_base_witness(set, p, true)
    }
}

/// Returns its input unchanged. Only sound when the coloring is already
/// fallow on the input, e.g. constant.
#[derive(Debug, Clone, Copy, Default)]
pub struct WholeSet;

impl BaseStrategy for WholeSet {
    fn name(&self) -> &'static str {
        "whole-set"
    }

    fn witness(&self, set: &FinSet, _p: &dyn Coloring) -> Result<FinSet> {
        Ok(set.clone())
    }
}

/// Largeness parameters for the `n >= 2` step of [`em_witness_with`]: the
/// grouping used at level `n` is `(ω^(block_scale·(n-2) + block_offset), ω^maxset_exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EmPlan {
    pub block_scale: u32,
    pub block_offset: u32,
    pub maxset_exponent: u32,
    pub grouping: GroupingPlan,
}

impl Default for EmPlan {
    fn default() -> Self {
        EmPlan {
            block_scale: 18,
            block_offset: 4,
            maxset_exponent: 3,
            grouping: GroupingPlan::default(),
        }
    }
}

impl EmPlan {
    /// Blocks just large enough for the recursion: `(ω^(n-1), ω)`.
    pub fn minimal() -> Self {
        EmPlan {
            block_scale: 1,
            block_offset: 1,
            maxset_exponent: 1,
            grouping: GroupingPlan { outer_offset: 6 },
        }
    }
}

pub fn em_witness<C: Coloring>(set: &FinSet, p: &C, n: u32, base: &dyn BaseStrategy) -> Result<FinSet> {
    em_witness_with(set, p, n, base, &EmPlan::default())
}

/// An ω^n-large `H ⊆ X` on which `p` is fallow.
///
/// `n = 1` asks `base` directly. For `n >= 2`: build a grouping `Y_0 < … < Y_l`,
/// let `base` pick a fallow subset of `{max Y_i}`, recurse into each picked
/// block for an ω^(n-1)-large fallow `Z_j`, and return
/// `{max Z_0} ∪ Z_1 ∪ … ∪ Z_l'`.
pub fn em_witness_with<C: Coloring>(
    set: &FinSet,
    p: &C,
    n: u32,
    base: &dyn BaseStrategy,
    plan: &EmPlan,
) -> Result<FinSet> {
    check_colors_below_min(p, set)?;
    let h = match n {
        0 => FinSet::empty(),
        1 => base.witness(set, p)?,
        _ => {
            let block_exp = plan
                .block_scale
                .checked_mul(n - 2)
                .and_then(|e| e.checked_add(plan.block_offset))
                .ok_or_else(|| WitnessError::Precondition("exponent overflow".into()))?;
            let grouping = build_grouping_with(set, p, block_exp, plan.maxset_exponent, &plan.grouping)?;
            let maxes = grouping.max_set();
            let picked = base.witness(&maxes, p)?;
            let mut h: Vec<u64> = Vec::new();
            for (j, m) in picked.iter().enumerate() {
                let block = grouping
                    .blocks
                    .iter()
                    .find(|b| b.max().ok() == Some(m))
                    .ok_or_else(|| {
                        WitnessError::VerificationFailed(format!("{m} is not a block maximum"))
                    })?;
                let z = em_witness_with(block, p, n - 1, base, plan)?;
                if j == 0 {
                    h.push(z.max()?);
                } else {
                    h.extend(z.iter());
                }
            }
            FinSet::new(h)?
        }
    };
    if let Some(t) = fallow_violation(p, &h)? {
        return Err(WitnessError::VerificationFailed(format!(
            "coloring is not fallow on the witness at {t:?}"
        )));
    }
    if !is_alpha_large(&h, &Ordinal::omega_pow(n))? {
        return Err(WitnessError::VerificationFailed(format!(
            "witness of {} elements is not w^{n}-large",
            h.len()
        )));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{hashed_coloring, is_fallow, is_transitive, FnColoring, PairColoring};

    fn range(a: u64, b: u64) -> FinSet {
        FinSet::interval(a, b).unwrap()
    }

    fn set(v: &[u64]) -> FinSet {
        FinSet::new(v.to_vec()).unwrap()
    }

    /// Independent re-implementation of the chain, for cross-checking.
    fn trace_chain(x: &[u64], colors: u32, p: impl Fn(u64, u64) -> u32) -> Vec<u64> {
        let a = x[0];
        let mut rest = x.to_vec();
        let mut out = vec![];
        for _ in 0..=a {
            let head = rest.remove(0);
            out.push(head);
            let mut best: Option<(usize, u32)> = None;
            for c in 0..colors {
                let size = rest.iter().filter(|&&b| p(head, b) == c).count();
                if best.is_none_or(|(s, _)| size > s) {
                    best = Some((size, c));
                }
            }
            let c = best.unwrap().1;
            rest.retain(|&b| p(head, b) == c);
            if out.len() as u64 == a + 1 {
                break;
            }
        }
        out
    }

    #[test]
    fn base_witness_constant() {
        let p = FnColoring::new(4, |_, _| 0);
        let y = fallow_base_witness(&range(4, 3130), &p, true).unwrap();
        assert_eq!(y, range(4, 8));
    }

    #[test]
    fn base_witness_matches_trace() {
        let f = |_x: u64, y: u64| (y % 4) as u32;
        let p = FnColoring::new(4, f);
        let y = fallow_base_witness(&range(4, 3130), &p, true).unwrap();
        let expected = trace_chain(range(4, 3130).as_slice(), 4, f);
        assert_eq!(y.as_slice(), expected.as_slice());
        assert!(is_fallow(&p, &y).unwrap() && is_transitive(&p, &y).unwrap());
    }

    #[test]
    fn base_witness_on_hashed_colorings_matches_trace() {
        for seed in 0..5 {
            let p = hashed_coloring(seed, 4);
            let y = fallow_base_witness(&range(4, 3130), &p, true).unwrap();
            let expected = trace_chain(range(4, 3130).as_slice(), 4, |a, b| p.color(a, b));
            assert_eq!(y.as_slice(), expected.as_slice());
        }
    }

    #[test]
    fn base_witness_errors() {
        let p = FnColoring::new(4, |_, _| 0);
        assert!(matches!(
            fallow_base_witness(&set(&[4, 5, 6]), &p, true),
            Err(WitnessError::InsufficientInput(_))
        ));
        assert!(matches!(
            fallow_base_witness(&set(&[4, 5, 6]), &p, false),
            Err(WitnessError::ChainStalled { picks: 3, needed: 5 })
        ));
        let many = FnColoring::new(9, |_, _| 0);
        assert!(matches!(
            fallow_base_witness(&range(4, 3130), &many, true),
            Err(WitnessError::Precondition(_))
        ));
        let dom = PairColoring::constant(range(4, 10), 4, 0).unwrap();
        assert!(matches!(
            fallow_base_witness(&range(4, 11), &dom, false),
            Err(WitnessError::Coloring(ColoringError::NotSubset(11)))
        ));
    }

    #[test]
    fn base_witness_non_strict_small_input() {
        // Constant coloring: the chain is just the first a+1 elements.
        let p = FnColoring::new(4, |_, _| 1);
        let y = fallow_base_witness(&range(4, 20), &p, false).unwrap();
        assert_eq!(y, range(4, 8));
    }

    #[test]
    fn stabilize_without_anchors() {
        let p = FnColoring::new(2, |_, _| 0);
        let y = stabilize(&range(16, 30), &FinSet::empty(), &p, 0, AnchorSide::AnchorsBelow).unwrap();
        assert_eq!(y, range(17, 30));
    }

    #[test]
    fn stabilize_constant_two_anchors() {
        let p = FnColoring::new(2, |_, _| 0);
        let y = stabilize(&range(16, 300), &set(&[1, 2]), &p, 0, AnchorSide::AnchorsBelow).unwrap();
        assert_eq!(y, range(17, 300));
    }

    #[test]
    fn stabilize_splits_by_anchor_color() {
        // Anchor 1 sees parity, anchor 2 sees y mod 3 == 0.
        let p = FnColoring::new(2, |x, y| match x {
            1 => (y % 2) as u32,
            2 => (y % 3 == 0) as u32,
            _ => 0,
        });
        let y = stabilize(&range(16, 400), &set(&[1, 2]), &p, 0, AnchorSide::AnchorsBelow).unwrap();
        // Trace: round 0 keeps evens (192 >= 64), round 1 keeps the
        // complement of odds, round 2 keeps non-multiples of 3 (127 >= 4),
        // round 3 keeps them again.
        let expected = range(17, 400).filter(|y| y % 2 == 0 && y % 3 != 0);
        assert_eq!(y, expected);
    }

    #[test]
    fn stabilize_failures() {
        let p = FnColoring::new(2, |_, _| 0);
        let err = stabilize(&range(16, 26), &set(&[1, 2]), &p, 0, AnchorSide::AnchorsBelow).unwrap_err();
        assert!(matches!(err, WitnessError::SplitFailed { round: 0, .. }));
        let err = stabilize(&range(16, 300), &set(&[1, 400]), &p, 0, AnchorSide::AnchorsBelow).unwrap_err();
        assert!(matches!(err, WitnessError::Precondition(_)));
        let above = stabilize(&range(16, 300), &set(&[400, 401]), &p, 0, AnchorSide::AnchorsAbove).unwrap();
        assert_eq!(above, range(17, 300));
    }

    #[test]
    fn verify_grouping_examples() {
        let p = FnColoring::new(2, |_, _| 1);
        let singletons = Grouping {
            blocks: (4..9).map(|x| set(&[x])).collect(),
            alpha: Ordinal::finite(1),
            beta: Ordinal::finite(5),
        };
        assert!(verify_grouping(&singletons, &p).unwrap().is_empty());

        let overlapping = Grouping {
            blocks: vec![set(&[4, 6]), set(&[5, 7])],
            alpha: Ordinal::finite(1),
            beta: Ordinal::finite(1),
        };
        let v = verify_grouping(&overlapping, &p).unwrap();
        assert!(v.iter().any(|v| v.condition() == 1));

        let short = Grouping {
            blocks: vec![set(&[4]), set(&[5])],
            alpha: Ordinal::finite(1),
            beta: Ordinal::omega(),
        };
        let v = verify_grouping(&short, &p).unwrap();
        // ω[4][5] = 3.
        assert_eq!(v, vec![GroupingViolation::MaxSetNotLarge { residue: Ordinal::finite(3) }]);

        let q = FnColoring::new(2, |x, y| (x == 4 && y == 7) as u32);
        let incoherent = Grouping {
            blocks: vec![set(&[4, 5]), set(&[6, 7])],
            alpha: Ordinal::finite(1),
            beta: Ordinal::finite(1),
        };
        let v = verify_grouping(&incoherent, &q).unwrap();
        assert_eq!(
            v,
            vec![GroupingViolation::Incoherent { i: 0, j: 1, first: [4, 6, 0], second: [4, 7, 1] }]
        );
    }

    #[test]
    fn grouping_k0_and_k1() {
        let p = FnColoring::new(1, |_, _| 0);
        let g = build_grouping(&range(16, 200), &p, 0, 0).unwrap();
        assert_eq!(g.blocks, vec![set(&[16])]);
        let g = build_grouping(&range(16, 200), &p, 0, 1).unwrap();
        assert_eq!(g.blocks.len(), 17);
        assert_eq!(g.max_set(), range(16, 32));
        let g = build_grouping(&range(4, 2600), &p, 1, 1).unwrap();
        assert_eq!(g.blocks[0], range(4, 8));
        assert_eq!(g.blocks.len(), 9);
        assert_eq!(g.blocks[8].max().unwrap(), 2558);
    }

    #[test]
    fn grouping_shortfall_on_adversarial_coloring() {
        let p = FnColoring::new(16, |x, y| ((x + y) % 16) as u32);
        let err = build_grouping(&range(16, 45), &p, 0, 1).unwrap_err();
        match err {
            WitnessError::GroupingShortfall { partial, .. } => {
                assert!(!partial.blocks.is_empty());
                assert!(partial.blocks.len() < 17);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grouping_k2_by_recursion() {
        let p = FnColoring::new(1, |_, _| 0);
        let plan = GroupingPlan { outer_offset: 1 };
        let g = build_grouping_with(&range(2, 94), &p, 0, 2, &plan).unwrap();
        assert_eq!(g.blocks[0], range(2, 4));
        assert_eq!(g.max_set(), FinSet::new([4].into_iter().chain(5..=94).collect()).unwrap());
        assert!(build_grouping(&range(4, 500), &p, 0, 2).unwrap_err().is_shortfall());
    }

    /// Blocks `{3..6}, {7..14}, {15..30}, …`: each the shortest ω-large prefix.
    fn block_of(x: u64) -> u64 {
        let mut lo = 3;
        let mut b = 0;
        loop {
            let hi = 2 * lo;
            if x <= hi {
                return b;
            }
            lo = hi + 1;
            b += 1;
        }
    }

    #[test]
    fn em_witness_n2_with_whole_set_base() {
        let x = range(3, 510);
        let constant = FnColoring::new(1, |_, _| 0);
        let h = em_witness_with(&x, &constant, 2, &WholeSet, &EmPlan::minimal()).unwrap();
        assert_eq!(h.min().unwrap(), 6);
        assert!(is_alpha_large(&h, &Ordinal::omega_pow(2)).unwrap());

        let layered = FnColoring::new(2, |x, y| {
            let (bx, by) = (block_of(x), block_of(y));
            if bx == by { 0 } else { (bx % 2) as u32 }
        });
        let h2 = em_witness_with(&x, &layered, 2, &WholeSet, &EmPlan::minimal()).unwrap();
        assert_eq!(h2, h);
        assert!(is_fallow(&layered, &h2).unwrap());
    }

    #[test]
    fn em_witness_catches_unsound_base() {
        let x = range(3, 510);
        let noisy = hashed_coloring(3, 3);
        let err = em_witness_with(&x, &noisy, 1, &WholeSet, &EmPlan::minimal()).unwrap_err();
        assert!(matches!(err, WitnessError::VerificationFailed(_)));
    }

    #[test]
    fn em_witness_n1_is_base_witness() {
        let p = hashed_coloring(11, 4);
        let x = range(4, 3130);
        assert_eq!(
            em_witness(&x, &p, 1, &GreedyChain).unwrap(),
            fallow_base_witness(&x, &p, true).unwrap()
        );
        let err = em_witness(&x, &p, 2, &GreedyChain).unwrap_err();
        assert!(err.is_shortfall(), "{err:?}");
    }
}
