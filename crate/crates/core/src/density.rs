//! EM-α-largeness and EM-m-density.
//!
//! `X` is EM-α-large when every coloring `P: [X]^2 -> min X` has an α-large
//! `Y ⊆ X` on which `P` is fallow. `X` is EM-0-dense when it is ω-large with
//! `min X > 3`, and EM-(m+1)-dense when
//!
//! 1. every coloring `P: [X]^2 -> min X` is fallow on some EM-m-dense `Y ⊆ X`,
//! 2. every partition of `X` into consecutive blocks `Z_0 < … < Z_{ℓ-1}` with
//!    `ℓ <= min Z_0` has an EM-m-dense block.
//!
//! Clause 2 is checked first: partitions are few compared to colorings, and
//! every counterexample at small scale comes from it. Colorings are
//! enumerated by mixed-radix rank (see [`PairColoring::from_rank`]) so a run
//! can be split into rank ranges and resumed.
//!
//! [`validate`] re-checks false verdicts from the definitions alone.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{pair_count, ColoringError, PairColoring};
use crate::finset::{FinSet, SetError};
use crate::largeness::{is_alpha_large, LargenessError};
use crate::ordinal::Ordinal;

pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DensityError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("enumeration of {needed} {what} exceeds the budget of {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: String,
        budget: u64,
    },
    #[error(transparent)]
    Largeness(#[from] LargenessError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Set(#[from] SetError),
}

pub type Result<T> = std::result::Result<T, DensityError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Exact,
    Randomized,
}

/// How the bound `ℓ <= Z_0` on the number of blocks is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionReading {
    /// `ℓ <= min Z_0`.
    #[default]
    MinBound,
    /// `ℓ <= |Z_0|`.
    CardinalityBound,
}

impl PartitionReading {
    fn admits(self, blocks: usize, first: &[u64]) -> bool {
        match self {
            PartitionReading::MinBound => (blocks as u64) <= first[0],
            PartitionReading::CardinalityBound => blocks <= first.len(),
        }
    }
}

/// Half-open range of coloring ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRange {
    pub start: u64,
    pub end: u64,
}

impl RankRange {
    /// The `index`-th of `count` near-equal slices of `[0, space)`.
    pub fn shard(space: u64, index: u64, count: u64) -> Result<RankRange> {
        if count == 0 || index >= count {
            return Err(DensityError::Precondition(format!(
                "shard index {index} must be below count {count}"
            )));
        }
        let cut = |i: u64| ((space as u128 * i as u128) / count as u128) as u64;
        Ok(RankRange {
            start: cut(index),
            end: cut(index + 1),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityConfig {
    pub mode: Mode,
    pub seed: u64,
    pub samples: u64,
    pub budget: u64,
    pub reading: PartitionReading,
    /// Restricts exact enumeration of the outermost colorings.
    pub ranks: Option<RankRange>,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            mode: Mode::Exact,
            seed: 0,
            samples: 1000,
            budget: DEFAULT_ENUMERATION_BUDGET,
            reading: PartitionReading::MinBound,
            ranks: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryKind {
    EmAlphaLarge,
    EmMDense,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub kind: QueryKind,
    /// The ordinal α or the level m, as text.
    pub parameter: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "kebab-case")]
pub enum Evidence {
    /// Level 0 fails: `min X <= 3` or `X` is not ω-large.
    Base { min: Option<u64>, omega_large: bool },
    /// A coloring with no admissible fallow subset.
    Coloring {
        coloring: PairColoring,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank: Option<u64>,
    },
    /// A partition with no dense block.
    Partition { blocks: Vec<FinSet> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityCertificate {
    pub subject: FinSet,
    pub query: Query,
    pub verdict: Verdict,
    pub evidence: Option<Evidence>,
    pub mode: Mode,
    pub reading: PartitionReading,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// Size of the outermost coloring space, when it fits in 64 bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<u64>,
    /// Ranks examined by an exact run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<RankRange>,
    pub colorings_checked: u64,
}

impl DensityCertificate {
    fn new(subject: &FinSet, query: Query, config: &DensityConfig) -> Self {
        let randomized = config.mode == Mode::Randomized;
        DensityCertificate {
            subject: subject.clone(),
            query,
            verdict: Verdict::Unknown,
            evidence: None,
            mode: config.mode,
            reading: config.reading,
            seed: randomized.then_some(config.seed),
            samples: randomized.then_some(config.samples),
            space: None,
            ranks: None,
            colorings_checked: 0,
        }
    }

    fn refuted(mut self, evidence: Evidence) -> Self {
        self.verdict = Verdict::False;
        self.evidence = Some(evidence);
        self
    }
}

/// Combines certificates of the same query over disjoint rank ranges.
///
/// A counterexample anywhere wins (the least rank if several); otherwise the
/// verdict is true only when the ranges cover the whole space.
pub fn merge_shards(parts: &[DensityCertificate]) -> Result<DensityCertificate> {
    let Some(first) = parts.first() else {
        return Err(DensityError::Precondition("nothing to merge".into()));
    };
    if parts
        .iter()
        .any(|p| p.subject != first.subject || p.query != first.query || p.reading != first.reading)
    {
        return Err(DensityError::Precondition("certificates answer different queries".into()));
    }
    let checked = parts.iter().map(|p| p.colorings_checked).sum();
    let refuted = parts
        .iter()
        .filter(|p| p.verdict == Verdict::False)
        .min_by_key(|p| match &p.evidence {
            Some(Evidence::Coloring { rank: Some(r), .. }) => *r,
            _ => 0,
        });
    let mut out = match refuted {
        Some(p) => {
            let mut out = p.clone();
            // Report what a single run would have: every rank up to the
            // counterexample, provided the shards below it cover them.
            if let (Some(Evidence::Coloring { rank: Some(r), .. }), Some(range)) = (&p.evidence, p.ranks) {
                let below = contiguous_span(
                    parts
                        .iter()
                        .filter_map(|q| q.ranks)
                        .filter(|q| q.end <= range.start),
                );
                if range.start == 0 || below.is_some_and(|b| b.start == 0 && b.end == range.start) {
                    out.ranks = Some(RankRange { start: 0, end: r + 1 });
                    out.colorings_checked = r + 1;
                    return Ok(out);
                }
            }
            out
        }
        None => {
            let span = contiguous_span(parts.iter().filter_map(|p| p.ranks));
            let mut out = first.clone();
            let whole = matches!((span, first.space), (Some(r), Some(s)) if r.start == 0 && r.end >= s);
            let trivially_true = parts.iter().all(|p| p.verdict == Verdict::True && p.ranks.is_none());
            out.verdict = if whole || trivially_true {
                Verdict::True
            } else {
                Verdict::Unknown
            };
            out.ranks = span;
            out
        }
    };
    out.colorings_checked = checked;
    Ok(out)
}

/// The union of `ranges` if they form one contiguous run.
fn contiguous_span(ranges: impl Iterator<Item = RankRange>) -> Option<RankRange> {
    let mut ranges: Vec<RankRange> = ranges.collect();
    ranges.sort_by_key(|r| r.start);
    let first = ranges.first()?;
    let mut span = *first;
    for r in &ranges[1..] {
        if r.start > span.end {
            return None;
        }
        span.end = span.end.max(r.end);
    }
    Some(span)
}

fn budget_check(what: &'static str, needed: u128, budget: u64) -> Result<u64> {
    if needed > budget as u128 {
        Err(DensityError::BudgetExceeded {
            what,
            needed: needed.to_string(),
            budget,
        })
    } else {
        Ok(needed as u64)
    }
}

/// `colors^pairs`, saturating at `u128::MAX`.
fn coloring_space(colors: u64, n: usize) -> u128 {
    let pairs = pair_count(n) as u32;
    (colors as u128).checked_pow(pairs).unwrap_or(u128::MAX)
}

fn require_min_above_three(set: &FinSet) -> Result<u64> {
    match set.min() {
        Ok(m) if m > 3 => Ok(m),
        Ok(m) => Err(DensityError::Precondition(format!("min X > 3 is required, got {m}"))),
        Err(_) => Err(DensityError::Precondition("X must be nonempty".into())),
    }
}

/// What a fallow subset has to satisfy.
enum Target<'a> {
    Large(&'a Ordinal),
    Dense(u32),
}

struct Searcher {
    budget: u64,
    reading: PartitionReading,
    memo: Mutex<HashMap<(Vec<u64>, u32), bool>>,
}

impl Searcher {
    fn new(budget: u64, reading: PartitionReading) -> Self {
        Searcher {
            budget,
            reading,
            memo: Mutex::new(HashMap::new()),
        }
    }

    fn accepts(&self, y: &FinSet, target: &Target) -> Result<bool> {
        match target {
            Target::Large(alpha) => Ok(is_alpha_large(y, alpha)?),
            Target::Dense(m) => Ok(self.dense(y, *m)?.is_none()),
        }
    }

    /// `None` when `set` is EM-m-dense, otherwise the evidence against it.
    fn dense(&self, set: &FinSet, m: u32) -> Result<Option<Evidence>> {
        let key = (set.as_slice().to_vec(), m);
        if let Some(&v) = self.memo.lock().unwrap().get(&key) {
            if v {
                return Ok(None);
            }
        }
        let out = self.dense_uncached(set, m)?;
        self.memo.lock().unwrap().insert(key, out.is_none());
        Ok(out)
    }

    fn dense_uncached(&self, set: &FinSet, m: u32) -> Result<Option<Evidence>> {
        if m == 0 {
            return base_evidence(set);
        }
        if let Some(ev) = self.partition_counterexample(set, m)? {
            return Ok(Some(ev));
        }
        let colors = set.min()?;
        let space = budget_check("colorings", coloring_space(colors, set.len()), self.budget)?;
        let bad = (0..space)
            .into_par_iter()
            .map(|rank| -> Result<Option<u64>> {
                let p = PairColoring::from_rank(set.clone(), colors as u32, rank)?;
                Ok((!self.has_fallow_subset(&p, &Target::Dense(m - 1))?).then_some(rank))
            })
            .find_map_first(|r| match r {
                Ok(None) => None,
                other => Some(other),
            });
        match bad {
            None => Ok(None),
            Some(Err(e)) => Err(e),
            Some(Ok(rank)) => Ok(Some(Evidence::Coloring {
                coloring: PairColoring::from_rank(set.clone(), colors as u32, rank.unwrap())?,
                rank,
            })),
        }
    }

    /// First admissible partition (by block count, then cut positions) with
    /// no EM-(m-1)-dense block.
    fn partition_counterexample(&self, set: &FinSet, m: u32) -> Result<Option<Evidence>> {
        let els = set.as_slice();
        let n = els.len();
        if n == 0 {
            return Ok(None);
        }
        let max_blocks = match self.reading {
            PartitionReading::MinBound => (els[0].min(n as u64)) as usize,
            PartitionReading::CardinalityBound => n,
        };
        let total: u128 = (1..=max_blocks).map(|l| binomial(n - 1, l - 1)).sum();
        budget_check("partitions", total, self.budget)?;
        for blocks in 1..=max_blocks {
            let mut cuts: Vec<usize> = (1..blocks).collect();
            loop {
                let parts = split_at_cuts(els, &cuts);
                if self.reading.admits(blocks, parts[0]) {
                    let mut any_dense = false;
                    for z in &parts {
                        let z = FinSet::new(z.to_vec())?;
                        if self.dense(&z, m - 1)?.is_none() {
                            any_dense = true;
                            break;
                        }
                    }
                    if !any_dense {
                        let blocks = parts
                            .into_iter()
                            .map(|z| FinSet::new(z.to_vec()))
                            .collect::<std::result::Result<_, _>>()?;
                        return Ok(Some(Evidence::Partition { blocks }));
                    }
                }
                if !next_combination(&mut cuts, n) {
                    break;
                }
            }
        }
        Ok(None)
    }

    /// Whether some `Y ⊆ ground` is fallow under `p` and meets `target`.
    ///
    /// Subsets are grown downward from the largest element, so a new point
    /// only has to be checked against pairs already chosen. Every accepted
    /// set here is ω-large (a dense set with `min > 3` is its own one-block
    /// partition, so density at any level implies level 0), and α-large sets
    /// stay α-large under supersets, so a branch whose most generous
    /// completion is not large enough is cut.
    fn has_fallow_subset(&self, p: &PairColoring, target: &Target) -> Result<bool> {
        let els = p.ground().as_slice();
        let bound = match target {
            Target::Large(alpha) => (*alpha).clone(),
            Target::Dense(_) => Ordinal::omega(),
        };
        if bound.is_zero() {
            return Ok(true);
        }
        let mut chosen: Vec<usize> = Vec::new();
        self.grow(p, els, els.len(), &mut chosen, target, &bound)
    }

    fn grow(
        &self,
        p: &PairColoring,
        els: &[u64],
        below: usize,
        chosen: &mut Vec<usize>,
        target: &Target,
        bound: &Ordinal,
    ) -> Result<bool> {
        let completion = els[..below]
            .iter()
            .copied()
            .chain(chosen.iter().rev().map(|&i| els[i]));
        if !crate::largeness::residue(completion, bound)?.is_zero() {
            return Ok(false);
        }
        for i in (0..below).rev() {
            let extends = chosen.iter().enumerate().all(|(a, &j)| {
                chosen[..a].iter().all(|&k| {
                    // i < j < k with j, k already chosen
                    let c = p.color_at(i, k);
                    c == p.color_at(i, j) || c == p.color_at(j, k)
                })
            });
            if !extends {
                continue;
            }
            chosen.push(i);
            let y = FinSet::new(chosen.iter().rev().map(|&t| els[t]).collect())?;
            if self.accepts(&y, target)? || self.grow(p, els, i, chosen, target, bound)? {
                chosen.pop();
                return Ok(true);
            }
            chosen.pop();
        }
        Ok(false)
    }
}

fn base_evidence(set: &FinSet) -> Result<Option<Evidence>> {
    let min = set.min().ok();
    let omega_large = is_alpha_large(set, &Ordinal::omega())?;
    if omega_large && min.is_some_and(|m| m > 3) {
        Ok(None)
    } else {
        Ok(Some(Evidence::Base { min, omega_large }))
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn split_at_cuts<'a>(els: &'a [u64], cuts: &[usize]) -> Vec<&'a [u64]> {
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    for &c in cuts {
        out.push(&els[start..c]);
        start = c;
    }
    out.push(&els[start..]);
    out
}

/// Advances strictly increasing `cuts` drawn from `[1, n)` in lexicographic order.
fn next_combination(cuts: &mut [usize], n: usize) -> bool {
    let k = cuts.len();
    for i in (0..k).rev() {
        if cuts[i] < n - k + i {
            cuts[i] += 1;
            for j in i + 1..k {
                cuts[j] = cuts[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn random_coloring(rng: &mut ChaCha8Rng, set: &FinSet, colors: u32) -> Result<PairColoring> {
    Ok(PairColoring::from_fn(set.clone(), colors, |_, _| rng.random_range(0..colors))?)
}

/// Runs clause-1 style enumeration for the outermost coloring quantifier.
fn outer_colorings(
    searcher: &Searcher,
    set: &FinSet,
    target: &Target,
    config: &DensityConfig,
    mut cert: DensityCertificate,
) -> Result<DensityCertificate> {
    let colors = set.min()? as u32;
    let space = coloring_space(colors as u64, set.len());
    cert.space = u64::try_from(space).ok();
    match config.mode {
        Mode::Exact => {
            let space = budget_check("colorings", space, config.budget)?;
            let range = match config.ranks {
                Some(r) => RankRange {
                    start: r.start.min(space),
                    end: r.end.min(space),
                },
                None => RankRange { start: 0, end: space },
            };
            let bad = (range.start..range.end)
                .into_par_iter()
                .map(|rank| -> Result<Option<u64>> {
                    let p = PairColoring::from_rank(set.clone(), colors, rank)?;
                    Ok((!searcher.has_fallow_subset(&p, target)?).then_some(rank))
                })
                .find_map_first(|r| match r {
                    Ok(None) => None,
                    other => Some(other),
                });
            match bad {
                Some(Err(e)) => Err(e),
                Some(Ok(rank)) => {
                    let rank = rank.expect("counterexample rank");
                    cert.colorings_checked = rank - range.start + 1;
                    cert.ranks = Some(RankRange {
                        start: range.start,
                        end: rank + 1,
                    });
                    let coloring = PairColoring::from_rank(set.clone(), colors, rank)?;
                    Ok(cert.refuted(Evidence::Coloring {
                        coloring,
                        rank: Some(rank),
                    }))
                }
                None => {
                    cert.colorings_checked = range.end - range.start;
                    cert.ranks = Some(range);
                    cert.verdict = if range.start == 0 && range.end == space {
                        Verdict::True
                    } else {
                        Verdict::Unknown
                    };
                    Ok(cert)
                }
            }
        }
        Mode::Randomized => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            for i in 0..config.samples {
                let p = random_coloring(&mut rng, set, colors)?;
                if !searcher.has_fallow_subset(&p, target)? {
                    cert.colorings_checked = i + 1;
                    return Ok(cert.refuted(Evidence::Coloring { coloring: p, rank: None }));
                }
            }
            cert.colorings_checked = config.samples;
            Ok(cert)
        }
    }
}

/// Decides (exact mode) or probes (randomized mode) EM-α-largeness.
pub fn check_em_alpha_large(
    set: &FinSet,
    alpha: &Ordinal,
    config: &DensityConfig,
) -> Result<DensityCertificate> {
    require_min_above_three(set)?;
    let query = Query {
        kind: QueryKind::EmAlphaLarge,
        parameter: alpha.to_string(),
    };
    let mut cert = DensityCertificate::new(set, query, config);
    if alpha.is_zero() {
        // The empty set is 0-large and vacuously fallow.
        cert.verdict = Verdict::True;
        return Ok(cert);
    }
    let searcher = Searcher::new(config.budget, config.reading);
    outer_colorings(&searcher, set, &Target::Large(alpha), config, cert)
}

/// Decides (exact mode) or probes (randomized mode) EM-m-density.
///
/// Clause 2 is always decided exactly. In randomized mode only the outermost
/// coloring quantifier is sampled.
pub fn check_em_dense(set: &FinSet, m: u32, config: &DensityConfig) -> Result<DensityCertificate> {
    let query = Query {
        kind: QueryKind::EmMDense,
        parameter: m.to_string(),
    };
    let cert = DensityCertificate::new(set, query, config);
    if m == 0 {
        return Ok(match base_evidence(set)? {
            None => DensityCertificate {
                verdict: Verdict::True,
                ..cert
            },
            Some(ev) => cert.refuted(ev),
        });
    }
    require_min_above_three(set)?;
    let searcher = Searcher::new(config.budget, config.reading);
    if let Some(ev) = searcher.partition_counterexample(set, m)? {
        return Ok(cert.refuted(ev));
    }
    outer_colorings(&searcher, set, &Target::Dense(m - 1), config, cert)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum RefuteOutcome {
    Counterexample { evidence: Evidence, sample: u64 },
    NoneFound { samples: u64 },
}

/// Alternates partition candidates with random colorings and returns the
/// first counterexample to EM-m-density that [`validate`] confirms.
///
/// Samples first walk the partitions in enumeration order, since they are
/// cheap and exact. Once those are exhausted, odd samples draw a random
/// coloring and even samples a random partition. `NoneFound` says nothing
/// about density.
pub fn refute_density(
    set: &FinSet,
    m: u32,
    samples: u64,
    seed: u64,
    reading: PartitionReading,
    budget: u64,
) -> Result<RefuteOutcome> {
    if m == 0 {
        return Err(DensityError::Precondition("refutation needs m >= 1".into()));
    }
    let min = require_min_above_three(set)?;
    let els = set.as_slice();
    let n = els.len();
    let searcher = Searcher::new(budget, reading);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_blocks = match reading {
        PartitionReading::MinBound => min.min(n as u64) as usize,
        PartitionReading::CardinalityBound => n,
    };
    let mut blocks = 1usize;
    let mut cuts: Vec<usize> = Vec::new();
    let mut enumerating = true;
    for i in 0..samples {
        let candidate = if enumerating || i % 2 == 0 {
            let parts: Vec<Vec<u64>> = if enumerating {
                let parts = split_at_cuts(els, &cuts).into_iter().map(<[u64]>::to_vec).collect();
                if !next_combination(&mut cuts, n) {
                    blocks += 1;
                    if blocks > max_blocks {
                        enumerating = false;
                    } else {
                        cuts = (1..blocks).collect();
                    }
                }
                parts
            } else {
                let l = rng.random_range(1..=max_blocks);
                let mut c: Vec<usize> = sample(&mut rng, n - 1, l - 1).into_iter().map(|g| g + 1).collect();
                c.sort_unstable();
                split_at_cuts(els, &c).into_iter().map(<[u64]>::to_vec).collect()
            };
            if !reading.admits(parts.len(), &parts[0]) {
                continue;
            }
            let mut any_dense = false;
            for z in &parts {
                if searcher.dense(&FinSet::new(z.clone())?, m - 1)?.is_none() {
                    any_dense = true;
                    break;
                }
            }
            if any_dense {
                continue;
            }
            Evidence::Partition {
                blocks: parts.into_iter().map(FinSet::new).collect::<std::result::Result<_, _>>()?,
            }
        } else {
            let p = random_coloring(&mut rng, set, min as u32)?;
            if searcher.has_fallow_subset(&p, &Target::Dense(m - 1))? {
                continue;
            }
            Evidence::Coloring { coloring: p, rank: None }
        };
        let probe = DensityCertificate {
            subject: set.clone(),
            query: Query {
                kind: QueryKind::EmMDense,
                parameter: m.to_string(),
            },
            verdict: Verdict::False,
            evidence: Some(candidate.clone()),
            mode: Mode::Randomized,
            reading,
            seed: Some(seed),
            samples: Some(samples),
            space: None,
            ranks: None,
            colorings_checked: 0,
        };
        if validate::validate(&probe).is_ok() {
            return Ok(RefuteOutcome::Counterexample {
                evidence: candidate,
                sample: i,
            });
        }
    }
    Ok(RefuteOutcome::NoneFound { samples })
}

/// Re-checks false verdicts straight from the definitions.
///
/// Nothing here calls into the searcher or the largeness and coloring
/// modules: stepping, fallowness, partitions and density are recomputed by
/// brute force over bitmasks.
pub mod validate {
    use super::{DensityCertificate, Evidence, PartitionReading, QueryKind, Verdict};

    /// Largest set whose subsets are enumerated.
    pub const MAX_ELEMENTS: usize = 20;
    /// Largest coloring space enumerated inside a density check.
    pub const MAX_COLORINGS: u128 = 1 << 22;

    type Cnf = Vec<(u32, u64)>;

    fn parse_cnf(text: &str) -> Result<Cnf, String> {
        let mut out: Cnf = Vec::new();
        for part in text.split('+') {
            let part = part.trim();
            let (exp, coef) = if let Some(rest) = part.strip_prefix('w') {
                let (e, k) = match rest.split_once('.') {
                    Some((e, k)) => (e, k.parse::<u64>().map_err(|e| e.to_string())?),
                    None => (rest, 1),
                };
                let e = match e.strip_prefix('^') {
                    Some(v) => v.parse::<u32>().map_err(|e| e.to_string())?,
                    None if e.is_empty() => 1,
                    None => return Err(format!("bad term {part}")),
                };
                (e, k)
            } else {
                (0, part.parse::<u64>().map_err(|e| e.to_string())?)
            };
            if coef > 0 {
                out.push((exp, coef));
            }
        }
        Ok(out)
    }

    fn large(elements: impl Iterator<Item = u64>, alpha: &Cnf) -> bool {
        let mut a = alpha.clone();
        for x in elements {
            let Some(&(e, k)) = a.last() else { break };
            a.pop();
            if k > 1 {
                a.push((e, k - 1));
            }
            if e > 0 && x > 0 {
                a.push((e - 1, x));
            }
        }
        a.is_empty()
    }

    fn omega() -> Cnf {
        vec![(1, 1)]
    }

    fn fallow_on(color: &dyn Fn(usize, usize) -> u32, idx: &[usize]) -> bool {
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                for c in b + 1..idx.len() {
                    let (x, y, z) = (idx[a], idx[b], idx[c]);
                    let xz = color(x, z);
                    if xz != color(x, y) && xz != color(y, z) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn members(mask: u64, n: usize) -> Vec<usize> {
        (0..n).filter(|i| mask >> i & 1 == 1).collect()
    }

    fn dense(set: &[u64], m: u32, reading: PartitionReading) -> Result<bool, String> {
        if m == 0 {
            return Ok(set.first().is_some_and(|&x| x > 3) && large(set.iter().copied(), &omega()));
        }
        let n = set.len();
        if n > MAX_ELEMENTS {
            return Err(format!("{n} elements exceed the validator limit"));
        }
        if n > 0 {
            for gaps in 0u64..1 << (n - 1) {
                let blocks = consecutive_blocks(set, gaps);
                if admissible(&blocks, reading) {
                    let mut ok = false;
                    for b in &blocks {
                        if dense(b, m - 1, reading)? {
                            ok = true;
                            break;
                        }
                    }
                    if !ok {
                        return Ok(false);
                    }
                }
            }
        }
        let colors = set.first().copied().unwrap_or(0);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        let space = (colors as u128).checked_pow(pairs.len() as u32).unwrap_or(u128::MAX);
        if space > MAX_COLORINGS {
            return Err(format!("{space} colorings exceed the validator limit"));
        }
        let mut digits = vec![0u64; pairs.len()];
        for _ in 0..space {
            if !some_fallow_subset(set, &pairs, &digits, &|y| dense(y, m - 1, reading))? {
                return Ok(false);
            }
            for d in digits.iter_mut() {
                *d += 1;
                if *d < colors {
                    break;
                }
                *d = 0;
            }
        }
        Ok(true)
    }

    fn consecutive_blocks(set: &[u64], gaps: u64) -> Vec<Vec<u64>> {
        let mut out = vec![vec![set[0]]];
        for (i, &x) in set.iter().enumerate().skip(1) {
            if gaps >> (i - 1) & 1 == 1 {
                out.push(Vec::new());
            }
            out.last_mut().unwrap().push(x);
        }
        out
    }

    fn admissible(blocks: &[Vec<u64>], reading: PartitionReading) -> bool {
        let l = blocks.len() as u64;
        match reading {
            PartitionReading::MinBound => l <= blocks[0][0],
            PartitionReading::CardinalityBound => l <= blocks[0].len() as u64,
        }
    }

    /// Colors listed in packed order `(i, j)`, `i < j`, by `j` then `i`.
    fn some_fallow_subset(
        set: &[u64],
        pairs: &[(usize, usize)],
        colors: &[u64],
        accept: &dyn Fn(&[u64]) -> Result<bool, String>,
    ) -> Result<bool, String> {
        let n = set.len();
        let lookup = |i: usize, j: usize| -> u32 {
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            let p = pairs.iter().position(|&q| q == (i, j)).unwrap();
            colors[p] as u32
        };
        for mask in 0u64..1 << n {
            let idx = members(mask, n);
            if !fallow_on(&lookup, &idx) {
                continue;
            }
            let y: Vec<u64> = idx.iter().map(|&i| set[i]).collect();
            if accept(&y)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `Ok(())` when the certificate's verdict is backed by its evidence.
    ///
    /// True and unknown verdicts carry no evidence to re-check.
    pub fn validate(cert: &DensityCertificate) -> Result<(), String> {
        if cert.verdict != Verdict::False {
            return Ok(());
        }
        let evidence = cert.evidence.as_ref().ok_or("false verdict without evidence")?;
        let set = cert.subject.as_slice();
        let reading = cert.reading;
        let level = || -> Result<u32, String> { cert.query.parameter.parse::<u32>().map_err(|e| e.to_string()) };
        match evidence {
            Evidence::Base { min, omega_large } => {
                if cert.query.kind != QueryKind::EmMDense || level()? != 0 {
                    return Err("base evidence only answers level 0".into());
                }
                if *min != set.first().copied() || *omega_large != large(set.iter().copied(), &omega()) {
                    return Err("base evidence misreports the set".into());
                }
                if dense(set, 0, reading)? {
                    return Err("set is 0-dense".into());
                }
                Ok(())
            }
            Evidence::Partition { blocks } => {
                if cert.query.kind != QueryKind::EmMDense {
                    return Err("partition evidence only answers density".into());
                }
                let m = level()?;
                if m == 0 {
                    return Err("level 0 has no partition clause".into());
                }
                let flat: Vec<u64> = blocks.iter().flat_map(|b| b.as_slice().iter().copied()).collect();
                if flat != set || blocks.iter().any(|b| b.is_empty()) {
                    return Err("blocks do not split the set into consecutive pieces".into());
                }
                let blocks: Vec<Vec<u64>> = blocks.iter().map(|b| b.as_slice().to_vec()).collect();
                if !admissible(&blocks, reading) {
                    return Err("too many blocks for the partition bound".into());
                }
                for b in &blocks {
                    if dense(b, m - 1, reading)? {
                        return Err(format!("block {b:?} is {}-dense", m - 1));
                    }
                }
                Ok(())
            }
            Evidence::Coloring { coloring, .. } => {
                if coloring.ground().as_slice() != set {
                    return Err("coloring is over a different ground".into());
                }
                let colors = set.first().copied().ok_or("empty subject")?;
                if u64::from(crate::coloring::Coloring::color_count(coloring)) != colors {
                    return Err("coloring does not use min X colors".into());
                }
                let n = set.len();
                if n > MAX_ELEMENTS {
                    return Err(format!("{n} elements exceed the validator limit"));
                }
                let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
                let values: Vec<u64> = coloring.values().iter().map(|&c| c as u64).collect();
                if values.iter().any(|&c| c >= colors) || values.len() != pairs.len() {
                    return Err("coloring values out of range".into());
                }
                let found = match cert.query.kind {
                    QueryKind::EmAlphaLarge => {
                        let alpha = parse_cnf(&cert.query.parameter)?;
                        some_fallow_subset(set, &pairs, &values, &|y| Ok(large(y.iter().copied(), &alpha)))?
                    }
                    QueryKind::EmMDense => {
                        let m = level()?;
                        if m == 0 {
                            return Err("level 0 has no coloring clause".into());
                        }
                        some_fallow_subset(set, &pairs, &values, &|y| dense(y, m - 1, reading))?
                    }
                };
                if found {
                    Err("the coloring is fallow on an admissible subset".into())
                } else {
                    Ok(())
                }
            }
        }
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn own_stepping_agrees_on_small_cases() {
            assert!(large([4, 5, 6, 7, 8].into_iter(), &omega()));
            assert!(!large([4, 5, 6, 7].into_iter(), &omega()));
            assert_eq!(parse_cnf("w^2.3+w+4").unwrap(), vec![(2, 3), (1, 1), (0, 4)]);
            assert_eq!(parse_cnf("0").unwrap(), vec![]);
            assert!(large(std::iter::empty(), &parse_cnf("0").unwrap()));
        }
    }
}
