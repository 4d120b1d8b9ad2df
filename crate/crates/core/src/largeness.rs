//! α-largeness and α-sparseness of finite sets, least large endpoints, and
//! the structural operations on large sets: decomposition along a Cantor
//! normal form sum, sparsification, and union splitting.
//!
//! A set `{x_0 < … < x_{l-1}}` is α-large when `α[x_0][x_1]…[x_{l-1}] = 0`.
//! Stepping stops as soon as 0 is reached, since `0[m] = 0`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::finset::{FinSet, SetError};
use crate::ordinal::{Ordinal, OrdinalError, DEFAULT_COEFFICIENT_CAP};

/// Default bound on the decimal digits of [`least_large_endpoint`] results.
pub const DEFAULT_DIGIT_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LargenessError {
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("set is not {alpha}-large (residue {residue})")]
    InsufficientLargeness { alpha: Ordinal, residue: Ordinal },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Ordinal(OrdinalError),
    #[error(transparent)]
    Set(#[from] SetError),
}

impl From<OrdinalError> for LargenessError {
    fn from(e: OrdinalError) -> Self {
        match e {
            OrdinalError::CapExceeded { value, cap } => LargenessError::ResourceLimit(format!(
                "coefficient {value} exceeds the cap {cap} while stepping"
            )),
            other => LargenessError::Ordinal(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, LargenessError>;

/// Steps `alpha` through `elements` in order and returns what is left.
pub fn residue_capped(
    elements: impl IntoIterator<Item = u64>,
    alpha: &Ordinal,
    cap: u64,
) -> Result<Ordinal> {
    let mut current = alpha.clone();
    for x in elements {
        if current.is_zero() {
            break;
        }
        current.step_in_place(x, cap)?;
    }
    Ok(current)
}

pub fn residue(elements: impl IntoIterator<Item = u64>, alpha: &Ordinal) -> Result<Ordinal> {
    residue_capped(elements, alpha, DEFAULT_COEFFICIENT_CAP)
}

pub fn is_alpha_large(set: &FinSet, alpha: &Ordinal) -> Result<bool> {
    is_alpha_large_capped(set, alpha, DEFAULT_COEFFICIENT_CAP)
}

pub fn is_alpha_large_capped(set: &FinSet, alpha: &Ordinal, cap: u64) -> Result<bool> {
    Ok(residue_capped(set.iter(), alpha, cap)?.is_zero())
}

/// Whether the interval `[from, to)` is α-large, without materializing it.
pub fn interval_is_large(from: u64, to: u64, alpha: &Ordinal, cap: u64) -> Result<bool> {
    Ok(residue_capped(from..to, alpha, cap)?.is_zero())
}

/// Length of the shortest α-large prefix of `elements`, if one exists.
pub fn shortest_large_prefix(elements: &[u64], alpha: &Ordinal, cap: u64) -> Result<Option<usize>> {
    let mut current = alpha.clone();
    if current.is_zero() {
        return Ok(Some(0));
    }
    for (i, &x) in elements.iter().enumerate() {
        current.step_in_place(x, cap)?;
        if current.is_zero() {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}

/// Least `y <= limit` such that `[from, y)` is α-large.
fn least_large_interval_end(from: u64, alpha: &Ordinal, limit: u64, cap: u64) -> Result<Option<u64>> {
    let mut current = alpha.clone();
    let mut y = from;
    while !current.is_zero() {
        if y >= limit {
            return Ok(None);
        }
        current.step_in_place(y, cap)?;
        y += 1;
    }
    Ok(Some(y))
}

/// `min X > 3` and every gap `[x, y)` between consecutive members is α-large.
///
/// The empty set is treated as sparse.
pub fn is_alpha_sparse(set: &FinSet, alpha: &Ordinal) -> Result<bool> {
    is_alpha_sparse_capped(set, alpha, DEFAULT_COEFFICIENT_CAP)
}

pub fn is_alpha_sparse_capped(set: &FinSet, alpha: &Ordinal, cap: u64) -> Result<bool> {
    match set.min() {
        Ok(m) if m <= 3 => return Ok(false),
        Err(_) => return Ok(true),
        _ => {}
    }
    for pair in set.as_slice().windows(2) {
        if !interval_is_large(pair[0], pair[1], alpha, cap)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `4^(x^2) < y` for every pair of consecutive members `x < y`.
pub fn is_quadratic_exp_sparse(set: &FinSet) -> bool {
    set.as_slice()
        .windows(2)
        .all(|p| exceeds_four_pow_square(p[0], p[1]))
}

/// `4^(x^2) < y`.
pub fn exceeds_four_pow_square(x: u64, y: u64) -> bool {
    // 4^(x^2) = 2^(2x^2); y has at most 64 bits.
    let shift = 2u128 * (x as u128) * (x as u128);
    if shift >= 64 {
        return false;
    }
    (1u64 << shift) < y
}

fn bit_limit(digit_budget: u64) -> u64 {
    digit_budget.saturating_mul(3322) / 1000 + 4
}

fn check_bits(n: &BigUint, bits: u64) -> Result<()> {
    if n.bits() > bits {
        Err(LargenessError::ResourceLimit(format!(
            "endpoint exceeds the digit budget ({} bits > {bits})",
            n.bits()
        )))
    } else {
        Ok(())
    }
}

fn shift_amount(s: &BigUint, bits: u64) -> Result<u64> {
    match s.to_u64() {
        Some(v) if v <= bits => Ok(v),
        _ => Err(LargenessError::ResourceLimit(format!(
            "2^{s} exceeds the digit budget"
        ))),
    }
}

/// Least `N` such that `{s, …, N}` is ω^e-large.
fn endpoint_of_power(e: u32, s: &BigUint, bits: u64) -> Result<BigUint> {
    let out = match e {
        0 => s.clone(),
        1 => s << 1u32,
        2 => {
            let shift = shift_amount(s, bits)?;
            (BigUint::one() << shift) * (s + 2u32) - 2u32
        }
        _ => {
            let rounds = s.to_u64().ok_or_else(|| {
                LargenessError::ResourceLimit("iteration count exceeds u64".into())
            })?;
            let mut next = s + 1u32;
            for _ in 0..rounds {
                next = endpoint_of_power(e - 1, &next, bits)? + 1u32;
                check_bits(&next, bits)?;
            }
            next - 1u32
        }
    };
    check_bits(&out, bits)?;
    Ok(out)
}

/// Least `N >= a - 1` such that `{a, a+1, …, N}` is α-large.
///
/// Uses closed forms for the trailing-first consumption of the Cantor normal
/// form: `L(k, a) = a + k - 1`, `L(ω·k, a) = 2^k (a+1) - 2`,
/// `L(ω², a) = 2^a (a+2) - 2`, and `L(β + γ, a) = L(β, L(γ, a) + 1)`.
/// Higher powers are unfolded through `L(ω^e, a) = L(ω^(e-1)·a, a+1)` and
/// almost always hit the digit budget.
pub fn least_large_endpoint(alpha: &Ordinal, a: u64, digit_budget: u64) -> Result<BigUint> {
    if a <= 3 {
        return Err(LargenessError::Precondition(format!(
            "least_large_endpoint requires a > 3, got {a}"
        )));
    }
    let bits = bit_limit(digit_budget);
    // `next` is the first position not yet consumed.
    let mut next = BigUint::from(a);
    for term in alpha.terms().iter().rev() {
        match term.exponent {
            0 => next += term.coefficient,
            1 => {
                let shift = shift_amount(&BigUint::from(term.coefficient), bits)?;
                next = ((next + 1u32) << shift) - 1u32;
            }
            e => {
                for _ in 0..term.coefficient {
                    next = endpoint_of_power(e, &next, bits)? + 1u32;
                }
            }
        }
        check_bits(&next, bits)?;
    }
    Ok(next - 1u32)
}

/// Cross-check routes for [`least_large_endpoint`] that only use the step
/// operation.
pub mod oracle {
    use super::*;

    /// One element at a time: steps α through `a, a+1, …` until it reaches 0.
    pub fn endpoint_by_unit_steps(alpha: &Ordinal, a: u64, max_steps: u64) -> Result<u64> {
        let mut current = alpha.clone();
        let mut position = a;
        let mut steps = 0u64;
        while !current.is_zero() {
            if steps == max_steps {
                return Err(LargenessError::ResourceLimit(format!(
                    "stepping did not finish within {max_steps} steps"
                )));
            }
            current.step_in_place(position, u64::MAX)?;
            position += 1;
            steps += 1;
        }
        Ok(position - 1)
    }

    /// Stepping with runs of successor steps batched: a trailing finite
    /// coefficient `k` at position `p` consumes `p, …, p+k-1` at once, since
    /// the successor case ignores its argument. Coefficients are unbounded.
    pub fn endpoint_by_batched_steps(alpha: &Ordinal, a: u64, max_batches: u64) -> Result<BigUint> {
        let mut terms: Vec<(u32, BigUint)> = alpha
            .terms()
            .iter()
            .map(|t| (t.exponent, BigUint::from(t.coefficient)))
            .collect();
        let mut position = BigUint::from(a);
        let mut batches = 0u64;
        loop {
            if batches == max_batches {
                return Err(LargenessError::ResourceLimit(format!(
                    "stepping did not finish within {max_batches} batches"
                )));
            }
            batches += 1;
            let Some((exponent, coefficient)) = terms.last_mut() else {
                return Ok(position - 1u32);
            };
            if *exponent == 0 {
                position += &*coefficient;
                terms.pop();
                continue;
            }
            let exponent = *exponent;
            *coefficient -= 1u32;
            if coefficient.is_zero() {
                terms.pop();
            }
            if !position.is_zero() {
                terms.push((exponent - 1, position.clone()));
            }
            position += 1u32;
        }
    }
}

/// Splits `set` into consecutive blocks, block `i` minimally `parts[i]`-large.
///
/// `parts` lists the summands trailing-first: `[α_0, …, α_{k-1}]` stands for
/// `α_{k-1} + … + α_0`. Elements past the last block are appended to it.
pub fn decompose_large(set: &FinSet, parts: &[Ordinal]) -> Result<Vec<FinSet>> {
    decompose_large_capped(set, parts, DEFAULT_COEFFICIENT_CAP)
}

pub fn decompose_large_capped(set: &FinSet, parts: &[Ordinal], cap: u64) -> Result<Vec<FinSet>> {
    if parts.is_empty() {
        return Ok(Vec::new());
    }
    let reversed: Vec<Ordinal> = parts.iter().rev().cloned().collect();
    let sum = Ordinal::make_sum(&reversed)?;
    let left = residue_capped(set.iter(), &sum, cap)?;
    if !left.is_zero() {
        return Err(LargenessError::InsufficientLargeness {
            alpha: sum,
            residue: left,
        });
    }
    let elements = set.as_slice();
    let mut start = 0;
    let mut blocks = Vec::with_capacity(parts.len());
    for part in parts {
        let len = shortest_large_prefix(&elements[start..], part, cap)?.ok_or_else(|| {
            // Unreachable when the sum check passed; kept as an error rather than a panic.
            LargenessError::InsufficientLargeness {
                alpha: part.clone(),
                residue: part.clone(),
            }
        })?;
        blocks.push(elements[start..start + len].to_vec());
        start += len;
    }
    if let Some(last) = blocks.last_mut() {
        last.extend_from_slice(&elements[start..]);
    }
    Ok(blocks
        .into_iter()
        .map(|b| FinSet::new(b).expect("slices of a FinSet are increasing"))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum UnionSplitOutcome {
    Side { index: u8 },
    NoneFound { left_large: bool, right_large: bool },
}

/// Outcome of [`union_split`] together with the hypotheses it was run under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnionSplitReport {
    pub outcome: UnionSplitOutcome,
    pub target: Ordinal,
    /// Whether `Y0 ∪ Y1` is `ω^n·4k`-large.
    pub union_large: bool,
    /// Whether `Y0 ∪ Y1` is ω³-sparse; `None` if the check ran out of resources.
    pub union_omega3_sparse: Option<bool>,
    pub union_quadratic_exp_sparse: bool,
    /// `NoneFound` while both hypotheses hold.
    pub lemma_violation: bool,
}

/// Returns the first of `y0`, `y1` that is `ω^n·k`-large (0 on ties).
pub fn union_split(y0: &FinSet, y1: &FinSet, n: u32, k: u64) -> Result<UnionSplitReport> {
    let target = Ordinal::monomial(n, k);
    let left_large = is_alpha_large(y0, &target)?;
    let right_large = is_alpha_large(y1, &target)?;
    let union = y0.union(y1);
    let union_large = match k.checked_mul(4) {
        Some(k4) => is_alpha_large(&union, &Ordinal::monomial(n, k4))?,
        None => false,
    };
    let union_omega3_sparse = is_alpha_sparse(&union, &Ordinal::omega_pow(3)).ok();
    let outcome = if left_large {
        UnionSplitOutcome::Side { index: 0 }
    } else if right_large {
        UnionSplitOutcome::Side { index: 1 }
    } else {
        UnionSplitOutcome::NoneFound {
            left_large,
            right_large,
        }
    };
    let lemma_violation = matches!(outcome, UnionSplitOutcome::NoneFound { .. })
        && union_large
        && union_omega3_sparse == Some(true);
    Ok(UnionSplitReport {
        outcome,
        target,
        union_large,
        union_omega3_sparse,
        union_quadratic_exp_sparse: is_quadratic_exp_sparse(&union),
        lemma_violation,
    })
}

/// Greedily extracts an ω^n-large, ω^m-sparse subset of `set`.
///
/// Keeps `min X`, then repeatedly the least element `y` with `[last, y)`
/// ω^m-large, stopping as soon as the kept set is ω^n-large.
pub fn sparsify(set: &FinSet, n: u32, m: u32) -> Result<FinSet> {
    sparsify_capped(set, n, m, DEFAULT_COEFFICIENT_CAP)
}

pub fn sparsify_capped(set: &FinSet, n: u32, m: u32, cap: u64) -> Result<FinSet> {
    let first = set.min()?;
    if first <= 3 {
        return Err(LargenessError::Precondition(format!(
            "sparsify requires min X > 3, got {first}"
        )));
    }
    let target = Ordinal::omega_pow(n);
    let gap = Ordinal::omega_pow(m);
    let elements = set.as_slice();
    let limit = set.max()? + 1;
    let mut kept = vec![first];
    let mut cursor = 0usize;
    loop {
        let current = FinSet::new(kept.clone()).expect("kept elements increase");
        let left = residue_capped(current.iter(), &target, cap)?;
        if left.is_zero() {
            return Ok(current);
        }
        let last = elements[cursor];
        let next = least_large_interval_end(last, &gap, limit, cap)?
            .and_then(|end| {
                let offset = elements[cursor + 1..].partition_point(|&x| x < end);
                let idx = cursor + 1 + offset;
                (idx < elements.len()).then_some(idx)
            });
        match next {
            Some(idx) => {
                cursor = idx;
                kept.push(elements[idx]);
            }
            None => {
                return Err(LargenessError::InsufficientLargeness {
                    alpha: target,
                    residue: left,
                })
            }
        }
    }
}
