//! Cantor normal form notation for ordinals below ω^ω.
//!
//! An [`Ordinal`] is a finite sequence of `(exponent, coefficient)` terms with
//! strictly decreasing exponents and positive coefficients. Zero is the empty
//! sequence. The textual form uses `w` for ω and `.` for the coefficient, so
//! `w^2.3+w+5` is ω²·3 + ω + 5.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default bound on coefficients and exponents.
pub const DEFAULT_COEFFICIENT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("malformed ordinal {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("ordinal {text:?} is not in Cantor normal form order")]
    Canonicality { text: String },
    #[error("sum is not in Cantor normal form order: exponent {next} follows {prev}")]
    NotCnfOrder { prev: u32, next: u32 },
    #[error("coefficient {value} exceeds the cap {cap}")]
    CapExceeded { value: u64, cap: u64 },
}

/// One `ω^exponent · coefficient` summand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pub exponent: u32,
    pub coefficient: u64,
}

impl Term {
    pub fn new(exponent: u32, coefficient: u64) -> Self {
        Term {
            exponent,
            coefficient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<Term>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn finite(k: u64) -> Self {
        Self::monomial(0, k)
    }

    pub fn omega() -> Self {
        Self::monomial(1, 1)
    }

    /// `ω^n`.
    pub fn omega_pow(n: u32) -> Self {
        Self::monomial(n, 1)
    }

    /// `ω^n · k`; zero when `k == 0`.
    pub fn monomial(n: u32, k: u64) -> Self {
        if k == 0 {
            Self::zero()
        } else {
            Ordinal {
                terms: vec![Term::new(n, k)],
            }
        }
    }

    /// Builds an ordinal from terms that must already be canonical.
    pub fn from_terms(terms: Vec<Term>) -> Result<Self, OrdinalError> {
        for pair in terms.windows(2) {
            if pair[0].exponent <= pair[1].exponent {
                return Err(OrdinalError::NotCnfOrder {
                    prev: pair[0].exponent,
                    next: pair[1].exponent,
                });
            }
        }
        if terms.iter().any(|t| t.coefficient == 0) {
            return Err(OrdinalError::Parse {
                text: format!("{terms:?}"),
                reason: "zero coefficient".into(),
            });
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Finite ordinals are those whose only term has exponent 0.
    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [Term {
                exponent: 0,
                coefficient,
            }] => Some(*coefficient),
            _ => None,
        }
    }

    pub fn leading_exponent(&self) -> Option<u32> {
        self.terms.first().map(|t| t.exponent)
    }

    pub fn trailing_exponent(&self) -> Option<u32> {
        self.terms.last().map(|t| t.exponent)
    }

    /// The fundamental-sequence step `α[m]`.
    ///
    /// `0[m] = 0`; `(β+1)[m] = β`; `(β+ω^n)[m] = β + ω^(n-1)·m` for `n ≥ 1`.
    pub fn step(&self, m: u64) -> Ordinal {
        self.checked_step(m, u64::MAX)
            .expect("uncapped step cannot fail")
    }

    /// [`Ordinal::step`] that refuses to create a coefficient above `cap`.
    pub fn checked_step(&self, m: u64, cap: u64) -> Result<Ordinal, OrdinalError> {
        let mut out = self.clone();
        out.step_in_place(m, cap)?;
        Ok(out)
    }

    pub(crate) fn step_in_place(&mut self, m: u64, cap: u64) -> Result<(), OrdinalError> {
        let Some(last) = self.terms.last_mut() else {
            return Ok(());
        };
        let exponent = last.exponent;
        if exponent > 0 && m > cap {
            return Err(OrdinalError::CapExceeded { value: m, cap });
        }
        last.coefficient -= 1;
        if last.coefficient == 0 {
            self.terms.pop();
        }
        // The remaining last term has exponent >= `exponent`, so the new term
        // never needs merging.
        if exponent > 0 && m > 0 {
            self.terms.push(Term::new(exponent - 1, m));
        }
        Ok(())
    }

    /// Canonical sum of `parts` written left to right.
    pub fn make_sum(parts: &[Ordinal]) -> Result<Ordinal, OrdinalError> {
        let mut terms: Vec<Term> = Vec::new();
        for term in parts.iter().flat_map(|p| p.terms.iter()) {
            match terms.last_mut() {
                Some(prev) if prev.exponent == term.exponent => {
                    prev.coefficient = prev.coefficient.checked_add(term.coefficient).ok_or(
                        OrdinalError::CapExceeded {
                            value: u64::MAX,
                            cap: u64::MAX,
                        },
                    )?;
                }
                Some(prev) if prev.exponent < term.exponent => {
                    return Err(OrdinalError::NotCnfOrder {
                        prev: prev.exponent,
                        next: term.exponent,
                    });
                }
                _ => terms.push(*term),
            }
        }
        Ok(Ordinal { terms })
    }

    /// Parses with an explicit cap on exponents and coefficients.
    pub fn parse_capped(text: &str, cap: u64) -> Result<Ordinal, OrdinalError> {
        let trimmed = text.trim();
        let bad = |reason: &str| OrdinalError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        if trimmed.is_empty() {
            return Err(bad("empty input"));
        }
        let mut terms: Vec<Term> = Vec::new();
        for raw in trimmed.split('+') {
            let term = parse_term(raw.trim(), cap).map_err(|reason| bad(&reason))?;
            if term.coefficient == 0 {
                continue;
            }
            match terms.last_mut() {
                Some(prev) if prev.exponent == term.exponent => {
                    prev.coefficient += term.coefficient;
                    if prev.coefficient > cap {
                        return Err(OrdinalError::CapExceeded {
                            value: prev.coefficient,
                            cap,
                        });
                    }
                }
                Some(prev) if prev.exponent < term.exponent => {
                    return Err(OrdinalError::Canonicality {
                        text: text.to_string(),
                    });
                }
                _ => terms.push(term),
            }
        }
        Ok(Ordinal { terms })
    }
}

fn parse_nat(s: &str, cap: u64) -> Result<u64, String> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("expected a natural number, found {s:?}"));
    }
    let value: u64 = s.parse().map_err(|_| format!("number {s} out of range"))?;
    if value > cap {
        return Err(format!("number {value} exceeds the cap {cap}"));
    }
    Ok(value)
}

fn parse_term(raw: &str, cap: u64) -> Result<Term, String> {
    let Some(rest) = raw.strip_prefix('w') else {
        return Ok(Term::new(0, parse_nat(raw, cap)?));
    };
    let (exp_part, coef_part) = match rest.split_once('.') {
        Some((e, c)) => (e, Some(c)),
        None => (rest, None),
    };
    let exponent = match exp_part.strip_prefix('^') {
        Some(e) => parse_nat(e, cap)?,
        None if exp_part.is_empty() => 1,
        None => return Err(format!("unexpected {exp_part:?} after w")),
    };
    let exponent = u32::try_from(exponent).map_err(|_| "exponent too large".to_string())?;
    let coefficient = match coef_part {
        Some(c) => parse_nat(c, cap)?,
        None => 1,
    };
    Ok(Term::new(exponent, coefficient))
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ordinal::parse_capped(s, DEFAULT_COEFFICIENT_CAP)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            match (t.exponent, t.coefficient) {
                (0, k) => write!(f, "{k}")?,
                (1, 1) => f.write_str("w")?,
                (1, k) => write!(f, "w.{k}")?,
                (e, 1) => write!(f, "w^{e}")?,
                (e, k) => write!(f, "w^{e}.{k}")?,
            }
        }
        Ok(())
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let ord = a
                .exponent
                .cmp(&b.exponent)
                .then(a.coefficient.cmp(&b.coefficient));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
