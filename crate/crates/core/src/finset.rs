use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("set elements must be strictly increasing ({prev} then {next})")]
    NotIncreasing { prev: u64, next: u64 },
    #[error("empty set has no minimum")]
    Empty,
    #[error("interval bounds reversed: from {from} > to {to}")]
    ReversedInterval { from: u64, to: u64 },
}

/// A finite set of naturals stored as a strictly increasing sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FinSet {
    elements: Vec<u64>,
}

impl FinSet {
    pub fn new(elements: Vec<u64>) -> Result<Self, SetError> {
        for pair in elements.windows(2) {
            if pair[0] >= pair[1] {
                return Err(SetError::NotIncreasing {
                    prev: pair[0],
                    next: pair[1],
                });
            }
        }
        Ok(FinSet { elements })
    }

    /// Sorts and deduplicates arbitrary input.
    pub fn from_unsorted(mut elements: Vec<u64>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        FinSet { elements }
    }

    pub fn empty() -> Self {
        FinSet::default()
    }

    /// `{from, …, to}` inclusive.
    pub fn interval(from: u64, to: u64) -> Result<Self, SetError> {
        if from > to {
            return Err(SetError::ReversedInterval { from, to });
        }
        Ok(FinSet {
            elements: (from..=to).collect(),
        })
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.elements
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn min(&self) -> Result<u64, SetError> {
        self.elements.first().copied().ok_or(SetError::Empty)
    }

    pub fn max(&self) -> Result<u64, SetError> {
        self.elements.last().copied().ok_or(SetError::Empty)
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// Position of `x`, if present.
    pub fn index_of(&self, x: u64) -> Option<usize> {
        self.elements.binary_search(&x).ok()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = u64> + ExactSizeIterator + '_ {
        self.elements.iter().copied()
    }

    pub fn is_subset_of(&self, other: &FinSet) -> bool {
        self.elements.iter().all(|&x| other.contains(x))
    }

    /// `self` without its minimum.
    pub fn without_min(&self) -> FinSet {
        FinSet {
            elements: self.elements.iter().skip(1).copied().collect(),
        }
    }

    pub fn union(&self, other: &FinSet) -> FinSet {
        let mut elements = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.elements, &other.elements);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    elements.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    elements.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    elements.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        elements.extend_from_slice(&a[i..]);
        elements.extend_from_slice(&b[j..]);
        FinSet { elements }
    }

    pub fn filter(&self, mut keep: impl FnMut(u64) -> bool) -> FinSet {
        FinSet {
            elements: self.elements.iter().copied().filter(|&x| keep(x)).collect(),
        }
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for FinSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.elements.serialize(serializer)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SetWire {
    List(Vec<u64>),
    Interval { from: u64, to: u64 },
}

impl<'de> Deserialize<'de> for FinSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match SetWire::deserialize(deserializer)? {
            SetWire::List(v) => FinSet::new(v),
            SetWire::Interval { from, to } => FinSet::interval(from, to),
        }
        .map_err(serde::de::Error::custom)
    }
}

impl TryFrom<Vec<u64>> for FinSet {
    type Error = SetError;

    fn try_from(v: Vec<u64>) -> Result<Self, Self::Error> {
        FinSet::new(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted() {
        assert!(FinSet::new(vec![1, 3, 3]).is_err());
        assert!(FinSet::new(vec![4, 2]).is_err());
        assert_eq!(FinSet::empty().min(), Err(SetError::Empty));
    }

    #[test]
    fn json_forms() {
        let s: FinSet = serde_json::from_str("[4,5,9]").unwrap();
        assert_eq!(s.as_slice(), &[4, 5, 9]);
        let s: FinSet = serde_json::from_str(r#"{"from":4,"to":8}"#).unwrap();
        assert_eq!(s.as_slice(), &[4, 5, 6, 7, 8]);
        assert!(serde_json::from_str::<FinSet>("[5,4]").is_err());
        assert!(serde_json::from_str::<FinSet>(r#"{"from":9,"to":8}"#).is_err());
        assert_eq!(serde_json::to_string(&s).unwrap(), "[4,5,6,7,8]");
    }

    #[test]
    fn union_merges() {
        let a = FinSet::new(vec![1, 4, 9]).unwrap();
        let b = FinSet::new(vec![2, 4, 10]).unwrap();
        assert_eq!(a.union(&b).as_slice(), &[1, 2, 4, 9, 10]);
    }
}
