use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    Primes,
    ExplicitSortedList,
    ModelSample,
}

/// A strictly increasing set of positive integers together with the interval
/// `(known_lo, known_hi]` on which membership is fully determined.
///
/// An explicit list is taken to be the whole set, so its membership is known
/// everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerSet {
    kind: SetKind,
    elements: Vec<u64>,
    known_lo: u64,
    known_hi: u64,
}

impl IntegerSet {
    /// Build an explicit set from arbitrary integers; sorts and removes duplicates.
    pub fn explicit(mut elements: Vec<u64>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        if elements.first() == Some(&0) {
            return Err(invalid("sets hold positive integers; found 0"));
        }
        Ok(IntegerSet {
            kind: SetKind::ExplicitSortedList,
            elements,
            known_lo: 0,
            known_hi: u64::MAX,
        })
    }

    /// Build a set whose membership is known only on `(known_lo, known_hi]`.
    pub fn with_coverage(
        kind: SetKind,
        elements: Vec<u64>,
        known_lo: u64,
        known_hi: u64,
    ) -> Result<Self> {
        if known_lo > known_hi {
            return Err(LabError::ReversedRange {
                lo: known_lo as f64,
                hi: known_hi as f64,
            });
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("elements must be strictly increasing"));
        }
        if let (Some(&first), Some(&last)) = (elements.first(), elements.last()) {
            if first <= known_lo || last > known_hi {
                return Err(invalid("elements lie outside the declared coverage"));
            }
        }
        Ok(Self::from_sorted_unchecked(
            kind, elements, known_lo, known_hi,
        ))
    }

    pub(crate) fn from_sorted_unchecked(
        kind: SetKind,
        elements: Vec<u64>,
        known_lo: u64,
        known_hi: u64,
    ) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        IntegerSet {
            kind,
            elements,
            known_lo,
            known_hi,
        }
    }

    pub fn empty() -> Self {
        IntegerSet {
            kind: SetKind::ExplicitSortedList,
            elements: Vec::new(),
            known_lo: 0,
            known_hi: u64::MAX,
        }
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<u64> {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Membership is known on `(lo, hi]`.
    pub fn coverage(&self) -> (u64, u64) {
        (self.known_lo, self.known_hi)
    }

    /// Fails unless membership is known for every integer in `[1, hi]`.
    pub fn require_prefix(&self, hi: u64) -> Result<()> {
        if self.known_lo > 0 || self.known_hi < hi {
            return Err(LabError::Coverage {
                lo: self.known_lo,
                hi: self.known_hi,
                needed: hi,
            });
        }
        Ok(())
    }

    pub fn contains(&self, n: u64) -> bool {
        self.elements.binary_search(&n).is_ok()
    }

    /// Members in `(a, b]`.
    pub fn range(&self, a: u64, b: u64) -> &[u64] {
        if a >= b {
            return &[];
        }
        let lo = self.elements.partition_point(|&e| e <= a);
        let hi = self.elements.partition_point(|&e| e <= b);
        &self.elements[lo..hi]
    }

    /// Number of members `<= x`.
    pub fn count_up_to(&self, x: u64) -> usize {
        self.elements.partition_point(|&e| e <= x)
    }

    /// Read newline-delimited decimal integers. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn read_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut out = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let v: u64 = t.parse().map_err(|e| LabError::Parse {
                line: i + 1,
                message: format!("{t:?}: {e}"),
            })?;
            out.push(v);
        }
        Self::explicit(out)
    }

    /// Write one decimal integer per line.
    pub fn write_list<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.elements {
            writeln!(w, "{e}")?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_sorts_and_dedups() {
        let s = IntegerSet::explicit(vec![5, 3, 9, 3]).unwrap();
        assert_eq!(s.elements(), &[3, 5, 9]);
        assert!(IntegerSet::explicit(vec![0, 1]).is_err());
    }

    #[test]
    fn range_is_half_open() {
        let s = IntegerSet::explicit(vec![2, 3, 5, 7, 11]).unwrap();
        assert_eq!(s.range(3, 7), &[5, 7]);
        assert_eq!(s.range(0, 2), &[2]);
        assert_eq!(s.range(11, 20), &[] as &[u64]);
        assert_eq!(s.range(7, 3), &[] as &[u64]);
    }

    #[test]
    fn coverage_checks() {
        assert!(IntegerSet::with_coverage(SetKind::ModelSample, vec![4, 3], 0, 10).is_err());
        assert!(IntegerSet::with_coverage(SetKind::ModelSample, vec![3, 12], 0, 10).is_err());
        let s = IntegerSet::with_coverage(SetKind::ModelSample, vec![3, 4], 0, 10).unwrap();
        assert!(s.require_prefix(10).is_ok());
        assert!(s.require_prefix(11).is_err());
    }

    #[test]
    fn read_rejects_garbage() {
        let err = IntegerSet::read_list("1\n2\nx\n".as_bytes()).unwrap_err();
        assert!(matches!(err, LabError::Parse { line: 3, .. }));
    }

    #[test]
    fn read_skips_comments() {
        let s = IntegerSet::read_list("# header\n7\n\n2\n".as_bytes()).unwrap();
        assert_eq!(s.elements(), &[2, 7]);
    }
}
