//! Fixed-N Fock basis of three bosonic modes.
//!
//! States |n1,n2,n3⟩ with n1+n2+n3 = N are labelled by (j1, j2) with
//! n1 = N − j1, n2 = j1 − j2, n3 = j2 and 0 ≤ j2 ≤ j1 ≤ N. The canonical
//! index is j1(j1+1)/2 + j2, so |N,0,0⟩ is index 0 and |0,0,N⟩ is last.

use std::fmt;

use thiserror::Error;

/// Default upper bound on the irrep parameter; dim(512) = 131 841.
pub const DEFAULT_MAX_N: u32 = 512;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BasisError {
    #[error("total boson number must be non-negative, got {0}")]
    NegativeN(i64),
    #[error("total boson number {n} exceeds configured maximum {max}")]
    TooLarge { n: i64, max: u32 },
    #[error("basis index {idx} out of range for N = {n} (dimension {dim})")]
    IndexOutOfRange { idx: usize, n: u32, dim: usize },
}

/// Occupation numbers of the three modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockTriple {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
}

impl FockTriple {
    pub const fn new(n1: u32, n2: u32, n3: u32) -> Self {
        Self { n1, n2, n3 }
    }

    /// Builds the triple from its (j1, j2) labels. Panics if j2 > j1 or j1 > n.
    pub fn from_labels(n: u32, j1: u32, j2: u32) -> Self {
        assert!(
            j2 <= j1 && j1 <= n,
            "invalid labels ({j1}, {j2}) for N = {n}"
        );
        Self {
            n1: n - j1,
            n2: j1 - j2,
            n3: j2,
        }
    }

    pub const fn total(&self) -> u32 {
        self.n1 + self.n2 + self.n3
    }

    /// (j1, j2) = (n2 + n3, n3).
    pub const fn labels(&self) -> (u32, u32) {
        (self.n2 + self.n3, self.n3)
    }

    pub const fn occupation(&self, mode: usize) -> u32 {
        match mode {
            0 => self.n1,
            1 => self.n2,
            _ => self.n3,
        }
    }

    pub(crate) fn with_occupation(mut self, mode: usize, value: u32) -> Self {
        match mode {
            0 => self.n1 = value,
            1 => self.n2 = value,
            _ => self.n3 = value,
        }
        self
    }
}

impl fmt::Display for FockTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{}⟩", self.n1, self.n2, self.n3)
    }
}

/// Position of a basis state in the canonical ordering for irrep `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub idx: usize,
    pub n: u32,
}

/// Dimension (N+1)(N+2)/2 of the fixed-N space.
pub fn dimension(n: i64) -> Result<usize, BasisError> {
    if n < 0 {
        return Err(BasisError::NegativeN(n));
    }
    Ok(dim(n as u32))
}

#[inline]
pub(crate) const fn dim(n: u32) -> usize {
    let n = n as usize;
    (n + 1) * (n + 2) / 2
}

/// Validates an irrep parameter against a cap.
pub fn checked_n(n: i64, max: u32) -> Result<u32, BasisError> {
    if n < 0 {
        return Err(BasisError::NegativeN(n));
    }
    if n > max as i64 {
        return Err(BasisError::TooLarge { n, max });
    }
    Ok(n as u32)
}

#[inline]
pub(crate) const fn label_index(j1: u32, j2: u32) -> usize {
    let j1 = j1 as usize;
    j1 * (j1 + 1) / 2 + j2 as usize
}

pub fn index_of(t: FockTriple) -> BasisIndex {
    let (j1, j2) = t.labels();
    BasisIndex {
        idx: label_index(j1, j2),
        n: t.total(),
    }
}

pub fn triple_of(b: BasisIndex) -> Result<FockTriple, BasisError> {
    let d = dim(b.n);
    if b.idx >= d {
        return Err(BasisError::IndexOutOfRange {
            idx: b.idx,
            n: b.n,
            dim: d,
        });
    }
    let (j1, j2) = labels_of_index(b.idx);
    Ok(FockTriple::from_labels(b.n, j1, j2))
}

/// Inverse of `label_index`: the largest j1 with j1(j1+1)/2 ≤ idx.
pub(crate) fn labels_of_index(idx: usize) -> (u32, u32) {
    let mut j1 = (((8.0 * idx as f64 + 1.0).sqrt() - 1.0) / 2.0) as usize;
    // float estimate can be off by one near perfect squares
    while j1 * (j1 + 1) / 2 > idx {
        j1 -= 1;
    }
    while (j1 + 1) * (j1 + 2) / 2 <= idx {
        j1 += 1;
    }
    let j2 = idx - j1 * (j1 + 1) / 2;
    (j1 as u32, j2 as u32)
}

/// The canonical basis at fixed N, materialised once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n: u32,
    states: Vec<FockTriple>,
}

impl FockBasis {
    pub fn new(n: u32) -> Self {
        let states = (0..=n)
            .flat_map(|j1| (0..=j1).map(move |j2| FockTriple::from_labels(n, j1, j2)))
            .collect();
        Self { n, states }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockTriple] {
        &self.states
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, FockTriple)> + '_ {
        self.states.iter().copied().enumerate()
    }

    /// Index of a triple, or `None` if it does not belong to this N.
    pub fn index(&self, t: FockTriple) -> Option<usize> {
        (t.total() == self.n).then(|| index_of(t).idx)
    }
}
