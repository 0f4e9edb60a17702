use nalgebra::DVector;
use num_complex::Complex64;
use thiserror::Error;

use crate::fock_basis::{dim, index_of, label_index, FockBasis, FockTriple};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("states belong to different irreps (N = {0} vs N = {1})")]
    IrrepMismatch(u32, u32),
    #[error("amplitude vector has length {len}, expected {expected} for N = {n}")]
    WrongLength { n: u32, len: usize, expected: usize },
    #[error("triple {0} does not have total N = {1}")]
    WrongTotal(FockTriple, u32),
}

/// Amplitudes over the canonical fixed-N basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: u32,
    amps: DVector<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n: u32, amps: DVector<Complex64>) -> Result<Self, StateError> {
        let expected = dim(n);
        if amps.len() != expected {
            return Err(StateError::WrongLength {
                n,
                len: amps.len(),
                expected,
            });
        }
        Ok(Self { n, amps })
    }

    pub(crate) fn from_amplitudes_unchecked(n: u32, amps: DVector<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), dim(n));
        Self { n, amps }
    }

    pub fn basis_state(t: FockTriple) -> Self {
        let n = t.total();
        let mut amps = DVector::zeros(dim(n));
        amps[index_of(t).idx] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    /// |N,0,0⟩.
    pub fn highest_weight(n: u32) -> Self {
        Self::basis_state(FockTriple::new(n, 0, 0))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn into_amps(self) -> DVector<Complex64> {
        self.amps
    }

    pub fn amplitude(&self, t: FockTriple) -> Result<Complex64, StateError> {
        if t.total() != self.n {
            return Err(StateError::WrongTotal(t, self.n));
        }
        Ok(self.amps[index_of(t).idx])
    }

    /// Amplitude by (j1, j2) labels.
    pub fn at_labels(&self, j1: u32, j2: u32) -> Complex64 {
        self.amps[label_index(j1, j2)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            n: self.n,
            amps: &self.amps * c,
        }
    }

    /// Total probability on basis states with n1 > 0.
    pub fn weight_outside_slice(&self) -> f64 {
        // n1 = 0 is the final block j1 = N
        let start = label_index(self.n, 0);
        self.amps.iter().take(start).map(|z| z.norm_sqr()).sum()
    }

    pub fn iter_with_triples(&self) -> impl Iterator<Item = (usize, FockTriple, Complex64)> + '_ {
        let basis = FockBasis::new(self.n);
        let amps = &self.amps;
        basis
            .states()
            .to_vec()
            .into_iter()
            .enumerate()
            .map(move |(i, t)| (i, t, amps[i]))
    }

    /// ‖self − other‖.
    pub fn distance(&self, other: &StateVector) -> Result<f64, StateError> {
        self.check_same_irrep(other)?;
        Ok((&self.amps - &other.amps).norm())
    }

    pub(crate) fn check_same_irrep(&self, other: &StateVector) -> Result<(), StateError> {
        if self.n != other.n {
            return Err(StateError::IrrepMismatch(self.n, other.n));
        }
        Ok(())
    }
}

/// ⟨a|b⟩, conjugating `a`.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<Complex64, StateError> {
    a.check_same_irrep(b)?;
    Ok(a.amps.dotc(&b.amps))
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64, StateError> {
    overlap(a, b).map(|z| z.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_basis_states() {
        let a = StateVector::basis_state(FockTriple::new(4, 0, 0));
        let b = StateVector::basis_state(FockTriple::new(0, 4, 0));
        assert_eq!(overlap(&a, &b).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(overlap(&a, &a).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn overlap_conjugates_first_argument() {
        let i = Complex64::i();
        let a = StateVector::highest_weight(2).scaled(i);
        let b = StateVector::highest_weight(2);
        assert_eq!(overlap(&a, &b).unwrap(), -i);
    }

    #[test]
    fn mismatched_irreps() {
        let a = StateVector::highest_weight(2);
        let b = StateVector::highest_weight(3);
        assert_eq!(overlap(&a, &b), Err(StateError::IrrepMismatch(2, 3)));
    }

    #[test]
    fn wrong_length_rejected() {
        let err = StateVector::from_amplitudes(2, DVector::zeros(5)).unwrap_err();
        assert_eq!(
            err,
            StateError::WrongLength {
                n: 2,
                len: 5,
                expected: 6
            }
        );
    }

    #[test]
    fn slice_weight() {
        let s = StateVector::basis_state(FockTriple::new(0, 1, 2));
        assert_eq!(s.weight_outside_slice(), 0.0);
        let s = StateVector::basis_state(FockTriple::new(1, 0, 2));
        assert_eq!(s.weight_outside_slice(), 1.0);
    }
}
