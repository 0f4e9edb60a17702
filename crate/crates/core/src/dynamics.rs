//! Time evolution and decomposition of evolved states into superpositions of
//! coherent states.
//!
//! Under H = (χ/2)(X1² + 3X2²) the basis state with labels (j1, j2) picks up
//! exp[−2iχt E(j1,j2)] with E = N²/3 + j1² + j2² − j1(N + j2). Since
//! E − N²/3 is an integer, the state returns to itself (up to a global phase)
//! at τ = π/χ. At τ/2 and τ/4 the phase is a function of (j1, j2) mod 2 and
//! mod 4 respectively, which is why the evolved state is a finite
//! superposition of coherent states with φ1, φ2 shifted by multiples of π/2.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::coherent::{su3_coherent, CoherentParams, StateError, StateVector};
use crate::su3_operators::{full_hamiltonian, ModelParams, OperatorMatrix};

/// Singular values below this fraction of the largest are dropped
/// (Gram eigenvalues below 1e−20 of the largest).
pub const FIT_RELATIVE_CUTOFF: f64 = 1e-10;
const REFINEMENT_STEPS: usize = 2;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("χ must be non-zero and finite to define a recurrence time, got {0}")]
    ZeroChi(f64),
    #[error("Hermitian eigendecomposition did not converge (dimension {0})")]
    EigenFailure(usize),
    #[error("superposition fit needs at least one candidate")]
    NoCandidates,
    #[error(transparent)]
    State(#[from] StateError),
}

/// E(j1, j2) = N²/3 + j1² + j2² − j1(N + j2).
pub fn phase_exponent(n: u32, j1: u32, j2: u32) -> f64 {
    let (n, j1, j2) = (n as i64, j1 as i64, j2 as i64);
    let integer = j1 * j1 + j2 * j2 - j1 * (n + j2);
    (n * n) as f64 / 3.0 + integer as f64
}

pub(crate) fn evolve_diagonal_signed(s: &StateVector, chi_t: f64, sign: f64) -> StateVector {
    let n = s.n();
    let mut amps = s.amps().clone();
    let mut idx = 0;
    for j1 in 0..=n {
        for j2 in 0..=j1 {
            let arg = -2.0 * sign * chi_t * phase_exponent(n, j1, j2);
            amps[idx] *= Complex64::from_polar(1.0, arg);
            idx += 1;
        }
    }
    StateVector::from_amplitudes_unchecked(n, amps)
}

/// Exact evolution under (χ/2)(X1² + 3X2²).
pub fn evolve_diagonal(s: &StateVector, chi: f64, t: f64) -> StateVector {
    evolve_diagonal_signed(s, chi * t, 1.0)
}

/// exp(−iHt) for a fixed Hermitian H, diagonalised once.
#[derive(Debug, Clone)]
pub struct Propagator {
    n: u32,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl Propagator {
    pub fn new(h: &OperatorMatrix) -> Result<Self, DynamicsError> {
        let dim = h.dim();
        let eig = SymmetricEigen::try_new(h.matrix().clone(), EIGEN_EPS, EIGEN_MAX_ITER)
            .ok_or(DynamicsError::EigenFailure(dim))?;
        Ok(Self {
            n: h.n(),
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn evolve(&self, s: &StateVector, t: f64) -> Result<StateVector, DynamicsError> {
        if s.n() != self.n {
            return Err(StateError::IrrepMismatch(self.n, s.n()).into());
        }
        let mut coeffs = self.eigenvectors.adjoint() * s.amps();
        for (c, &e) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        Ok(StateVector::from_amplitudes_unchecked(
            self.n,
            &self.eigenvectors * coeffs,
        ))
    }
}

/// exp(−iHt)|s⟩ for the full three-mode Hamiltonian with constant coefficients.
/// Time-dependent schedules are handled by chaining calls per segment.
pub fn evolve_full(s: &StateVector, p: &ModelParams, t: f64) -> Result<StateVector, DynamicsError> {
    Propagator::new(&full_hamiltonian(p, s.n()))?.evolve(s, t)
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionMode {
    Diagonal,
    Full(ModelParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSpec {
    pub chi: f64,
    pub t: f64,
    pub mode: EvolutionMode,
}

impl EvolutionSpec {
    pub fn diagonal(chi: f64, t: f64) -> Self {
        Self {
            chi,
            t,
            mode: EvolutionMode::Diagonal,
        }
    }

    pub fn full(params: ModelParams, t: f64) -> Self {
        Self {
            chi: params.chi(),
            t,
            mode: EvolutionMode::Full(params),
        }
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector, DynamicsError> {
        match &self.mode {
            EvolutionMode::Diagonal => Ok(evolve_diagonal(s, self.chi, self.t)),
            EvolutionMode::Full(p) => evolve_full(s, p, self.t),
        }
    }
}

/// τ = π/|χ|; on the SU(2)₂₃ slice with odd N the period halves.
pub fn recurrence_time(chi: f64, n: u32, slice23: bool) -> Result<f64, DynamicsError> {
    if chi == 0.0 || !chi.is_finite() {
        return Err(DynamicsError::ZeroChi(chi));
    }
    let tau = PI / chi.abs();
    Ok(if slice23 && n % 2 == 1 {
        tau / 2.0
    } else {
        tau
    })
}

/// Phase offsets in units of π/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuarterShift {
    pub phi: i8,
    pub phi1: i8,
    pub phi2: i8,
}

impl QuarterShift {
    pub const fn new(phi: i8, phi1: i8, phi2: i8) -> Self {
        Self { phi, phi1, phi2 }
    }

    pub fn apply(&self, p: &CoherentParams) -> CoherentParams {
        let q = |k: i8| k as f64 * FRAC_PI_2;
        p.shifted(q(self.phi), q(self.phi1), q(self.phi2))
    }

    /// Same shift with every component reduced mod 4.
    pub fn canonical(&self) -> Self {
        Self::new(
            self.phi.rem_euclid(4),
            self.phi1.rem_euclid(4),
            self.phi2.rem_euclid(4),
        )
    }

    /// Equivalent lattice shift with φ fixed: a φ shift by α equals e^{iαN}
    /// times a (φ1, φ2) shift by (−α, −α).
    pub fn on_lattice(&self, n: u32) -> (Self, Complex64) {
        let phase = (self.phi as i64 * n as i64).rem_euclid(4) as f64 * FRAC_PI_2;
        let shift = Self::new(0, self.phi1 - self.phi, self.phi2 - self.phi).canonical();
        (shift, Complex64::from_polar(1.0, phase))
    }

    /// Human-readable form, e.g. "φ1+π/2, φ2−π".
    pub fn describe(&self) -> String {
        let term = |name: &str, k: i8| -> Option<String> {
            let s = match k {
                0 => return None,
                1 => "+π/2",
                -1 => "−π/2",
                2 => "+π",
                -2 => "−π",
                3 => "+3π/2",
                -3 => "−3π/2",
                _ => return Some(format!("{name}{:+}π/2", k)),
            };
            Some(format!("{name}{s}"))
        };
        let parts: Vec<String> = [("φ", self.phi), ("φ1", self.phi1), ("φ2", self.phi2)]
            .into_iter()
            .filter_map(|(n, k)| term(n, k))
            .collect();
        if parts.is_empty() {
            "unshifted".to_string()
        } else {
            parts.join(", ")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictedComponent {
    pub coefficient: Complex64,
    pub shift: QuarterShift,
    pub params: CoherentParams,
}

#[derive(Clone, Copy)]
enum Unit {
    One,
    MinusOne,
    I,
    MinusI,
}

impl Unit {
    fn value(self) -> Complex64 {
        match self {
            Unit::One => Complex64::new(1.0, 0.0),
            Unit::MinusOne => Complex64::new(-1.0, 0.0),
            Unit::I => Complex64::new(0.0, 1.0),
            Unit::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

use Unit::{MinusI as MI, MinusOne as M1, One as P1, I as IP};

// (sign, Δφ, Δφ1, Δφ2) in quarter turns, reference form.
const HALF_EVEN: [(Unit, i8, i8, i8); 4] =
    [(M1, 0, 0, 0), (P1, 0, 2, 0), (P1, 0, 0, 0), (P1, 0, 2, 2)];
const HALF_ODD: [(Unit, i8, i8, i8); 4] =
    [(P1, 0, 0, 0), (P1, 2, 0, 0), (P1, 0, 2, 0), (P1, 0, 0, 2)];

// (sign, Δφ1, Δφ2) in quarter turns; Δφ = 0 throughout.
#[rustfmt::skip]
const QUARTER: [[(Unit, i8, i8); 16]; 4] = [
    // N = 4n
    [
        (P1, 0, 0), (P1, 2, 0), (P1, 0, 2), (P1, 2, 2),
        (MI, 0, -1), (MI, 0, 1), (IP, 1, -1), (MI, 1, 1),
        (IP, 1, 2), (MI, 1, 0), (IP, 2, -1), (IP, 2, 1),
        (MI, -1, -1), (IP, -1, 1), (MI, -1, 0), (IP, -1, 2),
    ],
    // N = 4n + 1
    [
        (P1, 1, 1), (P1, -1, 1), (P1, 1, -1), (P1, -1, -1),
        (MI, 1, 0), (MI, 1, 2), (IP, 2, 0), (MI, 2, 2),
        (IP, 2, -1), (MI, 2, 1), (IP, -1, 0), (IP, -1, 2),
        (MI, 0, 0), (IP, 0, 2), (MI, 0, 1), (IP, 0, -1),
    ],
    // N = 4n + 2
    [
        (P1, 0, 0), (P1, 2, 0), (P1, 0, 2), (P1, 2, 2),
        (MI, 2, 1), (MI, 2, -1), (IP, -1, 1), (MI, -1, -1),
        (IP, -1, 0), (MI, -1, 2), (IP, 0, 1), (IP, 0, -1),
        (MI, 1, 1), (IP, 1, -1), (MI, 1, 2), (IP, 1, 0),
    ],
    // N = 4n + 3
    [
        (P1, -1, -1), (P1, 1, -1), (P1, -1, 1), (P1, 1, 1),
        (MI, -1, 2), (MI, -1, 0), (IP, 0, 2), (MI, 0, 0),
        (IP, 0, 1), (MI, 0, -1), (IP, 1, 2), (IP, 1, 0),
        (MI, 2, 2), (IP, 2, 0), (MI, 2, -1), (IP, 2, 1),
    ],
];

/// e^{−iπ N² / d} computed from N² mod 2d so large N stays exact.
fn n_squared_phase(n: u32, d: u64) -> Complex64 {
    let r = ((n as u64 * n as u64) % (2 * d)) as f64;
    Complex64::from_polar(1.0, -PI * r / d as f64)
}

/// Reference components of |ψ(τ/2)⟩, prefactor ½ e^{−iπN²/3}.
///
/// The even-N form is returned verbatim, including its repeated unshifted
/// term; [`half_time_lattice`] fitting gives the actual decomposition.
pub fn predicted_half_time_components(p: &CoherentParams, n: u32) -> Vec<PredictedComponent> {
    let pre = n_squared_phase(n, 3) * 0.5;
    let table = if n.is_multiple_of(2) {
        &HALF_EVEN
    } else {
        &HALF_ODD
    };
    table
        .iter()
        .map(|&(u, a, b, c)| {
            let shift = QuarterShift::new(a, b, c);
            PredictedComponent {
                coefficient: pre * u.value(),
                shift,
                params: shift.apply(p),
            }
        })
        .collect()
}

/// The sixteen components of |ψ(τ/4)⟩ for the class N mod 4, prefactor
/// ¼ e^{−iπN²/6}.
pub fn predicted_quarter_time_components(p: &CoherentParams, n: u32) -> Vec<PredictedComponent> {
    let pre = n_squared_phase(n, 6) * 0.25;
    QUARTER[(n % 4) as usize]
        .iter()
        .map(|&(u, b, c)| {
            let shift = QuarterShift::new(0, b, c);
            PredictedComponent {
                coefficient: pre * u.value(),
                shift,
                params: shift.apply(p),
            }
        })
        .collect()
}

/// All sixteen (φ1, φ2) shifts by multiples of π/2, φ fixed. A φ shift is a
/// global phase times a (φ1, φ2) shift, so it adds nothing to the span.
pub fn quarter_turn_lattice() -> Vec<QuarterShift> {
    (0..4)
        .flat_map(|a| (0..4).map(move |b| QuarterShift::new(0, a, b)))
        .collect()
}

/// Σ c_k |candidate_k⟩.
pub fn superpose<'a>(
    components: impl IntoIterator<Item = (&'a CoherentParams, Complex64)>,
    n: u32,
) -> StateVector {
    let mut acc = DVector::zeros(crate::fock_basis::dim(n));
    for (p, c) in components {
        acc += su3_coherent(p, n).amps() * c;
    }
    StateVector::from_amplitudes_unchecked(n, acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionFit {
    pub components: Vec<(CoherentParams, Complex64)>,
    /// ‖Σ c_k |candidate_k⟩ − target‖.
    pub residual: f64,
    /// Number of retained singular values.
    pub rank: usize,
    /// Condition number of the retained part of the Gram matrix.
    pub gram_condition: f64,
}

impl SuperpositionFit {
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.components.iter().map(|(_, c)| *c).collect()
    }

    /// True when the candidates are linearly dependent (numerically) and the
    /// coefficients are the minimum-norm choice among many exact solutions.
    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.components.len()
    }
}

/// Least-squares coefficients minimising ‖Σ c_k |candidate_k⟩ − target‖.
///
/// Solved through the SVD of the candidate matrix A (so the Gram matrix A†A
/// is never formed); singular values below `FIT_RELATIVE_CUTOFF · σ_max` are
/// treated as zero, giving the minimum-norm solution for dependent candidates.
pub fn fit_superposition(
    target: &StateVector,
    candidates: &[CoherentParams],
) -> Result<SuperpositionFit, DynamicsError> {
    if candidates.is_empty() {
        return Err(DynamicsError::NoCandidates);
    }
    let n = target.n();
    let columns: Vec<DVector<Complex64>> = candidates
        .iter()
        .map(|p| su3_coherent(p, n).into_amps())
        .collect();
    let a = DMatrix::from_columns(&columns);
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = FIT_RELATIVE_CUTOFF * sigma_max;

    let mut rank = 0;
    let mut sigma_min_kept = f64::INFINITY;
    let inv: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| {
            if s > cutoff && s > 0.0 {
                rank += 1;
                sigma_min_kept = sigma_min_kept.min(s);
                1.0 / s
            } else {
                0.0
            }
        })
        .collect();
    let solve = |rhs: &DVector<Complex64>| {
        let mut projected = u.adjoint() * rhs;
        for (z, w) in projected.iter_mut().zip(&inv) {
            *z *= *w;
        }
        v_t.adjoint() * projected
    };
    // iterative refinement with the same factorisation
    let mut coeffs = solve(target.amps());
    for _ in 0..REFINEMENT_STEPS {
        let r = target.amps() - &a * &coeffs;
        coeffs += solve(&r);
    }
    let residual = (&a * &coeffs - target.amps()).norm();
    let gram_condition = if rank == 0 {
        f64::INFINITY
    } else {
        (sigma_max / sigma_min_kept).powi(2)
    };
    Ok(SuperpositionFit {
        components: candidates
            .iter()
            .copied()
            .zip(coeffs.iter().copied())
            .collect(),
        residual,
        rank,
        gram_condition,
    })
}

/// Rotates `values` by the phase that maps its largest-magnitude entry onto
/// the matching entry of `reference`.
pub fn align_global_phase(values: &[Complex64], reference: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(values.len(), reference.len());
    let Some(k) = (0..values.len()).max_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm()))
    else {
        return Vec::new();
    };
    let (v, r) = (values[k], reference[k]);
    if v.norm() == 0.0 || r.norm() == 0.0 {
        return values.to_vec();
    }
    let rot = Complex64::from_polar(1.0, r.arg() - v.arg());
    values.iter().map(|z| z * rot).collect()
}

/// Fit of the τ/2-evolved state of `p` against the π/2 lattice.
pub fn half_time_lattice(
    p: &CoherentParams,
    n: u32,
    chi: f64,
) -> Result<SuperpositionFit, DynamicsError> {
    let tau = recurrence_time(chi, n, false)?;
    let target = evolve_diagonal(&su3_coherent(p, n), chi, tau / 2.0);
    let candidates: Vec<CoherentParams> =
        quarter_turn_lattice().iter().map(|s| s.apply(p)).collect();
    fit_superposition(&target, &candidates)
}
