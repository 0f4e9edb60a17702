//! Bosonic realization of su(3) on the fixed-N space, and the two
//! Hamiltonians of the three-mode nonlinear oscillator.
//!
//! Conventions:
//! - For k ∈ {1,2,3} the partner mode is j = k mod 3 + 1.
//! - Y_k = i(c_k†c_j − c_j†c_k), Z_k = c_k†c_j + c_j†c_k.
//! - X1 = n1 − n2, X2 = (n1 + n2 − 2 n3)/3.
//! - Raising operators move one boson toward the lower-indexed mode of the
//!   pair: J₊ᵏ = c_a†c_b with a = min(k, j), b = max(k, j). For k = 1, 2 this
//!   is (Z_k − iY_k)/2; for k = 3 it is (Z_3 + iY_3)/2. Every J₊ᵏ annihilates
//!   |N,0,0⟩.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;
use thiserror::Error;

use crate::fock_basis::{index_of, FockBasis};

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("ladder index must be 1, 2 or 3, got {0}")]
    InvalidLadderIndex(i64),
    #[error("tunneling matrix is not Hermitian: |Ω[{row},{col}] − conj(Ω[{col},{row}])| = {deviation:e}")]
    NonHermitianTunneling {
        row: usize,
        col: usize,
        deviation: f64,
    },
    #[error(
        "tunneling matrix diagonal must vanish (Ω[{0},{0}] ≠ 0); on-site energies go into omega"
    )]
    TunnelingDiagonal(usize),
    #[error("model coefficient `{0}` is not finite")]
    NonFinite(&'static str),
}

/// The eight Hermitian generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    X1,
    X2,
    Y1,
    Y2,
    Y3,
    Z1,
    Z2,
    Z3,
}

impl Generator {
    pub const ALL: [Generator; 8] = [
        Generator::X1,
        Generator::X2,
        Generator::Y1,
        Generator::Y2,
        Generator::Y3,
        Generator::Z1,
        Generator::Z2,
        Generator::Z3,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderSign {
    Raise,
    Lower,
}

/// A dense operator on the fixed-N space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    n: u32,
    mat: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn diagonal(&self) -> DVector<Complex64> {
        self.mat.diagonal()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            mat: self.mat.adjoint(),
        }
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.mat;
        let mut worst = 0.0f64;
        for r in 0..m.nrows() {
            for c in r..m.ncols() {
                worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.mat * v
    }

    /// AB − BA.
    pub fn commutator(&self, other: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(
            self.n, other.n,
            "commutator of operators on different irreps"
        );
        let ab = &self.mat * &other.mat;
        let ba = &other.mat * &self.mat;
        Self {
            n: self.n,
            mat: ab - ba,
        }
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let m = &self.mat;
        (0..m.nrows()).all(|r| (0..m.ncols()).all(|c| r == c || m[(r, c)].norm() <= tol))
    }
}

impl fmt::Display for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OperatorMatrix(N={}, dim={})", self.n, self.dim())
    }
}

/// Matrix of c_a† c_b (0-based modes, a ≠ b).
fn hop(basis: &FockBasis, a: usize, b: usize) -> DMatrix<Complex64> {
    debug_assert_ne!(a, b);
    let d = basis.dim();
    let mut m = DMatrix::zeros(d, d);
    for (col, t) in basis.iter() {
        let nb = t.occupation(b);
        if nb == 0 {
            continue;
        }
        let na = t.occupation(a);
        let target = t.with_occupation(b, nb - 1).with_occupation(a, na + 1);
        let row = index_of(target).idx;
        m[(row, col)] = Complex64::new((((na + 1) * nb) as f64).sqrt(), 0.0);
    }
    m
}

fn diagonal_from(basis: &FockBasis, f: impl Fn(u32, u32, u32) -> f64) -> DMatrix<Complex64> {
    let values: Vec<Complex64> = basis
        .states()
        .iter()
        .map(|t| Complex64::new(f(t.n1, t.n2, t.n3), 0.0))
        .collect();
    DMatrix::from_diagonal(&DVector::from_vec(values))
}

/// 0-based (k, j) for the 1-based generator index k.
fn pair(k: usize) -> (usize, usize) {
    let k0 = k - 1;
    (k0, (k0 + 1) % 3)
}

pub fn generator(name: Generator, n: u32) -> OperatorMatrix {
    let basis = FockBasis::new(n);
    let i = Complex64::i();
    let mat = match name {
        Generator::X1 => diagonal_from(&basis, |n1, n2, _| n1 as f64 - n2 as f64),
        Generator::X2 => diagonal_from(&basis, |n1, n2, n3| {
            (n1 as f64 + n2 as f64 - 2.0 * n3 as f64) / 3.0
        }),
        Generator::Y1 | Generator::Y2 | Generator::Y3 => {
            let k = match name {
                Generator::Y1 => 1,
                Generator::Y2 => 2,
                _ => 3,
            };
            let (a, b) = pair(k);
            (hop(&basis, a, b) - hop(&basis, b, a)) * i
        }
        Generator::Z1 | Generator::Z2 | Generator::Z3 => {
            let k = match name {
                Generator::Z1 => 1,
                Generator::Z2 => 2,
                _ => 3,
            };
            let (a, b) = pair(k);
            hop(&basis, a, b) + hop(&basis, b, a)
        }
    };
    OperatorMatrix { n, mat }
}

pub fn ladder(k: i64, sign: LadderSign, n: u32) -> Result<OperatorMatrix, OperatorError> {
    if !(1..=3).contains(&k) {
        return Err(OperatorError::InvalidLadderIndex(k));
    }
    let (p, q) = pair(k as usize);
    let (lo, hi) = (p.min(q), p.max(q));
    let basis = FockBasis::new(n);
    let mat = match sign {
        LadderSign::Raise => hop(&basis, lo, hi),
        LadderSign::Lower => hop(&basis, hi, lo),
    };
    Ok(OperatorMatrix { n, mat })
}

/// Physical coefficients of the three-mode Hamiltonian.
///
/// `tunneling` holds Ω_jk; only off-diagonal entries enter the Hamiltonian and
/// the diagonal must be zero. χ = χ1 − χ2 is always derived.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    omega: f64,
    chi1: f64,
    chi2: f64,
    tunneling: Matrix3<Complex64>,
}

impl ModelParams {
    pub fn new(
        omega: f64,
        chi1: f64,
        chi2: f64,
        tunneling: Matrix3<Complex64>,
    ) -> Result<Self, OperatorError> {
        for (name, v) in [("omega", omega), ("chi1", chi1), ("chi2", chi2)] {
            if !v.is_finite() {
                return Err(OperatorError::NonFinite(name));
            }
        }
        if tunneling
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(OperatorError::NonFinite("tunneling"));
        }
        for r in 0..3 {
            if tunneling[(r, r)].norm() > HERMITIAN_TOL {
                return Err(OperatorError::TunnelingDiagonal(r));
            }
            for c in r + 1..3 {
                let deviation = (tunneling[(r, c)] - tunneling[(c, r)].conj()).norm();
                if deviation > HERMITIAN_TOL {
                    return Err(OperatorError::NonHermitianTunneling {
                        row: r,
                        col: c,
                        deviation,
                    });
                }
            }
        }
        Ok(Self {
            omega,
            chi1,
            chi2,
            tunneling,
        })
    }

    /// Pure Kerr model: no tunneling.
    pub fn kerr(omega: f64, chi1: f64, chi2: f64) -> Result<Self, OperatorError> {
        Self::new(omega, chi1, chi2, Matrix3::zeros())
    }

    /// Builds Ω from its upper-triangle entries (Ω12, Ω13, Ω23).
    pub fn with_upper_tunneling(
        omega: f64,
        chi1: f64,
        chi2: f64,
        upper: [Complex64; 3],
    ) -> Result<Self, OperatorError> {
        let [o12, o13, o23] = upper;
        let z = Complex64::new(0.0, 0.0);
        let t = Matrix3::new(z, o12, o13, o12.conj(), z, o23, o13.conj(), o23.conj(), z);
        Self::new(omega, chi1, chi2, t)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn chi1(&self) -> f64 {
        self.chi1
    }

    pub fn chi2(&self) -> f64 {
        self.chi2
    }

    pub fn chi(&self) -> f64 {
        self.chi1 - self.chi2
    }

    pub fn tunneling(&self) -> &Matrix3<Complex64> {
        &self.tunneling
    }

    /// Single-particle matrix M = Ω + ω·I; for χ1 = χ2 = 0 the many-body
    /// Hamiltonian is Σ M_jk c_j†c_k.
    pub fn single_particle_matrix(&self) -> Matrix3<Complex64> {
        self.tunneling + Matrix3::identity() * Complex64::new(self.omega, 0.0)
    }
}

/// H = ω N + χ1 Σ n_k(n_k − 1) + χ2 Σ_{j≠k} n_j n_k + Σ_{j≠k} Ω_jk c_j†c_k.
pub fn full_hamiltonian(p: &ModelParams, n: u32) -> OperatorMatrix {
    let basis = FockBasis::new(n);
    let mut mat = diagonal_from(&basis, |n1, n2, n3| {
        let occ = [n1 as f64, n2 as f64, n3 as f64];
        let total: f64 = occ.iter().sum();
        let self_mod: f64 = occ.iter().map(|&x| x * (x - 1.0)).sum();
        let sum_sq: f64 = occ.iter().map(|&x| x * x).sum();
        // Σ_{j≠k} n_j n_k over ordered pairs = N² − Σ n_k²
        let cross = total * total - sum_sq;
        p.omega * total + p.chi1 * self_mod + p.chi2 * cross
    });
    for j in 0..3 {
        for k in 0..3 {
            let w = p.tunneling[(j, k)];
            if j != k && w.norm() > 0.0 {
                mat += hop(&basis, j, k) * w;
            }
        }
    }
    OperatorMatrix { n, mat }
}

/// (χ/2)(X1² + 3 X2²), diagonal in the canonical basis.
pub fn cartan_hamiltonian(chi: f64, n: u32) -> OperatorMatrix {
    let x1 = generator(Generator::X1, n).diagonal();
    let x2 = generator(Generator::X2, n).diagonal();
    let diag = x1.zip_map(&x2, |a, b| (a * a + b * b * 3.0) * (chi / 2.0));
    OperatorMatrix {
        n,
        mat: DMatrix::from_diagonal(&diag),
    }
}
