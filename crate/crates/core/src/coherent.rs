//! SU(3) coherent states of the fully symmetric irrep.
//!
//! The amplitude of |ξ,θ,φ,φ1,φ2⟩ on |N−j1, j1−j2, j2⟩ is
//!
//! ```text
//! e^{iφ(N−j1)} sin^{j1}θ cos^{N−j1}θ √C(N,j1)
//!   · e^{iφ1(j1−j2)} e^{iφ2 j2} sin^{j2}ξ cos^{j1−j2}ξ √C(j1,j2)
//! ```
//!
//! which is the definitional construction here. The independent route is the
//! multinomial expansion of a rotated highest-weight state,
//! g|N,0,0⟩ = (g11 c1† + g21 c2† + g31 c3†)^N |0⟩ / √N!, see
//! [`group_action_state`]. The first column of the block product
//! diag(1,V)·R12(θ,φ)·diag(1,W) has third entry −e^{−iφ2} sinξ sinθ, so the two
//! agree after φ2 ↦ π − φ2 ([`CoherentParams::group_equivalent`]).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use statrs::function::factorial::{ln_binomial, ln_factorial};
use thiserror::Error;

use crate::fock_basis::{dim, FockBasis};
pub use crate::state::{fidelity, overlap, StateError, StateVector};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoherentError {
    #[error("group column is not normalised: Σ|g|² = {0}")]
    ColumnNotNormalised(f64),
    #[error("coherent-state parameter `{0}` is not finite")]
    NonFinite(&'static str),
}

/// Wraps a phase into [0, 2π).
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Folds a polar angle into [0, π/2]. Returns the folded angle and whether
/// cos and sin changed sign.
fn fold_angle(x: f64) -> (f64, bool, bool) {
    let a = wrap_phase(x);
    if a <= FRAC_PI_2 {
        (a, false, false)
    } else if a <= PI {
        (PI - a, true, false)
    } else if a <= 3.0 * FRAC_PI_2 {
        (a - PI, true, true)
    } else {
        (TAU - a, false, true)
    }
}

/// (sin, cos) of an angle in [0, π/2], exact at the endpoints.
fn sin_cos(a: f64) -> (f64, f64) {
    if a == 0.0 {
        (0.0, 1.0)
    } else if a == FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        a.sin_cos()
    }
}

/// k·ln(x), with 0·ln 0 = 0.
fn pow_ln(k: u32, ln_x: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * ln_x
    }
}

/// The five labels of an SU(3) coherent state.
///
/// Stored reduced: ξ, θ ∈ [0, π/2], phases in [0, 2π). Reduction uses the
/// periodicity of the amplitude formula and yields the identical state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    xi: f64,
    theta: f64,
    phi: f64,
    phi1: f64,
    phi2: f64,
}

impl CoherentParams {
    pub fn new(xi: f64, theta: f64, phi: f64, phi1: f64, phi2: f64) -> Self {
        let (theta, theta_cos_flip, theta_sin_flip) = fold_angle(theta);
        let (xi, xi_cos_flip, xi_sin_flip) = fold_angle(xi);
        let (mut phi, mut phi1, mut phi2) = (phi, phi1, phi2);
        // cos^{N−j1}θ sign → e^{iπ(N−j1)}
        if theta_cos_flip {
            phi += PI;
        }
        // sin^{j1}θ sign → e^{iπ(j1−j2)} e^{iπ j2}
        if theta_sin_flip {
            phi1 += PI;
            phi2 += PI;
        }
        if xi_cos_flip {
            phi1 += PI;
        }
        if xi_sin_flip {
            phi2 += PI;
        }
        Self {
            xi,
            theta,
            phi: wrap_phase(phi),
            phi1: wrap_phase(phi1),
            phi2: wrap_phase(phi2),
        }
    }

    pub fn try_new(
        xi: f64,
        theta: f64,
        phi: f64,
        phi1: f64,
        phi2: f64,
    ) -> Result<Self, CoherentError> {
        for (name, v) in [
            ("xi", xi),
            ("theta", theta),
            ("phi", phi),
            ("phi1", phi1),
            ("phi2", phi2),
        ] {
            if !v.is_finite() {
                return Err(CoherentError::NonFinite(name));
            }
        }
        Ok(Self::new(xi, theta, phi, phi1, phi2))
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    /// Relative phases (φ1 − φ, φ2 − φ1), wrapped.
    pub fn relative_phases(&self) -> (f64, f64) {
        (
            wrap_phase(self.phi1 - self.phi),
            wrap_phase(self.phi2 - self.phi1),
        )
    }

    pub fn shifted(&self, d_phi: f64, d_phi1: f64, d_phi2: f64) -> Self {
        Self::new(
            self.xi,
            self.theta,
            self.phi + d_phi,
            self.phi1 + d_phi1,
            self.phi2 + d_phi2,
        )
    }

    /// Parameters whose block-product group column reproduces this state:
    /// φ2 ↦ π − φ2 (an involution).
    pub fn group_equivalent(&self) -> Self {
        Self::new(self.xi, self.theta, self.phi, self.phi1, PI - self.phi2)
    }

    /// V ∈ SU(2)₂₃ built from (φ1, ξ, φ2).
    pub fn v_block(&self) -> Su2Params {
        Su2Params {
            phi_a: self.phi1,
            angle: self.xi,
            phi_b: self.phi2,
        }
    }
}

/// g(φa, α, φb) = [[e^{iφa} cos α, e^{iφb} sin α], [−e^{−iφb} sin α, e^{−iφa} cos α]].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Su2Params {
    pub phi_a: f64,
    pub angle: f64,
    pub phi_b: f64,
}

impl Su2Params {
    pub fn new(phi_a: f64, angle: f64, phi_b: f64) -> Self {
        Self {
            phi_a,
            angle,
            phi_b,
        }
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        let (s, c) = self.angle.sin_cos();
        let ea = Complex64::from_polar(1.0, self.phi_a);
        let eb = Complex64::from_polar(1.0, self.phi_b);
        Matrix2::new(ea * c, eb * s, -eb.conj() * s, ea.conj() * c)
    }
}

fn embed_23(block: &Matrix2<Complex64>) -> Matrix3<Complex64> {
    let mut m = Matrix3::identity();
    m.fixed_view_mut::<2, 2>(1, 1).copy_from(block);
    m
}

/// diag(1, V) · R12(θ, φ) · diag(1, W) with V from (φ1, ξ, φ2) of `p`.
pub fn su3_matrix(p: &CoherentParams, w: &Su2Params) -> Matrix3<Complex64> {
    let v = embed_23(&p.v_block().matrix());
    let w = embed_23(&w.matrix());
    let (s, c) = p.theta.sin_cos();
    let e = Complex64::from_polar(1.0, p.phi);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let r12 = Matrix3::new(
        e * c,
        Complex64::new(-s, 0.0),
        zero,
        Complex64::new(s, 0.0),
        e.conj() * c,
        zero,
        zero,
        zero,
        one,
    );
    v * r12 * w
}

/// ½ ln C(n, k).
fn half_ln_binomial(n: u32, k: u32) -> f64 {
    0.5 * ln_binomial(n as u64, k as u64)
}

pub fn su3_coherent(p: &CoherentParams, n: u32) -> StateVector {
    let (st, ct) = sin_cos(p.theta);
    let (sx, cx) = sin_cos(p.xi);
    let (lst, lct, lsx, lcx) = (st.ln(), ct.ln(), sx.ln(), cx.ln());
    let nf = n as f64;
    let mut amps = Vec::with_capacity(dim(n));
    for j1 in 0..=n {
        let outer = pow_ln(j1, lst) + pow_ln(n - j1, lct) + half_ln_binomial(n, j1);
        for j2 in 0..=j1 {
            let ln_mag = outer + pow_ln(j2, lsx) + pow_ln(j1 - j2, lcx) + half_ln_binomial(j1, j2);
            let arg = p.phi * (nf - j1 as f64) + p.phi1 * (j1 - j2) as f64 + p.phi2 * j2 as f64;
            amps.push(Complex64::from_polar(ln_mag.exp(), arg));
        }
    }
    StateVector::from_amplitudes_unchecked(n, amps.into())
}

/// SU(2)₂₃ coherent state on the n1 = 0 sector:
/// Σ_{j2} e^{iφ2 j2} sin^{j2}ξ cos^{N−j2}ξ √C(N,j2) |0, N−j2, j2⟩.
pub fn su2_23_coherent(xi0: f64, phi2_0: f64, n: u32) -> StateVector {
    // θ = π/2, φ = φ1 = 0 gives exactly this state
    let p = CoherentParams::new(xi0, FRAC_PI_2, 0.0, 0.0, phi2_0);
    let mut amps = nalgebra::DVector::zeros(dim(n));
    let (sx, cx) = sin_cos(p.xi);
    let (lsx, lcx) = (sx.ln(), cx.ln());
    let offset = dim(n) - (n as usize + 1);
    for j2 in 0..=n {
        let ln_mag = pow_ln(j2, lsx) + pow_ln(n - j2, lcx) + half_ln_binomial(n, j2);
        amps[offset + j2 as usize] = Complex64::from_polar(ln_mag.exp(), p.phi2 * j2 as f64);
    }
    StateVector::from_amplitudes_unchecked(n, amps)
}

/// g|N,0,0⟩ for g with first column `column`: amplitude
/// √(N!/(n1!n2!n3!)) g1^{n1} g2^{n2} g3^{n3}.
pub fn group_action_state(
    column: &Vector3<Complex64>,
    n: u32,
) -> Result<StateVector, CoherentError> {
    let norm_sq: f64 = column.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > NORM_TOL || !norm_sq.is_finite() {
        return Err(CoherentError::ColumnNotNormalised(norm_sq));
    }
    let ln_abs: Vec<f64> = column.iter().map(|z| z.norm().ln()).collect();
    let args: Vec<f64> = column.iter().map(|z| z.arg()).collect();
    let ln_n_fact = ln_factorial(n as u64);
    let amps: Vec<Complex64> = FockBasis::new(n)
        .states()
        .iter()
        .map(|t| {
            let occ = [t.n1, t.n2, t.n3];
            let ln_multinomial =
                ln_n_fact - occ.iter().map(|&k| ln_factorial(k as u64)).sum::<f64>();
            let ln_mag = 0.5 * ln_multinomial
                + occ
                    .iter()
                    .zip(&ln_abs)
                    .map(|(&k, &l)| pow_ln(k, l))
                    .sum::<f64>();
            let arg: f64 = occ.iter().zip(&args).map(|(&k, &a)| k as f64 * a).sum();
            Complex64::from_polar(ln_mag.exp(), arg)
        })
        .collect();
    Ok(StateVector::from_amplitudes_unchecked(n, amps.into()))
}
