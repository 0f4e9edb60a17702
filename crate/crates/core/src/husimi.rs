//! Husimi Q-symbol, Q(p) = |⟨p|ψ⟩|², and its slice on the SU(2)₂₃ sphere.
//!
//! Q is evaluated from amplitudes. On the n1 = 0 sector only the j1 = N row of
//! the coherent state survives, so for θ the slice value is
//! sin^{2N}θ · |Σ_q e^{−iφ2 q} sin^q ξ cos^{N−q} ξ √C(N,q) ψ_q|², independent
//! of φ and φ1.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;
use thiserror::Error;

use crate::coherent::{overlap, su3_coherent, CoherentParams, StateError, StateVector};
use crate::fock_basis::dim;

/// Amplitude tolerated on n1 > 0 before a state counts as off-slice.
pub const SLICE_SUPPORT_TOL: f64 = 1e-10;

pub const DEFAULT_GRID_XI: usize = 181;
pub const DEFAULT_GRID_PHI2: usize = 360;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HusimiError {
    #[error("state has amplitude {0:e} on n1 > 0; it is not in the SU(2)₂₃ sector")]
    OffSlice(f64),
    #[error("grid needs at least 2 samples per axis, got {nx}×{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error(transparent)]
    State(#[from] StateError),
}

pub fn q_symbol(psi: &StateVector, p: &CoherentParams) -> Result<f64, StateError> {
    let coherent = su3_coherent(p, psi.n());
    overlap(&coherent, psi).map(|z| z.norm_sqr())
}

/// A point on the (ξ, φ2) sphere; θ selects the slice, π/2 by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicePoint {
    pub xi: f64,
    pub phi2: f64,
    pub theta: f64,
}

impl SlicePoint {
    pub fn new(xi: f64, phi2: f64) -> Self {
        Self {
            xi,
            phi2,
            theta: FRAC_PI_2,
        }
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }
}

/// Initial SU(2)₂₃ coherent state (ξ(0), φ2(0)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceInit {
    pub xi0: f64,
    pub phi2_0: f64,
}

impl SliceInit {
    pub fn new(xi0: f64, phi2_0: f64) -> Self {
        Self { xi0, phi2_0 }
    }
}

/// Amplitudes ψ_q on |0, N−q, q⟩ after checking the state is on the slice.
fn slice_amplitudes(psi: &StateVector) -> Result<&[Complex64], HusimiError> {
    let n = psi.n() as usize;
    let start = dim(psi.n()) - (n + 1);
    let amps = psi.amps().as_slice();
    let off = amps[..start].iter().map(|z| z.norm()).fold(0.0, f64::max);
    if off > SLICE_SUPPORT_TOL {
        return Err(HusimiError::OffSlice(off));
    }
    Ok(&amps[start..])
}

/// Per-ξ real weights sin^q ξ cos^{N−q} ξ √C(N,q).
fn slice_weights(n: u32, xi: f64, half_ln_binom: &[f64]) -> Vec<f64> {
    let (s, c) = if xi == 0.0 {
        (0.0, 1.0)
    } else if xi == FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        xi.sin_cos()
    };
    let (ls, lc) = (s.ln(), c.ln());
    (0..=n)
        .map(|q| {
            let a = if q == 0 { 0.0 } else { q as f64 * ls };
            let b = if q == n { 0.0 } else { (n - q) as f64 * lc };
            (a + b + half_ln_binom[q as usize]).exp()
        })
        .collect()
}

fn half_ln_binomials(n: u32) -> Vec<f64> {
    (0..=n)
        .map(|q| 0.5 * ln_binomial(n as u64, q as u64))
        .collect()
}

fn slice_value(amps: &[Complex64], weights: &[f64], phi2: f64) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (q, (a, w)) in amps.iter().zip(weights).enumerate() {
        acc += a * Complex64::from_polar(*w, -phi2 * q as f64);
    }
    acc.norm_sqr()
}

fn theta_weight(n: u32, theta: f64) -> f64 {
    if theta == FRAC_PI_2 {
        1.0
    } else {
        theta.sin().powi(2 * n as i32)
    }
}

/// Q̃ at `pt` for a state on the n1 = 0 sector.
pub fn q_slice(psi: &StateVector, pt: &SlicePoint) -> Result<f64, HusimiError> {
    let amps = slice_amplitudes(psi)?;
    let n = psi.n();
    let weights = slice_weights(n, pt.xi, &half_ln_binomials(n));
    Ok(theta_weight(n, pt.theta) * slice_value(amps, &weights, pt.phi2))
}

/// Uniform (ξ, φ2) sampling: ξ over [0, π/2] inclusive, φ2 over [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nx: DEFAULT_GRID_XI,
            ny: DEFAULT_GRID_PHI2,
        }
    }
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize) -> Result<Self, HusimiError> {
        if nx < 2 || ny < 2 {
            return Err(HusimiError::GridTooSmall { nx, ny });
        }
        Ok(Self { nx, ny })
    }

    pub fn xi(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            FRAC_PI_2
        } else {
            i as f64 * FRAC_PI_2 / (self.nx - 1) as f64
        }
    }

    pub fn phi2(&self, k: usize) -> f64 {
        k as f64 * TAU / self.ny as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parameters the frame was generated with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMeta {
    pub t: f64,
    pub chi: f64,
    pub initial: Option<SliceInit>,
}

impl Default for FrameMeta {
    fn default() -> Self {
        Self {
            t: 0.0,
            chi: 1.0,
            initial: None,
        }
    }
}

/// Q̃ sampled on a grid, row-major in ξ then φ2.
#[derive(Debug, Clone, PartialEq)]
pub struct QFrame {
    pub n: u32,
    pub theta: f64,
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub meta: FrameMeta,
}

impl QFrame {
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.grid.ny + k]
    }

    pub fn with_meta(mut self, meta: FrameMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn max_abs_difference(&self, other: &QFrame) -> f64 {
        assert_eq!(self.grid, other.grid, "frames on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Grid position (i, k) of the global maximum.
    pub fn argmax(&self) -> (usize, usize) {
        let best = (0..self.values.len())
            .max_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
            .unwrap_or(0);
        (best / self.grid.ny, best % self.grid.ny)
    }

    /// φ2 indices of local maxima along the ξ row `i` (cyclic in φ2).
    /// Maxima below `rel_floor` × the row maximum are ignored, which removes
    /// round-off ripples in regions where Q̃ vanishes.
    pub fn circle_maxima(&self, i: usize, rel_floor: f64) -> Vec<usize> {
        let ny = self.grid.ny;
        let row = &self.values[i * ny..(i + 1) * ny];
        let top = row.iter().cloned().fold(0.0, f64::max);
        (0..ny)
            .filter(|&k| {
                let (prev, next) = (row[(k + ny - 1) % ny], row[(k + 1) % ny]);
                row[k] >= rel_floor * top && row[k] > prev && row[k] >= next
            })
            .collect()
    }
}

/// Samples Q̃ (θ = π/2) on a uniform grid.
pub fn q_slice_grid(psi: &StateVector, nx: usize, ny: usize) -> Result<QFrame, HusimiError> {
    q_slice_grid_at(psi, GridSpec::new(nx, ny)?, FRAC_PI_2)
}

/// As [`q_slice_grid`] on an arbitrary θ slice.
pub fn q_slice_grid_at(
    psi: &StateVector,
    grid: GridSpec,
    theta: f64,
) -> Result<QFrame, HusimiError> {
    let amps = slice_amplitudes(psi)?;
    let n = psi.n();
    let binom = half_ln_binomials(n);
    let tw = theta_weight(n, theta);
    let rows: Vec<Vec<f64>> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let weights = slice_weights(n, grid.xi(i), &binom);
            (0..grid.ny)
                .map(|k| tw * slice_value(amps, &weights, grid.phi2(k)))
                .collect()
        })
        .collect();
    Ok(QFrame {
        n,
        theta,
        grid,
        values: rows.concat(),
        meta: FrameMeta::default(),
    })
}
