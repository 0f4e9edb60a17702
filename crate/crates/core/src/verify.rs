//! Self-check suites run by `su3cat verify`.
//!
//! Each suite compares a library routine with an independent route to the
//! same quantity (generator algebra, multinomial group action, explicit
//! double sums, dense matrix exponentials) over a range of N.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coherent::{
    group_action_state, su2_23_coherent, su3_coherent, su3_matrix, CoherentParams, Su2Params,
};
use crate::dynamics::{evolve_diagonal_signed, phase_exponent, Propagator};
use crate::fock_basis::FockBasis;
use crate::husimi::{q_slice, q_slice_grid_at, GridSpec, SlicePoint};
use crate::state::{fidelity, StateVector};
use crate::su3_operators::{cartan_hamiltonian, generator, ladder, Generator, LadderSign};

pub const DEFAULT_SEED: u64 = 0x5eed;
const TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub n_range: RangeInclusive<u32>,
    pub seed: u64,
    /// Random draws per N in the randomised suites.
    pub draws: usize,
    /// Test hook: flips the sign of the diagonal phase exponent.
    pub flip_phase_sign: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n_range: 1..=12,
            seed: DEFAULT_SEED,
            draws: 4,
            flip_phase_sign: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub max_error: f64,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            max_error: 0.0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, err: f64, tol: f64, what: impl FnOnce() -> String) {
        self.max_error = self.max_error.max(err);
        if err.is_nan() || err > tol {
            self.failures.push(format!("{} (error {err:.3e})", what()));
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {:<18} max error {:.3e}",
            self.name, self.max_error
        )?;
        for line in self.failures.iter().take(5) {
            write!(f, "\n     {line}")?;
        }
        if self.failures.len() > 5 {
            write!(f, "\n     ... {} more", self.failures.len() - 5)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

fn evolve(opts: &VerifyOptions, s: &StateVector, chi_t: f64) -> StateVector {
    evolve_diagonal_signed(s, chi_t, if opts.flip_phase_sign { -1.0 } else { 1.0 })
}

fn random_params(rng: &mut ChaCha8Rng) -> CoherentParams {
    CoherentParams::new(
        rng.random_range(0.0..FRAC_PI_2),
        rng.random_range(0.0..FRAC_PI_2),
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
    )
}

/// Cartan diagonal from generator matrices vs the closed-form exponent,
/// plus ladder/Z/Y consistency.
pub fn operator_identity(opts: &VerifyOptions) -> SuiteResult {
    let mut r = SuiteResult::new("operator-identity");
    let chi = 1.0;
    for n in opts.n_range.clone() {
        let h = cartan_hamiltonian(chi, n);
        let x1 = generator(Generator::X1, n);
        let x2 = generator(Generator::X2, n);
        r.require(h.is_diagonal(0.0), || {
            format!("N={n}: Cartan Hamiltonian not diagonal")
        });
        let comm = x1.commutator(&x2);
        r.check(
            comm.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max),
            1e-12,
            || format!("N={n}: [X1, X2] != 0"),
        );
        for (i, t) in FockBasis::new(n).iter() {
            let (j1, j2) = t.labels();
            let expected = 2.0 * chi * phase_exponent(n, j1, j2);
            let scale = expected.abs().max(1.0);
            r.check((h.get(i, i).re - expected).abs() / scale, 1e-12, || {
                format!("N={n} {t}: diagonal")
            });
        }
        let i = Complex64::i();
        for (k, y, z) in [
            (1, Generator::Y1, Generator::Z1),
            (2, Generator::Y2, Generator::Z2),
            (3, Generator::Y3, Generator::Z3),
        ] {
            let (y, z) = (generator(y, n), generator(z, n));
            let up = ladder(k, LadderSign::Raise, n).expect("k in 1..=3");
            let s = if k == 3 { -1.0 } else { 1.0 };
            let expected = (z.matrix() - y.matrix() * (i * s)) * Complex64::new(0.5, 0.0);
            let err = (up.matrix() - expected)
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            r.check(err, 1e-12, || format!("N={n} k={k}: ladder vs Z/Y"));
        }
    }
    r
}

/// Amplitude formula vs multinomial expansion of g|N,0,0⟩.
pub fn group_action(opts: &VerifyOptions) -> SuiteResult {
    let mut r = SuiteResult::new("group-action");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for n in opts.n_range.clone() {
        for _ in 0..opts.draws {
            let p = random_params(&mut rng);
            let w = Su2Params::new(
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..FRAC_PI_2),
                rng.random_range(0.0..2.0 * PI),
            );
            let col = su3_matrix(&p.group_equivalent(), &w).column(0).into_owned();
            match group_action_state(&col, n) {
                Ok(g) => {
                    let f = fidelity(&g, &su3_coherent(&p, n)).expect("same N");
                    r.check((f - 1.0).abs(), TOL, || format!("N={n} {p:?}"));
                }
                Err(e) => r.require(false, || format!("N={n}: {e}")),
            }
        }
    }
    r
}

/// Explicit double sum over p, q for Q̃ of an evolved SU(2)₂₃ coherent state.
pub fn slice_double_sum(n: u32, xi0: f64, phi2_0: f64, xi: f64, phi2: f64, chi_t: f64) -> f64 {
    let binom = |m: u32, k: u32| (0..k).fold(1.0, |c, i| c * (m - i) as f64 / (i + 1) as f64);
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..=n {
        for q in 0..=n {
            let d = p as i64 - q as i64;
            let s = (p + q) as i64 - n as i64;
            let mag = (xi.sin() * xi0.sin()).powi((p + q) as i32)
                * (xi.cos() * xi0.cos()).powi((2 * n - p - q) as i32)
                * binom(n, p)
                * binom(n, q);
            let arg = -(d as f64) * (phi2 - phi2_0) - 2.0 * chi_t * (d * s) as f64;
            acc += Complex64::from_polar(mag, arg);
        }
    }
    acc.re
}

pub fn slice_brute_force(opts: &VerifyOptions) -> SuiteResult {
    let mut r = SuiteResult::new("slice-double-sum");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x51);
    let grid = GridSpec { nx: 7, ny: 12 };
    for n in opts.n_range.clone() {
        let (xi0, phi2_0) = (
            rng.random_range(0.0..FRAC_PI_2),
            rng.random_range(0.0..2.0 * PI),
        );
        let psi0 = su2_23_coherent(xi0, phi2_0, n);
        for chi_t in [0.0, 0.37, PI / 4.0, 1.3] {
            let psi = evolve(opts, &psi0, chi_t);
            for i in 0..grid.nx {
                for k in 0..grid.ny {
                    let (xi, phi2) = (grid.xi(i), grid.phi2(k));
                    let got = q_slice(&psi, &SlicePoint::new(xi, phi2)).expect("slice state");
                    let oracle = slice_double_sum(n, xi0, phi2_0, xi, phi2, chi_t);
                    r.check((got - oracle).abs(), TOL, || {
                        format!("N={n} χt={chi_t} ξ={xi:.3} φ2={phi2:.3}")
                    });
                }
            }
        }
    }
    r
}

/// Return at χt = π, and agreement of the diagonal phases with a dense
/// exponential of the generator-built Hamiltonian at generic times.
pub fn recurrence(opts: &VerifyOptions) -> SuiteResult {
    let mut r = SuiteResult::new("recurrence");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x14);
    for n in opts.n_range.clone() {
        let prop = match Propagator::new(&cartan_hamiltonian(1.0, n)) {
            Ok(p) => p,
            Err(e) => {
                r.require(false, || format!("N={n}: {e}"));
                continue;
            }
        };
        for _ in 0..opts.draws {
            let psi0 = su3_coherent(&random_params(&mut rng), n);
            let back = evolve(opts, &psi0, PI);
            let f = fidelity(&psi0, &back).expect("same N");
            r.check((f - 1.0).abs(), TOL, || format!("N={n}: fidelity at τ"));
            let t = rng.random_range(0.05..3.0);
            let dense = prop.evolve(&psi0, t).expect("same N");
            let diag = evolve(opts, &psi0, t);
            r.check(dense.distance(&diag).expect("same N"), 1e-9, || {
                format!("N={n} χt={t:.3}: phases vs matrix exponential")
            });
        }
    }
    r
}

/// Slice period π/(2χ) for odd N; even N needs the full π/χ.
pub fn parity(opts: &VerifyOptions) -> SuiteResult {
    let mut r = SuiteResult::new("parity");
    let grid = GridSpec { nx: 10, ny: 24 };
    for n in opts.n_range.clone() {
        let psi0 = su2_23_coherent(FRAC_PI_4, 0.0, n);
        for t in [0.0, 0.3] {
            let frame = |chi_t: f64| {
                q_slice_grid_at(&evolve(opts, &psi0, chi_t), grid, FRAC_PI_2).expect("slice state")
            };
            let a = frame(t);
            let half = a.max_abs_difference(&frame(t + FRAC_PI_2));
            let full = a.max_abs_difference(&frame(t + PI));
            r.check(full, TOL, || format!("N={n} t={t}: period π/χ"));
            if n % 2 == 1 {
                r.check(half, TOL, || format!("N={n} t={t}: odd N period π/(2χ)"));
            } else if n > 0 && t == 0.0 {
                r.require(half > 1e-3, || {
                    format!("N={n}: even N repeats at π/(2χ) (diff {half:.3e})")
                });
            }
        }
    }
    r
}

pub fn run_all(opts: &VerifyOptions) -> VerifyReport {
    VerifyReport {
        suites: vec![
            operator_identity(opts),
            group_action(opts),
            slice_brute_force(opts),
            recurrence(opts),
            parity(opts),
        ],
    }
}
