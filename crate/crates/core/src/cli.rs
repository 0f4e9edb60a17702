//! Command-line front end.
//!
//! Settings come from an optional `key = value` file (keys carry a section
//! prefix such as `model.n` or `initial.xi0`) and are overridden by flags.
//! χ defaults to 1, so `--t` is read as χt.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Matrix3;
use num_complex::Complex64;
use thiserror::Error;

use crate::coherent::{su2_23_coherent, su3_coherent, wrap_phase, CoherentParams, StateVector};
use crate::dynamics::{
    evolve_diagonal, evolve_full, fit_superposition, predicted_half_time_components,
    predicted_quarter_time_components, quarter_turn_lattice, superpose, QuarterShift,
    SuperpositionFit,
};
use crate::fock_basis::{checked_n, DEFAULT_MAX_N};
use crate::husimi::{GridSpec, SliceInit};
use crate::render::{
    frame_sequence, write_frames, ImageOptions, RenderError, Scale, DEFAULT_FRAME_COUNT,
};
use crate::state::fidelity;
use crate::su3_operators::ModelParams;
use crate::verify::{run_all, VerifyOptions, VerifyReport, DEFAULT_SEED};

pub const DEFAULT_N: u32 = 10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Usage { field: String, message: String },
    #[error("verification failed")]
    VerifyFailed,
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    fn usage(field: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } | CliError::Numeric(_) => 1,
            CliError::VerifyFailed => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("cannot write {}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "su3cat",
    version,
    about = "SU(3) Kerr cat-state dynamics on a fixed-N Fock space"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve an initial state and dump its amplitudes.
    Evolve(#[command(flatten)] Settings),
    /// Fit the τ/2 or τ/4 state onto shifted coherent states.
    Decompose {
        #[arg(long, value_enum)]
        fraction: Option<Fraction>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Emit Q̃ frames on the SU(2)₂₃ slice from t = 0 to t (default τ/2).
    Frames {
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Run the self-check suites.
    Verify {
        /// Verify against a flipped phase exponent (the suites must fail).
        #[arg(long, hide = true)]
        flip_phase_sign: bool,
        #[command(flatten)]
        settings: Settings,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fraction {
    Half,
    Quarter,
}

impl Fraction {
    fn divisor(self) -> f64 {
        match self {
            Fraction::Half => 2.0,
            Fraction::Quarter => 4.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Fraction::Half => "half",
            Fraction::Quarter => "quarter",
        }
    }
}

/// Raw settings, all optional; flags and the config file both produce one.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Settings {
    #[arg(long)]
    pub n: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub chi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub chi1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub chi2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Upper tunnelling entries re12,im12,re13,im13,re23,im23.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub tunneling: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi0: Option<f64>,
    /// Selects a full SU(3) coherent initial state; otherwise the slice state.
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi2: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "tau_fraction")]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_fraction: Option<f64>,
    /// Grid as NXxNY, e.g. 181x360.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scale: Option<ScaleArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Log,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        Settings { $($f: $top.$f.clone().or_else(|| $base.$f.clone()),)* }
    };
}

impl Settings {
    /// Fields of `self` win over `base`.
    pub fn over(&self, base: &Settings) -> Settings {
        overlay!(
            base,
            self,
            n,
            chi,
            chi1,
            chi2,
            omega,
            tunneling,
            xi0,
            theta0,
            phi,
            phi1,
            phi2,
            t,
            tau_fraction,
            grid,
            out,
            scale,
            seed,
            config
        )
    }
}

const KEYS: [&str; 17] = [
    "model.n",
    "model.chi",
    "model.chi1",
    "model.chi2",
    "model.omega",
    "model.tunneling",
    "initial.xi0",
    "initial.theta0",
    "initial.phi",
    "initial.phi1",
    "initial.phi2",
    "time.t",
    "time.tau_fraction",
    "output.grid",
    "output.dir",
    "output.scale",
    "run.seed",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::usage(key, format!("cannot parse {v:?}")))
}

/// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors.
pub fn parse_config_text(text: &str) -> Result<(Settings, BTreeMap<String, String>), CliError> {
    let mut s = Settings::default();
    let mut extra = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(
                "config",
                format!("line {}: expected key = value", lineno + 1),
            ));
        };
        let (key, v) = (key.trim(), value.trim());
        match key {
            "model.n" => s.n = Some(parse_num(key, v)?),
            "model.chi" => s.chi = Some(parse_num(key, v)?),
            "model.chi1" => s.chi1 = Some(parse_num(key, v)?),
            "model.chi2" => s.chi2 = Some(parse_num(key, v)?),
            "model.omega" => s.omega = Some(parse_num(key, v)?),
            "model.tunneling" => {
                s.tunneling = Some(
                    v.split(',')
                        .map(|x| parse_num(key, x.trim()))
                        .collect::<Result<_, _>>()?,
                )
            }
            "initial.xi0" => s.xi0 = Some(parse_num(key, v)?),
            "initial.theta0" => s.theta0 = Some(parse_num(key, v)?),
            "initial.phi" => s.phi = Some(parse_num(key, v)?),
            "initial.phi1" => s.phi1 = Some(parse_num(key, v)?),
            "initial.phi2" => s.phi2 = Some(parse_num(key, v)?),
            "time.t" => s.t = Some(parse_num(key, v)?),
            "time.tau_fraction" => s.tau_fraction = Some(parse_num(key, v)?),
            "output.grid" => s.grid = Some(v.to_string()),
            "output.dir" => s.out = Some(PathBuf::from(v)),
            "output.scale" => {
                s.scale = Some(match v {
                    "linear" => ScaleArg::Linear,
                    "log" => ScaleArg::Log,
                    _ => {
                        return Err(CliError::usage(
                            key,
                            format!("expected linear or log, got {v:?}"),
                        ))
                    }
                })
            }
            "run.seed" => s.seed = Some(parse_num(key, v)?),
            "frames.count" | "decompose.fraction" => {
                extra.insert(key.to_string(), v.to_string());
            }
            _ => return Err(CliError::usage(key, "unknown config key")),
        }
    }
    Ok((s, extra))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Kerr { chi: f64 },
    Full(ModelParams),
}

impl Model {
    pub fn chi(&self) -> f64 {
        match self {
            Model::Kerr { chi } => *chi,
            Model::Full(p) => p.chi(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Coherent(CoherentParams),
    Slice(SliceInit),
}

impl InitialState {
    pub fn state(&self, n: u32) -> StateVector {
        match self {
            InitialState::Coherent(p) => su3_coherent(p, n),
            InitialState::Slice(s) => su2_23_coherent(s.xi0, s.phi2_0, n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeSpec {
    Absolute(f64),
    TauFraction(f64),
}

/// Validated, canonical configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: u32,
    pub model: Model,
    pub initial: InitialState,
    pub time: Option<TimeSpec>,
    pub grid: GridSpec,
    pub out: PathBuf,
    pub scale: Scale,
    pub seed: u64,
}

fn finite(field: &str, v: Option<f64>) -> Result<Option<f64>, CliError> {
    match v {
        Some(x) if !x.is_finite() => Err(CliError::usage(field, "must be finite")),
        other => Ok(other),
    }
}

fn parse_grid(s: &str) -> Result<GridSpec, CliError> {
    let bad = || CliError::usage("grid", format!("expected NXxNY, got {s:?}"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let nx = a.trim().parse().map_err(|_| bad())?;
    let ny = b.trim().parse().map_err(|_| bad())?;
    GridSpec::new(nx, ny).map_err(|e| CliError::usage("grid", e.to_string()))
}

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<Self, CliError> {
        let n = checked_n(s.n.unwrap_or(DEFAULT_N as i64), DEFAULT_MAX_N)
            .map_err(|e| CliError::usage("n", e.to_string()))?;

        let chi = finite("chi", s.chi)?;
        let (chi1, chi2, omega) = (
            finite("chi1", s.chi1)?,
            finite("chi2", s.chi2)?,
            finite("omega", s.omega)?,
        );
        let full = chi1.is_some() || chi2.is_some() || omega.is_some() || s.tunneling.is_some();
        let model = if full {
            if chi.is_some() {
                return Err(CliError::usage(
                    "chi",
                    "give either chi or chi1/chi2/omega/tunneling",
                ));
            }
            let t = match &s.tunneling {
                None => vec![0.0; 6],
                Some(v) if v.len() == 6 && v.iter().all(|x| x.is_finite()) => v.clone(),
                Some(v) => {
                    return Err(CliError::usage(
                        "tunneling",
                        format!("expected 6 finite numbers, got {}", v.len()),
                    ))
                }
            };
            let c = |k: usize| Complex64::new(t[2 * k], t[2 * k + 1]);
            let params = ModelParams::with_upper_tunneling(
                omega.unwrap_or(0.0),
                chi1.unwrap_or(0.0),
                chi2.unwrap_or(0.0),
                [c(0), c(1), c(2)],
            )
            .map_err(|e| CliError::usage("tunneling", e.to_string()))?;
            Model::Full(params)
        } else {
            let chi = chi.unwrap_or(1.0);
            if chi == 0.0 {
                return Err(CliError::usage("chi", "must be non-zero"));
            }
            Model::Kerr { chi }
        };

        let xi0 = finite("xi0", s.xi0)?.unwrap_or(FRAC_PI_4);
        let phi2 = finite("phi2", s.phi2)?.unwrap_or(0.0);
        let initial = match finite("theta0", s.theta0)? {
            Some(theta) => InitialState::Coherent(CoherentParams::new(
                xi0,
                theta,
                finite("phi", s.phi)?.unwrap_or(0.0),
                finite("phi1", s.phi1)?.unwrap_or(0.0),
                phi2,
            )),
            None => {
                if s.phi.is_some() || s.phi1.is_some() {
                    return Err(CliError::usage(
                        "phi",
                        "phi and phi1 need --theta0 (slice states take xi0 and phi2 only)",
                    ));
                }
                // fold ξ through the θ = π/2 coherent state; φ and φ1 only move the global phase
                let p = CoherentParams::new(xi0, FRAC_PI_2, 0.0, 0.0, phi2);
                InitialState::Slice(SliceInit::new(p.xi(), wrap_phase(p.phi2() - p.phi1())))
            }
        };

        let time = match (finite("t", s.t)?, finite("tau_fraction", s.tau_fraction)?) {
            (Some(_), Some(_)) => {
                return Err(CliError::usage("t", "give either t or tau_fraction"))
            }
            (Some(t), None) => Some(TimeSpec::Absolute(t)),
            (None, Some(f)) => {
                if model.chi() == 0.0 {
                    return Err(CliError::usage(
                        "tau_fraction",
                        "τ is undefined when chi1 = chi2",
                    ));
                }
                Some(TimeSpec::TauFraction(f))
            }
            (None, None) => None,
        };

        let grid = match &s.grid {
            Some(g) => parse_grid(g)?,
            None => GridSpec::default(),
        };
        let scale = match s.scale {
            Some(ScaleArg::Log) => Scale::Log,
            _ => Scale::Linear,
        };
        Ok(RunConfig {
            n,
            model,
            initial,
            time,
            grid,
            out: s.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            scale,
            seed: s.seed.unwrap_or(DEFAULT_SEED),
        })
    }

    /// Reads `--config` if present and overlays `flags` on it.
    pub fn from_flags(flags: &Settings) -> Result<Self, CliError> {
        Self::resolve(&Self::merged(flags)?.0)
    }

    fn merged(flags: &Settings) -> Result<(Settings, BTreeMap<String, String>), CliError> {
        match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))?;
                let (file, extra) = parse_config_text(&text)?;
                Ok((flags.over(&file), extra))
            }
            None => Ok((flags.clone(), BTreeMap::new())),
        }
    }

    pub fn tau(&self) -> Option<f64> {
        let chi = self.model.chi();
        (chi != 0.0).then(|| PI / chi.abs())
    }

    /// Absolute time for the configured time spec, `default` when unset.
    pub fn time_or(&self, default: f64) -> f64 {
        match self.time {
            Some(TimeSpec::Absolute(t)) => t,
            Some(TimeSpec::TauFraction(f)) => f * self.tau().expect("checked in resolve"),
            None => default,
        }
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector, CliError> {
        match &self.model {
            Model::Kerr { chi } => Ok(evolve_diagonal(psi, *chi, t)),
            Model::Full(p) => evolve_full(psi, p, t).map_err(|e| CliError::Numeric(e.to_string())),
        }
    }

    /// Canonical settings that resolve back to this config.
    pub fn to_settings(&self) -> Settings {
        let mut s = Settings {
            n: Some(self.n as i64),
            grid: Some(format!("{}x{}", self.grid.nx, self.grid.ny)),
            out: Some(self.out.clone()),
            scale: Some(match self.scale {
                Scale::Linear => ScaleArg::Linear,
                Scale::Log => ScaleArg::Log,
            }),
            seed: Some(self.seed),
            ..Settings::default()
        };
        match &self.model {
            Model::Kerr { chi } => s.chi = Some(*chi),
            Model::Full(p) => {
                let m: &Matrix3<Complex64> = p.tunneling();
                s.chi1 = Some(p.chi1());
                s.chi2 = Some(p.chi2());
                s.omega = Some(p.omega());
                s.tunneling = Some(vec![
                    m[(0, 1)].re,
                    m[(0, 1)].im,
                    m[(0, 2)].re,
                    m[(0, 2)].im,
                    m[(1, 2)].re,
                    m[(1, 2)].im,
                ]);
            }
        }
        match self.initial {
            InitialState::Coherent(p) => {
                s.xi0 = Some(p.xi());
                s.theta0 = Some(p.theta());
                s.phi = Some(p.phi());
                s.phi1 = Some(p.phi1());
                s.phi2 = Some(p.phi2());
            }
            InitialState::Slice(init) => {
                s.xi0 = Some(init.xi0);
                s.phi2 = Some(init.phi2_0);
            }
        }
        match self.time {
            Some(TimeSpec::Absolute(t)) => s.t = Some(t),
            Some(TimeSpec::TauFraction(f)) => s.tau_fraction = Some(f),
            None => {}
        }
        s
    }

    /// `key = value` lines in config-file syntax.
    pub fn echo(&self) -> String {
        let s = self.to_settings();
        let mut out = String::new();
        let num = |v: Option<f64>| v.map(|x| format!("{x:?}"));
        let values: [Option<String>; 17] = [
            s.n.map(|v| v.to_string()),
            num(s.chi),
            num(s.chi1),
            num(s.chi2),
            num(s.omega),
            s.tunneling.map(|v| {
                v.iter()
                    .map(|x| format!("{x:?}"))
                    .collect::<Vec<_>>()
                    .join(",")
            }),
            num(s.xi0),
            num(s.theta0),
            num(s.phi),
            num(s.phi1),
            num(s.phi2),
            num(s.t),
            num(s.tau_fraction),
            s.grid,
            s.out.map(|p| p.display().to_string()),
            s.scale
                .map(|v| if v == ScaleArg::Log { "log" } else { "linear" }.to_string()),
            s.seed.map(|v| v.to_string()),
        ];
        for (key, v) in KEYS.iter().zip(values) {
            if let Some(v) = v {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn commented(text: &str) -> String {
    text.lines().map(|l| format!("# {l}\n")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOutcome {
    pub path: PathBuf,
    pub t: f64,
    pub fidelity: f64,
    pub state: StateVector,
}

pub fn state_csv(psi: &StateVector) -> String {
    let mut out = String::from("index,n1,n2,n3,re,im\n");
    for (i, t, z) in psi.iter_with_triples() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{:.15e},{:.15e}",
            t.n1, t.n2, t.n3, z.re, z.im
        );
    }
    out
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<EvolveOutcome, CliError> {
    let psi0 = cfg.initial.state(cfg.n);
    let t = cfg.time_or(0.0);
    let psi = cfg.evolve(&psi0, t)?;
    let f = fidelity(&psi0, &psi).expect("same N");
    create_dir(&cfg.out)?;
    let path = cfg.out.join(format!("state_N{}.csv", cfg.n));
    write_text(&path, &state_csv(&psi))?;
    let manifest = format!(
        "{}t = {t:?}\nfidelity = {f:.15}\nfile = {}\n",
        cfg.echo(),
        path.display()
    );
    write_text(&cfg.out.join("evolve_manifest.txt"), &manifest)?;
    Ok(EvolveOutcome {
        path,
        t,
        fidelity: f,
        state: psi,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRow {
    pub shift: QuarterShift,
    pub reference: Complex64,
    pub fitted: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeOutcome {
    pub path: PathBuf,
    pub fraction: Fraction,
    /// ‖ψ(t) − Σ reference components‖.
    pub reference_residual: f64,
    pub predicted_fit: SuperpositionFit,
    pub lattice_fit: SuperpositionFit,
    /// Lattice coefficients against the reference table, one row per shift.
    pub rows: Vec<ComponentRow>,
    /// Lattice coefficients with magnitude above 1e-6.
    pub nonzero: usize,
    pub mismatch: bool,
}

pub fn cmd_decompose(cfg: &RunConfig, fraction: Fraction) -> Result<DecomposeOutcome, CliError> {
    let p = match cfg.initial {
        InitialState::Coherent(p) => p,
        InitialState::Slice(_) => {
            return Err(CliError::usage(
                "theta0",
                "decompose needs a full coherent initial state",
            ))
        }
    };
    let Model::Kerr { chi } = cfg.model else {
        return Err(CliError::usage(
            "chi1",
            "decompose applies to the Kerr model only",
        ));
    };
    if chi < 0.0 {
        return Err(CliError::usage("chi", "decompose expects chi > 0"));
    }
    let n = cfg.n;
    let t = PI / chi.abs() / fraction.divisor();
    let psi = evolve_diagonal(&su3_coherent(&p, n), chi, t);
    let reference = match fraction {
        Fraction::Half => predicted_half_time_components(&p, n),
        Fraction::Quarter => predicted_quarter_time_components(&p, n),
    };
    let reference_state = superpose(reference.iter().map(|c| (&c.params, c.coefficient)), n);
    let reference_residual = psi.distance(&reference_state).expect("same N");

    let numeric = |e: crate::dynamics::DynamicsError| CliError::Numeric(e.to_string());
    let ref_params: Vec<CoherentParams> = reference.iter().map(|c| c.params).collect();
    let predicted_fit = fit_superposition(&psi, &ref_params).map_err(numeric)?;
    let lattice = quarter_turn_lattice();
    let lattice_params: Vec<CoherentParams> = lattice.iter().map(|s| s.apply(&p)).collect();
    let lattice_fit = fit_superposition(&psi, &lattice_params).map_err(numeric)?;

    let rows: Vec<ComponentRow> = lattice
        .iter()
        .zip(lattice_fit.coefficients())
        .map(|(shift, fitted)| {
            let reference = reference
                .iter()
                .filter_map(|c| {
                    let (lat, phase) = c.shift.on_lattice(n);
                    (lat == shift.canonical()).then_some(c.coefficient * phase)
                })
                .sum();
            ComponentRow {
                shift: *shift,
                reference,
                fitted,
            }
        })
        .collect();
    let nonzero = rows.iter().filter(|r| r.fitted.norm() > 1e-6).count();
    let max_delta = rows
        .iter()
        .map(|r| (r.fitted - r.reference).norm())
        .fold(0.0, f64::max);
    let mismatch =
        reference_residual > 1e-8 || (!lattice_fit.is_rank_deficient() && max_delta > 1e-8);

    let mut report = String::new();
    let _ = writeln!(report, "{}", commented(&cfg.echo()).trim_end());
    let _ = writeln!(report, "fraction = {}", fraction.name());
    let _ = writeln!(report, "t = {t:?}");
    let _ = writeln!(report, "reference_residual = {reference_residual:.3e}");
    for (name, fit) in [
        ("reference_fit", &predicted_fit),
        ("lattice_fit", &lattice_fit),
    ] {
        let _ = writeln!(
            report,
            "{name}: residual = {:.3e} rank = {}/{} gram_condition = {:.3e}",
            fit.residual,
            fit.rank,
            fit.components.len(),
            fit.gram_condition
        );
    }
    if lattice_fit.is_rank_deficient() {
        let _ = writeln!(report, "note: lattice candidates are linearly dependent at N = {n}; coefficients are minimum-norm");
    }
    let _ = writeln!(
        report,
        "shift,reference_re,reference_im,fit_re,fit_im,fit_abs,delta"
    );
    for r in &rows {
        let _ = writeln!(
            report,
            "{},{:.12},{:.12},{:.12},{:.12},{:.12},{:.3e}",
            r.shift.describe(),
            r.reference.re,
            r.reference.im,
            r.fitted.re,
            r.fitted.im,
            r.fitted.norm(),
            (r.fitted - r.reference).norm()
        );
    }
    let _ = writeln!(report, "nonzero_components = {nonzero}");
    let _ = writeln!(report, "mismatch_with_reference = {mismatch}");

    create_dir(&cfg.out)?;
    let path = cfg
        .out
        .join(format!("decompose_N{n}_{}.txt", fraction.name()));
    write_text(&path, &report)?;
    Ok(DecomposeOutcome {
        path,
        fraction,
        reference_residual,
        predicted_fit,
        lattice_fit,
        rows,
        nonzero,
        mismatch,
    })
}

pub fn cmd_frames(cfg: &RunConfig, count: usize) -> Result<Vec<PathBuf>, CliError> {
    let InitialState::Slice(init) = cfg.initial else {
        return Err(CliError::usage(
            "theta0",
            "frames need a slice initial state (xi0, phi2)",
        ));
    };
    let Model::Kerr { chi } = cfg.model else {
        return Err(CliError::usage("chi1", "frames use the Kerr model only"));
    };
    let t_end = cfg.time.map(|_| cfg.time_or(0.0));
    let frames = frame_sequence(init, cfg.n, chi, count, t_end, cfg.grid)?;
    let written = write_frames(
        &frames,
        &cfg.out,
        "q",
        cfg.scale,
        &ImageOptions::default(),
        &cfg.echo(),
    )?;
    Ok(written.into_iter().flat_map(|w| [w.csv, w.image]).collect())
}

pub fn cmd_verify(cfg: &RunConfig, n_given: bool, flip_phase_sign: bool) -> VerifyReport {
    let opts = VerifyOptions {
        n_range: if n_given {
            cfg.n..=cfg.n
        } else {
            VerifyOptions::default().n_range
        },
        seed: cfg.seed,
        flip_phase_sign,
        ..VerifyOptions::default()
    };
    run_all(&opts)
}

/// Runs a parsed command, printing a summary to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve(flags) => {
            let cfg = RunConfig::from_flags(&flags)?;
            let out = cmd_evolve(&cfg)?;
            println!("wrote {}", out.path.display());
            println!("t = {}", out.t);
            println!("fidelity = {:.15}", out.fidelity);
        }
        Command::Decompose { fraction, settings } => {
            let (merged, extra) = RunConfig::merged(&settings)?;
            let cfg = RunConfig::resolve(&merged)?;
            let fraction = match (
                fraction,
                extra.get("decompose.fraction").map(String::as_str),
            ) {
                (Some(f), _) => f,
                (None, Some("half")) => Fraction::Half,
                (None, Some("quarter")) | (None, None) => Fraction::Quarter,
                (None, Some(other)) => {
                    return Err(CliError::usage(
                        "decompose.fraction",
                        format!("unknown fraction {other:?}"),
                    ))
                }
            };
            let out = cmd_decompose(&cfg, fraction)?;
            println!("wrote {}", out.path.display());
            println!(
                "lattice fit: residual {:.3e}, rank {}, {} nonzero components",
                out.lattice_fit.residual, out.lattice_fit.rank, out.nonzero
            );
            println!(
                "reference residual {:.3e}{}",
                out.reference_residual,
                if out.mismatch { " (mismatch)" } else { "" }
            );
        }
        Command::Frames { count, settings } => {
            let (merged, extra) = RunConfig::merged(&settings)?;
            let cfg = RunConfig::resolve(&merged)?;
            let count = match (count, extra.get("frames.count")) {
                (Some(c), _) => c,
                (None, Some(v)) => parse_num("frames.count", v)?,
                (None, None) => DEFAULT_FRAME_COUNT,
            };
            let files = cmd_frames(&cfg, count)?;
            println!("wrote {} files to {}", files.len(), cfg.out.display());
        }
        Command::Verify {
            flip_phase_sign,
            settings,
        } => {
            let (merged, _) = RunConfig::merged(&settings)?;
            let cfg = RunConfig::resolve(&merged)?;
            let report = cmd_verify(&cfg, merged.n.is_some(), flip_phase_sign);
            print!("{report}");
            if !report.passed() {
                return Err(CliError::VerifyFailed);
            }
        }
    }
    Ok(())
}
