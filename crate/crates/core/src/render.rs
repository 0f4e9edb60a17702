//! Stereographic projection of Q̃ frames and CSV / PGM output.
//!
//! Points on the (ξ, φ2) sphere map to the plane by r = tan ξ,
//! (x, y) = (r cos φ2, r sin φ2). The pole ξ = π/2 sits at infinity, so ξ is
//! clipped to [`XI_CLIP`] before projecting.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::coherent::su2_23_coherent;
use crate::dynamics::evolve_diagonal;
use crate::husimi::{q_slice_grid_at, FrameMeta, GridSpec, HusimiError, QFrame, SliceInit};

pub const XI_CLIP: f64 = FRAC_PI_2 - 1e-3;
pub const DEFAULT_IMAGE_SIZE: usize = 256;
pub const DEFAULT_VIEW_RADIUS: f64 = 2.5;
pub const DEFAULT_FRAME_COUNT: usize = 8;
/// Floor for the log colour scale (six decades).
pub const LOG_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("need at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("invalid image options: {0}")]
    BadImage(String),
    #[error("chi must be non-zero and finite")]
    ZeroChi,
    #[error(transparent)]
    Husimi(#[from] HusimiError),
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RenderError> {
    fs::write(path, bytes).map_err(|source| RenderError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPoint {
    pub xi: f64,
    pub phi2: f64,
    pub x: f64,
    pub y: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedFrame {
    pub grid: GridSpec,
    pub points: Vec<ProjectedPoint>,
    pub meta: FrameMeta,
    pub n: u32,
    /// Largest ξ used in the projection.
    pub xi_clip: f64,
}

pub fn project_point(xi: f64, phi2: f64) -> (f64, f64) {
    let r = xi.min(XI_CLIP).tan();
    let (s, c) = phi2.sin_cos();
    (r * c, r * s)
}

pub fn project(frame: &QFrame) -> ProjectedFrame {
    let g = frame.grid;
    let mut points = Vec::with_capacity(g.len());
    for i in 0..g.nx {
        for k in 0..g.ny {
            let (xi, phi2) = (g.xi(i), g.phi2(k));
            let (x, y) = project_point(xi, phi2);
            points.push(ProjectedPoint {
                xi,
                phi2,
                x,
                y,
                q: frame.value(i, k),
            });
        }
    }
    ProjectedFrame {
        grid: g,
        points,
        meta: frame.meta,
        n: frame.n,
        xi_clip: XI_CLIP,
    }
}

fn fmt_num(out: &mut String, v: f64) {
    let v = if v == 0.0 { 0.0 } else { v };
    let s = format!("{v:.12}");
    // values like -1e-13 print as -0.000000000000
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        out.push_str(&s[1..]);
    } else {
        out.push_str(&s);
    }
}

pub fn csv_string(frame: &ProjectedFrame) -> String {
    let mut out = String::with_capacity(frame.points.len() * 80);
    out.push_str("xi,phi2,x,y,q\n");
    for p in &frame.points {
        for (j, v) in [p.xi, p.phi2, p.x, p.y, p.q].into_iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            fmt_num(&mut out, v);
        }
        out.push('\n');
    }
    out
}

pub fn emit_csv(frame: &ProjectedFrame, path: &Path) -> Result<(), RenderError> {
    write_file(path, csv_string(frame).as_bytes())
}

/// Parses CSV written by [`emit_csv`] into rows of five numbers.
pub fn parse_csv(text: &str) -> Option<Vec<[f64; 5]>> {
    let mut lines = text.lines();
    if lines.next()? != "xi,phi2,x,y,q" {
        return None;
    }
    lines
        .map(|line| {
            let mut row = [0.0; 5];
            let mut fields = line.split(',');
            for slot in row.iter_mut() {
                *slot = fields.next()?.parse().ok()?;
            }
            fields.next().is_none().then_some(row)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl Scale {
    pub fn level(self, v: f64) -> u8 {
        let u = match self {
            Scale::Linear => v,
            Scale::Log => (v.max(LOG_FLOOR).log10() - LOG_FLOOR.log10()) / -LOG_FLOOR.log10(),
        };
        (255.0 * u.clamp(0.0, 1.0)).round() as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageOptions {
    pub size: usize,
    pub view_radius: f64,
}

impl Default for ImageOptions {
    fn default() -> Self {
        Self {
            size: DEFAULT_IMAGE_SIZE,
            view_radius: DEFAULT_VIEW_RADIUS,
        }
    }
}

/// Binary PGM raster; pixels outside the projected disk are black.
pub fn render_pgm(
    frame: &ProjectedFrame,
    scale: Scale,
    opts: &ImageOptions,
) -> Result<Vec<u8>, RenderError> {
    if opts.size == 0 || !(opts.view_radius.is_finite() && opts.view_radius > 0.0) {
        return Err(RenderError::BadImage(format!(
            "size {} radius {}",
            opts.size, opts.view_radius
        )));
    }
    let (w, r) = (opts.size, opts.view_radius);
    let g = frame.grid;
    let disk = frame.xi_clip.tan();
    let step_xi = FRAC_PI_2 / (g.nx - 1) as f64;
    let step_phi = 2.0 * PI / g.ny as f64;

    let mut out = format!("P5\n{w} {w}\n255\n").into_bytes();
    out.reserve(w * w);
    for py in 0..w {
        let y = r - (py as f64 + 0.5) * 2.0 * r / w as f64;
        for px in 0..w {
            let x = -r + (px as f64 + 0.5) * 2.0 * r / w as f64;
            let rho = x.hypot(y);
            if rho > disk {
                out.push(0);
                continue;
            }
            let i = ((rho.atan() / step_xi).round() as usize).min(g.nx - 1);
            let k = (y.atan2(x).rem_euclid(2.0 * PI) / step_phi).round() as usize % g.ny;
            out.push(scale.level(frame.points[i * g.ny + k].q));
        }
    }
    Ok(out)
}

pub fn emit_image(frame: &ProjectedFrame, path: &Path, scale: Scale) -> Result<(), RenderError> {
    emit_image_with(frame, path, scale, &ImageOptions::default())
}

pub fn emit_image_with(
    frame: &ProjectedFrame,
    path: &Path,
    scale: Scale,
    opts: &ImageOptions,
) -> Result<(), RenderError> {
    write_file(path, &render_pgm(frame, scale, opts)?)
}

/// Uniform times over [0, t_end] (t_end defaults to τ/2 = π/(2|χ|)) and the
/// Q̃ frame of the evolved slice state at each.
pub fn frame_sequence(
    initial: SliceInit,
    n: u32,
    chi: f64,
    count: usize,
    t_end: Option<f64>,
    grid: GridSpec,
) -> Result<Vec<QFrame>, RenderError> {
    if count < 2 {
        return Err(RenderError::TooFewFrames(count));
    }
    if chi == 0.0 || !chi.is_finite() {
        return Err(RenderError::ZeroChi);
    }
    let t_end = t_end.unwrap_or(PI / (2.0 * chi.abs()));
    let psi0 = su2_23_coherent(initial.xi0, initial.phi2_0, n);
    (0..count)
        .map(|f| {
            let t = t_end * f as f64 / (count - 1) as f64;
            let psi = evolve_diagonal(&psi0, chi, t);
            let meta = FrameMeta {
                t,
                chi,
                initial: Some(initial),
            };
            Ok(q_slice_grid_at(&psi, grid, FRAC_PI_2)?.with_meta(meta))
        })
        .collect()
}

/// `<prefix>_N<N>_f<index>_t<t/τ>.<ext>` with τ = π/|χ|.
pub fn frame_filename(prefix: &str, n: u32, index: usize, t: f64, chi: f64, ext: &str) -> String {
    let frac = t * chi.abs() / PI;
    let frac = if frac == 0.0 { 0.0 } else { frac };
    format!("{prefix}_N{n}_f{index:03}_t{frac:.4}.{ext}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct WrittenFrame {
    pub t: f64,
    pub csv: PathBuf,
    pub image: PathBuf,
}

/// Writes CSV + PGM per frame and a `manifest.txt` listing them, headed by
/// `header` with each line commented out.
pub fn write_frames(
    frames: &[QFrame],
    dir: &Path,
    prefix: &str,
    scale: Scale,
    opts: &ImageOptions,
    header: &str,
) -> Result<Vec<WrittenFrame>, RenderError> {
    fs::create_dir_all(dir).map_err(|source| RenderError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::with_capacity(frames.len());
    let mut manifest: String = header.lines().map(|l| format!("# {l}\n")).collect();
    let _ = writeln!(
        manifest,
        "# image size = {}, view radius = {}",
        opts.size, opts.view_radius
    );
    manifest.push_str("index,t,t_over_tau,csv,image\n");
    for (idx, frame) in frames.iter().enumerate() {
        let (t, chi) = (frame.meta.t, frame.meta.chi);
        let projected = project(frame);
        let csv = dir.join(frame_filename(prefix, frame.n, idx, t, chi, "csv"));
        let image = dir.join(frame_filename(prefix, frame.n, idx, t, chi, "pgm"));
        emit_csv(&projected, &csv)?;
        emit_image_with(&projected, &image, scale, opts)?;
        let name = |p: &Path| {
            p.file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        };
        let _ = writeln!(
            manifest,
            "{idx},{t:.12},{:.12},{},{}",
            t * chi.abs() / PI,
            name(&csv),
            name(&image)
        );
        written.push(WrittenFrame { t, csv, image });
    }
    write_file(&dir.join("manifest.txt"), manifest.as_bytes())?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::su2_23_coherent;
    use crate::fock_basis::FockTriple;
    use crate::husimi::q_slice_grid;
    use crate::state::StateVector;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn projection_examples() {
        let (x, y) = project_point(0.0, 1.3);
        assert_eq!((x, y), (0.0, 0.0));
        let (x, y) = project_point(FRAC_PI_4, 0.0);
        assert!((x - 1.0).abs() < 1e-15 && y.abs() < 1e-15);
        let (x, y) = project_point(FRAC_PI_4, FRAC_PI_2);
        assert!(x.abs() < 1e-15 && (y - 1.0).abs() < 1e-15);
        let (x, _) = project_point(FRAC_PI_2, 0.0);
        assert!((x - XI_CLIP.tan()).abs() < 1e-9);
        assert!(x.is_finite());
    }

    #[test]
    fn projected_frame_shape() {
        let psi = su2_23_coherent(0.4, 0.0, 3);
        let frame = q_slice_grid(&psi, 5, 8).unwrap();
        let p = project(&frame);
        assert_eq!(p.points.len(), 40);
        assert!(p
            .points
            .iter()
            .all(|pt| pt.x.is_finite() && pt.y.is_finite()));
        assert_eq!(p.points[8].q, frame.value(1, 0));
    }

    #[test]
    fn csv_is_deterministic_and_round_trips() {
        let psi = crate::dynamics::evolve_diagonal(&su2_23_coherent(0.9, 0.2, 6), 1.0, 0.4);
        let frame = project(&q_slice_grid(&psi, 9, 12).unwrap());
        let a = csv_string(&frame);
        assert_eq!(a, csv_string(&frame));
        assert!(a.ends_with('\n') && !a.contains('\r'));
        assert!(!a.contains("-0.000000000000,") && !a.contains("-0.000000000000\n"));
        let rows = parse_csv(&a).unwrap();
        assert_eq!(rows.len(), frame.points.len());
        for (row, p) in rows.iter().zip(&frame.points) {
            for (u, v) in row.iter().zip([p.xi, p.phi2, p.x, p.y, p.q]) {
                assert!((u - v).abs() <= 5e-13);
            }
        }
    }

    #[test]
    fn negative_zero_normalised() {
        let mut s = String::new();
        fmt_num(&mut s, -0.0);
        s.push(' ');
        fmt_num(&mut s, -1e-15);
        s.push(' ');
        fmt_num(&mut s, -0.5);
        assert_eq!(s, "0.000000000000 0.000000000000 -0.500000000000");
    }

    #[test]
    fn scales() {
        assert_eq!(Scale::Linear.level(0.0), 0);
        assert_eq!(Scale::Linear.level(1.0), 255);
        assert_eq!(Scale::Linear.level(0.5), 128);
        assert_eq!(Scale::Log.level(0.0), 0);
        assert_eq!(Scale::Log.level(1e-3), 128);
        assert_eq!(Scale::Log.level(1.0), 255);
    }

    #[test]
    fn pgm_layout() {
        let psi = StateVector::basis_state(FockTriple::new(0, 4, 0));
        let frame = project(&q_slice_grid(&psi, 31, 36).unwrap());
        let opts = ImageOptions {
            size: 16,
            view_radius: 2.5,
        };
        let bytes = render_pgm(&frame, Scale::Linear, &opts).unwrap();
        let header = b"P5\n16 16\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 256);
        // mode-2 state peaks at the projection centre
        let body = &bytes[header.len()..];
        let top = *body.iter().max().unwrap();
        for idx in [7 * 16 + 7, 7 * 16 + 8, 8 * 16 + 7, 8 * 16 + 8] {
            assert_eq!(body[idx], top);
        }
        assert_eq!(body[0], body[15]);
        assert!(render_pgm(
            &frame,
            Scale::Linear,
            &ImageOptions {
                size: 0,
                view_radius: 1.0
            }
        )
        .is_err());
    }

    #[test]
    fn sequence_times_and_names() {
        let frames = frame_sequence(
            SliceInit::new(FRAC_PI_4, 0.0),
            4,
            2.0,
            5,
            None,
            GridSpec::new(5, 6).unwrap(),
        )
        .unwrap();
        assert_eq!(frames.len(), 5);
        assert_eq!(frames[0].meta.t, 0.0);
        assert!((frames[4].meta.t - PI / 4.0).abs() < 1e-15);
        let name = frame_filename("q", 4, 4, frames[4].meta.t, 2.0, "csv");
        assert_eq!(name, "q_N4_f004_t0.5000.csv");
        assert!(matches!(
            frame_sequence(
                SliceInit::new(0.1, 0.0),
                4,
                1.0,
                1,
                None,
                GridSpec::default()
            ),
            Err(RenderError::TooFewFrames(1))
        ));
    }

    #[test]
    fn written_frames_identical_across_runs() {
        let frames = frame_sequence(
            SliceInit::new(0.7, 0.3),
            5,
            1.0,
            3,
            None,
            GridSpec::new(7, 10).unwrap(),
        )
        .unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let opts = ImageOptions {
            size: 32,
            view_radius: 2.0,
        };
        let wa = write_frames(&frames, a.path(), "q", Scale::Log, &opts, "model.n = 5").unwrap();
        let wb = write_frames(&frames, b.path(), "q", Scale::Log, &opts, "model.n = 5").unwrap();
        for (x, y) in wa.iter().zip(&wb) {
            assert_eq!(fs::read(&x.csv).unwrap(), fs::read(&y.csv).unwrap());
            assert_eq!(fs::read(&x.image).unwrap(), fs::read(&y.image).unwrap());
        }
        assert_eq!(
            fs::read(a.path().join("manifest.txt")).unwrap(),
            fs::read(b.path().join("manifest.txt")).unwrap()
        );
    }

    #[test]
    fn unwritable_path() {
        let psi = su2_23_coherent(0.4, 0.0, 2);
        let frame = project(&q_slice_grid(&psi, 3, 3).unwrap());
        let err = emit_csv(&frame, Path::new("/nonexistent-dir/x/q.csv")).unwrap_err();
        assert!(matches!(err, RenderError::Io { .. }));
    }
}
