//! Parameter scans of the driven steady state and blockade minimization
//! over the pump detuning.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fockspace::{ModelParams, Truncation};
use crate::lindblad::observables::EDGE_TOL;
use crate::lindblad::{solve_driven, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanAxis {
    /// Pump detuning Δ = ω_cav − ω_p.
    Delta,
    /// Single-trion coupling g_c at fixed N_s.
    Gc,
    /// Electron number N_s at fixed g_c.
    Ns,
    /// Drive amplitude P.
    Pump,
}

impl ScanAxis {
    pub fn label(self) -> &'static str {
        match self {
            ScanAxis::Delta => "delta",
            ScanAxis::Gc => "gc",
            ScanAxis::Ns => "ns",
            ScanAxis::Pump => "pump",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "delta" => Some(ScanAxis::Delta),
            "gc" => Some(ScanAxis::Gc),
            "ns" => Some(ScanAxis::Ns),
            "pump" => Some(ScanAxis::Pump),
            _ => None,
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &ModelParams, value: f64) -> Result<ModelParams> {
        let mut p = base.clone();
        match self {
            ScanAxis::Delta => p.set_pump_detuning(value),
            ScanAxis::Gc => p.set_g_c(value),
            ScanAxis::Ns => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::InvalidParams(format!("N_s = {value} is not a positive integer")));
                }
                p.set_n_s_fixed_gc(value as usize);
            }
            ScanAxis::Pump => p.pump = Some(value),
        }
        p.validate()?;
        Ok(p)
    }
}

/// Half-width of the unconventional window in units of γ_c.
pub const UNCONVENTIONAL_HALF_WIDTH: f64 = 3.0;
/// Conventional window as fractions of Ω.
pub const CONVENTIONAL_RANGE: (f64, f64) = (0.3, 0.7);

/// Detuning window for g²(0) minimization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    /// `|Δ| ≤ 3γ_c`, interference-driven antibunching.
    Unconventional,
    /// `Δ ∈ [0.3, 0.7]·Ω`, around the lower-polariton resonance.
    Conventional,
    /// Both windows; the lower minimum wins.
    Both,
    Range(f64, f64),
}

impl Window {
    pub fn label(&self) -> String {
        match self {
            Window::Unconventional => "unconventional".into(),
            Window::Conventional => "conventional".into(),
            Window::Both => "both".into(),
            Window::Range(lo, hi) => format!("{lo}:{hi}"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "unconventional" => Some(Window::Unconventional),
            "conventional" => Some(Window::Conventional),
            "both" => Some(Window::Both),
            other => {
                let (lo, hi) = other.split_once(':')?;
                Some(Window::Range(lo.trim().parse().ok()?, hi.trim().parse().ok()?))
            }
        }
    }

    fn bounds(&self, p: &ModelParams) -> Vec<(f64, f64)> {
        let unconv = (-UNCONVENTIONAL_HALF_WIDTH * p.gamma_c, UNCONVENTIONAL_HALF_WIDTH * p.gamma_c);
        let conv = (CONVENTIONAL_RANGE.0 * p.omega_rabi, CONVENTIONAL_RANGE.1 * p.omega_rabi);
        match *self {
            Window::Unconventional => vec![unconv],
            Window::Conventional => vec![conv],
            Window::Both => vec![unconv, conv],
            Window::Range(lo, hi) => vec![(lo, hi)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizeOptions {
    pub coarse_points: usize,
    /// Golden-section stopping width, in units of γ_c.
    pub resolution: f64,
    /// Coarse landscapes with `max − min` below this are flat.
    pub flat_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            coarse_points: 101,
            resolution: 1e-3,
            flat_tol: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub delta_opt: f64,
    pub g2_min: f64,
    pub n_cav: f64,
    /// Largest truncation any evaluation needed.
    pub truncation: Truncation,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
struct Sample {
    delta: f64,
    g2: f64,
    n_cav: f64,
    trunc: Truncation,
}

/// Lower g²(0) wins. g²(Δ) is mirror-symmetric at δ = 0, so near-ties go to
/// the smaller |Δ| and then to positive Δ, keeping the choice deterministic.
fn better(a: &Sample, b: &Sample) -> bool {
    let scale = a.g2.abs().max(b.g2.abs()).max(f64::MIN_POSITIVE);
    if (a.g2 - b.g2).abs() > 1e-9 * scale {
        return a.g2 < b.g2;
    }
    let dscale = a.delta.abs().max(b.delta.abs()).max(f64::MIN_POSITIVE);
    if (a.delta.abs() - b.delta.abs()).abs() > 1e-12 * dscale {
        return a.delta.abs() < b.delta.abs();
    }
    a.delta > b.delta
}

fn larger(a: Truncation, b: Truncation) -> Truncation {
    Truncation::new(a.n_c_max.max(b.n_c_max), a.n_t_max.max(b.n_t_max))
}

fn evaluate(base: &ModelParams, delta: f64, trunc: &Truncation, solve: &SolveOptions) -> Result<Sample> {
    let p = ScanAxis::Delta.apply(base, delta)?;
    let s = solve_driven(&p, trunc, solve)?;
    Ok(Sample {
        delta,
        g2: s.g2_zero,
        n_cav: s.n_cav,
        trunc: s.truncation,
    })
}

fn minimize_in(
    base: &ModelParams,
    (lo, hi): (f64, f64),
    trunc: &Truncation,
    solve: &SolveOptions,
    opts: &MinimizeOptions,
) -> Result<Minimum> {
    if !(hi > lo) || opts.coarse_points < 3 {
        return Err(Error::InvalidGrid(format!(
            "window [{lo}, {hi}] with {} points is empty",
            opts.coarse_points
        )));
    }
    let grid = crate::manifold::linspace(lo, hi, opts.coarse_points);
    let coarse: Vec<Sample> = grid
        .par_iter()
        .map(|&d| evaluate(base, d, trunc, solve))
        .collect::<Result<_>>()?;
    let (min, max) = coarse
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.g2), b.max(s.g2)));
    if max - min < opts.flat_tol {
        return Err(Error::NoBlockade { spread: max - min });
    }
    let mut k = 0;
    for (i, s) in coarse.iter().enumerate() {
        if better(s, &coarse[k]) {
            k = i;
        }
    }
    let mut best = coarse[k];
    let mut used = coarse.iter().fold(*trunc, |t, s| larger(t, s.trunc));
    let mut evaluations = coarse.len();

    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let tol = opts.resolution * base.gamma_c.max(f64::MIN_POSITIVE);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = evaluate(base, c, trunc, solve)?;
    let mut fd = evaluate(base, d, trunc, solve)?;
    evaluations += 2;
    for s in [fc, fd] {
        used = larger(used, s.trunc);
        if better(&s, &best) {
            best = s;
        }
    }
    while b - a > tol {
        if better(&fc, &fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = evaluate(base, c, trunc, solve)?;
            used = larger(used, fc.trunc);
            if better(&fc, &best) {
                best = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = evaluate(base, d, trunc, solve)?;
            used = larger(used, fd.trunc);
            if better(&fd, &best) {
                best = fd;
            }
        }
        evaluations += 1;
    }
    Ok(Minimum {
        delta_opt: best.delta,
        g2_min: best.g2,
        n_cav: best.n_cav,
        truncation: used,
        evaluations,
    })
}

/// Minimum of g²(0) over the pump detuning: a coarse grid, then golden
/// section on the bracket around the best coarse point.
pub fn minimize_g2(
    base: &ModelParams,
    window: Window,
    trunc: &Truncation,
    solve: &SolveOptions,
    opts: &MinimizeOptions,
) -> Result<Minimum> {
    if base.pump.is_none() {
        return Err(Error::MissingDrive("pump"));
    }
    let mut out: Option<Minimum> = None;
    let mut first_err = None;
    for bounds in window.bounds(base) {
        match minimize_in(base, bounds, trunc, solve, opts) {
            Ok(m) => {
                let replace = match &out {
                    None => true,
                    Some(cur) => m.g2_min < cur.g2_min,
                };
                if replace {
                    out = Some(m);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match (out, first_err) {
        (Some(m), _) => Ok(m),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("every window yields a result or an error"),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub axis: ScanAxis,
    pub grid: Vec<f64>,
    pub base: ModelParams,
    pub truncation: Truncation,
    pub solve: SolveOptions,
    /// If set, each row reports the g²(0) minimum over Δ in this window.
    pub minimize: Option<Window>,
    pub min_opts: MinimizeOptions,
}

impl ScanSpec {
    pub fn new(axis: ScanAxis, grid: Vec<f64>, base: ModelParams) -> Self {
        Self {
            axis,
            grid,
            base,
            truncation: Truncation::default(),
            solve: SolveOptions::default(),
            minimize: None,
            min_opts: MinimizeOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidGrid("scan grid is empty".into()));
        }
        let inc = self.grid.windows(2).all(|w| w[1] > w[0]);
        let dec = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) || self.grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("scan grid must be strictly monotone".into()));
        }
        if self.minimize.is_some() && self.axis == ScanAxis::Delta {
            return Err(Error::InvalidParams("cannot minimize over delta on a delta scan".into()));
        }
        if self.base.pump.is_none() && self.axis != ScanAxis::Pump {
            return Err(Error::MissingDrive("pump"));
        }
        if self.base.omega_p.is_none() && self.axis != ScanAxis::Delta && self.minimize.is_none() {
            return Err(Error::MissingDrive("omega_p"));
        }
        for &v in &self.grid {
            let mut p = self.axis.apply(&self.base, v)?;
            // Fill in whatever the axis or minimizer supplies per point.
            p.pump.get_or_insert(0.0);
            p.omega_p.get_or_insert(p.omega_cav);
            p.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub axis_value: f64,
    pub g2_zero: Option<f64>,
    pub n_cav: Option<f64>,
    pub delta_opt: Option<f64>,
    pub truncation: Truncation,
    pub status: &'static str,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub spec: ScanSpec,
    pub rows: Vec<ScanRow>,
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::Truncation { .. } => "truncation",
        Error::SingularSteadyState { .. } | Error::StepControl { .. } => "solver",
        Error::Unmeasurable { .. } => "unmeasurable",
        Error::NoBlockade { .. } => "no_blockade",
        _ => "invalid",
    }
}

fn scan_point(spec: &ScanSpec, value: f64) -> ScanRow {
    let failed = |e: Error, trunc: Truncation| ScanRow {
        axis_value: value,
        g2_zero: None,
        n_cav: None,
        delta_opt: None,
        truncation: match &e {
            Error::Truncation { current, .. } => *current,
            _ => trunc,
        },
        status: status_of(&e),
        message: Some(e.to_string()),
    };
    let p = match spec.axis.apply(&spec.base, value) {
        Ok(p) => p,
        Err(e) => return failed(e, spec.truncation),
    };
    match spec.minimize {
        Some(window) => match minimize_g2(&p, window, &spec.truncation, &spec.solve, &spec.min_opts) {
            Ok(m) => ScanRow {
                axis_value: value,
                g2_zero: Some(m.g2_min),
                n_cav: Some(m.n_cav),
                delta_opt: Some(m.delta_opt),
                truncation: m.truncation,
                status: "ok",
                message: None,
            },
            Err(e) => failed(e, spec.truncation),
        },
        None => match solve_driven(&p, &spec.truncation, &spec.solve) {
            Ok(s) => ScanRow {
                axis_value: value,
                g2_zero: Some(s.g2_zero),
                n_cav: Some(s.n_cav),
                delta_opt: None,
                truncation: s.truncation,
                status: "ok",
                message: None,
            },
            Err(e) => failed(e, spec.truncation),
        },
    }
}

/// Solves every grid point; failures are recorded per row and the scan
/// continues. Rows come back in grid order whatever the execution order.
pub fn run_scan(spec: &ScanSpec) -> Result<ScanResult> {
    spec.validate()?;
    let rows = spec.grid.par_iter().map(|&v| scan_point(spec, v)).collect();
    Ok(ScanResult {
        spec: spec.clone(),
        rows,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ScanResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let with_opt = self.spec.minimize.is_some();
        if with_opt {
            writeln!(w, "axis_value,g2_zero,n_cav,delta_opt,truncation_nc,truncation_nt,status")?;
        } else {
            writeln!(w, "axis_value,g2_zero,n_cav,truncation_nc,truncation_nt,status")?;
        }
        for r in &self.rows {
            write!(w, "{},{},{},", r.axis_value, opt(r.g2_zero), opt(r.n_cav))?;
            if with_opt {
                write!(w, "{},", opt(r.delta_opt))?;
            }
            writeln!(w, "{},{},{}", r.truncation.n_c_max, r.truncation.n_t_max, r.status)?;
        }
        Ok(())
    }

    /// Plain `key: value` record of everything needed to reproduce the scan.
    pub fn write_manifest<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let s = &self.spec;
        let p = &s.base;
        let kv: Vec<(&str, String)> = vec![
            ("crate_version", env!("CARGO_PKG_VERSION").to_string()),
            ("axis", s.axis.label().to_string()),
            ("grid_points", s.grid.len().to_string()),
            ("grid_first", s.grid[0].to_string()),
            ("grid_last", s.grid[s.grid.len() - 1].to_string()),
            ("unit", p.unit.label().to_string()),
            ("n_s", p.n_s.to_string()),
            ("g_c", p.g_c().to_string()),
            ("omega_rabi", p.omega_rabi.to_string()),
            ("omega_cav", p.omega_cav.to_string()),
            ("omega_t", p.omega_t.to_string()),
            ("gamma_c", p.gamma_c.to_string()),
            ("gamma_t", p.gamma_t.to_string()),
            ("pump", opt(p.pump)),
            ("omega_p", opt(p.omega_p)),
            ("truncation_nc", s.truncation.n_c_max.to_string()),
            ("truncation_nt", s.truncation.n_t_max.to_string()),
            ("truncation_edge_tol", EDGE_TOL.to_string()),
            ("max_enlargements", s.solve.max_enlargements.to_string()),
            ("steady_method", s.solve.steady.method.label().to_string()),
            ("steady_residual_tol", s.solve.steady.residual_tol.to_string()),
            ("krylov_tol", s.solve.steady.krylov_tol.to_string()),
            ("krylov_restart", s.solve.steady.krylov_restart.to_string()),
            ("krylov_max_iter", s.solve.steady.krylov_max_iter.to_string()),
            ("direct_max_dim", s.solve.steady.direct_max_dim.to_string()),
            (
                "minimize_window",
                s.minimize.map(|m| m.label()).unwrap_or_else(|| "none".into()),
            ),
            ("minimize_coarse_points", s.min_opts.coarse_points.to_string()),
            ("minimize_resolution_gamma_c", s.min_opts.resolution.to_string()),
            ("minimize_flat_tol", s.min_opts.flat_tol.to_string()),
            ("rows_ok", self.rows.iter().filter(|r| r.status == "ok").count().to_string()),
        ];
        for (k, v) in kv {
            writeln!(w, "{k}: {v}")?;
        }
        Ok(())
    }
}
