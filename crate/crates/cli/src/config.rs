//! Run configuration: a sectioned `key = value` file (TOML syntax).
//!
//! Every section is optional and falls back to defaults, except that exactly
//! one of `[model]` and `[materials]` describes the physical system.
//! [`RunConfig::parse`] fills in derived defaults, so the text written by
//! [`RunConfig::dump`] parses back to an identical value.

use serde::{Deserialize, Serialize};

use trion_polariton::lindblad::{SolveOptions, SteadyMethod, SteadyOptions, StepOptions};
use trion_polariton::materials::{derive_model_params, MaterialParams};
use trion_polariton::sweep::{MinimizeOptions, ScanAxis, Window};
use trion_polariton::{EnergyUnit, ModelParams, Truncation};

use crate::CliError;

/// Model energies in units of γ_c unless `unit = "meV"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub n_s: usize,
    /// Either the single-trion coupling or the collective Rabi energy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_rabi: Option<f64>,
    pub omega_cav: f64,
    pub omega_t: f64,
    pub gamma_c: f64,
    pub gamma_t: f64,
    /// Drive amplitude P; defaults to γ_c/2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump: Option<f64>,
    /// Pump detuning Δ = ω_cav − ω_p.
    pub delta: f64,
    pub unit: String,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            n_s: 100,
            g_c: None,
            omega_rabi: None,
            omega_cav: 0.0,
            omega_t: 0.0,
            gamma_c: 1.0,
            gamma_t: 1.0,
            pump: None,
            delta: 0.0,
            unit: EnergyUnit::Gamma.label().into(),
        }
    }
}

/// Physical device parameters; energies in meV, lengths in nm and μm,
/// density in cm⁻².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialsSection {
    pub lambda1: f64,
    pub lambda2: f64,
    pub xi: f64,
    pub epsilon: f64,
    pub m_e: f64,
    pub m_h: f64,
    pub l_cav: f64,
    pub area: f64,
    pub density: f64,
    pub gamma_c: f64,
    pub gamma_t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump: Option<f64>,
    pub delta: f64,
}

impl Default for MaterialsSection {
    fn default() -> Self {
        let mp = MaterialParams::mose2();
        Self {
            lambda1: mp.lambda1_nm,
            lambda2: mp.lambda2_nm,
            xi: mp.xi,
            epsilon: mp.epsilon,
            m_e: mp.m_e,
            m_h: mp.m_h,
            l_cav: mp.l_cav_um,
            area: mp.area_um2,
            density: mp.density_cm2,
            gamma_c: 0.05,
            gamma_t: 0.26,
            pump: None,
            delta: 0.0,
        }
    }
}

impl MaterialsSection {
    pub fn material_params(&self) -> MaterialParams {
        MaterialParams {
            lambda1_nm: self.lambda1,
            lambda2_nm: self.lambda2,
            xi: self.xi,
            epsilon: self.epsilon,
            m_e: self.m_e,
            m_h: self.m_h,
            l_cav_um: self.l_cav,
            area_um2: self.area,
            density_cm2: self.density,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationSection {
    pub n_c_max: usize,
    pub n_t_max: usize,
}

impl Default for TruncationSection {
    fn default() -> Self {
        let t = Truncation::default();
        Self {
            n_c_max: t.n_c_max,
            n_t_max: t.n_t_max,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub method: String,
    pub residual_tol: f64,
    pub krylov_tol: f64,
    pub krylov_restart: usize,
    pub krylov_max_iter: usize,
    pub direct_max_dim: usize,
    pub max_enlargements: usize,
    pub rtol: f64,
    pub atol: f64,
    pub coarse_points: usize,
    pub resolution: f64,
    pub flat_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let steady = SteadyOptions::default();
        let step = StepOptions::default();
        let min = MinimizeOptions::default();
        Self {
            method: steady.method.label().into(),
            residual_tol: steady.residual_tol,
            krylov_tol: steady.krylov_tol,
            krylov_restart: steady.krylov_restart,
            krylov_max_iter: steady.krylov_max_iter,
            direct_max_dim: steady.direct_max_dim,
            max_enlargements: SolveOptions::default().max_enlargements,
            rtol: step.rtol,
            atol: step.atol,
            coarse_points: min.coarse_points,
            resolution: min.resolution,
            flat_tol: min.flat_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    /// Prepended to every file name.
    pub prefix: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: ".".into(),
            prefix: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub alpha_sq: Vec<f64>,
    /// Grid bounds relative to ω_cav, in units of Ω.
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub prominence: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            alpha_sq: vec![40.0, 100.0, 120.0],
            omega_min: -4.0,
            omega_max: 4.0,
            points: 1601,
            prominence: trion_polariton::manifold::DEFAULT_PROMINENCE,
        }
    }
}

/// One-dimensional scan of the steady state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub axis: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// If set, each point reports the g²(0) minimum over Δ in this window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            axis: ScanAxis::Delta.label().into(),
            start: -3.0,
            stop: 3.0,
            points: 61,
            window: None,
        }
    }
}

/// Same keys as [`ScanSection`], with per-point minimization by default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            axis: ScanAxis::Gc.label().into(),
            start: 0.5,
            stop: 2.5,
            points: 9,
            window: Some(Window::Both.label()),
        }
    }
}

impl From<&SweepSection> for ScanSection {
    fn from(s: &SweepSection) -> Self {
        Self {
            axis: s.axis.clone(),
            start: s.start,
            stop: s.stop,
            points: s.points,
            window: s.window.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct G2TauSection {
    pub tau_max: f64,
    pub points: usize,
}

impl Default for G2TauSection {
    fn default() -> Self {
        Self {
            tau_max: 3.0,
            points: 301,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub materials: Option<MaterialsSection>,
    #[serde(default)]
    pub truncation: TruncationSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub g2scan: ScanSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub g2tau: G2TauSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut cfg = Self {
            model: Some(ModelSection::default()),
            materials: None,
            truncation: TruncationSection::default(),
            solver: SolverSection::default(),
            output: OutputSection::default(),
            spectrum: SpectrumSection::default(),
            g2scan: ScanSection::default(),
            sweep: SweepSection::default(),
            g2tau: G2TauSection::default(),
        };
        cfg.resolve().expect("built-in defaults are valid");
        cfg
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string().trim_end().to_string()))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn dump(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Checks section-level invariants and writes implied defaults back, so
    /// the dumped form is complete.
    fn resolve(&mut self) -> Result<(), CliError> {
        match (&mut self.model, &mut self.materials) {
            (Some(_), Some(_)) => {
                return Err(config_err("[model] and [materials] are mutually exclusive"));
            }
            (None, None) => return Err(config_err("one of [model] or [materials] is required")),
            (Some(m), None) => {
                match (m.g_c, m.omega_rabi) {
                    (Some(_), Some(_)) => {
                        return Err(config_err("[model] give either g_c or omega_rabi, not both"));
                    }
                    (None, None) => m.g_c = Some(1.2 * m.gamma_c),
                    _ => {}
                }
                m.pump.get_or_insert(0.5 * m.gamma_c);
                let unit = EnergyUnit::parse(&m.unit)
                    .ok_or_else(|| config_err(format!("[model] unit: unknown unit `{}`", m.unit)))?;
                m.unit = unit.label().into();
            }
            (None, Some(mat)) => {
                mat.pump.get_or_insert(0.5 * mat.gamma_c);
            }
        }
        SteadyMethod::parse(&self.solver.method)
            .ok_or_else(|| config_err(format!("[solver] method: unknown method `{}`", self.solver.method)))?;
        for (name, scan) in [("g2scan", self.g2scan.clone()), ("sweep", ScanSection::from(&self.sweep))] {
            ScanAxis::parse(&scan.axis)
                .ok_or_else(|| config_err(format!("[{name}] axis: unknown axis `{}`", scan.axis)))?;
            if let Some(w) = &scan.window {
                Window::parse(w).ok_or_else(|| config_err(format!("[{name}] window: unknown window `{w}`")))?;
            }
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let p = match (&self.model, &self.materials) {
            (Some(m), _) => {
                let unit = EnergyUnit::parse(&m.unit).expect("validated in resolve");
                let omega_rabi = match (m.g_c, m.omega_rabi) {
                    (_, Some(o)) => o,
                    (Some(g), None) => g * (m.n_s as f64).sqrt(),
                    (None, None) => unreachable!("resolve sets g_c"),
                };
                let mut p = ModelParams::resonant(m.n_s, 0.0, m.gamma_c, m.gamma_t).with_unit(unit);
                p.omega_rabi = omega_rabi;
                p.omega_cav = m.omega_cav;
                p.omega_t = m.omega_t;
                p.with_drive(m.pump.unwrap_or(0.5 * m.gamma_c), m.delta)
            }
            (None, Some(mat)) => derive_model_params(&mat.material_params(), mat.gamma_c, mat.gamma_t)?
                .with_drive(mat.pump.unwrap_or(0.5 * mat.gamma_c), mat.delta),
            (None, None) => unreachable!("resolve requires one section"),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn truncation(&self) -> Truncation {
        Truncation::new(self.truncation.n_c_max, self.truncation.n_t_max)
    }

    pub fn solve_options(&self) -> SolveOptions {
        let s = &self.solver;
        SolveOptions {
            steady: SteadyOptions {
                method: SteadyMethod::parse(&s.method).expect("validated in resolve"),
                residual_tol: s.residual_tol,
                krylov_tol: s.krylov_tol,
                krylov_restart: s.krylov_restart,
                krylov_max_iter: s.krylov_max_iter,
                direct_max_dim: s.direct_max_dim,
                initial: None,
            },
            max_enlargements: s.max_enlargements,
        }
    }

    pub fn step_options(&self) -> StepOptions {
        StepOptions {
            rtol: self.solver.rtol,
            atol: self.solver.atol,
            ..StepOptions::default()
        }
    }

    pub fn minimize_options(&self) -> MinimizeOptions {
        MinimizeOptions {
            coarse_points: self.solver.coarse_points,
            resolution: self.solver.resolution,
            flat_tol: self.solver.flat_tol,
        }
    }
}
