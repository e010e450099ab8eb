//! Driven–dissipative dynamics in the frame rotating at the pump frequency:
//! Liouvillian, steady state, and photon statistics.

pub mod density;
pub mod gmres;
pub mod liouvillian;
pub mod lyapunov;
pub mod observables;
pub mod propagate;
pub mod steady;

pub use density::DensityMatrix;
pub use liouvillian::{build_liouvillian, model_liouvillian, Liouvillian};
pub use observables::{g2_tau, g2_zero, n_cav, truncation_check, G2Result, TruncationReport};
pub use propagate::StepOptions;
pub use steady::{steady_state, SteadyMethod, SteadyOptions, SteadyState};

use crate::error::Result;
use crate::fockspace::{photon_lowering, ModelParams, SparseOperator, Truncation};

/// Steady state of one driven model instance with its observables.
#[derive(Clone, Debug)]
pub struct DrivenSolution {
    /// Truncation actually used (after any enlargement).
    pub truncation: Truncation,
    pub liouvillian: Liouvillian,
    pub steady: SteadyState,
    pub photon: SparseOperator,
    pub n_cav: f64,
    pub g2_zero: f64,
    pub check: TruncationReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub steady: SteadyOptions,
    /// Enlarge the truncation on a failed edge check, up to this many times.
    pub max_enlargements: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            steady: SteadyOptions::default(),
            max_enlargements: 3,
        }
    }
}

/// Builds, solves and checks the model at `trunc`, enlarging the cutoffs
/// while the edge populations are too large.
pub fn solve_driven(
    params: &ModelParams,
    trunc: &Truncation,
    opts: &SolveOptions,
) -> Result<DrivenSolution> {
    let mut trunc = *trunc;
    let mut enlargements = 0;
    loop {
        let l = model_liouvillian(params, &trunc)?;
        let steady = steady_state(&l, &opts.steady)?;
        let check = truncation_check(&steady.rho, &trunc, params.n_s);
        if !check.pass {
            if enlargements < opts.max_enlargements {
                enlargements += 1;
                trunc = check.recommended;
                continue;
            }
            return Err(check.into_result().unwrap_err());
        }
        let photon = photon_lowering(&l.basis());
        let n = n_cav(&steady.rho, &photon);
        let g2 = g2_zero(&steady.rho, &photon)?;
        return Ok(DrivenSolution {
            truncation: trunc,
            liouvillian: l,
            steady,
            photon,
            n_cav: n,
            g2_zero: g2,
            check,
        });
    }
}

impl DrivenSolution {
    pub fn g2_tau(&self, tau_grid: &[f64], step: &StepOptions) -> Result<G2Result> {
        g2_tau(&self.liouvillian, &self.steady.rho, &self.photon, tau_grid, step)
    }
}

pub const SUMMARY_HEADER: &str = "delta,gc,Ns,P,gamma_c,gamma_t,n_cav,g2_zero";

/// One steady-state summary row matching [`SUMMARY_HEADER`].
pub fn summary_line(params: &ModelParams, n_cav: f64, g2_zero: f64) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{}",
        opt(params.pump_detuning()),
        params.g_c(),
        params.n_s,
        opt(params.pump),
        params.gamma_c,
        params.gamma_t,
        n_cav,
        g2_zero
    )
}
