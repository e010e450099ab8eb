use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::DMatrix;

use super::density::DensityMatrix;
use super::gmres::gmres;
use super::liouvillian::Liouvillian;
use super::lyapunov::LyapunovSolver;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteadyMethod {
    /// Direct for small spaces, Krylov otherwise with direct fallback.
    Auto,
    /// Sparse LU of the trace-constrained Liouvillian.
    Direct,
    /// GMRES preconditioned by the exact no-jump Lyapunov inverse.
    Krylov,
}

impl SteadyMethod {
    pub fn label(self) -> &'static str {
        match self {
            SteadyMethod::Auto => "auto",
            SteadyMethod::Direct => "direct",
            SteadyMethod::Krylov => "krylov",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "auto" => Some(SteadyMethod::Auto),
            "direct" => Some(SteadyMethod::Direct),
            "krylov" => Some(SteadyMethod::Krylov),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyOptions {
    pub method: SteadyMethod,
    /// Acceptance bound on `‖L(ρ)‖₂`.
    pub residual_tol: f64,
    /// GMRES stopping bound on the constrained-system residual.
    pub krylov_tol: f64,
    pub krylov_restart: usize,
    pub krylov_max_iter: usize,
    /// `Auto` uses the direct solver up to this Hilbert-space dimension.
    pub direct_max_dim: usize,
    /// Initial state for the Krylov route (vacuum if unset).
    pub initial: Option<DensityMatrix>,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            method: SteadyMethod::Auto,
            residual_tol: 1e-10,
            krylov_tol: 1e-13,
            krylov_restart: 80,
            krylov_max_iter: 400,
            direct_max_dim: 36,
            initial: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `‖L(ρ)‖₂` of the returned (hermitized, normalized) state.
    pub residual: f64,
    pub method: SteadyMethod,
    pub iterations: usize,
}

/// `L` with its first row (the `ρ_00` equation) replaced by `Tr ρ = 1`.
fn trace_constrained(l: &Liouvillian) -> CsrMatrix {
    let d = l.dim_rho;
    let n = d * d;
    let trace_row = (0..d).map(|i| (0, i + d * i, C64::new(1.0, 0.0)));
    let rest = l.superop.iter().filter(|&(r, _, _)| r != 0);
    CsrMatrix::from_triplets(n, n, trace_row.chain(rest))
}

fn unit_rhs(n: usize) -> Vec<C64> {
    let mut b = vec![C64::new(0.0, 0.0); n];
    b[0] = C64::new(1.0, 0.0);
    b
}

fn liouvillian_residual(l: &Liouvillian, rho: &DensityMatrix) -> f64 {
    l.superop
        .mul_vec(rho.as_vec())
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn solve_direct(l: &Liouvillian) -> Result<(Vec<C64>, usize)> {
    let a = trace_constrained(l);
    let n = a.nrows();
    let triplets: Vec<Triplet<usize, usize, C64>> =
        a.iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    let singular = || Error::SingularSteadyState {
        residual: f64::INFINITY,
    };
    let mat = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|_| singular())?;
    let lu = mat.sp_lu().map_err(|_| singular())?;
    let b = unit_rhs(n);
    let mut rhs = Mat::<C64>::zeros(n, 1);
    rhs[(0, 0)] = b[0];
    let sol = lu.solve(&rhs);
    let mut x: Vec<C64> = (0..n).map(|i| sol[(i, 0)]).collect();
    // One step of iterative refinement.
    let ax = a.mul_vec(&x);
    let mut r = Mat::<C64>::zeros(n, 1);
    for i in 0..n {
        r[(i, 0)] = b[i] - ax[i];
    }
    let dx = lu.solve(&r);
    for (i, xi) in x.iter_mut().enumerate() {
        *xi += dx[(i, 0)];
    }
    Ok((x, 1))
}

fn solve_krylov(l: &Liouvillian, opts: &SteadyOptions) -> Result<(Vec<C64>, usize)> {
    let d = l.dim_rho;
    let lyap = LyapunovSolver::new(l.effective_generator()).ok_or(Error::SingularSteadyState {
        residual: f64::INFINITY,
    })?;
    let a = trace_constrained(l);
    let precond = |y: &[C64]| -> Vec<C64> { lyap.solve_vec(y) };
    let rho0 = match &opts.initial {
        Some(r) if r.dim() == d => r.matrix().clone(),
        Some(r) => {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: r.dim(),
            })
        }
        None => DensityMatrix::vacuum(d).matrix().clone(),
    };
    let y0 = lyap.forward(&rho0);
    let b = unit_rhs(d * d);
    let out = gmres(
        |y, out| {
            let x = precond(y);
            a.matvec(&x, out);
        },
        &b,
        y0.as_slice().to_vec(),
        opts.krylov_tol,
        opts.krylov_restart,
        opts.krylov_max_iter,
    );
    if !out.residual.is_finite() {
        return Err(Error::SingularSteadyState {
            residual: out.residual,
        });
    }
    Ok((precond(&out.x), out.iterations))
}

fn finish(l: &Liouvillian, x: Vec<C64>, method: SteadyMethod, iterations: usize) -> SteadyState {
    let d = l.dim_rho;
    let rho = DensityMatrix::hermitized(DMatrix::from_vec(d, d, x));
    let residual = liouvillian_residual(l, &rho);
    SteadyState {
        rho,
        residual,
        method,
        iterations,
    }
}

/// Unique steady state `L(ρ) = 0, Tr ρ = 1`, checked against
/// `opts.residual_tol`.
pub fn steady_state(l: &Liouvillian, opts: &SteadyOptions) -> Result<SteadyState> {
    let attempt = |method: SteadyMethod| -> Result<SteadyState> {
        let (x, it) = match method {
            SteadyMethod::Krylov => solve_krylov(l, opts)?,
            _ => solve_direct(l)?,
        };
        let s = finish(l, x, method, it);
        if s.residual <= opts.residual_tol && s.residual.is_finite() {
            Ok(s)
        } else {
            Err(Error::SingularSteadyState {
                residual: s.residual,
            })
        }
    };
    match opts.method {
        SteadyMethod::Direct => attempt(SteadyMethod::Direct),
        SteadyMethod::Krylov => attempt(SteadyMethod::Krylov),
        SteadyMethod::Auto => {
            if l.dim_rho <= opts.direct_max_dim {
                attempt(SteadyMethod::Direct)
            } else {
                attempt(SteadyMethod::Krylov).or_else(|_| attempt(SteadyMethod::Direct))
            }
        }
    }
}
