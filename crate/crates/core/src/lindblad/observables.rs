use nalgebra::DMatrix;

use super::density::DensityMatrix;
use super::liouvillian::Liouvillian;
use super::propagate::{propagate, StepOptions};
use crate::error::{Error, Result};
use crate::fockspace::{Basis, SparseOperator, Truncation};
use crate::C64;

/// Below this mean photon number g² is reported as unmeasurable.
pub const MIN_N_CAV: f64 = 1e-14;

/// `⟨c†c⟩`
pub fn n_cav(rho: &DensityMatrix, c: &SparseOperator) -> f64 {
    let n = c.adjoint().matmul(c);
    rho.expect(&n).re
}

/// `⟨c†c†cc⟩ / ⟨c†c⟩²`
pub fn g2_zero(rho: &DensityMatrix, c: &SparseOperator) -> Result<f64> {
    let n = n_cav(rho, c);
    if !(n >= MIN_N_CAV) {
        return Err(Error::Unmeasurable { n_cav: n });
    }
    let cc = c.matmul(c);
    let num = rho.expect(&cc.adjoint().matmul(&cc)).re;
    Ok(num / (n * n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct G2Result {
    pub g2_zero: f64,
    pub n_cav: f64,
    pub tau_grid: Vec<f64>,
    pub g2_tau: Vec<f64>,
    /// Largest deviation of `Tr X(τ)` from `n_cav` along the trajectory.
    pub trace_drift: f64,
}

impl G2Result {
    /// `tau,g2`
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,g2")?;
        for (t, g) in self.tau_grid.iter().zip(&self.g2_tau) {
            writeln!(w, "{t},{g}")?;
        }
        Ok(())
    }
}

/// Quantum regression: `X(0) = c ρ c†` evolved under `L`, and
/// `g²(τ) = Tr[c†c X(τ)] / n_cav²`. `tau_grid` must be non-decreasing and
/// start at a non-negative delay; the integration starts at τ = 0.
pub fn g2_tau(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    c: &SparseOperator,
    tau_grid: &[f64],
    step: &StepOptions,
) -> Result<G2Result> {
    if tau_grid.is_empty() || tau_grid[0] < 0.0 {
        return Err(Error::InvalidGrid("tau grid must be non-empty and start at tau >= 0".into()));
    }
    let d = l.dim_rho;
    let n = n_cav(rho_ss, c);
    let g0 = g2_zero(rho_ss, c)?;
    let cm = c.matrix.to_dense();
    let x0: DMatrix<C64> = &cm * rho_ss.matrix() * cm.adjoint();
    let mut times = Vec::with_capacity(tau_grid.len() + 1);
    times.push(0.0);
    times.extend_from_slice(tau_grid);
    let xs = propagate(&l.superop, x0.as_slice(), &times, step)?;
    let number = c.adjoint().matmul(c);
    let mut g2 = Vec::with_capacity(tau_grid.len());
    let mut drift: f64 = 0.0;
    for x in &xs[1..] {
        let x = DensityMatrix::from_vec(d, x);
        g2.push(x.expect(&number).re / (n * n));
        drift = drift.max((x.trace().re - n).abs());
    }
    Ok(G2Result {
        g2_zero: g0,
        n_cav: n,
        tau_grid: tau_grid.to_vec(),
        g2_tau: g2,
        trace_drift: drift,
    })
}

/// Edge-population diagnostic for a truncated state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationReport {
    pub truncation: Truncation,
    /// Population of the `n_c = n_c_max` row.
    pub photon_edge: f64,
    /// Population of the highest kept `n_t` column.
    pub trion_edge: f64,
    /// The trion cutoff sits at the Pauli ceiling `N_s`, so its edge is
    /// physical rather than a truncation artefact.
    pub trion_at_ceiling: bool,
    pub pass: bool,
    pub recommended: Truncation,
}

pub const EDGE_TOL: f64 = 1e-8;
pub const ENLARGE_STEP: usize = 4;

pub fn truncation_check(rho: &DensityMatrix, trunc: &Truncation, n_s: usize) -> TruncationReport {
    let basis = Basis::new(trunc, n_s);
    assert_eq!(basis.dim(), rho.dim(), "state does not match truncation");
    let m = rho.matrix();
    let top_t = basis.n_t_dim - 1;
    let (mut photon_edge, mut trion_edge) = (0.0, 0.0);
    for (i, (n_c, n_t)) in basis.states().enumerate() {
        let p = m[(i, i)].re;
        if n_c == basis.n_c_max {
            photon_edge += p;
        }
        if n_t == top_t {
            trion_edge += p;
        }
    }
    let trion_at_ceiling = trunc.n_t_max >= n_s;
    let photon_ok = photon_edge < EDGE_TOL;
    let trion_ok = trion_at_ceiling || trion_edge < EDGE_TOL;
    let recommended = Truncation::new(
        trunc.n_c_max + if photon_ok { 0 } else { ENLARGE_STEP },
        trunc.n_t_max + if trion_ok { 0 } else { ENLARGE_STEP },
    );
    TruncationReport {
        truncation: *trunc,
        photon_edge,
        trion_edge,
        trion_at_ceiling,
        pass: photon_ok && trion_ok,
        recommended,
    }
}

impl TruncationReport {
    pub fn into_result(self) -> Result<Self> {
        if self.pass {
            Ok(self)
        } else {
            Err(Error::Truncation {
                current: self.truncation,
                photon: self.photon_edge,
                trion: self.trion_edge,
                recommended: self.recommended,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::photon_lowering;

    #[test]
    fn reference_statistics() {
        let trunc = Truncation::new(40, 1);
        let basis = Basis::new(&trunc, 1);
        let c = photon_lowering(&basis);
        let coh = DensityMatrix::coherent(&basis, C64::new(0.6, 0.3));
        assert!((g2_zero(&coh, &c).unwrap() - 1.0).abs() < 1e-6);
        let thermal = DensityMatrix::thermal(&basis, 0.1);
        assert!((g2_zero(&thermal, &c).unwrap() - 2.0).abs() < 1e-6);
        assert!((n_cav(&thermal, &c) - 0.1).abs() < 1e-12);
        let fock = DensityMatrix::fock(&basis, 1, 0);
        assert!(g2_zero(&fock, &c).unwrap().abs() < 1e-15);
        let vac = DensityMatrix::vacuum(basis.dim());
        assert!(matches!(g2_zero(&vac, &c), Err(Error::Unmeasurable { .. })));
    }

    #[test]
    fn truncation_edges() {
        let trunc = Truncation::new(4, 3);
        let basis = Basis::new(&trunc, 100);
        let vac = truncation_check(&DensityMatrix::vacuum(basis.dim()), &trunc, 100);
        assert!(vac.pass);
        assert_eq!((vac.photon_edge, vac.trion_edge), (0.0, 0.0));

        let coh = DensityMatrix::coherent(&basis, C64::new(3.0, 0.0));
        let report = truncation_check(&coh, &trunc, 100);
        assert!(!report.pass);
        assert!(report.photon_edge > 0.1);
        assert_eq!(report.recommended, Truncation::new(8, 3));
        assert!(matches!(report.into_result(), Err(Error::Truncation { .. })));
    }

    #[test]
    fn pauli_ceiling_edge_is_exempt() {
        let trunc = Truncation::new(3, 5);
        let basis = Basis::new(&trunc, 1);
        let excited = DensityMatrix::fock(&basis, 0, 1);
        let report = truncation_check(&excited, &trunc, 1);
        assert!(report.trion_at_ceiling);
        assert!((report.trion_edge - 1.0).abs() < 1e-15);
        assert!(report.pass);
    }
}
