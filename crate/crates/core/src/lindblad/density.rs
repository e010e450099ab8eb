use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fockspace::{Basis, SparseOperator};
use crate::C64;

/// Dense density matrix over the truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<C64>,
}

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

impl DensityMatrix {
    /// Wraps a matrix without checking the state invariants.
    pub fn from_matrix(data: DMatrix<C64>) -> Self {
        assert!(data.is_square());
        Self { data }
    }

    /// From a column-major `vec(ρ)`.
    pub fn from_vec(d: usize, v: &[C64]) -> Self {
        Self::from_matrix(DMatrix::from_column_slice(d, d, v))
    }

    /// Projects onto Hermitian unit-trace matrices: `(ρ + ρ†)/2`, rescaled.
    pub fn hermitized(data: DMatrix<C64>) -> Self {
        let mut h = (&data + data.adjoint()) * C64::new(0.5, 0.0);
        let tr = h.trace().re;
        h /= C64::new(tr, 0.0);
        Self::from_matrix(h)
    }

    /// Pure state `|ψ⟩⟨ψ|`, normalized.
    pub fn pure(psi: &[C64]) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        let v = v / C64::new(norm, 0.0);
        Self::from_matrix(&v * v.adjoint())
    }

    pub fn vacuum(d: usize) -> Self {
        let mut m = DMatrix::zeros(d, d);
        m[(0, 0)] = C64::new(1.0, 0.0);
        Self::from_matrix(m)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_matrix(DMatrix::identity(d, d) / C64::new(d as f64, 0.0))
    }

    pub fn fock(basis: &Basis, n_c: usize, n_t: usize) -> Self {
        let mut psi = vec![C64::new(0.0, 0.0); basis.dim()];
        psi[basis.index(n_c, n_t)] = C64::new(1.0, 0.0);
        Self::pure(&psi)
    }

    /// Photon coherent state `|α⟩ ⊗ |0⟩` cut at `n_c_max` and renormalized.
    pub fn coherent(basis: &Basis, alpha: C64) -> Self {
        let mut psi = vec![C64::new(0.0, 0.0); basis.dim()];
        let mut amp = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..=basis.n_c_max {
            if n > 0 {
                amp *= alpha / (n as f64).sqrt();
            }
            psi[basis.index(n, 0)] = amp;
        }
        Self::pure(&psi)
    }

    /// Photon thermal state with mean occupation `n_bar`, trion vacuum.
    pub fn thermal(basis: &Basis, n_bar: f64) -> Self {
        let ratio = n_bar / (1.0 + n_bar);
        let mut m = DMatrix::zeros(basis.dim(), basis.dim());
        let mut p = 1.0 / (1.0 + n_bar);
        for n in 0..=basis.n_c_max {
            let i = basis.index(n, 0);
            m[(i, i)] = C64::new(p, 0.0);
            p *= ratio;
        }
        let tr = m.trace();
        Self::from_matrix(m / tr)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn as_vec(&self) -> &[C64] {
        self.data.as_slice()
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// `Tr[A ρ]`
    pub fn expect(&self, op: &SparseOperator) -> C64 {
        assert_eq!(op.dim(), self.dim());
        op.matrix
            .iter()
            .map(|(r, c, v)| v * self.data[(c, r)])
            .sum()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.data - self.data.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `½ ‖ρ − σ‖₁`
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let diff = Self::from_matrix(&self.data - &other.data);
        0.5 * diff.eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Hermitian, unit trace and positive within the module tolerances.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidParams(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidParams(format!("density matrix trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidParams(format!("density matrix eigenvalue {min:e} < 0")));
        }
        Ok(())
    }
}
