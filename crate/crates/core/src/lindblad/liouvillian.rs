use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fockspace::{
    build_hamiltonian, photon_lowering, trion_lowering, Basis, Frame, ModelParams, SparseOperator,
    Truncation,
};
use crate::sparse::CsrMatrix;
use crate::C64;

/// Superoperator of `dρ/dt = −i[H, ρ] + Σ_k (C_k ρ C_k† − ½{C_k†C_k, ρ})`
/// acting on column-major `vec(ρ)[i + d·j] = ρ_ij`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub dim_rho: usize,
    pub superop: CsrMatrix,
    pub hamiltonian: SparseOperator,
    pub collapses: Vec<SparseOperator>,
    /// Model and truncation this was built from, when built from a model.
    pub provenance: Option<(ModelParams, Truncation)>,
}

pub fn build_liouvillian(h: &SparseOperator, collapses: &[SparseOperator]) -> Result<Liouvillian> {
    let d = h.dim();
    for c in collapses {
        if c.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.dim(),
            });
        }
    }
    if !h.is_hermitian(1e-12) {
        return Err(Error::InvalidParams("Hamiltonian is not Hermitian".into()));
    }
    let id = CsrMatrix::identity(d);
    let minus_i = C64::new(0.0, -1.0);
    // vec(A X B) = (Bᵀ ⊗ A) vec(X)
    let mut parts = vec![
        id.kron(&h.matrix).scale(minus_i),
        h.matrix.transpose().kron(&id).scale(-minus_i),
    ];
    let half = C64::new(-0.5, 0.0);
    for c in collapses {
        let cdc = c.matrix.adjoint().matmul(&c.matrix);
        parts.push(c.matrix.conj().kron(&c.matrix));
        parts.push(id.kron(&cdc).scale(half));
        parts.push(cdc.transpose().kron(&id).scale(half));
    }
    let n = d * d;
    let superop = CsrMatrix::from_triplets(n, n, parts.iter().flat_map(|p| p.iter()));
    Ok(Liouvillian {
        dim_rho: d,
        superop,
        hamiltonian: h.clone(),
        collapses: collapses.to_vec(),
        provenance: None,
    })
}

/// Rotating-frame model Liouvillian with collapse operators `√γ_c c` and
/// `√γ_T B` (zero-rate channels are omitted).
pub fn model_liouvillian(params: &ModelParams, trunc: &Truncation) -> Result<Liouvillian> {
    let h = build_hamiltonian(params, trunc, Frame::Rotating)?;
    let basis = Basis::new(trunc, params.n_s);
    let mut collapses = Vec::new();
    let scaled = |op: SparseOperator, rate: f64| {
        SparseOperator::new(basis, op.matrix.scale(C64::new(rate.sqrt(), 0.0)))
    };
    if params.gamma_c > 0.0 {
        collapses.push(scaled(photon_lowering(&basis), params.gamma_c));
    }
    if params.gamma_t > 0.0 {
        collapses.push(scaled(trion_lowering(&basis, params.n_s), params.gamma_t));
    }
    let mut l = build_liouvillian(&h, &collapses)?;
    l.provenance = Some((params.clone(), *trunc));
    Ok(l)
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.dim_rho * self.dim_rho
    }

    pub fn basis(&self) -> Basis {
        self.hamiltonian.basis
    }

    /// `L(ρ)` for a dense `ρ`.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim_rho;
        assert_eq!(rho.shape(), (d, d));
        DMatrix::from_vec(d, d, self.superop.mul_vec(rho.as_slice()))
    }

    /// Non-Hermitian effective generator `A = −iH − ½ Σ C†C`, so that
    /// `L(ρ) = Aρ + ρA† + Σ CρC†`.
    pub fn effective_generator(&self) -> DMatrix<C64> {
        let mut a = self.hamiltonian.matrix.to_dense() * C64::new(0.0, -1.0);
        for c in &self.collapses {
            let cdc = c.matrix.adjoint().matmul(&c.matrix).to_dense();
            a -= cdc * C64::new(0.5, 0.0);
        }
        a
    }

    /// Scale of the largest |eigenvalue| of L (row-sum bound).
    pub fn scale_hint(&self) -> f64 {
        self.superop.max_row_sum()
    }
}
