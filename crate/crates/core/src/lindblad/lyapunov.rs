//! Exact inverse of the no-jump part `X ↦ AX + XA†` of a Liouvillian.
//!
//! With the complex Schur form `A = Q R Q†` the equation `AX + XA† = G`
//! becomes the triangular Sylvester problem `R Y + Y R† = Q† G Q`, solved
//! column by column from the right. Used as a right preconditioner for the
//! steady-state Krylov solve: the jump terms `Σ CρC†` that remain are a
//! low-rank-like perturbation, so GMRES converges in a few dozen steps.

use faer::{Mat, MatRef};
use nalgebra::{DMatrix, Schur};

use crate::C64;

#[derive(Clone, Debug)]
pub struct LyapunovSolver {
    a: DMatrix<C64>,
    q: Mat<C64>,
    /// Upper-triangular Schur factor, column-major.
    r: Vec<C64>,
}

const SCHUR_MAX_ITER: usize = 10_000;

fn to_faer(m: &DMatrix<C64>) -> Mat<C64> {
    MatRef::from_column_major_slice(m.as_slice(), m.nrows(), m.ncols()).to_owned()
}

impl LyapunovSolver {
    /// `None` if the Schur iteration fails or `X ↦ AX + XA†` is singular
    /// (some pair of eigenvalues with `Re λ_i + Re λ_j ≈ 0`).
    pub fn new(a: DMatrix<C64>) -> Option<Self> {
        let (q, r) = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER)?.unpack();
        let scale = a.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
        let max_re = (0..r.nrows()).map(|i| r[(i, i)].re).fold(f64::NEG_INFINITY, f64::max);
        // Re(λ_i + λ_j) is bounded away from zero by 2·max Re λ.
        if !(max_re < -1e-12 * scale) {
            return None;
        }
        Some(Self {
            q: to_faer(&q),
            r: r.as_slice().to_vec(),
            a,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `AX + XA†`
    pub fn forward(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        &self.a * x + x * self.a.adjoint()
    }

    /// `X` with `AX + XA† = G`.
    pub fn solve(&self, g: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_vec(d, d, self.solve_vec(g.as_slice()))
    }

    /// [`LyapunovSolver::solve`] on column-major data.
    pub fn solve_vec(&self, g: &[C64]) -> Vec<C64> {
        let d = self.dim();
        let zero = C64::new(0.0, 0.0);
        let g = MatRef::from_column_major_slice(g, d, d);
        let f: Mat<C64> = self.q.adjoint() * g * &self.q;
        let r = |i: usize, k: usize| self.r[i + d * k];
        let mut y = vec![zero; d * d];
        let mut rhs = vec![zero; d];
        for j in (0..d).rev() {
            for (i, v) in rhs.iter_mut().enumerate() {
                *v = f[(i, j)];
            }
            let (head, tail) = y.split_at_mut((j + 1) * d);
            for k in j + 1..d {
                let s = r(j, k).conj();
                if s != zero {
                    let yk = &tail[(k - j - 1) * d..(k - j) * d];
                    rhs.iter_mut().zip(yk).for_each(|(ri, yi)| *ri -= s * yi);
                }
            }
            // (R + conj(R_jj) I) y_j = rhs, column-oriented back substitution.
            let shift = r(j, j).conj();
            let yj = &mut head[j * d..];
            for i in (0..d).rev() {
                let v = rhs[i] / (r(i, i) + shift);
                yj[i] = v;
                let col = &self.r[i * d..i * d + i];
                rhs[..i].iter_mut().zip(col).for_each(|(ri, rk)| *ri -= v * rk);
            }
        }
        let y = MatRef::from_column_major_slice(&y, d, d);
        let x: Mat<C64> = &self.q * y * self.q.adjoint();
        let mut out = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                out.push(x[(i, j)]);
            }
        }
        out
    }
}
