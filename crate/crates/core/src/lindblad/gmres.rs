//! Restarted GMRES for complex linear operators.

use crate::C64;

#[derive(Clone, Debug)]
pub struct GmresOutcome {
    pub x: Vec<C64>,
    /// True residual `‖b − A x‖₂` at exit.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Solves `A x = b` from `x0`, stopping once `‖b − A x‖₂ ≤ tol`.
pub fn gmres<F>(
    mut apply: F,
    b: &[C64],
    x0: Vec<C64>,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> GmresOutcome
where
    F: FnMut(&[C64], &mut [C64]),
{
    let n = b.len();
    let zero = C64::new(0.0, 0.0);
    let mut x = x0;
    let mut iterations = 0;
    let mut av = vec![zero; n];
    let true_residual = |x: &[C64], apply: &mut F, av: &mut [C64]| -> Vec<C64> {
        apply(x, av);
        b.iter().zip(av.iter()).map(|(bi, ai)| bi - ai).collect()
    };
    loop {
        let r = true_residual(&x, &mut apply, &mut av);
        let beta = norm(&r);
        if beta <= tol || iterations >= max_iter || !beta.is_finite() {
            return GmresOutcome {
                x,
                residual: beta,
                iterations,
                converged: beta <= tol,
            };
        }
        let m = restart.min(max_iter - iterations).max(1);
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|z| z / beta).collect());
        // Hessenberg columns after the Givens rotations, i.e. R of the QR.
        let mut h: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut rot: Vec<(f64, C64)> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_done = 0;
        for k in 0..m {
            let mut w = vec![zero; n];
            apply(&basis[k], &mut w);
            iterations += 1;
            let mut col = vec![zero; k + 2];
            // Modified Gram–Schmidt, twice for stability.
            for _ in 0..2 {
                for (j, v) in basis.iter().enumerate() {
                    let hj = dot(v, &w);
                    col[j] += hj;
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hj * vi);
                }
            }
            let hn = norm(&w);
            col[k + 1] = C64::new(hn, 0.0);
            for (j, &(c, s)) in rot.iter().enumerate() {
                let (a, bj) = (col[j], col[j + 1]);
                col[j] = c * a + s * bj;
                col[j + 1] = -s.conj() * a + c * bj;
            }
            let (a, bk) = (col[k], col[k + 1]);
            let denom = (a.norm_sqr() + bk.norm_sqr()).sqrt();
            let (c, s) = if denom == 0.0 {
                (1.0, zero)
            } else if a.norm() == 0.0 {
                (0.0, bk.conj() / bk.norm())
            } else {
                (a.norm() / denom, (a / a.norm()) * bk.conj() / denom)
            };
            col[k] = c * a + s * bk;
            col[k + 1] = zero;
            rot.push((c, s));
            let gk = g[k];
            g[k] = c * gk;
            g[k + 1] = -s.conj() * gk;
            col.truncate(k + 1);
            h.push(col);
            k_done = k + 1;
            let breakdown = hn <= f64::EPSILON * beta;
            if !breakdown {
                basis.push(w.iter().map(|z| z / hn).collect());
            }
            if g[k + 1].norm() <= tol || breakdown {
                break;
            }
        }
        // Back substitution on the triangular system.
        let mut y = vec![zero; k_done];
        for i in (0..k_done).rev() {
            let mut acc = g[i];
            for j in i + 1..k_done {
                acc -= h[j][i] * y[j];
            }
            y[i] = if h[i][i] == zero { zero } else { acc / h[i][i] };
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut().zip(&basis[j]).for_each(|(xi, vi)| *xi += yj * vi);
        }
        if k_done == 0 {
            let r = true_residual(&x, &mut apply, &mut av);
            let beta = norm(&r);
            return GmresOutcome {
                x,
                residual: beta,
                iterations,
                converged: beta <= tol,
            };
        }
    }
}
