//! Adaptive Dormand–Prince 5(4) integration of `dy/dt = M y` for a sparse `M`.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Steps below this (relative to the output span) abort the integration.
    pub h_min_rel: f64,
    pub max_steps: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_min_rel: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

// Dormand–Prince tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy_into(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (w, k) in terms {
            acc += k[i] * *w;
        }
        *o = y[i] + acc * h;
    }
}

/// Integrates from `y0` at `t = times[0]` and returns the state at every
/// entry of `times` (which must be non-decreasing). Steps land exactly on
/// the output times.
pub fn propagate(
    m: &CsrMatrix,
    y0: &[C64],
    times: &[f64],
    opts: &StepOptions,
) -> Result<Vec<Vec<C64>>> {
    let n = y0.len();
    assert_eq!(m.nrows(), n);
    if times.is_empty() {
        return Ok(Vec::new());
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidGrid("output times must be non-decreasing".into()));
    }
    let span = (times[times.len() - 1] - times[0]).abs().max(f64::MIN_POSITIVE);
    let h_min = opts.h_min_rel * span;
    let zero = C64::new(0.0, 0.0);
    let mut k: Vec<Vec<C64>> = vec![vec![zero; n]; 7];
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut y = y0.to_vec();
    let mut t = times[0];
    let mut out = vec![y.clone()];
    // Initial step from the operator scale.
    let mut h = (0.01 / m.max_row_sum().max(1e-300)).min(span);
    let mut fsal_valid = false;
    let mut steps = 0usize;

    for &t_out in &times[1..] {
        while t < t_out {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepControl {
                    tau: t,
                    h_min,
                    scale_hint: m.max_row_sum(),
                });
            }
            // `h` is the controller's proposal; the step taken may be clipped
            // to land on `t_out` without disturbing the proposal.
            let last = t + h >= t_out;
            let h_step = if last { t_out - t } else { h };
            if !fsal_valid {
                m.matvec(&y, &mut k[0]);
            }
            axpy_into(&mut tmp, &y, h_step, &[(A21, &k[0])]);
            m.matvec(&tmp, &mut k[1]);
            axpy_into(&mut tmp, &y, h_step, &[(A31, &k[0]), (A32, &k[1])]);
            m.matvec(&tmp, &mut k[2]);
            axpy_into(&mut tmp, &y, h_step, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])]);
            m.matvec(&tmp, &mut k[3]);
            axpy_into(
                &mut tmp,
                &y,
                h_step,
                &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])],
            );
            m.matvec(&tmp, &mut k[4]);
            axpy_into(
                &mut tmp,
                &y,
                h_step,
                &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])],
            );
            m.matvec(&tmp, &mut k[5]);
            axpy_into(
                &mut y_new,
                &y,
                h_step,
                &[(B1, &k[0]), (B3, &k[2]), (B4, &k[3]), (B5, &k[4]), (B6, &k[5])],
            );
            m.matvec(&y_new, &mut k[6]);

            let mut err_sq = 0.0;
            for i in 0..n {
                let e = (k[0][i] * E1
                    + k[2][i] * E3
                    + k[3][i] * E4
                    + k[4][i] * E5
                    + k[5][i] * E6
                    + k[6][i] * E7)
                    * h_step;
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::StepControl {
                    tau: t,
                    h_min,
                    scale_hint: m.max_row_sum(),
                });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { t_out } else { t + h_step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                if !last || factor < 1.0 {
                    h = h_step * factor;
                }
            } else {
                h = h_step * factor.min(1.0);
                if h < h_min {
                    return Err(Error::StepControl {
                        tau: t,
                        h_min,
                        scale_hint: m.max_row_sum(),
                    });
                }
            }
            fsal_valid = true;
        }
        out.push(y.clone());
    }
    Ok(out)
}
