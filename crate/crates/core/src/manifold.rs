//! Fixed-excitation manifolds and the pulse-driven transition spectrum.
//!
//! The coupling conserves `N = n_c + n_t`, so the lab-frame Hamiltonian splits
//! into real symmetric tridiagonal blocks indexed by `n_t = 0..=min(N, N_s)`.
//! A weak coherent pulse prepares photons only; its spectrum is the sum of
//! Lorentzian-broadened `N → N−1` emission lines weighted by the Poisson
//! photon distribution.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fockspace::{coupling_factor, ModelParams};

/// Tridiagonal block of the lab-frame Hamiltonian at total excitation `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldBlock {
    pub n_total: usize,
    /// `(N − n_t) ω_cav + n_t ω_T`
    pub diag: Vec<f64>,
    /// `offdiag[n_t − 1]` couples `n_t − 1 ↔ n_t`.
    pub offdiag: Vec<f64>,
}

impl ManifoldBlock {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag));
        for (i, &e) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = e;
            m[(i + 1, i)] = e;
        }
        debug_assert_eq!(m.nrows(), n);
        m
    }
}

pub fn build_manifold(n_total: usize, params: &ModelParams) -> ManifoldBlock {
    let dim = n_total.min(params.n_s) + 1;
    let diag = (0..dim)
        .map(|n_t| (n_total - n_t) as f64 * params.omega_cav + n_t as f64 * params.omega_t)
        .collect();
    let offdiag = (1..dim)
        .map(|n_t| {
            0.5 * params.omega_rabi
                * ((n_total - n_t + 1) as f64).sqrt()
                * coupling_factor(n_t, params.n_s)
        })
        .collect();
    ManifoldBlock {
        n_total,
        diag,
        offdiag,
    }
}

/// Eigen-decomposition of a block: ascending values, eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct BlockEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

const QL_MAX_SWEEPS: usize = 60;

/// Implicit-shift QL on a symmetric tridiagonal matrix, accumulating the
/// rotations into `z`. On entry `e[i]` couples `i` and `i + 1`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut DMatrix<f64>) -> bool {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return false;
            }
            // Wilkinson-type shift from the leading 2x2.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zf = z[(k, i + 1)];
                    let zi = z[(k, i)];
                    z[(k, i + 1)] = s * zi + c * zf;
                    z[(k, i)] = c * zi - s * zf;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    true
}

pub fn eig_block(block: &ManifoldBlock) -> Result<BlockEigen> {
    let n = block.dim();
    let mut d = block.diag.clone();
    let mut e = block.offdiag.clone();
    e.push(0.0);
    let mut z = DMatrix::<f64>::identity(n, n);
    if !tridiagonal_ql(&mut d, &mut e, &mut z) || d.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenConvergence {
            block: block.n_total,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| z[(r, order[c])]);
    Ok(BlockEigen { values, vectors })
}

/// One emission line `E_μ(N) − E_ν(N−1)` with its pulse-projected weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub energy: f64,
    pub weight: f64,
}

/// Lines dropped below this fraction of their manifold's total weight.
pub const LINE_PRUNE_REL: f64 = 1e-12;
/// Lines below this fraction of the strongest line are ignored by the
/// grid-coverage check.
pub const COVERAGE_REL: f64 = 1e-6;
/// Poisson mass left out of the manifold sum.
pub const POISSON_TAIL: f64 = 1e-8;

/// Emission lines for every manifold `1..=n_max`, independent of the pulse
/// amplitude, so one table serves a whole `|α|²` scan.
#[derive(Clone, Debug)]
pub struct LineTable {
    pub params: ModelParams,
    /// `lines[N − 1]` holds the `N → N−1` lines.
    lines: Vec<Vec<Line>>,
}

fn manifold_lines(
    n: usize,
    upper: &BlockEigen,
    lower: &BlockEigen,
) -> Vec<Line> {
    // ⟨n_t in N−1| c |n_t in N⟩ = √(N − n_t) for n_t ≤ dim(N−1) − 1.
    let du = upper.values.len();
    let dl = lower.values.len();
    let scaled = DMatrix::from_fn(dl, du, |r, c| {
        ((n - r) as f64).sqrt() * upper.vectors[(r, c)]
    });
    let amp = lower.vectors.transpose() * scaled;
    let mut lines = Vec::with_capacity(du * dl);
    let mut total = 0.0;
    for mu in 0..du {
        let proj = upper.vectors[(0, mu)].powi(2);
        for nu in 0..dl {
            let w = proj * amp[(nu, mu)].powi(2);
            total += w;
            lines.push(Line {
                energy: upper.values[mu] - lower.values[nu],
                weight: w,
            });
        }
    }
    lines.retain(|l| l.weight >= LINE_PRUNE_REL * total);
    lines
}

impl LineTable {
    pub fn build(params: &ModelParams, n_max: usize) -> Result<Self> {
        params.validate()?;
        let eigs: Vec<BlockEigen> = (0..=n_max)
            .into_par_iter()
            .map(|n| eig_block(&build_manifold(n, params)))
            .collect::<Result<_>>()?;
        let lines = (1..=n_max)
            .into_par_iter()
            .map(|n| manifold_lines(n, &eigs[n], &eigs[n - 1]))
            .collect();
        Ok(Self {
            params: params.clone(),
            lines,
        })
    }

    pub fn n_max(&self) -> usize {
        self.lines.len()
    }

    pub fn lines(&self, n_total: usize) -> &[Line] {
        &self.lines[n_total - 1]
    }
}

/// Poisson weights `p_N(|α|²)` for `N = 0..` until the cumulative mass
/// exceeds `1 − POISSON_TAIL`.
pub fn poisson_weights(alpha_sq: f64) -> Vec<f64> {
    if alpha_sq == 0.0 {
        return vec![1.0];
    }
    let ln_a = alpha_sq.ln();
    let mut ln_p = -alpha_sq;
    let mut out = Vec::new();
    let mut mass = 0.0;
    let mut n = 0usize;
    loop {
        let p = ln_p.exp();
        out.push(p);
        mass += p;
        if mass > 1.0 - POISSON_TAIL {
            return out;
        }
        n += 1;
        ln_p += ln_a - (n as f64).ln();
    }
}

/// Highest manifold needed for a pulse of mean photon number `alpha_sq`.
pub fn manifold_cutoff(alpha_sq: f64) -> usize {
    poisson_weights(alpha_sq).len() - 1
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub omega: f64,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumResult {
    pub omega_grid: Vec<f64>,
    /// Normalized to unit maximum (all zeros if there is no emission).
    pub intensity: Vec<f64>,
    /// Maximum of the unnormalized spectrum.
    pub scale: f64,
    pub peaks: Vec<Peak>,
}

pub const DEFAULT_PROMINENCE: f64 = 0.01;

impl SpectrumResult {
    /// `omega,intensity`
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "omega,intensity")?;
        for (o, i) in self.omega_grid.iter().zip(&self.intensity) {
            writeln!(w, "{o},{i}")?;
        }
        Ok(())
    }
}

/// `n_photons,peak_omega,peak_height`, one row per (pulse, peak).
pub fn write_peak_track<W: std::io::Write>(
    mut w: W,
    spectra: &[(f64, &SpectrumResult)],
) -> std::io::Result<()> {
    writeln!(w, "n_photons,peak_omega,peak_height")?;
    for (alpha_sq, spec) in spectra {
        for p in &spec.peaks {
            writeln!(w, "{alpha_sq},{},{}", p.omega, p.height)?;
        }
    }
    Ok(())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::InvalidGrid("need at least 3 grid points".into()));
    }
    if grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidGrid("non-finite grid point".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Spectrum from precomputed lines. Fails if the table is too short for
/// `alpha_sq` or the grid clips a significant line.
pub fn spectrum_from_table(
    table: &LineTable,
    alpha_sq: f64,
    omega_grid: &[f64],
    prominence: f64,
) -> Result<SpectrumResult> {
    check_grid(omega_grid)?;
    if !(alpha_sq >= 0.0) || !alpha_sq.is_finite() {
        return Err(Error::InvalidParams(format!("|alpha|^2 = {alpha_sq} must be >= 0")));
    }
    let params = &table.params;
    let hwhm = 0.5 * (params.gamma_c + params.gamma_t);
    if hwhm <= 0.0 {
        return Err(Error::InvalidParams("zero linewidth: gamma_c + gamma_t must be > 0".into()));
    }
    let weights = poisson_weights(alpha_sq);
    let p = &weights;
    let n_cut = p.len() - 1;
    if n_cut > table.n_max() {
        return Err(Error::InvalidParams(format!(
            "line table holds N <= {}, |alpha|^2 = {alpha_sq} needs N <= {n_cut}",
            table.n_max()
        )));
    }

    let strongest = (1..=n_cut)
        .flat_map(|n| table.lines(n).iter().map(move |l| p[n] * l.weight))
        .fold(0.0, f64::max);
    if strongest > 0.0 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for n in 1..=n_cut {
            for l in table.lines(n) {
                if p[n] * l.weight >= COVERAGE_REL * strongest {
                    lo = lo.min(l.energy);
                    hi = hi.max(l.energy);
                }
            }
        }
        let (need_lo, need_hi) = (lo - 5.0 * hwhm, hi + 5.0 * hwhm);
        let (grid_lo, grid_hi) = (omega_grid[0], *omega_grid.last().unwrap());
        if need_lo < grid_lo || need_hi > grid_hi {
            return Err(Error::GridCoverage {
                grid_lo,
                grid_hi,
                need_lo,
                need_hi,
            });
        }
    }

    let norm = hwhm / std::f64::consts::PI;
    let hwhm_sq = hwhm * hwhm;
    let partials: Vec<Vec<f64>> = (1..=n_cut)
        .into_par_iter()
        .map(|n| {
            let mut s = vec![0.0; omega_grid.len()];
            if p[n] == 0.0 {
                return s;
            }
            for l in table.lines(n) {
                let w = p[n] * l.weight * norm;
                for (out, &om) in s.iter_mut().zip(omega_grid) {
                    let x = om - l.energy;
                    *out += w / (x * x + hwhm_sq);
                }
            }
            s
        })
        .collect();
    let mut intensity = vec![0.0; omega_grid.len()];
    for s in &partials {
        for (a, b) in intensity.iter_mut().zip(s) {
            *a += b;
        }
    }
    let scale = intensity.iter().cloned().fold(0.0, f64::max);
    if scale > 0.0 {
        intensity.iter_mut().for_each(|v| *v /= scale);
    }
    let mut spec = SpectrumResult {
        omega_grid: omega_grid.to_vec(),
        intensity,
        scale,
        peaks: Vec::new(),
    };
    spec.peaks = find_peaks(&spec.omega_grid, &spec.intensity, prominence);
    Ok(spec)
}

/// Spectrum after a coherent pulse of mean photon number `alpha_sq`.
pub fn transition_spectrum(
    alpha_sq: f64,
    params: &ModelParams,
    omega_grid: &[f64],
) -> Result<SpectrumResult> {
    if !(alpha_sq >= 0.0) || !alpha_sq.is_finite() {
        return Err(Error::InvalidParams(format!("|alpha|^2 = {alpha_sq} must be >= 0")));
    }
    let table = LineTable::build(params, manifold_cutoff(alpha_sq))?;
    spectrum_from_table(&table, alpha_sq, omega_grid, DEFAULT_PROMINENCE)
}

/// Strict local maxima whose topographic prominence exceeds `prominence`
/// (relative to the global maximum), ascending in ω. Maxima within two
/// grid points of each other are merged into the higher one.
pub fn find_peaks(grid: &[f64], y: &[f64], prominence: f64) -> Vec<Peak> {
    assert_eq!(grid.len(), y.len());
    let n = y.len();
    let top = y.iter().cloned().fold(0.0, f64::max);
    if n < 3 || top <= 0.0 {
        return Vec::new();
    }
    let threshold = prominence * top;
    let mut candidates = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            // Walk across a flat top; report its middle.
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                candidates.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    let mut kept: Vec<usize> = Vec::new();
    for k in candidates {
        let h = y[k];
        let mut left_min = h;
        for idx in (0..k).rev() {
            if y[idx] > h {
                break;
            }
            left_min = left_min.min(y[idx]);
        }
        let mut right_min = h;
        for &v in &y[k + 1..] {
            if v > h {
                break;
            }
            right_min = right_min.min(v);
        }
        if h - left_min.max(right_min) > threshold {
            match kept.last() {
                Some(&prev) if k - prev <= 2 => {
                    if y[k] > y[prev] {
                        *kept.last_mut().unwrap() = k;
                    }
                }
                _ => kept.push(k),
            }
        }
    }
    kept.into_iter()
        .map(|k| Peak {
            omega: grid[k],
            height: y[k],
        })
        .collect()
}

pub fn peak_positions(spec: &SpectrumResult, prominence: f64) -> Vec<f64> {
    find_peaks(&spec.omega_grid, &spec.intensity, prominence)
        .into_iter()
        .map(|p| p.omega)
        .collect()
}

/// Uniform grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| if i + 1 == n { hi } else { lo + h * i as f64 }).collect()
        }
    }
}

/// Where the doublet collapses: the smallest `|α|²` with at most one peak.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseScan {
    /// Coarse scan points `(|α|², peak count)`.
    pub coarse: Vec<(f64, usize)>,
    pub collapse_point: Option<f64>,
}

/// Upward scan of `|α|²` in steps of `step` over `[lo, hi]`, then bisection
/// of the first bracket in which the peak count drops to ≤ 1, down to `tol`.
pub fn find_collapse(
    params: &ModelParams,
    omega_grid: &[f64],
    prominence: f64,
    (lo, hi): (f64, f64),
    step: f64,
    tol: f64,
) -> Result<CollapseScan> {
    if !(step > 0.0 && tol > 0.0 && hi >= lo && lo >= 0.0) {
        return Err(Error::InvalidParams("collapse scan needs 0 <= lo <= hi, step, tol > 0".into()));
    }
    let table = LineTable::build(params, manifold_cutoff(hi))?;
    let count = |a: f64| -> Result<usize> {
        Ok(spectrum_from_table(&table, a, omega_grid, prominence)?.peaks.len())
    };
    let mut coarse = Vec::new();
    let n_steps = ((hi - lo) / step).floor() as usize;
    let mut bracket = None;
    for k in 0..=n_steps {
        let a = lo + step * k as f64;
        let c = count(a)?;
        coarse.push((a, c));
        if c <= 1 {
            if k > 0 {
                bracket = Some((a - step, a));
            } else {
                return Ok(CollapseScan {
                    coarse,
                    collapse_point: Some(a),
                });
            }
            break;
        }
    }
    let collapse_point = match bracket {
        None => None,
        Some((mut a, mut b)) => {
            while b - a > tol {
                let m = 0.5 * (a + b);
                if count(m)? <= 1 {
                    b = m;
                } else {
                    a = m;
                }
            }
            Some(b)
        }
    };
    Ok(CollapseScan {
        coarse,
        collapse_point,
    })
}
