//! Truncated photon ⊗ trion-excitation Fock space and its operators.
//!
//! Basis states `|n_c, n_t⟩` are ordered photon-major:
//! `index(n_c, n_t) = n_c * n_t_dim + n_t`.
//!
//! The trion excitation is a composite boson built from the Fermi sea of
//! `N_s` electrons. Its lowering operator is not `√n_t`: the matrix elements
//! saturate with filling (see [`coupling_factor`]) and vanish past the Pauli
//! ceiling `n_t = N_s`.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::C64;

/// Unit label carried alongside all energies of a [`ModelParams`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EnergyUnit {
    /// Energies and rates are multiples of the cavity decay rate γ_c.
    #[default]
    Gamma,
    MilliElectronVolt,
}

impl EnergyUnit {
    pub fn label(self) -> &'static str {
        match self {
            EnergyUnit::Gamma => "gamma",
            EnergyUnit::MilliElectronVolt => "meV",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "gamma" | "gamma_c" => Some(EnergyUnit::Gamma),
            "meV" | "mev" => Some(EnergyUnit::MilliElectronVolt),
            _ => None,
        }
    }
}

/// Physical energies and rates of the cavity–trion system (ħ = 1).
///
/// Only the collective Rabi energy Ω is stored; the single trion–photon
/// coupling is derived as `g_c = Ω / √N_s`, so the two can never disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub n_s: usize,
    pub omega_cav: f64,
    pub omega_t: f64,
    pub omega_rabi: f64,
    pub gamma_c: f64,
    pub gamma_t: f64,
    /// Coherent drive amplitude P.
    pub pump: Option<f64>,
    /// Drive frequency ω_p.
    pub omega_p: Option<f64>,
    pub unit: EnergyUnit,
}

impl ModelParams {
    /// Cavity and trion at zero energy (δ = 0), no drive.
    pub fn resonant(n_s: usize, g_c: f64, gamma_c: f64, gamma_t: f64) -> Self {
        Self {
            n_s,
            omega_cav: 0.0,
            omega_t: 0.0,
            omega_rabi: g_c * (n_s as f64).sqrt(),
            gamma_c,
            gamma_t,
            pump: None,
            omega_p: None,
            unit: EnergyUnit::Gamma,
        }
    }

    pub fn g_c(&self) -> f64 {
        self.omega_rabi / (self.n_s as f64).sqrt()
    }

    pub fn set_g_c(&mut self, g_c: f64) {
        self.omega_rabi = g_c * (self.n_s as f64).sqrt();
    }

    /// Changes N_s while keeping the single-trion coupling g_c fixed.
    pub fn set_n_s_fixed_gc(&mut self, n_s: usize) {
        let g_c = self.g_c();
        self.n_s = n_s;
        self.set_g_c(g_c);
    }

    /// Cavity–trion detuning δ = ω_cav − ω_T.
    pub fn delta_ct(&self) -> f64 {
        self.omega_cav - self.omega_t
    }

    /// Pump detuning Δ = ω_cav − ω_p, if a drive frequency is set.
    pub fn pump_detuning(&self) -> Option<f64> {
        self.omega_p.map(|wp| self.omega_cav - wp)
    }

    /// Sets drive amplitude and the drive frequency from Δ = ω_cav − ω_p.
    pub fn with_drive(mut self, pump: f64, pump_detuning: f64) -> Self {
        self.pump = Some(pump);
        self.omega_p = Some(self.omega_cav - pump_detuning);
        self
    }

    pub fn set_pump_detuning(&mut self, pump_detuning: f64) {
        self.omega_p = Some(self.omega_cav - pump_detuning);
    }

    pub fn with_unit(mut self, unit: EnergyUnit) -> Self {
        self.unit = unit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.n_s < 1 {
            return bad("n_s must be at least 1".into());
        }
        let finite = [
            ("omega_cav", self.omega_cav),
            ("omega_t", self.omega_t),
            ("omega_rabi", self.omega_rabi),
            ("gamma_c", self.gamma_c),
            ("gamma_t", self.gamma_t),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return bad(format!("{name} is not finite ({v})"));
            }
        }
        for (name, v) in [("pump", self.pump), ("omega_p", self.omega_p)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return bad(format!("{name} is not finite ({v})"));
                }
            }
        }
        if self.gamma_c < 0.0 || self.gamma_t < 0.0 {
            return bad("decay rates must be non-negative".into());
        }
        if self.omega_rabi < 0.0 {
            return bad("omega_rabi must be non-negative".into());
        }
        Ok(())
    }
}

/// Fock-space cutoffs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Truncation {
    pub n_c_max: usize,
    pub n_t_max: usize,
}

impl Truncation {
    pub const fn new(n_c_max: usize, n_t_max: usize) -> Self {
        Self { n_c_max, n_t_max }
    }

    /// Trion dimension after the Pauli ceiling: `min(n_t_max, N_s) + 1`.
    pub fn trion_dim(&self, n_s: usize) -> usize {
        self.n_t_max.min(n_s) + 1
    }

    pub fn dim(&self, n_s: usize) -> usize {
        (self.n_c_max + 1) * self.trion_dim(n_s)
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Self::new(10, 10)
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n_c_max, self.n_t_max)
    }
}

/// A truncation resolved against a concrete N_s.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Basis {
    pub n_c_max: usize,
    pub n_t_dim: usize,
}

impl Basis {
    pub fn new(trunc: &Truncation, n_s: usize) -> Self {
        Self {
            n_c_max: trunc.n_c_max,
            n_t_dim: trunc.trion_dim(n_s),
        }
    }

    pub fn dim(&self) -> usize {
        (self.n_c_max + 1) * self.n_t_dim
    }

    pub fn index(&self, n_c: usize, n_t: usize) -> usize {
        debug_assert!(n_c <= self.n_c_max && n_t < self.n_t_dim);
        n_c * self.n_t_dim + n_t
    }

    /// Inverse of [`Basis::index`].
    pub fn state(&self, index: usize) -> (usize, usize) {
        (index / self.n_t_dim, index % self.n_t_dim)
    }

    pub fn states(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dim()).map(|i| self.state(i))
    }
}

/// Operator on the truncated product space.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    pub basis: Basis,
    pub matrix: CsrMatrix,
    /// Set by builders whose output is Hermitian by construction.
    pub hermitian: bool,
}

impl SparseOperator {
    pub fn new(basis: Basis, matrix: CsrMatrix) -> Self {
        assert_eq!(matrix.nrows(), basis.dim());
        assert_eq!(matrix.ncols(), basis.dim());
        Self {
            basis,
            matrix,
            hermitian: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix.get(row, col)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis,
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.basis, other.basis);
        Self::new(self.basis, self.matrix.matmul(&other.matrix))
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.matrix.is_hermitian(rel_tol)
    }

    /// Plain-text triplet form: a header `dim n_c_max n_t_dim`, then one
    /// `row col re im` line per stored entry in `(row, col)` order.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.dim(), self.basis.n_c_max, self.basis.n_t_dim)?;
        for (r, c, v) in self.matrix.iter() {
            writeln!(w, "{r} {c} {:e} {:e}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_triplets<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let parse_err = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
        let (hline, header) = loop {
            match lines.next() {
                Some((i, l)) => {
                    let l = l?;
                    if !l.trim().is_empty() {
                        break (i, l);
                    }
                }
                None => return Err(parse_err(0, "missing header".into())),
            }
        };
        let head: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(hline, format!("bad header: {e}")))?;
        let [dim, n_c_max, n_t_dim] = head[..] else {
            return Err(parse_err(hline, "header must be `dim n_c_max n_t_dim`".into()));
        };
        let basis = Basis { n_c_max, n_t_dim };
        if basis.dim() != dim {
            return Err(parse_err(
                hline,
                format!("dim {dim} inconsistent with ({n_c_max} + 1) x {n_t_dim}"),
            ));
        }
        let mut triplets = Vec::new();
        for (i, l) in lines {
            let l = l?;
            if l.trim().is_empty() {
                continue;
            }
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 4 {
                return Err(parse_err(i, "expected `row col re im`".into()));
            }
            let row: usize = toks[0].parse().map_err(|e| parse_err(i, format!("{e}")))?;
            let col: usize = toks[1].parse().map_err(|e| parse_err(i, format!("{e}")))?;
            let re: f64 = toks[2].parse().map_err(|e| parse_err(i, format!("{e}")))?;
            let im: f64 = toks[3].parse().map_err(|e| parse_err(i, format!("{e}")))?;
            if row >= dim || col >= dim {
                return Err(parse_err(i, format!("index ({row}, {col}) out of range")));
            }
            triplets.push((row, col, C64::new(re, im)));
        }
        Ok(Self::new(basis, CsrMatrix::from_triplets(dim, dim, triplets)))
    }
}

/// `C(n, k)` in floating point, or `None` once it exceeds 1e17 (beyond
/// that `1 ± 1/C` rounds to 1 in double precision anyway).
fn binomial(n: usize, k: usize) -> Option<f64> {
    let k = k.min(n - k);
    let mut binom = 1.0f64;
    for i in 0..k {
        binom *= (n - i) as f64 / (i + 1) as f64;
        if binom > 1e17 {
            return None;
        }
    }
    Some(binom)
}

/// Saturable matrix element `⟨n_t − 1| B |n_t⟩` of the trion excitation
/// lowering operator for `N_s` available electrons:
///
/// `f = √(n_t (1 − n_t/(N_s+1)) N_s/(N_s+1)) · (1 − (−1)^{n_t} / C(N_s, n_t))`
///
/// for `1 ≤ n_t ≤ N_s`, and zero otherwise. `f(1, N_s) = 1` for every N_s and
/// `f → √n_t` as `N_s → ∞`.
pub fn coupling_factor(n_t: usize, n_s: usize) -> f64 {
    if n_t == 0 || n_s == 0 || n_t > n_s {
        return 0.0;
    }
    let nt = n_t as f64;
    let ns = n_s as f64;
    // √(n_t (N_s+1−n_t) N_s) / (N_s+1) with integer-valued factors, so that
    // n_t = 1 reduces to N_s (N_s+1) / ((N_s+1) N_s) = 1 without rounding.
    let root = (nt * (ns + 1.0 - nt) * ns).sqrt();
    let sign = if n_t % 2 == 0 { 1.0 } else { -1.0 };
    match binomial(n_s, n_t) {
        Some(c) => root * (c - sign) / ((ns + 1.0) * c),
        None => root / (ns + 1.0),
    }
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Bosonic photon annihilation operator `c`.
pub fn photon_lowering(basis: &Basis) -> SparseOperator {
    let mut t = Vec::new();
    for n_c in 1..=basis.n_c_max {
        for n_t in 0..basis.n_t_dim {
            t.push((
                basis.index(n_c - 1, n_t),
                basis.index(n_c, n_t),
                real((n_c as f64).sqrt()),
            ));
        }
    }
    SparseOperator::new(*basis, CsrMatrix::from_triplets(basis.dim(), basis.dim(), t))
}

/// Deformed trion excitation lowering operator `B` with elements
/// [`coupling_factor`]`(n_t, N_s)`.
pub fn trion_lowering(basis: &Basis, n_s: usize) -> SparseOperator {
    let mut t = Vec::new();
    for n_c in 0..=basis.n_c_max {
        for n_t in 1..basis.n_t_dim {
            let f = coupling_factor(n_t, n_s);
            if f != 0.0 {
                t.push((basis.index(n_c, n_t - 1), basis.index(n_c, n_t), real(f)));
            }
        }
    }
    SparseOperator::new(*basis, CsrMatrix::from_triplets(basis.dim(), basis.dim(), t))
}

fn diagonal(basis: &Basis, f: impl Fn(usize, usize) -> f64) -> SparseOperator {
    let diag: Vec<C64> = basis.states().map(|(c, t)| real(f(c, t))).collect();
    let mut op = SparseOperator::new(*basis, CsrMatrix::from_diagonal(&diag));
    op.hermitian = true;
    op
}

/// `c†c`
pub fn photon_number(basis: &Basis) -> SparseOperator {
    diagonal(basis, |n_c, _| n_c as f64)
}

/// Bare trion excitation number `N̂_T` (entries `n_t`, not `B†B`).
pub fn trion_number(basis: &Basis) -> SparseOperator {
    diagonal(basis, |_, n_t| n_t as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Lab,
    /// Frame rotating at the drive frequency ω_p; includes the drive term.
    Rotating,
}

/// Hamiltonian `ω_cav c†c + ω_T N̂_T + (Ω/2)(B†c + B c†)`.
///
/// In the rotating frame the energies become `Δ = ω_cav − ω_p` and
/// `ω_T − ω_p`, and the drive `P (c + c†)` is added.
pub fn build_hamiltonian(
    params: &ModelParams,
    trunc: &Truncation,
    frame: Frame,
) -> Result<SparseOperator> {
    params.validate()?;
    let basis = Basis::new(trunc, params.n_s);
    let (e_cav, e_t, drive) = match frame {
        Frame::Lab => (params.omega_cav, params.omega_t, 0.0),
        Frame::Rotating => {
            let pump = params.pump.ok_or(Error::MissingDrive("pump"))?;
            let wp = params.omega_p.ok_or(Error::MissingDrive("omega_p"))?;
            (params.omega_cav - wp, params.omega_t - wp, pump)
        }
    };
    let half_rabi = 0.5 * params.omega_rabi;
    let mut t = Vec::new();
    for (i, (n_c, n_t)) in basis.states().enumerate() {
        let e = e_cav * n_c as f64 + e_t * n_t as f64;
        if e != 0.0 {
            t.push((i, i, real(e)));
        }
        if n_c >= 1 {
            // |n_c, n_t⟩ → |n_c − 1, n_t + 1⟩ via B†c
            if n_t + 1 < basis.n_t_dim {
                let m = half_rabi * (n_c as f64).sqrt() * coupling_factor(n_t + 1, params.n_s);
                if m != 0.0 {
                    let j = basis.index(n_c - 1, n_t + 1);
                    t.push((j, i, real(m)));
                    t.push((i, j, real(m)));
                }
            }
            if drive != 0.0 {
                let j = basis.index(n_c - 1, n_t);
                let m = drive * (n_c as f64).sqrt();
                t.push((j, i, real(m)));
                t.push((i, j, real(m)));
            }
        }
    }
    let mut h = SparseOperator::new(basis, CsrMatrix::from_triplets(basis.dim(), basis.dim(), t));
    h.hermitian = true;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn commutator(a: &SparseOperator, b: &SparseOperator) -> CsrMatrix {
        a.matmul(b)
            .matrix
            .add(&b.matmul(a).matrix.scale(real(-1.0)))
    }

    #[test]
    fn coupling_factor_first_excitation_is_unity() {
        for n_s in [1usize, 2, 3, 10, 100, 1000, 10_000] {
            assert!((coupling_factor(1, n_s) - 1.0).abs() < 1e-14, "N_s = {n_s}");
        }
    }

    #[test]
    fn coupling_factor_vanishes_outside_range() {
        assert_eq!(coupling_factor(0, 100), 0.0);
        assert_eq!(coupling_factor(101, 100), 0.0);
        assert_eq!(coupling_factor(2, 1), 0.0);
    }

    #[test]
    fn coupling_factor_near_pauli_ceiling_keeps_binomial() {
        // C(40, 35) = 658008: the correction is small but far from negligible.
        let expect = (35.0f64 * (1.0 - 35.0 / 41.0) * 40.0 / 41.0).sqrt() * (1.0 + 1.0 / 658008.0);
        assert!((coupling_factor(35, 40) - expect).abs() < 1e-15);
        // n_t = N_s even: the bracket is exactly zero.
        assert_eq!(coupling_factor(100, 100), 0.0);
    }

    #[test]
    fn photon_operators() {
        let basis = Basis::new(&Truncation::new(1, 3), 10);
        let c = photon_lowering(&basis);
        for n_t in 0..basis.n_t_dim {
            assert_eq!(c.get(basis.index(0, n_t), basis.index(1, n_t)), real(1.0));
        }
        let basis = Basis::new(&Truncation::new(5, 2), 10);
        let c = photon_lowering(&basis);
        let n = c.adjoint().matmul(&c);
        let diff = n.matrix.to_dense() - photon_number(&basis).matrix.to_dense();
        assert!(diff.norm() < 1e-14);
        let comm = commutator(&c, &c.adjoint());
        for (i, (n_c, _)) in basis.states().enumerate() {
            let expect = if n_c < basis.n_c_max { 1.0 } else { -(basis.n_c_max as f64) };
            assert!((comm.get(i, i).re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn trion_lowering_limits() {
        let basis = Basis::new(&Truncation::new(2, 5), 1);
        assert_eq!(basis.n_t_dim, 2);
        let b = trion_lowering(&basis, 1);
        for n_c in 0..=2 {
            assert_eq!(b.get(basis.index(n_c, 0), basis.index(n_c, 1)), real(1.0));
        }
        assert_eq!(b.matrix.nnz(), 3);

        let basis = Basis::new(&Truncation::new(0, 5), 1_000_000);
        let b = trion_lowering(&basis, 1_000_000);
        for n_t in 1..=5 {
            let v = b.get(basis.index(0, n_t - 1), basis.index(0, n_t)).re;
            let boson = (n_t as f64).sqrt();
            assert!(((v - boson) / boson).abs() < 1e-5);
        }
    }

    #[test]
    fn hamiltonian_uncoupled_is_diagonal() {
        let mut p = ModelParams::resonant(100, 0.0, 1.0, 1.0);
        p.omega_cav = 1.5;
        p.omega_t = 0.7;
        let trunc = Truncation::new(4, 4);
        let h = build_hamiltonian(&p, &trunc, Frame::Lab).unwrap();
        for (r, c, v) in h.matrix.iter() {
            assert_eq!(r, c);
            let (n_c, n_t) = h.basis.state(r);
            assert!((v.re - (1.5 * n_c as f64 + 0.7 * n_t as f64)).abs() < 1e-14);
        }
    }

    #[test]
    fn hamiltonian_offdiagonal_element() {
        let p = ModelParams::resonant(100, 1.3, 1.0, 1.0);
        let trunc = Truncation::new(6, 6);
        let h = build_hamiltonian(&p, &trunc, Frame::Lab).unwrap();
        let basis = h.basis;
        for n_c in 1..=6 {
            for n_t in 1..=6 {
                let v = h.get(basis.index(n_c - 1, n_t), basis.index(n_c, n_t - 1)).re;
                let expect = 0.5 * p.omega_rabi * (n_c as f64).sqrt() * coupling_factor(n_t, 100);
                assert!((v - expect).abs() <= 1e-14 * expect.abs().max(1.0));
            }
        }
        assert!(h.is_hermitian(1e-12));
    }

    #[test]
    fn rotating_frame_needs_drive() {
        let p = ModelParams::resonant(10, 1.0, 1.0, 1.0);
        let err = build_hamiltonian(&p, &Truncation::new(2, 2), Frame::Rotating).unwrap_err();
        assert!(matches!(err, Error::MissingDrive("pump")));
        let mut p = p;
        p.pump = Some(0.5);
        let err = build_hamiltonian(&p, &Truncation::new(2, 2), Frame::Rotating).unwrap_err();
        assert!(matches!(err, Error::MissingDrive("omega_p")));
    }

    #[test]
    fn coupling_conserves_excitations_in_interior() {
        let p = ModelParams::resonant(7, 0.9, 1.0, 1.0);
        let trunc = Truncation::new(5, 5);
        let basis = Basis::new(&trunc, p.n_s);
        let h = build_hamiltonian(&p, &trunc, Frame::Lab).unwrap();
        let n_tot = SparseOperator::new(
            basis,
            photon_number(&basis).matrix.add(&trion_number(&basis).matrix),
        );
        let comm = commutator(&h, &n_tot).to_dense();
        for (r, (rc, rt)) in basis.states().enumerate() {
            for (c, (cc, ct)) in basis.states().enumerate() {
                let interior = rc < 5 && cc < 5 && rt < 5 && ct < 5;
                if interior {
                    assert!(comm[(r, c)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn triplet_roundtrip() {
        let p = ModelParams::resonant(3, 1.1, 1.0, 1.0).with_drive(0.5, 0.25);
        let h = build_hamiltonian(&p, &Truncation::new(3, 4), Frame::Rotating).unwrap();
        let mut buf = Vec::new();
        h.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("16 3 4\n"));
        let back = SparseOperator::read_triplets(&buf[..]).unwrap();
        assert_eq!(back.matrix, h.matrix);
        assert_eq!(back.basis, h.basis);
    }

    #[test]
    fn triplet_reader_rejects_bad_input() {
        assert!(SparseOperator::read_triplets(&b"4 1 3\n"[..]).is_err());
        assert!(SparseOperator::read_triplets(&b"4 1 2\n0 9 1 0\n"[..]).is_err());
        assert!(SparseOperator::read_triplets(&b"4 1 2\n0 1 x 0\n"[..]).is_err());
    }
}
