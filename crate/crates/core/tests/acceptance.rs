//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use trion_polariton::fockspace::{build_hamiltonian, Frame};
use trion_polariton::lindblad::{
    g2_zero, model_liouvillian, n_cav, solve_driven, steady_state, DensityMatrix, SolveOptions,
    SteadyOptions, StepOptions,
};
use trion_polariton::manifold::{find_collapse, linspace, transition_spectrum, DEFAULT_PROMINENCE};
use trion_polariton::materials::{chi_t, derive_model_params, g0_mev, g_c_mev, n_s_from_density, MaterialParams};
use trion_polariton::sweep::{minimize_g2, run_scan, MinimizeOptions, ScanAxis, ScanSpec, Window};
use trion_polariton::{photon_lowering, trion_lowering, Basis, EnergyUnit, ModelParams, Truncation, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Check = fn() -> Result<Outcome, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn blockade_params(n_s: usize, g_c: f64) -> ModelParams {
    ModelParams::resonant(n_s, g_c, 1.0, 1.0).with_drive(0.5, 0.0)
}

fn at_delta(base: &ModelParams, delta: f64) -> ModelParams {
    let mut p = base.clone();
    p.set_pump_detuning(delta);
    p
}

/// Position of the first interior local maximum, refined by a parabola
/// through the three samples around it.
fn first_maximum(t: &[f64], y: &[f64]) -> Option<f64> {
    (1..y.len() - 1).find(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1]).map(|i| {
        let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
        let h = t[i + 1] - t[i];
        let denom = a - 2.0 * b + c;
        if denom == 0.0 {
            t[i]
        } else {
            t[i] + 0.5 * h * (a - c) / denom
        }
    })
}

fn criterion_1() -> Result<Outcome, String> {
    // Jaynes–Cummings limit: ⟨N_C−1, 1|H|N_C, 0⟩ = (g_c/2)·√N_C.
    let g_c = 0.7;
    let mut p = ModelParams::resonant(1, g_c, 1.0, 1.0);
    p.omega_cav = 1.3;
    p.omega_t = 0.9;
    let trunc = Truncation::new(10, 3);
    let h = build_hamiltonian(&p, &trunc, Frame::Lab).map_err(err)?;
    let basis = h.basis;
    let mut worst_jc: f64 = 0.0;
    for n_c in 1..=10usize {
        let expected = g_c / 2.0 * (n_c as f64).sqrt();
        let got = h.get(basis.index(n_c - 1, 1), basis.index(n_c, 0)).re;
        worst_jc = worst_jc.max((got - expected).abs() / expected);
    }
    let big = Basis::new(&Truncation::new(0, 5), 1_000_000);
    let b = trion_lowering(&big, 1_000_000);
    let mut worst_bos: f64 = 0.0;
    for n_t in 1..=5usize {
        let got = b.get(big.index(0, n_t - 1), big.index(0, n_t)).re;
        let expected = (n_t as f64).sqrt();
        worst_bos = worst_bos.max((got - expected).abs() / expected);
    }
    let pass = worst_jc <= 2.0 * f64::EPSILON && worst_bos < 1e-5;
    Ok(outcome(pass, format!("JC rel err {worst_jc:.1e} (<= 2 eps), bosonic rel err {worst_bos:.1e} (< 1e-5)")))
}

fn criterion_2() -> Result<Outcome, String> {
    let rabi = 1.0;
    let grid = linspace(-2.0, 2.0, 801);
    let step = grid[1] - grid[0];
    let mut details = Vec::new();
    let mut pass = step <= rabi / 200.0;
    for n_s in [1usize, 10, 100] {
        let mut p = ModelParams::resonant(n_s, 0.0, 0.05, 0.05);
        p.omega_rabi = rabi;
        let s = transition_spectrum(1e-6, &p, &grid).map_err(err)?;
        let ok = s.peaks.len() == 2 && ((s.peaks[1].omega - s.peaks[0].omega) - rabi).abs() <= step;
        pass &= ok;
        let split = if s.peaks.len() == 2 { s.peaks[1].omega - s.peaks[0].omega } else { f64::NAN };
        details.push(format!("N_s={n_s}: {} peaks, split {split:.4}", s.peaks.len()));
    }
    Ok(outcome(pass, format!("{} (grid step {step})", details.join("; "))))
}

fn collapse_point(gamma: f64) -> Result<f64, String> {
    let mut p = ModelParams::resonant(100, 0.0, gamma, gamma);
    p.omega_rabi = 1.0;
    let grid = linspace(-4.0, 4.0, 3201);
    let scan = find_collapse(&p, &grid, DEFAULT_PROMINENCE, (1.0, 250.0), 5.0, 0.05).map_err(err)?;
    if scan.coarse.first().map(|c| c.1) != Some(2) {
        return Err(format!("γ/Ω={gamma}: low-intensity spectrum is not a doublet"));
    }
    scan.collapse_point.ok_or_else(|| format!("γ/Ω={gamma}: no collapse up to |α|²=250"))
}

fn criterion_3() -> Result<Outcome, String> {
    let mid = collapse_point(0.05)?;
    let wide = collapse_point(0.1)?;
    let narrow = collapse_point(0.02)?;
    let pass = (50.0..=200.0).contains(&mid) && wide < narrow;
    Ok(outcome(
        pass,
        format!("collapse |α|² = {mid:.2} at γ/Ω=0.05 (in [50, 200]); {wide:.2} at 0.1 < {narrow:.2} at 0.02"),
    ))
}

fn criterion_4() -> Result<Outcome, String> {
    let trunc = Truncation::default();
    let solve = SolveOptions::default();
    let opts = MinimizeOptions::default();
    let strong = minimize_g2(&blockade_params(100, 1.2), Window::Unconventional, &trunc, &solve, &opts).map_err(err)?;
    let weak = minimize_g2(&blockade_params(100, 0.8), Window::Unconventional, &trunc, &solve, &opts).map_err(err)?;
    let shift = (strong.delta_opt - weak.delta_opt).abs();
    let g2_ok = strong.g2_min <= 0.2;
    let n_ok = (1e-4..=1e-2).contains(&strong.n_cav);
    let pass = g2_ok && n_ok && shift < 0.5;
    Ok(outcome(
        pass,
        format!(
            "g_c=1.2: g2_min {:.4} (<= 0.2) at Δ={:.4}, n_cav {:.3e} (in [1e-4, 1e-2]); Δ_opt shift 0.8→1.2 = {shift:.4} (< 0.5)",
            strong.g2_min, strong.delta_opt, strong.n_cav
        ),
    ))
}

fn criterion_5() -> Result<Outcome, String> {
    let trunc = Truncation::default();
    let solve = SolveOptions::default();
    let base = blockade_params(100, 120.0);
    let m = minimize_g2(&base, Window::Conventional, &trunc, &solve, &MinimizeOptions::default()).map_err(err)?;
    let g = |d: f64| solve_driven(&at_delta(&base, d), &trunc, &solve).map(|s| s.g2_zero).map_err(err);
    let (above, below) = (g(m.delta_opt + 20.0)?, g(m.delta_opt - 20.0)?);
    // Dip depth measured from the coherent level g² = 1.
    let depth = 1.0 - m.g2_min;
    let asym = (above - below).abs();
    let pass = (m.delta_opt - 600.0).abs() <= 60.0 && (0.01..=0.5).contains(&m.n_cav) && asym > 0.1 * depth;
    Ok(outcome(
        pass,
        format!(
            "Δ_opt {:.3} (600 ± 60), g2_min {:.4}, n_cav {:.4} (in [0.01, 0.5]); g2(Δ±20) = {above:.4}/{below:.4}, asymmetry {asym:.4} (> {:.4})",
            m.delta_opt,
            m.g2_min,
            m.n_cav,
            0.1 * depth
        ),
    ))
}

fn revival(n_s: usize) -> Result<f64, String> {
    let trunc = Truncation::default();
    let solve = SolveOptions::default();
    let base = blockade_params(n_s, 1.2);
    let m = minimize_g2(&base, Window::Unconventional, &trunc, &solve, &MinimizeOptions::default()).map_err(err)?;
    let s = solve_driven(&at_delta(&base, m.delta_opt), &m.truncation, &solve).map_err(err)?;
    let taus = linspace(0.0, 3.0, 601);
    let g = s.g2_tau(&taus, &StepOptions::default()).map_err(err)?;
    first_maximum(&taus, &g.g2_tau).ok_or_else(|| format!("N_s={n_s}: g2(τ) has no local maximum"))
}

fn criterion_6() -> Result<Outcome, String> {
    let t25 = revival(25)?;
    let t100 = revival(100)?;
    let ratio = t25 / t100;

    let trunc = Truncation::default();
    let solve = SolveOptions::default();
    let base = blockade_params(100, 120.0);
    let m = minimize_g2(&base, Window::Conventional, &trunc, &solve, &MinimizeOptions::default()).map_err(err)?;
    let s = solve_driven(&at_delta(&base, m.delta_opt), &m.truncation, &solve).map_err(err)?;
    let taus = linspace(0.0, 2.0, 2001);
    let g = s.g2_tau(&taus, &StepOptions::default()).map_err(err)?.g2_tau;
    // Largest drop anywhere along the curve; zero for a monotone curve.
    let mut running_max = f64::NEG_INFINITY;
    let mut drop: f64 = 0.0;
    for &v in &g[1..] {
        running_max = running_max.max(v);
        drop = drop.max(running_max - v);
    }
    let rising = g[g.len() - 1] > g[1];
    let pass = (ratio - 2.0).abs() <= 0.2 && drop <= 0.01 && rising;
    Ok(outcome(
        pass,
        format!(
            "first revival τ = {t25:.4}/γ (N_s=25), {t100:.4}/γ (N_s=100), ratio {ratio:.4} (2 ± 0.2); conventional max drop {drop:.2e} (<= 0.01), g2 {:.4} → {:.4}",
            g[1],
            g[g.len() - 1]
        ),
    ))
}

fn criterion_7() -> Result<Outcome, String> {
    let chi = chi_t(0.87, 2.54).map_err(err)?;
    let bare = MaterialParams {
        xi: 1.0,
        ..MaterialParams::mose2()
    };
    let g0 = g0_mev(&bare).map_err(err)?;
    let g_c = g_c_mev(&MaterialParams::mose2()).map_err(err)?;
    let n_s = n_s_from_density(1e10, 1.0).map_err(err)?;
    let pass = (chi - 7.35).abs() <= 0.01
        && (g0 - 0.058).abs() <= 0.02 * 0.058
        && (g_c - 0.256).abs() <= 0.02 * 0.256
        && n_s == 100;
    Ok(outcome(
        pass,
        format!("χ_T {chi:.4} (7.35 ± 0.01), g0 {g0:.5} meV (0.058 ± 2%), g_c {g_c:.5} meV (0.256 ± 2%), N_s {n_s}"),
    ))
}

fn criterion_8() -> Result<Outcome, String> {
    let trunc = Truncation::default();
    let solve = SolveOptions::default();
    let opts = MinimizeOptions::default();
    let gamma_c = 0.05;
    let base = derive_model_params(&MaterialParams::mose2(), gamma_c, 0.26).map_err(err)?;
    let target_n = 1.3e-4;
    let mut best: Option<(f64, f64, f64, f64)> = None;
    let mut rows = Vec::new();
    for p_rel in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let mut p = base.clone().with_drive(p_rel * gamma_c, 0.0);
        p.unit = EnergyUnit::MilliElectronVolt;
        let m = minimize_g2(&p, Window::Both, &trunc, &solve, &opts).map_err(err)?;
        rows.push(format!("P={p_rel}γ_c: g2 {:.4}, n {:.2e}", m.g2_min, m.n_cav));
        let ok = m.g2_min <= 0.15 && m.n_cav >= target_n / 10.0 && m.n_cav <= target_n * 10.0;
        if ok && best.is_none_or(|b| m.g2_min < b.1) {
            best = Some((p_rel, m.g2_min, m.n_cav, m.delta_opt));
        }
    }

    let gamma = 0.01;
    let improved = ModelParams::resonant(100, 0.426, gamma, gamma).with_unit(EnergyUnit::MilliElectronVolt);
    let mut improved_best = f64::INFINITY;
    for p_rel in [0.1, 0.5, 1.0] {
        let p = improved.clone().with_drive(p_rel * gamma, 0.0);
        let m = minimize_g2(&p, Window::Conventional, &trunc, &solve, &opts).map_err(err)?;
        rows.push(format!("improved P={p_rel}γ: g2 {:.4}", m.g2_min));
        improved_best = improved_best.min(m.g2_min);
    }
    let pass = best.is_some() && improved_best <= 0.15;
    let head = match best {
        Some((pr, g, n, d)) => format!("MoSe2 pass at P={pr}γ_c: g2 {g:.4}, n_cav {n:.2e}, Δ {d:.4} meV"),
        None => "MoSe2: no P with g2 <= 0.15 and n_cav within x10 of 1.3e-4".into(),
    };
    Ok(outcome(
        pass,
        format!("{head}; improved conventional g2 {improved_best:.4} (<= 0.15) [{}]", rows.join("; ")),
    ))
}

fn criterion_9() -> Result<Outcome, String> {
    let mut notes = Vec::new();
    let mut pass = true;

    // Trace preservation on pseudo-random Hermitian inputs.
    let p = blockade_params(50, 1.2);
    let l = model_liouvillian(&at_delta(&p, 0.3), &Truncation::new(4, 4)).map_err(err)?;
    let d = l.dim_rho;
    let mut seed = 0x2545_f491_4f6c_dd1du64;
    let mut next = move || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut worst_trace: f64 = 0.0;
    for _ in 0..100 {
        let m = DMatrix::from_fn(d, d, |_, _| C64::new(next(), next()));
        let rho = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        worst_trace = worst_trace.max(l.apply(&rho).trace().norm() / rho.norm());
    }
    pass &= worst_trace <= 1e-10;
    notes.push(format!("trace {worst_trace:.1e}"));

    // Steady-state validity at the blockade point.
    let s = solve_driven(&at_delta(&p, 0.29), &Truncation::default(), &SolveOptions::default()).map_err(err)?;
    let rho = &s.steady.rho;
    let valid = rho.validate().is_ok();
    pass &= valid;
    notes.push(format!(
        "ρ_ss herm {:.1e} trace-1 {:.1e} min eig {:.1e}",
        rho.hermiticity_error(),
        (rho.trace().re - 1.0).abs(),
        rho.min_eigenvalue()
    ));

    // Driven empty cavity.
    let (pump, delta, gamma) = (0.1, 0.8, 1.0);
    let mut empty = ModelParams::resonant(10, 0.0, gamma, gamma).with_drive(pump, delta);
    empty.omega_rabi = 0.0;
    let trunc = Truncation::new(10, 1);
    let ss = steady_state(&model_liouvillian(&empty, &trunc).map_err(err)?, &SteadyOptions::default()).map_err(err)?;
    let c = photon_lowering(&Basis::new(&trunc, 10));
    let analytic = pump * pump / (delta * delta + gamma * gamma / 4.0);
    let rel = (n_cav(&ss.rho, &c) - analytic).abs() / analytic;
    let g2 = g2_zero(&ss.rho, &c).map_err(err)?;
    pass &= rel <= 1e-8 && (g2 - 1.0).abs() <= 1e-6;
    notes.push(format!("analytic n rel {rel:.1e}, Ω=0 g2-1 {:.1e}", g2 - 1.0));

    // Long-delay decorrelation.
    let g = s.g2_tau(&[30.0], &StepOptions::default()).map_err(err)?;
    let late = g.g2_tau[0];
    pass &= (late - 1.0).abs() <= 0.02;
    notes.push(format!("g2(30/γ) {late:.5}"));

    // Deterministic scan output.
    let mut spec = ScanSpec::new(ScanAxis::Delta, linspace(-1.0, 1.0, 5), p.clone());
    spec.truncation = Truncation::new(6, 6);
    let render = || -> Result<Vec<u8>, String> {
        let mut out = Vec::new();
        run_scan(&spec).map_err(err)?.write_csv(&mut out).map_err(err)?;
        Ok(out)
    };
    let same = render()? == render()?;
    pass &= same;
    notes.push(format!("byte-identical rerun {same}"));
    // A fresh state from the public constructor stays valid.
    pass &= DensityMatrix::vacuum(d).validate().is_ok();

    Ok(outcome(pass, notes.join(", ")))
}

fn main() {
    let criteria: [(u32, &str, Option<u64>, Check); 9] = [
        (1, "coupling limits", Some(1), criterion_1),
        (2, "vacuum Rabi doublet", Some(1), criterion_2),
        (3, "strong-coupling collapse", Some(30), criterion_3),
        (4, "unconventional blockade", Some(120), criterion_4),
        (5, "conventional blockade", Some(120), criterion_5),
        (6, "g2(tau) structure", Some(300), criterion_6),
        (7, "materials pipeline", Some(1), criterion_7),
        (8, "MoSe2 end-to-end", None, criterion_8),
        (9, "property suite", None, criterion_9),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let (mut pass, mut detail) = match result {
            Ok(Ok(o)) => (o.pass, o.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".into()),
        };
        if let Some(secs) = limit {
            if elapsed > Duration::from_secs(secs) {
                pass = false;
                detail.push_str(&format!("; runtime over {secs} s"));
            }
        }
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id} ({name}) [{:.2} s]: {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
