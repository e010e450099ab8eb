use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use trion_polariton::lindblad::{solve_driven, summary_line, SUMMARY_HEADER};
use trion_polariton::manifold::{linspace, manifold_cutoff, spectrum_from_table, write_peak_track, LineTable};
use trion_polariton::materials::summarize;
use trion_polariton::sweep::{run_scan, ScanAxis, ScanSpec, Window};

use crate::config::{RunConfig, ScanSection};
use crate::CliError;

fn output_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Output {
        path: dir.clone(),
        source,
    })?;
    Ok(dir)
}

fn write_file<F>(dir: &Path, cfg: &RunConfig, name: &str, body: F) -> Result<PathBuf, CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let path = dir.join(format!("{}{name}", cfg.output.prefix));
    let io = |source| CliError::Output {
        path: path.clone(),
        source,
    };
    let mut w = BufWriter::new(File::create(&path).map_err(io)?);
    body(&mut w).and_then(|_| w.flush()).map_err(io)?;
    Ok(path)
}

pub fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let s = &cfg.spectrum;
    if s.alpha_sq.is_empty() {
        return Err(CliError::Config("spectrum needs at least one |alpha|^2".into()));
    }
    if let Some(bad) = s.alpha_sq.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
        return Err(CliError::Config(format!("|alpha|^2 = {bad} must be >= 0")));
    }
    let params = cfg.model_params()?;
    // Grid bounds are in units of Ω; fall back to the linewidth without coupling.
    let scale = if params.omega_rabi > 0.0 {
        params.omega_rabi
    } else {
        params.gamma_c + params.gamma_t
    };
    let grid = linspace(
        params.omega_cav + s.omega_min * scale,
        params.omega_cav + s.omega_max * scale,
        s.points,
    );
    let max_alpha = s.alpha_sq.iter().cloned().fold(0.0, f64::max);
    let table = LineTable::build(&params, manifold_cutoff(max_alpha))?;
    let dir = output_dir(cfg)?;
    let mut results = Vec::with_capacity(s.alpha_sq.len());
    for &a in &s.alpha_sq {
        let spec = spectrum_from_table(&table, a, &grid, s.prominence)?;
        let path = write_file(&dir, cfg, &format!("spectrum_alpha{a}.csv"), |w| spec.write_csv(w))?;
        println!("|alpha|^2 = {a}: {} peak(s) -> {}", spec.peaks.len(), path.display());
        results.push((a, spec));
    }
    let track: Vec<_> = results.iter().map(|(a, s)| (*a, s)).collect();
    let path = write_file(&dir, cfg, "peaks.csv", |w| write_peak_track(w, &track))?;
    println!("peak track -> {}", path.display());
    Ok(())
}

pub fn scan(cfg: &RunConfig, section: &ScanSection, name: &str) -> Result<(), CliError> {
    let axis = ScanAxis::parse(&section.axis).expect("validated in config");
    if section.points == 0 {
        return Err(CliError::Config(format!("[{name}] points must be positive")));
    }
    let mut spec = ScanSpec::new(axis, linspace(section.start, section.stop, section.points), cfg.model_params()?);
    spec.truncation = cfg.truncation();
    spec.solve = cfg.solve_options();
    spec.min_opts = cfg.minimize_options();
    spec.minimize = section.window.as_deref().map(|w| Window::parse(w).expect("validated in config"));
    let result = run_scan(&spec)?;
    let dir = output_dir(cfg)?;
    let csv = write_file(&dir, cfg, &format!("{name}.csv"), |w| result.write_csv(w))?;
    let manifest = write_file(&dir, cfg, &format!("{name}_manifest.txt"), |w| result.write_manifest(w))?;
    println!("{} rows -> {}", result.rows.len(), csv.display());
    println!("manifest -> {}", manifest.display());
    let failed: Vec<_> = result.rows.iter().filter(|r| r.status != "ok").collect();
    if failed.is_empty() {
        return Ok(());
    }
    for r in &failed {
        eprintln!("{} = {}: {}", section.axis, r.axis_value, r.message.as_deref().unwrap_or(r.status));
    }
    let status = if failed.iter().any(|r| r.status == "truncation") {
        "truncation"
    } else {
        failed[0].status
    };
    Err(CliError::Rows {
        failed: failed.len(),
        total: result.rows.len(),
        status,
    })
}

pub fn g2tau(cfg: &RunConfig) -> Result<(), CliError> {
    let t = &cfg.g2tau;
    if !(t.tau_max > 0.0) || t.points < 2 {
        return Err(CliError::Config("[g2tau] needs tau_max > 0 and at least 2 points".into()));
    }
    let params = cfg.model_params()?;
    let sol = solve_driven(&params, &cfg.truncation(), &cfg.solve_options())?;
    let g = sol.g2_tau(&linspace(0.0, t.tau_max, t.points), &cfg.step_options())?;
    let dir = output_dir(cfg)?;
    let path = write_file(&dir, cfg, "g2tau.csv", |w| g.write_csv(w))?;
    println!("{SUMMARY_HEADER}");
    println!("{}", summary_line(&params, sol.n_cav, sol.g2_zero));
    println!("g2(tau) -> {}", path.display());
    Ok(())
}

pub fn materials(cfg: &RunConfig) -> Result<(), CliError> {
    let section = cfg.materials.clone().unwrap_or_default();
    let s = summarize(&section.material_params())?;
    let rows = [
        ("g0", format!("{:.6}", s.g0), "meV"),
        ("chi_T", format!("{:.6}", s.chi_t), ""),
        ("g_c", format!("{:.6}", s.g_c), "meV"),
        ("Omega", format!("{:.6}", s.omega_rabi), "meV"),
        ("N_s", s.n_s.to_string(), ""),
        ("omega_L - omega_cav", format!("{:.6}", s.lower_polariton_offset), "meV"),
    ];
    for (k, v, unit) in rows {
        println!("{k:<20} {v:>14} {unit}");
    }
    println!();
    println!("g0_meV,chi_t,g_c_meV,omega_rabi_meV,n_s,omega_l_offset_meV");
    println!(
        "{},{},{},{},{},{}",
        s.g0, s.chi_t, s.g_c, s.omega_rabi, s.n_s, s.lower_polariton_offset
    );
    Ok(())
}
