use std::path::Path;
use std::process::{Command, Output};

fn trionpol(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trionpol"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: &str = "\
[model]
n_s = 25
g_c = 1.0

[truncation]
n_c_max = 5
n_t_max = 5

[g2scan]
axis = \"delta\"
start = -1.0
stop = 1.0
points = 5

[g2tau]
tau_max = 2.0
points = 21
";

#[test]
fn dumped_config_reproduces_itself() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let first = trionpol(dir.path(), &["--config", &cfg, "--dump-config"]);
    assert!(first.status.success());
    let again = write_config(dir.path(), &stdout(&first));
    let second = trionpol(dir.path(), &["--config", &again, "--dump-config"]);
    assert_eq!(stdout(&first), stdout(&second));
    assert!(stdout(&first).contains("g_c = 1.0"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let both = write_config(dir.path(), "[model]\n[materials]\n");
    assert_eq!(trionpol(dir.path(), &["--config", &both, "g2scan"]).status.code(), Some(2));
    let typo = write_config(dir.path(), "[model]\nn_s = -3\n");
    let o = trionpol(dir.path(), &["--config", &typo, "g2scan"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let bad_model = write_config(dir.path(), "[model]\ngamma_c = -1.0\n");
    assert_eq!(trionpol(dir.path(), &["--config", &bad_model, "g2tau"]).status.code(), Some(2));
    assert_eq!(trionpol(dir.path(), &["--config", "missing.toml", "materials"]).status.code(), Some(2));
    assert_eq!(trionpol(dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn materials_reports_mose2_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let o = trionpol(dir.path(), &["materials"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().last().unwrap();
    let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields.len(), 6);
    assert!((fields[1] - 7.345).abs() < 1e-3, "{row}");
    assert_eq!(fields[4], 100.0);
}

#[test]
fn spectrum_writes_one_file_per_pulse_and_a_peak_track() {
    let dir = tempfile::tempdir().unwrap();
    // The default ±4Ω grid is too narrow for the manifolds reached at |α|² = 4.
    let narrow = write_config(dir.path(), "[model]\nn_s = 10\ng_c = 1.0\n\n[spectrum]\npoints = 201\n");
    let o = trionpol(dir.path(), &["--config", &narrow, "spectrum", "--alpha-sq", "1,4"]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(
        dir.path(),
        "[model]\nn_s = 10\ng_c = 1.0\n\n[spectrum]\npoints = 201\nomega_min = -6.0\nomega_max = 6.0\n",
    );
    let o = trionpol(dir.path(), &["--config", &cfg, "spectrum", "--alpha-sq", "1,4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["spectrum_alpha1.csv", "spectrum_alpha4.csv", "peaks.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.lines().count() > 1, "{name}");
    }
    let lines = std::fs::read_to_string(dir.path().join("spectrum_alpha1.csv")).unwrap();
    assert_eq!(lines.lines().count(), 202);
}

#[test]
fn g2scan_and_g2tau_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = trionpol(dir.path(), &["--config", &cfg, "--threads", "1", "g2scan"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("g2scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(dir.path().join("g2scan_manifest.txt").exists());

    let o = trionpol(dir.path(), &["--config", &cfg, "g2tau", "--points", "11"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("g2tau.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(stdout(&o).lines().count() >= 2);
}

#[test]
fn truncation_failures_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nn_s = 25\ng_c = 1.0\npump = 3.0\n\n[truncation]\nn_c_max = 2\nn_t_max = 2\n\n\
         [solver]\nmax_enlargements = 0\n\n[g2scan]\nstart = 0.0\nstop = 0.0\npoints = 1\n",
    );
    let o = trionpol(dir.path(), &["--config", &cfg, "g2scan"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("g2scan.csv").exists());
}
