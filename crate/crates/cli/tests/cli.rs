use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use femtohom::PumpPulse;
use tempfile::TempDir;

fn femtohom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_femtohom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_config(dir: &Path, toml: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("scenario.toml");
    fs::write(&cfg, toml).unwrap();
    let mut args = vec!["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    femtohom(&args)
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const FILTERED: &str = r#"[crystal]
Dp = 1e-25

[pump]
tau_Di_s = 1.55e-13

[filters]
sigma1_nm = 50
sigma2_nm = 50

[sweep]
axis = "dtau_s"
start = -3e-13
stop = 3e-13
count = 13
method = "numeric"
output = "curve.csv"
"#;

#[test]
fn minimal_config_writes_one_row_per_value() {
    let dir = TempDir::new().unwrap();
    let toml = "[pump]\ntau_Di_s = 1.55e-13\n\n[sweep]\naxis = \"l_mm\"\nvalues = [0.0, 5.0, 10.7777, 15.0]\noutput = \"out.csv\"\n";
    let out = run_config(dir.path(), toml, &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "l_mm,dtau_l_s,rho,Rn,rel_err");
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!((r[2] + r[3] - 1.0).abs() < 1e-15);
    }
    // l = 0 lies outside the dip, the third length sits at its centre.
    assert_eq!(rows[0][2], 0.0);
    assert!((rows[2][2] - 0.3557).abs() < 5e-3);
}

#[test]
fn negative_mismatch_exits_2_with_the_line() {
    let dir = TempDir::new().unwrap();
    let toml = "[crystal]\nlength = 3.0\ninv_v1 = 54.26e-13\ninv_v2 = 56.2e-13\n\n[pump]\ntau_Di_s = 1.55e-13\n\n[sweep]\naxis = \"l_mm\"\nvalues = [1.0]\n";
    let out = run_config(dir.path(), toml, &[]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("line 3"), "{msg}");
    assert!(!dir.path().join("sweep.csv").exists());
}

#[test]
fn malformed_toml_exits_2_with_the_line() {
    let dir = TempDir::new().unwrap();
    let out = run_config(dir.path(), "[pump]\ntau_Di_s = 1.55e-13\nchirp_ai = = 1\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn unknown_preset_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = femtohom(&["--preset", "fig9", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fig2"));
}

#[test]
fn missing_config_file_exits_1() {
    let out = femtohom(&["--config", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missed_tolerance_exits_3_unless_allowed() {
    let dir = TempDir::new().unwrap();
    let strict = ["--quad-order", "8", "--quad-max-refine", "0", "--quad-tol", "1e-15"];
    let out = run_config(dir.path(), FILTERED, &strict);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(!dir.path().join("curve.csv").exists());

    let mut allowed = strict.to_vec();
    allowed.push("--allow-nonconverged");
    let out = run_config(dir.path(), FILTERED, &allowed);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(data_rows(&fs::read_to_string(dir.path().join("curve.csv")).unwrap()).len(), 13);
}

#[test]
fn config_reproduces_a_preset_curve_byte_for_byte() {
    let preset = TempDir::new().unwrap();
    let out = femtohom(&["--preset", "fig4a", "--out", preset.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));

    // Same physics written differently: defaults left implicit, other
    // number formats.
    let toml = "[crystal]\nDp = 3.0E-25\n\n[pump]\ntau_Di_s = 155e-15\n\n[filters]\nsigma1_nm = 50\nsigma2_nm = 50.0\n\n[sweep]\naxis = \"dtau_s\"\nstart = -5e-13\nstop = 0.5e-12\ncount = 101\noutput = \"fig4a_Dp_3e-25.csv\"\n";
    let config = TempDir::new().unwrap();
    let out = run_config(config.path(), toml, &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let a = fs::read(preset.path().join("fig4a_Dp_3e-25.csv")).unwrap();
    let b = fs::read(config.path().join("fig4a_Dp_3e-25.csv")).unwrap();
    assert!(a == b, "preset and config outputs differ");
    assert_eq!(data_rows(&String::from_utf8(a).unwrap()).len(), 101);
}

#[test]
fn thread_count_does_not_change_output() {
    let one = TempDir::new().unwrap();
    let two = TempDir::new().unwrap();
    let a = run_config(one.path(), FILTERED, &["--threads", "1"]);
    let b = run_config(two.path(), FILTERED, &["--threads", "2"]);
    assert!(a.status.success() && b.status.success());
    let a = fs::read(one.path().join("curve.csv")).unwrap();
    let b = fs::read(two.path().join("curve.csv")).unwrap();
    assert!(a == b);
}

#[test]
fn header_embeds_the_resolved_parameters() {
    let dir = TempDir::new().unwrap();
    let out = run_config(dir.path(), FILTERED, &["--quad-tol", "1e-9"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    for line in [
        "# crystal.Dp_s2_per_mm = 1e-25",
        "# crystal.mismatch_D_s_per_mm = 1.94",
        "# pump_input.tau_D_s = 1.55e-13",
        "# pump_output.b_s2 = 6.006",
        "# filters.sigma1_rad_per_s = 1.49",
        "# delay.inv_g1_s_per_mm = 5.181e-12",
        "# quadrature.rel_tol = 1e-9",
        "# sweep.axis = dtau_s",
        "# sweep.count = 13",
        "# method = numeric",
    ] {
        assert!(csv.lines().any(|l| l.starts_with(line)), "missing `{line}`");
    }
}

#[test]
fn duration_sweep_reports_visibility_at_the_dip_centre() {
    let dir = TempDir::new().unwrap();
    let toml = "[pump]\ntau_Di_s = 1.55e-13\n\n[sweep]\naxis = \"tau_Di_s\"\nvalues = [5e-14, 1.55e-13, 1e-12]\n";
    let out = run_config(dir.path(), toml, &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "tau_Di_s,l_mm,dtau_l_s,rho,Rn,V,rel_err"));
    let v: Vec<f64> = data_rows(&csv).iter().map(|r| r[5]).collect();
    assert!(v[0] < v[1] && v[1] < v[2], "{v:?}");
}

#[test]
fn grid_writes_every_cell() {
    let dir = TempDir::new().unwrap();
    let toml = "[crystal]\nDp = 1e-25\n\n[pump]\ntau_Di_s = 1.55e-13\n\n[filters]\nsigma1_nm = 100\nsigma2_nm = 100\n\n[grid]\nt_range = [-8e-13, 4e-13]\ntau_range = [-1e-13, 7e-13]\nn_t = 9\nn_tau = 7\n";
    let out = run_config(dir.path(), toml, &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 63);
    for r in &rows {
        assert!((r[2].hypot(r[3]) - r[4]).abs() <= 1e-12 * r[4].max(1.0));
    }
    assert!(rows.iter().any(|r| r[4] > 0.0));
}

#[test]
fn tabulated_gaussian_spectrum_matches_the_gaussian_pump() {
    let dir = TempDir::new().unwrap();
    let pulse = PumpPulse::new(1.55e-13, 0.0).unwrap();
    let w = (20.0 / pulse.b()).sqrt();
    let n = 1001;
    let mut table = String::from("# Omega_rad_s re im\n");
    for i in 0..n {
        let omega = -w + 2.0 * w * i as f64 / (n - 1) as f64;
        let e = pulse.spectrum(omega);
        table.push_str(&format!("{omega:e} {:e} {:e}\n", e.re, e.im));
    }
    fs::write(dir.path().join("pump.dat"), table).unwrap();

    let body = "[crystal]\nDp = 1e-25\n\n[filters]\nsigma1_nm = 50\nsigma2_nm = 50\n\n[sweep]\naxis = \"dtau_s\"\nvalues = [-2e-13, 0.0, 1e-13]\nmethod = \"autocorr\"\n";
    let tabulated = format!("[pump]\ntau_Di_s = 1.55e-13\nspectrum_file = \"pump.dat\"\n\n{body}output = \"tab.csv\"\n");
    let gaussian = format!("[pump]\ntau_Di_s = 1.55e-13\n\n{body}output = \"gauss.csv\"\n");
    for toml in [&tabulated, &gaussian] {
        let out = run_config(dir.path(), toml, &[]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let a = data_rows(&fs::read_to_string(dir.path().join("tab.csv")).unwrap());
    let b = data_rows(&fs::read_to_string(dir.path().join("gauss.csv")).unwrap());
    for (x, y) in a.iter().zip(&b) {
        assert!((x[2] - y[2]).abs() <= 1e-4, "{} vs {}", x[2], y[2]);
    }
}

#[test]
fn tabulated_spectrum_needs_a_delay_sweep() {
    let dir = TempDir::new().unwrap();
    let toml = "[pump]\ntau_Di_s = 1.55e-13\nspectrum_file = \"pump.dat\"\n\n[sweep]\naxis = \"l_mm\"\nvalues = [1.0]\n";
    let out = run_config(dir.path(), toml, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}
