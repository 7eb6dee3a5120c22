use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const GYPSUM: &str = "d_m = 0.153e-9\na_m = 0.8e-9\nv_s_mps = 4570\nT_K = 300\nN = 1e23\n";

fn pairdeco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairdeco"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn value(text: &str, name: &str) -> String {
    text.lines()
        .find(|l| l.starts_with(&format!("{name},")))
        .unwrap_or_else(|| panic!("no row {name}"))
        .split(',')
        .nth(1)
        .unwrap()
        .to_string()
}

fn near(x: f64, target: f64, rel: f64) -> bool {
    (x / target - 1.0).abs() <= rel
}

#[test]
fn constants_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "g.cfg", GYPSUM);
    let out = pairdeco(&["constants", "--config", s(&cfg)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let v = |n| value(&text, n).parse::<f64>().unwrap();
    assert!(near(v("Omega0"), -210.7e3, 0.005));
    assert!(near(v("nu0"), 16.8e3, 0.01));
    assert!(near(v("nu_D"), 1.2e-5, 0.01));
    assert!(near(v("tau_gamma"), 1926.0, 0.01));
    assert!(near(v("tau_gamma_min"), 214.0, 0.01));
    assert!(near(v("tau_X"), 165e-6, 0.02));
    assert!(near(v("tau_X_hat_echo"), 110e-6, 0.02));
    assert!(near(v("sigma_X"), 5.68e7, 0.01));
}

#[test]
fn constants_to_file_and_magic_angle() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "m.cfg",
        &format!("{GYPSUM}theta_rad = 0.9553166181245093\n"),
    );
    let target = dir.path().join("c.csv");
    let out = pairdeco(&["constants", "--config", s(&cfg), "--out", s(&target)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert_eq!(value(&text, "tau_X"), "inf");
    assert_eq!(value(&text, "tau_gamma"), "inf");
}

#[test]
fn usage_errors_exit_one() {
    let out = pairdeco(&["constants"]);
    assert_eq!(out.status.code(), Some(1));
    let out = pairdeco(&["constants", "--config", "/nonexistent/g.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nonexistent"));
    assert_eq!(pairdeco(&[]).status.code(), Some(1));
    assert_eq!(pairdeco(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(pairdeco(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.cfg", &GYPSUM.replace("0.153e-9", "0.9e-9"));
    let out = pairdeco(&["constants", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("d < a violated"));
}

#[test]
fn free_evolution_curve() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "g.cfg", GYPSUM);
    let out = pairdeco(&["evolve", "--config", s(&cfg), "--grid", "0:2e-4:41"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 33);
    assert_eq!(header[0], "t_s");
    let col = header.iter().position(|h| *h == "re_Tp_T0").unwrap();
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 41);
    let amp: f64 = rows[0][col].parse().unwrap();
    for row in &rows {
        let t: f64 = row[0].parse().unwrap();
        let got: f64 = row[col].parse().unwrap();
        // ν̂₀ = 3|ν₀| and τ̂_X = τ_X/3 at gypsum defaults.
        let expected = amp
            * (2.0 * std::f64::consts::PI * 50.3075e3 * t).cos()
            * (-(t / 54.9845e-6).powi(2)).exp();
        assert!(
            (got - expected).abs() <= 1e-4 * amp.abs(),
            "t = {t}: {got} vs {expected}"
        );
    }
}

#[test]
fn echo_has_no_oscillation() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "g.cfg", GYPSUM);
    let out = pairdeco(&[
        "evolve",
        "--config",
        s(&cfg),
        "--grid",
        "0:4e-4:81",
        "--mode",
        "me",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let rows = csv_rows(&text);
    for col in 1..33 {
        let series: Vec<f64> = rows
            .iter()
            .map(|r| r[col].parse::<f64>().unwrap())
            .collect();
        for w in series.windows(2) {
            assert!(w[1].abs() <= w[0].abs());
            assert!(w[0] == 0.0 || w[1] * w[0] >= 0.0);
        }
    }
}

#[test]
fn single_time_echoes_initial_matrix() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "g.cfg", GYPSUM);
    for mode in ["free", "me"] {
        let out = pairdeco(&[
            "evolve",
            "--config",
            s(&cfg),
            "--grid",
            "0:0:1",
            "--mode",
            mode,
        ]);
        let rows = csv_rows(&stdout(&out));
        assert_eq!(rows.len(), 1);
        // Tp,T0 and T0,Tp carry −(ħω₀/k_BT)/√2, the rest vanish.
        let nonzero: Vec<usize> = (1..33)
            .filter(|&c| rows[0][c].parse::<f64>().unwrap() != 0.0)
            .collect();
        assert_eq!(nonzero, vec![3, 9, 13, 19]);
    }
}

#[test]
fn exact_path_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "g.cfg", GYPSUM);
    for mode in ["free", "me"] {
        let out = pairdeco(&[
            "evolve",
            "--config",
            s(&cfg),
            "--grid",
            "0:1e-4:5",
            "--mode",
            mode,
            "--exact-path",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
}

#[test]
fn bad_grids() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "g.cfg", GYPSUM);
    for grid in ["1:0:3", "0:1", "0:1:0", "a:1:2", "0:1:1", "-1:1:3"] {
        let out = pairdeco(&["evolve", "--config", s(&cfg), "--grid", grid]);
        assert_eq!(out.status.code(), Some(1), "grid {grid}");
    }
}

#[test]
fn sweep_corners() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "g.cfg", GYPSUM);
    let out = pairdeco(&[
        "sweep",
        "--config",
        s(&cfg),
        "--n-grid",
        "1e21:1e25:5",
        "--vs-grid",
        "2000:8000:4",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows: Vec<(f64, f64, f64)> = csv_rows(&stdout(&out))
        .iter()
        .map(|r| {
            (
                r[0].parse().unwrap(),
                r[1].parse().unwrap(),
                r[2].parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows.len(), 20);
    let at = |n: f64, v: f64| {
        rows.iter()
            .find(|r| near(r.0, n, 1e-9) && near(r.1, v, 1e-9))
            .unwrap()
            .2
    };
    assert!(near(at(1e21, 8000.0), 2343e-6, 0.02));
    assert!(near(at(1e25, 2000.0), 6.8e-6, 0.02));
    for v in [2000.0, 4000.0, 6000.0, 8000.0] {
        let column: Vec<f64> = rows
            .iter()
            .filter(|r| near(r.1, v, 1e-9))
            .map(|r| r.2)
            .collect();
        assert!(column.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn sweep_single_point() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "g.cfg", GYPSUM);
    let out = pairdeco(&[
        "sweep",
        "--config",
        s(&cfg),
        "--n-grid",
        "1e23:1e23:1",
        "--vs-grid",
        "4570:4570:1",
    ]);
    assert_eq!(csv_rows(&stdout(&out)).len(), 1);
}

#[test]
fn deterministic_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "g.cfg", GYPSUM);
    let args = [
        "evolve",
        "--config",
        s(&cfg),
        "--grid",
        "0:3e-4:17",
        "--exact-path",
    ];
    assert_eq!(pairdeco(&args).stdout, pairdeco(&args).stdout);
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn oracle_eigdist_and_ksum() {
    let out = pairdeco(&["oracle", "eigdist"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["passed"], true);
    let checks = report["eigdist"]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"]
        .as_str()
        .unwrap()
        .starts_with("N=2 matches enumeration")
        && c["passed"] == true));
    let out = pairdeco(&["oracle", "ksum"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn oracle_quick_all_passes() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("report.json");
    let out = pairdeco(&["oracle", "all", "--quick", "--out", s(&target)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    let points = report["fock"]["points"].as_array().unwrap();
    assert!(!points.is_empty());
    for key in ["lambda_m", "closed_form", "numeric", "rel_err", "n_max"] {
        assert!(points[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn oracle_zero_tolerance_fails() {
    let out = pairdeco(&["oracle", "fock", "--quick", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn compare_round_trip() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "g.cfg", GYPSUM);
    // τ̂▽_X at 50.4 kHz is 110 μs and scales as ν̂₀⁻².
    let tau = |nu: f64| 109.969 * (50.3075 / nu).powi(2);
    let mut data = String::from("nu_hat_khz,tau_exp_us\n");
    for nu in [30.0, 40.0, 50.3075, 65.0] {
        data.push_str(&format!("{nu},{}\n", tau(nu)));
    }
    let csv = write(&dir, "d.csv", &data);
    let out = pairdeco(&["compare", "--config", s(&cfg), "--csv", s(&csv)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "nu_hat_khz,tau_exp_us,tau_theory_us,residual_us"
    );
    for row in csv_rows(&text) {
        let exp: f64 = row[1].parse().unwrap();
        let residual: f64 = row[3].parse().unwrap();
        assert!(residual.abs() < 1e-3 * exp, "{row:?}");
    }
}

#[test]
fn compare_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "g.cfg", GYPSUM);
    let empty = write(&dir, "e.csv", "");
    let out = pairdeco(&["compare", "--config", s(&cfg), "--csv", s(&empty)]);
    assert_eq!(out.status.code(), Some(1));
    let bad = write(&dir, "b.csv", "nu_hat_khz,tau_exp_us\n50,110\n40,oops\n");
    let out = pairdeco(&["compare", "--config", s(&cfg), "--csv", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}
