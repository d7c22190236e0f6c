use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kgcoherent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgcoherent"))
        .args(args)
        .env_remove("KGCOHERENT_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn linear_spectrum_rows() {
    let out = kgcoherent(&["spectrum", "--model", "linear", "--k", "1", "--n", "3"]);
    assert!(out.status.success());
    let e = column(&stdout(&out), "E_n");
    let want = [1.0, 1.732_050_8, 2.236_068_0];
    assert_eq!(e.len(), 3);
    for (got, want) in e.iter().zip(want) {
        assert!((got - want).abs() < 1e-7);
    }
}

#[test]
fn pt_spectrum_rows() {
    let out = kgcoherent(&["spectrum", "--model", "pt", "--m", "1", "--omega", "1", "--n", "2"]);
    let e = column(&stdout(&out), "E_n");
    assert!((e[0] - 1.618_034_0).abs() < 1e-7);
    assert!((e[1] - 2.618_034_0).abs() < 1e-7);
}

#[test]
fn invalid_parameters_exit_two() {
    let out = kgcoherent(&["spectrum", "--k", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coupling must be positive"));
    assert_eq!(kgcoherent(&["figures", "fig12"]).status.code(), Some(2));
    assert_eq!(kgcoherent(&["verify", "everything"]).status.code(), Some(2));
    assert_eq!(kgcoherent(&["evolve", "--t0", "3", "--t1", "1"]).status.code(), Some(2));
    assert_eq!(kgcoherent(&["state", "--alpha", "1+2"]).status.code(), Some(2));
    assert_eq!(kgcoherent(&["bogus"]).status.code(), Some(2));
}

#[test]
fn pt_state_ratio_and_linear_ground_state() {
    let out = kgcoherent(&["state", "--model", "pt", "--alpha", "1", "--n", "10"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let c = v["coefficients"].as_array().unwrap();
    let ratio = c[1]["re"].as_f64().unwrap() / c[0]["re"].as_f64().unwrap();
    assert!((ratio - 0.437_016_0).abs() < 1e-6);

    let out = kgcoherent(&["state", "--model", "linear", "--alpha", "0", "--n", "5"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let nonzero: Vec<u64> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["abs2"].as_f64().unwrap() > 0.0)
        .map(|r| r["n"].as_u64().unwrap())
        .collect();
    assert_eq!(nonzero, vec![0]);

    let out = kgcoherent(&["state", "--model", "pt", "--alpha", "1.2-1.6i", "--n", "60"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let last = v["coefficients"].as_array().unwrap().last().unwrap()["cumulative"].as_f64().unwrap();
    assert!(last >= 1.0 - 1e-10);
}

#[test]
fn figure_files_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = kgcoherent(&["figures", "fig1", "--output-dir", d.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let first = fs::read(a.join("fig1.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("fig1.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("t,dx,dp,product,ex,ep\n"));
    let product = column(&text, "product");
    assert_eq!(product.len(), 1001);
    assert!(product.iter().cloned().fold(f64::INFINITY, f64::min) >= 0.4999);
    assert!(product.iter().cloned().fold(0.0, f64::max) <= 0.515);

    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("fig1.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["dt"].as_f64(), Some(0.05));
    assert_eq!(meta["alpha"].as_str(), Some("0.1+0.2i"));
}

#[test]
fn fig8_initial_mean_position() {
    let dir = tempfile::tempdir().unwrap();
    kgcoherent(&["figures", "fig8", "--output-dir", dir.path().to_str().unwrap()]);
    let ex = column(&fs::read_to_string(dir.path().join("fig8.csv")).unwrap(), "ex");
    assert!((ex[0] - 0.141_421).abs() < 1e-6);
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_kgcoherent"))
        .args(["figures", "fig2"])
        .env("KGCOHERENT_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("fig2.csv").exists());
    assert!(dir.path().join("fig2.meta.json").exists());
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let flags =
        ["evolve", "--format", "json", "--alpha", "0.4-0.3i", "--k", "1.5", "--n", "30", "--t1", "2", "--dt", "0.25"];
    let direct = kgcoherent(&flags);
    assert!(direct.status.success());

    let mut dump_args = vec!["--dump-config"];
    dump_args.extend_from_slice(&flags);
    let dumped = stdout(&kgcoherent(&dump_args));
    let path = dir.path().join("run.conf");
    fs::write(&path, &dumped).unwrap();
    let via_file = kgcoherent(&["evolve", "--config", path.to_str().unwrap()]);
    assert!(via_file.status.success());
    assert_eq!(direct.stdout, via_file.stdout);

    // Flags override the file.
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&kgcoherent(&["evolve", "--config", path.to_str().unwrap(), "--k", "3"])))
            .unwrap();
    assert_eq!(v["config"]["k"].as_f64(), Some(3.0));
    assert_eq!(v["config"]["alpha"].as_str(), Some("0.4-0.3i"));
}

#[test]
fn json_echoes_effective_config() {
    let out = kgcoherent(&["spectrum", "--format", "json", "--model", "pt", "--omega", "2"]);
    let text = stdout(&out);
    assert!(text.ends_with("}\n"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "spectrum");
    assert_eq!(v["config"]["model"], "pt");
    assert_eq!(v["config"]["omega"].as_f64(), Some(2.0));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested").join("levels.csv");
    let out = kgcoherent(&["spectrum", "--n", "2", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(Path::new(&path).exists());
}

#[test]
fn verify_suites_pass() {
    for suite in ["spectra", "coherence", "measure", "oracle"] {
        let out = kgcoherent(&["verify", suite]);
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["suite"], suite);
        assert_eq!(v["passed"], true, "{suite}: {v}");
        assert_eq!(out.status.code(), Some(0));
        for check in v["checks"].as_array().unwrap() {
            assert!(check["name"].is_string() && check["bound"].is_number());
        }
    }
}

#[test]
fn failed_verification_exits_one() {
    // Twenty levels on 301 points miss the 1e-3 energy target.
    let out = kgcoherent(&["oracle", "--model", "pt", "--grid-points", "301", "--n", "20"]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
}

#[test]
fn pt_evolution_by_quadrature() {
    let out = kgcoherent(&["evolve", "--model", "pt", "--alpha", "1", "--t1", "1", "--dt", "0.5"]);
    assert!(out.status.success());
    let product = column(&stdout(&out), "product");
    assert_eq!(product.len(), 3);
    assert!(product.iter().all(|p| *p >= 0.5));
}
