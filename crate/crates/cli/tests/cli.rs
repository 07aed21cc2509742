use std::path::Path;
use std::process::{Command, Output};

fn sipsamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sipsamp"))
        .args(args)
        .env_remove("SIPSAMP_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn kernel_default_lattice_passes() {
    let out = sipsamp(&["kernel", "--p", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("s,t,closed,quadrature_re,quadrature_im,abs_diff\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 41 * 41);
    assert!(r.iter().all(|row| row[5] <= 1e-9));
}

#[test]
fn kernel_unreachable_tolerance_fails() {
    assert_eq!(code(&sipsamp(&["kernel", "--tol", "1e-30"])), 1);
}

#[test]
fn kernel_single_point() {
    let out = sipsamp(&["kernel", "--s-range", "0", "--t-range", "0", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let row = &v["rows"][0];
    assert_eq!(row["closed"], 1.0);
    assert!((row["quadrature_re"].as_f64().unwrap() - 1.0).abs() <= 1e-15);
}

#[test]
fn kernel_bad_range_is_usage_error() {
    assert_eq!(code(&sipsamp(&["kernel", "--s-range", "-1:1"])), 2);
    assert_eq!(code(&sipsamp(&["kernel", "--p", "1"])), 2);
    assert_eq!(code(&sipsamp(&["kernel", "--grid-order", "4"])), 2);
}

#[test]
fn reconstruct_const_is_exact() {
    let out = sipsamp(&["reconstruct", "--spectrum", "const", "--t-range", "-2:2:9"]);
    assert_eq!(code(&out), 0);
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 9 * 5);
    assert!(r.iter().all(|row| row[6] <= 1e-15), "abs_err column");
}

#[test]
fn reconstruct_shift_errors_decrease() {
    for p in ["2", "4"] {
        let out = sipsamp(&["reconstruct", "--spectrum", "shift:0.5", "--t-range", "0.2", "--p", p]);
        assert_eq!(code(&out), 0);
        let r = rows(&stdout(&out));
        let ns: Vec<f64> = r.iter().map(|row| row[1]).collect();
        assert_eq!(ns, vec![4.0, 8.0, 16.0, 32.0, 64.0]);
        let errs: Vec<f64> = r.iter().map(|row| row[6]).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(r.iter().all(|row| row[6] <= row[7]));
    }
}

#[test]
fn reconstruct_unknown_spectrum() {
    let out = sipsamp(&["reconstruct", "--spectrum", "gauss"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("gauss"));
}

#[test]
fn reconstruct_from_csv_spectrum_is_not_asserted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.csv");
    // coswin spectrum on the default grid, written by the library
    let grid = std::sync::Arc::new(sip_sampling::funcspace::make_grid(16).unwrap());
    let f = sip_sampling::Spectrum::CosWindow.on_grid(&grid).unwrap();
    f.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
    let out = sipsamp(&[
        "reconstruct",
        "--spectrum-csv",
        path.to_str().unwrap(),
        "--t-range",
        "0.5",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["asserted"], false);
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn verify_hilbert_case() {
    let out = sipsamp(&["verify", "--n-trunc", "16", "--trials", "300"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["bessel_b", "frame_ab", "riesz_ab"] {
        for side in ["lower", "upper"] {
            let x = v[key][side].as_f64().unwrap();
            assert!((x - 1.0).abs() <= 1e-6, "{key}.{side} = {x}");
        }
    }
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_matches_committed_regression() {
    let want =
        std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/verify_p4_n16_seed42.json")).unwrap();
    let out = sipsamp(&["verify", "--p", "4", "--n-trunc", "16", "--seed", "42"]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout == want, "verify output drifted from the committed report");
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = sipsamp(&[
            "verify",
            "--p",
            "3",
            "--n-trunc",
            "8",
            "--trials",
            "200",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn verify_detects_moved_node() {
    let out = sipsamp(&["verify", "--n-trunc", "8", "--trials", "50", "--perturb-node", "0=0.1"]);
    assert_eq!(code(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["interpolation_dev"].as_f64().unwrap() > 1e-8);
    assert_eq!(v["pass"], false);
}

#[test]
fn verify_weighted_system_and_matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = sipsamp(&[
        "verify",
        "--p",
        "3",
        "--n-trunc",
        "4",
        "--trials",
        "50",
        "--weights",
        "0=2,-1=1+1i",
        "--matrices",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["biorth_sm.csv", "gram_samp.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().count(), 1 + 81);
    }
    assert_eq!(code(&sipsamp(&["verify", "--weights", "0=0"])), 2);
}

#[test]
fn bounds_targets() {
    let out = sipsamp(&["bounds", "riesz", "--p", "3", "--n-trunc", "8", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["estimate"]["method"], "random-search");
    assert_eq!(v["estimate"]["lower"].as_f64().unwrap(), 0.6278670935787114);
    assert_eq!(v["estimate"]["upper"].as_f64().unwrap(), 1.0);

    let out = sipsamp(&["bounds", "frame", "--n-trunc", "8", "--trials", "100"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["estimate"]["lower"].as_f64().unwrap() - 1.0).abs() <= 1e-6);

    assert_eq!(code(&sipsamp(&["bounds", "frame", "--trials", "0"])), 2);
    assert_eq!(code(&sipsamp(&["bounds", "gramian"])), 2);
    assert_eq!(code(&sipsamp(&["bounds", "frame", "--format", "csv"])), 2);
}

#[test]
fn config_file_and_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "p = 3.0\nn_trunc = 8\nseed = 7\n").unwrap();
    let via_flag = sipsamp(&["bounds", "riesz", "--config", cfg.to_str().unwrap()]);
    let via_env = Command::new(env!("CARGO_BIN_EXE_sipsamp"))
        .args(["bounds", "riesz"])
        .env("SIPSAMP_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(code(&via_flag), 0);
    assert_eq!(via_flag.stdout, via_env.stdout);
    assert!(stdout(&via_flag).contains("\"n_trunc\": 8"));
    // flags win over the file
    let over = sipsamp(&["bounds", "riesz", "--config", cfg.to_str().unwrap(), "--n-trunc", "4"]);
    assert!(stdout(&over).contains("\"n_trunc\": 4"));

    std::fs::write(&cfg, "p = \"three\"\n").unwrap();
    assert_eq!(code(&sipsamp(&["kernel", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&sipsamp(&["kernel", "--config", "/nonexistent.toml"])), 2);
}

#[test]
fn help_exits_zero() {
    let out = sipsamp(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("reconstruct"));
}
