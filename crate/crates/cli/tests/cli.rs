use serde_json::Value;
use sl2c_semigroup::metaplectic::{kron_i2, symplectic_defect, Sp4};
use sl2c_semigroup::DensityGrid;
use std::process::{Command, Output};

fn sl2c(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sl2c"))
        .args(args)
        .env_remove("SL2C_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn matrix4(v: &Value) -> Sp4 {
    Sp4::from_fn(|i, j| v[i][j].as_f64().unwrap())
}

#[test]
fn density_q_is_symmetric_with_expected_rows() {
    let o = sl2c(&["density", "q", "--t", "1", "--grid", "-10", "10", "101"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, g) = DensityGrid::from_csv(&stdout(&o)).unwrap();
    assert_eq!(g.len(), 101);
    assert!(g.asymmetry() <= 1e-15);
}

#[test]
fn density_g_reports_atom() {
    let o = sl2c(&["density", "g", "--t", "0.3", "--omega", "0.8", "--grid", "-4", "4", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let (comments, _) = DensityGrid::from_csv(&stdout(&o)).unwrap();
    let atom = comments[0].strip_prefix("atom_location=").unwrap();
    let (loc, mass) = atom.split_once(",atom_mass=").unwrap();
    assert!((loc.parse::<f64>().unwrap() - 0.5).abs() < 1e-15);
    let expected = 0.3_f64.exp() * 0.5 / 0.8;
    assert!((mass.parse::<f64>().unwrap() - expected).abs() < 1e-15);
}

#[test]
fn density_p_at_zero_omega_matches_small_omega() {
    let a = sl2c(&["density", "p", "--t", "1", "--omega", "0", "--grid", "-3", "3", "13"]);
    let b = sl2c(&["density", "p", "--t", "1", "--omega", "1e-9", "--grid", "-3", "3", "13"]);
    let (_, ga) = DensityGrid::from_csv(&stdout(&a)).unwrap();
    let (_, gb) = DensityGrid::from_csv(&stdout(&b)).unwrap();
    for (x, y) in ga.values().iter().zip(gb.values()) {
        assert!((x - y).abs() < 1e-8);
    }
}

#[test]
fn regime_and_usage_errors_exit_2() {
    for args in [
        &["density", "c", "--t", "0.3", "--omega", "0.8"][..],
        &["density", "g", "--t", "1", "--omega", "0.8"],
        &["density", "q", "--t", "9"],
        &["density", "q", "--t", "1", "--grid", "0", "1", "1"],
        &["density", "q", "--t", "1", "--rel-tol", "2"],
        &["density", "q"],
        &["no-such-command"],
    ] {
        let o = sl2c(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = ["density", "c", "--t", "1", "--omega", "0.5", "--grid", "-5", "5", "41"];
    let a = sl2c(&args);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    let b = sl2c(&seq);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = std::env::temp_dir().join(format!("sl2c-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# test\nt=0.5\ngrid_min=-2\ngrid_max=2\ngrid_n=5\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = stdout(&sl2c(&["density", "q", "--config", c]));
    assert!(from_file.contains("t=0.5"));
    assert_eq!(DensityGrid::from_csv(&from_file).unwrap().1.len(), 5);
    let flagged = stdout(&sl2c(&["density", "q", "--config", c, "--t", "1"]));
    assert!(flagged.contains("t=1\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn out_dir_environment_variable() {
    let dir = std::env::temp_dir().join(format!("sl2c-out-{}", std::process::id()));
    let o = Command::new(env!("CARGO_BIN_EXE_sl2c"))
        .args(["density", "q", "--t", "1", "--grid", "-1", "1", "3"])
        .env("SL2C_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.join("density_q.csv")).unwrap();
    assert!(text.contains("xi,value"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_metaplectic_reports_unit_lambdas() {
    let o = sl2c(&["verify", "metaplectic", "--alpha", "1", "--t", "0.7"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["passed"], true);
    let checks = doc["reports"][0]["checks"].as_array().unwrap();
    for name in ["metaplectic.lambda1", "metaplectic.lambda2"] {
        let c = checks
            .iter()
            .find(|c| c["name"].as_str().unwrap().starts_with(name))
            .unwrap();
        assert!((c["measured"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn verify_qt_passes_and_fault_fails() {
    let ok = sl2c(&["verify", "qt"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = sl2c(&["verify", "qt", "--fault", "1e-3"]);
    assert_eq!(bad.status.code(), Some(1));
    let doc: Value = serde_json::from_str(&stdout(&bad)).unwrap();
    let checks = doc["reports"][0]["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["name"].as_str().unwrap().starts_with("qt.semigroup") && c["passed"] == false));
}

#[test]
fn metaplectic_identity_at_zero_time() {
    let o = sl2c(&["metaplectic", "--alpha", "1", "--t", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((matrix4(&doc["exp_neg_tA"]) - Sp4::identity()).amax() == 0.0);
    for key in ["u2_m", "u2_r", "sl2c"] {
        for i in 0..2 {
            for j in 0..2 {
                let z = &doc[key][i][j];
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((z[0].as_f64().unwrap() - expected).abs() < 1e-15 && z[1].as_f64().unwrap().abs() < 1e-15);
            }
        }
    }
}

#[test]
fn metaplectic_json_round_trips_and_reverifies() {
    let o = sl2c(&["metaplectic", "--alpha", "0.5", "--t", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc["residuals"]["reassembly"].as_f64().unwrap() <= 1e-12);
    let s = matrix4(&doc["exp_neg_tA"]);
    let m = matrix4(&doc["cartan"]["m"]);
    let r = matrix4(&doc["cartan"]["r"]);
    let l = &doc["cartan"]["lambdas"];
    let (l1, l2) = (l[0].as_f64().unwrap(), l[1].as_f64().unwrap());
    let middle = kron_i2(&nalgebra::Matrix2::new(l1, 0.0, 0.0, l2));
    assert!((m * middle * r - s).amax() <= 1e-12);
    assert!((l1 * l2 - 1.0).abs() <= 1e-12);
    assert!(symplectic_defect(&s) <= 1e-12);
    assert!(symplectic_defect(&m) <= 1e-12 && symplectic_defect(&r) <= 1e-12);
}

#[test]
fn area_sim_is_reproducible() {
    let args = [
        "area-sim",
        "--t",
        "0.5",
        "--x",
        "1",
        "--n-paths",
        "4000",
        "--n-steps",
        "64",
        "--bandwidth",
        "0.2",
    ];
    let a = sl2c(&args);
    let b = sl2c(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert!(doc["estimate"]["target"].as_f64().unwrap() > 0.0);
}

#[test]
fn tabulate_has_one_column_per_time() {
    let o = sl2c(&["tabulate", "--times", "0.5,1,2", "--grid", "-2", "2", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "xi,t=0.5,t=1,t=2");
    assert_eq!(rows.len(), 10);
    assert!(rows[1..].iter().all(|r| r.split(',').count() == 4));
}
