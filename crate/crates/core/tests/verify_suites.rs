use sl2c_semigroup::verify::{run, Fault, Suite, VerifyConfig};

#[test]
fn fast_suites_pass() {
    let cfg = VerifyConfig::default();
    for s in Suite::ALL.into_iter().filter(|s| !s.is_slow()) {
        let r = run(s, &cfg);
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{}: {failed:#?}", r.suite);
    }
}

#[test]
fn time_shift_fault_breaks_semigroup_check() {
    let cfg = VerifyConfig {
        fault: Some(Fault::QtTimeShift(1e-3)),
        ..VerifyConfig::default()
    };
    let r = run(Suite::Qt, &cfg);
    assert!(!r.passed());
    assert!(r.checks.iter().any(|c| c.name.starts_with("qt.semigroup") && !c.passed));
}

#[test]
fn unit_alpha_has_unit_singular_values() {
    let cfg = VerifyConfig {
        metaplectic_point: Some((1.0, 0.7)),
        ..VerifyConfig::default()
    };
    let r = run(Suite::Metaplectic, &cfg);
    for name in ["metaplectic.lambda1", "metaplectic.lambda2"] {
        let c = r.checks.iter().find(|c| c.name.starts_with(name)).unwrap();
        assert!(c.passed && (c.measured - 1.0).abs() <= 1e-12, "{c:?}");
    }
}

#[test]
fn report_serializes() {
    let r = run(Suite::Metaplectic, &VerifyConfig::default());
    let json = serde_json::to_string(&r).unwrap();
    let back: sl2c_semigroup::verify::Report = serde_json::from_str(&json).unwrap();
    assert_eq!(back.checks.len(), r.checks.len());
}
