use bimode_stirap::config::{ParamsConfig, Rate};
use bimode_stirap::params::SystemParams;
use bimode_stirap::parallel::Execution;
use bimode_stirap::scan::{best_point, run_scan, Axis, ScanSpec};
use bimode_stirap::simulation::{run_scenario, Scenario};

#[test]
fn adiabatic_stirap_reaches_qubit_target() {
    let mut p = SystemParams::default().lossless().with_width_divisor(2.0);
    p.tau = 8.0;
    p.record_points = 10;
    let out = run_scenario(&p, Scenario::Stirap, true).unwrap();
    let last = out.metrics.last();
    assert!(last.fidelity_qubit >= 0.98, "{}", last.fidelity_qubit);
    assert!((last.norm - 1.0).abs() < 1e-8);
}

#[test]
fn normalized_error_ignores_loss() {
    let mut p = SystemParams::default();
    p.record_points = 10;
    let raw = run_scenario(&p, Scenario::Stirap, true).unwrap();
    let mut cfg = ParamsConfig::default();
    cfg.record_points = Some(10);
    let mut spec = ScanSpec::new(Scenario::Stirap, cfg, vec![Axis::list("tau", vec![1.0])]);
    spec.normalize_pe = true;
    spec.outputs = vec!["Pe".into(), "norm".into()];
    let t = run_scan(&spec, Execution::Serial).unwrap();
    let normalized = t.metric(0, "Pe").unwrap().unwrap();
    let last = raw.metrics.last();
    let overlap = (1.0 - last.error.unwrap()) / last.norm;
    assert!((normalized - (1.0 - overlap)).abs() < 1e-12);
}

#[test]
fn most_adiabatic_point_wins_fidelity_objective() {
    let base = ParamsConfig {
        kappa: Some(Rate::PerG(0.0)),
        gamma: Some(Rate::PerG(0.0)),
        width_divisor: Some(2.0),
        record_points: Some(10),
        ..ParamsConfig::default()
    };
    let spec = ScanSpec::new(Scenario::Stirap, base, vec![Axis::list("tau", vec![1.0, 8.0, 4.0])]);
    let t = run_scan(&spec, Execution::Parallel).unwrap();
    let (row, _) = best_point(&t, "1 - fid_qubit").unwrap().unwrap();
    assert_eq!(t.rows[row].point, vec![8.0]);
}
