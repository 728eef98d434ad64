use memkin::config::{parse_config, NormRequest, Scenario, SimulationConfig};
use memkin::harness::{run, Status};
use memkin::io::{moments_from_table, moments_table, read_vkf1, NumericTable};
use memkin::landau::LandauOperator;
use memkin::perturbation::perturbed_maxwellian;
use memkin::{run_landau, run_memory, SpectralEngine, Weight};

fn tiny(scenario: Scenario) -> SimulationConfig {
    let mut c = parse_config("[grid]\nn = 8\nL = 4.0\n").unwrap();
    c.scenario = Some(scenario);
    c.t_end = 0.05;
    c
}

#[test]
fn memory_artifacts_match_the_in_memory_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny(Scenario::Memory);
    let summary = run(&cfg, Scenario::Memory, tmp.path(), Some(1)).unwrap();
    assert_eq!(summary.status, Status::Success);
    assert_eq!(summary.manifest.threads, 1);

    let engine = SpectralEngine::new(cfg.velocity_grid().unwrap());
    let spec = cfg.cutoff().unwrap();
    let u0 = perturbed_maxwellian(engine.grid(), &cfg.maxwellian().unwrap(), cfg.delta2, &cfg.perturbation).unwrap();
    let k_max = LandauOperator::new(&engine, &spec).k_max(&u0).unwrap();
    let traj = run_memory(&engine, &spec, &cfg.memory_config(cfg.eps, engine.grid().dv(), k_max).unwrap(), &u0).unwrap();

    let table = NumericTable::read(&tmp.path().join("moments.csv")).unwrap();
    assert_eq!(table, moments_table(&traj.times, &traj.moments));
    let (times, moments) = moments_from_table(&table).unwrap();
    assert_eq!(times, traj.times);
    assert_eq!(moments, traj.moments);
    assert_eq!(&read_vkf1(&tmp.path().join("u_final.vkf1")).unwrap(), traj.final_state());
    assert_eq!(read_vkf1(&tmp.path().join("u_initial.vkf1")).unwrap(), u0);
}

#[test]
fn landau_run_reports_requested_norm() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = SimulationConfig { norm: Some(NormRequest { decay: 2.0, order: 1, weight: Weight::LambdaTilde }), ..tiny(Scenario::Landau) };
    let summary = run(&cfg, Scenario::Landau, tmp.path(), None).unwrap();
    assert_eq!(summary.status, Status::Success);
    let v = summary.manifest.values["landau_v_norm"];
    assert!(v.is_finite() && v > 0.0);
    assert!(summary.manifest.values["relative_mass_drift"] <= 1e-12);

    let engine = SpectralEngine::new(cfg.velocity_grid().unwrap());
    let u0 = read_vkf1(&tmp.path().join("u_initial.vkf1")).unwrap();
    let traj = run_landau(&engine, &cfg.cutoff().unwrap(), &cfg.landau_config(), &u0).unwrap();
    assert_eq!(&read_vkf1(&tmp.path().join("u_final.vkf1")).unwrap(), traj.final_state());
}

#[test]
fn converge_from_maxwellian_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = SimulationConfig { delta2: 0.0, eps_list: vec![0.2, 0.1], l_doubling: true, ..tiny(Scenario::Converge) };
    let summary = run(&cfg, Scenario::Converge, tmp.path(), None).unwrap();
    assert_ne!(summary.status, Status::Aborted);
    let table = NumericTable::read(&tmp.path().join("convergence.csv")).unwrap();
    assert_eq!(table.columns, ["eps", "error", "fitted_order"]);
    assert_eq!(table.column("eps").unwrap(), vec![0.2, 0.1]);
    assert!(table.column("error").unwrap().iter().all(|e| e.is_finite() && *e < 1e-2));
    assert!(summary.manifest.values.contains_key("l_doubling_error"));
    // Landau reference plus one run per eps
    assert_eq!(summary.manifest.runs.len(), 3);
}

#[test]
fn scenario_mismatch_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let err = run(&tiny(Scenario::Landau), Scenario::Memory, tmp.path(), None).unwrap_err();
    assert!(matches!(err, memkin::Error::Config(_)));
}
