//! Acceptance criteria 1-9. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured values and fails when the criterion does.
//!
//! Run with `cargo test --release -p memkin-validation --test acceptance -- --nocapture`.

use std::time::Instant;

use memkin::config::{GridConfig, Scenario, SimulationConfig};
use memkin::diagnostics::{
    boundary_layer, convergence_study, default_velocity_samples, kernel_time_integral_check, plancherel_check, stationarity_study, strictly_decreasing,
    InitialDatum,
};
use memkin::landau::LandauOperator;
use memkin::{run_landau, run_memory, HistoryMode, LandauConfig, Maxwellian, MemoryConfig, SpectralEngine, Trajectory, VelocityGrid};
use memkin_core::oracles::{oracle_laplace, oracle_memory_kernel};
use memkin_core::symmat::{relative_frobenius_error, relative_frobenius_error_complex};
use memkin_core::{cutoff, laplace_kernel, memory_kernel, Complex64, CutoffSpec};
use memkin_validation::{standard_datum, Measurement, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn engine(n: usize, l: f64) -> SpectralEngine {
    SpectralEngine::new(VelocityGrid::new(n, l).unwrap())
}

/// Uniform direction times a magnitude in `[r_lo, r_hi)`.
fn random_velocity(rng: &mut ChaCha8Rng, r_lo: f64, r_hi: f64) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = rng.random_range(r_lo..r_hi);
    let rho = (1.0 - z * z).sqrt();
    [r * rho * phi.cos(), r * rho * phi.sin(), r * z]
}

fn timed(criterion: u32, title: &'static str, body: impl FnOnce() -> Vec<Measurement>) -> Verdict {
    let start = Instant::now();
    let measurements = body();
    Verdict { criterion, title, measurements, seconds: start.elapsed().as_secs_f64() }
}

#[test]
fn criterion_1_memory_kernel_matches_quadrature_oracle() {
    timed(1, "memory kernel vs k-integral oracle at 20 random (tau, w)", || {
        let spec = CutoffSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d656d31);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let tau = rng.random_range(0.0..5.0);
            let w = random_velocity(&mut rng, 0.4, 6.0);
            let r2 = w.iter().map(|x| x * x).sum::<f64>();
            let oracle = oracle_memory_kernel(tau, w).unwrap() * cutoff(r2, &spec);
            worst = worst.max(relative_frobenius_error(&memory_kernel(tau, w, &spec).unwrap(), &oracle));
        }
        vec![Measurement::at_most("max relative Frobenius error", worst, 1e-6)]
    })
    .report();
}

#[test]
fn criterion_2_laplace_kernel_matches_numeric_transform() {
    timed(2, "Laplace kernel vs numeric transform of the memory kernel", || {
        let spec = CutoffSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d656d32);
        let ws: Vec<[f64; 3]> = (0..5).map(|_| random_velocity(&mut rng, 0.4, 6.0)).collect();
        let mut worst: f64 = 0.0;
        for z in [Complex64::new(0.5, 0.0), Complex64::new(1.0, 2.0), Complex64::new(2.0, 5.0)] {
            for &w in &ws {
                let numeric = oracle_laplace(z, w, &spec).unwrap();
                worst = worst.max(relative_frobenius_error_complex(&laplace_kernel(z, w, &spec).unwrap(), &numeric));
            }
        }
        vec![Measurement::at_most("max relative Frobenius error", worst, 1e-6)]
    })
    .report();
}

#[test]
fn criterion_3_time_integral_of_memory_kernel_is_landau_kernel() {
    timed(3, "integral of G over [0, 40/|w|] vs Landau kernel at 10 w", || {
        let samples = kernel_time_integral_check(&CutoffSpec::default(), 40.0, &default_velocity_samples(10)).unwrap();
        let worst = samples.iter().map(|s| s.relative_error).fold(0.0, f64::max);
        vec![Measurement::at_most("max relative Frobenius error", worst, 1e-8)]
    })
    .report();
}

#[test]
fn criterion_4_landau_conservation_and_dissipation() {
    timed(4, "Landau conservation and entropy at n=32, L=8, t in [0, 0.5]", || {
        let e = engine(32, 8.0);
        let u0 = standard_datum(e.grid()).unwrap();
        let traj = run_landau(&e, &CutoffSpec::default(), &LandauConfig { t_end: 0.5, ..Default::default() }, &u0).unwrap();
        let drift = traj.conservation_drift();
        vec![
            Measurement::at_most("mass drift", drift.mass, 1e-12),
            Measurement::at_most("momentum drift", drift.momentum, 1e-6),
            Measurement::at_most("energy drift", drift.energy, 1e-6),
            Measurement::at_most("max entropy increase per step", drift.entropy_increase, 1e-10),
        ]
    })
    .report();
}

#[test]
fn criterion_5_maxwellian_is_stationary() {
    timed(5, "Landau run from m and boundary layer at m", || {
        let e = engine(32, 8.0);
        let spec = CutoffSpec::default();
        let mx = Maxwellian::default();
        let m = mx.sample(e.grid());
        let traj = run_landau(&e, &spec, &LandauConfig { t_end: 0.5, ..Default::default() }, &m).unwrap();
        let eps = 0.1;
        let layer = [0.1 * eps, eps, 10.0 * eps]
            .iter()
            .map(|&t| boundary_layer(&e, t, InitialDatum::Maxwellian(mx), eps, &spec).unwrap().field.max_abs())
            .fold(0.0, f64::max);
        vec![
            Measurement::at_most("sup_t |u(t) - m|", traj.sup_abs_distance_to(&m), 1e-6),
            Measurement::at_most("max |B(t, m)| over t in {0.1, 1, 10} eps", layer, 1e-10),
        ]
    })
    .report();
}

fn sweep_config(scenario: Scenario) -> SimulationConfig {
    SimulationConfig { grid: GridConfig { n: 24, half_width: 8.0 }, ..SimulationConfig::for_scenario(scenario) }
}

#[test]
fn criterion_6_memory_solver_transient_at_maxwellian() {
    timed(6, "stationarity residual over eps in {0.2, 0.1, 0.05} at n=24", || {
        let config = sweep_config(Scenario::Stationarity);
        let report = stationarity_study(&config.velocity_grid().unwrap(), &config.cutoff().unwrap(), &config.sweep(), &config.maxwellian().unwrap()).unwrap();
        println!("criterion 6 residuals {:?} (Landau {:e})", report.residuals, report.landau_residual);
        let complete = report.failure.is_none() && report.residuals.len() == config.eps_list.len();
        vec![
            Measurement::holds("all runs completed", complete),
            Measurement::holds("residuals strictly decreasing", complete && report.monotone),
            Measurement::at_least("fitted order", report.fitted_order.unwrap_or(f64::NAN), 0.8),
        ]
    })
    .report();
}

#[test]
fn criterion_7_memory_solutions_converge_to_landau() {
    timed(7, "memory vs Landau over eps in {0.2, 0.1, 0.05} at n=24", || {
        let config = sweep_config(Scenario::Converge);
        let report = convergence_study(&config.velocity_grid().unwrap(), &config.cutoff().unwrap(), &config.sweep(), &standard_datum, false).unwrap();
        println!("criterion 7 errors {:?} ratios {:?}", report.errors, report.ratios());
        let complete = report.failure.is_none() && report.errors.len() == config.eps_list.len();
        let min_ratio = report.ratios().into_iter().fold(f64::INFINITY, f64::min);
        vec![
            Measurement::holds("all runs completed", complete),
            Measurement::holds("errors strictly decreasing", complete && strictly_decreasing(&report.errors)),
            Measurement::at_least("min error ratio per halving", if complete { min_ratio } else { f64::NAN }, 1.3),
        ]
    })
    .report();
}

fn timed_memory_run(e: &SpectralEngine, spec: &CutoffSpec, config: &MemoryConfig, u0: &memkin::ScalarField) -> (Trajectory, f64) {
    let start = Instant::now();
    let traj = run_memory(e, spec, config, u0).unwrap();
    (traj, start.elapsed().as_secs_f64())
}

#[test]
fn criterion_8_windowed_history_matches_naive_and_is_faster() {
    timed(8, "windowed vs naive history at n=16, 1000 steps, eps=0.1", || {
        let e = engine(16, 8.0);
        let spec = CutoffSpec::default();
        let u0 = standard_datum(e.grid()).unwrap();
        let base = MemoryConfig { dt: 0.001, t_end: 1.0, ..MemoryConfig::new(0.1, 1.0) };
        let (windowed, t_windowed) = timed_memory_run(&e, &spec, &MemoryConfig { mode: HistoryMode::Windowed, ..base }, &u0);
        let (naive, t_naive) = timed_memory_run(&e, &spec, &MemoryConfig { mode: HistoryMode::Naive, ..base }, &u0);
        let deviation = windowed.states.iter().zip(&naive.states).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
        println!(
            "criterion 8 window {:?} of {} steps, windowed {t_windowed:.1}s, naive {t_naive:.1}s",
            windowed.info.window, windowed.info.steps
        );
        vec![
            Measurement::holds("same record times", windowed.times == naive.times),
            Measurement::at_most("sup-norm deviation", deviation, 10.0 * base.tail_tol),
            Measurement::at_least("speedup", t_naive / t_windowed, 3.0),
        ]
    })
    .report();
}

#[test]
fn criterion_9_plancherel_identity_on_recorded_trace() {
    timed(9, "time side vs Laplace side energy of a recorded memory trace", || {
        let e = engine(16, 8.0);
        let spec = CutoffSpec::default();
        let u0 = standard_datum(e.grid()).unwrap();
        let k_max = LandauOperator::new(&e, &spec).k_max(&u0).unwrap();
        let config = MemoryConfig::with_record_interval(0.1, 0.25, 0.0125, memkin::landau::DEFAULT_CFL, e.grid().dv(), k_max).unwrap();
        let traj = run_memory(&e, &spec, &config, &u0).unwrap();
        let node = e.grid().index(9, 8, 8);
        let values: Vec<f64> = traj.states.iter().map(|u| u.values()[node]).collect();
        let check = plancherel_check(&traj.times, &values, 1.0, 400.0, 8000).unwrap();
        vec![Measurement::at_most("relative gap", check.relative_gap(), 0.02)]
    })
    .report();
}
