//! Acceptance checks for the node superposition `psi = phi_0 - sqrt(2) phi_2`
//! (normalized), each printing one PASS/FAIL line.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use bohmian::equivariance::{
    continuity_residual, grid_continuity_residual, ks_distance, propagate_ensemble_to_times,
    quantile_transport, sample_initial,
};
use bohmian::field::{Grid, Point, SpacetimePoint};
use bohmian::flux::{
    bad_event_ladder, find_nodal_set, flux_through_surface, greens_identity_residual, mc_crossings,
    BoundOptions, FluxQuadrature, NodalResolution, NodalWindow, RegionSpec, Surface,
};
use bohmian::integrator::{integrate_sampled, IntegratorConfig, Sampling, Status};
use bohmian::propagator::{
    energy_expectation, energy_moment, evolve_analytic, evolve_splitstep, PropagatorConfig,
};
use bohmian::scenario::{run_scenario, Command, ScenarioConfig};
use bohmian::state::{Preset, WaveFunction, DEFAULT_CAP};

/// Serializes the checks so that runtimes are measured without contention.
static SERIAL: Mutex<()> = Mutex::new(());

fn state() -> WaveFunction {
    Preset::NodeSuperposition.build()
}

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "acceptance {id:>2} {name:<28} {} {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    // written past the test harness capture so every line shows
    let _ = std::io::stdout().write_all(line.as_bytes());
    assert!(pass, "{name}: {detail}");
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Least-squares slope and intercept of `y` against `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Log-spaced times in `[1e-3, 0.1]`, decreasing.
fn fit_times() -> Vec<f64> {
    let n = 41;
    (0..n)
        .map(|k| 10f64.powf(-1.0 - 2.0 * k as f64 / (n - 1) as f64))
        .collect()
}

#[test]
fn a01_node_geometry() {
    let _g = lock();
    let s = state();
    let start = Instant::now();
    let set = find_nodal_set(
        &s,
        &NodalWindow::new(vec![(-2.0, 2.0)], (-0.5, 2.0)),
        &NodalResolution::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let expected = [(-1.0, 0.0), (1.0, 0.0), (0.0, PI / 2.0)];
    let mut worst: f64 = 0.0;
    let mut matched = set.nodes.len() == 3;
    for &(q, t) in &expected {
        let d = set
            .nodes
            .iter()
            .map(|n| (n.point.q[0] - q).abs().max((n.point.t - t).abs()))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
        matched &= d < 1e-8;
    }
    let pass = matched && set.is_resolved() && elapsed < Duration::from_secs(5);
    report(
        1,
        "node geometry",
        pass,
        &format!(
            "{} nodes, max position error {worst:.2e}, {elapsed:.2?}",
            set.nodes.len()
        ),
    );
}

#[test]
fn a02_node_crossing_asymptotic() {
    let _g = lock();
    let s = state();
    let start = Instant::now();
    let q0 = 1.0 + (3.0 * 0.04f64 / 4.0).cbrt();
    let times = fit_times();
    let traj = integrate_sampled(
        &s,
        &Point::new1(q0),
        0.2,
        -0.2,
        &IntegratorConfig::default(),
        &Sampling::Times(times),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|p| p.t >= 1e-3 * (1.0 - 1e-12) && p.t <= 0.1 * (1.0 + 1e-12) && p.q[0] > 1.0)
        .map(|p| (p.t.ln(), (p.q[0] - 1.0).ln()))
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let (slope, intercept) = if pts.len() >= 2 {
        linear_fit(&x, &y)
    } else {
        (f64::NAN, f64::NAN)
    };
    let prefactor = intercept.exp();
    let target = 0.75f64.cbrt();
    let end = traj.last().q[0];
    let pass = traj.status == Status::HitNode
        && (end - 1.0).abs() < 1e-3
        && (slope - 2.0 / 3.0).abs() <= 0.02
        && ((prefactor - target) / target).abs() <= 0.02
        && elapsed < Duration::from_secs(5);
    report(
        2,
        "node-crossing asymptotic",
        pass,
        &format!(
            "status {}, Q({:.3e}) = {end:.6}, exponent {slope:.4}, prefactor {prefactor:.4} (target {target:.4}), {elapsed:.2?}",
            traj.status.name(),
            traj.last().t
        ),
    );
}

/// The path through the node `(1, 0)` from the quantile map, which gives
/// the separatrix exactly, fitted over the same window.
#[test]
fn a02_separatrix_asymptotic_from_quantiles() {
    let _g = lock();
    let s = state();
    let times = fit_times();
    let (x, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .map(|&t| (t.ln(), (quantile_transport(&s, 1.0, t).unwrap() - 1.0).ln()))
        .unzip();
    let (slope, _) = linear_fit(&x, &y);
    // prefactor with the exponent held at 2/3
    let fixed = (y
        .iter()
        .zip(&x)
        .map(|(yy, xx)| yy - 2.0 / 3.0 * xx)
        .sum::<f64>()
        / x.len() as f64)
        .exp();
    let target = 0.75f64.cbrt();
    assert!((slope - 2.0 / 3.0).abs() <= 0.02, "exponent {slope}");
    assert!(
        ((fixed - target) / target).abs() <= 0.02,
        "prefactor {fixed}"
    );
    // the separatrix passes below the leading-order start point at t = 0.2
    let q_sep = quantile_transport(&s, 1.0, 0.2).unwrap();
    assert!(q_sep < 1.0 + (0.03f64).cbrt() - 0.01, "{q_sep}");
}

#[test]
fn a03_central_trajectory() {
    let _g = lock();
    let s = state();
    let traj = integrate_sampled(
        &s,
        &Point::new1(0.0),
        0.0,
        PI,
        &IntegratorConfig::default(),
        &Sampling::Uniform(0.01),
    )
    .unwrap();
    let max_q = traj
        .samples
        .iter()
        .map(|p| p.q[0].abs())
        .fold(0.0, f64::max);
    let tau = traj.tau_plus.event().unwrap_or(f64::NAN);
    let pass = traj.status == Status::HitNode && max_q < 1e-10 && (tau - PI / 2.0).abs() < 1e-6;
    report(
        3,
        "central trajectory",
        pass,
        &format!(
            "status {}, max |Q| {max_q:.1e}, tau+ - pi/2 = {:.2e}",
            traj.status.name(),
            tau - PI / 2.0
        ),
    );
}

#[test]
fn a04_periodicity_and_reflection() {
    let _g = lock();
    let s = state();
    let n = 400;
    let dt = PI / n as f64;
    let cfg = IntegratorConfig::default();
    let run = |q0: f64| {
        integrate_sampled(
            &s,
            &Point::new1(q0),
            0.0,
            2.0 * PI,
            &cfg,
            &Sampling::Uniform(dt),
        )
        .unwrap()
    };
    let (plus, minus) = (run(0.5), run(-0.5));
    let complete = plus.status == Status::Completed && minus.status == Status::Completed;
    let at = |tr: &bohmian::integrator::Trajectory, k: usize| -> f64 {
        tr.samples
            .iter()
            .find(|p| (p.t - k as f64 * dt).abs() < 1e-9)
            .map_or(f64::NAN, |p| p.q[0])
    };
    let period = (0..=n)
        .map(|k| (at(&plus, k + n) - at(&plus, k)).abs())
        .fold(0.0, f64::max);
    let mirror = (0..=2 * n)
        .map(|k| (at(&minus, k) + at(&plus, k)).abs())
        .fold(0.0, f64::max);
    let pass = complete && period < 1e-6 && mirror < 1e-8;
    report(
        4,
        "periodicity and reflection",
        pass,
        &format!("max |Q(t+pi) - Q(t)| {period:.2e}, max |Q_-(t) + Q_+(t)| {mirror:.2e}"),
    );
}

#[test]
fn a05_equivariance() {
    let _g = lock();
    let s = state();
    let start = Instant::now();
    let n = 100_000;
    let ens = sample_initial(&s, n, 20_240_601).unwrap();
    let times = [PI / 8.0, PI / 4.0, PI / 2.0, PI];
    let out = propagate_ensemble_to_times(&ens, &s, &times, &IntegratorConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(120);
    let mut parts = Vec::new();
    for e in &out {
        let ks = ks_distance(e, &s).unwrap();
        pass &= ks.passes() && e.terminated_fraction() < 1e-3;
        parts.push(format!(
            "t={:.3}: D={:.4}/{:.4} term={:.1e}",
            e.t,
            ks.ks,
            ks.critical,
            e.terminated_fraction()
        ));
    }
    report(
        5,
        "equivariance",
        pass,
        &format!("{}, {elapsed:.1?}", parts.join("; ")),
    );
}

#[test]
fn a06_quantile_oracle() {
    let _g = lock();
    let s = state();
    let t = PI / 4.0;
    let crossers = [-1.0, 0.0, 1.0];
    let starts: Vec<f64> = (0..49)
        .map(|k| -3.0 + 6.0 * (k as f64 + 0.5) / 49.0)
        .filter(|q: &f64| crossers.iter().all(|c| (q - c).abs() > 1e-9))
        .collect();
    let cfg = IntegratorConfig::default();
    let mut worst: f64 = 0.0;
    let mut complete = true;
    for &q0 in &starts {
        let tr = integrate_sampled(&s, &Point::new1(q0), 0.0, t, &cfg, &Sampling::Steps).unwrap();
        complete &= tr.status == Status::Completed;
        worst = worst.max((tr.last().q[0] - quantile_transport(&s, q0, t).unwrap()).abs());
    }
    report(
        6,
        "quantile oracle",
        complete && worst < 1e-5,
        &format!("{} starts, sup |ODE - quantile| {worst:.2e}", starts.len()),
    );
}

#[test]
fn a07_energy_moments() {
    let _g = lock();
    let s = state();
    let (h, h2) = (
        energy_expectation(&s).unwrap(),
        energy_moment(&s, 1).unwrap(),
    );
    let e = s.natural_extent()[0];
    let grid = Grid::periodic_1d(e.0, e.1, 512).unwrap();
    let g = WaveFunction::Grid(s.to_grid_state(&grid, 0.0, DEFAULT_CAP).unwrap());
    let (gh, gh2) = (
        energy_expectation(&g).unwrap(),
        energy_moment(&g, 1).unwrap(),
    );
    let pass = (h - 11.0 / 6.0).abs() < 1e-9
        && (h2 - 17.0 / 4.0).abs() < 1e-9
        && (gh - 11.0 / 6.0).abs() < 1e-6
        && (gh2 - 17.0 / 4.0).abs() < 1e-6;
    report(
        7,
        "energy moments",
        pass,
        &format!(
            "<H> {:.1e}, <H^2> {:.1e} off exact; grid {:.1e}, {:.1e}",
            h - 11.0 / 6.0,
            h2 - 4.25,
            gh - 11.0 / 6.0,
            gh2 - 4.25
        ),
    );
}

#[test]
fn a08_propagator_fidelity() {
    let _g = lock();
    let s = state();
    let e = s.natural_extent()[0];
    let grid = Grid::periodic_1d(e.0, e.1, 512).unwrap();
    let initial = s.to_grid_state(&grid, 0.0, DEFAULT_CAP).unwrap();
    let t = PI / 2.0;
    let exact = evolve_analytic(&s, t).unwrap().sample(&grid, 0.0).unwrap();
    let run = |dt: f64| {
        let cfg = PropagatorConfig {
            dt,
            ..Default::default()
        };
        evolve_splitstep(&initial, t, &cfg).unwrap()
    };
    let (coarse, fine) = (run(1e-3), run(5e-4));
    let err = coarse.field().max_abs_diff(&exact);
    let err_fine = fine.field().max_abs_diff(&exact);
    let norm = |f: &bohmian::field::ComplexField| {
        f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.cell_volume()
    };
    let drift = (norm(coarse.field()) - norm(initial.field())).abs();
    let ratio = err / err_fine;
    let pass = err < 1e-6 && drift < 1e-10 && (3.0..=5.0).contains(&ratio);
    report(
        8,
        "propagator fidelity",
        pass,
        &format!("max error {err:.2e}, norm drift {drift:.1e}, dt-halving ratio {ratio:.3}"),
    );
}

#[test]
fn a09_continuity_identity() {
    let _g = lock();
    let s = state();
    let mut worst: f64 = 0.0;
    for &q in &[-2.5, -1.3, -0.4, 0.3, 0.9, 1.7] {
        for &t in &[0.2, 1.0, 2.5] {
            let r = continuity_residual(&s, &Point::new1(q), t).unwrap();
            worst = worst.max(r.current_form).max(r.density_form.unwrap_or(0.0));
        }
    }
    let e = s.natural_extent()[0];
    let t = PI / 4.0;
    let grid_residual = |n: usize, dt: f64| {
        let grid = Grid::periodic_1d(e.0, e.1, n).unwrap();
        let initial = s.to_grid_state(&grid, 0.0, DEFAULT_CAP).unwrap();
        let cfg = PropagatorConfig {
            dt,
            ..Default::default()
        };
        grid_continuity_residual(&initial, t, &cfg).unwrap()
    };
    let (coarse, fine) = (grid_residual(256, 0.01), grid_residual(512, 0.005));
    let pass = worst < 1e-8 && coarse / fine >= 4.0;
    report(
        9,
        "continuity identity",
        pass,
        &format!(
            "analytic {worst:.1e}; grid {coarse:.2e} -> {fine:.2e} (x{:.2})",
            coarse / fine
        ),
    );
}

#[test]
fn a10_flux_bound() {
    let _g = lock();
    let s = state();
    let start = Instant::now();
    let specs = RegionSpec::ladder(&[0.2, 0.1, 0.05], 0.1, 10.0, PI);
    let reps = bad_event_ladder(&s, &specs, 20_000, 7, &BoundOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let n: Vec<f64> = reps.iter().map(|r| r.n_term).collect();
    let decreasing = n.windows(2).all(|w| w[1] < w[0]) && n[2] < n[0] / 2.0;
    let holds = reps.iter().all(|r| r.valid && r.bound_holds());
    let rungs: Vec<String> = reps
        .iter()
        .map(|r| {
            format!(
                "eps {}: N {:.3e} bound {:.3e} mc {:.4}+-{:.4}",
                r.parameters.eps, r.n_term, r.total_bound, r.mc_estimate, r.mc_half_width
            )
        })
        .collect();
    report(
        10,
        "flux bound",
        decreasing && holds && elapsed < Duration::from_secs(300),
        &format!("{}; {elapsed:.1?}", rungs.join("; ")),
    );
}

#[test]
fn a11_crossing_bound() {
    let _g = lock();
    let s = state();
    let t = PI / 4.0;
    let slice = flux_through_surface(&s, &Surface::time_slice(&s, t), &FluxQuadrature::default())
        .unwrap()
        .value;
    let circle = Surface::circle(SpacetimePoint::new(Point::new1(1.0), 0.0), 0.1);
    let flux = flux_through_surface(&s, &circle, &FluxQuadrature::default())
        .unwrap()
        .value;
    let mc = mc_crossings(
        &s,
        &circle,
        (-0.2, 0.2),
        20_000,
        11,
        &IntegratorConfig::default(),
        1e-3,
    )
    .unwrap();
    let pass = (slice - 1.0).abs() < 1e-8 && mc.mean <= flux + mc.half_width;
    report(
        11,
        "crossing bound",
        pass,
        &format!(
            "slice flux - 1 = {:.1e}; circle flux {flux:.4e}, mc crossings {:.4e} +- {:.1e}",
            slice - 1.0,
            mc.mean,
            mc.half_width
        ),
    );
}

#[test]
fn a12_greens_identity() {
    let _g = lock();
    let s = state();
    let t = 0.7;
    let coarse = greens_identity_residual(&s, t, 6.0, 0.1, 0.3)
        .unwrap()
        .residual;
    let fine = greens_identity_residual(&s, t, 6.0, 0.1, 0.15)
        .unwrap()
        .residual;
    let pass = coarse < 1e-6 && fine < 1e-6 && fine * 4.0 <= coarse;
    report(
        12,
        "greens identity",
        pass,
        &format!("residual {coarse:.2e} -> {fine:.2e} on halving the spacing"),
    );
}

#[test]
fn a13_determinism() {
    let _g = lock();
    let mut identical = true;
    let mut files = 0;
    for command in [
        Command::Trajectories,
        Command::Ensemble,
        Command::FluxAudit,
        Command::Nodes,
    ] {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let mut outputs = Vec::new();
        for d in &dirs {
            let mut c = ScenarioConfig {
                output_dir: Some(d.path().to_path_buf()),
                ..Default::default()
            };
            c.ensemble.count = 20_000;
            c.ensemble.write_points = true;
            let c = c.resolved(command).unwrap();
            let out = run_scenario(&c).unwrap();
            let mut bytes = Vec::new();
            for f in out
                .files
                .iter()
                .filter(|f| !f.ends_with("config.resolved.json"))
            {
                bytes.push((f.file_name().unwrap().to_owned(), std::fs::read(f).unwrap()));
            }
            outputs.push(bytes);
        }
        files += outputs[0].len();
        identical &= outputs[0] == outputs[1];
    }
    report(
        13,
        "determinism",
        identical,
        &format!("{files} artifacts compared byte for byte"),
    );
}
