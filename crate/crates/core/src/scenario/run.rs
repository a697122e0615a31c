use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::{Command, ScenarioConfig};
use crate::equivariance::{
    propagate_ensemble_to_times, quantile_transport, sample_initial, write_ensemble_csv,
    EnsembleSummary,
};
use crate::error::{Error, Result};
use crate::field::{quadrature, DensityKind, Grid, Point};
use crate::flux::{
    bad_event_ladder, find_nodal_set, greens_identity_residual, NodalResolution, NodalWindow,
};
use crate::integrator::{
    integrate_sampled, integrate_trajectory, write_trajectories_csv, IntegratorConfig, Sampling,
    Status, Tau, Trajectory, TrajectorySample,
};
use crate::propagator::{energy_expectation, energy_moment, evolve_splitstep, Scheme};
use crate::state::{GaussianPacket, GridState, HarmonicExpansion, Preset, Units, WaveFunction};

/// Files written by a run and its summary.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

/// The named scenario state with the configured constants.
pub fn build_state(config: &ScenarioConfig) -> Result<WaveFunction> {
    let c = &config.constants;
    let units = Units {
        hbar: c.hbar,
        masses: vec![c.mass],
    };
    let s = PI.powf(0.25);
    Ok(match Preset::from_name(&config.scenario)? {
        Preset::NodeSuperposition => WaveFunction::Analytic(HarmonicExpansion::new(
            units,
            c.omega,
            &[
                (Complex64::new(s, 0.0), vec![0]),
                (Complex64::new(-2f64.sqrt() * s, 0.0), vec![2]),
            ],
        )?),
        Preset::Ground => WaveFunction::Analytic(HarmonicExpansion::new(
            units,
            c.omega,
            &[(Complex64::new(1.0, 0.0), vec![0])],
        )?),
        Preset::GaussianPacket => WaveFunction::Packet(GaussianPacket::new(-2.0, 1.0, 1.0, units)?),
    })
}

/// Runs the configured command, writing the resolved config, the command's
/// artifacts and `summary.json` to the output directory.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutcome> {
    let (Some(command), Some(dir)) = (config.command, config.output_dir.clone()) else {
        return Err(Error::Config("run_scenario needs a resolved config".into()));
    };
    config.validate()?;
    let state = build_state(config)?;
    fs::create_dir_all(&dir).map_err(|e| {
        Error::Input(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })?;
    let mut out = Output {
        dir,
        files: Vec::new(),
    };
    out.write("config.resolved.json", |w| {
        Ok(w.write_all(config.to_json()?.as_bytes())?)
    })?;
    let body = match command {
        Command::Trajectories => trajectories(config, &state, &mut out)?,
        Command::Ensemble => ensemble(config, &state, &mut out)?,
        Command::FluxAudit => flux_audit(config, &state, &mut out)?,
        Command::Nodes => nodes(config, &state, &mut out)?,
        Command::QuantileCheck => quantile_check(config, &state, &mut out)?,
        Command::Evolve => evolve(config, &state, &mut out)?,
    };
    let summary = json!({
        "command": command.name(),
        "scenario": config.scenario,
        "result": body,
    });
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    out.write("summary.json", |w| Ok(w.write_all(text.as_bytes())?))?;
    Ok(RunOutcome {
        output_dir: out.dir,
        files: out.files,
        summary,
    })
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
    ) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write(name, |w| Ok(w.write_all(text.as_bytes())?))
    }
}

fn fmt_tau(t: Tau) -> String {
    match t {
        Tau::Event(t) => t.to_string(),
        Tau::Censored => "inf".into(),
        Tau::NotExplored => String::new(),
    }
}

fn is_node(state: &WaveFunction, q: &Point, t: f64, cfg: &IntegratorConfig) -> Result<bool> {
    Ok(state.psi(q, t)?.norm() <= cfg.node_eps * state.amplitude_scale())
}

/// Start points of the fan: evenly spaced points plus the origin and the
/// nodes of `psi_0` inside the fan range.
pub fn fan_start_points(config: &ScenarioConfig, state: &WaveFunction) -> Result<Vec<f64>> {
    let tr = &config.trajectories;
    if let Some(q0) = &tr.q0 {
        return Ok(q0.clone());
    }
    let (lo, hi) = tr.fan_range;
    let mut pts: Vec<f64> = (0..tr.fan_count)
        .map(|k| lo + (hi - lo) * k as f64 / (tr.fan_count - 1) as f64)
        .collect();
    if tr.include_node_crossers && state.dim() == 1 {
        pts.push(0.0);
        let (t0, t1) = state.time_range();
        let window = NodalWindow::new(vec![(lo, hi)], ((-0.05f64).max(t0), 0.05f64.min(t1)));
        if window.t.0 < window.t.1 {
            let set = find_nodal_set(state, &window, &NodalResolution::default())?;
            pts.extend(
                set.nodes
                    .iter()
                    .filter(|n| n.point.t.abs() < 1e-9)
                    .map(|n| n.point.q[0]),
            );
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(pts)
}

/// Path of a one-dimensional trajectory starting at a node, from quantile
/// transport, ended at the next node it touches.
fn transported_path(state: &WaveFunction, q0: f64, horizon: f64, dt: f64) -> Result<Trajectory> {
    let dir = horizon.signum();
    let n = (horizon.abs() / dt + 1e-9).floor() as usize;
    let scale = state.amplitude_scale();
    let units = state.units().clone();
    let sample = |t: f64| -> Result<TrajectorySample> {
        let q = Point::new1(if t == 0.0 {
            q0
        } else {
            quantile_transport(state, q0, t)?
        });
        let jet = state.jet(&q, t)?;
        let v = if jet.psi.norm() > 0.0 {
            jet.velocity(&units)
        } else {
            Point::new1(f64::NAN)
        };
        Ok(TrajectorySample {
            t,
            q,
            psi_abs: jet.psi.norm(),
            v,
        })
    };
    let times: Vec<f64> = (0..=n).map(|k| dir * k as f64 * dt).collect();
    let samples: Vec<TrajectorySample> = times
        .par_iter()
        .map(|&t| sample(t))
        .collect::<Result<_>>()?;
    let amp = |t: f64| -> Result<f64> {
        let q = quantile_transport(state, q0, t)?;
        Ok(state.psi(&Point::new1(q), t)?.norm())
    };
    // first interior local minimum of |psi| along the path that reaches a node
    let mut end = None;
    for k in 1..samples.len().saturating_sub(1) {
        let (a, b, c) = (
            samples[k - 1].psi_abs,
            samples[k].psi_abs,
            samples[k + 1].psi_abs,
        );
        if b <= a && b <= c {
            let (mut lo, mut hi) = (times[k - 1], times[k + 1]);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            while (hi - lo).abs() > 1e-13 {
                let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
                if amp(x1)? < amp(x2)? {
                    hi = x2;
                } else {
                    lo = x1;
                }
            }
            let tau = 0.5 * (lo + hi);
            if amp(tau)? < NODE_TOUCH * scale {
                end = Some(tau);
                break;
            }
        }
    }
    let (status, tau_plus, samples) = match end {
        Some(tau) => {
            let mut s: Vec<TrajectorySample> = samples
                .into_iter()
                .filter(|s| dir * s.t < dir * tau)
                .collect();
            s.push(sample(tau)?);
            (Status::HitNode, Tau::Event(tau), s)
        }
        None => (Status::Completed, Tau::Censored, samples),
    };
    Ok(Trajectory {
        q0: Point::new1(q0),
        t0: 0.0,
        horizon,
        samples,
        status,
        tau_minus: Tau::Event(0.0),
        tau_plus,
        accepted_steps: 0,
        rejected_steps: 0,
    })
}

/// `|psi|` along a transported path, relative to `sup |psi|`, below which
/// the path is taken to touch a node. Near a node the CDF is cubic, so
/// quantile inversion fixes positions there only to about `1e-4`.
pub const NODE_TOUCH: f64 = 1e-3;

fn trajectories(config: &ScenarioConfig, state: &WaveFunction, out: &mut Output) -> Result<Value> {
    let tr = &config.trajectories;
    let starts = fan_start_points(config, state)?;
    let runs: Vec<(Trajectory, &str)> = starts
        .par_iter()
        .map(|&q0| -> Result<(Trajectory, &str)> {
            let q = Point::new1(q0);
            if state.dim() == 1 && is_node(state, &q, 0.0, &config.integrator)? {
                Ok((
                    transported_path(state, q0, tr.horizon, tr.sample_dt)?,
                    "quantile",
                ))
            } else {
                let t = integrate_sampled(
                    state,
                    &q,
                    0.0,
                    tr.horizon,
                    &config.integrator,
                    &Sampling::Uniform(tr.sample_dt),
                )?;
                Ok((t, "ode"))
            }
        })
        .collect::<Result<_>>()?;
    let paths: Vec<Trajectory> = runs.iter().map(|(t, _)| t.clone()).collect();
    out.write("trajectories.csv", |w| write_trajectories_csv(w, &paths))?;
    out.write("events.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record([
            "trajectory",
            "q0",
            "method",
            "status",
            "tau_minus",
            "tau_plus",
            "end_time",
            "end_q",
        ])?;
        for (id, (t, m)) in runs.iter().enumerate() {
            c.write_record([
                id.to_string(),
                t.q0[0].to_string(),
                m.to_string(),
                t.status.name().to_string(),
                fmt_tau(t.tau_minus),
                fmt_tau(t.tau_plus),
                t.end_time().to_string(),
                t.last().q[0].to_string(),
            ])?;
        }
        c.flush()?;
        Ok(())
    })?;
    let touching: Vec<Value> = runs
        .iter()
        .filter(|(t, _)| t.status == Status::HitNode)
        .map(|(t, m)| json!({"q0": t.q0[0], "method": m, "tau_minus": t.tau_minus.event(), "tau_plus": t.tau_plus.event()}))
        .collect();
    Ok(json!({
        "trajectories": runs.len(),
        "horizon": tr.horizon,
        "sample_dt": tr.sample_dt,
        "node_touching": touching,
    }))
}

fn ensemble(config: &ScenarioConfig, state: &WaveFunction, out: &mut Output) -> Result<Value> {
    let e = &config.ensemble;
    let initial = sample_initial(state, e.count, e.seed)?;
    let mut ensembles = vec![initial.clone()];
    ensembles.extend(propagate_ensemble_to_times(
        &initial,
        state,
        &e.times,
        &config.integrator,
    )?);
    let summaries: Vec<EnsembleSummary> = ensembles
        .iter()
        .map(|x| EnsembleSummary::new(x, state))
        .collect::<Result<_>>()?;
    if e.write_points {
        out.write("ensemble.csv", |w| write_ensemble_csv(w, &ensembles))?;
    }
    let passes = summaries
        .iter()
        .all(|s| matches!((s.ks, s.critical), (Some(k), Some(c)) if k < c) || s.ks.is_none());
    Ok(json!({ "times": summaries, "ks_passes": passes }))
}

fn flux_audit(config: &ScenarioConfig, state: &WaveFunction, out: &mut Output) -> Result<Value> {
    let f = &config.flux;
    let reports = bad_event_ladder(
        state,
        &f.specs(),
        f.mc,
        f.seed,
        &f.options(&config.integrator),
    )?;
    out.json("flux_report.json", &reports)?;
    let greens = match greens_identity_residual(state, 0.0, f.r, f.delta, f.greens_spacing) {
        Ok(g) => json!(g),
        Err(Error::Input(msg)) => json!({ "skipped": msg }),
        Err(e) => return Err(e),
    };
    let rungs: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "eps": r.parameters.eps,
                "total_bound": r.total_bound,
                "mc_estimate": r.mc_estimate,
                "mc_half_width": r.mc_half_width,
                "bound_holds": r.bound_holds(),
                "valid": r.valid,
            })
        })
        .collect();
    Ok(json!({
        "rungs": rungs,
        "all_hold": reports.iter().all(|r| r.bound_holds()),
        "greens_identity": greens,
    }))
}

fn nodes(config: &ScenarioConfig, state: &WaveFunction, out: &mut Output) -> Result<Value> {
    let n = &config.nodes;
    let set = find_nodal_set(state, &n.window(), &n.resolution)?;
    out.write("nodes.csv", |w| set.write_csv(w))?;
    Ok(json!({
        "window": set.window,
        "count": set.nodes.len(),
        "codimension": set.codimension,
        "unresolved": set.unresolved.len(),
        "nodes": set.nodes,
    }))
}

fn quantile_check(
    config: &ScenarioConfig,
    state: &WaveFunction,
    out: &mut Output,
) -> Result<Value> {
    if state.dim() != 1 {
        return Err(Error::Input("the quantile check is one-dimensional".into()));
    }
    let qc = &config.quantile;
    let (lo, hi) = qc.range;
    let starts: Vec<f64> = (0..qc.points)
        .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / qc.points as f64)
        .collect();
    let rows: Vec<(f64, std::result::Result<(f64, f64), String>)> = starts
        .par_iter()
        .map(|&q0| -> Result<_> {
            let q = Point::new1(q0);
            if is_node(state, &q, 0.0, &config.integrator)? {
                return Ok((q0, Err("starts-at-node".to_string())));
            }
            let tr = integrate_trajectory(state, &q, 0.0, qc.t, &config.integrator)?;
            if tr.status != Status::Completed {
                return Ok((q0, Err(tr.status.name().to_string())));
            }
            Ok((
                q0,
                Ok((tr.last().q[0], quantile_transport(state, q0, qc.t)?)),
            ))
        })
        .collect::<Result<_>>()?;
    out.write("quantile.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["q0", "ode", "quantile", "abs_diff", "excluded"])?;
        for (q0, r) in &rows {
            match r {
                Ok((a, b)) => c.write_record([
                    q0.to_string(),
                    a.to_string(),
                    b.to_string(),
                    (a - b).abs().to_string(),
                    String::new(),
                ])?,
                Err(why) => c.write_record([
                    q0.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    why.clone(),
                ])?,
            }
        }
        c.flush()?;
        Ok(())
    })?;
    let max = rows
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let excluded: Vec<Value> = rows
        .iter()
        .filter_map(|(q0, r)| r.as_ref().err().map(|why| json!({"q0": q0, "reason": why})))
        .collect();
    Ok(json!({
        "t": qc.t,
        "compared": rows.len() - excluded.len(),
        "max_abs_diff": max,
        "tolerance": qc.tolerance,
        "passes": max < qc.tolerance,
        "excluded": excluded,
    }))
}

fn scenario_grid(config: &ScenarioConfig, state: &WaveFunction) -> Result<Grid> {
    let (lo, hi) = config.grid.extent.unwrap_or_else(|| {
        let e = state.natural_extent();
        (
            e.iter().map(|r| r.0).fold(f64::INFINITY, f64::min),
            e.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max),
        )
    });
    if state.dim() == 1 {
        Grid::periodic_1d(lo, hi, config.grid.points)
    } else {
        Grid::periodic_2d(lo, hi, config.grid.points)
    }
}

fn evolve(config: &ScenarioConfig, state: &WaveFunction, out: &mut Output) -> Result<Value> {
    let t = config.evolve.t;
    let grid = scenario_grid(config, state)?;
    let exact = state.sample(&grid, t)?;
    let initial = GridState::new(
        state.sample(&grid, 0.0)?,
        state.potential(),
        config.propagator.cap,
    )?;
    let field = match config.propagator.scheme {
        Scheme::Analytic => exact.clone(),
        Scheme::SplitStep => evolve_splitstep(&initial, t, &config.propagator)?
            .field()
            .clone(),
    };
    out.write("field.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=grid.dim()).map(|k| format!("q_{k}")).collect();
        header.extend(["re", "im", "abs2"].map(String::from));
        c.write_record(&header)?;
        for (q, v) in grid.points().zip(field.values()) {
            let mut row: Vec<String> = q.as_slice().iter().map(|x| x.to_string()).collect();
            row.extend([v.re.to_string(), v.im.to_string(), v.norm_sqr().to_string()]);
            c.write_record(&row)?;
        }
        c.flush()?;
        Ok(())
    })?;
    let norm0 = quadrature(initial.field(), DensityKind::AbsSquared)?;
    let norm = quadrature(&field, DensityKind::AbsSquared)?;
    let grid_state = WaveFunction::Grid(GridState::new(
        field.clone(),
        state.potential(),
        config.propagator.cap,
    )?);
    Ok(json!({
        "t": t,
        "scheme": config.propagator.scheme,
        "points": grid.len(),
        "norm": norm,
        "norm_drift": (norm - norm0).abs(),
        "max_abs_error": field.max_abs_diff(&exact),
        "energy": energy_expectation(state)?,
        "energy_squared": energy_moment(state, 1)?,
        "grid_energy": energy_expectation(&grid_state)?,
        "grid_energy_squared": energy_moment(&grid_state, 1)?,
    }))
}

/// Reads a run's `summary.json`.
pub fn read_summary(dir: &Path) -> Result<Value> {
    let text = fs::read_to_string(dir.join("summary.json"))?;
    Ok(serde_json::from_str(&text)?)
}
