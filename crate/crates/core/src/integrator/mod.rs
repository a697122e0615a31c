//! Integration of the guiding equation `dQ/dt = v(Q, t)` with event detection.

mod dopri;
mod output;

pub use output::write_trajectories_csv;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Point;
use crate::state::{Jet, Potential, WaveFunction, NODE_THRESHOLD};
use dopri::{Dense, A, C, E};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Node event threshold on `|psi|`, relative to the state's amplitude scale.
    pub node_eps: f64,
    /// Escape event radius; defaults to the state's half-extent minus one.
    pub escape_radius: Option<f64>,
    /// Singular event threshold on the distance to the singular set.
    pub sing_dist: f64,
    pub max_step: f64,
    /// Steps shorter than this end the integration with [`Status::StepCollapse`].
    pub min_step: f64,
    /// Width to which event times are refined.
    pub event_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            node_eps: 1e-7,
            escape_radius: None,
            sing_dist: 1e-6,
            max_step: 0.1,
            min_step: 1e-14,
            event_tol: 1e-10,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("node_eps", self.node_eps),
            ("sing_dist", self.sing_dist),
            ("max_step", self.max_step),
            ("min_step", self.min_step),
            ("event_tol", self.event_tol),
            ("escape_radius", self.escape_radius.unwrap_or(1.0)),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }

    /// Escape radius used for `state`.
    pub fn resolved_escape_radius(&self, state: &WaveFunction) -> f64 {
        self.escape_radius
            .unwrap_or_else(|| default_escape_radius(state))
    }
}

/// Radius of the largest origin-centred ball inside the state's extent, minus one.
pub fn default_escape_radius(state: &WaveFunction) -> f64 {
    state
        .natural_extent()
        .iter()
        .map(|&(lo, hi)| lo.abs().min(hi.abs()))
        .fold(f64::INFINITY, f64::min)
        - 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Reached the time horizon.
    Completed,
    HitNode,
    HitSingularPotential,
    Escaped,
    /// The step size fell below the minimum without an event.
    StepCollapse,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Completed => "completed",
            Status::HitNode => "hit-node",
            Status::HitSingularPotential => "hit-singular-potential",
            Status::Escaped => "escaped",
            Status::StepCollapse => "step-collapse",
        }
    }

    /// Termination at a node, the singular set or infinity.
    pub fn is_bad_event(self) -> bool {
        matches!(
            self,
            Status::HitNode | Status::HitSingularPotential | Status::Escaped
        )
    }
}

/// One end of a maximal existence interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tau {
    /// Time of a terminating event.
    Event(f64),
    /// No event up to the horizon; stands for an infinite end.
    Censored,
    /// This direction was not integrated.
    NotExplored,
}

impl Tau {
    pub fn event(self) -> Option<f64> {
        match self {
            Tau::Event(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub q: Point,
    pub psi_abs: f64,
    /// Velocity, not finite at a node sample.
    pub v: Point,
}

/// Where samples are recorded along a trajectory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Every accepted step.
    #[default]
    Steps,
    /// Every `dt` time units from the start, via the continuous extension.
    Uniform(f64),
    /// At the listed times, which must be ordered away from the start.
    Times(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub q0: Point,
    pub t0: f64,
    /// Signed horizon: integration covers `[t0, t0 + horizon]`.
    pub horizon: f64,
    /// Starts with `(t0, q0)`; the last entry is the event point if one fired.
    pub samples: Vec<TrajectorySample>,
    pub status: Status,
    pub tau_minus: Tau,
    pub tau_plus: Tau,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples
            .last()
            .expect("trajectories hold at least the initial sample")
    }

    /// Time at which integration stopped.
    pub fn end_time(&self) -> f64 {
        match self.status {
            Status::Completed => self.t0 + self.horizon,
            _ => self.last().t,
        }
    }

    /// Sample recorded at exactly time `t`, if any.
    pub fn sample_at(&self, t: f64) -> Option<&TrajectorySample> {
        self.samples.iter().find(|s| s.t == t)
    }
}

enum Stage {
    Regular(Jet, Point),
    Irregular,
}

struct Integrator<'a> {
    state: &'a WaveFunction,
    potential: Potential,
    cfg: &'a IntegratorConfig,
    t0: f64,
    dir: f64,
    node_level: f64,
    regular_level: f64,
    escape_radius: f64,
}

struct Event {
    sigma: f64,
    status: Status,
}

impl Integrator<'_> {
    fn time(&self, sigma: f64) -> f64 {
        self.t0 + self.dir * sigma
    }

    fn jet(&self, y: &Point, sigma: f64) -> Result<Option<Jet>> {
        match self.state.jet(y, self.time(sigma)) {
            Ok(j) => Ok(Some(j)),
            Err(Error::OutOfDomain { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Jet and `dQ/dsigma` at a stage point.
    fn stage(&self, y: &Point, sigma: f64) -> Result<Stage> {
        let Some(jet) = self.jet(y, sigma)? else {
            return Ok(Stage::Irregular);
        };
        if jet.psi.norm() <= self.regular_level {
            return Ok(Stage::Irregular);
        }
        let v = jet.velocity(self.state.units());
        if !v.is_finite() {
            return Ok(Stage::Irregular);
        }
        Ok(Stage::Regular(jet, v.scale(self.dir)))
    }

    fn sample(&self, sigma: f64, y: Point, jet: &Jet) -> TrajectorySample {
        TrajectorySample {
            t: self.time(sigma),
            q: y,
            psi_abs: jet.psi.norm(),
            v: jet.velocity(self.state.units()),
        }
    }

    /// `d/dsigma |psi|^2` along the interpolant.
    fn density_slope(&self, dense: &Dense, sigma: f64) -> Result<Option<f64>> {
        let y = dense.position(sigma);
        let Some(jet) = self.jet(&y, sigma)? else {
            return Ok(None);
        };
        let dy = dense.derivative(sigma);
        let mut d = jet.dt * self.dir;
        for a in 0..y.dim() {
            d += jet.grad[a] * dy[a];
        }
        Ok(Some(2.0 * (jet.psi.conj() * d).re))
    }

    fn node_gap(&self, dense: &Dense, sigma: f64) -> Result<f64> {
        let y = dense.position(sigma);
        Ok(match self.jet(&y, sigma)? {
            Some(j) => j.psi.norm() - self.node_level,
            None => f64::INFINITY,
        })
    }

    fn singular_gap(&self, dense: &Dense, sigma: f64) -> f64 {
        self.potential.distance_to_singular(&dense.position(sigma)) - self.cfg.sing_dist
    }

    fn escape_gap(&self, dense: &Dense, sigma: f64) -> f64 {
        self.escape_radius - dense.position(sigma).norm()
    }

    /// Smallest `sigma` in `(a, b]` with `gap <= 0`, given `gap(a) > 0 >= gap(b)`.
    fn bisect(
        &self,
        mut a: f64,
        mut b: f64,
        mut gap: impl FnMut(f64) -> Result<f64>,
    ) -> Result<f64> {
        while b - a > self.cfg.event_tol {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if gap(m)? <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        Ok(b)
    }

    fn detect_events(
        &self,
        dense: &Dense,
        slope_start: f64,
        slope_end: f64,
    ) -> Result<Option<Event>> {
        let (a, b) = (dense.s, dense.end());
        let mut found: Vec<Event> = Vec::new();

        let mut node_bracket = None;
        if self.node_gap(dense, b)? <= 0.0 {
            node_bracket = Some(b);
        } else if slope_start < 0.0 && slope_end > 0.0 {
            // |psi| dips inside the step: locate the minimum
            let (mut lo, mut hi) = (a, b);
            while hi - lo > self.cfg.event_tol {
                let m = 0.5 * (lo + hi);
                if m <= lo || m >= hi {
                    break;
                }
                match self.density_slope(dense, m)? {
                    Some(d) if d < 0.0 => lo = m,
                    _ => hi = m,
                }
            }
            if self.node_gap(dense, hi)? <= 0.0 {
                node_bracket = Some(hi);
            }
        }
        if let Some(end) = node_bracket {
            let sigma = self.bisect(a, end, |s| self.node_gap(dense, s))?;
            found.push(Event {
                sigma,
                status: Status::HitNode,
            });
        }
        if self.potential.is_singular() {
            let mid = 0.5 * (a + b);
            for end in [mid, b] {
                if self.singular_gap(dense, end) <= 0.0 {
                    let sigma = self.bisect(a, end, |s| Ok(self.singular_gap(dense, s)))?;
                    found.push(Event {
                        sigma,
                        status: Status::HitSingularPotential,
                    });
                    break;
                }
            }
        }
        if self.escape_gap(dense, b) <= 0.0 {
            let sigma = self.bisect(a, b, |s| Ok(self.escape_gap(dense, s)))?;
            found.push(Event {
                sigma,
                status: Status::Escaped,
            });
        }
        Ok(found.into_iter().min_by(|x, y| x.sigma.total_cmp(&y.sigma)))
    }

    fn error_norm(&self, y0: &Point, y1: &Point, err: &Point) -> f64 {
        let d = y0.dim();
        let mut acc = 0.0;
        for a in 0..d {
            let sc = self.cfg.abs_tol + self.cfg.rel_tol * y0[a].abs().max(y1[a].abs());
            acc += (err[a] / sc).powi(2);
        }
        (acc / d as f64).sqrt()
    }
}

/// Integrates the guiding equation from `(q0, t0)` over the signed time span `horizon`.
///
/// Integration stops at the first node, singular or escape event, refined
/// to `event_tol`; negative horizons integrate backward in time.
pub fn integrate_trajectory(
    state: &WaveFunction,
    q0: &Point,
    t0: f64,
    horizon: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_sampled(state, q0, t0, horizon, config, &Sampling::Steps)
}

/// As [`integrate_trajectory`] with a choice of sample times.
pub fn integrate_sampled(
    state: &WaveFunction,
    q0: &Point,
    t0: f64,
    horizon: f64,
    config: &IntegratorConfig,
    sampling: &Sampling,
) -> Result<Trajectory> {
    config.validate()?;
    if !(t0.is_finite() && horizon.is_finite()) {
        return Err(Error::Input("start time and horizon must be finite".into()));
    }
    if q0.dim() != state.dim() || !q0.is_finite() {
        return Err(Error::Input(format!(
            "start point {q0:?} is not a finite point of dimension {}",
            state.dim()
        )));
    }
    let scale = state.amplitude_scale();
    let it = Integrator {
        state,
        potential: state.potential(),
        cfg: config,
        t0,
        dir: if horizon < 0.0 { -1.0 } else { 1.0 },
        node_level: config.node_eps * scale,
        regular_level: NODE_THRESHOLD * scale,
        escape_radius: config.resolved_escape_radius(state),
    };
    let span = horizon.abs();

    // requested output positions in sigma
    let outputs: Vec<f64> = match sampling {
        Sampling::Steps => Vec::new(),
        Sampling::Uniform(dt) => {
            if !(dt.is_finite() && *dt > 0.0) {
                return Err(Error::Config(format!(
                    "sample interval must be positive, got {dt}"
                )));
            }
            let n = (span / dt + 1e-9).floor() as usize;
            (1..=n).map(|k| (k as f64 * dt).min(span)).collect()
        }
        Sampling::Times(ts) => {
            let sig: Vec<f64> = ts.iter().map(|t| it.dir * (t - t0)).collect();
            if sig
                .iter()
                .any(|s| !(*s > 0.0 && *s <= span * (1.0 + 1e-15)))
                || sig.windows(2).any(|w| w[1] <= w[0])
            {
                return Err(Error::Input(
                    "sample times must lie strictly inside the horizon, ordered away from the start".into(),
                ));
            }
            sig.into_iter().map(|s| s.min(span)).collect()
        }
    };

    let start = it.stage(q0, 0.0)?;
    let (jet0, mut k_first) = match start {
        Stage::Regular(j, v) if j.psi.norm() > it.node_level => (j, v),
        _ => {
            return Err(Error::Precondition(format!(
                "start point {q0:?} at t = {t0} is at or too close to a node"
            )))
        }
    };
    if it.potential.distance_to_singular(q0) <= config.sing_dist {
        return Err(Error::Precondition(format!(
            "start point {q0:?} lies on the singular set"
        )));
    }
    if q0.norm() >= it.escape_radius {
        return Err(Error::Precondition(format!(
            "start point {q0:?} lies outside the escape radius {}",
            it.escape_radius
        )));
    }

    let mut traj = Trajectory {
        q0: *q0,
        t0,
        horizon,
        samples: vec![it.sample(0.0, *q0, &jet0)],
        status: Status::Completed,
        tau_minus: Tau::NotExplored,
        tau_plus: Tau::NotExplored,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let mut next_output = 0;
    let mut sigma = 0.0;
    let mut y = *q0;
    let mut jet = jet0;
    let mut h = config.max_step.min(1e-3).min(span.max(f64::MIN_POSITIVE));
    let mut status = Status::Completed;
    let mut event_sigma = None;

    'outer: while sigma < span {
        if traj.accepted_steps + traj.rejected_steps >= config.max_steps {
            status = Status::StepCollapse;
            break;
        }
        let last = h >= span - sigma;
        if last {
            h = span - sigma;
        }
        h = h.min(config.max_step);
        let mut k = [Point::zeros(y.dim()); 7];
        k[0] = k_first;
        let mut end_jet = None;
        let mut y_new = y;
        for i in 1..7 {
            let mut yi = y;
            for j in 0..i {
                if A[i][j] != 0.0 {
                    yi = yi.add_scaled(h * A[i][j], &k[j]);
                }
            }
            let si = if i == 6 && last {
                span
            } else {
                sigma + C[i] * h
            };
            match it.stage(&yi, si)? {
                Stage::Regular(j, v) => {
                    k[i] = v;
                    if i == 6 {
                        end_jet = Some(j);
                        y_new = yi;
                    }
                }
                Stage::Irregular => {
                    traj.rejected_steps += 1;
                    h *= 0.25;
                    if h < config.min_step {
                        status = Status::StepCollapse;
                        break 'outer;
                    }
                    continue 'outer;
                }
            }
        }
        let mut err = Point::zeros(y.dim());
        for (i, e) in E.iter().enumerate() {
            if *e != 0.0 {
                err = err.add_scaled(h * e, &k[i]);
            }
        }
        let en = it.error_norm(&y, &y_new, &err);
        if !(en <= 1.0) {
            traj.rejected_steps += 1;
            h *= if en.is_finite() {
                (0.9 * en.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            if h < config.min_step {
                status = Status::StepCollapse;
                break;
            }
            continue;
        }
        traj.accepted_steps += 1;
        let sigma_new = if last { span } else { sigma + h };
        let dense = Dense::new(sigma, sigma_new - sigma, &y, &y_new, &k);
        let end_jet = end_jet.expect("regular final stage");
        let slope = |j: &Jet, v: &Point| {
            let mut d = j.dt * it.dir;
            for a in 0..v.dim() {
                d += j.grad[a] * v[a];
            }
            2.0 * (j.psi.conj() * d).re
        };
        let event = it.detect_events(&dense, slope(&jet, &k[0]), slope(&end_jet, &k[6]))?;

        while next_output < outputs.len() {
            let s = outputs[next_output];
            let within = match &event {
                Some(e) => s < e.sigma,
                None => s <= sigma_new,
            };
            if !within {
                break;
            }
            next_output += 1;
            if s == sigma_new {
                traj.samples.push(it.sample(s, y_new, &end_jet));
            } else {
                let p = dense.position(s);
                if let Some(j) = it.jet(&p, s)? {
                    traj.samples.push(it.sample(s, p, &j));
                }
            }
        }
        if let Some(e) = event {
            let p = dense.position(e.sigma);
            let j = it.jet(&p, e.sigma)?.unwrap_or(end_jet);
            traj.samples.push(it.sample(e.sigma, p, &j));
            status = e.status;
            event_sigma = Some(e.sigma);
            break;
        }
        if matches!(sampling, Sampling::Steps) {
            traj.samples.push(it.sample(sigma_new, y_new, &end_jet));
        }
        sigma = sigma_new;
        y = y_new;
        jet = end_jet;
        k_first = k[6];
        h *= if en == 0.0 {
            5.0
        } else {
            (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
        };
    }

    traj.status = status;
    let tau = match (status, event_sigma) {
        (Status::Completed, _) => Tau::Censored,
        (_, Some(s)) => Tau::Event(it.time(s)),
        _ => Tau::Event(it.time(sigma)),
    };
    if it.dir > 0.0 {
        traj.tau_plus = tau;
    } else {
        traj.tau_minus = tau;
    }
    Ok(traj)
}

/// `(tau_minus, tau_plus)` from integrating `|horizon|` backward and forward.
pub fn maximal_interval(
    state: &WaveFunction,
    q0: &Point,
    t0: f64,
    horizon: f64,
    config: &IntegratorConfig,
) -> Result<(Tau, Tau)> {
    let span = horizon.abs();
    let fwd = integrate_trajectory(state, q0, t0, span, config)?;
    let bwd = integrate_trajectory(state, q0, t0, -span, config)?;
    Ok((bwd.tau_minus, fwd.tau_plus))
}

#[cfg(test)]
mod tests;
