//! Time evolution: exact phase propagation of closed-form states, Strang
//! split-step propagation of grid states, and energy moments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{quadrature, ComplexField, DensityKind, SpectralPlan};
use crate::state::{GridHistory, GridState, Potential, WaveFunction, DEFAULT_CAP};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    Analytic,
    SplitStep,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorConfig {
    /// Largest time step; the actual step divides the interval evenly.
    pub dt: f64,
    pub scheme: Scheme,
    /// Bound applied to `|V|` on the grid.
    pub cap: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            dt: 1e-3,
            scheme: Scheme::SplitStep,
            cap: DEFAULT_CAP,
        }
    }
}

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.cap.is_nan() || self.cap <= 0.0 {
            return Err(Error::Config(format!(
                "cap must be positive, got {}",
                self.cap
            )));
        }
        Ok(())
    }
}

/// `U_t psi`: the closed-form state advanced by `t`, re-based so that its
/// value at time `s` equals the original value at time `t + s`.
pub fn evolve_analytic(state: &WaveFunction, t: f64) -> Result<WaveFunction> {
    if !t.is_finite() {
        return Err(Error::Input(format!("time {t} is not finite")));
    }
    match state {
        WaveFunction::Analytic(s) => Ok(WaveFunction::Analytic(s.evolved(t))),
        WaveFunction::Packet(s) => Ok(WaveFunction::Packet(s.evolved(t))),
        _ => Err(Error::Input(
            "analytic evolution needs a closed-form state".into(),
        )),
    }
}

/// Strang splitting `e^{-iV dt/2} e^{-iT dt} e^{-iV dt/2}` on a fixed periodic grid.
pub struct SplitStepper {
    plan: SpectralPlan,
    dt: f64,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    cap: f64,
    potential: Potential,
}

impl SplitStepper {
    /// Prepares the propagators for step `dt` (negative steps run backward).
    pub fn new(state: &GridState, dt: f64, cap: f64) -> Result<Self> {
        let potential = state.potential().clone();
        if potential.is_singular() && !cap.is_finite() {
            return Err(Error::Config(
                "singular potentials need a finite cap for split-step propagation".into(),
            ));
        }
        let grid = state.grid();
        let plan = SpectralPlan::new(grid);
        let hbar = potential.units.hbar;
        let half_potential = grid
            .points()
            .map(|p| {
                let v = potential.capped_value(&p, cap);
                Complex64::from_polar(1.0, -v * dt / (2.0 * hbar))
            })
            .collect();
        let masses = &potential.units.masses;
        let phase = |k: f64, m: f64| hbar * k * k / (2.0 * m);
        let kinetic = match grid.dim() {
            1 => plan
                .wavenumbers(0)
                .iter()
                .map(|&k| Complex64::from_polar(1.0, -phase(k, masses[0]) * dt))
                .collect(),
            _ => {
                let (kx, ky) = (plan.wavenumbers(0), plan.wavenumbers(1));
                let mut out = Vec::with_capacity(kx.len() * ky.len());
                for &a in kx {
                    for &b in ky {
                        out.push(Complex64::from_polar(
                            1.0,
                            -(phase(a, masses[0]) + phase(b, masses[1])) * dt,
                        ));
                    }
                }
                out
            }
        };
        Ok(SplitStepper {
            plan,
            dt,
            half_potential,
            kinetic,
            cap,
            potential,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `values` by one step in place.
    pub fn step(&self, values: &mut [Complex64]) {
        for (v, p) in values.iter_mut().zip(&self.half_potential) {
            *v *= p;
        }
        let dim = self.plan.grid().dim();
        for a in 0..dim {
            self.plan.forward(values, a);
        }
        for (v, k) in values.iter_mut().zip(&self.kinetic) {
            *v *= k;
        }
        for a in 0..dim {
            self.plan.inverse(values, a);
        }
        for (v, p) in values.iter_mut().zip(&self.half_potential) {
            *v *= p;
        }
    }

    /// Applies `steps` steps starting from the sample at time `t0`.
    pub fn advance(&self, values: &mut [Complex64], steps: usize) {
        for _ in 0..steps {
            self.step(values);
        }
    }

    fn to_state(&self, values: Vec<Complex64>, t: f64) -> Result<GridState> {
        let field = ComplexField::new(self.plan.grid().clone(), values, t)?;
        GridState::with_plan(field, self.potential.clone(), self.cap, &self.plan)
    }
}

fn step_count(span: f64, dt: f64) -> usize {
    let n = (span.abs() / dt - 1e-9).ceil();
    n.max(1.0) as usize
}

/// Propagates a grid state to `t_final` with steps no longer than `config.dt`.
pub fn evolve_splitstep(
    state: &GridState,
    t_final: f64,
    config: &PropagatorConfig,
) -> Result<GridState> {
    config.validate()?;
    if !t_final.is_finite() {
        return Err(Error::Input(format!("final time {t_final} is not finite")));
    }
    let span = t_final - state.time();
    if span == 0.0 {
        return Ok(state.clone());
    }
    let steps = step_count(span, config.dt);
    let stepper = SplitStepper::new(state, span / steps as f64, config.cap)?;
    let mut values = state.field().values().to_vec();
    stepper.advance(&mut values, steps);
    stepper.to_state(values, t_final)
}

/// Propagates to `t_final`, keeping snapshots every `interval` time units.
///
/// `t_final - t0` must be a whole number of intervals.
pub fn evolve_splitstep_history(
    state: &GridState,
    t_final: f64,
    interval: f64,
    config: &PropagatorConfig,
) -> Result<GridHistory> {
    config.validate()?;
    if !(interval.is_finite() && interval > 0.0) {
        return Err(Error::Config(format!(
            "snapshot interval must be positive, got {interval}"
        )));
    }
    let span = t_final - state.time();
    let count = (span.abs() / interval).round();
    if count < 3.0 || (count * interval - span.abs()).abs() > 1e-9 * interval.max(span.abs()) {
        return Err(Error::Config(format!(
            "history span {span} must be at least three whole intervals of {interval}"
        )));
    }
    let count = count as usize;
    let signed = span / count as f64;
    let steps = step_count(signed, config.dt);
    let stepper = SplitStepper::new(state, signed / steps as f64, config.cap)?;
    let mut values = state.field().values().to_vec();
    let mut snaps = vec![state.clone()];
    for k in 1..=count {
        stepper.advance(&mut values, steps);
        snaps.push(stepper.to_state(values.clone(), state.time() + k as f64 * signed)?);
    }
    GridHistory::new(snaps)
}

/// `<psi | H^{2n} psi> = || H^n psi ||^2` for `n >= 1`.
///
/// Exact for eigen-expansions; for grid states `H` is applied spectrally
/// with the capped potential.
pub fn energy_moment(state: &WaveFunction, n: i32) -> Result<f64> {
    if n < 1 {
        return Err(Error::Input(format!(
            "moment order must be at least 1, got {n}"
        )));
    }
    energy_power(state, 2 * n as u32)
}

/// `<psi | H psi>`.
pub fn energy_expectation(state: &WaveFunction) -> Result<f64> {
    energy_power(state, 1)
}

fn energy_power(state: &WaveFunction, p: u32) -> Result<f64> {
    match state {
        WaveFunction::Analytic(s) => Ok(s.energy_power(p)),
        WaveFunction::Packet(s) => {
            // |phi(k)|^2 is normal with mean k0 and standard deviation 1 / (2 sigma)
            let (hbar, m) = (s.units().hbar, s.units().masses[0]);
            let sd = 0.5 / s.sigma;
            let n = 8000;
            let (lo, hi) = (s.k0 - 14.0 * sd, s.k0 + 14.0 * sd);
            let h = (hi - lo) / n as f64;
            let norm = 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt());
            let sum: f64 = (0..n)
                .map(|i| {
                    let k = lo + (i as f64 + 0.5) * h;
                    let w = norm * (-(k - s.k0).powi(2) / (2.0 * sd * sd)).exp();
                    w * (hbar * hbar * k * k / (2.0 * m)).powi(p as i32)
                })
                .sum();
            Ok(sum * h)
        }
        WaveFunction::Grid(s) => grid_energy_power(s, p),
        WaveFunction::History(h) => grid_energy_power(&h.snapshots()[0], p),
    }
}

fn grid_energy_power(state: &GridState, p: u32) -> Result<f64> {
    let plan = SpectralPlan::new(state.grid());
    let mut cur = state.h_psi().clone();
    let half = p / 2;
    for _ in 1..half.max(1) {
        cur = apply_h(&plan, state, &cur)?;
    }
    if p == 1 {
        let prod = ComplexField::new(
            state.grid().clone(),
            state
                .field()
                .values()
                .iter()
                .zip(cur.values())
                .map(|(a, b)| a.conj() * b)
                .collect(),
            state.time(),
        )?;
        return quadrature(&prod, DensityKind::Real);
    }
    if p % 2 == 1 {
        let next = apply_h(&plan, state, &cur)?;
        let prod = ComplexField::new(
            state.grid().clone(),
            cur.values()
                .iter()
                .zip(next.values())
                .map(|(a, b)| a.conj() * b)
                .collect(),
            state.time(),
        )?;
        return quadrature(&prod, DensityKind::Real);
    }
    quadrature(&cur, DensityKind::AbsSquared)
}

/// `H f` on the grid of `state`, with its capped potential.
fn apply_h(plan: &SpectralPlan, state: &GridState, f: &ComplexField) -> Result<ComplexField> {
    let units = &state.potential().units;
    let mut out: Vec<Complex64> = f
        .values()
        .iter()
        .zip(state.potential_samples())
        .map(|(v, p)| v * p)
        .collect();
    for a in 0..f.grid().dim() {
        let d2 = plan.second_derivative(f, a)?;
        let c = units.hbar * units.hbar / (2.0 * units.masses[a]);
        for (o, d) in out.iter_mut().zip(d2.values()) {
            *o -= d * c;
        }
    }
    ComplexField::new(f.grid().clone(), out, f.time())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, Point};
    use crate::state::{HarmonicExpansion, Preset, Units};
    use std::f64::consts::PI;

    fn nodes() -> WaveFunction {
        Preset::NodeSuperposition.build()
    }

    fn norm(s: &GridState) -> f64 {
        quadrature(s.field(), DensityKind::AbsSquared).unwrap()
    }

    #[test]
    fn analytic_evolution_is_consistent_with_evaluation() {
        let s = nodes();
        let q = Point::new1(0.77);
        let same = evolve_analytic(&s, 0.0).unwrap();
        assert_eq!(same.psi(&q, 0.3).unwrap(), s.psi(&q, 0.3).unwrap());
        let e = evolve_analytic(&s, PI).unwrap();
        for i in 0..30 {
            let q = Point::new1(-2.5 + 0.17 * i as f64);
            let a = e.psi(&q, 0.0).unwrap();
            let b = s.psi(&q, 0.0).unwrap();
            assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-14);
            let (va, vb) = (
                crate::state::velocity(&e, &q, 0.2).unwrap(),
                crate::state::velocity(&s, &q, 0.2).unwrap(),
            );
            if let (Some(x), Some(y)) = (va.v, vb.v) {
                assert!((x[0] - y[0]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigenstate_density_is_stationary() {
        let s = WaveFunction::Analytic(
            HarmonicExpansion::new(
                Units::natural(1),
                1.0,
                &[(Complex64::new(1.0, 0.0), vec![2])],
            )
            .unwrap(),
        );
        let e = evolve_analytic(&s, 1.234).unwrap();
        for &q in &[-1.0, 0.2, 2.5] {
            let p = Point::new1(q);
            assert!(
                (e.psi(&p, 0.0).unwrap().norm() - s.psi(&p, 0.0).unwrap().norm()).abs() < 1e-15
            );
        }
        assert!((energy_moment(&s, 3).unwrap() - 2.5f64.powi(6)).abs() < 1e-9);
    }

    #[test]
    fn grid_states_need_split_step() {
        let g = Grid::periodic_1d(-12.0, 12.0, 64).unwrap();
        let gs = WaveFunction::Grid(nodes().to_grid_state(&g, 0.0, 1e4).unwrap());
        assert!(matches!(evolve_analytic(&gs, 1.0), Err(Error::Input(_))));
    }

    #[test]
    fn free_packet_matches_closed_form() {
        let s = Preset::GaussianPacket.build();
        let g = Grid::periodic_1d(-20.0, 20.0, 512).unwrap();
        let gs = s.to_grid_state(&g, 0.0, 1e4).unwrap();
        let out = evolve_splitstep(
            &gs,
            1.0,
            &PropagatorConfig {
                dt: 1e-3,
                ..Default::default()
            },
        )
        .unwrap();
        let exact = s.sample(&g, 1.0).unwrap();
        assert!(out.field().max_abs_diff(&exact) < 1e-6);
        assert!((norm(&out) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_duration_returns_input() {
        let g = Grid::periodic_1d(-12.0, 12.0, 64).unwrap();
        let gs = nodes().to_grid_state(&g, 0.25, 1e4).unwrap();
        let out = evolve_splitstep(&gs, 0.25, &PropagatorConfig::default()).unwrap();
        assert_eq!(out.field(), gs.field());
    }

    #[test]
    fn superposition_tracks_the_exact_propagator() {
        let s = nodes();
        let g = Grid::periodic_1d(-12.0, 12.0, 256).unwrap();
        let gs = s.to_grid_state(&g, 0.0, 1e4).unwrap();
        let t = 0.5;
        let exact = s.sample(&g, t).unwrap();
        let err = |dt: f64| {
            let out = evolve_splitstep(
                &gs,
                t,
                &PropagatorConfig {
                    dt,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!((norm(&out) - 1.0).abs() < 1e-10);
            out.field().max_abs_diff(&exact)
        };
        let (e1, e2) = (err(0.01), err(0.005));
        assert!(e1 / e2 > 3.0 && e1 / e2 < 5.0, "{e1} -> {e2}");
    }

    #[test]
    fn backward_evolution_inverts_forward() {
        let g = Grid::periodic_2d(-8.0, 8.0, 32).unwrap();
        let s = WaveFunction::Analytic(
            HarmonicExpansion::new(
                Units::natural(2),
                1.0,
                &[
                    (Complex64::new(1.0, 0.0), vec![0, 1]),
                    (Complex64::new(0.0, 1.0), vec![1, 0]),
                ],
            )
            .unwrap(),
        );
        let gs = s.to_grid_state(&g, 0.0, 1e4).unwrap();
        let cfg = PropagatorConfig {
            dt: 0.01,
            ..Default::default()
        };
        let fwd = evolve_splitstep(&gs, 0.3, &cfg).unwrap();
        let back = evolve_splitstep(&fwd, 0.0, &cfg).unwrap();
        assert!(back.field().max_abs_diff(gs.field()) < 1e-12);
    }

    #[test]
    fn uncapped_singular_potential_is_rejected() {
        use crate::state::PotentialKind;
        let g = Grid::periodic_1d(-8.0, 8.0, 64).unwrap();
        let v = Potential::new(
            PotentialKind::PointSingular {
                centers: vec![Point::new1(0.05)],
                couplings: vec![1.0],
            },
            Units::natural(1),
        )
        .unwrap();
        let field = nodes().sample(&g, 0.0).unwrap();
        let gs = GridState::new(field, v, 1e4).unwrap();
        let cfg = PropagatorConfig {
            cap: f64::INFINITY,
            ..Default::default()
        };
        assert!(matches!(
            evolve_splitstep(&gs, 0.1, &cfg),
            Err(Error::Config(_))
        ));
        let capped = evolve_splitstep(&gs, 0.01, &PropagatorConfig::default()).unwrap();
        assert!((norm(&capped) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn energy_moments_of_the_superposition() {
        let s = nodes();
        assert!((energy_expectation(&s).unwrap() - 11.0 / 6.0).abs() < 1e-12);
        assert!((energy_moment(&s, 1).unwrap() - 17.0 / 4.0).abs() < 1e-12);
        let g = Grid::periodic_1d(-12.0, 12.0, 256).unwrap();
        let gs = WaveFunction::Grid(s.to_grid_state(&g, 0.0, 1e4).unwrap());
        assert!((energy_expectation(&gs).unwrap() - 11.0 / 6.0).abs() < 1e-8);
        assert!((energy_moment(&gs, 1).unwrap() - 17.0 / 4.0).abs() < 1e-8);
        assert!((energy_moment(&gs, 2).unwrap() - energy_moment(&s, 2).unwrap()).abs() < 1e-6);
        for n in 1..=5 {
            assert!(energy_moment(&s, n).unwrap().is_finite());
        }
        assert!(matches!(energy_moment(&s, 0), Err(Error::Input(_))));
    }

    #[test]
    fn packet_energy_from_momentum_distribution() {
        let s = Preset::GaussianPacket.build();
        // <k^2> = k0^2 + 1/(4 sigma^2) with k0 = sigma = 1
        assert!((energy_expectation(&s).unwrap() - 0.5 * 1.25).abs() < 1e-12);
        let g = Grid::periodic_1d(-25.0, 25.0, 512).unwrap();
        let gs = WaveFunction::Grid(s.to_grid_state(&g, 0.0, 1e4).unwrap());
        for n in 1..=2 {
            let a = energy_moment(&s, n).unwrap();
            assert!((energy_moment(&gs, n).unwrap() - a).abs() < 1e-8 * a.max(1.0));
        }
    }

    #[test]
    fn moments_drift_little_under_split_step() {
        let s = nodes();
        let g = Grid::periodic_1d(-12.0, 12.0, 256).unwrap();
        let gs = s.to_grid_state(&g, 0.0, 1e4).unwrap();
        let out = evolve_splitstep(
            &gs,
            1.0,
            &PropagatorConfig {
                dt: 1e-3,
                ..Default::default()
            },
        )
        .unwrap();
        let before = energy_moment(&WaveFunction::Grid(gs), 1).unwrap();
        let after = energy_moment(&WaveFunction::Grid(out), 1).unwrap();
        assert!((before - after).abs() < 1e-6);
    }

    #[test]
    fn history_snapshots_are_evenly_spaced() {
        let s = nodes();
        let g = Grid::periodic_1d(-12.0, 12.0, 128).unwrap();
        let gs = s.to_grid_state(&g, 0.0, 1e4).unwrap();
        let h = evolve_splitstep_history(
            &gs,
            0.4,
            0.1,
            &PropagatorConfig {
                dt: 0.01,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(h.snapshots().len(), 5);
        assert!((h.snapshots()[4].time() - 0.4).abs() < 1e-15);
        assert!(evolve_splitstep_history(&gs, 0.45, 0.1, &PropagatorConfig::default()).is_err());
    }
}
