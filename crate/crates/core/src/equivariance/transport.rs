use num_complex::Complex64;
use serde::Serialize;

use super::sampling::density_cdf;
use crate::error::{Error, Result};
use crate::field::{spectral_derivative, ComplexField, Point};
use crate::propagator::{PropagatorConfig, SplitStepper};
use crate::state::{GridState, WaveFunction};

/// Tolerance on the CDF mismatch of a transported point.
pub const TRANSPORT_TOLERANCE: f64 = 1e-12;

/// The point `Q` with `int_{-inf}^{Q} |psi_t|^2 = int_{-inf}^{q0} |psi_0|^2`.
pub fn quantile_transport(state: &WaveFunction, q0: f64, t: f64) -> Result<f64> {
    quantile_transport_between(state, q0, 0.0, t)
}

/// As [`quantile_transport`] with the initial density taken at `t0`.
pub fn quantile_transport_between(state: &WaveFunction, q0: f64, t0: f64, t: f64) -> Result<f64> {
    if state.dim() != 1 {
        return Err(Error::Input("quantile transport is one-dimensional".into()));
    }
    if !q0.is_finite() {
        return Err(Error::Input(format!("start point {q0} is not finite")));
    }
    if t == t0 {
        return Ok(q0);
    }
    let before = density_cdf(state, t0)?;
    let (lo, hi) = before.extent();
    if q0 < lo || q0 > hi {
        return Err(Error::OutOfDomain {
            position: vec![q0],
            extent: vec![(lo, hi)],
        });
    }
    let u = before.cdf(q0);
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return Err(Error::Input(format!("quantile {u} lies outside (0, 1)")));
    }
    density_cdf(state, t)?.quantile(u.clamp(0.0, 1.0), TRANSPORT_TOLERANCE)
}

/// Residuals of the two forms of the continuity equation at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuityResidual {
    /// `|d_t rho + div(rho v)|` with `rho = |psi|^2`; absent at nodes.
    pub density_form: Option<f64>,
    /// `|d_t |psi|^2 + div j|`.
    pub current_form: f64,
}

/// Time step of the five-point stencil for `d_t |psi|^2`.
pub const TIME_STEP: f64 = 1e-3;

/// Continuity residuals from a five-point centred time difference and exact
/// (closed-form) or spectral (grid) space derivatives.
pub fn continuity_residual(state: &WaveFunction, q: &Point, t: f64) -> Result<ContinuityResidual> {
    let d = TIME_STEP;
    let rho = |s: f64| -> Result<f64> { Ok(state.psi(q, t + s)?.norm_sqr()) };
    let drho = (rho(-2.0 * d)? - 8.0 * rho(-d)? + 8.0 * rho(d)? - rho(2.0 * d)?) / (12.0 * d);
    let jet = state.jet(q, t)?;
    let units = state.units();
    let mut div_j = 0.0;
    let mut div_rho_v = 0.0;
    let regular = jet.psi.norm() > state.node_threshold();
    for a in 0..q.dim() {
        let c = units.hbar / units.masses[a];
        div_j += c * (jet.psi.conj() * jet.second[a]).im;
        if regular {
            let g = jet.grad[a] / jet.psi;
            let v = c * g.im;
            let dv = c * (jet.second[a] / jet.psi - g * g).im;
            let drho_a = 2.0 * (jet.psi.conj() * jet.grad[a]).re;
            div_rho_v += v * drho_a + jet.density() * dv;
        }
    }
    Ok(ContinuityResidual {
        density_form: regular.then(|| (drho + div_rho_v).abs()),
        current_form: (drho + div_j).abs(),
    })
}

/// Grid-averaged `|d_t |psi|^2 + div j|` for a split-step evolution to `t`.
///
/// The time derivative is the centred difference of the snapshots one step
/// before and after `t`; `div j` is spectral.
pub fn grid_continuity_residual(
    initial: &GridState,
    t: f64,
    config: &PropagatorConfig,
) -> Result<f64> {
    config.validate()?;
    let span = t - initial.time();
    if span <= 0.0 {
        return Err(Error::Input(
            "the residual time must follow the initial time".into(),
        ));
    }
    let steps = (span / config.dt).round().max(1.0) as usize;
    let dt = span / steps as f64;
    let stepper = SplitStepper::new(initial, dt, config.cap)?;
    let mut values = initial.field().values().to_vec();
    stepper.advance(&mut values, steps - 1);
    let before: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
    stepper.step(&mut values);
    let now = ComplexField::new(initial.grid().clone(), values.clone(), t)?;
    stepper.step(&mut values);
    let after: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();

    let units = &initial.potential().units;
    let grid = initial.grid();
    let mut div_j = vec![0.0; grid.len()];
    for a in 0..grid.dim() {
        let grad = spectral_derivative(&now, a)?;
        let c = units.hbar / units.masses[a];
        let j = ComplexField::new(
            grid.clone(),
            now.values()
                .iter()
                .zip(grad.values())
                .map(|(p, g)| Complex64::new(c * (p.conj() * g).im, 0.0))
                .collect(),
            t,
        )?;
        let dj = spectral_derivative(&j, a)?;
        for (acc, v) in div_j.iter_mut().zip(dj.values()) {
            *acc += v.re;
        }
    }
    let total: f64 = (0..grid.len())
        .map(|i| ((after[i] - before[i]) / (2.0 * dt) + div_j[i]).abs())
        .sum();
    Ok(total / grid.len() as f64)
}
