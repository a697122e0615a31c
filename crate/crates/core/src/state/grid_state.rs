use num_complex::Complex64;

use super::{Jet, Potential};
use crate::error::{Error, Result};
use crate::field::{
    axis_weights, interpolate_with, ComplexField, Grid, Point, SpectralPlan, Stencil,
};

/// Relative tolerance when matching a query time to a snapshot timestamp.
const TIME_MATCH: f64 = 1e-12;

/// A wave function sampled on a periodic grid at one instant, with its
/// spectral derivatives and `H psi` precomputed for off-grid evaluation.
#[derive(Clone, Debug)]
pub struct GridState {
    field: ComplexField,
    potential: Potential,
    cap: f64,
    potential_samples: Vec<f64>,
    grad: Vec<ComplexField>,
    second: Vec<ComplexField>,
    hpsi: ComplexField,
    stencil: Stencil,
}

impl GridState {
    /// Wraps `field` with `potential` sampled on the grid and clipped to `[-cap, cap]`.
    pub fn new(field: ComplexField, potential: Potential, cap: f64) -> Result<Self> {
        let plan = SpectralPlan::new(field.grid());
        Self::with_plan(field, potential, cap, &plan)
    }

    pub(crate) fn with_plan(
        field: ComplexField,
        potential: Potential,
        cap: f64,
        plan: &SpectralPlan,
    ) -> Result<Self> {
        let grid = field.grid().clone();
        if grid.dim() != potential.dim() {
            return Err(Error::Config(format!(
                "grid has dimension {} but potential has dimension {}",
                grid.dim(),
                potential.dim()
            )));
        }
        if !grid.is_periodic() {
            return Err(Error::Config("grid states need a periodic grid".into()));
        }
        if let Some(a) = potential.singular_set().iter().find(|a| !grid.contains(a)) {
            return Err(Error::Config(format!(
                "singular point {a:?} lies outside the grid"
            )));
        }
        let potential_samples = sample_potential(&grid, &potential, cap)?;
        field.check_finite()?;
        let dim = grid.dim();
        let grad: Vec<ComplexField> = (0..dim)
            .map(|a| plan.derivative(&field, a))
            .collect::<Result<_>>()?;
        let second: Vec<ComplexField> = (0..dim)
            .map(|a| plan.second_derivative(&field, a))
            .collect::<Result<_>>()?;
        let units = &potential.units;
        let mut hpsi = field.map(|_| Complex64::new(0.0, 0.0));
        for (i, h) in hpsi.values_mut().iter_mut().enumerate() {
            let mut kin = Complex64::new(0.0, 0.0);
            for (a, s) in second.iter().enumerate() {
                kin -= s.values()[i] * (units.hbar * units.hbar / (2.0 * units.masses[a]));
            }
            *h = kin + field.values()[i] * potential_samples[i];
        }
        Ok(GridState {
            field,
            potential,
            cap,
            potential_samples,
            grad,
            second,
            hpsi,
            stencil: Stencil::default(),
        })
    }

    pub fn with_stencil(mut self, stencil: Stencil) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn field(&self) -> &ComplexField {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn time(&self) -> f64 {
        self.field.time()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Capped potential at each grid point.
    pub fn potential_samples(&self) -> &[f64] {
        &self.potential_samples
    }

    /// `H psi` on the grid.
    pub fn h_psi(&self) -> &ComplexField {
        &self.hpsi
    }

    pub fn gradient(&self, axis: usize) -> &ComplexField {
        &self.grad[axis]
    }

    pub fn amplitude_scale(&self) -> f64 {
        self.field.max_abs()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let ts = self.time();
        if (t - ts).abs() > TIME_MATCH * ts.abs().max(1.0) {
            return Err(Error::Precondition(format!(
                "grid state is sampled at t = {ts}, queried at t = {t}"
            )));
        }
        Ok(())
    }

    pub fn psi(&self, q: &Point, t: f64) -> Result<Complex64> {
        self.check_time(t)?;
        interpolate_with(&self.field, q, self.stencil)
    }

    pub fn jet(&self, q: &Point, t: f64) -> Result<Jet> {
        self.check_time(t)?;
        self.jet_at(q)
    }

    fn jet_at(&self, q: &Point) -> Result<Jet> {
        let grid = self.grid();
        let dim = grid.dim();
        if q.dim() != dim {
            return Err(Error::Input(format!(
                "query has dimension {} but grid has dimension {dim}",
                q.dim()
            )));
        }
        let outside = || Error::OutOfDomain {
            position: q.to_vec(),
            extent: grid.extent(),
        };
        let wx = axis_weights(grid.axis(0), q[0], self.stencil).ok_or_else(outside)?;
        let wy = if dim == 2 {
            Some(axis_weights(grid.axis(1), q[1], self.stencil).ok_or_else(outside)?)
        } else {
            None
        };
        let eval = |f: &ComplexField| -> Complex64 {
            let v = f.values();
            match &wy {
                None => (0..wx.len).map(|j| v[wx.idx[j]] * wx.w[j]).sum(),
                Some(wy) => {
                    let ny = grid.axis(1).n;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..wx.len {
                        let row = wx.idx[a] * ny;
                        let inner: Complex64 =
                            (0..wy.len).map(|b| v[row + wy.idx[b]] * wy.w[b]).sum();
                        acc += inner * wx.w[a];
                    }
                    acc
                }
            }
        };
        let mut jet = Jet::zero(dim);
        jet.psi = eval(&self.field);
        for a in 0..dim {
            jet.grad[a] = eval(&self.grad[a]);
            jet.second[a] = eval(&self.second[a]);
        }
        jet.dt = eval(&self.hpsi) * Complex64::new(0.0, -1.0 / self.potential.units.hbar);
        Ok(jet)
    }
}

fn sample_potential(grid: &Grid, potential: &Potential, cap: f64) -> Result<Vec<f64>> {
    if cap.is_nan() || cap <= 0.0 {
        return Err(Error::Config(format!(
            "potential cap must be positive, got {cap}"
        )));
    }
    let samples: Vec<f64> = grid
        .points()
        .map(|p| potential.capped_value(&p, cap))
        .collect();
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(
            "potential is unbounded on the grid; set a finite cap".into(),
        ));
    }
    Ok(samples)
}

/// Grid snapshots at uniformly spaced times, interpolated in time with a
/// four-point Lagrange stencil.
#[derive(Clone, Debug)]
pub struct GridHistory {
    snapshots: Vec<GridState>,
    t0: f64,
    dt: f64,
}

impl GridHistory {
    pub fn new(snapshots: Vec<GridState>) -> Result<Self> {
        if snapshots.len() < 4 {
            return Err(Error::Input(format!(
                "a grid history needs at least 4 snapshots, got {}",
                snapshots.len()
            )));
        }
        let t0 = snapshots[0].time();
        let dt = snapshots[1].time() - t0;
        if dt == 0.0 {
            return Err(Error::Input("snapshot times must be distinct".into()));
        }
        for (k, s) in snapshots.iter().enumerate() {
            if s.grid() != snapshots[0].grid() {
                return Err(Error::Input("snapshots must share one grid".into()));
            }
            let expect = t0 + k as f64 * dt;
            if (s.time() - expect).abs() > 1e-9 * dt.abs().max(1e-300) * (k as f64 + 1.0) {
                return Err(Error::Input(format!(
                    "snapshot {k} at t = {} breaks the uniform spacing {dt}",
                    s.time()
                )));
            }
        }
        Ok(GridHistory { snapshots, t0, dt })
    }

    pub fn snapshots(&self) -> &[GridState] {
        &self.snapshots
    }

    pub fn time_range(&self) -> (f64, f64) {
        let t1 = self.snapshots.last().map(|s| s.time()).unwrap_or(self.t0);
        (self.t0.min(t1), self.t0.max(t1))
    }

    pub fn grid(&self) -> &Grid {
        self.snapshots[0].grid()
    }

    pub fn potential(&self) -> &Potential {
        self.snapshots[0].potential()
    }

    pub fn amplitude_scale(&self) -> f64 {
        self.snapshots
            .iter()
            .map(|s| s.amplitude_scale())
            .fold(0.0, f64::max)
    }

    /// Snapshot indices and Lagrange weights for time `t`.
    fn time_stencil(&self, t: f64) -> Result<([usize; 4], [f64; 4], usize)> {
        let (lo, hi) = self.time_range();
        let slack = 1e-12 * self.dt.abs();
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::Input(format!(
                "time {t} lies outside the history [{lo}, {hi}]"
            )));
        }
        let n = self.snapshots.len();
        let u = (t - self.t0) / self.dt;
        let k = u.round();
        if (u - k).abs() < 1e-9 {
            let k = (k as i64).clamp(0, n as i64 - 1) as usize;
            return Ok(([k, 0, 0, 0], [1.0, 0.0, 0.0, 0.0], 1));
        }
        let base = (u.floor() as i64 - 1).clamp(0, n as i64 - 4) as usize;
        let mut idx = [0; 4];
        let mut w = [0.0; 4];
        for j in 0..4 {
            idx[j] = base + j;
            let mut wj = 1.0;
            for m in 0..4 {
                if m != j {
                    wj *= (u - (base + m) as f64) / ((base + j) as f64 - (base + m) as f64);
                }
            }
            w[j] = wj;
        }
        Ok((idx, w, 4))
    }

    pub fn jet(&self, q: &Point, t: f64) -> Result<Jet> {
        let (idx, w, len) = self.time_stencil(t)?;
        let mut out = Jet::zero(self.grid().dim());
        for j in 0..len {
            let jet = self.snapshots[idx[j]].jet_at(q)?;
            out.add_scaled(w[j], &jet);
        }
        Ok(out)
    }

    pub fn psi(&self, q: &Point, t: f64) -> Result<Complex64> {
        let (idx, w, len) = self.time_stencil(t)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..len {
            let s = &self.snapshots[idx[j]];
            acc += interpolate_with(&s.field, q, s.stencil)? * w[j];
        }
        Ok(acc)
    }
}
