use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GaussianPacket, GridHistory, GridState, HarmonicExpansion, Potential, Units};
use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid, Point};

/// Relative node threshold: points with `|psi| <= NODE_THRESHOLD * amplitude_scale` are irregular.
pub const NODE_THRESHOLD: f64 = 1e-9;

/// `psi` and its first derivatives at one space-time point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub dim: usize,
    pub psi: Complex64,
    pub grad: [Complex64; 2],
    /// Diagonal second derivatives `d^2 psi / d q_a^2`.
    pub second: [Complex64; 2],
    pub dt: Complex64,
}

impl Jet {
    pub fn zero(dim: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Jet {
            dim,
            psi: z,
            grad: [z; 2],
            second: [z; 2],
            dt: z,
        }
    }

    pub(crate) fn add_scaled(&mut self, w: f64, other: &Jet) {
        self.psi += other.psi * w;
        self.dt += other.dt * w;
        for a in 0..self.dim {
            self.grad[a] += other.grad[a] * w;
            self.second[a] += other.second[a] * w;
        }
    }

    pub fn density(&self) -> f64 {
        self.psi.norm_sqr()
    }

    /// `j_a = (hbar / m_a) Im(conj(psi) d_a psi)`
    pub fn current(&self, units: &Units) -> Point {
        let mut j = Point::zeros(self.dim);
        for a in 0..self.dim {
            j[a] = units.hbar / units.masses[a] * (self.psi.conj() * self.grad[a]).im;
        }
        j
    }

    /// `v = j / |psi|^2`. Not finite at nodes.
    pub fn velocity(&self, units: &Units) -> Point {
        self.current(units).scale(1.0 / self.density())
    }

    /// `-sum_a hbar^2 / (2 m_a) d_a^2 psi`
    pub fn kinetic(&self, units: &Units) -> Complex64 {
        (0..self.dim)
            .map(|a| -self.second[a] * (units.hbar * units.hbar / (2.0 * units.masses[a])))
            .sum()
    }

    /// `d/dt |psi(Q_t, t)|^2` along a curve moving with velocity `v`.
    pub fn density_rate_along(&self, v: &Point) -> f64 {
        let mut d = self.dt;
        for a in 0..self.dim {
            d += self.grad[a] * v[a];
        }
        2.0 * (self.psi.conj() * d).re
    }
}

/// The velocity field evaluated at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocitySample {
    /// `None` at irregular points.
    pub v: Option<Point>,
    pub psi_abs: f64,
    pub regular: bool,
}

/// A time-dependent wave function on configuration space.
#[derive(Clone, Debug)]
pub enum WaveFunction {
    /// Finite harmonic-oscillator eigen-expansion, evaluated in closed form.
    Analytic(HarmonicExpansion),
    /// Free Gaussian packet, evaluated in closed form.
    Packet(GaussianPacket),
    /// Grid sample at a single instant.
    Grid(GridState),
    /// Grid samples at uniformly spaced instants.
    History(GridHistory),
}

impl WaveFunction {
    pub fn dim(&self) -> usize {
        match self {
            WaveFunction::Analytic(s) => s.dim(),
            WaveFunction::Packet(_) => 1,
            WaveFunction::Grid(s) => s.grid().dim(),
            WaveFunction::History(s) => s.grid().dim(),
        }
    }

    pub fn units(&self) -> &Units {
        match self {
            WaveFunction::Analytic(s) => s.units(),
            WaveFunction::Packet(s) => s.units(),
            WaveFunction::Grid(s) => &s.potential().units,
            WaveFunction::History(s) => &s.potential().units,
        }
    }

    pub fn potential(&self) -> Potential {
        match self {
            WaveFunction::Analytic(s) => s.potential(),
            WaveFunction::Packet(s) => s.potential(),
            WaveFunction::Grid(s) => s.potential().clone(),
            WaveFunction::History(s) => s.potential().clone(),
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, WaveFunction::Analytic(_) | WaveFunction::Packet(_))
    }

    /// Reference magnitude for node thresholds: `sup |psi|` over the sampled window.
    pub fn amplitude_scale(&self) -> f64 {
        match self {
            WaveFunction::Analytic(s) => s.amplitude_scale(),
            WaveFunction::Packet(s) => s.amplitude_scale(),
            WaveFunction::Grid(s) => s.amplitude_scale(),
            WaveFunction::History(s) => s.amplitude_scale(),
        }
    }

    /// Absolute threshold below which `|psi|` counts as a node.
    pub fn node_threshold(&self) -> f64 {
        NODE_THRESHOLD * self.amplitude_scale()
    }

    /// Box carrying all but a negligible part of the state: the grid extent
    /// for sampled states.
    pub fn natural_extent(&self) -> Vec<(f64, f64)> {
        match self {
            WaveFunction::Analytic(s) => s.natural_extent(),
            WaveFunction::Packet(s) => s.natural_extent(),
            WaveFunction::Grid(s) => s.grid().extent(),
            WaveFunction::History(s) => s.grid().extent(),
        }
    }

    /// Time interval on which the state can be evaluated.
    pub fn time_range(&self) -> (f64, f64) {
        match self {
            WaveFunction::Grid(s) => (s.time(), s.time()),
            WaveFunction::History(s) => s.time_range(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn check_dim(&self, q: &Point) -> Result<()> {
        if q.dim() != self.dim() || !q.is_finite() {
            return Err(Error::Input(format!(
                "position {q:?} is not a finite point of dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn psi(&self, q: &Point, t: f64) -> Result<Complex64> {
        self.check_dim(q)?;
        match self {
            WaveFunction::Analytic(s) => Ok(s.psi(q, t)),
            WaveFunction::Packet(s) => Ok(s.psi(q, t)),
            WaveFunction::Grid(s) => s.psi(q, t),
            WaveFunction::History(s) => s.psi(q, t),
        }
    }

    pub fn jet(&self, q: &Point, t: f64) -> Result<Jet> {
        self.check_dim(q)?;
        match self {
            WaveFunction::Analytic(s) => Ok(s.jet(q, t)),
            WaveFunction::Packet(s) => Ok(s.jet(q, t)),
            WaveFunction::Grid(s) => s.jet(q, t),
            WaveFunction::History(s) => s.jet(q, t),
        }
    }

    /// Samples `psi(., t)` on `grid`.
    pub fn sample(&self, grid: &Grid, t: f64) -> Result<ComplexField> {
        let values = grid
            .points()
            .map(|p| self.psi(&p, t))
            .collect::<Result<Vec<_>>>()?;
        ComplexField::new(grid.clone(), values, t)
    }

    /// Samples the state on `grid` at time `t` as a grid state with potential cap `cap`.
    pub fn to_grid_state(&self, grid: &Grid, t: f64, cap: f64) -> Result<GridState> {
        GridState::new(self.sample(grid, t)?, self.potential(), cap)
    }

    /// The time-reversed state `conj(psi(q, -t))`.
    pub fn time_reversed(&self) -> Result<WaveFunction> {
        Ok(match self {
            WaveFunction::Analytic(s) => WaveFunction::Analytic(s.time_reversed()),
            WaveFunction::Packet(s) => WaveFunction::Packet(s.time_reversed()),
            WaveFunction::Grid(s) => WaveFunction::Grid(GridState::new(
                s.field().conj().with_time(-s.time()),
                s.potential().clone(),
                s.cap(),
            )?),
            WaveFunction::History(h) => {
                let snaps = h
                    .snapshots()
                    .iter()
                    .rev()
                    .map(|s| {
                        GridState::new(
                            s.field().conj().with_time(-s.time()),
                            s.potential().clone(),
                            s.cap(),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                WaveFunction::History(GridHistory::new(snaps)?)
            }
        })
    }
}

/// `psi(q, t)`.
pub fn eval_psi(state: &WaveFunction, q: &Point, t: f64) -> Result<Complex64> {
    state.psi(q, t)
}

/// The guiding velocity `(hbar / m) Im(grad psi / psi)`, flagged irregular at nodes.
pub fn velocity(state: &WaveFunction, q: &Point, t: f64) -> Result<VelocitySample> {
    let jet = state.jet(q, t)?;
    let psi_abs = jet.psi.norm();
    let regular = psi_abs > state.node_threshold();
    let v = if regular {
        let v = jet.velocity(state.units());
        v.is_finite().then_some(v)
    } else {
        None
    };
    Ok(VelocitySample {
        v,
        psi_abs,
        regular: v.is_some(),
    })
}

/// Probability current `(hbar / m) Im(conj(psi) grad psi)`.
pub fn current(state: &WaveFunction, q: &Point, t: f64) -> Result<Point> {
    Ok(state.jet(q, t)?.current(state.units()))
}

/// The space-time flux `(j, |psi|^2)` with `d + 1` components.
pub fn spacetime_flux(state: &WaveFunction, q: &Point, t: f64) -> Result<Vec<f64>> {
    let jet = state.jet(q, t)?;
    let mut out = jet.current(state.units()).to_vec();
    out.push(jet.density());
    Ok(out)
}

/// Normalized eigen-expansion `sum_k c_k |n_k>` of the harmonic oscillator with frequency `omega`.
pub fn make_harmonic_superposition(
    terms: &[(Complex64, Vec<usize>)],
    units: Units,
    omega: f64,
) -> Result<WaveFunction> {
    Ok(WaveFunction::Analytic(HarmonicExpansion::new(
        units, omega, terms,
    )?))
}

/// Named scenario states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Ground plus second excited oscillator state, nodes at `(±1, n pi)` and `(0, (n + 1/2) pi)`.
    #[serde(rename = "eq4")]
    NodeSuperposition,
    /// Oscillator ground state.
    #[serde(rename = "ground")]
    Ground,
    /// Free Gaussian packet with `q0 = -2`, `k0 = 1`, `sigma = 1`.
    #[serde(rename = "gaussian-packet")]
    GaussianPacket,
}

impl Preset {
    pub const ALL: [Preset; 3] = [
        Preset::NodeSuperposition,
        Preset::Ground,
        Preset::GaussianPacket,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::NodeSuperposition => "eq4",
            Preset::Ground => "ground",
            Preset::GaussianPacket => "gaussian-packet",
        }
    }

    pub fn from_name(name: &str) -> Result<Preset> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::Config(format!(
                    "unknown preset {name:?}, expected one of {names:?}"
                ))
            })
    }

    pub fn build(self) -> WaveFunction {
        match self {
            Preset::NodeSuperposition => {
                WaveFunction::Analytic(super::ground_plus_second_excited())
            }
            Preset::Ground => WaveFunction::Analytic(super::ground_state(1)),
            Preset::GaussianPacket => WaveFunction::Packet(
                GaussianPacket::new(-2.0, 1.0, 1.0, Units::natural(1)).expect("valid preset"),
            ),
        }
    }
}
