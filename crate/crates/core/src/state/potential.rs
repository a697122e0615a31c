use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Point;

/// Default cap applied to singular potentials sampled on grids.
pub const DEFAULT_CAP: f64 = 1e4;

/// Physical constants shared by a state and its potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    /// One mass per configuration-space axis.
    pub masses: Vec<f64>,
}

impl Units {
    pub fn natural(dim: usize) -> Self {
        Units {
            hbar: 1.0,
            masses: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.masses.len()
    }

    pub fn mass(&self, axis: usize) -> f64 {
        self.masses[axis]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::Config(format!(
                "hbar must be positive, got {}",
                self.hbar
            )));
        }
        if self.masses.is_empty() || self.masses.len() > 2 {
            return Err(Error::Config(format!(
                "need one mass per axis in 1 or 2 dimensions, got {}",
                self.masses.len()
            )));
        }
        if let Some(m) = self.masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::Config(format!("masses must be positive, got {m}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialKind {
    /// `V = sum_k m_k omega^2 q_k^2 / 2`
    Harmonic {
        omega: f64,
    },
    Free,
    /// `V = sum_i g_i / |q - a_i|`, singular at every center.
    PointSingular {
        centers: Vec<Point>,
        couplings: Vec<f64>,
    },
}

/// A real potential with its singular set `S`; the smooth domain is the complement of `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub kind: PotentialKind,
    pub units: Units,
}

impl Potential {
    pub fn new(kind: PotentialKind, units: Units) -> Result<Self> {
        units.validate()?;
        match &kind {
            PotentialKind::Harmonic { omega } if !(omega.is_finite() && *omega > 0.0) => {
                return Err(Error::Config(format!(
                    "omega must be positive, got {omega}"
                )));
            }
            PotentialKind::PointSingular { centers, couplings } => {
                if centers.len() != couplings.len() {
                    return Err(Error::Config(format!(
                        "{} singular centers but {} couplings",
                        centers.len(),
                        couplings.len()
                    )));
                }
                if let Some(c) = centers
                    .iter()
                    .find(|c| c.dim() != units.dim() || !c.is_finite())
                {
                    return Err(Error::Config(format!(
                        "singular center {c:?} does not match dimension {}",
                        units.dim()
                    )));
                }
                if couplings.iter().any(|g| !g.is_finite()) {
                    return Err(Error::Config("couplings must be finite".into()));
                }
            }
            _ => {}
        }
        Ok(Potential { kind, units })
    }

    pub fn harmonic(omega: f64, units: Units) -> Result<Self> {
        Self::new(PotentialKind::Harmonic { omega }, units)
    }

    pub fn free(units: Units) -> Result<Self> {
        Self::new(PotentialKind::Free, units)
    }

    pub fn dim(&self) -> usize {
        self.units.dim()
    }

    /// Points of `S`. Empty when the potential is smooth everywhere.
    pub fn singular_set(&self) -> &[Point] {
        match &self.kind {
            PotentialKind::PointSingular { centers, .. } => centers,
            _ => &[],
        }
    }

    pub fn is_singular(&self) -> bool {
        !self.singular_set().is_empty()
    }

    /// Distance from `q` to `S`, infinite when `S` is empty.
    pub fn distance_to_singular(&self, q: &Point) -> f64 {
        self.singular_set()
            .iter()
            .map(|a| a.distance(q))
            .fold(f64::INFINITY, f64::min)
    }

    /// `V(q)`, infinite on `S`.
    pub fn value(&self, q: &Point) -> f64 {
        match &self.kind {
            PotentialKind::Harmonic { omega } => {
                let w2 = omega * omega;
                q.as_slice()
                    .iter()
                    .zip(&self.units.masses)
                    .map(|(x, m)| 0.5 * m * w2 * x * x)
                    .sum()
            }
            PotentialKind::Free => 0.0,
            PotentialKind::PointSingular { centers, couplings } => centers
                .iter()
                .zip(couplings)
                .map(|(a, g)| {
                    let r = a.distance(q);
                    if *g == 0.0 {
                        0.0
                    } else if r == 0.0 {
                        g.signum() * f64::INFINITY
                    } else {
                        g / r
                    }
                })
                .sum(),
        }
    }

    /// `V(q)` clipped to `[-cap, cap]`.
    pub fn capped_value(&self, q: &Point, cap: f64) -> f64 {
        self.value(q).clamp(-cap, cap)
    }
}
