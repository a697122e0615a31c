//! Integration by parts on `M = K^r \ S^delta`:
//! `int_M conj(psi) H psi - conj(H psi) psi dq = -i hbar int_{dM} j . n ds`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{interpolate, ComplexField, Grid, Point, SpectralPlan};
use crate::state::{GridState, Potential, Units, WaveFunction, DEFAULT_CAP};

/// Periodic samples per axis used to apply `H` to closed-form states.
pub const SPECTRAL_POINTS_1D: usize = 1024;
pub const SPECTRAL_POINTS_2D: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreensReport {
    /// `int_M conj(psi) H psi - conj(H psi) psi dq`.
    pub volume: Complex64,
    /// `-i hbar int_{dM} j . n ds`.
    pub boundary: Complex64,
    /// `|volume - boundary|`.
    pub residual: f64,
    pub spacing: f64,
}

/// The spectral kinetic term `T psi` of one grid snapshot, evaluated off the grid.
struct Kinetic {
    field: ComplexField,
    /// Normalized Fourier coefficients and wavenumbers, one-dimensional only.
    coefficients: Option<(Vec<Complex64>, Vec<f64>)>,
}

impl Kinetic {
    fn new(grid: &GridState) -> Result<Self> {
        let values = grid
            .h_psi()
            .values()
            .iter()
            .zip(grid.field().values())
            .zip(grid.potential_samples())
            .map(|((h, psi), v)| h - psi * v)
            .collect();
        let field = ComplexField::new(grid.grid().clone(), values, grid.time())?;
        let coefficients = (grid.grid().dim() == 1).then(|| {
            let plan = SpectralPlan::new(grid.grid());
            let mut c = field.values().to_vec();
            plan.forward(&mut c, 0);
            let n = c.len() as f64;
            c.iter_mut().for_each(|v| *v /= n);
            (c, plan.wavenumbers(0).to_vec())
        });
        Ok(Kinetic {
            field,
            coefficients,
        })
    }

    fn apply(&self, q: &Point) -> Result<Complex64> {
        match &self.coefficients {
            Some((c, k)) => {
                let x = q[0] - self.field.grid().axis(0).lo;
                Ok(c.iter()
                    .zip(k)
                    .map(|(c, &k)| c * Complex64::from_polar(1.0, k * x))
                    .sum())
            }
            None => interpolate(&self.field, q),
        }
    }
}

fn snapshot(state: &WaveFunction, t: f64) -> Result<GridState> {
    match state {
        WaveFunction::Analytic(_) | WaveFunction::Packet(_) => {
            let ext = state.natural_extent();
            let n = if state.dim() == 1 {
                SPECTRAL_POINTS_1D
            } else {
                SPECTRAL_POINTS_2D
            };
            let grid = if state.dim() == 1 {
                Grid::periodic_1d(ext[0].0, ext[0].1, n)?
            } else {
                let (lo, hi) = (ext[0].0.min(ext[1].0), ext[0].1.max(ext[1].1));
                Grid::periodic_2d(lo, hi, n)?
            };
            GridState::new(state.sample(&grid, t)?, state.potential(), DEFAULT_CAP)
        }
        WaveFunction::Grid(g) => {
            g.psi(&Point::zeros(g.grid().dim()), t)?;
            Ok(g.clone())
        }
        WaveFunction::History(h) => h
            .snapshots()
            .iter()
            .find(|s| (s.time() - t).abs() <= 1e-12 * t.abs().max(1.0))
            .cloned()
            .ok_or_else(|| Error::Input(format!("no snapshot of the history at t = {t}"))),
    }
}

/// Composite Simpson nodes and weights with at most `spacing` between nodes.
fn simpson_nodes(a: f64, b: f64, spacing: f64) -> Vec<(f64, f64)> {
    let n = ((b - a) / spacing).ceil().max(2.0) as usize;
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (a + i as f64 * h, w * h / 3.0)
        })
        .collect()
}

struct Evaluator<'a> {
    state: &'a WaveFunction,
    kinetic: Kinetic,
    potential: Potential,
    cap: f64,
    units: Units,
    t: f64,
}

impl Evaluator<'_> {
    fn integrand(&self, q: &Point) -> Result<Complex64> {
        let psi = self.state.psi(q, self.t)?;
        let hpsi = self.kinetic.apply(q)? + psi * self.potential.capped_value(q, self.cap);
        Ok(psi.conj() * hpsi - hpsi.conj() * psi)
    }

    fn current(&self, q: &Point) -> Result<Point> {
        Ok(self.state.jet(q, self.t)?.current(&self.units))
    }
}

/// Both sides of the integration-by-parts identity at time `t` on the ball
/// of radius `r` with the `delta`-collars of the singular set removed.
///
/// The kinetic term is applied spectrally on a periodic grid; the volume
/// integral uses the composite Simpson rule with nodes at most `spacing` apart. In two
/// dimensions the region must be a disk or an annulus around a singular
/// point at the origin.
pub fn greens_identity_residual(
    state: &WaveFunction,
    t: f64,
    r: f64,
    delta: f64,
    spacing: f64,
) -> Result<GreensReport> {
    for (name, v) in [("r", r), ("delta", delta), ("spacing", spacing)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Input(format!("{name} must be positive, got {v}")));
        }
    }
    let grid = snapshot(state, t)?;
    if grid
        .grid()
        .extent()
        .iter()
        .any(|&(lo, hi)| -r < lo || r > hi)
    {
        return Err(Error::Input(format!(
            "region of radius {r} extends outside the grid {:?}",
            grid.grid().extent()
        )));
    }
    let potential = state.potential();
    let ev = Evaluator {
        state,
        kinetic: Kinetic::new(&grid)?,
        potential: potential.clone(),
        cap: grid.cap(),
        units: state.units().clone(),
        t,
    };
    let hbar = ev.units.hbar;
    let minus_i_hbar = Complex64::new(0.0, -hbar);

    let (volume, flux) = if state.dim() == 1 {
        let mut cuts: Vec<(f64, f64)> = potential
            .singular_set()
            .iter()
            .map(|c| (c[0] - delta, c[0] + delta))
            .filter(|&(a, b)| b > -r && a < r)
            .collect();
        cuts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut intervals = Vec::new();
        let mut start = -r;
        for (a, b) in cuts {
            if a > start {
                intervals.push((start, a));
            }
            start = start.max(b);
        }
        if start < r {
            intervals.push((start, r));
        }
        let mut volume = Complex64::new(0.0, 0.0);
        let mut flux = 0.0;
        for (a, b) in intervals {
            let nodes = simpson_nodes(a, b, spacing);
            let parts: Vec<Complex64> = nodes
                .par_iter()
                .map(|&(x, w)| Ok(ev.integrand(&Point::new1(x))? * w))
                .collect::<Result<_>>()?;
            volume += parts.iter().sum::<Complex64>();
            flux += ev.current(&Point::new1(b))?[0] - ev.current(&Point::new1(a))?[0];
        }
        (volume, flux)
    } else {
        let inner = match potential.singular_set() {
            [] => 0.0,
            [c] if c.norm() == 0.0 => delta,
            _ => {
                return Err(Error::Input(
                    "two-dimensional regions are limited to a disk or an annulus around a singular point at the origin"
                        .into(),
                ))
            }
        };
        if inner >= r {
            return Err(Error::Input(format!(
                "collar radius {delta} leaves no region inside radius {r}"
            )));
        }
        let angles = ((2.0 * PI * r / spacing).ceil() as usize).max(16);
        let dtheta = 2.0 * PI / angles as f64;
        let radial = simpson_nodes(inner, r, spacing);
        let rows: Vec<Complex64> = radial
            .par_iter()
            .map(|&(rho, w)| -> Result<Complex64> {
                let mut acc = Complex64::new(0.0, 0.0);
                if rho == 0.0 {
                    return Ok(acc);
                }
                for k in 0..angles {
                    let th = k as f64 * dtheta;
                    acc += ev.integrand(&Point::new2(rho * th.cos(), rho * th.sin()))?;
                }
                Ok(acc * w * rho * dtheta)
            })
            .collect::<Result<_>>()?;
        let circle = |rho: f64| -> Result<f64> {
            let mut acc = 0.0;
            for k in 0..angles {
                let th = k as f64 * dtheta;
                let n = Point::new2(th.cos(), th.sin());
                acc += ev.current(&n.scale(rho))?.dot(&n);
            }
            Ok(acc * rho * dtheta)
        };
        let mut flux = circle(r)?;
        if inner > 0.0 {
            flux -= circle(inner)?;
        }
        (rows.iter().sum(), flux)
    };
    let boundary = minus_i_hbar * flux;
    Ok(GreensReport {
        volume,
        boundary,
        residual: (volume - boundary).norm(),
        spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{ground_state, HarmonicExpansion, Potential, PotentialKind, Preset};

    #[test]
    fn eigenstates_have_vanishing_sides() {
        for s in [
            Preset::Ground.build(),
            WaveFunction::Analytic(ground_state(2)),
        ] {
            let rep = greens_identity_residual(&s, 0.4, 3.0, 0.1, 0.05).unwrap();
            assert!(
                rep.volume.norm() < 1e-9 && rep.boundary.norm() < 1e-9,
                "{rep:?}"
            );
            assert!(rep.residual < 1e-9);
        }
    }

    #[test]
    fn superposition_identity_holds() {
        let s = Preset::NodeSuperposition.build();
        for t in [0.3, 1.1] {
            for r in [1.0, 6.0] {
                let rep = greens_identity_residual(&s, t, r, 0.1, 0.05).unwrap();
                assert!(rep.residual < 1e-6, "t={t} r={r}: {rep:?}");
            }
        }
        // the boundary side is not trivially zero
        let rep = greens_identity_residual(&s, 0.3, 1.0, 0.1, 0.05).unwrap();
        assert!(rep.boundary.norm() > 1e-2);
    }

    #[test]
    fn residual_shrinks_under_refinement() {
        let s = Preset::NodeSuperposition.build();
        let coarse = greens_identity_residual(&s, 0.3, 1.0, 0.1, 0.2)
            .unwrap()
            .residual;
        let fine = greens_identity_residual(&s, 0.3, 1.0, 0.1, 0.1)
            .unwrap()
            .residual;
        assert!(coarse > 1e-12, "{coarse}");
        assert!(fine < coarse / 4.0, "{coarse} -> {fine}");
    }

    #[test]
    fn two_dimensional_disk_and_annulus() {
        // breathing along the first axis
        let one = Complex64::new(1.0, 0.0);
        let s = WaveFunction::Analytic(
            HarmonicExpansion::new(
                Units::natural(2),
                1.0,
                &[(one, vec![0, 0]), (one, vec![2, 0])],
            )
            .unwrap(),
        );
        let disk = greens_identity_residual(&s, 0.3, 1.5, 0.1, 0.05).unwrap();
        assert!(disk.boundary.norm() > 1e-3);
        assert!(disk.residual < 1e-6, "{disk:?}");
        let units = Units::natural(2);
        let potential = Potential::new(
            PotentialKind::PointSingular {
                centers: vec![Point::new2(0.0, 0.0)],
                couplings: vec![0.1],
            },
            units,
        )
        .unwrap();
        let grid = Grid::periodic_2d(-8.0, 8.0, 128).unwrap();
        let g = GridState::new(
            s.sample(&grid, 0.3).unwrap(),
            potential.clone(),
            DEFAULT_CAP,
        )
        .unwrap();
        let annulus =
            greens_identity_residual(&WaveFunction::Grid(g), 0.3, 1.5, 0.2, 0.05).unwrap();
        assert!(annulus.boundary.norm() > 1e-3);
        assert!(
            annulus.residual < 1e-3 * annulus.boundary.norm(),
            "{annulus:?}"
        );
        // off-centre singular points are not supported
        let off = Potential::new(
            PotentialKind::PointSingular {
                centers: vec![Point::new2(0.5, 0.0)],
                couplings: vec![0.1],
            },
            Units::natural(2),
        )
        .unwrap();
        let g = GridState::new(s.sample(&grid, 0.3).unwrap(), off, DEFAULT_CAP).unwrap();
        assert!(matches!(
            greens_identity_residual(&WaveFunction::Grid(g), 0.3, 1.5, 0.2, 0.05),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn singular_collars_are_removed() {
        let units = Units::natural(1);
        let potential = Potential::new(
            PotentialKind::PointSingular {
                centers: vec![Point::new1(0.3)],
                couplings: vec![0.5],
            },
            units,
        )
        .unwrap();
        let packet = Preset::GaussianPacket.build();
        let grid = Grid::periodic_1d(-16.0, 16.0, 1024).unwrap();
        let g = GridState::new(packet.sample(&grid, 0.0).unwrap(), potential, DEFAULT_CAP).unwrap();
        let s = WaveFunction::Grid(g);
        let rep = greens_identity_residual(&s, 0.0, 4.0, 0.2, 0.01).unwrap();
        assert!(rep.boundary.norm() > 1e-3);
        assert!(rep.residual < 1e-3 * rep.boundary.norm(), "{rep:?}");
    }

    #[test]
    fn regions_outside_the_grid_are_rejected() {
        let g = GridState::new(
            Preset::Ground
                .build()
                .sample(&Grid::periodic_1d(-5.0, 5.0, 128).unwrap(), 0.0)
                .unwrap(),
            Potential::harmonic(1.0, Units::natural(1)).unwrap(),
            DEFAULT_CAP,
        )
        .unwrap();
        let s = WaveFunction::Grid(g);
        assert!(matches!(
            greens_identity_residual(&s, 0.0, 6.0, 0.1, 0.05),
            Err(Error::Input(_))
        ));
        assert!(greens_identity_residual(&s, 0.0, 4.0, 0.1, 0.05).is_ok());
    }
}
