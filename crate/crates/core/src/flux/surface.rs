//! Parametrized hypersurfaces of configuration-space-time and the flux of
//! the space-time current `J = (j, |psi|^2)` through them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::equivariance::sample_at;
use crate::error::{Error, Result};
use crate::field::{Point, SpacetimePoint};
use crate::integrator::{integrate_sampled, IntegratorConfig, Sampling};
use crate::state::WaveFunction;

/// Sample counts and convergence target of surface quadratures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluxQuadrature {
    /// Initial samples along a curve.
    pub samples: usize,
    /// Initial samples per parameter of a two-parameter surface.
    pub surface_samples: [usize; 2],
    /// Largest accepted relative change under one doubling.
    pub tolerance: f64,
    pub max_doublings: usize,
}

impl Default for FluxQuadrature {
    fn default() -> Self {
        FluxQuadrature {
            samples: 512,
            surface_samples: [64, 64],
            tolerance: 0.01,
            max_doublings: 5,
        }
    }
}

impl FluxQuadrature {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 512 || self.surface_samples.iter().any(|&n| n < 16) {
            return Err(Error::Config(
                "flux quadrature needs at least 512 curve samples and 16 per surface parameter"
                    .into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(
                "flux quadrature tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A hypersurface of configuration-space-time.
///
/// Curves live in the `(q, t)` plane of one-dimensional states; the other
/// kinds are surfaces in `(x, y, t)`. Radii around space-time points are
/// measured in the metric `dq^2 + (time_weight dt)^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Surface {
    /// `{t = time}` over a spatial box.
    TimeSlice { time: f64, extent: Vec<(f64, f64)> },
    /// Straight segment in `(q, t)`.
    Segment {
        from: SpacetimePoint,
        to: SpacetimePoint,
    },
    /// Circle in `(q, t)`.
    Circle {
        center: SpacetimePoint,
        radius: f64,
        time_weight: f64,
    },
    /// `{|x - center| = radius}` for `t` in `times`.
    Cylinder {
        center: Point,
        radius: f64,
        times: (f64, f64),
    },
    /// Open tube of constant radius around a segment in `(x, y, t)`.
    Tube {
        from: SpacetimePoint,
        to: SpacetimePoint,
        radius: f64,
        time_weight: f64,
    },
    /// Sphere in `(x, y, t)`.
    Sphere {
        center: SpacetimePoint,
        radius: f64,
        time_weight: f64,
    },
}

type Vec3 = [f64; 3];

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// `(x, y, w t)`
fn lift(p: &SpacetimePoint, w: f64) -> Vec3 {
    [p.q[0], p.q[1], w * p.t]
}

/// Orthonormal pair perpendicular to the unit vector `d`.
fn frame(d: Vec3) -> (Vec3, Vec3) {
    let k = (0..3)
        .min_by(|&a, &b| d[a].abs().partial_cmp(&d[b].abs()).unwrap())
        .unwrap();
    let mut a = [0.0; 3];
    a[k] = 1.0;
    let e1 = cross(d, a);
    let n1 = norm(e1);
    let e1 = [e1[0] / n1, e1[1] / n1, e1[2] / n1];
    (e1, cross(d, e1))
}

/// Distance from `p` to the segment `[a, b]`, with the projection parameter.
pub(crate) fn segment_distance(p: Vec3, a: Vec3, b: Vec3) -> (f64, f64) {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let s = if len2 > 0.0 {
        (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let c = [a[0] + s * ab[0], a[1] + s * ab[1], a[2] + s * ab[2]];
    (norm(sub(p, c)), s)
}

impl Surface {
    /// Circle of `radius` around `center` in the `(q, t)` plane.
    pub fn circle(center: SpacetimePoint, radius: f64) -> Self {
        Surface::Circle {
            center,
            radius,
            time_weight: 1.0,
        }
    }

    /// The constant-time surface `t = time` over the natural extent of `state`.
    pub fn time_slice(state: &WaveFunction, time: f64) -> Self {
        Surface::TimeSlice {
            time,
            extent: state.natural_extent(),
        }
    }

    /// The segment `{q = position}` for `t` in `times`.
    pub fn wall(position: f64, times: (f64, f64)) -> Self {
        Surface::Segment {
            from: SpacetimePoint::new(Point::new1(position), times.0),
            to: SpacetimePoint::new(Point::new1(position), times.1),
        }
    }

    /// Configuration-space dimension of the surrounding space-time.
    pub fn dim(&self) -> usize {
        match self {
            Surface::TimeSlice { extent, .. } => extent.len(),
            Surface::Segment { .. } | Surface::Circle { .. } => 1,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Input(format!("{name} must be positive, got {v}")))
            }
        };
        let points_ok = |ps: &[&SpacetimePoint], dim: usize| {
            if ps.iter().all(|p| p.is_finite() && p.q.dim() == dim) {
                Ok(())
            } else {
                Err(Error::Input(format!(
                    "surface points must be finite with dimension {dim}"
                )))
            }
        };
        match self {
            Surface::TimeSlice { time, extent } => {
                if extent.is_empty() || extent.len() > 2 || !time.is_finite() {
                    return Err(Error::Input(
                        "time slices need a finite time and 1 or 2 ranges".into(),
                    ));
                }
                for &(lo, hi) in extent {
                    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                        return Err(Error::Input(format!(
                            "degenerate time-slice range [{lo}, {hi}]"
                        )));
                    }
                }
                Ok(())
            }
            Surface::Segment { from, to } => {
                points_ok(&[from, to], 1)?;
                if from == to {
                    return Err(Error::Input(
                        "segment endpoints coincide; the normal is degenerate".into(),
                    ));
                }
                Ok(())
            }
            Surface::Circle {
                center,
                radius,
                time_weight,
            } => {
                points_ok(&[center], 1)?;
                positive("radius", *radius)?;
                positive("time_weight", *time_weight)
            }
            Surface::Cylinder {
                center,
                radius,
                times,
            } => {
                if center.dim() != 2 || !center.is_finite() {
                    return Err(Error::Input(
                        "cylinders need a finite two-dimensional center".into(),
                    ));
                }
                positive("radius", *radius)?;
                if !(times.0.is_finite() && times.1.is_finite() && times.0 < times.1) {
                    return Err(Error::Input(format!(
                        "degenerate cylinder time range {times:?}"
                    )));
                }
                Ok(())
            }
            Surface::Tube {
                from,
                to,
                radius,
                time_weight,
            } => {
                points_ok(&[from, to], 2)?;
                positive("radius", *radius)?;
                positive("time_weight", *time_weight)?;
                if from == to {
                    return Err(Error::Input("tube axis has zero length".into()));
                }
                Ok(())
            }
            Surface::Sphere {
                center,
                radius,
                time_weight,
            } => {
                points_ok(&[center], 2)?;
                positive("radius", *radius)?;
                positive("time_weight", *time_weight)
            }
        }
    }

    fn domain(&self) -> [(f64, f64); 2] {
        match self {
            Surface::TimeSlice { extent, .. } => [extent[0], *extent.get(1).unwrap_or(&(0.0, 1.0))],
            Surface::Segment { .. } => [(0.0, 1.0), (0.0, 1.0)],
            Surface::Circle { .. } => [(0.0, 2.0 * PI), (0.0, 1.0)],
            Surface::Cylinder { times, .. } => [(0.0, 2.0 * PI), *times],
            Surface::Tube { .. } => [(0.0, 2.0 * PI), (0.0, 1.0)],
            Surface::Sphere { .. } => [(0.0, 2.0 * PI), (0.0, PI)],
        }
    }

    fn periodic(&self) -> [bool; 2] {
        match self {
            Surface::TimeSlice { .. } | Surface::Segment { .. } => [false, false],
            _ => [true, false],
        }
    }

    /// Point at parameter `u` and the flux element `N` with `J . N du` the flux.
    fn element(&self, u: [f64; 2]) -> (SpacetimePoint, Vec3) {
        match self {
            Surface::TimeSlice { time, extent } => {
                if extent.len() == 1 {
                    (
                        SpacetimePoint::new(Point::new1(u[0]), *time),
                        [0.0, -1.0, 0.0],
                    )
                } else {
                    (
                        SpacetimePoint::new(Point::new2(u[0], u[1]), *time),
                        [0.0, 0.0, 1.0],
                    )
                }
            }
            Surface::Segment { from, to } => {
                let (dq, dt) = (to.q[0] - from.q[0], to.t - from.t);
                let p = SpacetimePoint::new(Point::new1(from.q[0] + u[0] * dq), from.t + u[0] * dt);
                (p, [dt, -dq, 0.0])
            }
            Surface::Circle {
                center,
                radius,
                time_weight,
            } => {
                let (s, c) = u[0].sin_cos();
                let p = SpacetimePoint::new(
                    Point::new1(center.q[0] + radius * c),
                    center.t + radius / time_weight * s,
                );
                // tangent (-r sin, r cos / w) rotated to (dt, -dq)
                (p, [radius / time_weight * c, radius * s, 0.0])
            }
            Surface::Cylinder { center, radius, .. } => {
                let (s, c) = u[0].sin_cos();
                let p = SpacetimePoint::new(
                    Point::new2(center[0] + radius * c, center[1] + radius * s),
                    u[1],
                );
                (p, [radius * c, radius * s, 0.0])
            }
            Surface::Tube {
                from,
                to,
                radius,
                time_weight,
            } => {
                let w = *time_weight;
                let (a, b) = (lift(from, w), lift(to, w));
                let ab = sub(b, a);
                let len = norm(ab);
                let (e1, e2) = frame([ab[0] / len, ab[1] / len, ab[2] / len]);
                let (s, c) = u[0].sin_cos();
                let y: Vec3 =
                    [0, 1, 2].map(|k| a[k] + u[1] * ab[k] + radius * (c * e1[k] + s * e2[k]));
                let mut du: Vec3 = [0, 1, 2].map(|k| radius * (-s * e1[k] + c * e2[k]));
                let mut dv = ab;
                du[2] /= w;
                dv[2] /= w;
                (
                    SpacetimePoint::new(Point::new2(y[0], y[1]), y[2] / w),
                    cross(du, dv),
                )
            }
            Surface::Sphere {
                center,
                radius,
                time_weight,
            } => {
                let w = *time_weight;
                let c0 = lift(center, w);
                let (st, ct) = u[0].sin_cos();
                let (sp, cp) = u[1].sin_cos();
                let y = [
                    c0[0] + radius * sp * ct,
                    c0[1] + radius * sp * st,
                    c0[2] + radius * cp,
                ];
                let du = [-radius * sp * st, radius * sp * ct, 0.0];
                let dv = [radius * cp * ct, radius * cp * st, -radius * sp / w];
                (
                    SpacetimePoint::new(Point::new2(y[0], y[1]), y[2] / w),
                    cross(du, dv),
                )
            }
        }
    }

    /// A function whose sign changes exactly where a path crosses the surface
    /// (or its continuation).
    pub fn level(&self, p: &SpacetimePoint) -> f64 {
        match self {
            Surface::TimeSlice { time, .. } => p.t - time,
            Surface::Segment { from, to } => {
                (to.q[0] - from.q[0]) * (p.t - from.t) - (to.t - from.t) * (p.q[0] - from.q[0])
            }
            Surface::Circle {
                center,
                radius,
                time_weight,
            } => center.distance(p, *time_weight).powi(2) - radius * radius,
            Surface::Cylinder { center, radius, .. } => {
                p.q.distance(center).powi(2) - radius * radius
            }
            Surface::Tube {
                from,
                to,
                radius,
                time_weight,
            } => {
                let w = *time_weight;
                let (a, b, y) = (lift(from, w), lift(to, w), lift(p, w));
                let ab = sub(b, a);
                let s = dot(sub(y, a), ab) / dot(ab, ab);
                let c = [0, 1, 2].map(|k| a[k] + s * ab[k]);
                dot(sub(y, c), sub(y, c)) - radius * radius
            }
            Surface::Sphere {
                center,
                radius,
                time_weight,
            } => center.distance(p, *time_weight).powi(2) - radius * radius,
        }
    }

    /// Whether a level crossing at `p` lies on the surface itself.
    pub fn admits(&self, p: &SpacetimePoint) -> bool {
        match self {
            Surface::TimeSlice { extent, .. } => extent
                .iter()
                .enumerate()
                .all(|(k, &(lo, hi))| p.q[k] >= lo && p.q[k] <= hi),
            Surface::Segment { from, to } => {
                let (dq, dt) = (to.q[0] - from.q[0], to.t - from.t);
                let s = (dq * (p.q[0] - from.q[0]) + dt * (p.t - from.t)) / (dq * dq + dt * dt);
                (0.0..=1.0).contains(&s)
            }
            Surface::Cylinder { times, .. } => p.t >= times.0 && p.t <= times.1,
            Surface::Tube {
                from,
                to,
                time_weight,
                ..
            } => {
                let w = *time_weight;
                let (a, b, y) = (lift(from, w), lift(to, w), lift(p, w));
                let ab = sub(b, a);
                (0.0..=1.0).contains(&(dot(sub(y, a), ab) / dot(ab, ab)))
            }
            Surface::Circle { .. } | Surface::Sphere { .. } => true,
        }
    }

    fn base_samples(&self, quad: &FluxQuadrature) -> [usize; 2] {
        if self.dim() == 1 {
            [quad.samples, 1]
        } else {
            quad.surface_samples
        }
    }
}

/// Result of a converged surface quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfaceFlux {
    /// `int |J . n| dsigma`
    pub value: f64,
    pub samples: [usize; 2],
    /// Relative change under the last doubling.
    pub relative_change: f64,
}

fn nodes(range: (f64, f64), n: usize, periodic: bool) -> (Vec<f64>, f64) {
    let h = (range.1 - range.0) / n as f64;
    let off = if periodic { 0.0 } else { 0.5 };
    ((0..n).map(|i| range.0 + (i as f64 + off) * h).collect(), h)
}

fn quadrature(
    state: &WaveFunction,
    surface: &Surface,
    n: [usize; 2],
    mask: &(dyn Fn(&SpacetimePoint) -> bool + Sync),
) -> Result<(f64, f64)> {
    let dom = surface.domain();
    let per = surface.periodic();
    let (us, hu) = nodes(dom[0], n[0], per[0]);
    let (vs, hv) = if surface.dim() == 1 {
        (vec![0.0], 1.0)
    } else {
        nodes(dom[1], n[1], per[1])
    };
    let units = state.units().clone();
    let d = surface.dim();
    let rows: Vec<(f64, f64)> = us
        .par_iter()
        .map(|&u| -> Result<(f64, f64)> {
            let (mut acc, mut mag) = (0.0, 0.0);
            for &v in &vs {
                let (p, n) = surface.element([u, v]);
                if norm(n) == 0.0 {
                    return Err(Error::Input(format!("surface normal vanishes at {p:?}")));
                }
                if !mask(&p) {
                    continue;
                }
                let jet = state.jet(&p.q, p.t)?;
                let j = jet.current(&units);
                let mut flux = [0.0; 3];
                for k in 0..d {
                    flux[k] = j[k];
                }
                flux[d] = jet.density();
                acc += dot(flux, n).abs();
                mag += norm(flux) * norm(n);
            }
            Ok((acc, mag))
        })
        .collect::<Result<_>>()?;
    let (acc, mag) = rows.iter().fold((0.0, 0.0), |(a, m), r| (a + r.0, m + r.1));
    Ok((acc * hu * hv, mag * hu * hv))
}

/// `int_Sigma |J . n| dsigma`, the bound on the expected number of crossings of `Sigma`.
pub fn flux_through_surface(
    state: &WaveFunction,
    surface: &Surface,
    quad: &FluxQuadrature,
) -> Result<SurfaceFlux> {
    flux_through_masked(state, surface, quad, &|_| true)
}

/// As [`flux_through_surface`], restricted to the points where `mask` holds.
///
/// Sample counts double until the result changes by less than the
/// quadrature tolerance.
pub fn flux_through_masked(
    state: &WaveFunction,
    surface: &Surface,
    quad: &FluxQuadrature,
    mask: &(dyn Fn(&SpacetimePoint) -> bool + Sync),
) -> Result<SurfaceFlux> {
    surface.validate()?;
    quad.validate()?;
    if surface.dim() != state.dim() {
        return Err(Error::Input(format!(
            "surface lives in {}+1 dimensions but the state has dimension {}",
            surface.dim(),
            state.dim()
        )));
    }
    let mut n = surface.base_samples(quad);
    let (mut prev, _) = quadrature(state, surface, n, mask)?;
    for _ in 0..quad.max_doublings {
        n = if surface.dim() == 1 {
            [2 * n[0], 1]
        } else {
            [2 * n[0], 2 * n[1]]
        };
        let (value, mag) = quadrature(state, surface, n, mask)?;
        let change = (value - prev).abs();
        if change <= quad.tolerance * value || change <= 1e-12 * mag || change == 0.0 {
            return Ok(SurfaceFlux {
                value,
                samples: n,
                relative_change: if value > 0.0 { change / value } else { 0.0 },
            });
        }
        prev = value;
    }
    Err(Error::Numerical(format!(
        "flux quadrature did not settle within {} doublings",
        quad.max_doublings
    )))
}

/// Monte-Carlo count of surface crossings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingEstimate {
    /// Mean number of crossings per trajectory.
    pub mean: f64,
    /// 95% normal-approximation half-width of the mean.
    pub half_width: f64,
    pub count: usize,
    pub crossings: usize,
    pub seed: u64,
    pub window: (f64, f64),
}

/// Draws `count` points from `|psi_{t0}|^2`, follows them over `window`
/// and counts crossings of `surface`, sampling each path every `sample_dt`.
pub fn mc_crossings(
    state: &WaveFunction,
    surface: &Surface,
    window: (f64, f64),
    count: usize,
    seed: u64,
    config: &IntegratorConfig,
    sample_dt: f64,
) -> Result<CrossingEstimate> {
    surface.validate()?;
    let (t0, t1) = window;
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(Error::Input(format!("crossing window {window:?} is empty")));
    }
    if !(sample_dt > 0.0) {
        return Err(Error::Input("sample spacing must be positive".into()));
    }
    let ens = sample_at(state, t0, count, seed)?;
    let counts: Vec<usize> = ens
        .points
        .par_iter()
        .map(|q| -> Result<usize> {
            let tr =
                integrate_sampled(state, q, t0, t1 - t0, config, &Sampling::Uniform(sample_dt))?;
            let mut n = 0;
            for w in tr.samples.windows(2) {
                let a = SpacetimePoint::new(w[0].q, w[0].t);
                let b = SpacetimePoint::new(w[1].q, w[1].t);
                let (ga, gb) = (surface.level(&a), surface.level(&b));
                if (ga < 0.0) != (gb < 0.0) {
                    let s = ga / (ga - gb);
                    let p =
                        SpacetimePoint::new(a.q.add_scaled(s, &(b.q - a.q)), a.t + s * (b.t - a.t));
                    if surface.admits(&p) {
                        n += 1;
                    }
                }
            }
            Ok(n)
        })
        .collect::<Result<_>>()?;
    let total: usize = counts.iter().sum();
    let mean = total as f64 / count as f64;
    let var = counts
        .iter()
        .map(|&c| (c as f64 - mean).powi(2))
        .sum::<f64>()
        / (count.max(2) - 1) as f64;
    Ok(CrossingEstimate {
        mean,
        half_width: 1.96 * (var / count as f64).sqrt(),
        count,
        crossings: total,
        seed,
        window,
    })
}
