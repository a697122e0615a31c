//! The bound `P(tau+ < T) <= deficit + N + S + I` on bad events.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::nodal::{find_nodal_set, Codimension, NodalResolution, NodalSet, NodalWindow};
use super::surface::{flux_through_masked, segment_distance, FluxQuadrature, Surface};
use crate::equivariance::sample_initial;
use crate::error::{Error, Result};
use crate::field::{gauss_legendre, Point, SpacetimePoint};
use crate::integrator::{integrate_trajectory, IntegratorConfig, Status};
use crate::state::{Potential, WaveFunction};

/// Geometry of the good region `((K^r \ S^delta) x R) \ N^eps` up to time `T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    /// Radius of the tube around the nodal set.
    pub eps: f64,
    /// Radius of the collar around the singular set.
    pub delta: f64,
    /// Radius of the confining ball `K^r`.
    pub r: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Weight of time in the space-time distance.
    #[serde(default = "unit")]
    pub time_weight: f64,
}

fn unit() -> f64 {
    1.0
}

impl RegionSpec {
    pub fn new(eps: f64, delta: f64, r: f64, horizon: f64) -> Self {
        RegionSpec {
            eps,
            delta,
            r,
            horizon,
            time_weight: 1.0,
        }
    }

    /// One spec per tube radius, other parameters shared.
    pub fn ladder(eps: &[f64], delta: f64, r: f64, horizon: f64) -> Vec<RegionSpec> {
        eps.iter()
            .map(|&e| RegionSpec::new(e, delta, r, horizon))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps", self.eps),
            ("delta", self.delta),
            ("r", self.r),
            ("T", self.horizon),
            ("time_weight", self.time_weight),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "region parameter {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundOptions {
    pub integrator: IntegratorConfig,
    pub quadrature: FluxQuadrature,
    /// Nodal scan lattice; by default 0.05 in one dimension and 0.1 in two.
    pub resolution: Option<NodalResolution>,
    /// Midpoint samples per axis for the two-dimensional deficit.
    pub deficit_samples: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            integrator: IntegratorConfig::default(),
            quadrature: FluxQuadrature::default(),
            resolution: None,
            deficit_samples: 400,
        }
    }
}

/// Fraction of trajectories meeting a bad event before the horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub count: usize,
    pub bad: usize,
    pub by_status: BTreeMap<String, usize>,
    pub estimate: f64,
    /// Wilson 95% interval.
    pub interval: (f64, f64),
    pub half_width: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FluxReport {
    pub parameters: RegionSpec,
    /// `|psi_0|^2`-mass of initial points outside the good set.
    pub good_set_deficit: f64,
    pub n_term: f64,
    pub s_term: f64,
    pub i_term: f64,
    pub total_bound: f64,
    pub mc_estimate: f64,
    pub mc_half_width: f64,
    pub mc_interval: (f64, f64),
    pub mc_count: usize,
    pub mc_bad: usize,
    pub mc_by_status: BTreeMap<String, usize>,
    pub seed: u64,
    pub node_count: usize,
    /// False when the nodal set was not fully resolved or is not generic.
    pub valid: bool,
    pub diagnostics: Vec<String>,
}

impl FluxReport {
    /// `mc_estimate <= total_bound + half-width`.
    pub fn bound_holds(&self) -> bool {
        self.mc_estimate <= self.total_bound + self.mc_half_width
    }
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Draws `count` points from `|psi_0|^2` and integrates each to `horizon`,
/// escaping at radius `r`. Points starting outside the ball, on the
/// singular collar or at a node count as bad at time zero.
pub fn mc_bad_events(
    state: &WaveFunction,
    horizon: f64,
    r: f64,
    count: usize,
    seed: u64,
    config: &IntegratorConfig,
) -> Result<McEstimate> {
    if count == 0 {
        return Err(Error::Input("Monte-Carlo count must be positive".into()));
    }
    let mut cfg = config.clone();
    cfg.escape_radius = Some(r);
    cfg.validate()?;
    let ens = sample_initial(state, count, seed)?;
    let potential = state.potential();
    let node_level = cfg.node_eps * state.amplitude_scale();
    let fates: Vec<Option<Status>> = ens
        .points
        .par_iter()
        .map(|q| -> Result<Option<Status>> {
            if q.norm() > r {
                return Ok(Some(Status::Escaped));
            }
            if potential.distance_to_singular(q) <= cfg.sing_dist {
                return Ok(Some(Status::HitSingularPotential));
            }
            if state.psi(q, 0.0)?.norm() <= node_level {
                return Ok(Some(Status::HitNode));
            }
            let tr = integrate_trajectory(state, q, 0.0, horizon, &cfg)?;
            Ok(tr.status.is_bad_event().then_some(tr.status))
        })
        .collect::<Result<_>>()?;
    let mut by_status = BTreeMap::new();
    for s in fates.iter().flatten() {
        *by_status.entry(s.name().to_string()).or_insert(0) += 1;
    }
    let bad = fates.iter().flatten().count();
    let interval = wilson_interval(bad, count, 1.96);
    Ok(McEstimate {
        count,
        bad,
        by_status,
        estimate: bad as f64 / count as f64,
        interval,
        half_width: 0.5 * (interval.1 - interval.0),
        seed,
    })
}

/// Distance to the nodal set in the weighted space-time metric.
struct NodalDistance {
    dim: usize,
    points: Vec<SpacetimePoint>,
    segments: Vec<(SpacetimePoint, SpacetimePoint)>,
    weight: f64,
}

fn lift(p: &SpacetimePoint, w: f64) -> [f64; 3] {
    if p.q.dim() == 1 {
        [p.q[0], w * p.t, 0.0]
    } else {
        [p.q[0], p.q[1], w * p.t]
    }
}

impl NodalDistance {
    fn new(set: &NodalSet, weight: f64) -> Self {
        let mut points = Vec::new();
        let mut segments = Vec::new();
        if set.dim() == 1 {
            points = set.points();
        } else {
            let mut on_curve = vec![false; set.nodes.len()];
            for c in &set.curves {
                for &i in c {
                    on_curve[i] = true;
                }
                if c.len() == 1 {
                    points.push(set.nodes[c[0]].point);
                }
                for w in c.windows(2) {
                    segments.push((set.nodes[w[0]].point, set.nodes[w[1]].point));
                }
            }
            points.extend(
                set.nodes
                    .iter()
                    .zip(&on_curve)
                    .filter(|(_, &c)| !c)
                    .map(|(n, _)| n.point),
            );
        }
        NodalDistance {
            dim: set.dim(),
            points,
            segments,
            weight,
        }
    }

    fn distance(&self, p: &SpacetimePoint) -> f64 {
        let w = self.weight;
        let mut d = self
            .points
            .iter()
            .map(|n| n.distance(p, w))
            .fold(f64::INFINITY, f64::min);
        for (a, b) in &self.segments {
            d = d.min(segment_distance(lift(p, w), lift(a, w), lift(b, w)).0);
        }
        d
    }

    /// The tube boundary `{distance = eps}` as surfaces.
    fn tube(&self, eps: f64) -> Vec<Surface> {
        let w = self.weight;
        let mut out: Vec<Surface> = Vec::new();
        let vertices = self
            .points
            .iter()
            .chain(self.segments.iter().flat_map(|(a, b)| [a, b]));
        let mut seen: Vec<SpacetimePoint> = Vec::new();
        for v in vertices {
            if seen.contains(v) {
                continue;
            }
            seen.push(*v);
            out.push(if self.dim == 1 {
                Surface::Circle {
                    center: *v,
                    radius: eps,
                    time_weight: w,
                }
            } else {
                Surface::Sphere {
                    center: *v,
                    radius: eps,
                    time_weight: w,
                }
            });
        }
        for (a, b) in &self.segments {
            out.push(Surface::Tube {
                from: *a,
                to: *b,
                radius: eps,
                time_weight: w,
            });
        }
        out
    }
}

struct Group {
    nodal: NodalSet,
    mc: McEstimate,
    diagnostics: Vec<String>,
}

fn check_state(state: &WaveFunction, spec: &RegionSpec) -> Result<()> {
    let (t0, t1) = state.time_range();
    if t0 > 0.0 || t1 < spec.horizon {
        return Err(Error::Input(format!(
            "the state is defined on [{t0}, {t1}], which does not cover [0, {}]",
            spec.horizon
        )));
    }
    Ok(())
}

fn nodal_window(
    state: &WaveFunction,
    r: f64,
    horizon: f64,
    margin: f64,
) -> (NodalWindow, Vec<String>) {
    let mut notes = Vec::new();
    let ext = state.natural_extent();
    let q = ext
        .iter()
        .map(|&(lo, hi)| {
            if state.is_analytic() {
                (-r, r)
            } else {
                (lo.max(-r), hi.min(r))
            }
        })
        .collect::<Vec<_>>();
    if q.iter().any(|&(lo, hi)| lo > -r || hi < r) {
        notes.push("nodal scan clipped to the grid extent".to_string());
    }
    let (t0, t1) = state.time_range();
    let t = ((-margin).max(t0), (horizon + margin).min(t1));
    if t.0 > -margin || t.1 < horizon + margin {
        notes.push("nodal scan clipped to the state's time range".to_string());
    }
    (NodalWindow::new(q, t), notes)
}

/// `|psi_0|^2`-mass of the set where `bad` holds.
fn deficit(
    state: &WaveFunction,
    spec: &RegionSpec,
    near_node: &(dyn Fn(&Point) -> bool + Sync),
    opts: &BoundOptions,
    nodal: &NodalSet,
) -> Result<f64> {
    let potential = state.potential();
    let ext = state.natural_extent();
    if state.dim() == 1 {
        let (lo, hi) = ext[0];
        // breakpoints of the bad set, integrated piecewise
        let mut cuts = vec![lo, hi, -spec.r, spec.r];
        for s in potential.singular_set() {
            cuts.extend([s[0] - spec.delta, s[0] + spec.delta]);
        }
        for n in &nodal.nodes {
            let dt = spec.time_weight * n.point.t;
            if dt.abs() < spec.eps {
                let half = (spec.eps * spec.eps - dt * dt).sqrt();
                cuts.extend([n.point.q[0] - half, n.point.q[0] + half]);
            }
        }
        let mut cuts: Vec<f64> = cuts.into_iter().filter(|&c| c >= lo && c <= hi).collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut mass = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let mid = Point::new1(0.5 * (a + b));
            let bad = mid[0].abs() > spec.r
                || potential.distance_to_singular(&mid) < spec.delta
                || near_node(&mid);
            if bad {
                let panels = ((b - a) / 0.02).ceil() as usize;
                let mut err = None;
                mass += gauss_legendre(a, b, panels, |x| match state.psi(&Point::new1(x), 0.0) {
                    Ok(v) => v.norm_sqr(),
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }
        Ok(mass)
    } else {
        let n = opts.deficit_samples.max(16);
        let (hx, hy) = (
            (ext[0].1 - ext[0].0) / n as f64,
            (ext[1].1 - ext[1].0) / n as f64,
        );
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let x = ext[0].0 + (i as f64 + 0.5) * hx;
                let mut acc = 0.0;
                for j in 0..n {
                    let q = Point::new2(x, ext[1].0 + (j as f64 + 0.5) * hy);
                    if q.norm() > spec.r
                        || potential.distance_to_singular(&q) < spec.delta
                        || near_node(&q)
                    {
                        acc += state.psi(&q, 0.0)?.norm_sqr();
                    }
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        Ok(rows.iter().sum::<f64>() * hx * hy)
    }
}

fn walls(potential: &Potential, spec: &RegionSpec, dim: usize) -> (Vec<Surface>, Vec<Surface>) {
    let times = (0.0, spec.horizon);
    let mut s_surfaces = Vec::new();
    for c in potential.singular_set() {
        if dim == 1 {
            for side in [-1.0, 1.0] {
                s_surfaces.push(Surface::wall(c[0] + side * spec.delta, times));
            }
        } else {
            s_surfaces.push(Surface::Cylinder {
                center: *c,
                radius: spec.delta,
                times,
            });
        }
    }
    let i_surfaces = if dim == 1 {
        vec![Surface::wall(-spec.r, times), Surface::wall(spec.r, times)]
    } else {
        vec![Surface::Cylinder {
            center: Point::new2(0.0, 0.0),
            radius: spec.r,
            times,
        }]
    };
    (s_surfaces, i_surfaces)
}

fn report(
    state: &WaveFunction,
    spec: &RegionSpec,
    group: &Group,
    opts: &BoundOptions,
) -> Result<FluxReport> {
    let potential = state.potential();
    let nd = NodalDistance::new(&group.nodal, spec.time_weight);
    let shrink = 1.0 - 1e-9;
    let outside_tubes = |p: &SpacetimePoint| nd.distance(p) >= spec.eps * shrink;
    let outside_collars = |q: &Point| potential.distance_to_singular(q) >= spec.delta * shrink;
    let in_ball = |q: &Point| q.norm() <= spec.r * (1.0 + 1e-12);
    let in_time = |p: &SpacetimePoint| p.t >= 0.0 && p.t <= spec.horizon;

    let mut n_term = 0.0;
    for s in nd.tube(spec.eps) {
        let mask = |p: &SpacetimePoint| {
            in_time(p) && in_ball(&p.q) && outside_collars(&p.q) && outside_tubes(p)
        };
        n_term += flux_through_masked(state, &s, &opts.quadrature, &mask)?.value;
    }
    let (s_surfaces, i_surfaces) = walls(&potential, spec, state.dim());
    let mut s_term = 0.0;
    for s in &s_surfaces {
        let mask = |p: &SpacetimePoint| in_ball(&p.q) && outside_collars(&p.q) && outside_tubes(p);
        s_term += flux_through_masked(state, s, &opts.quadrature, &mask)?.value;
    }
    let mut i_term = 0.0;
    for s in &i_surfaces {
        let mask = |p: &SpacetimePoint| outside_collars(&p.q) && outside_tubes(p);
        i_term += flux_through_masked(state, s, &opts.quadrature, &mask)?.value;
    }
    let near_node = |q: &Point| !outside_tubes(&SpacetimePoint::new(*q, 0.0));
    let good_set_deficit = deficit(state, spec, &near_node, opts, &group.nodal)?;

    let mut diagnostics = group.diagnostics.clone();
    let mut valid = true;
    if !group.nodal.is_resolved() {
        valid = false;
        let c = &group.nodal.unresolved[0];
        diagnostics.push(format!(
            "{} unresolved nodal cells, first between {:?} and {:?}",
            group.nodal.unresolved.len(),
            c.lower,
            c.upper
        ));
    }
    if group.nodal.codimension == Codimension::CodimensionOne {
        valid = false;
        diagnostics.push(
            "nodal set has codimension-one components; tubes are approximated by point tubes"
                .into(),
        );
    }
    let mc = &group.mc;
    Ok(FluxReport {
        parameters: *spec,
        good_set_deficit,
        n_term,
        s_term,
        i_term,
        total_bound: good_set_deficit + n_term + s_term + i_term,
        mc_estimate: mc.estimate,
        mc_half_width: mc.half_width,
        mc_interval: mc.interval,
        mc_count: mc.count,
        mc_bad: mc.bad,
        mc_by_status: mc.by_status.clone(),
        seed: mc.seed,
        node_count: group.nodal.nodes.len(),
        valid,
        diagnostics,
    })
}

/// Flux bound and Monte-Carlo estimate for each spec of a ladder.
///
/// Specs sharing `r` and `T` share one nodal scan and one Monte-Carlo run.
pub fn bad_event_ladder(
    state: &WaveFunction,
    specs: &[RegionSpec],
    mc_count: usize,
    seed: u64,
    opts: &BoundOptions,
) -> Result<Vec<FluxReport>> {
    opts.quadrature.validate()?;
    for s in specs {
        s.validate()?;
        check_state(state, s)?;
    }
    let resolution = opts.resolution.unwrap_or(if state.dim() == 1 {
        NodalResolution::default()
    } else {
        NodalResolution {
            q_step: 0.1,
            t_step: 0.1,
        }
    });
    let mut groups: BTreeMap<(u64, u64), Group> = BTreeMap::new();
    for s in specs {
        let key = (s.r.to_bits(), s.horizon.to_bits());
        if groups.contains_key(&key) {
            continue;
        }
        let margin = specs
            .iter()
            .filter(|o| (o.r.to_bits(), o.horizon.to_bits()) == key)
            .map(|o| o.eps / o.time_weight)
            .fold(0.0, f64::max);
        let (window, diagnostics) = nodal_window(state, s.r, s.horizon, margin);
        let nodal = find_nodal_set(state, &window, &resolution)?;
        let mc = mc_bad_events(state, s.horizon, s.r, mc_count, seed, &opts.integrator)?;
        groups.insert(
            key,
            Group {
                nodal,
                mc,
                diagnostics,
            },
        );
    }
    specs
        .iter()
        .map(|s| {
            report(
                state,
                s,
                &groups[&(s.r.to_bits(), s.horizon.to_bits())],
                opts,
            )
        })
        .collect()
}

/// [`bad_event_ladder`] for a single spec.
pub fn bad_event_bound(
    state: &WaveFunction,
    spec: &RegionSpec,
    mc_count: usize,
    seed: u64,
    opts: &BoundOptions,
) -> Result<FluxReport> {
    Ok(
        bad_event_ladder(state, std::slice::from_ref(spec), mc_count, seed, opts)?
            .pop()
            .expect("one report per spec"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{HarmonicExpansion, Preset, Units};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn wilson_interval_matches_known_values() {
        // 0 of 100: upper end z^2 / (n + z^2)
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!((hi - 1.96f64.powi(2) / (100.0 + 1.96f64.powi(2))).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert!((hi - 0.596_17).abs() < 1e-4);
    }

    #[test]
    fn ground_state_has_an_empty_bound() {
        let s = Preset::Ground.build();
        let rep = bad_event_bound(
            &s,
            &RegionSpec::new(0.1, 0.1, 10.0, 2.0),
            500,
            1,
            &BoundOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.n_term, 0.0);
        assert_eq!(rep.s_term, 0.0);
        assert!(
            rep.i_term < 1e-40 && rep.good_set_deficit < 1e-40,
            "{rep:?}"
        );
        assert_eq!(rep.mc_estimate, 0.0);
        assert!(rep.valid && rep.bound_holds());
    }

    #[test]
    fn superposition_terms_shrink_with_the_tube() {
        let s = Preset::NodeSuperposition.build();
        let specs = RegionSpec::ladder(&[0.2, 0.1, 0.05], 0.1, 10.0, PI);
        let reps = bad_event_ladder(&s, &specs, 400, 7, &BoundOptions::default()).unwrap();
        for w in reps.windows(2) {
            assert!(w[1].n_term < w[0].n_term);
            assert!(w[1].good_set_deficit < w[0].good_set_deficit);
        }
        assert!(reps[2].n_term < 0.5 * reps[0].n_term);
        for r in &reps {
            assert!(r.valid, "{:?}", r.diagnostics);
            assert_eq!(r.node_count, 5);
            assert_eq!(r.s_term, 0.0);
            assert!(r.bound_holds());
            let sum = r.good_set_deficit + r.n_term + r.s_term + r.i_term;
            assert_eq!(r.total_bound, sum);
        }
    }

    #[test]
    fn deficit_matches_the_node_intervals() {
        // at t = 0 the tubes around (+-1, 0) cut [1 - eps, 1 + eps] from the line
        let s = Preset::NodeSuperposition.build();
        let eps = 0.1;
        let rep = bad_event_bound(
            &s,
            &RegionSpec::new(eps, 0.1, 10.0, 0.5),
            10,
            1,
            &BoundOptions::default(),
        )
        .unwrap();
        let rho = |q: f64| s.psi(&Point::new1(q), 0.0).unwrap().norm_sqr();
        let mut oracle = 0.0;
        let n = 20_000;
        for c in [-1.0, 1.0] {
            for i in 0..n {
                let q = c - eps + 2.0 * eps * (i as f64 + 0.5) / n as f64;
                oracle += rho(q) * 2.0 * eps / n as f64;
            }
        }
        assert!(
            (rep.good_set_deficit - oracle).abs() < 1e-7 * oracle,
            "{} vs {oracle}",
            rep.good_set_deficit
        );
    }

    #[test]
    fn two_dimensional_vortex_bound() {
        let c = Complex64::new(0.5f64.sqrt(), 0.0);
        let s = WaveFunction::Analytic(
            HarmonicExpansion::new(
                Units::natural(2),
                1.0,
                &[
                    (Complex64::new(1.0, 0.0), vec![0, 0]),
                    (c, vec![1, 0]),
                    (c * Complex64::i(), vec![0, 1]),
                ],
            )
            .unwrap(),
        );
        let opts = BoundOptions {
            resolution: Some(NodalResolution {
                q_step: 0.1,
                t_step: 0.25,
            }),
            ..Default::default()
        };
        let specs = RegionSpec::ladder(&[0.2, 0.1], 0.1, 4.0, 1.0);
        let reps = bad_event_ladder(&s, &specs, 200, 3, &opts).unwrap();
        assert!(reps[0].valid);
        assert!(reps[1].n_term < reps[0].n_term && reps[1].n_term > 0.0);
        assert!(reps.iter().all(|r| r.bound_holds()));
    }

    #[test]
    fn singular_collar_flux_shrinks_with_delta() {
        use crate::field::Grid;
        use crate::propagator::{evolve_splitstep_history, PropagatorConfig};
        use crate::state::{GaussianPacket, GridState, PotentialKind, DEFAULT_CAP};
        // a packet reflecting off a repulsive 2/|q| centre
        let units = Units::natural(1);
        let packet =
            WaveFunction::Packet(GaussianPacket::new(-4.0, 2.0, 0.7, units.clone()).unwrap());
        let grid = Grid::periodic_1d(-16.0, 16.0, 4096).unwrap();
        let potential = Potential::new(
            PotentialKind::PointSingular {
                centers: vec![Point::new1(0.0)],
                couplings: vec![2.0],
            },
            units,
        )
        .unwrap();
        let g = GridState::new(packet.sample(&grid, 0.0).unwrap(), potential, DEFAULT_CAP).unwrap();
        let s = WaveFunction::History(
            evolve_splitstep_history(&g, 3.0, 0.05, &PropagatorConfig::default()).unwrap(),
        );
        let specs: Vec<_> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&d| RegionSpec::new(0.1, d, 8.0, 3.0))
            .collect();
        let reps = bad_event_ladder(&s, &specs, 200, 5, &BoundOptions::default()).unwrap();
        for w in reps.windows(2) {
            assert!(
                w[1].s_term < w[0].s_term,
                "{} !< {}",
                w[1].s_term,
                w[0].s_term
            );
            assert!(w[1].good_set_deficit <= w[0].good_set_deficit);
        }
        for r in &reps {
            assert!(r.s_term > 0.0 && r.s_term.is_finite());
            assert!(r.bound_holds(), "{r:?}");
        }
    }

    #[test]
    fn invalid_parameters_are_configuration_errors() {
        let s = Preset::Ground.build();
        let bad = RegionSpec::new(0.0, 0.1, 10.0, 1.0);
        assert!(matches!(
            bad_event_bound(&s, &bad, 10, 0, &BoundOptions::default()),
            Err(Error::Config(_))
        ));
        let ok = RegionSpec::new(0.1, 0.1, 10.0, 1.0);
        assert!(matches!(
            bad_event_bound(&s, &ok, 0, 0, &BoundOptions::default()),
            Err(Error::Input(_))
        ));
    }
}
