//! Zeros of the wave function in configuration-space-time.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::field::{Point, SpacetimePoint};
use crate::state::WaveFunction;

/// Bound on `|psi|` at a refined node, relative to the amplitude scale.
pub const NODE_RESIDUAL: f64 = 1e-10;
/// Refined nodes closer than this are merged.
pub const DEDUP_DISTANCE: f64 = 1e-6;

const MAX_DEPTH: usize = 3;
const NEWTON_ITERATIONS: usize = 60;
const POLISH_ITERATIONS: usize = 30;
/// Smallest-to-largest singular value ratio below which a node counts as degenerate.
const DEGENERACY_RATIO: f64 = 1e-3;
/// Largest final Newton step accepted as convergence.
const STEP_TOLERANCE: f64 = 1e-9;

/// Space-time box searched for nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalWindow {
    /// Spatial range per axis.
    pub q: Vec<(f64, f64)>,
    pub t: (f64, f64),
}

impl NodalWindow {
    pub fn new(q: Vec<(f64, f64)>, t: (f64, f64)) -> Self {
        NodalWindow { q, t }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    fn validate(&self) -> Result<()> {
        if self.q.is_empty() || self.q.len() > 2 {
            return Err(Error::Input(format!(
                "nodal windows have 1 or 2 spatial ranges, got {}",
                self.q.len()
            )));
        }
        for &(lo, hi) in &self.q {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Input(format!(
                    "spatial range [{lo}, {hi}] is empty or not finite"
                )));
            }
        }
        let (t0, t1) = self.t;
        let ok =
            t0.is_finite() && t1.is_finite() && if self.dim() == 1 { t0 < t1 } else { t0 <= t1 };
        if !ok {
            return Err(Error::Input(format!(
                "time range [{t0}, {t1}] is empty or not finite"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: &SpacetimePoint, slack: f64) -> bool {
        p.t >= self.t.0 - slack
            && p.t <= self.t.1 + slack
            && self
                .q
                .iter()
                .enumerate()
                .all(|(k, &(lo, hi))| p.q[k] >= lo - slack && p.q[k] <= hi + slack)
    }
}

/// Lattice spacing of the coarse scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalResolution {
    pub q_step: f64,
    pub t_step: f64,
}

impl Default for NodalResolution {
    fn default() -> Self {
        NodalResolution {
            q_step: 0.05,
            t_step: 0.05,
        }
    }
}

impl NodalResolution {
    fn validate(&self) -> Result<()> {
        if !(self.q_step > 0.0
            && self.t_step > 0.0
            && self.q_step.is_finite()
            && self.t_step.is_finite())
        {
            return Err(Error::Input(
                "nodal resolution steps must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Node {
    pub point: SpacetimePoint,
    /// `|psi|` at the refined point.
    pub residual: f64,
    /// The Jacobian of `(Re psi, Im psi)` is rank deficient here.
    pub degenerate: bool,
    /// The node belongs to a continuum of codimension one in space-time.
    pub on_nodal_line: bool,
}

/// A flagged scan cell in which refinement did not converge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnresolvedCell {
    pub lower: SpacetimePoint,
    pub upper: SpacetimePoint,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Codimension {
    Empty,
    /// Isolated points of `(q, t)`, the generic case for one dimension.
    Points,
    /// Curves in `(x, y, t)`, the generic case for two dimensions.
    Curves,
    /// Lines (one dimension) or surfaces (two dimensions) of nodes. Not generic.
    CodimensionOne,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodalSet {
    pub window: NodalWindow,
    /// Sorted by time, then position.
    pub nodes: Vec<Node>,
    /// Two dimensions only: polylines through time slices, as indices into `nodes`.
    pub curves: Vec<Vec<usize>>,
    pub unresolved: Vec<UnresolvedCell>,
    pub codimension: Codimension,
}

impl NodalSet {
    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn is_resolved(&self) -> bool {
        self.unresolved.is_empty()
    }

    pub fn points(&self) -> Vec<SpacetimePoint> {
        self.nodes.iter().map(|n| n.point).collect()
    }

    /// CSV with header `q,t,residual` in one dimension and `q1,q2,t,residual` in two.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.dim() == 1 {
            w.write_record(["q", "t", "residual"])?;
        } else {
            w.write_record(["q1", "q2", "t", "residual"])?;
        }
        for n in &self.nodes {
            let mut rec: Vec<String> = n.point.q.as_slice().iter().map(|x| x.to_string()).collect();
            rec.push(n.point.t.to_string());
            rec.push(n.residual.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Plane {
    /// Coordinates `(q, t)` of a one-dimensional state.
    SpaceTime,
    /// Coordinates `(x, y)` of a two-dimensional state at a fixed time.
    Slice(f64),
}

#[derive(Clone, Copy)]
struct Local {
    psi: Complex64,
    du: Complex64,
    dv: Complex64,
}

impl Local {
    fn det(&self) -> f64 {
        (self.du.conj() * self.dv).im
    }
}

#[derive(Clone, Copy, Debug)]
struct Refined {
    x: [f64; 2],
    residual: f64,
    degenerate: bool,
    null: [f64; 2],
}

struct Cell {
    lo: [f64; 2],
    hi: [f64; 2],
}

#[derive(Default)]
struct Outcome {
    found: Vec<Refined>,
    unresolved: Vec<Cell>,
}

struct LeastSquares {
    x: [f64; 2],
    ratio: f64,
    null: [f64; 2],
}

/// Min-norm least-squares solution of `a x = b`.
fn least_squares(rows: &[[f64; 2]], b: &[f64]) -> Option<LeastSquares> {
    let a = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
    let svd = a.svd(true, true);
    let s = &svd.singular_values;
    let (smax, smin) = (s[0].max(s[1]), s[0].min(s[1]));
    if !(smax > 0.0 && smax.is_finite()) {
        return None;
    }
    let x = svd
        .solve(&DVector::from_column_slice(b), smax * 1e-13)
        .ok()?;
    let vt = svd.v_t.as_ref()?;
    let k = if s[0] <= s[1] { 0 } else { 1 };
    Some(LeastSquares {
        x: [x[0], x[1]],
        ratio: smin / smax,
        null: [vt[(k, 0)], vt[(k, 1)]],
    })
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn flagged(corners: &[Complex64]) -> bool {
    let spans = |f: fn(&Complex64) -> f64| {
        let lo = corners.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = corners.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        lo <= 0.0 && hi >= 0.0
    };
    spans(|c| c.re) && spans(|c| c.im)
}

struct Scanner<'a> {
    state: &'a WaveFunction,
    plane: Plane,
    scale: f64,
    /// Domain of the state in plane coordinates.
    bounds: [(f64, f64); 2],
}

impl Scanner<'_> {
    fn point(&self, x: [f64; 2]) -> SpacetimePoint {
        match self.plane {
            Plane::SpaceTime => SpacetimePoint::new(Point::new1(x[0]), x[1]),
            Plane::Slice(t) => SpacetimePoint::new(Point::new2(x[0], x[1]), t),
        }
    }

    fn clamp(&self, x: [f64; 2]) -> [f64; 2] {
        [
            x[0].clamp(self.bounds[0].0, self.bounds[0].1),
            x[1].clamp(self.bounds[1].0, self.bounds[1].1),
        ]
    }

    fn psi(&self, x: [f64; 2]) -> Result<Complex64> {
        let p = self.point(x);
        self.state.psi(&p.q, p.t)
    }

    fn eval(&self, x: [f64; 2]) -> Result<Local> {
        let p = self.point(x);
        let jet = self.state.jet(&p.q, p.t)?;
        let dv = match self.plane {
            Plane::SpaceTime => jet.dt,
            Plane::Slice(_) => jet.grad[1],
        };
        Ok(Local {
            psi: jet.psi,
            du: jet.grad[0],
            dv,
        })
    }

    /// Gauss-Newton on `(Re psi, Im psi)`, then on the system augmented by
    /// the Jacobian determinant when the node is degenerate.
    fn refine(&self, start: [f64; 2], max_step: f64) -> Result<Option<Refined>> {
        let mut x = self.clamp(start);
        let mut last = f64::INFINITY;
        for _ in 0..NEWTON_ITERATIONS {
            let l = self.eval(x)?;
            let Some(ls) = least_squares(
                &[[l.du.re, l.dv.re], [l.du.im, l.dv.im]],
                &[l.psi.re, l.psi.im],
            ) else {
                return Ok(None);
            };
            let len = ls.x[0].hypot(ls.x[1]);
            if !len.is_finite() {
                return Ok(None);
            }
            let f = if len > max_step { max_step / len } else { 1.0 };
            x = self.clamp([x[0] - f * ls.x[0], x[1] - f * ls.x[1]]);
            last = f * len;
            if len < 1e-14 * (1.0 + x[0].abs().max(x[1].abs())) {
                break;
            }
        }
        let l = self.eval(x)?;
        let Some(mut ls) = least_squares(&[[l.du.re, l.dv.re], [l.du.im, l.dv.im]], &[0.0, 0.0])
        else {
            return Ok(None);
        };
        let degenerate = ls.ratio < DEGENERACY_RATIO;
        if degenerate {
            let c = l.du.norm().max(l.dv.norm());
            let h = 1e-4 * max_step;
            for _ in 0..POLISH_ITERATIONS {
                let l = self.eval(x)?;
                let d = |dx: [f64; 2]| -> Result<f64> {
                    Ok(self.eval(self.clamp([x[0] + dx[0], x[1] + dx[1]]))?.det())
                };
                let gu = (d([h, 0.0])? - d([-h, 0.0])?) / (2.0 * h * c);
                let gv = (d([0.0, h])? - d([0.0, -h])?) / (2.0 * h * c);
                let Some(step) = least_squares(
                    &[[l.du.re, l.dv.re], [l.du.im, l.dv.im], [gu, gv]],
                    &[l.psi.re, l.psi.im, l.det() / c],
                ) else {
                    return Ok(None);
                };
                let len = step.x[0].hypot(step.x[1]);
                if !len.is_finite() {
                    return Ok(None);
                }
                let f = if len > max_step { max_step / len } else { 1.0 };
                x = self.clamp([x[0] - f * step.x[0], x[1] - f * step.x[1]]);
                last = f * len;
                if len < 1e-14 * (1.0 + x[0].abs().max(x[1].abs())) {
                    break;
                }
            }
            let l = self.eval(x)?;
            if let Some(again) =
                least_squares(&[[l.du.re, l.dv.re], [l.du.im, l.dv.im]], &[0.0, 0.0])
            {
                ls = again;
            }
        }
        let residual = self.psi(x)?.norm();
        if residual <= NODE_RESIDUAL * self.scale && last <= STEP_TOLERANCE {
            Ok(Some(Refined {
                x,
                residual,
                degenerate,
                null: ls.null,
            }))
        } else {
            Ok(None)
        }
    }

    /// Whether Newton started beside a degenerate node along its null
    /// direction lands on a different node.
    fn on_line(&self, r: &Refined, cell: f64) -> Result<bool> {
        if !r.degenerate {
            return Ok(false);
        }
        let d = 0.25 * cell;
        for s in [1.0, -1.0] {
            let start = [r.x[0] + s * d * r.null[0], r.x[1] + s * d * r.null[1]];
            if let Some(other) = self.refine(start, cell)? {
                if dist(other.x, r.x) > 0.5 * d {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn resolve(&self, cell: Cell, depth: usize) -> Result<Outcome> {
        let diag = dist(cell.lo, cell.hi);
        let center = [
            0.5 * (cell.lo[0] + cell.hi[0]),
            0.5 * (cell.lo[1] + cell.hi[1]),
        ];
        let mut out = Outcome::default();
        let hit = self.refine(center, 2.0 * diag)?;
        if let Some(r) = hit {
            out.found.push(r);
            if dist(r.x, center) <= 1.5 * diag {
                return Ok(out);
            }
        }
        if depth == MAX_DEPTH {
            if hit.is_none() {
                out.unresolved.push(cell);
            }
            return Ok(out);
        }
        let mid = center;
        let xs = [cell.lo[0], mid[0], cell.hi[0]];
        let ys = [cell.lo[1], mid[1], cell.hi[1]];
        let mut v = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                v[i][j] = self.psi([xs[i], ys[j]])?;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                if flagged(&[v[i][j], v[i + 1][j], v[i][j + 1], v[i + 1][j + 1]]) {
                    let sub = self.resolve(
                        Cell {
                            lo: [xs[i], ys[j]],
                            hi: [xs[i + 1], ys[j + 1]],
                        },
                        depth + 1,
                    )?;
                    out.found.extend(sub.found);
                    out.unresolved.extend(sub.unresolved);
                }
            }
        }
        Ok(out)
    }

    /// Nodes of the plane inside the box `[lo, hi]`.
    fn scan(
        &self,
        lo: [f64; 2],
        hi: [f64; 2],
        step: [f64; 2],
    ) -> Result<(Vec<(Refined, bool)>, Vec<Cell>)> {
        let n = [0, 1].map(|k| (((hi[k] - lo[k]) / step[k]).ceil() as usize).max(1));
        let h = [0, 1].map(|k| (hi[k] - lo[k]) / n[k] as f64);
        let coord = |k: usize, i: usize| {
            if i == n[k] {
                hi[k]
            } else {
                lo[k] + i as f64 * h[k]
            }
        };
        let stride = n[1] + 1;
        let values: Vec<Complex64> = (0..(n[0] + 1) * stride)
            .into_par_iter()
            .map(|f| self.psi([coord(0, f / stride), coord(1, f % stride)]))
            .collect::<Result<_>>()?;
        let cells: Vec<Cell> = (0..n[0])
            .flat_map(|i| (0..n[1]).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                let at = |a: usize, b: usize| values[a * stride + b];
                flagged(&[at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)])
            })
            .map(|(i, j)| Cell {
                lo: [coord(0, i), coord(1, j)],
                hi: [coord(0, i + 1), coord(1, j + 1)],
            })
            .collect();
        let outcomes: Vec<Outcome> = cells
            .into_par_iter()
            .map(|c| self.resolve(c, 0))
            .collect::<Result<_>>()?;
        let mut found: Vec<Refined> = Vec::new();
        let mut unresolved = Vec::new();
        for o in outcomes {
            for r in o.found {
                let inside = (0..2).all(|k| r.x[k] >= lo[k] - 1e-9 && r.x[k] <= hi[k] + 1e-9);
                if inside && found.iter().all(|f| dist(f.x, r.x) > DEDUP_DISTANCE) {
                    found.push(r);
                }
            }
            unresolved.extend(o.unresolved);
        }
        let cell = h[0].min(h[1]);
        let marked = found
            .into_par_iter()
            .map(|r| Ok((r, self.on_line(&r, cell)?)))
            .collect::<Result<_>>()?;
        Ok((marked, unresolved))
    }
}

fn check_domain(state: &WaveFunction, window: &NodalWindow) -> Result<()> {
    if window.dim() != state.dim() {
        return Err(Error::Input(format!(
            "window has dimension {} but the state has dimension {}",
            window.dim(),
            state.dim()
        )));
    }
    let (t0, t1) = state.time_range();
    if window.t.0 < t0 || window.t.1 > t1 {
        return Err(Error::Input(format!(
            "time window {:?} exceeds the state's time range [{t0}, {t1}]",
            window.t
        )));
    }
    if !state.is_analytic() {
        for (k, (&(lo, hi), &(elo, ehi))) in
            window.q.iter().zip(&state.natural_extent()).enumerate()
        {
            if lo < elo || hi > ehi {
                return Err(Error::Input(format!(
                    "window axis {k} [{lo}, {hi}] exceeds the grid extent [{elo}, {ehi}]"
                )));
            }
        }
    }
    Ok(())
}

fn sort_key(p: &SpacetimePoint) -> (f64, f64, f64) {
    let y = if p.q.dim() == 2 { p.q[1] } else { 0.0 };
    (p.t, p.q[0], y)
}

/// Nodes of `state` in `window`.
///
/// A lattice with the given resolution is scanned for cells where both
/// `Re psi` and `Im psi` change sign; each flagged cell is refined by
/// Gauss-Newton to `|psi| < NODE_RESIDUAL * sup|psi|`, subdividing cells
/// whose refinement fails. In two dimensions the scan runs on time slices
/// and the slice nodes are linked into polylines.
pub fn find_nodal_set(
    state: &WaveFunction,
    window: &NodalWindow,
    resolution: &NodalResolution,
) -> Result<NodalSet> {
    window.validate()?;
    resolution.validate()?;
    check_domain(state, window)?;
    let scale = state.amplitude_scale();
    let extent: Vec<(f64, f64)> = if state.is_analytic() {
        vec![(f64::NEG_INFINITY, f64::INFINITY); state.dim()]
    } else {
        state.natural_extent()
    };
    let mut nodes: Vec<Node> = Vec::new();
    let mut unresolved = Vec::new();
    let mut slices: Vec<Vec<usize>> = Vec::new();
    let times: Vec<f64> = if window.dim() == 1 {
        vec![f64::NAN]
    } else {
        let (t0, t1) = window.t;
        let n = ((t1 - t0) / resolution.t_step).ceil() as usize;
        (0..=n)
            .map(|k| {
                if k == n {
                    t1
                } else {
                    t0 + k as f64 * resolution.t_step
                }
            })
            .collect()
    };
    for &t in &times {
        let (plane, lo, hi, step) = if window.dim() == 1 {
            let (q, tr) = (window.q[0], window.t);
            (
                Plane::SpaceTime,
                [q.0, tr.0],
                [q.1, tr.1],
                [resolution.q_step, resolution.t_step],
            )
        } else {
            let (x, y) = (window.q[0], window.q[1]);
            (
                Plane::Slice(t),
                [x.0, y.0],
                [x.1, y.1],
                [resolution.q_step; 2],
            )
        };
        let bounds = if window.dim() == 1 {
            [extent[0], state.time_range()]
        } else {
            [extent[0], extent[1]]
        };
        let scanner = Scanner {
            state,
            plane,
            scale,
            bounds,
        };
        let (found, cells) = scanner.scan(lo, hi, step)?;
        let mut slice = Vec::new();
        for (r, line) in found {
            slice.push(nodes.len());
            nodes.push(Node {
                point: scanner.point(r.x),
                residual: r.residual,
                degenerate: r.degenerate,
                on_nodal_line: line,
            });
        }
        slices.push(slice);
        unresolved.extend(cells.into_iter().map(|c| UnresolvedCell {
            lower: scanner.point(c.lo),
            upper: scanner.point(c.hi),
            reason: "refinement did not converge".into(),
        }));
    }
    let curves = if window.dim() == 2 {
        link_slices(
            &nodes,
            &slices,
            4.0 * resolution.q_step.max(resolution.t_step),
        )
    } else {
        Vec::new()
    };
    // sort nodes, remapping curve indices
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| {
        sort_key(&nodes[a].point)
            .partial_cmp(&sort_key(&nodes[b].point))
            .unwrap()
    });
    let mut rank = vec![0; nodes.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let nodes: Vec<Node> = order.iter().map(|&i| nodes[i]).collect();
    let curves = curves
        .into_iter()
        .map(|c| c.into_iter().map(|i| rank[i]).collect())
        .collect();
    let codimension = if nodes.is_empty() {
        Codimension::Empty
    } else if nodes.iter().any(|n| n.on_nodal_line) {
        Codimension::CodimensionOne
    } else if window.dim() == 1 {
        Codimension::Points
    } else {
        Codimension::Curves
    };
    Ok(NodalSet {
        window: window.clone(),
        nodes,
        curves,
        unresolved,
        codimension,
    })
}

/// Greedy nearest-neighbour linking of consecutive slices.
fn link_slices(nodes: &[Node], slices: &[Vec<usize>], reach: f64) -> Vec<Vec<usize>> {
    let mut curves: Vec<Vec<usize>> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for slice in slices {
        let members: Vec<usize> = slice
            .iter()
            .copied()
            .filter(|&i| !nodes[i].on_nodal_line)
            .collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (a, &c) in open.iter().enumerate() {
            let end = nodes[*curves[c].last().expect("curves are non-empty")]
                .point
                .q;
            for (b, &i) in members.iter().enumerate() {
                let d = end.distance(&nodes[i].point.q);
                if d <= reach {
                    pairs.push((d, a, b));
                }
            }
        }
        pairs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut used_open = vec![false; open.len()];
        let mut target = vec![None; members.len()];
        for (_, a, b) in pairs {
            if !used_open[a] && target[b].is_none() {
                used_open[a] = true;
                target[b] = Some(open[a]);
            }
        }
        let mut next = Vec::new();
        for (b, &i) in members.iter().enumerate() {
            let c = match target[b] {
                Some(c) => c,
                None => {
                    curves.push(Vec::new());
                    curves.len() - 1
                }
            };
            curves[c].push(i);
            next.push(c);
        }
        open = next;
    }
    curves
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{HarmonicExpansion, Preset, Units};
    use std::f64::consts::PI;

    fn window_1d(q: (f64, f64), t: (f64, f64)) -> NodalWindow {
        NodalWindow::new(vec![q], t)
    }

    fn eigenstate(n: usize) -> WaveFunction {
        WaveFunction::Analytic(
            HarmonicExpansion::new(
                Units::natural(1),
                1.0,
                &[(Complex64::new(1.0, 0.0), vec![n])],
            )
            .unwrap(),
        )
    }

    #[test]
    fn superposition_has_three_nodes_in_one_period() {
        let s = Preset::NodeSuperposition.build();
        let set = find_nodal_set(
            &s,
            &window_1d((-2.0, 2.0), (-0.5, 2.0)),
            &NodalResolution::default(),
        )
        .unwrap();
        assert!(set.is_resolved());
        assert_eq!(set.codimension, Codimension::Points);
        let expected = [(-1.0, 0.0), (1.0, 0.0), (0.0, PI / 2.0)];
        assert_eq!(set.nodes.len(), 3, "{:?}", set.nodes);
        for (n, (q, t)) in set.nodes.iter().zip(expected) {
            assert!(
                (n.point.q[0] - q).abs() < 1e-8 && (n.point.t - t).abs() < 1e-8,
                "{n:?}"
            );
            assert!(n.residual < NODE_RESIDUAL * s.amplitude_scale());
        }
        assert!(!set.nodes[0].degenerate && set.nodes[2].degenerate);
    }

    #[test]
    fn resolution_does_not_change_the_nodes() {
        let s = Preset::NodeSuperposition.build();
        let w = window_1d((-2.0, 2.0), (-0.5, 2.0));
        let a = find_nodal_set(&s, &w, &NodalResolution::default()).unwrap();
        let b = find_nodal_set(
            &s,
            &w,
            &NodalResolution {
                q_step: 0.13,
                t_step: 0.07,
            },
        )
        .unwrap();
        assert_eq!(a.nodes.len(), b.nodes.len());
        for (x, y) in a.nodes.iter().zip(&b.nodes) {
            assert!(x.point.distance(&y.point, 1.0) < 1e-8);
        }
    }

    #[test]
    fn ground_state_has_no_nodes() {
        let set = find_nodal_set(
            &eigenstate(0),
            &window_1d((-4.0, 4.0), (0.0, 3.0)),
            &NodalResolution::default(),
        )
        .unwrap();
        assert!(set.nodes.is_empty() && set.is_resolved());
        assert_eq!(set.codimension, Codimension::Empty);
    }

    #[test]
    fn stationary_nodes_form_lines() {
        let set = find_nodal_set(
            &eigenstate(2),
            &window_1d((-2.0, 2.0), (0.0, 1.0)),
            &NodalResolution::default(),
        )
        .unwrap();
        assert_eq!(set.codimension, Codimension::CodimensionOne);
        assert!(set.nodes.len() > 10);
        for n in &set.nodes {
            assert!((n.point.q[0].abs() - 0.5f64.sqrt()).abs() < 1e-9);
            assert!(n.on_nodal_line);
        }
    }

    #[test]
    fn vortex_circles_the_origin() {
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
        let w = NodalWindow::new(vec![(-2.0, 2.0), (-2.0, 2.0)], (0.0, 1.0));
        let set = find_nodal_set(
            &s,
            &w,
            &NodalResolution {
                q_step: 0.1,
                t_step: 0.25,
            },
        )
        .unwrap();
        assert_eq!(set.codimension, Codimension::Curves);
        assert_eq!(set.nodes.len(), 5);
        assert_eq!(set.curves, vec![vec![0, 1, 2, 3, 4]]);
        for n in &set.nodes {
            let t = n.point.t;
            assert!(
                (n.point.q[0] + t.cos()).abs() < 1e-9 && (n.point.q[1] + t.sin()).abs() < 1e-9,
                "{n:?}"
            );
        }
    }

    #[test]
    fn csv_lists_nodes() {
        let s = Preset::NodeSuperposition.build();
        let set = find_nodal_set(
            &s,
            &window_1d((-2.0, 2.0), (-0.5, 2.0)),
            &NodalResolution::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("q,t,residual\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn bad_windows_are_rejected() {
        let s = Preset::NodeSuperposition.build();
        let r = NodalResolution::default();
        assert!(matches!(
            find_nodal_set(&s, &window_1d((1.0, -1.0), (0.0, 1.0)), &r),
            Err(Error::Input(_))
        ));
        let w = NodalWindow::new(vec![(-1.0, 1.0), (-1.0, 1.0)], (0.0, 1.0));
        assert!(matches!(find_nodal_set(&s, &w, &r), Err(Error::Input(_))));
    }
}
