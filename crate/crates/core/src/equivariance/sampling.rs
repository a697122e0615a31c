use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{Axis, Grid, Point, SpectralCdf};
use crate::state::WaveFunction;

/// Number of nodes in the 1D inverse-CDF table.
pub const TABLE_SIZE: usize = 1 << 14;

/// Points per axis of the grid used to build spectral CDFs of closed-form states.
const CDF_POINTS: usize = 2048;

/// Generator for draw `index` of a run seeded with `seed`.
///
/// Each index owns a separate ChaCha stream, so draws do not depend on
/// the order or thread in which they are made.
pub fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Periodic grid on which the density of `state` at time `t` is resolved.
pub fn density_grid(state: &WaveFunction) -> Result<Grid> {
    match state {
        WaveFunction::Grid(s) => Ok(s.grid().clone()),
        WaveFunction::History(h) => Ok(h.grid().clone()),
        _ => Grid::new(
            state
                .natural_extent()
                .iter()
                .map(|&(lo, hi)| Axis::periodic(lo, hi, CDF_POINTS))
                .collect::<Result<Vec<_>>>()?,
        ),
    }
}

/// Spectral CDF of `|psi_t|^2` for a 1D state.
pub fn density_cdf(state: &WaveFunction, t: f64) -> Result<SpectralCdf> {
    if state.dim() != 1 {
        return Err(Error::Input(
            "cumulative distributions are one-dimensional".into(),
        ));
    }
    let grid = density_grid(state)?;
    SpectralCdf::new(&state.sample(&grid, t)?.abs_squared())
}

/// Inverse CDF through monotone cubic (Fritsch-Carlson) interpolation of `x(F)`.
#[derive(Clone, Debug)]
pub struct InverseCdf {
    f: Vec<f64>,
    x: Vec<f64>,
    slope: Vec<f64>,
}

impl InverseCdf {
    pub fn new(cdf: &SpectralCdf, size: usize) -> Result<Self> {
        let (lo, hi) = cdf.extent();
        let mut f = Vec::with_capacity(size);
        let mut x = Vec::with_capacity(size);
        let total = cdf.cdf(hi);
        let mut last = f64::NEG_INFINITY;
        for i in 0..size {
            let xi = lo + (hi - lo) * i as f64 / (size - 1) as f64;
            let fi = (cdf.cdf(xi) / total).clamp(0.0, 1.0);
            if i == 0 || fi > last + 1e-15 {
                f.push(fi);
                x.push(xi);
                last = fi;
            }
        }
        if f.len() < 2 {
            return Err(Error::Precondition(
                "density has no mass on its grid".into(),
            ));
        }
        *f.first_mut().expect("non-empty") = 0.0;
        *f.last_mut().expect("non-empty") = 1.0;
        let slope = fritsch_carlson(&f, &x);
        Ok(InverseCdf { f, x, slope })
    }

    /// `x` with `F(x) = u`.
    pub fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let k = match self.f.partition_point(|&fi| fi <= u) {
            0 => 0,
            p if p >= self.f.len() => self.f.len() - 2,
            p => p - 1,
        };
        let (f0, f1) = (self.f[k], self.f[k + 1]);
        let h = f1 - f0;
        let s = (u - f0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        h00 * self.x[k]
            + h10 * h * self.slope[k]
            + h01 * self.x[k + 1]
            + h11 * h * self.slope[k + 1]
    }
}

/// Monotone cubic Hermite slopes for increasing data.
fn fritsch_carlson(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let delta: Vec<f64> = (0..n - 1)
        .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
        .collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        m[i] = if delta[i - 1] * delta[i] <= 0.0 {
            0.0
        } else {
            0.5 * (delta[i - 1] + delta[i])
        };
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let (a, b) = (m[i] / delta[i], m[i + 1] / delta[i]);
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[i] = tau * a * delta[i];
            m[i + 1] = tau * b * delta[i];
        }
    }
    m
}

/// `count` independent draws from `|psi_t|^2`.
pub fn sample_density(state: &WaveFunction, t: f64, count: usize, seed: u64) -> Result<Vec<Point>> {
    if count == 0 {
        return Err(Error::Input("sample count must be positive".into()));
    }
    match state.dim() {
        1 => {
            let inv = InverseCdf::new(&density_cdf(state, t)?, TABLE_SIZE)?;
            Ok((0..count)
                .map(|i| {
                    let u: f64 = point_rng(seed, i as u64).random();
                    Point::new1(inv.eval(u))
                })
                .collect())
        }
        _ => sample_rejection(state, t, count, seed),
    }
}

/// Rejection sampling from an isotropic Gaussian envelope fitted to the density.
fn sample_rejection(state: &WaveFunction, t: f64, count: usize, seed: u64) -> Result<Vec<Point>> {
    let ext = state.natural_extent();
    let n = 241;
    let coord = |a: usize, i: usize| ext[a].0 + (ext[a].1 - ext[a].0) * i as f64 / (n - 1) as f64;
    let mut samples = Vec::with_capacity(n * n);
    let (mut mass, mut mean) = (0.0, [0.0; 2]);
    for i in 0..n {
        for j in 0..n {
            let p = Point::new2(coord(0, i), coord(1, j));
            let rho = state.psi(&p, t)?.norm_sqr();
            mass += rho;
            mean[0] += rho * p[0];
            mean[1] += rho * p[1];
            samples.push((p, rho));
        }
    }
    if mass <= 0.0 {
        return Err(Error::Precondition(
            "density has no mass in the sampling window".into(),
        ));
    }
    mean[0] /= mass;
    mean[1] /= mass;
    let var = samples
        .iter()
        .map(|(p, rho)| rho * ((p[0] - mean[0]).powi(2) + (p[1] - mean[1]).powi(2)))
        .sum::<f64>()
        / mass;
    let sd = 1.5 * (0.5 * var).sqrt().max(1e-3);
    let envelope = |p: &Point| {
        let r2 = (p[0] - mean[0]).powi(2) + (p[1] - mean[1]).powi(2);
        (-r2 / (2.0 * sd * sd)).exp() / (2.0 * std::f64::consts::PI * sd * sd)
    };
    let bound = 1.2
        * samples
            .iter()
            .map(|(p, rho)| rho / envelope(p))
            .fold(0.0, f64::max);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = point_rng(seed, i as u64);
        let mut tries = 0;
        loop {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            let p = Point::new2(mean[0] + sd * dx, mean[1] + sd * dy);
            let u: f64 = rng.random();
            let rho = match state.psi(&p, t) {
                Ok(v) => v.norm_sqr(),
                Err(Error::OutOfDomain { .. }) => 0.0,
                Err(e) => return Err(e),
            };
            if u * bound * envelope(&p) < rho {
                out.push(p);
                break;
            }
            tries += 1;
            if tries > 100_000 {
                return Err(Error::Numerical(
                    "rejection sampler failed to accept a point".into(),
                ));
            }
        }
    }
    Ok(out)
}
