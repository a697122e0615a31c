use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{Axis, ComplexField, SpectralPlan};
use crate::error::{Error, Result};

/// Integrand extracted from a complex field before summation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    AbsSquared,
    Abs,
    Real,
    Imag,
}

impl DensityKind {
    #[inline]
    pub fn apply(self, v: Complex64) -> f64 {
        match self {
            DensityKind::AbsSquared => v.norm_sqr(),
            DensityKind::Abs => v.norm(),
            DensityKind::Real => v.re,
            DensityKind::Imag => v.im,
        }
    }
}

fn axis_weight(axis: &Axis, i: usize) -> f64 {
    let h = axis.spacing();
    if !axis.periodic && (i == 0 || i == axis.n - 1) {
        0.5 * h
    } else {
        h
    }
}

/// Integral of the chosen integrand over the grid.
///
/// Periodic axes use the rectangle rule, non-periodic axes the trapezoid
/// rule over `[lo, lo + (n-1) h]`.
pub fn quadrature(field: &ComplexField, kind: DensityKind) -> Result<f64> {
    field.check_finite()?;
    let grid = field.grid();
    let vals = field.values();
    let sum = match grid.dim() {
        1 => {
            let ax = grid.axis(0);
            vals.iter()
                .enumerate()
                .map(|(i, &v)| axis_weight(ax, i) * kind.apply(v))
                .sum()
        }
        _ => {
            let (ax, ay) = (grid.axis(0), grid.axis(1));
            let mut s = 0.0;
            for i in 0..ax.n {
                let wx = axis_weight(ax, i);
                let row = &vals[i * ay.n..(i + 1) * ay.n];
                let inner: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| axis_weight(ay, j) * kind.apply(v))
                    .sum();
                s += wx * inner;
            }
            s
        }
    };
    Ok(sum)
}

/// Composite trapezoid rule of `f` on `[a, b]` with `intervals` panels.
pub fn trapezoid(a: f64, b: f64, intervals: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let n = intervals.max(1);
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + i as f64 * h);
    }
    s * h
}

/// Midpoint rule of `f` on `[a, b]` with `samples` points.
pub fn midpoint(a: f64, b: f64, samples: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let n = samples.max(1);
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite five-point Gauss-Legendre rule of `f` on `[a, b]`.
pub fn gauss_legendre(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let mid = a + (i as f64 + 0.5) * h;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            s += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * s
}

/// Cumulative distribution of a 1D density sampled on a periodic grid.
///
/// The density is expanded in its Fourier series and integrated mode by
/// mode, so the CDF is exact for band-limited densities and spectrally
/// accurate for smooth ones.
#[derive(Clone, Debug)]
pub struct SpectralCdf {
    lo: f64,
    hi: f64,
    wavenumber: f64,
    mean: f64,
    modes: Vec<Complex64>,
}

/// Tolerated deviation of the total mass from one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

impl SpectralCdf {
    /// Builds the CDF of the real part of `density`, which must integrate to one.
    pub fn new(density: &ComplexField) -> Result<Self> {
        let cdf = Self::new_unchecked(density)?;
        let mass = cdf.total_mass();
        if (mass - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Precondition(format!(
                "density integrates to {mass}, expected 1"
            )));
        }
        Ok(cdf)
    }

    /// Same as [`SpectralCdf::new`] without the normalization check.
    pub fn new_unchecked(density: &ComplexField) -> Result<Self> {
        let grid = density.grid();
        if grid.dim() != 1 {
            return Err(Error::Input(
                "cumulative distributions need a 1D grid".into(),
            ));
        }
        let axis = *grid.axis(0);
        if !axis.periodic {
            return Err(Error::Config(
                "cumulative distributions need a periodic grid".into(),
            ));
        }
        density.check_finite()?;
        let n = axis.n;
        let mut data: Vec<Complex64> = density
            .values()
            .iter()
            .map(|v| Complex64::new(v.re, 0.0))
            .collect();
        SpectralPlan::new(grid).forward(&mut data, 0);
        let scale = 1.0 / n as f64;
        let mean = data[0].re * scale;
        // keep modes strictly below Nyquist
        let kmax = (n - 1) / 2;
        let modes = data[1..=kmax].iter().map(|c| c * scale).collect();
        Ok(SpectralCdf {
            lo: axis.lo,
            hi: axis.hi,
            wavenumber: 2.0 * PI / axis.length(),
            mean,
            modes,
        })
    }

    pub fn extent(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn total_mass(&self) -> f64 {
        self.mean * (self.hi - self.lo)
    }

    /// `int_lo^x rho`. Positions outside the extent are clamped.
    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(self.lo, self.hi);
        let theta = x - self.lo;
        let step = Complex64::from_polar(1.0, self.wavenumber * theta);
        let mut z = step;
        let mut acc = 0.0;
        for (m, c) in self.modes.iter().enumerate() {
            let k = self.wavenumber * (m + 1) as f64;
            // 2 Re[c (z - 1) / (i k)]
            let w = c * (z - 1.0);
            acc += 2.0 * w.im / k;
            z *= step;
        }
        self.mean * theta + acc
    }

    /// The trigonometric interpolant of the density at `x`.
    pub fn density(&self, x: f64) -> f64 {
        let theta = x - self.lo;
        let step = Complex64::from_polar(1.0, self.wavenumber * theta);
        let mut z = step;
        let mut acc = self.mean;
        for c in &self.modes {
            acc += 2.0 * (c * z).re;
            z *= step;
        }
        acc
    }

    /// Position whose CDF equals `u`, by bracketed bisection polished with
    /// secant steps until `|cdf(x) - u| < tol` or the bracket collapses.
    pub fn quantile(&self, u: f64, tol: f64) -> Result<f64> {
        if !(u >= -1e-12 && u <= self.total_mass() + 1e-12) {
            return Err(Error::Input(format!("quantile {u} outside (0, 1)")));
        }
        let (mut a, mut b) = (self.lo, self.hi);
        let (mut fa, mut fb) = (self.cdf(a) - u, self.cdf(b) - u);
        if fa >= 0.0 {
            return Ok(a);
        }
        if fb <= 0.0 {
            return Ok(b);
        }
        let mut x = 0.5 * (a + b);
        for it in 0..200 {
            // alternate secant and bisection so the bracket always shrinks
            let secant = a - fa * (b - a) / (fb - fa);
            x = if it % 2 == 0 && secant > a && secant < b {
                secant
            } else {
                0.5 * (a + b)
            };
            let fx = self.cdf(x) - u;
            if fx.abs() < tol || (b - a) < 1e-14 * (1.0 + x.abs()) {
                return Ok(x);
            }
            if fx < 0.0 {
                a = x;
                fa = fx;
            } else {
                b = x;
                fb = fx;
            }
        }
        Ok(x)
    }
}

/// `int_{lo}^{x} Re(density)` for a normalized 1D density sampled on a periodic grid.
pub fn cdf_1d(density: &ComplexField, x: f64) -> Result<f64> {
    Ok(SpectralCdf::new(density)?.cdf(x))
}
