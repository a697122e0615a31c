use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::Point;
use crate::error::{Error, Result};

/// Minimum number of points per axis.
pub const MIN_POINTS: usize = 16;

/// One axis of a uniform grid.
///
/// Sample `i` sits at `lo + i * h` with `h = (hi - lo) / n`, for `i < n`.
/// On a periodic axis `hi` is identified with `lo`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub periodic: bool,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize, periodic: bool) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::Config(format!(
                "axis extent [{lo}, {hi}] must be finite with hi > lo"
            )));
        }
        if n < MIN_POINTS {
            return Err(Error::Config(format!(
                "axis needs at least {MIN_POINTS} points, got {n}"
            )));
        }
        Ok(Axis {
            lo,
            hi,
            n,
            periodic,
        })
    }

    pub fn periodic(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(lo, hi, n, true)
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Angular wavenumbers in FFT order. The Nyquist entry (even `n`) is `+pi/h`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        let dk = 2.0 * PI / self.length();
        (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j } else { j - n };
                dk * m as f64
            })
            .collect()
    }

    /// Range of positions accepted by interpolation on this axis.
    pub fn valid_range(&self) -> (f64, f64) {
        if self.periodic {
            (self.lo, self.hi)
        } else {
            (self.lo, self.coord(self.n - 1))
        }
    }
}

/// A uniform tensor-product grid in one or two dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::Config(format!(
                "grids have dimension 1 or 2, got {}",
                axes.len()
            )));
        }
        for a in &axes {
            Axis::new(a.lo, a.hi, a.n, a.periodic)?;
        }
        Ok(Grid { axes })
    }

    /// Periodic 1D grid on `[lo, hi)`.
    pub fn periodic_1d(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(vec![Axis::periodic(lo, hi, n)?])
    }

    /// Periodic 2D grid on `[lo, hi)^2`.
    pub fn periodic_2d(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let a = Axis::periodic(lo, hi, n)?;
        Self::new(vec![a, a])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_periodic(&self) -> bool {
        self.axes.iter().all(|a| a.periodic)
    }

    /// Volume element `prod h_k`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product()
    }

    /// Row-major flat index; axis 0 is the slow index.
    #[inline]
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        match self.dim() {
            1 => idx[0],
            _ => idx[0] * self.axes[1].n + idx[1],
        }
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        match self.dim() {
            1 => [flat, 0],
            _ => [flat / self.axes[1].n, flat % self.axes[1].n],
        }
    }

    pub fn point(&self, flat: usize) -> Point {
        let idx = self.multi_index(flat);
        match self.dim() {
            1 => Point::new1(self.axes[0].coord(idx[0])),
            _ => Point::new2(self.axes[0].coord(idx[0]), self.axes[1].coord(idx[1])),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn contains(&self, q: &Point) -> bool {
        q.dim() == self.dim()
            && self.axes.iter().enumerate().all(|(k, a)| {
                let (lo, hi) = a.valid_range();
                q[k] >= lo && q[k] <= hi
            })
    }

    pub fn extent(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|a| (a.lo, a.hi)).collect()
    }

    /// Same extents with every axis count doubled.
    pub fn refined(&self) -> Grid {
        Grid {
            axes: self
                .axes
                .iter()
                .map(|a| Axis { n: a.n * 2, ..*a })
                .collect(),
        }
    }
}

/// Sampled complex field on a grid at a fixed time.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
    time: f64,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Input(format!(
                "field has {} values but grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        if !time.is_finite() {
            return Err(Error::Input("field timestamp is not finite".into()));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::Input(format!(
                "field value at {:?} is not finite",
                grid.point(i)
            )));
        }
        Ok(ComplexField { grid, values, time })
    }

    pub fn from_fn(grid: Grid, time: f64, mut f: impl FnMut(&Point) -> Complex64) -> Result<Self> {
        let values = grid.points().map(|p| f(&p)).collect();
        Self::new(grid, values, time)
    }

    pub fn zeros(grid: Grid, time: f64) -> Self {
        let n = grid.len();
        ComplexField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
            time,
        }
    }

    /// Builds a field without the finiteness scan. Callers guarantee finite values.
    pub(crate) fn from_raw(grid: Grid, values: Vec<Complex64>, time: f64) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        ComplexField { grid, values, time }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            time: self.time,
        }
    }

    /// `|f|^2` stored as a real-valued complex field.
    pub fn abs_squared(&self) -> ComplexField {
        self.map(|v| Complex64::new(v.norm_sqr(), 0.0))
    }

    pub fn conj(&self) -> ComplexField {
        self.map(|v| v.conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &ComplexField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn check_finite(&self) -> Result<()> {
        if self
            .values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
        {
            Ok(())
        } else {
            Err(Error::Input("field contains non-finite values".into()))
        }
    }
}
