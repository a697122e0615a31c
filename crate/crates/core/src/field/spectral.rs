//! FFT-based differentiation on periodic grids.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::{ComplexField, Grid};
use crate::error::{Error, Result};

/// Cached FFT plans and wavenumbers for one grid.
#[derive(Clone)]
pub struct SpectralPlan {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    wavenumbers: Vec<Vec<f64>>,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl SpectralPlan {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = grid
            .axes()
            .iter()
            .map(|a| planner.plan_fft_forward(a.n))
            .collect();
        let inverse = grid
            .axes()
            .iter()
            .map(|a| planner.plan_fft_inverse(a.n))
            .collect();
        let wavenumbers = grid.axes().iter().map(|a| a.wavenumbers()).collect();
        SpectralPlan {
            grid: grid.clone(),
            forward,
            inverse,
            wavenumbers,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    fn transform(&self, data: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let shape = self.grid.shape();
        match (self.grid.dim(), axis) {
            (1, _) => fft.process(data),
            (_, 1) => {
                for row in data.chunks_exact_mut(shape[1]) {
                    fft.process(row);
                }
            }
            _ => {
                let (nx, ny) = (shape[0], shape[1]);
                let mut col = vec![Complex64::new(0.0, 0.0); nx];
                for j in 0..ny {
                    for i in 0..nx {
                        col[i] = data[i * ny + j];
                    }
                    fft.process(&mut col);
                    for i in 0..nx {
                        data[i * ny + j] = col[i];
                    }
                }
            }
        }
    }

    /// Unnormalized forward DFT along `axis`, in place.
    pub fn forward(&self, data: &mut [Complex64], axis: usize) {
        self.transform(data, axis, &self.forward[axis]);
    }

    /// Inverse DFT along `axis`, in place, including the `1/n` factor.
    pub fn inverse(&self, data: &mut [Complex64], axis: usize) {
        self.transform(data, axis, &self.inverse[axis]);
        let scale = 1.0 / self.grid.axis(axis).n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Multiplies the spectrum along `axis` by `mult(k)`, where `k` is the
    /// angular wavenumber. Modes along the other axis are untouched.
    pub fn apply_multiplier(
        &self,
        data: &mut [Complex64],
        axis: usize,
        mult: impl Fn(usize, f64) -> Complex64,
    ) {
        self.forward(data, axis);
        let ks = &self.wavenumbers[axis];
        let shape = self.grid.shape();
        match (self.grid.dim(), axis) {
            (1, _) => {
                for (j, v) in data.iter_mut().enumerate() {
                    *v *= mult(j, ks[j]);
                }
            }
            (_, 1) => {
                for row in data.chunks_exact_mut(shape[1]) {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v *= mult(j, ks[j]);
                    }
                }
            }
            _ => {
                for (i, row) in data.chunks_exact_mut(shape[1]).enumerate() {
                    let m = mult(i, ks[i]);
                    for v in row.iter_mut() {
                        *v *= m;
                    }
                }
            }
        }
        self.inverse(data, axis);
    }

    fn check_axis(&self, field: &ComplexField, axis: usize) -> Result<()> {
        if field.grid() != &self.grid {
            return Err(Error::Input(
                "field grid does not match spectral plan".into(),
            ));
        }
        if axis >= self.grid.dim() {
            return Err(Error::Input(format!(
                "axis {axis} out of range for a {}D grid",
                self.grid.dim()
            )));
        }
        if !self.grid.axis(axis).periodic {
            return Err(Error::Config(format!(
                "spectral differentiation needs a periodic axis, axis {axis} is not"
            )));
        }
        field.check_finite()
    }

    /// First derivative along `axis`. The Nyquist mode is dropped.
    pub fn derivative(&self, field: &ComplexField, axis: usize) -> Result<ComplexField> {
        self.check_axis(field, axis)?;
        let n = self.grid.axis(axis).n;
        let mut data = field.values().to_vec();
        self.apply_multiplier(&mut data, axis, |j, k| {
            if n % 2 == 0 && j == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k)
            }
        });
        Ok(ComplexField::from_raw(
            self.grid.clone(),
            data,
            field.time(),
        ))
    }

    /// Second derivative along `axis`, multiplying each mode by `-k^2`.
    pub fn second_derivative(&self, field: &ComplexField, axis: usize) -> Result<ComplexField> {
        self.check_axis(field, axis)?;
        let mut data = field.values().to_vec();
        self.apply_multiplier(&mut data, axis, |_, k| Complex64::new(-k * k, 0.0));
        Ok(ComplexField::from_raw(
            self.grid.clone(),
            data,
            field.time(),
        ))
    }
}

/// Partial derivative of `field` along `axis` via the discrete Fourier transform.
pub fn spectral_derivative(field: &ComplexField, axis: usize) -> Result<ComplexField> {
    SpectralPlan::new(field.grid()).derivative(field, axis)
}

/// Second partial derivative of `field` along `axis`.
pub fn spectral_second_derivative(field: &ComplexField, axis: usize) -> Result<ComplexField> {
    SpectralPlan::new(field.grid()).second_derivative(field, axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Axis, Point};

    fn grid_1d(n: usize) -> Grid {
        Grid::periodic_1d(-12.0, 12.0, n).unwrap()
    }

    #[test]
    fn fourier_mode_is_an_eigenfunction() {
        let g = grid_1d(128);
        let k = 2.0 * std::f64::consts::PI / 24.0 * 5.0;
        let f = ComplexField::from_fn(g, 0.0, |p| Complex64::new(0.0, k * p[0]).exp()).unwrap();
        let d = spectral_derivative(&f, 0).unwrap();
        for (dv, fv) in d.values().iter().zip(f.values()) {
            assert!((dv - Complex64::new(0.0, k) * fv).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_has_zero_derivative() {
        let f = ComplexField::from_fn(grid_1d(64), 0.0, |_| Complex64::new(3.0, -1.0)).unwrap();
        let d = spectral_derivative(&f, 0).unwrap();
        assert!(d.max_abs() < 1e-13);
    }

    #[test]
    fn gaussian_derivative_in_the_interior() {
        let f = ComplexField::from_fn(grid_1d(256), 0.0, |p| {
            Complex64::new((-p[0] * p[0] / 2.0).exp(), 0.0)
        })
        .unwrap();
        let d = spectral_derivative(&f, 0).unwrap();
        let mut worst: f64 = 0.0;
        for (i, p) in f.grid().points().enumerate() {
            if p[0].abs() < 8.0 {
                let exact = -p[0] * (-p[0] * p[0] / 2.0).exp();
                worst = worst.max((d.values()[i].re - exact).abs() + d.values()[i].im.abs());
            }
        }
        assert!(worst < 1e-8, "worst error {worst}");
    }

    #[test]
    fn non_periodic_axis_is_a_configuration_error() {
        let g = Grid::new(vec![Axis::new(-1.0, 1.0, 32, false).unwrap()]).unwrap();
        let f = ComplexField::zeros(g, 0.0);
        assert!(matches!(spectral_derivative(&f, 0), Err(Error::Config(_))));
    }

    #[test]
    fn nan_input_is_rejected() {
        let g = grid_1d(32);
        let mut f = ComplexField::zeros(g, 0.0);
        f.values_mut()[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(spectral_derivative(&f, 0), Err(Error::Input(_))));
    }

    #[test]
    fn twice_first_equals_second_on_band_limited_fields() {
        let g = Grid::periodic_2d(-6.0, 6.0, 32).unwrap();
        let kx = 2.0 * std::f64::consts::PI / 12.0;
        let f = ComplexField::from_fn(g, 0.0, |p: &Point| {
            Complex64::new(0.0, 3.0 * kx * p[0] - 2.0 * kx * p[1]).exp()
                + Complex64::new((kx * p[1]).cos(), (5.0 * kx * p[0]).sin())
        })
        .unwrap();
        for axis in 0..2 {
            let d1 = spectral_derivative(&spectral_derivative(&f, axis).unwrap(), axis).unwrap();
            let d2 = spectral_second_derivative(&f, axis).unwrap();
            assert!(d1.max_abs_diff(&d2) < 1e-9);
        }
    }
}
