use num_complex::Complex64;
use std::f64::consts::PI;

use super::{Jet, Potential, Units};
use crate::error::{Error, Result};
use crate::field::Point;

/// Freely spreading Gaussian wave packet in one dimension.
///
/// At time zero `psi = (2 pi sigma^2)^{-1/4} exp(-(q - q0)^2 / (4 sigma^2) + i k0 (q - q0))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPacket {
    pub q0: f64,
    pub k0: f64,
    pub sigma: f64,
    units: Units,
    time_origin: f64,
}

impl GaussianPacket {
    pub fn new(q0: f64, k0: f64, sigma: f64, units: Units) -> Result<Self> {
        units.validate()?;
        if units.dim() != 1 {
            return Err(Error::Config("Gaussian packets are one-dimensional".into()));
        }
        if !(q0.is_finite() && k0.is_finite()) {
            return Err(Error::Input(
                "packet center and wavenumber must be finite".into(),
            ));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Config(format!(
                "packet width must be positive, got {sigma}"
            )));
        }
        Ok(GaussianPacket {
            q0,
            k0,
            sigma,
            units,
            time_origin: 0.0,
        })
    }

    pub fn units(&self) -> &Units {
        &self.units
    }

    pub fn potential(&self) -> Potential {
        Potential::free(self.units.clone()).expect("validated at construction")
    }

    pub fn amplitude_scale(&self) -> f64 {
        (2.0 * PI * self.sigma * self.sigma).powf(-0.25)
    }

    /// Width of `|psi_t|^2` at time `t`.
    pub fn width(&self, t: f64) -> f64 {
        let tau = t + self.time_origin;
        let s = self.units.hbar * tau / (2.0 * self.units.masses[0] * self.sigma * self.sigma);
        self.sigma * (1.0 + s * s).sqrt()
    }

    /// Center of `|psi_t|^2` at time `t`.
    pub fn center(&self, t: f64) -> f64 {
        self.q0 + self.units.hbar * self.k0 * (t + self.time_origin) / self.units.masses[0]
    }

    pub fn natural_extent(&self) -> Vec<(f64, f64)> {
        let w = 12f64.max(self.q0.abs() + 12.0 * self.sigma);
        vec![(-w, w)]
    }

    pub fn evolved(&self, t: f64) -> GaussianPacket {
        GaussianPacket {
            time_origin: self.time_origin + t,
            ..self.clone()
        }
    }

    /// The state whose value at `(q, t)` is `conj(psi(q, -t))`.
    pub fn time_reversed(&self) -> GaussianPacket {
        GaussianPacket {
            k0: -self.k0,
            time_origin: -self.time_origin,
            ..self.clone()
        }
    }

    /// `(psi, d_q log psi, d_q^2 log psi)`
    fn log_jet(&self, q: f64, t: f64) -> (Complex64, Complex64, Complex64) {
        let tau = t + self.time_origin;
        let (hbar, m, s2) = (
            self.units.hbar,
            self.units.masses[0],
            self.sigma * self.sigma,
        );
        let alpha = Complex64::new(1.0, hbar * tau / (2.0 * m * s2));
        let u = q - self.q0;
        let i = Complex64::i();
        let expo = (-u * u / (4.0 * s2) + i * self.k0 * u
            - i * self.k0 * self.k0 * hbar * tau / (2.0 * m))
            / alpha;
        let psi = (2.0 * PI * s2).powf(-0.25) / alpha.sqrt() * expo.exp();
        let a1 = (-u / (2.0 * s2) + i * self.k0) / alpha;
        let a2 = -1.0 / (2.0 * s2 * alpha);
        (psi, a1, a2)
    }

    pub fn psi(&self, q: &Point, t: f64) -> Complex64 {
        self.log_jet(q[0], t).0
    }

    pub fn jet(&self, q: &Point, t: f64) -> Jet {
        let (psi, a1, a2) = self.log_jet(q[0], t);
        let mut jet = Jet::zero(1);
        jet.psi = psi;
        jet.grad[0] = psi * a1;
        jet.second[0] = psi * (a1 * a1 + a2);
        jet.dt = Complex64::i() * self.units.hbar / (2.0 * self.units.masses[0]) * jet.second[0];
        jet
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::midpoint;

    fn packet() -> GaussianPacket {
        GaussianPacket::new(
            -1.5,
            2.0,
            0.8,
            Units {
                hbar: 1.1,
                masses: vec![0.7],
            },
        )
        .unwrap()
    }

    #[test]
    fn norm_and_ehrenfest_motion() {
        let p = packet();
        for &t in &[0.0, 0.6, 2.5] {
            let norm = midpoint(-40.0, 40.0, 8000, |x| p.psi(&Point::new1(x), t).norm_sqr());
            let mean = midpoint(-40.0, 40.0, 8000, |x| {
                x * p.psi(&Point::new1(x), t).norm_sqr()
            });
            assert!((norm - 1.0).abs() < 1e-12);
            assert!((mean - p.center(t)).abs() < 1e-10);
            let var = midpoint(-40.0, 40.0, 8000, |x| {
                (x - p.center(t)).powi(2) * p.psi(&Point::new1(x), t).norm_sqr()
            });
            assert!((var.sqrt() - p.width(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn solves_the_free_equation() {
        let p = packet();
        let (q, t, h) = (Point::new1(-0.9), 0.7, 1e-4);
        let jet = p.jet(&q, t);
        let fdt = (p.psi(&q, t + h) - p.psi(&q, t - h)) / (2.0 * h);
        let fdq = (p.psi(&Point::new1(q[0] + h), t) - p.psi(&Point::new1(q[0] - h), t)) / (2.0 * h);
        assert!((jet.dt - fdt).norm() < 1e-7);
        assert!((jet.grad[0] - fdq).norm() < 1e-7);
    }

    #[test]
    fn time_reversal_conjugates() {
        let p = packet().evolved(0.3);
        let r = p.time_reversed();
        let q = Point::new1(0.4);
        assert!((r.psi(&q, 0.5) - p.psi(&q, -0.5).conj()).norm() < 1e-14);
    }
}
