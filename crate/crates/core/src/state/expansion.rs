use num_complex::Complex64;
use std::f64::consts::PI;

use super::hermite::{HermiteTable, MAX_INDEX};
use super::{Jet, Potential, Units};
use crate::error::{Error, Result};
use crate::field::Point;

/// One term `c * prod_k phi_{n_k}(q_k)` of an eigen-expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenComponent {
    pub coefficient: Complex64,
    /// Eigenstate index per axis.
    pub index: [usize; 2],
    pub energy: f64,
}

/// A finite harmonic-oscillator eigen-expansion, normalized at construction.
///
/// `psi(q, t) = sum_k c_k e^{-i E_k t / hbar} prod_a phi_{n_a}(q_a / l_a) / sqrt(l_a)`
/// with `l_a = sqrt(hbar / (m_a omega))` and `E = hbar omega sum_a (n_a + 1/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicExpansion {
    units: Units,
    omega: f64,
    components: Vec<EigenComponent>,
    raw_norm: f64,
    lengths: [f64; 2],
    nmax: [usize; 2],
    amplitude_scale: f64,
}

impl HarmonicExpansion {
    /// Builds and normalizes `sum c * |n>`, where each index lists one eigenstate number per axis.
    pub fn new(units: Units, omega: f64, terms: &[(Complex64, Vec<usize>)]) -> Result<Self> {
        units.validate()?;
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::Config(format!(
                "omega must be positive, got {omega}"
            )));
        }
        let dim = units.dim();
        let mut components: Vec<EigenComponent> = Vec::new();
        for (c, idx) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::Input(format!("coefficient {c} is not finite")));
            }
            if idx.len() != dim {
                return Err(Error::Input(format!(
                    "eigenstate index {idx:?} does not match dimension {dim}"
                )));
            }
            if let Some(n) = idx.iter().find(|&&n| n > MAX_INDEX) {
                return Err(Error::Input(format!(
                    "eigenstate index {n} exceeds {MAX_INDEX}"
                )));
            }
            let mut index = [0; 2];
            index[..dim].copy_from_slice(idx);
            match components.iter_mut().find(|e| e.index == index) {
                Some(e) => e.coefficient += c,
                None => components.push(EigenComponent {
                    coefficient: *c,
                    index,
                    energy: units.hbar
                        * omega
                        * (index[..dim].iter().sum::<usize>() as f64 + 0.5 * dim as f64),
                }),
            }
        }
        let norm_sq: f64 = components.iter().map(|e| e.coefficient.norm_sqr()).sum();
        if components.is_empty() || norm_sq == 0.0 {
            return Err(Error::Input("coefficients are all zero".into()));
        }
        let raw_norm = norm_sq.sqrt();
        for e in &mut components {
            e.coefficient /= raw_norm;
        }
        components.sort_by_key(|e| e.index);
        let mut lengths = [1.0; 2];
        let mut nmax = [0; 2];
        for a in 0..dim {
            lengths[a] = (units.hbar / (units.masses[a] * omega)).sqrt();
            nmax[a] = components.iter().map(|e| e.index[a]).max().unwrap_or(0);
        }
        let mut out = HarmonicExpansion {
            units,
            omega,
            components,
            raw_norm,
            lengths,
            nmax,
            amplitude_scale: 0.0,
        };
        out.amplitude_scale = out.sample_sup();
        Ok(out)
    }

    fn sample_sup(&self) -> f64 {
        let dim = self.dim();
        let (lo, hi) = self.core_window();
        let n = if dim == 1 { 4001 } else { 241 };
        let coord = |a: usize, i: usize| lo[a] + (hi[a] - lo[a]) * i as f64 / (n - 1) as f64;
        let mut sup: f64 = 0.0;
        if dim == 1 {
            for i in 0..n {
                sup = sup.max(self.psi(&Point::new1(coord(0, i)), 0.0).norm());
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    sup = sup.max(self.psi(&Point::new2(coord(0, i), coord(1, j)), 0.0).norm());
                }
            }
        }
        sup
    }

    /// Box outside of which every component is below its turning-point tail.
    fn core_window(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for a in 0..self.dim() {
            let w = ((2 * self.nmax[a] + 1) as f64).sqrt() + 4.0;
            lo[a] = -w * self.lengths[a];
            hi[a] = w * self.lengths[a];
        }
        (lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.units.dim()
    }

    pub fn units(&self) -> &Units {
        &self.units
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn components(&self) -> &[EigenComponent] {
        &self.components
    }

    /// L2 norm of the coefficients as given, before normalization.
    pub fn raw_norm(&self) -> f64 {
        self.raw_norm
    }

    /// Oscillator length per axis.
    pub fn length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    /// `sup_q |psi(q, 0)|`, estimated on a dense sample.
    pub fn amplitude_scale(&self) -> f64 {
        self.amplitude_scale
    }

    /// Symmetric box of half-width `max(12, sqrt(2 n_max + 1) + 8)` oscillator lengths per axis.
    pub fn natural_extent(&self) -> Vec<(f64, f64)> {
        (0..self.dim())
            .map(|a| {
                let w = 12f64.max(((2 * self.nmax[a] + 1) as f64).sqrt() + 8.0) * self.lengths[a];
                (-w, w)
            })
            .collect()
    }

    pub fn potential(&self) -> Potential {
        Potential::harmonic(self.omega, self.units.clone()).expect("validated at construction")
    }

    /// Probability `|c_k|^2` of each component.
    pub fn occupations(&self) -> Vec<f64> {
        self.components
            .iter()
            .map(|e| e.coefficient.norm_sqr())
            .collect()
    }

    /// `<psi | H^p psi> = sum_k |c_k|^2 E_k^p`.
    pub fn energy_power(&self, p: u32) -> f64 {
        self.components
            .iter()
            .map(|e| e.coefficient.norm_sqr() * e.energy.powi(p as i32))
            .sum()
    }

    fn phase(&self, e: &EigenComponent, t: f64) -> Complex64 {
        e.coefficient * Complex64::from_polar(1.0, -e.energy * t / self.units.hbar)
    }

    /// The state `psi_t` taken as a new initial condition.
    pub fn evolved(&self, t: f64) -> HarmonicExpansion {
        let mut out = self.clone();
        for (o, e) in out.components.iter_mut().zip(&self.components) {
            o.coefficient = self.phase(e, t);
        }
        out
    }

    /// Time reversal: the state whose value at `(q, t)` is `conj(psi(q, -t))`.
    pub fn time_reversed(&self) -> HarmonicExpansion {
        let mut out = self.clone();
        for e in &mut out.components {
            e.coefficient = e.coefficient.conj();
        }
        out
    }

    pub fn psi(&self, q: &Point, t: f64) -> Complex64 {
        let tables = self.tables(q);
        let mut acc = Complex64::new(0.0, 0.0);
        for e in &self.components {
            let mut f = 1.0;
            for (a, tab) in tables.iter().enumerate().take(self.dim()) {
                f *= tab.value(e.index[a]) / self.lengths[a].sqrt();
            }
            acc += self.phase(e, t) * f;
        }
        acc
    }

    fn tables(&self, q: &Point) -> [HermiteTable; 2] {
        let t0 = HermiteTable::new(self.nmax[0], q[0] / self.lengths[0]);
        let t1 = if self.dim() == 2 {
            HermiteTable::new(self.nmax[1], q[1] / self.lengths[1])
        } else {
            HermiteTable::new(0, 0.0)
        };
        [t0, t1]
    }

    pub fn jet(&self, q: &Point, t: f64) -> Jet {
        let dim = self.dim();
        let tables = self.tables(q);
        let mut jet = Jet::zero(dim);
        for e in &self.components {
            let ph = self.phase(e, t);
            let mut val = [0.0; 2];
            let mut d1 = [0.0; 2];
            let mut d2 = [0.0; 2];
            for a in 0..dim {
                let (n, l) = (e.index[a], self.lengths[a]);
                let s = l.sqrt();
                val[a] = tables[a].value(n) / s;
                d1[a] = tables[a].first(n) / (s * l);
                d2[a] = tables[a].second(n) / (s * l * l);
            }
            let (f, g, h) = if dim == 1 {
                (val[0], [d1[0], 0.0], [d2[0], 0.0])
            } else {
                (
                    val[0] * val[1],
                    [d1[0] * val[1], val[0] * d1[1]],
                    [d2[0] * val[1], val[0] * d2[1]],
                )
            };
            jet.psi += ph * f;
            for a in 0..dim {
                jet.grad[a] += ph * g[a];
                jet.second[a] += ph * h[a];
            }
            jet.dt += ph * Complex64::new(0.0, -e.energy / self.units.hbar) * f;
        }
        jet
    }
}

/// `psi(q, t) = e^{-q^2/2} (1 + (1 - 2 q^2) e^{-2it}) e^{-it/2}` in natural
/// units: the ground state with weight `pi^{1/4}` plus the second excited
/// state with weight `-sqrt(2) pi^{1/4}`, normalized on construction.
pub fn ground_plus_second_excited() -> HarmonicExpansion {
    let s = PI.powf(0.25);
    HarmonicExpansion::new(
        Units::natural(1),
        1.0,
        &[
            (Complex64::new(s, 0.0), vec![0]),
            (Complex64::new(-2f64.sqrt() * s, 0.0), vec![2]),
        ],
    )
    .expect("valid preset")
}

/// The harmonic-oscillator ground state in natural units.
pub fn ground_state(dim: usize) -> HarmonicExpansion {
    HarmonicExpansion::new(
        Units::natural(dim),
        1.0,
        &[(Complex64::new(1.0, 0.0), vec![0; dim])],
    )
    .expect("valid preset")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form of the two-term superposition before normalization.
    fn closed_form(q: f64, t: f64) -> Complex64 {
        let i = Complex64::i();
        (-q * q / 2.0).exp()
            * (1.0 + (1.0 - 2.0 * q * q) * (-2.0 * i * t).exp())
            * (-i * t / 2.0).exp()
    }

    #[test]
    fn preset_matches_closed_form() {
        let s = ground_plus_second_excited();
        assert!((s.raw_norm().powi(2) - 3.0 * PI.sqrt()).abs() < 1e-12);
        for &(q, t) in &[(0.3, 0.1), (-1.4, 2.0), (2.2, -0.7), (0.0, 0.0)] {
            let got = s.psi(&Point::new1(q), t) * s.raw_norm();
            assert!((got - closed_form(q, t)).norm() < 1e-13);
        }
        let occ = s.occupations();
        assert!((occ[0] - 1.0 / 3.0).abs() < 1e-14 && (occ[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn preset_value_at_origin() {
        let s = ground_plus_second_excited();
        let v = s.psi(&Point::new1(0.0), 0.0);
        assert!((v.re - 2.0 / s.raw_norm()).abs() < 1e-15 && v.im.abs() < 1e-15);
        assert!(s.psi(&Point::new1(1.0), 0.0).norm() < 1e-15);
        assert!(s.psi(&Point::new1(0.0), PI / 2.0).norm() < 1e-15);
    }

    #[test]
    fn all_zero_coefficients_are_rejected() {
        let r = HarmonicExpansion::new(
            Units::natural(1),
            1.0,
            &[(Complex64::new(0.0, 0.0), vec![3])],
        );
        assert!(matches!(r, Err(Error::Input(_))));
        assert!(matches!(
            HarmonicExpansion::new(Units::natural(1), 1.0, &[]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn jet_matches_finite_differences_in_two_dimensions() {
        let units = Units {
            hbar: 0.7,
            masses: vec![1.3, 0.6],
        };
        let s = HarmonicExpansion::new(
            units,
            1.9,
            &[
                (Complex64::new(0.4, -0.2), vec![0, 1]),
                (Complex64::new(-0.1, 0.9), vec![3, 2]),
                (Complex64::new(0.5, 0.5), vec![1, 0]),
            ],
        )
        .unwrap();
        let (q, t, h) = (Point::new2(0.31, -0.47), 0.8, 1e-5);
        let jet = s.jet(&q, t);
        assert!((jet.psi - s.psi(&q, t)).norm() < 1e-15);
        for a in 0..2 {
            let mut qp = q;
            let mut qm = q;
            qp[a] += h;
            qm[a] -= h;
            let fd = (s.psi(&qp, t) - s.psi(&qm, t)) / (2.0 * h);
            assert!((jet.grad[a] - fd).norm() < 1e-8);
            let fd2 = (s.psi(&qp, t) - 2.0 * s.psi(&q, t) + s.psi(&qm, t)) / (h * h);
            assert!((jet.second[a] - fd2).norm() < 1e-4);
        }
        let fdt = (s.psi(&q, t + h) - s.psi(&q, t - h)) / (2.0 * h);
        assert!((jet.dt - fdt).norm() < 1e-8);
    }

    #[test]
    fn evolution_reorigins_time() {
        let s = ground_plus_second_excited();
        let e = s.evolved(0.9);
        let q = Point::new1(0.37);
        assert!((e.psi(&q, 0.4) - s.psi(&q, 1.3)).norm() < 1e-14);
        let r = s.time_reversed();
        assert!((r.psi(&q, 0.4) - s.psi(&q, -0.4).conj()).norm() < 1e-14);
    }
}
