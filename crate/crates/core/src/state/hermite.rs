//! Normalized Hermite functions, the harmonic-oscillator eigenfunctions in
//! dimensionless position `xi`.

use std::f64::consts::PI;

/// Largest eigenstate index supported by [`HermiteTable`].
pub const MAX_INDEX: usize = 255;

/// `phi_0 ..= phi_nmax` at one point, with derivatives in `xi`.
#[derive(Clone)]
pub(crate) struct HermiteTable {
    xi: f64,
    len: usize,
    phi: [f64; MAX_INDEX + 1],
}

impl HermiteTable {
    pub fn new(nmax: usize, xi: f64) -> Self {
        debug_assert!(nmax <= MAX_INDEX);
        let mut phi = [0.0; MAX_INDEX + 1];
        phi[0] = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
        if nmax >= 1 {
            phi[1] = 2f64.sqrt() * xi * phi[0];
        }
        for n in 1..nmax {
            let nf = n as f64;
            phi[n + 1] =
                (2.0 / (nf + 1.0)).sqrt() * xi * phi[n] - (nf / (nf + 1.0)).sqrt() * phi[n - 1];
        }
        HermiteTable {
            xi,
            len: nmax + 1,
            phi,
        }
    }

    #[inline]
    pub fn value(&self, n: usize) -> f64 {
        debug_assert!(n < self.len);
        self.phi[n]
    }

    /// `phi_n' = sqrt(2n) phi_{n-1} - xi phi_n`
    #[inline]
    pub fn first(&self, n: usize) -> f64 {
        let lower = if n == 0 {
            0.0
        } else {
            (2.0 * n as f64).sqrt() * self.phi[n - 1]
        };
        lower - self.xi * self.phi[n]
    }

    /// `phi_n'' = (xi^2 - (2n + 1)) phi_n`
    #[inline]
    pub fn second(&self, n: usize) -> f64 {
        (self.xi * self.xi - (2 * n + 1) as f64) * self.phi[n]
    }
}

/// `phi_n(xi)` evaluated on its own.
pub fn hermite_function(n: usize, xi: f64) -> f64 {
    assert!(n <= MAX_INDEX, "eigenstate index {n} exceeds {MAX_INDEX}");
    HermiteTable::new(n, xi).value(n)
}
