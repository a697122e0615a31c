use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Axis, ComplexField, Point};
use crate::error::{Error, Result};

/// Local polynomial stencil used for off-grid evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// Four-point cubic Lagrange, error O(h^4).
    Cubic,
    /// Six-point quintic Lagrange, error O(h^6).
    #[default]
    Quintic,
}

impl Stencil {
    pub fn width(self) -> usize {
        match self {
            Stencil::Cubic => 4,
            Stencil::Quintic => 6,
        }
    }
}

/// Indices and Lagrange weights of one axis.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AxisWeights {
    pub idx: [usize; 6],
    pub w: [f64; 6],
    pub len: usize,
}

pub(crate) fn axis_weights(axis: &Axis, x: f64, stencil: Stencil) -> Option<AxisWeights> {
    let (lo, hi) = axis.valid_range();
    if !(x >= lo && x <= hi) {
        return None;
    }
    let n = axis.n as i64;
    let u = (x - axis.lo) / axis.spacing();
    let i0 = u.floor();
    let frac = u - i0;
    let i0 = i0 as i64;
    let mut out = AxisWeights {
        idx: [0; 6],
        w: [0.0; 6],
        len: 1,
    };
    if frac == 0.0 {
        out.idx[0] = i0.rem_euclid(n) as usize;
        out.w[0] = 1.0;
        return Some(out);
    }
    let width = stencil.width() as i64;
    let mut start = i0 - (width / 2 - 1);
    if !axis.periodic {
        start = start.clamp(0, n - width);
    }
    out.len = width as usize;
    for j in 0..width {
        let xj = (start + j) as f64;
        let mut w = 1.0;
        for m in 0..width {
            if m != j {
                let xm = (start + m) as f64;
                w *= (u - xm) / (xj - xm);
            }
        }
        out.idx[j as usize] = (start + j).rem_euclid(n) as usize;
        out.w[j as usize] = w;
    }
    Some(out)
}

fn out_of_domain(field: &ComplexField, q: &Point) -> Error {
    Error::OutOfDomain {
        position: q.to_vec(),
        extent: field.grid().extent(),
    }
}

/// Value of `field` at an off-grid position with the default (quintic) stencil.
pub fn interpolate(field: &ComplexField, q: &Point) -> Result<Complex64> {
    interpolate_with(field, q, Stencil::default())
}

/// Value of `field` at `q` using a tensor-product Lagrange stencil.
///
/// Grid samples are reproduced exactly; on periodic axes the upper extent
/// wraps to the lower one.
pub fn interpolate_with(field: &ComplexField, q: &Point, stencil: Stencil) -> Result<Complex64> {
    let grid = field.grid();
    if q.dim() != grid.dim() {
        return Err(Error::Input(format!(
            "query has dimension {} but grid has dimension {}",
            q.dim(),
            grid.dim()
        )));
    }
    let vals = field.values();
    let wx = axis_weights(grid.axis(0), q[0], stencil).ok_or_else(|| out_of_domain(field, q))?;
    if grid.dim() == 1 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..wx.len {
            acc += vals[wx.idx[j]] * wx.w[j];
        }
        return Ok(acc);
    }
    let wy = axis_weights(grid.axis(1), q[1], stencil).ok_or_else(|| out_of_domain(field, q))?;
    let ny = grid.axis(1).n;
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..wx.len {
        let row = wx.idx[a] * ny;
        let mut inner = Complex64::new(0.0, 0.0);
        for b in 0..wy.len {
            inner += vals[row + wy.idx[b]] * wy.w[b];
        }
        acc += inner * wx.w[a];
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn mode(k: f64, h: f64) -> ComplexField {
        let n = 256;
        let g = Grid::periodic_1d(0.0, n as f64 * h, n).unwrap();
        ComplexField::from_fn(g, 0.0, |p| Complex64::new(0.0, k * p[0]).exp()).unwrap()
    }

    #[test]
    fn grid_points_are_reproduced_exactly() {
        let g = Grid::periodic_2d(-3.0, 3.0, 16).unwrap();
        let f = ComplexField::from_fn(g.clone(), 0.0, |p| Complex64::new(p[0].sin(), p[1] * p[0]))
            .unwrap();
        for (i, p) in g.points().enumerate() {
            for s in [Stencil::Cubic, Stencil::Quintic] {
                assert_eq!(interpolate_with(&f, &p, s).unwrap(), f.values()[i]);
            }
        }
    }

    #[test]
    fn mid_cell_error_of_a_fourier_mode() {
        let (k, h) = (2.0, 0.1);
        let f = mode(k, h);
        let mut worst_cubic: f64 = 0.0;
        let mut worst_quintic: f64 = 0.0;
        for i in 10..200 {
            let x = (i as f64 + 0.5) * h;
            let exact = Complex64::new(0.0, k * x).exp();
            let q = Point::new1(x);
            worst_cubic =
                worst_cubic.max((interpolate_with(&f, &q, Stencil::Cubic).unwrap() - exact).norm());
            worst_quintic = worst_quintic.max((interpolate(&f, &q).unwrap() - exact).norm());
        }
        assert!(worst_cubic < (k * h).powi(4));
        assert!(worst_quintic < 1e-6, "quintic error {worst_quintic}");
    }

    #[test]
    fn periodic_upper_extent_wraps() {
        let g = Grid::periodic_1d(-1.0, 1.0, 32).unwrap();
        let f = ComplexField::from_fn(g, 0.0, |p| Complex64::new(p[0] * p[0], 1.0)).unwrap();
        let at_hi = interpolate(&f, &Point::new1(1.0)).unwrap();
        assert_eq!(at_hi, f.values()[0]);
    }

    #[test]
    fn outside_extent_is_out_of_domain() {
        let g = Grid::periodic_1d(-1.0, 1.0, 32).unwrap();
        let f = ComplexField::zeros(g, 0.0);
        assert!(matches!(
            interpolate(&f, &Point::new1(1.5)),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn convergence_orders_under_refinement() {
        let k = 1.3;
        let err = |h: f64, s: Stencil| {
            let f = mode(k, h);
            (0..500).fold(0.0_f64, |m, j| {
                let x = 3.0 + 0.0137 * j as f64;
                let e = interpolate_with(&f, &Point::new1(x), s).unwrap()
                    - Complex64::new(0.0, k * x).exp();
                m.max(e.norm())
            })
        };
        let cubic = err(0.2, Stencil::Cubic) / err(0.1, Stencil::Cubic);
        let quintic = err(0.2, Stencil::Quintic) / err(0.1, Stencil::Quintic);
        assert!(cubic > 12.0 && cubic < 20.0, "cubic ratio {cubic}");
        assert!(quintic > 16.0, "quintic ratio {quintic}");
    }
}
