//! Dormand-Prince 5(4) coefficients and the continuous extension.

use crate::field::Point;

pub const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

pub const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Difference between the fifth- and fourth-order weights.
pub const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Fourth-order interpolant of one accepted step on `[s, s + h]`.
#[derive(Clone, Copy, Debug)]
pub struct Dense {
    pub s: f64,
    pub h: f64,
    r: [Point; 5],
}

impl Dense {
    pub fn new(s: f64, h: f64, y0: &Point, y1: &Point, k: &[Point; 7]) -> Self {
        let r1 = *y0;
        let r2 = *y1 - *y0;
        let r3 = k[0].scale(h) - r2;
        let r4 = r2 - k[6].scale(h) - r3;
        let mut r5 = Point::zeros(y0.dim());
        for (j, d) in D.iter().enumerate() {
            if *d != 0.0 {
                r5 = r5.add_scaled(h * d, &k[j]);
            }
        }
        Dense {
            s,
            h,
            r: [r1, r2, r3, r4, r5],
        }
    }

    pub fn end(&self) -> f64 {
        self.s + self.h
    }

    /// Position at `sigma` in `[s, s + h]`.
    pub fn position(&self, sigma: f64) -> Point {
        let th = (sigma - self.s) / self.h;
        let [r1, r2, r3, r4, r5] = self.r;
        let a = r4.add_scaled(1.0 - th, &r5);
        let b = r3.add_scaled(th, &a);
        let c = r2.add_scaled(1.0 - th, &b);
        r1.add_scaled(th, &c)
    }

    /// Derivative of the interpolant with respect to `sigma`.
    pub fn derivative(&self, sigma: f64) -> Point {
        let th = (sigma - self.s) / self.h;
        let [_, r2, r3, r4, r5] = self.r;
        let a = r4.add_scaled(1.0 - th, &r5);
        let da = -r5;
        let b = r3.add_scaled(th, &a);
        let db = a.add_scaled(th, &da);
        let c = r2.add_scaled(1.0 - th, &b);
        let dc = (-b).add_scaled(1.0 - th, &db);
        c.add_scaled(th, &dc).scale(1.0 / self.h)
    }
}
