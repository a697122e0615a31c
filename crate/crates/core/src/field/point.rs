use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Index, IndexMut};

/// A position in configuration space of dimension 1 or 2.
///
/// Stored inline so that trajectory integration does not allocate.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    dim: u8,
    coords: [f64; 2],
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        assert!(
            coords.len() == 1 || coords.len() == 2,
            "points have dimension 1 or 2, got {}",
            coords.len()
        );
        let mut c = [0.0; 2];
        c[..coords.len()].copy_from_slice(coords);
        Point {
            dim: coords.len() as u8,
            coords: c,
        }
    }

    pub fn new1(x: f64) -> Self {
        Point {
            dim: 1,
            coords: [x, 0.0],
        }
    }

    pub fn new2(x: f64, y: f64) -> Self {
        Point {
            dim: 2,
            coords: [x, y],
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 1 || dim == 2);
        Point {
            dim: dim as u8,
            coords: [0.0; 2],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim()]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        let d = self.dim();
        &mut self.coords[..d]
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `self + s * other`
    #[inline]
    pub fn add_scaled(&self, s: f64, other: &Point) -> Point {
        let mut out = *self;
        for k in 0..self.dim() {
            out.coords[k] += s * other.coords[k];
        }
        out
    }

    pub fn scale(&self, s: f64) -> Point {
        let mut out = *self;
        for k in 0..self.dim() {
            out.coords[k] *= s;
        }
        out
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for Point {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.as_mut_slice()[i]
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        self.add_scaled(-1.0, &rhs)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        self.add_scaled(1.0, &rhs)
    }
}

impl std::ops::Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        if v.len() != 1 && v.len() != 2 {
            return Err(serde::de::Error::custom("points have 1 or 2 coordinates"));
        }
        Ok(Point::new(&v))
    }
}

/// A point `(q, t)` of configuration-space-time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub q: Point,
    pub t: f64,
}

impl SpacetimePoint {
    pub fn new(q: Point, t: f64) -> Self {
        SpacetimePoint { q, t }
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.t.is_finite()
    }

    /// Euclidean distance with space and time weighted by `time_weight`.
    pub fn distance(&self, other: &SpacetimePoint, time_weight: f64) -> f64 {
        let dq = self.q - other.q;
        let dt = time_weight * (self.t - other.t);
        (dq.dot(&dq) + dt * dt).sqrt()
    }
}
