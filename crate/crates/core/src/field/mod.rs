//! Grids, sampled complex fields and the numerical operations on them.

mod grid;
mod interp;
mod point;
mod quadrature;
mod spectral;

pub use grid::{Axis, ComplexField, Grid, MIN_POINTS};
pub(crate) use interp::axis_weights;
pub use interp::{interpolate, interpolate_with, Stencil};
pub use point::{Point, SpacetimePoint};
pub use quadrature::{
    cdf_1d, gauss_legendre, midpoint, quadrature, trapezoid, DensityKind, SpectralCdf,
    NORMALIZATION_TOLERANCE,
};
pub use spectral::{spectral_derivative, spectral_second_derivative, SpectralPlan};
