//! Nodal sets, surface fluxes and the bad-event bound.

mod nodal;

pub use nodal::{
    find_nodal_set, Codimension, NodalResolution, NodalSet, NodalWindow, Node, UnresolvedCell,
    DEDUP_DISTANCE, NODE_RESIDUAL,
};
mod bound;
pub use bound::{
    bad_event_bound, bad_event_ladder, mc_bad_events, wilson_interval, BoundOptions, FluxReport,
    McEstimate, RegionSpec,
};
mod greens;
pub use greens::{greens_identity_residual, GreensReport, SPECTRAL_POINTS_1D, SPECTRAL_POINTS_2D};
mod surface;

pub use surface::{
    flux_through_masked, flux_through_surface, mc_crossings, CrossingEstimate, FluxQuadrature,
    Surface, SurfaceFlux,
};
