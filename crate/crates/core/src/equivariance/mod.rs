//! Statistical and deterministic checks that trajectories transport `|psi|^2`.

mod ensemble;
mod sampling;
mod transport;

pub use ensemble::{
    ks_distance, propagate_ensemble, propagate_ensemble_to_times, sample_at, sample_initial,
    write_ensemble_csv, Ensemble, EnsembleSummary, Fate, KsReport, MIN_KS_POINTS,
};
pub use sampling::{density_cdf, density_grid, point_rng, sample_density, InverseCdf, TABLE_SIZE};
pub use transport::{
    continuity_residual, grid_continuity_residual, quantile_transport, quantile_transport_between,
    ContinuityResidual, TIME_STEP, TRANSPORT_TOLERANCE,
};
