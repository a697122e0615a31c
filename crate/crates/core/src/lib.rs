pub mod equivariance;
pub mod error;
pub mod field;
pub mod flux;
pub mod integrator;
pub mod propagator;
pub mod scenario;
pub mod state;

pub use error::{Error, Result};
