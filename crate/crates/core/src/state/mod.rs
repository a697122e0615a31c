//! Wave functions, potentials and the fields derived from them.

mod expansion;
mod grid_state;
mod hermite;
mod packet;
mod potential;
mod wave;

pub use expansion::{ground_plus_second_excited, ground_state, EigenComponent, HarmonicExpansion};
pub use grid_state::{GridHistory, GridState};
pub use hermite::{hermite_function, MAX_INDEX};
pub use packet::GaussianPacket;
pub use potential::{Potential, PotentialKind, Units, DEFAULT_CAP};
pub use wave::{
    current, eval_psi, make_harmonic_superposition, spacetime_flux, velocity, Jet, Preset,
    VelocitySample, WaveFunction, NODE_THRESHOLD,
};
