//! Samples `|psi_0|^2`, transports the ensemble and compares it with `|psi_t|^2`.

use std::f64::consts::PI;

use bohmian::equivariance::{ks_distance, propagate_ensemble_to_times, sample_initial};
use bohmian::integrator::IntegratorConfig;
use bohmian::state::Preset;

fn main() -> bohmian::Result<()> {
    let state = Preset::NodeSuperposition.build();
    let ensemble = sample_initial(&state, 20_000, 7)?;
    let times = [PI / 8.0, PI / 4.0, PI / 2.0, PI];
    for e in propagate_ensemble_to_times(&ensemble, &state, &times, &IntegratorConfig::default())? {
        let ks = ks_distance(&e, &state)?;
        println!(
            "t = {:.4}  KS = {:.4}  critical = {:.4}  terminated = {:.1e}  passes: {}",
            e.t,
            ks.ks,
            ks.critical,
            e.terminated_fraction(),
            ks.passes()
        );
    }
    Ok(())
}
