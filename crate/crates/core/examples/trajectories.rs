//! A few trajectories with their termination status and `tau+`.

use std::f64::consts::PI;

use bohmian::field::Point;
use bohmian::integrator::{integrate_trajectory, IntegratorConfig};
use bohmian::state::Preset;

fn main() -> bohmian::Result<()> {
    let state = Preset::NodeSuperposition.build();
    let config = IntegratorConfig::default();
    for q0 in [-2.0, -0.5, 0.0, 0.5, 2.0] {
        let traj = integrate_trajectory(&state, &Point::new1(q0), 0.0, 2.0 * PI, &config)?;
        let end = traj.last();
        println!(
            "q0 = {q0:+.2}  {:<10} end t = {:.6}  q = {:+.6}  tau+ = {:?}",
            traj.status.name(),
            end.t,
            end.q[0],
            traj.tau_plus.event()
        );
    }
    Ok(())
}
