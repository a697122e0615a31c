//! ODE endpoints against the quantile map `F_t^{-1}(F_0(q0))`.

use std::f64::consts::PI;

use bohmian::equivariance::quantile_transport;
use bohmian::field::Point;
use bohmian::integrator::{integrate_trajectory, IntegratorConfig};
use bohmian::state::Preset;

fn main() -> bohmian::Result<()> {
    let state = Preset::NodeSuperposition.build();
    let t = PI / 4.0;
    let config = IntegratorConfig::default();
    for q0 in [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5] {
        let ode = integrate_trajectory(&state, &Point::new1(q0), 0.0, t, &config)?
            .last()
            .q[0];
        let map = quantile_transport(&state, q0, t)?;
        println!(
            "q0 = {q0:+.2}  ode = {ode:+.9}  quantile = {map:+.9}  diff = {:.1e}",
            (ode - map).abs()
        );
    }
    Ok(())
}
