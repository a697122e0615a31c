//! Split-step evolution against the closed form.

use std::f64::consts::PI;

use bohmian::field::Grid;
use bohmian::propagator::{evolve_analytic, evolve_splitstep, PropagatorConfig};
use bohmian::state::{Preset, DEFAULT_CAP};

fn main() -> bohmian::Result<()> {
    let state = Preset::NodeSuperposition.build();
    let (lo, hi) = state.natural_extent()[0];
    let grid = Grid::periodic_1d(lo, hi, 512)?;
    let initial = state.to_grid_state(&grid, 0.0, DEFAULT_CAP)?;
    let t = PI / 2.0;
    let exact = evolve_analytic(&state, t)?.sample(&grid, 0.0)?;
    for dt in [4e-3, 2e-3, 1e-3] {
        let out = evolve_splitstep(
            &initial,
            t,
            &PropagatorConfig {
                dt,
                ..Default::default()
            },
        )?;
        println!(
            "dt = {dt:.0e}  max |psi - exact| = {:.3e}",
            out.field().max_abs_diff(&exact)
        );
    }
    Ok(())
}
