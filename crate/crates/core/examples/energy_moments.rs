//! `<H>` and `<H^2>` in closed form and on a grid.

use bohmian::field::Grid;
use bohmian::propagator::{energy_expectation, energy_moment};
use bohmian::state::{Preset, WaveFunction, DEFAULT_CAP};

fn main() -> bohmian::Result<()> {
    let state = Preset::NodeSuperposition.build();
    let (lo, hi) = state.natural_extent()[0];
    let grid = WaveFunction::Grid(state.to_grid_state(
        &Grid::periodic_1d(lo, hi, 512)?,
        0.0,
        DEFAULT_CAP,
    )?);
    for (name, s) in [("analytic", &state), ("grid", &grid)] {
        println!(
            "{name:<8}  <H> = {:.12}  <H^2> = {:.12}",
            energy_expectation(s)?,
            energy_moment(s, 1)?
        );
    }
    println!(
        "exact     <H> = {:.12}  <H^2> = {:.12}",
        11.0 / 6.0,
        17.0 / 4.0
    );
    Ok(())
}
