//! Bad-event flux bound for shrinking tubes against Monte Carlo.

use std::f64::consts::PI;

use bohmian::flux::{bad_event_ladder, BoundOptions, RegionSpec};
use bohmian::state::Preset;

fn main() -> bohmian::Result<()> {
    let state = Preset::NodeSuperposition.build();
    let specs = RegionSpec::ladder(&[0.2, 0.1, 0.05], 0.1, 10.0, PI);
    for r in bad_event_ladder(&state, &specs, 5000, 7, &BoundOptions::default())? {
        println!(
            "eps = {:.2}  N = {:.4e}  S = {:.1e}  I = {:.1e}  bound = {:.4e}  mc = {:.4} +- {:.4}  holds: {}",
            r.parameters.eps,
            r.n_term,
            r.s_term,
            r.i_term,
            r.total_bound,
            r.mc_estimate,
            r.mc_half_width,
            r.bound_holds()
        );
    }
    Ok(())
}
