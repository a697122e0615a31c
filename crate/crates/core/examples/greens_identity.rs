//! Volume integral of `psi* H psi - psi H psi*` against the boundary current.

use bohmian::flux::greens_identity_residual;
use bohmian::state::Preset;

fn main() -> bohmian::Result<()> {
    let state = Preset::NodeSuperposition.build();
    for spacing in [0.4, 0.3, 0.15] {
        let r = greens_identity_residual(&state, 0.7, 6.0, 0.1, spacing)?;
        println!(
            "spacing = {spacing:.2}  volume = {:.6e}  boundary = {:.6e}  residual = {:.2e}",
            r.volume, r.boundary, r.residual
        );
    }
    Ok(())
}
