//! Nodes of the superposition in the window `[-2, 2] x [-0.5, 2]`.

use bohmian::flux::{find_nodal_set, NodalResolution, NodalWindow};
use bohmian::state::Preset;

fn main() -> bohmian::Result<()> {
    let state = Preset::NodeSuperposition.build();
    let set = find_nodal_set(
        &state,
        &NodalWindow::new(vec![(-2.0, 2.0)], (-0.5, 2.0)),
        &NodalResolution::default(),
    )?;
    for n in &set.nodes {
        println!("q = {:+.10}  t = {:+.10}", n.point.q[0], n.point.t);
    }
    println!("{} nodes, resolved: {}", set.nodes.len(), set.is_resolved());
    Ok(())
}
