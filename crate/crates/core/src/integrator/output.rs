use std::io::Write;

use super::Trajectory;
use crate::error::Result;

/// Writes all samples as one long-format CSV table keyed by trajectory index,
/// with columns `trajectory, t, q_1..q_d, psi_abs, v_1..v_d`.
pub fn write_trajectories_csv<W: Write>(out: W, trajectories: &[Trajectory]) -> Result<()> {
    let dim = trajectories.first().map_or(1, |t| t.q0.dim());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["trajectory".to_string(), "t".to_string()];
    header.extend((1..=dim).map(|k| format!("q_{k}")));
    header.push("psi_abs".into());
    header.extend((1..=dim).map(|k| format!("v_{k}")));
    w.write_record(&header)?;
    for (id, traj) in trajectories.iter().enumerate() {
        for s in &traj.samples {
            let mut row = vec![id.to_string(), s.t.to_string()];
            row.extend(s.q.as_slice().iter().map(|x| x.to_string()));
            row.push(s.psi_abs.to_string());
            row.extend(s.v.as_slice().iter().map(|x| x.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}
