//! Trajectory CSV and report files.

use std::io::{self, Write};

use crossdim::Trajectory;

/// Writes `t,phase,dim,x1..xD` rows, D being the largest state dimension.
/// Values use 17 significant digits; missing trailing components are empty.
pub fn write_csv<W: Write>(traj: &Trajectory, out: W) -> io::Result<()> {
    let width = traj.max_dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "phase".to_string(), "dim".to_string()];
    header.extend((1..=width).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for ((t, x), label) in traj.times().iter().zip(traj.states()).zip(traj.labels()) {
        let mut rec = Vec::with_capacity(width + 3);
        rec.push(format!("{t:.16e}"));
        rec.push(label.map(|l| l.to_string()).unwrap_or_default());
        rec.push(x.dim().to_string());
        rec.extend(x.as_slice().iter().map(|v| format!("{v:.16e}")));
        rec.resize(width + 3, String::new());
        w.write_record(&rec)?;
    }
    w.flush()
}
