use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evolution::Trajectory;

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes one row per recorded state. Floats use `{:.16e}` so a row reads
/// back to the same `f64`.
///
/// Columns: `t`, `a{j}_re`, `a{j}_im`, `M0`, `M{k}_re`, `M{k}_im`,
/// `string_residual`, `branch_drift`, `error_estimate`. The widths come from the
/// first state. Later states with fewer entries are padded with `NaN`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let first = traj
        .states
        .first()
        .ok_or_else(|| Error::Io("trajectory has no recorded states".into()))?;
    let n_coeffs = first.coeffs.len();
    let n_moments = first.moments.m.len();

    let mut header = vec!["t".to_string()];
    for j in 0..n_coeffs {
        header.push(format!("a{j}_re"));
        header.push(format!("a{j}_im"));
    }
    header.push("M0".into());
    for k in 1..=n_moments {
        header.push(format!("M{k}_re"));
        header.push(format!("M{k}_im"));
    }
    header.extend(["string_residual", "branch_drift", "error_estimate"].map(String::from));

    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header).map_err(csv_err)?;
    let fmt = |x: f64| format!("{x:.16e}");
    for s in &traj.states {
        let mut row = Vec::with_capacity(header.len());
        row.push(fmt(s.t));
        for j in 0..n_coeffs {
            let c = s.coeffs.get(j).copied().unwrap_or(f64::NAN.into());
            row.push(fmt(c.re));
            row.push(fmt(c.im));
        }
        row.push(fmt(s.moments.m0));
        for k in 0..n_moments {
            let m = s.moments.m.get(k).copied().unwrap_or(f64::NAN.into());
            row.push(fmt(m.re));
            row.push(fmt(m.im));
        }
        row.push(fmt(s.string_residual));
        row.push(fmt(s.max_branch_drift()));
        row.push(fmt(s.error_estimate));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_trajectory_csv(traj, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::run_evolution;
    use crate::scenarios::{Family, ScenarioSpec};

    #[test]
    fn csv_round_trips_floats() {
        let mut spec = ScenarioSpec::new(Family::Disk { radius: 1.0 });
        spec.horizon = 0.01;
        spec.dt = 0.005;
        let traj = run_evolution(&spec).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        let headers = rd.headers().unwrap().clone();
        assert_eq!(&headers[0], "t");
        assert_eq!(&headers[1], "a0_re");
        let rows: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), traj.states.len());
        let last = rows.last().unwrap();
        let a0: f64 = last[1].parse().unwrap();
        assert_eq!(a0, traj.states.last().unwrap().coeffs[0].re);
    }
}
