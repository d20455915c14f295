use std::io::{self, Write};

use super::Trajectory;

pub const CSV_HEADER: &str = "t,particle,x,y,z,vx,vy,vz,density,speed";

/// One row per (sample, particle). Trajectory `k` of an N-particle list
/// writes its particles as `k * N + alpha`.
pub fn write_trajectories_csv<W: Write>(mut w: W, trajectories: &[Trajectory]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let mut offset = 0;
    for tr in trajectories {
        for s in &tr.samples {
            for (a, (p, v)) in s.positions.iter().zip(&s.velocities).enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    s.t,
                    offset + a,
                    p[0],
                    p[1],
                    p[2],
                    v[0],
                    v[1],
                    v[2],
                    s.density,
                    s.speeds[a]
                )?;
            }
        }
        offset += tr.particles;
    }
    Ok(())
}

/// Sidecar record: one line per trajectory with its termination status.
pub fn write_summary<W: Write>(mut w: W, trajectories: &[Trajectory]) -> io::Result<()> {
    let mut offset = 0;
    for (k, tr) in trajectories.iter().enumerate() {
        let t_end = tr.last().map_or(f64::NAN, |s| s.t);
        writeln!(
            w,
            "trajectory={k} first_particle={offset} particles={} source={} termination={} samples={} t_end={t_end}",
            tr.particles,
            tr.source.name(),
            tr.termination.name(),
            tr.samples.len()
        )?;
        offset += tr.particles;
    }
    Ok(())
}
