use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{RobotParams, Trajectory, TrajectorySample};
use crate::error::{Error, Result};

const HEADER: &str = "t,theta1,theta2,dtheta1,dtheta2,x,z,u1,u2";

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    for s in &traj.samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.t, s.theta[0], s.theta[1], s.theta_dot[0], s.theta_dot[1], s.p[0], s.p[1], s.u[0], s.u[1]
        )?;
    }
    Ok(())
}

/// Inverse of [`write_trajectory_csv`]. Waypoints and arrivals are not
/// stored in the CSV and come back empty.
pub fn read_trajectory_csv<R: BufRead>(input: R) -> Result<Trajectory> {
    let mut lines = input.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim_end() == HEADER => {}
        _ => {
            return Err(Error::Format {
                line: 1,
                message: format!("expected header `{HEADER}`"),
            })
        }
    }
    let mut samples: Vec<TrajectorySample> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format {
                line: lineno,
                message: e.to_string(),
            })?;
        if v.len() != 9 {
            return Err(Error::Format {
                line: lineno,
                message: format!("expected 9 fields, found {}", v.len()),
            });
        }
        if samples.last().is_some_and(|s| v[0] <= s.t) {
            return Err(Error::Format {
                line: lineno,
                message: "time is not strictly increasing".into(),
            });
        }
        samples.push(TrajectorySample {
            t: v[0],
            theta: [v[1], v[2]],
            theta_dot: [v[3], v[4]],
            p: [v[5], v[6]],
            u: [v[7], v[8]],
        });
    }
    let dt = match samples.as_slice() {
        [a, b, ..] => b.t - a.t,
        _ => 0.0,
    };
    Ok(Trajectory {
        dt,
        samples,
        ..Default::default()
    })
}

/// End-effector path in the (x, z) plane with the reachable disk, the
/// base and waypoint markers.
pub fn trajectory_svg(traj: &Trajectory, params: &RobotParams) -> String {
    const SIZE: f64 = 480.0;
    let reach = params.l1 + params.l2;
    let scale = SIZE / (2.2 * reach);
    let map = |x: f64, z: f64| (SIZE / 2.0 + x * scale, SIZE / 2.0 - z * scale);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (cx, cy) = map(0.0, 0.0);
    let _ = writeln!(
        svg,
        r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="#cccccc" stroke-dasharray="4 4"/>"##,
        reach * scale
    );
    let _ = writeln!(svg, r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="#444444"/>"##);

    let step = (traj.samples.len() / 4000).max(1);
    let mut points: Vec<String> = traj
        .samples
        .iter()
        .step_by(step)
        .map(|s| {
            let (x, y) = map(s.p[0], s.p[1]);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    if let Some(s) = traj.samples.last() {
        let (x, y) = map(s.p[0], s.p[1]);
        points.push(format!("{x:.2},{y:.2}"));
    }
    let _ = writeln!(
        svg,
        r##"<polyline fill="none" stroke="#1f77b4" stroke-width="2" points="{}"/>"##,
        points.join(" ")
    );
    for (i, w) in traj.waypoints.iter().enumerate() {
        let (x, y) = map(w[0], w[1]);
        let _ = writeln!(
            svg,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#d62728"><title>waypoint {}</title></circle>"##,
            i + 1
        );
    }
    svg.push_str("</svg>\n");
    svg
}
