//! Line-oriented text outputs: trajectories and whitespace-separated tables.
//!
//! A trajectory file holds one polyline per line as repeated `x y t J1 J2`
//! groups. Each polyline may be preceded by a `# ` comment line carrying a
//! label and `termination=<reason>`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Point;
use crate::multiobjective::FrontPoint;
use crate::trajectory::{Termination, Trajectory};

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_trajectories(path: &Path, paths: &[(String, Trajectory)]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    for (label, t) in paths {
        writeln!(w, "# {label} termination={}", t.termination.as_str()).map_err(io)?;
        let mut line = String::new();
        for s in 0..t.points.len() {
            if s > 0 {
                line.push(' ');
            }
            let p = t.points[s];
            line.push_str(&format!(
                "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
                p.x, p.y, t.times[s], t.j1[s], t.j2[s]
            ));
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn parse_termination(comment: &str) -> Termination {
    match comment.split("termination=").nth(1).map(str::trim) {
        Some("boundary") => Termination::ReachedBoundary,
        Some("stalled") => Termination::Stalled,
        _ => Termination::StepCap,
    }
}

/// Reads a trajectory file back; labels come from the preceding comments.
pub fn load_trajectories(path: &Path) -> Result<Vec<(String, Trajectory)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut pending: Option<String> = None;
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(c) = line.strip_prefix('#') {
            pending = Some(c.trim().to_string());
            continue;
        }
        let Some(comment) = pending.take() else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                msg: "polyline without a label line".into(),
            });
        };
        let vals = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: n + 1,
                    msg: format!("not a number: `{t}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() % 5 != 0 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                msg: "vertex groups must have 5 values".into(),
            });
        }
        let mut t = Trajectory {
            points: Vec::new(),
            times: Vec::new(),
            j1: Vec::new(),
            j2: Vec::new(),
            termination: parse_termination(&comment),
        };
        for v in vals.chunks_exact(5) {
            t.points.push(Point::new(v[0], v[1]));
            t.times.push(v[2]);
            t.j1.push(v[3]);
            t.j2.push(v[4]);
        }
        let label = comment
            .split(" termination=")
            .next()
            .unwrap_or_default()
            .to_string();
        out.push((label, t));
    }
    Ok(out)
}

/// Writes a table with an optional `# ` header line.
pub fn write_rows(path: &Path, header: Option<&str>, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    if let Some(h) = header {
        writeln!(w, "# {h}").map_err(io)?;
    }
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a table written by [`write_rows`], skipping comment lines.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        rows.push(
            line.split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| Error::Parse {
                        path: path.to_path_buf(),
                        line: n + 1,
                        msg: format!("not a number: `{t}`"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok(rows)
}

/// Rows `lambda J1 J2 payoff` with payoff `B·e^{−J1} − J2 − R`.
pub fn write_front_rows(path: &Path, points: &[FrontPoint], benefit: f64, r: f64) -> Result<()> {
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| vec![p.lambda, p.j1, p.j2, p.payoff(benefit) - r])
        .collect();
    write_rows(path, Some("lambda J1 J2 payoff"), &rows)
}
