//! Run configuration files: flat `key = value` lines, `#` starts a comment.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::Point;
use crate::io::FieldFormat;

/// Every run parameter; `None` means "use the scenario default".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub elevation: Option<PathBuf>,
    pub n: Option<usize>,
    pub n_lambda: Option<usize>,
    pub n_b: Option<usize>,
    pub budget: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub p_tilde: Option<f64>,
    pub model: Option<String>,
    pub out: Option<PathBuf>,
    pub points: Vec<Point>,
    pub station: Option<Point>,
    pub weights: Option<(f64, f64)>,
    pub workers: Option<usize>,
    pub format: Option<FieldFormat>,
}

impl RunConfig {
    /// Fields set in `other` replace those in `self`; points are replaced when
    /// `other` lists any.
    pub fn overridden_by(mut self, other: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(scenario, elevation, n, n_lambda, n_b, budget, gamma, epsilon, p_tilde, model, out, station, weights, workers, format);
        if !other.points.is_empty() {
            self.points = other.points;
        }
        self
    }
}

/// Parses `x,y`.
pub fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let p = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("not a number: `{t}`"))
    };
    Ok((p(a)?, p(b)?))
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = RunConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            msg,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("{key}: not a number: `{v}`")));
        let count = |v: &str| v.parse::<usize>().map_err(|_| err(format!("{key}: not a count: `{v}`")));
        let pair = |v: &str| parse_pair(v).map_err(|m| err(format!("{key}: {m}")));
        match key {
            "scenario" => cfg.scenario = Some(value.to_string()),
            "elevation" => cfg.elevation = Some(PathBuf::from(value)),
            "n" => cfg.n = Some(count(value)?),
            "nlambda" => cfg.n_lambda = Some(count(value)?),
            "nb" => cfg.n_b = Some(count(value)?),
            "budget" => cfg.budget = Some(num(value)?),
            "gamma" => cfg.gamma = Some(num(value)?),
            "epsilon" => cfg.epsilon = Some(num(value)?),
            "p_tilde" => cfg.p_tilde = Some(num(value)?),
            "model" => cfg.model = Some(value.to_string()),
            "out" => cfg.out = Some(PathBuf::from(value)),
            "point" => {
                let (x, y) = pair(value)?;
                cfg.points.push(Point::new(x, y));
            }
            "station" => {
                let (x, y) = pair(value)?;
                cfg.station = Some(Point::new(x, y));
            }
            "weights" => cfg.weights = Some(pair(value)?),
            "workers" => cfg.workers = Some(count(value)?),
            "format" => cfg.format = Some(value.parse().map_err(|_| err(format!("unknown format `{value}`")))?),
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("run.cfg");
        std::fs::write(
            &p,
            "# run\nscenario = example4\nn=101 # coarse\nnlambda = 11\npoint = 0.555, 0.315\npoint=0.2,0.2\nweights=0.43,0.57\nformat = packed\n",
        )
        .unwrap();
        let cfg = parse_config(&p).unwrap();
        assert_eq!(cfg.scenario.as_deref(), Some("example4"));
        assert_eq!(cfg.n, Some(101));
        assert_eq!(cfg.points, vec![Point::new(0.555, 0.315), Point::new(0.2, 0.2)]);
        assert_eq!(cfg.weights, Some((0.43, 0.57)));
        assert_eq!(cfg.format, Some(FieldFormat::Packed));
        let flags = RunConfig {
            n: Some(51),
            ..RunConfig::default()
        };
        let merged = cfg.clone().overridden_by(flags);
        assert_eq!(merged.n, Some(51));
        assert_eq!(merged.n_lambda, Some(11));
        assert_eq!(merged.points, cfg.points);
    }

    #[test]
    fn bad_lines_are_reported() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("bad.cfg");
        std::fs::write(&p, "n = 10\nfoo = 1\n").unwrap();
        assert!(matches!(parse_config(&p), Err(Error::Parse { line: 2, .. })));
        std::fs::write(&p, "n = ten\n").unwrap();
        assert!(matches!(parse_config(&p), Err(Error::Parse { line: 1, .. })));
        std::fs::write(&p, "just words\n").unwrap();
        assert!(parse_config(&p).is_err());
    }
}
