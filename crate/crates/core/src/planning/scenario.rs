use crate::error::{Error, Result};
use crate::grid::{normalize_budget, DomainMask, Grid2D, Point, Problem, ScalarField};

use super::terrain::{synthetic_terrain, terrain_problem, TERRAIN_BUDGET};

pub const SCENARIO_NAMES: [&str; 6] = ["example1", "example2", "example3", "example4", "example5", "terrain"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Disk of diameter 1, `B ≡ 2`, banded `ψ(d)`.
    Disk,
    /// Unit square, two-bump `B`, banded `ψ(d)`.
    BandedSquare,
    /// Unit square, two-bump `B`, one Gaussian station.
    Station,
    /// Unit square, two-bump `B`, two weighted stations.
    TwoStations,
    /// Unit square, offset-bump `B`, eight Gaussian patrol areas.
    PatrolGaps,
    /// Synthetic terrain with slope-dependent speed.
    Terrain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub kind: ScenarioKind,
    /// Gridpoints per axis on the unit square; gridpoints along x for terrain.
    pub n: usize,
    pub budget: f64,
    pub gamma: f64,
    pub n_lambda: usize,
    pub n_b: usize,
    pub p_tilde: f64,
    pub station: Point,
    pub weights: (f64, f64),
}

/// Eight Gaussian patrol areas `(x, y, σ, amplitude)` for the patrol-gap scenario.
pub const PATROL_GAPS: [(f64, f64, f64, f64); 8] = [
    (0.15, 0.15, 0.08, 1.0),
    (0.15, 0.85, 0.08, 1.0),
    (0.45, 0.20, 0.10, 0.8),
    (0.45, 0.80, 0.10, 0.8),
    (0.35, 0.50, 0.07, 1.2),
    (0.75, 0.25, 0.09, 1.0),
    (0.75, 0.75, 0.09, 1.0),
    (0.92, 0.50, 0.05, 1.5),
];
const PATROL_GAPS_BUDGET: f64 = 5.0;

impl ScenarioSpec {
    pub fn named(name: &str) -> Result<Self> {
        let base = |kind, n, budget, n_lambda| ScenarioSpec {
            name: name.to_string(),
            kind,
            n,
            budget,
            gamma: 1.0,
            n_lambda,
            n_b: n_lambda,
            p_tilde: 0.0,
            station: Point::new(0.5, 0.3),
            weights: (0.43, 0.57),
        };
        Ok(match name {
            "example1" => base(ScenarioKind::Disk, 501, 2.5, 101),
            "example2" => base(ScenarioKind::BandedSquare, 501, 2.0, 101),
            "example3" => base(ScenarioKind::Station, 201, 2.0, 101),
            "example4" => base(ScenarioKind::TwoStations, 201, 2.0, 101),
            "example5" => base(ScenarioKind::PatrolGaps, 501, PATROL_GAPS_BUDGET, 401),
            "terrain" => base(ScenarioKind::Terrain, 501, TERRAIN_BUDGET, 21),
            _ => return Err(Error::UnknownScenario(name.to_string())),
        })
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_lambda_steps(mut self, n_lambda: usize) -> Self {
        self.n_lambda = n_lambda;
        self.n_b = n_lambda;
        self
    }
}

fn bump(x: f64, y: f64, cx: f64, cy: f64, a: f64) -> f64 {
    (-a * ((x - cx).powi(2) + (y - cy).powi(2))).exp()
}

/// Two equal bumps at `(0.25, 0.5)` and `(0.75, 0.5)`.
fn two_bump_benefit(x: f64, y: f64) -> f64 {
    bump(x, y, 0.25, 0.5, 10.0) + bump(x, y, 0.75, 0.5, 10.0)
}

/// Banded shape peaking at distance 0.3 from the boundary.
fn banded(d: f64) -> f64 {
    1.0 / (50.0 * (d - 0.3).powi(2) + 0.5)
}

fn square_distance(x: f64, y: f64) -> f64 {
    x.min(1.0 - x).min(y).min(1.0 - y)
}

pub fn build_scenario(spec: &ScenarioSpec) -> Result<Problem> {
    if spec.n < 3 {
        return Err(Error::InvalidGrid(format!("need at least 3 gridpoints per axis, got {}", spec.n)));
    }
    let cells = spec.n - 1;
    if spec.kind == ScenarioKind::Terrain {
        let raster = synthetic_terrain(cells, (cells * 4).div_ceil(5))?;
        return terrain_problem(&raster, spec.budget, spec.gamma, spec.p_tilde);
    }
    let g = Grid2D::unit_square(cells)?;
    let one = ScalarField::constant(g, 1.0);
    let (mask, benefit, shape) = match spec.kind {
        ScenarioKind::Disk => {
            let c = Point::new(0.5, 0.5);
            let mask = DomainMask::disk(g, c, 0.5)?;
            let shape = ScalarField::from_fn(g, |x, y| banded((0.5 - Point::new(x, y).dist(c)).max(0.0)));
            (mask, one.scale(2.0), shape)
        }
        ScenarioKind::BandedSquare => (
            DomainMask::open_box(g),
            ScalarField::from_fn(g, two_bump_benefit),
            ScalarField::from_fn(g, |x, y| banded(square_distance(x, y))),
        ),
        ScenarioKind::Station => {
            let s = spec.station;
            (
                DomainMask::open_box(g),
                ScalarField::from_fn(g, two_bump_benefit),
                ScalarField::from_fn(g, |x, y| bump(x, y, s.x, s.y, 30.0)),
            )
        }
        ScenarioKind::TwoStations => {
            let (w1, w2) = spec.weights;
            if !(w1 >= 0.0 && w2 >= 0.0 && w1 + w2 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "station weights must be nonnegative and not both zero, got ({w1}, {w2})"
                )));
            }
            (
                DomainMask::open_box(g),
                ScalarField::from_fn(g, two_bump_benefit),
                ScalarField::from_fn(g, |x, y| {
                    w1 * bump(x, y, 0.5, 0.3, 30.0) + w2 * bump(x, y, 0.5, 0.7, 30.0)
                }),
            )
        }
        ScenarioKind::PatrolGaps => (
            DomainMask::open_box(g),
            ScalarField::from_fn(g, |x, y| 3.0 + 7.5 * bump(x, y, 0.7, 0.5, 10.0)),
            ScalarField::from_fn(g, |x, y| {
                PATROL_GAPS
                    .iter()
                    .map(|&(cx, cy, s, a)| a * bump(x, y, cx, cy, 0.5 / (s * s)))
                    .sum()
            }),
        ),
        ScenarioKind::Terrain => unreachable!(),
    };
    let psi = normalize_budget(&shape, &mask, spec.budget, spec.gamma)?;
    Problem::new(mask, benefit, psi, one.clone(), one, spec.p_tilde)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{integrate_field, sample_bilinear};

    #[test]
    fn names_resolve() {
        for n in SCENARIO_NAMES {
            assert_eq!(ScenarioSpec::named(n).unwrap().name, n);
        }
        assert!(matches!(ScenarioSpec::named("example9"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn closed_forms_at_known_points() {
        let p = build_scenario(&ScenarioSpec::named("example5").unwrap().with_n(101)).unwrap();
        assert_eq!(sample_bilinear(&p.benefit, Point::new(0.7, 0.5)).unwrap(), 10.5);
        let p = build_scenario(&ScenarioSpec::named("example2").unwrap().with_n(101)).unwrap();
        let b = sample_bilinear(&p.benefit, Point::new(0.25, 0.5)).unwrap();
        assert!((b - (1.0 + (-2.5f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn budgets_hold() {
        for name in ["example1", "example2", "example3", "example4", "example5"] {
            let spec = ScenarioSpec::named(name).unwrap().with_n(60);
            let p = build_scenario(&spec).unwrap();
            let e = integrate_field(&p.psi, &p.mask, spec.gamma).unwrap();
            assert!((e - spec.budget).abs() < 1e-10 * spec.budget, "{name}: {e}");
            assert_eq!(p.kappa, Some(1.0));
        }
    }

    #[test]
    fn weights_are_checked() {
        let mut spec = ScenarioSpec::named("example4").unwrap().with_n(20);
        spec.weights = (0.0, 0.0);
        assert!(build_scenario(&spec).is_err());
        spec.weights = (1.0, 0.0);
        assert!(build_scenario(&spec).is_ok());
    }
}
