//! Terrain scenarios: the distance-based benefit and banded patrol forms on
//! an elevation raster, plus a synthetic raster for testing.

use std::f64::consts::PI;

use crate::eikonal::solve_eikonal;
use crate::error::{Error, Result};
use crate::grid::{normalize_budget, DomainMask, Grid2D, Problem, ScalarField};
use crate::io::{speed_from_slope, ElevationRaster};

/// Patrol budget used for the synthetic terrain at its default size.
pub const TERRAIN_BUDGET: f64 = 2000.0;

/// Smooth bumps `(u, v, width, height)` in coordinates relative to the box;
/// heights are in units of the box width. The last one is steep enough that
/// its flanks are impassable.
const BUMPS: [(f64, f64, f64, f64); 7] = [
    (0.30, 0.35, 0.10, 0.06),
    (0.62, 0.30, 0.08, 0.04),
    (0.45, 0.65, 0.12, 0.08),
    (0.72, 0.62, 0.07, 0.05),
    (0.20, 0.60, 0.06, 0.03),
    (0.55, 0.48, 0.05, 0.02),
    (0.80, 0.42, 0.03, 0.15),
];

/// A `nx × ny` cell raster with unit spacing: a wavy elliptical domain over a
/// sum of Gaussian hills.
pub fn synthetic_terrain(nx: usize, ny: usize) -> Result<ElevationRaster> {
    let grid = Grid2D::with_spacing(nx, ny, 1.0, 1.0)?;
    let (w, h) = (nx as f64, ny as f64);
    let mask = DomainMask::from_fn(grid, |x, y| {
        let (u, v) = (x / w - 0.5, y / h - 0.5);
        let theta = v.atan2(u);
        let radius = 0.40 * (1.0 + 0.08 * (3.0 * theta).sin() + 0.05 * (5.0 * theta).cos() + 0.04 * (7.0 * theta + PI / 3.0).sin());
        (u / radius).hypot(v / radius) < 1.0
    })?;
    let z = ScalarField::from_fn(grid, |x, y| {
        let (u, v) = (x / w, y / w);
        w * BUMPS
            .iter()
            .map(|&(cu, cv, s, a)| {
                let cv = cv * (h / w);
                a * (-((u - cu).powi(2) + (v - cv).powi(2)) / (2.0 * s * s)).exp()
            })
            .sum::<f64>()
    });
    ElevationRaster::new(z, mask)
}

/// Problem on a raster with `B(d) = 8d(2d_m − d)/d_m` and the patrol shape
/// `(0.7d_m − d)/d_m` on `0.3d_m < d < 0.7d_m`, where `d` is the discrete
/// distance to the boundary and `d_m` its maximum. `K ≡ 1`; speed follows
/// the slope law.
pub fn terrain_problem(raster: &ElevationRaster, budget: f64, gamma: f64, p_tilde: f64) -> Result<Problem> {
    let grid = *raster.grid();
    let mask = raster.mask.clone();
    let one = ScalarField::constant(grid, 1.0);
    let d = solve_eikonal(&mask, &one, &one)?.u;
    let dm = mask
        .inside_indices()
        .map(|k| d.values()[k])
        .fold(0.0, f64::max);
    if !(dm > 0.0 && dm.is_finite()) {
        return Err(Error::Domain("domain has no interior distance".into()));
    }
    let benefit = d.map(|d| 8.0 * d * (2.0 * dm - d) / dm);
    let shape = d.map(|d| {
        if d > 0.3 * dm && d < 0.7 * dm {
            (0.7 * dm - d) / dm
        } else {
            0.0
        }
    });
    let psi = normalize_budget(&shape, &mask, budget, gamma)?;
    let speed = speed_from_slope(raster);
    Problem::new(mask, benefit, psi, speed, one, p_tilde)
}
