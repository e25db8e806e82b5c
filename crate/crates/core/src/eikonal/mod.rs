//! First-order upwind solvers for `f·|∇u| = rhs` with `u = 0` outside Ω.
//!
//! [`solve_eikonal`] is the one-pass Dijkstra-like solver; [`solve_eikonal_sweeping`]
//! solves the same discrete system by Gauss-Seidel sweeps and is kept as an
//! independent check. [`solve_transport_pair`] integrates the two linear
//! transport equations along the characteristics of an Eikonal solution,
//! reusing its upwind stencils.

mod fmm;
mod stencil;
mod sweep;
mod transport;
mod update;

pub(crate) use fmm::march;
pub use stencil::{Direction, UpwindStencil};
pub use sweep::{solve_eikonal_sweeping, SweepOptions};
pub use transport::{solve_transport_pair, transport_residual};
pub use update::{point_update, terminated_update, TerminatedCoeffs};

use crate::error::{Error, Result};
use crate::grid::{DomainMask, ScalarField};

/// Gridpoints with speed below this are impassable.
pub const DEFAULT_F_MIN: f64 = 1e-6;
/// Right-hand sides are floored here so that zero-cost regions keep a causal order.
pub const RHS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub f_min: f64,
    pub rhs_floor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            f_min: DEFAULT_F_MIN,
            rhs_floor: RHS_FLOOR,
        }
    }
}

impl SolverOptions {
    pub(crate) fn passable(&self, mask: &DomainMask, speed: &ScalarField) -> Vec<bool> {
        speed
            .values()
            .iter()
            .enumerate()
            .map(|(k, &f)| mask.is_inside(k) && f >= self.f_min)
            .collect()
    }
}

/// Value field plus the order in which inside points were accepted.
#[derive(Debug, Clone)]
pub struct EikonalSolution {
    pub u: ScalarField,
    /// Inside gridpoints in acceptance order; unreachable points are absent.
    pub order: Vec<usize>,
}

pub(crate) fn check_inputs(mask: &DomainMask, fields: &[&ScalarField]) -> Result<()> {
    for f in fields {
        if f.grid() != mask.grid() {
            return Err(Error::GridMismatch);
        }
    }
    if mask.inside_count() == 0 {
        return Err(Error::InvalidMask("no inside gridpoints".into()));
    }
    Ok(())
}

/// Solves `f·|∇u| = rhs` in Ω with `u = 0` on every outside gridpoint.
pub fn solve_eikonal(
    mask: &DomainMask,
    speed: &ScalarField,
    rhs: &ScalarField,
) -> Result<EikonalSolution> {
    solve_eikonal_with(mask, speed, rhs, &SolverOptions::default())
}

pub fn solve_eikonal_with(
    mask: &DomainMask,
    speed: &ScalarField,
    rhs: &ScalarField,
    opts: &SolverOptions,
) -> Result<EikonalSolution> {
    check_inputs(mask, &[speed, rhs])?;
    let grid = *mask.grid();
    let (dx, dy) = (grid.dx(), grid.dy());
    let passable = opts.passable(mask, speed);
    let f = speed.values();
    let r = rhs.values();
    let floor = opts.rhs_floor;
    let marched = march(mask, &passable, |k, ax, ay| {
        point_update(ax, ay, f[k], r[k].max(floor), dx, dy)
    });
    Ok(EikonalSolution {
        u: ScalarField::new(grid, marched.values)?,
        order: marched.order,
    })
}

/// Max over inside finite points of `|f·|𝒟u| − rhs| / max(1, rhs)`, with `𝒟`
/// the upwind operators picked from `u` itself. The scaling keeps the measure
/// meaningful where tiny speeds make `u` and `rhs` huge; for `rhs ≤ 1` it is
/// the absolute residual.
pub fn eikonal_residual(
    mask: &DomainMask,
    speed: &ScalarField,
    rhs: &ScalarField,
    u: &ScalarField,
    opts: &SolverOptions,
) -> f64 {
    let grid = mask.grid();
    let mut worst: f64 = 0.0;
    for k in mask.inside_indices() {
        if !u.values()[k].is_finite() || speed.values()[k] < opts.f_min {
            continue;
        }
        let st = UpwindStencil::at(grid, u.values(), k);
        let (gx, gy) = st.apply(grid, u.values(), k);
        let lhs = speed.values()[k] * gx.hypot(gy);
        let r = rhs.values()[k].max(opts.rhs_floor);
        worst = worst.max((lhs - r).abs() / r.max(1.0));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid2D, Point};

    fn square(n: usize) -> (DomainMask, ScalarField) {
        let g = Grid2D::unit_square(n).unwrap();
        (DomainMask::open_box(g), ScalarField::constant(g, 1.0))
    }

    #[test]
    fn distance_on_square_matches_exact_in_side_regions() {
        let (m, one) = square(40);
        let sol = solve_eikonal(&m, &one, &one).unwrap();
        let g = m.grid();
        // away from the diagonals the scheme is exact
        assert!((sol.u.at(20, 3) - 3.0 * g.dy()).abs() < 1e-14);
        assert!((sol.u.at(5, 20) - 5.0 * g.dx()).abs() < 1e-14);
        assert!((sol.u.at(20, 20) - 0.5).abs() < 0.05);
        assert_eq!(sol.u.at(0, 7), 0.0);
        assert!(eikonal_residual(&m, &one, &one, &sol.u, &SolverOptions::default()) < 1e-12);
    }

    #[test]
    fn acceptance_order_is_monotone() {
        let (m, one) = square(30);
        let f = ScalarField::from_fn(*m.grid(), |x, y| 1.0 + 0.5 * (6.0 * x).sin() * y);
        let sol = solve_eikonal(&m, &f, &one).unwrap();
        assert_eq!(sol.order.len(), m.inside_count());
        let vals: Vec<f64> = sol.order.iter().map(|&k| sol.u.values()[k]).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn doubling_speed_halves_values() {
        let (m, one) = square(25);
        let two = one.scale(2.0);
        let a = solve_eikonal(&m, &one, &one).unwrap();
        let b = solve_eikonal(&m, &two, &one).unwrap();
        for k in m.inside_indices() {
            let (ua, ub) = (a.u.values()[k], b.u.values()[k]);
            assert!((ub - ua / 2.0).abs() <= 1e-12 * ua);
        }
    }

    #[test]
    fn obstacles_are_never_accepted() {
        let g = Grid2D::unit_square(20).unwrap();
        let m = DomainMask::open_box(g);
        let one = ScalarField::constant(g, 1.0);
        // a ring of zero speed around the center encloses the middle points
        let f = ScalarField::from_fn(g, |x, y| {
            let r = Point::new(x, y).dist(Point::new(0.5, 0.5));
            if (0.2..0.3).contains(&r) {
                0.0
            } else {
                1.0
            }
        });
        let sol = solve_eikonal(&m, &f, &one).unwrap();
        assert!(sol.u.at(10, 10).is_infinite());
        assert!(sol.u.at(2, 2).is_finite());
        let all_blocked = ScalarField::constant(g, 0.0);
        let sol = solve_eikonal(&m, &all_blocked, &one).unwrap();
        assert!(m.inside_indices().all(|k| sol.u.values()[k].is_infinite()));
        assert!(sol.order.is_empty());
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let (m, _) = square(10);
        let other = ScalarField::constant(Grid2D::unit_square(11).unwrap(), 1.0);
        assert!(matches!(solve_eikonal(&m, &other, &other), Err(Error::GridMismatch)));
    }
}
