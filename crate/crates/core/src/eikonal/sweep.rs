//! Gauss-Seidel sweeping in the four diagonal orderings. Solves the same
//! discrete system as the marcher, without a priority queue; used as a check.

use super::{check_inputs, point_update, EikonalSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::grid::{DomainMask, ScalarField};

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Stop once a full sweep changes no value by more than this.
    pub tol: f64,
    pub max_sweeps: usize,
    pub solver: SolverOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            tol: 1e-14,
            max_sweeps: 4000,
            solver: SolverOptions::default(),
        }
    }
}

pub fn solve_eikonal_sweeping(
    mask: &DomainMask,
    speed: &ScalarField,
    rhs: &ScalarField,
    opts: &SweepOptions,
) -> Result<EikonalSolution> {
    check_inputs(mask, &[speed, rhs])?;
    let grid = *mask.grid();
    let (dx, dy) = (grid.dx(), grid.dy());
    let passable = opts.solver.passable(mask, speed);
    let f = speed.values();
    let r = rhs.values();
    let mut u: Vec<f64> = (0..grid.len())
        .map(|k| if mask.is_inside(k) { f64::INFINITY } else { 0.0 })
        .collect();

    let (cols, rows) = (grid.cols(), grid.rows());
    let orderings: [(bool, bool); 4] = [(false, false), (true, false), (true, true), (false, true)];
    let mut last_change = f64::INFINITY;
    for sweep in 0..opts.max_sweeps {
        let (rev_i, rev_j) = orderings[sweep % 4];
        let mut change: f64 = 0.0;
        for jj in 0..rows {
            let j = if rev_j { rows - 1 - jj } else { jj };
            for ii in 0..cols {
                let i = if rev_i { cols - 1 - ii } else { ii };
                let k = grid.index(i, j);
                if !passable[k] {
                    continue;
                }
                let axis_min = |(b, f): (Option<usize>, Option<usize>)| {
                    [b, f]
                        .into_iter()
                        .flatten()
                        .map(|n| u[n])
                        .fold(f64::INFINITY, f64::min)
                };
                let ax = axis_min(grid.x_neighbors(k));
                let ay = axis_min(grid.y_neighbors(k));
                let cand = point_update(ax, ay, f[k], r[k].max(opts.solver.rhs_floor), dx, dy);
                if cand < u[k] {
                    let delta = if u[k].is_finite() { u[k] - cand } else { f64::INFINITY };
                    change = change.max(delta);
                    u[k] = cand;
                }
            }
        }
        last_change = change;
        if change <= opts.tol {
            let mut order: Vec<usize> = mask
                .inside_indices()
                .filter(|&k| u[k].is_finite())
                .collect();
            order.sort_by(|&a, &b| u[a].total_cmp(&u[b]).then(a.cmp(&b)));
            return Ok(EikonalSolution {
                u: ScalarField::new(grid, u)?,
                order,
            });
        }
    }
    Err(Error::NoConvergence {
        sweeps: opts.max_sweeps,
        last_change,
    })
}
