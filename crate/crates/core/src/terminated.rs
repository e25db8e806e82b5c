//! Ground-patrol model: the randomly-terminated Eikonal equation
//! `f·|∇ū| = K + ψ·(b + R − ū)`, the sweep over loot values `b_m`, and the
//! per-point profit bracket built from neighboring `b_m`.

use rayon::prelude::*;

use crate::eikonal::{check_inputs, march, terminated_update, SolverOptions, TerminatedCoeffs, UpwindStencil};
use crate::error::{Error, Result};
use crate::grid::{sample_bilinear, DomainMask, Point, Problem, ScalarField};
use crate::multiobjective::check_inside;

#[derive(Debug, Clone)]
pub struct TerminatedSolution {
    pub b: f64,
    pub u_bar: ScalarField,
    pub order: Vec<usize>,
}

pub fn solve_terminated(problem: &Problem, r: &ScalarField, b: f64) -> Result<TerminatedSolution> {
    solve_terminated_with(problem, r, b, &SolverOptions::default())
}

pub fn solve_terminated_with(
    problem: &Problem,
    r: &ScalarField,
    b: f64,
    opts: &SolverOptions,
) -> Result<TerminatedSolution> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("loot value must be finite and >= 0, got {b}")));
    }
    let mask = &problem.mask;
    check_inputs(mask, &[&problem.speed, &problem.cost, &problem.psi, r])?;
    let grid = problem.grid;
    let (dx, dy) = (grid.dx(), grid.dy());
    let passable = opts.passable(mask, &problem.speed);
    let (f, k, psi, rv) = (
        problem.speed.values(),
        problem.cost.values(),
        problem.psi.values(),
        r.values(),
    );
    let marched = march(mask, &passable, |idx, ax, ay| {
        let coeffs = TerminatedCoeffs {
            speed: f[idx],
            cost: k[idx],
            psi: psi[idx],
            continuation: b + rv[idx],
        };
        terminated_update(ax, ay, &coeffs, dx, dy)
    });
    Ok(TerminatedSolution {
        b,
        u_bar: ScalarField::new(grid, marched.values)?,
        order: marched.order,
    })
}

/// Max over accepted points of `|f·|𝒟ū| − max(K + ψ(b + R − ū), 0)|`, scaled
/// by `max(1, K + ψ(|b + R| + |ū|))`, the size of the terms that cancel.
pub fn terminated_residual(problem: &Problem, r: &ScalarField, sol: &TerminatedSolution) -> f64 {
    let grid = &problem.grid;
    let u = sol.u_bar.values();
    let mut worst: f64 = 0.0;
    for &idx in &sol.order {
        let st = UpwindStencil::at(grid, u, idx);
        let (gx, gy) = st.apply(grid, u, idx);
        let lhs = problem.speed.values()[idx] * gx.hypot(gy);
        let coeffs = TerminatedCoeffs {
            speed: problem.speed.values()[idx],
            cost: problem.cost.values()[idx],
            psi: problem.psi.values()[idx],
            continuation: sol.b + r.values()[idx],
        };
        let scale = (coeffs.cost + coeffs.psi * (coeffs.continuation.abs() + u[idx].abs())).max(1.0);
        worst = worst.max((lhs - coeffs.effective_cost(u[idx]).max(0.0)).abs() / scale);
    }
    worst
}

/// Uniform loot grid over the inside range of `B`; a single value when `B` is constant.
pub fn b_grid(problem: &Problem, n_b: usize) -> Result<Vec<f64>> {
    if n_b == 0 {
        return Err(Error::InvalidParameter("need at least one b step".into()));
    }
    let (lo, hi) = problem.benefit.inside_range(&problem.mask);
    if lo == hi {
        return Ok(vec![lo]);
    }
    Ok((0..=n_b).map(|m| lo + m as f64 * (hi - lo) / n_b as f64).collect())
}

pub fn run_b_sweep(problem: &Problem, r: &ScalarField, n_b: usize) -> Result<Vec<TerminatedSolution>> {
    b_grid(problem, n_b)?
        .par_iter()
        .enumerate()
        .map(|(m, &b)| solve_terminated(problem, r, b).map_err(|e| e.at_index(m)))
        .collect()
}

/// Lower and upper bounds on the ground-patrol profit from the two loot
/// values that bracket `B` at each point.
#[derive(Debug, Clone)]
pub struct ProfitBracketG {
    /// `B − Ū^{m+1} − R`, using the larger bracketing loot value.
    pub p_g_minus: ScalarField,
    /// `B − Ū^m − R`, using the smaller bracketing loot value.
    pub p_g_plus: ScalarField,
    pub n_b: usize,
    pub b_min: f64,
    pub b_max: f64,
}

impl ProfitBracketG {
    pub fn midpoint(&self) -> ScalarField {
        self.p_g_minus
            .zip_map(&self.p_g_plus, |a, b| if a == b { a } else { 0.5 * (a + b) })
            .expect("same grid")
    }

    /// Points where the bracket straddles `p̃`, i.e. where the sign of
    /// `P − p̃` is undecided at this b resolution.
    pub fn uncertain_set(&self, mask: &DomainMask, p_tilde: f64) -> Vec<bool> {
        let (lo, hi) = (self.p_g_minus.values(), self.p_g_plus.values());
        (0..lo.len())
            .map(|k| mask.is_inside(k) && lo[k] <= p_tilde && p_tilde <= hi[k])
            .collect()
    }

    /// Points that stay pristine under the upper bound.
    pub fn conservative_pristine(&self, mask: &DomainMask, p_tilde: f64) -> Vec<bool> {
        let hi = self.p_g_plus.values();
        (0..hi.len()).map(|k| mask.is_inside(k) && hi[k] <= p_tilde).collect()
    }
}

/// Bracket index `m` with `B ∈ (b_m, b_{m+1}]`; `B = b_0` maps to `m = 0`.
fn bracket_index(grid_b: &[f64], b: f64) -> Result<usize> {
    let n = grid_b.len() - 1;
    let (lo, hi) = (grid_b[0], grid_b[n]);
    if b < lo || b > hi {
        return Err(Error::InvalidParameter(format!(
            "benefit {b} outside loot grid [{lo}, {hi}]"
        )));
    }
    // first m with b <= b_{m+1}
    let m = grid_b[1..].partition_point(|&bm| bm < b);
    Ok(m.min(n - 1))
}

/// Streaming fold of the loot sweep into the bracket; solutions must arrive
/// in increasing `m`.
struct BracketAccumulator<'a> {
    benefit: &'a [f64],
    r: &'a [f64],
    mask: &'a DomainMask,
    bracket: Vec<usize>,
    minus: Vec<f64>,
    plus: Vec<f64>,
    prev: Option<Vec<f64>>,
    next_m: usize,
}

impl<'a> BracketAccumulator<'a> {
    fn new(problem: &'a Problem, r: &'a ScalarField, grid_b: &[f64]) -> Result<Self> {
        let benefit = problem.benefit.values();
        let mut bracket = vec![usize::MAX; benefit.len()];
        for k in problem.mask.inside_indices() {
            bracket[k] = bracket_index(grid_b, benefit[k])?;
        }
        // outside Ω the value functions vanish, so both bounds are B − R
        let outside: Vec<f64> = (0..benefit.len()).map(|k| benefit[k] - r.values()[k]).collect();
        Ok(BracketAccumulator {
            benefit,
            r: r.values(),
            mask: &problem.mask,
            bracket,
            minus: outside.clone(),
            plus: outside,
            prev: None,
            next_m: 0,
        })
    }

    fn push(&mut self, u: &ScalarField) {
        let m = self.next_m;
        self.next_m += 1;
        let u = u.values();
        if let Some(prev) = &self.prev {
            for k in self.mask.inside_indices() {
                if self.bracket[k] + 1 == m {
                    self.plus[k] = self.benefit[k] - prev[k] - self.r[k];
                    self.minus[k] = self.benefit[k] - u[k] - self.r[k];
                }
            }
        }
        self.prev = Some(u.to_vec());
    }
}

/// Bracket from a stored sweep.
pub fn profit_bracket_g(
    problem: &Problem,
    sweep: &[TerminatedSolution],
    r: &ScalarField,
) -> Result<ProfitBracketG> {
    let grid_b: Vec<f64> = sweep.iter().map(|s| s.b).collect();
    if grid_b.is_empty() || grid_b.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("loot sweep must be nonempty and increasing".into()));
    }
    let n_b = grid_b.len() - 1;
    if n_b == 0 {
        return collapsed(problem, &sweep[0].u_bar, r);
    }
    let mut acc = BracketAccumulator::new(problem, r, &grid_b)?;
    for s in sweep {
        acc.push(&s.u_bar);
    }
    Ok(ProfitBracketG {
        p_g_minus: ScalarField::new(problem.grid, acc.minus)?,
        p_g_plus: ScalarField::new(problem.grid, acc.plus)?,
        n_b,
        b_min: grid_b[0],
        b_max: grid_b[n_b],
    })
}

fn collapsed(problem: &Problem, u: &ScalarField, r: &ScalarField) -> Result<ProfitBracketG> {
    let b = problem.benefit.values();
    let vals: Vec<f64> = (0..b.len())
        .map(|k| b[k] - u.values()[k] - r.values()[k])
        .collect();
    let (lo, hi) = problem.benefit.inside_range(&problem.mask);
    let p = ScalarField::new(problem.grid, vals)?;
    Ok(ProfitBracketG {
        p_g_minus: p.clone(),
        p_g_plus: p,
        n_b: 0,
        b_min: lo,
        b_max: hi,
    })
}

/// Runs the loot sweep without keeping every solution: solves run in
/// parallel batches and are folded in `m` order.
pub fn solve_model_g(problem: &Problem, r: &ScalarField, n_b: usize) -> Result<ProfitBracketG> {
    let grid_b = b_grid(problem, n_b)?;
    if grid_b.len() == 1 {
        let u = solve_terminated(problem, r, grid_b[0])?;
        return collapsed(problem, &u.u_bar, r);
    }
    let mut acc = BracketAccumulator::new(problem, r, &grid_b)?;
    let batch = rayon::current_num_threads().max(1);
    for (c, chunk) in grid_b.chunks(batch).enumerate() {
        let solved = chunk
            .par_iter()
            .enumerate()
            .map(|(off, &b)| solve_terminated(problem, r, b).map_err(|e| e.at_index(c * batch + off)))
            .collect::<Result<Vec<_>>>()?;
        for s in solved {
            acc.push(&s.u_bar);
        }
    }
    Ok(ProfitBracketG {
        p_g_minus: ScalarField::new(problem.grid, acc.minus)?,
        p_g_plus: ScalarField::new(problem.grid, acc.plus)?,
        n_b,
        b_min: grid_b[0],
        b_max: grid_b[n_b],
    })
}

/// Ground-patrol profit at one site, solved with the exact local benefit.
pub fn profit_g_at(problem: &Problem, r: &ScalarField, x0: Point) -> Result<f64> {
    check_inside(&problem.mask, x0)?;
    let b = sample_bilinear(&problem.benefit, x0)?;
    let sol = solve_terminated(problem, r, b)?;
    Ok(b - sample_bilinear(&sol.u_bar, x0)? - sample_bilinear(r, x0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eikonal::solve_eikonal;
    use crate::grid::Grid2D;
    use crate::multiobjective::compute_r;

    fn problem(n: usize, psi: impl Fn(f64, f64) -> f64, b: impl Fn(f64, f64) -> f64) -> Problem {
        let g = Grid2D::unit_square(n).unwrap();
        let one = ScalarField::constant(g, 1.0);
        Problem::new(
            DomainMask::open_box(g),
            ScalarField::from_fn(g, b),
            ScalarField::from_fn(g, psi),
            one.clone(),
            one,
            0.0,
        )
        .unwrap()
    }

    fn station(x: f64, y: f64) -> f64 {
        4.0 * (-30.0 * ((x - 0.5).powi(2) + (y - 0.3).powi(2))).exp()
    }

    #[test]
    fn no_detection_reduces_to_eikonal() {
        let p = problem(30, |_, _| 0.0, |_, _| 1.0);
        let r = compute_r(&p).unwrap();
        let uk = solve_eikonal(&p.mask, &p.speed, &p.cost).unwrap().u;
        for b in [0.0, 3.0] {
            let s = solve_terminated(&p, &r, b).unwrap();
            assert_eq!(s.u_bar, uk);
        }
        assert!(solve_terminated(&p, &r, -1.0).is_err());
    }

    #[test]
    fn residual_and_bounds() {
        let p = problem(40, station, |x, _| 1.0 + x);
        let r = compute_r(&p).unwrap();
        let s = solve_terminated(&p, &r, 1.5).unwrap();
        assert!(terminated_residual(&p, &r, &s) < 1e-9);
        assert_eq!(s.order.len(), p.mask.inside_count());
        for k in p.mask.inside_indices() {
            let u = s.u_bar.values()[k];
            assert!(u >= 0.0 && u <= 1.5 + r.values()[k] + 1e-9);
        }
    }

    #[test]
    fn loot_grid_shapes() {
        let p = problem(10, |_, _| 1.0, |_, _| 2.0);
        assert_eq!(b_grid(&p, 5).unwrap(), vec![2.0]);
        let p = problem(10, |_, _| 1.0, |x, _| x);
        let g = b_grid(&p, 1).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g[0] > 0.0 && g[1] < 1.0);
        assert!(b_grid(&p, 0).is_err());
    }

    #[test]
    fn bracket_index_convention() {
        let g = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(bracket_index(&g, 0.0).unwrap(), 0);
        assert_eq!(bracket_index(&g, 1.0).unwrap(), 0);
        assert_eq!(bracket_index(&g, 1.0001).unwrap(), 1);
        assert_eq!(bracket_index(&g, 3.0).unwrap(), 2);
        assert!(bracket_index(&g, 3.5).is_err());
    }

    #[test]
    fn values_grow_with_loot() {
        let p = problem(30, station, |x, y| 1.0 + x * y);
        let r = compute_r(&p).unwrap();
        let sweep = run_b_sweep(&p, &r, 4).unwrap();
        for w in sweep.windows(2) {
            for k in p.mask.inside_indices() {
                assert!(w[1].u_bar.values()[k] >= w[0].u_bar.values()[k]);
            }
        }
    }

    #[test]
    fn bracket_is_ordered_and_narrow() {
        let p = problem(30, station, |x, y| 1.0 + 2.0 * x * y);
        let r = compute_r(&p).unwrap();
        let n_b = 5;
        let sweep = run_b_sweep(&p, &r, n_b).unwrap();
        let br = profit_bracket_g(&p, &sweep, &r).unwrap();
        let width = (br.b_max - br.b_min) / n_b as f64;
        for k in p.mask.inside_indices() {
            let (lo, hi) = (br.p_g_minus.values()[k], br.p_g_plus.values()[k]);
            assert!(lo <= hi && hi - lo <= width + 1e-12);
        }
        let streamed = solve_model_g(&p, &r, n_b).unwrap();
        assert_eq!(streamed.p_g_minus, br.p_g_minus);
        assert_eq!(streamed.p_g_plus, br.p_g_plus);
        // the exact-loot value at a site sits inside the bracket
        let x0 = Point::new(0.4, 0.6);
        let exact = profit_g_at(&p, &r, x0).unwrap();
        let k = p.grid.index(12, 18);
        assert!(br.p_g_minus.values()[k] <= exact + 1e-12 && exact <= br.p_g_plus.values()[k] + 1e-12);
    }

    #[test]
    fn constant_benefit_collapses_bracket() {
        let p = problem(20, station, |_, _| 2.0);
        let r = compute_r(&p).unwrap();
        let br = solve_model_g(&p, &r, 7).unwrap();
        assert_eq!(br.p_g_minus, br.p_g_plus);
        assert_eq!(br.midpoint(), br.p_g_plus);
    }
}
