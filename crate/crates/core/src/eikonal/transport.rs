//! Linear transport along the characteristics of an Eikonal solution:
//! `𝒟U·𝒟v₁ = ψ·K^λ/f²` and `𝒟U·𝒟v₂ = K·K^λ/f²`, with `v = 0` outside Ω.

use super::{check_inputs, EikonalSolution, UpwindStencil};
use crate::error::{Error, Result};
use crate::grid::{DomainMask, ScalarField};

/// Solves both transport equations in the acceptance order of `eik`.
///
/// Each equation is linear in the unknown at the point: with upwind weights
/// `w = (U − U_n)/h²` per used axis, `v = (rhs + Σ w·v_n) / Σ w`. Neighbors with
/// `w = 0` (exact ties) drop out.
pub fn solve_transport_pair(
    mask: &DomainMask,
    eik: &EikonalSolution,
    speed: &ScalarField,
    psi: &ScalarField,
    cost: &ScalarField,
    cost_lambda: &ScalarField,
) -> Result<(ScalarField, ScalarField)> {
    check_inputs(mask, &[&eik.u, speed, psi, cost, cost_lambda])?;
    let grid = *mask.grid();
    let u = eik.u.values();
    let (f, p, k, kl) = (
        speed.values(),
        psi.values(),
        cost.values(),
        cost_lambda.values(),
    );
    let (dx2, dy2) = (grid.dx() * grid.dx(), grid.dy() * grid.dy());
    let mut v1 = vec![0.0; grid.len()];
    let mut v2 = vec![0.0; grid.len()];
    for k_idx in mask.inside_indices() {
        if !u[k_idx].is_finite() {
            v1[k_idx] = f64::INFINITY;
            v2[k_idx] = f64::INFINITY;
        }
    }

    for &idx in &eik.order {
        let st = UpwindStencil::at(&grid, u, idx);
        let mut wsum = 0.0;
        let (mut s1, mut s2) = (0.0, 0.0);
        for (nb, h2) in [(st.x_neighbor(&grid, idx), dx2), (st.y_neighbor(&grid, idx), dy2)] {
            if let Some(n) = nb {
                let w = (u[idx] - u[n]) / h2;
                if w > 0.0 {
                    wsum += w;
                    s1 += w * v1[n];
                    s2 += w * v2[n];
                }
            }
        }
        if wsum <= 0.0 {
            let (i, j) = grid.coords(idx);
            return Err(Error::DegenerateStencil { i, j });
        }
        let scale = kl[idx] / (f[idx] * f[idx]);
        v1[idx] = (p[idx] * scale + s1) / wsum;
        v2[idx] = (k[idx] * scale + s2) / wsum;
    }
    Ok((ScalarField::new(grid, v1)?, ScalarField::new(grid, v2)?))
}

/// Max residual of one transport equation with right-hand side `rhs`, scaled
/// by `max(1, |rhs|, Σ |u_i|·(|v| + |v_n|)/h_i)`. The last term is the size of
/// the operands of the difference quotients, so the result measures error in
/// units of rounding: where tiny speeds make `𝒟U` huge, `𝒟v` is a difference
/// of nearly equal values.
pub fn transport_residual(
    mask: &DomainMask,
    u: &ScalarField,
    v: &ScalarField,
    rhs: &ScalarField,
) -> f64 {
    let grid = mask.grid();
    let vals = v.values();
    let mut worst: f64 = 0.0;
    for k in mask.inside_indices() {
        if !u.values()[k].is_finite() {
            continue;
        }
        let st = UpwindStencil::at(grid, u.values(), k);
        let (ux, uy) = st.apply(grid, u.values(), k);
        let (vx, vy) = st.apply(grid, vals, k);
        let r = rhs.values()[k];
        let operand = |n: Option<usize>, du: f64, h: f64| {
            n.map_or(0.0, |n| du.abs() * (vals[k].abs() + vals[n].abs()) / h)
        };
        let ops = operand(st.x_neighbor(grid, k), ux, grid.dx()) + operand(st.y_neighbor(grid, k), uy, grid.dy());
        let scale = r.abs().max(ops).max(1.0);
        worst = worst.max((ux * vx + uy * vy - r).abs() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eikonal::solve_eikonal;
    use crate::grid::Grid2D;

    #[test]
    fn zero_psi_gives_zero_v1_and_v2_equals_u() {
        let g = Grid2D::unit_square(30).unwrap();
        let m = DomainMask::open_box(g);
        let one = ScalarField::constant(g, 1.0);
        let zero = ScalarField::constant(g, 0.0);
        let eik = solve_eikonal(&m, &one, &one).unwrap();
        let (v1, v2) = solve_transport_pair(&m, &eik, &one, &zero, &one, &one).unwrap();
        assert!(v1.values().iter().all(|&v| v == 0.0));
        assert!(v2.max_abs_diff(&eik.u, &m) < 1e-12);
    }

    #[test]
    fn convex_combination_reproduces_u() {
        let g = Grid2D::unit_square(30).unwrap();
        let m = DomainMask::open_box(g);
        let f = ScalarField::from_fn(g, |x, _| 1.0 + 0.5 * x);
        let psi = ScalarField::from_fn(g, |x, y| 3.0 * (-10.0 * ((x - 0.4).powi(2) + (y - 0.6).powi(2))).exp());
        let cost = ScalarField::constant(g, 1.0);
        let lam = 0.3;
        let kl = psi.zip_map(&cost, |p, c| lam * p + (1.0 - lam) * c).unwrap();
        let eik = solve_eikonal(&m, &f, &kl).unwrap();
        let (v1, v2) = solve_transport_pair(&m, &eik, &f, &psi, &cost, &kl).unwrap();
        let comb = v1.zip_map(&v2, |a, b| lam * a + (1.0 - lam) * b).unwrap();
        assert!(comb.max_abs_diff(&eik.u, &m) < 1e-12);
        let r1 = psi.zip_map(&kl, |p, k| p * k).unwrap().zip_map(&f, |a, s| a / (s * s)).unwrap();
        assert!(transport_residual(&m, &eik.u, &v1, &r1) < 1e-9);
    }
}
