use crate::error::{Error, Result};
use crate::grid::{DomainMask, Grid2D, ScalarField};

/// Default high-value tolerance `ε`.
pub const DEFAULT_EPSILON: f64 = 0.85;

#[derive(Debug, Clone, PartialEq)]
pub struct RegionStats {
    /// Inside points with `P ≤ p̃`.
    pub pristine: Vec<bool>,
    /// Pristine share of the inside gridpoints.
    pub a_p: f64,
    /// Pristine share of `Σ B` over the inside gridpoints.
    pub v_p: f64,
    /// Largest finite `P` inside.
    pub p_max: f64,
}

impl RegionStats {
    pub fn pristine_count(&self) -> usize {
        self.pristine.iter().filter(|&&b| b).count()
    }
}

/// Pristine statistics of a profit map. Unreachable points (`P = −∞`) are
/// pristine. With zero total benefit, `V_p` falls back to `A_p`.
pub fn region_stats(p: &ScalarField, benefit: &ScalarField, mask: &DomainMask, p_tilde: f64) -> Result<RegionStats> {
    if p.grid() != mask.grid() || benefit.grid() != mask.grid() {
        return Err(Error::GridMismatch);
    }
    region_stats_masked(p.values(), benefit.values(), mask.as_slice(), p_tilde)
}

/// [`region_stats`] over an arbitrary inside set, which need not leave any
/// point outside.
pub fn region_stats_masked(p: &[f64], benefit: &[f64], inside: &[bool], p_tilde: f64) -> Result<RegionStats> {
    if p.len() != inside.len() || benefit.len() != inside.len() {
        return Err(Error::GridMismatch);
    }
    let mut pristine = vec![false; p.len()];
    let (mut n_inside, mut count, mut b_in, mut b_all) = (0usize, 0usize, 0.0, 0.0);
    let mut p_max = f64::NEG_INFINITY;
    for k in (0..p.len()).filter(|&k| inside[k]) {
        n_inside += 1;
        b_all += benefit[k];
        if p[k].is_finite() {
            p_max = p_max.max(p[k]);
        }
        if p[k] <= p_tilde {
            pristine[k] = true;
            count += 1;
            b_in += benefit[k];
        }
    }
    if n_inside == 0 {
        return Err(Error::InvalidMask("no inside points".into()));
    }
    let a_p = count as f64 / n_inside as f64;
    let v_p = if b_all > 0.0 { b_in / b_all } else { a_p };
    Ok(RegionStats {
        pristine,
        a_p,
        v_p,
        p_max,
    })
}

/// Inside points whose gross payoff `Pᵃ + R` reaches `(1−ε)` of its maximum.
pub fn high_value_region(p_a: &ScalarField, r: &ScalarField, mask: &DomainMask, epsilon: f64) -> Result<Vec<bool>> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    if p_a.grid() != mask.grid() || r.grid() != mask.grid() {
        return Err(Error::GridMismatch);
    }
    let gross: Vec<f64> = p_a
        .values()
        .iter()
        .zip(r.values())
        .map(|(&p, &r)| if p.is_finite() && r.is_finite() { p + r } else { f64::NEG_INFINITY })
        .collect();
    let max = mask
        .inside_indices()
        .map(|k| gross[k])
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = (1.0 - epsilon) * max;
    Ok((0..gross.len())
        .map(|k| mask.is_inside(k) && gross[k].is_finite() && gross[k] >= threshold)
        .collect())
}

/// Points of `inner` that are neither in `outer` nor 8-adjacent to a point of `outer`.
pub fn outside_neighborhood(inner: &[bool], outer: &[bool], grid: &Grid2D) -> Vec<usize> {
    let (cols, rows) = (grid.cols() as isize, grid.rows() as isize);
    (0..inner.len())
        .filter(|&k| inner[k] && !outer[k])
        .filter(|&k| {
            let (i, j) = grid.coords(k);
            let near = (-1..=1).any(|dj: isize| {
                (-1..=1).any(|di: isize| {
                    let (ii, jj) = (i as isize + di, j as isize + dj);
                    ii >= 0 && jj >= 0 && ii < cols && jj < rows && outer[grid.index(ii as usize, jj as usize)]
                })
            });
            !near
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Grid2D, DomainMask) {
        let g = Grid2D::unit_square(10).unwrap();
        (g, DomainMask::open_box(g))
    }

    #[test]
    fn nothing_profitable_is_all_pristine() {
        let (g, m) = setup();
        let s = region_stats(&ScalarField::constant(g, -1.0), &ScalarField::constant(g, 2.0), &m, 0.0).unwrap();
        assert_eq!((s.a_p, s.v_p, s.p_max), (1.0, 1.0, -1.0));
        assert_eq!(s.pristine_count(), m.inside_count());
    }

    #[test]
    fn shares_and_threshold_monotonicity() {
        let (g, m) = setup();
        let p = ScalarField::from_fn(g, |x, _| x - 0.5);
        let b = ScalarField::from_fn(g, |_, y| 1.0 + y);
        let s0 = region_stats(&p, &b, &m, 0.0).unwrap();
        // x = 0.1..=0.5 of 0.1..=0.9
        assert!((s0.a_p - 5.0 / 9.0).abs() < 1e-15);
        assert!((s0.v_p - 5.0 / 9.0).abs() < 1e-15);
        assert!((s0.p_max - 0.4).abs() < 1e-15);
        let s1 = region_stats(&p, &b, &m, 0.25).unwrap();
        assert!(s0.pristine.iter().zip(&s1.pristine).all(|(&a, &b)| !a || b));
        let inf = ScalarField::constant(g, f64::NEG_INFINITY);
        assert_eq!(region_stats(&inf, &b, &m, 0.0).unwrap().a_p, 1.0);
    }

    #[test]
    fn high_value_thresholds() {
        let (g, m) = setup();
        let p = ScalarField::from_fn(g, |x, y| x + y);
        let r = ScalarField::constant(g, 0.0);
        let top = high_value_region(&p, &r, &m, 0.0).unwrap();
        assert_eq!(top.iter().filter(|&&b| b).count(), 1);
        let all = high_value_region(&p, &r, &m, 0.999).unwrap();
        assert_eq!(all.iter().filter(|&&b| b).count(), m.inside_count());
        assert!(high_value_region(&p, &r, &m, 1.0).is_err());
    }

    #[test]
    fn one_cell_neighborhood() {
        let (g, _) = setup();
        let mut inner = vec![false; g.len()];
        let mut outer = vec![false; g.len()];
        outer[g.index(5, 5)] = true;
        inner[g.index(6, 6)] = true;
        assert!(outside_neighborhood(&inner, &outer, &g).is_empty());
        inner[g.index(7, 5)] = true;
        assert_eq!(outside_neighborhood(&inner, &outer, &g), vec![g.index(7, 5)]);
    }
}
