//! Uniform Cartesian grid geometry, gridpoint fields, the domain mask, and the
//! scenario container shared by every solver.
//!
//! Gridpoint `(i, j)` sits at `(i·dx, j·dy)` for `i = 0..=nx`, `j = 0..=ny`.
//! Fields are stored row-major with `j` as the slow index, so the flat index of
//! `(i, j)` is `j·(nx+1) + i`.

use crate::error::{Error, Result};

/// A planar position in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Grid geometry. `nx`, `ny` are cell counts; there are `(nx+1)·(ny+1)` gridpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    xmax: f64,
    ymax: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, xmax: f64, ymax: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 cells per axis, got {nx}x{ny}"
            )));
        }
        if !(xmax > 0.0 && xmax.is_finite() && ymax > 0.0 && ymax.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "extents must be positive and finite, got {xmax}x{ymax}"
            )));
        }
        if (nx + 1).checked_mul(ny + 1).is_none_or(|n| n > u32::MAX as usize) {
            return Err(Error::InvalidGrid("too many gridpoints".into()));
        }
        Ok(Grid2D { nx, ny, xmax, ymax })
    }

    /// Grid with the given spacings, so that `xmax = nx·dx`.
    pub fn with_spacing(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        Self::new(nx, ny, nx as f64 * dx, ny as f64 * dy)
    }

    /// The unit square split into `n×n` cells.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0, 1.0)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn xmax(&self) -> f64 {
        self.xmax
    }

    pub fn ymax(&self) -> f64 {
        self.ymax
    }

    pub fn dx(&self) -> f64 {
        self.xmax / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ymax / self.ny as f64
    }

    /// Gridpoints along x.
    pub fn cols(&self) -> usize {
        self.nx + 1
    }

    /// Gridpoints along y.
    pub fn rows(&self) -> usize {
        self.ny + 1
    }

    pub fn len(&self) -> usize {
        self.cols() * self.rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && j <= self.ny);
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % (self.nx + 1), idx / (self.nx + 1))
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }

    pub fn point(&self, idx: usize) -> Point {
        let (i, j) = self.coords(idx);
        Point::new(self.x(i), self.y(j))
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.xmax && p.y >= 0.0 && p.y <= self.ymax
    }

    /// Index of the gridpoint nearest to `p` (clamped to the box).
    pub fn nearest(&self, p: Point) -> usize {
        let i = (p.x / self.dx()).round().clamp(0.0, self.nx as f64) as usize;
        let j = (p.y / self.dy()).round().clamp(0.0, self.ny as f64) as usize;
        self.index(i, j)
    }

    /// Neighbors along x as `(backward, forward)`; `None` past the grid edge.
    #[inline]
    pub fn x_neighbors(&self, idx: usize) -> (Option<usize>, Option<usize>) {
        let i = idx % (self.nx + 1);
        (
            (i > 0).then(|| idx - 1),
            (i < self.nx).then(|| idx + 1),
        )
    }

    /// Neighbors along y as `(backward, forward)`; `None` past the grid edge.
    #[inline]
    pub fn y_neighbors(&self, idx: usize) -> (Option<usize>, Option<usize>) {
        let j = idx / (self.nx + 1);
        let stride = self.nx + 1;
        (
            (j > 0).then(|| idx - stride),
            (j < self.ny).then(|| idx + stride),
        )
    }

    /// All 4-connected neighbors of `idx`.
    pub fn neighbors4(&self, idx: usize) -> impl Iterator<Item = usize> {
        let (xb, xf) = self.x_neighbors(idx);
        let (yb, yf) = self.y_neighbors(idx);
        [xb, xf, yb, yf].into_iter().flatten()
    }
}

/// One double per gridpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldLength {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: Grid2D, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Evaluates `f(x, y)` at every gridpoint.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let p = grid.point(idx);
                f(p.x, p.y)
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.check_same_grid(other)?;
        Ok(ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map(|v| v * c)
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Minimum and maximum over the inside points of `mask`.
    pub fn inside_range(&self, mask: &DomainMask) -> (f64, f64) {
        mask.inside_indices()
            .map(|k| self.values[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Max-norm distance to `other` over the inside points of `mask`, treating
    /// matching infinities as equal.
    pub fn max_abs_diff(&self, other: &ScalarField, mask: &DomainMask) -> f64 {
        mask.inside_indices()
            .map(|k| {
                let (a, b) = (self.values[k], other.values[k]);
                if a == b {
                    0.0
                } else {
                    (a - b).abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Inside-Ω flag per gridpoint. Outside points carry the Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    grid: Grid2D,
    inside: Vec<bool>,
    n_inside: usize,
}

impl DomainMask {
    pub fn new(grid: Grid2D, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.len() {
            return Err(Error::FieldLength {
                expected: grid.len(),
                got: inside.len(),
            });
        }
        let n_inside = inside.iter().filter(|&&b| b).count();
        if n_inside == 0 {
            return Err(Error::InvalidMask("no inside gridpoints".into()));
        }
        if n_inside == inside.len() {
            return Err(Error::InvalidMask(
                "no outside gridpoints, the boundary would be empty".into(),
            ));
        }
        Ok(DomainMask {
            grid,
            inside,
            n_inside,
        })
    }

    /// Rasterizes a membership predicate at gridpoint centers.
    pub fn from_fn(grid: Grid2D, is_inside: impl Fn(f64, f64) -> bool) -> Result<Self> {
        let inside = (0..grid.len())
            .map(|idx| {
                let p = grid.point(idx);
                is_inside(p.x, p.y)
            })
            .collect();
        Self::new(grid, inside)
    }

    /// The open box `(0, xmax) × (0, ymax)`: every gridpoint except the outer ring.
    pub fn open_box(grid: Grid2D) -> Self {
        let inside = (0..grid.len())
            .map(|idx| {
                let (i, j) = grid.coords(idx);
                i > 0 && i < grid.nx() && j > 0 && j < grid.ny()
            })
            .collect();
        Self::new(grid, inside).expect("a grid with >= 2 cells per axis has an interior")
    }

    /// Open disk with the given center and radius.
    pub fn disk(grid: Grid2D, center: Point, radius: f64) -> Result<Self> {
        Self::from_fn(grid, |x, y| (x - center.x).hypot(y - center.y) < radius)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.inside
    }

    pub fn inside_count(&self) -> usize {
        self.n_inside
    }

    pub fn inside_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.inside
            .iter()
            .enumerate()
            .filter_map(|(k, &b)| b.then_some(k))
    }

    /// Inside points with at least one outside 4-neighbor.
    pub fn is_boundary_layer(&self, idx: usize) -> bool {
        self.inside[idx] && self.grid.neighbors4(idx).any(|n| !self.inside[n])
    }

    /// Outside points adjacent to an inside point: the discrete ∂Ω.
    pub fn is_discrete_boundary(&self, idx: usize) -> bool {
        !self.inside[idx] && self.grid.neighbors4(idx).any(|n| self.inside[n])
    }

    /// Whether the cell containing `p` touches an outside gridpoint.
    pub fn near_boundary(&self, p: Point) -> bool {
        let g = &self.grid;
        let fi = (p.x / g.dx()).clamp(0.0, g.nx() as f64);
        let fj = (p.y / g.dy()).clamp(0.0, g.ny() as f64);
        let i0 = (fi.floor() as usize).min(g.nx() - 1);
        let j0 = (fj.floor() as usize).min(g.ny() - 1);
        [(0, 0), (1, 0), (0, 1), (1, 1)]
            .iter()
            .any(|&(di, dj)| !self.inside[g.index(i0 + di, j0 + dj)])
    }

    /// As a 0/1 field, for export.
    pub fn to_field(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.inside.iter().map(|&b| f64::from(u8::from(b))).collect(),
        }
    }
}

/// A complete scenario: geometry plus benefit, detection rate, speed, and travel cost.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid2D,
    pub mask: DomainMask,
    /// Benefit `B`.
    pub benefit: ScalarField,
    /// Detection rate `ψ`.
    pub psi: ScalarField,
    /// Speed `f`.
    pub speed: ScalarField,
    /// Running cost `K`.
    pub cost: ScalarField,
    /// Profit threshold below which a site stays pristine.
    pub p_tilde: f64,
    /// Set when `K ≡ κ` on the inside points.
    pub kappa: Option<f64>,
}

impl Problem {
    pub fn new(
        mask: DomainMask,
        benefit: ScalarField,
        psi: ScalarField,
        speed: ScalarField,
        cost: ScalarField,
        p_tilde: f64,
    ) -> Result<Self> {
        let grid = *mask.grid();
        for field in [&benefit, &psi, &speed, &cost] {
            if *field.grid() != grid {
                return Err(Error::GridMismatch);
            }
        }
        for k in mask.inside_indices() {
            let p = grid.point(k);
            let bad = |what: &str, v: f64| {
                Err(Error::Domain(format!(
                    "{what} = {v} at ({}, {}) violates the problem constraints",
                    p.x, p.y
                )))
            };
            if !(psi.values[k] >= 0.0 && psi.values[k].is_finite()) {
                return bad("psi", psi.values[k]);
            }
            if !(speed.values[k] >= 0.0 && speed.values[k].is_finite()) {
                return bad("f", speed.values[k]);
            }
            if !(cost.values[k] > 0.0 && cost.values[k].is_finite()) {
                return bad("K", cost.values[k]);
            }
            if !(benefit.values[k] >= 0.0 && benefit.values[k].is_finite()) {
                return bad("B", benefit.values[k]);
            }
        }
        let (kmin, kmax) = cost.inside_range(&mask);
        let kappa = (kmin == kmax).then_some(kmin);
        Ok(Problem {
            grid,
            mask,
            benefit,
            psi,
            speed,
            cost,
            p_tilde,
            kappa,
        })
    }

    /// Same problem with a different detection rate.
    pub fn with_psi(&self, psi: ScalarField) -> Result<Self> {
        Self::new(
            self.mask.clone(),
            self.benefit.clone(),
            psi,
            self.speed.clone(),
            self.cost.clone(),
            self.p_tilde,
        )
    }

    /// Whether `B` is constant on the inside points.
    pub fn constant_benefit(&self) -> Option<f64> {
        let (lo, hi) = self.benefit.inside_range(&self.mask);
        (lo == hi).then_some(lo)
    }
}

/// Rectangle-rule quadrature of `field^exponent` over the inside points.
pub fn integrate_field(field: &ScalarField, mask: &DomainMask, exponent: f64) -> Result<f64> {
    if field.grid() != mask.grid() {
        return Err(Error::GridMismatch);
    }
    if !(exponent >= 1.0 && exponent.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "exponent must be >= 1, got {exponent}"
        )));
    }
    let integer_exponent = exponent.fract() == 0.0;
    let cell = field.grid().dx() * field.grid().dy();
    let mut sum = 0.0;
    for k in mask.inside_indices() {
        let v = field.values[k];
        if v < 0.0 && !integer_exponent {
            return Err(Error::Domain(format!(
                "negative value {v} raised to non-integer power {exponent}"
            )));
        }
        sum += if exponent == 1.0 { v } else { v.powf(exponent) };
    }
    Ok(sum * cell)
}

/// Scales a nonnegative shape so that `∫_Ω ψ^γ = budget`.
pub fn normalize_budget(
    psi_shape: &ScalarField,
    mask: &DomainMask,
    budget: f64,
    gamma: f64,
) -> Result<ScalarField> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "budget must be positive, got {budget}"
        )));
    }
    if mask.inside_indices().any(|k| psi_shape.values[k] < 0.0) {
        return Err(Error::Domain("patrol shape must be nonnegative".into()));
    }
    let total = integrate_field(psi_shape, mask, gamma)?;
    if total <= 0.0 {
        return Err(Error::Domain(
            "patrol shape vanishes on the domain, no scaling meets the budget".into(),
        ));
    }
    let mu = (budget / total).powf(1.0 / gamma);
    Ok(psi_shape.scale(mu))
}

/// Bilinear interpolation of the four gridpoints around `p`.
///
/// Corners with zero weight are skipped, so querying exactly at a gridpoint
/// next to an infinite value still returns the finite node value.
pub fn sample_bilinear(field: &ScalarField, p: Point) -> Result<f64> {
    let g = field.grid();
    if !g.contains(p) || !p.x.is_finite() || !p.y.is_finite() {
        return Err(Error::OutOfBounds { x: p.x, y: p.y });
    }
    let fi = p.x / g.dx();
    let fj = p.y / g.dy();
    let i0 = (fi.floor() as usize).min(g.nx() - 1);
    let j0 = (fj.floor() as usize).min(g.ny() - 1);
    let tx = (fi - i0 as f64).clamp(0.0, 1.0);
    let ty = (fj - j0 as f64).clamp(0.0, 1.0);
    let corners = [
        ((1.0 - tx) * (1.0 - ty), field.at(i0, j0)),
        (tx * (1.0 - ty), field.at(i0 + 1, j0)),
        ((1.0 - tx) * ty, field.at(i0, j0 + 1)),
        (tx * ty, field.at(i0 + 1, j0 + 1)),
    ];
    Ok(corners
        .iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, v)| w * v)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> (Grid2D, DomainMask) {
        let g = Grid2D::unit_square(n).unwrap();
        (g, DomainMask::open_box(g))
    }

    #[test]
    fn grid_rejects_degenerate_sizes() {
        assert!(Grid2D::new(1, 5, 1.0, 1.0).is_err());
        assert!(Grid2D::new(5, 5, 0.0, 1.0).is_err());
        let g = Grid2D::new(4, 2, 2.0, 1.0).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.point(g.index(3, 1)), Point::new(1.5, 0.5));
    }

    #[test]
    fn mask_needs_inside_and_outside_points() {
        let g = Grid2D::unit_square(4).unwrap();
        assert!(DomainMask::new(g, vec![false; g.len()]).is_err());
        assert!(DomainMask::new(g, vec![true; g.len()]).is_err());
        let m = DomainMask::open_box(g);
        assert_eq!(m.inside_count(), 9);
        assert!(m.is_discrete_boundary(g.index(0, 2)));
        assert!(!m.is_discrete_boundary(g.index(0, 0)));
        assert!(m.is_boundary_layer(g.index(1, 2)));
    }

    #[test]
    fn constant_field_integrates_to_inside_area() {
        let (g, m) = unit(100);
        let one = ScalarField::constant(g, 1.0);
        let area = integrate_field(&one, &m, 1.0).unwrap();
        // 99² interior points of a 0.01-spaced grid
        assert!((area - 0.9801).abs() < 1e-12);
        assert!((area - 1.0).abs() < 4.0 * g.dx());
        let zero = ScalarField::constant(g, 0.0);
        assert_eq!(integrate_field(&zero, &m, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_values_with_fractional_exponent_fail() {
        let (g, m) = unit(4);
        let f = ScalarField::constant(g, -1.0);
        assert!(matches!(integrate_field(&f, &m, 1.5), Err(Error::Domain(_))));
        assert!(integrate_field(&f, &m, 2.0).is_ok());
        assert!(integrate_field(&f, &m, 0.5).is_err());
    }

    #[test]
    fn normalize_uniform_shapes() {
        let (g, m) = unit(50);
        let one = ScalarField::constant(g, 1.0);
        let area = integrate_field(&one, &m, 1.0).unwrap();
        let psi = normalize_budget(&one, &m, 2.0, 1.0).unwrap();
        assert!((psi.at(10, 10) - 2.0 / area).abs() < 1e-12);
        assert!((psi.at(10, 10) - 2.0).abs() < 0.1);
        let psi2 = normalize_budget(&one, &m, 4.0, 2.0).unwrap();
        assert!((psi2.at(10, 10) - (4.0 / area).sqrt()).abs() < 1e-12);
        assert!((psi2.at(10, 10) - 2.0).abs() < 0.1);
    }

    #[test]
    fn normalize_rejects_zero_shape() {
        let (g, m) = unit(10);
        let zero = ScalarField::constant(g, 0.0);
        assert!(normalize_budget(&zero, &m, 1.0, 1.0).is_err());
    }

    #[test]
    fn bilinear_reproduces_nodes_and_bilinear_functions() {
        let g = Grid2D::new(8, 5, 2.0, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| x + y + 3.0 * x * y);
        for (i, j) in [(0, 0), (3, 2), (8, 5)] {
            let v = sample_bilinear(&f, g.point(g.index(i, j))).unwrap();
            assert!((v - f.at(i, j)).abs() < 1e-14);
        }
        let c = Point::new(0.375, 0.3);
        let v = sample_bilinear(&f, c).unwrap();
        assert!((v - (0.375 + 0.3 + 3.0 * 0.375 * 0.3)).abs() < 1e-14);
        let k = ScalarField::constant(g, 7.25);
        assert_eq!(sample_bilinear(&k, Point::new(1.125, 0.5)).unwrap(), 7.25);
        assert!(sample_bilinear(&f, Point::new(2.1, 0.5)).is_err());
    }

    #[test]
    fn bilinear_ignores_infinite_zero_weight_corners() {
        let g = Grid2D::unit_square(4).unwrap();
        let mut f = ScalarField::constant(g, 1.0);
        f.values_mut()[g.index(2, 2)] = f64::INFINITY;
        assert_eq!(sample_bilinear(&f, Point::new(0.25, 0.25)).unwrap(), 1.0);
        assert!(sample_bilinear(&f, Point::new(0.4, 0.4)).unwrap().is_infinite());
    }
}
