use crate::grid::Grid2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
    None,
}

/// Per-axis choice of one-sided difference, always decided by the value
/// field `U` even when the operator is applied to another grid function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpwindStencil {
    pub x: Direction,
    pub y: Direction,
}

/// Forward if `D⁺U ≤ min(−D⁻U, 0)`, backward if `−D⁻U < min(D⁺U, 0)`, else none.
/// Missing neighbors past the grid edge count as `+∞`.
#[inline]
fn choose(u: f64, back: Option<f64>, fwd: Option<f64>) -> Direction {
    let ub = back.unwrap_or(f64::INFINITY);
    let uf = fwd.unwrap_or(f64::INFINITY);
    // Comparing neighbor values directly avoids forming ∞ − ∞.
    if uf <= ub.min(u) && uf.is_finite() {
        Direction::Forward
    } else if ub < uf.min(u) {
        Direction::Backward
    } else {
        Direction::None
    }
}

impl UpwindStencil {
    pub fn at(grid: &Grid2D, u: &[f64], idx: usize) -> Self {
        let (xb, xf) = grid.x_neighbors(idx);
        let (yb, yf) = grid.y_neighbors(idx);
        let v = |n: Option<usize>| n.map(|n| u[n]);
        UpwindStencil {
            x: choose(u[idx], v(xb), v(xf)),
            y: choose(u[idx], v(yb), v(yf)),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.x == Direction::None && self.y == Direction::None
    }

    /// Neighbor index used along x, if any.
    #[inline]
    pub fn x_neighbor(&self, grid: &Grid2D, idx: usize) -> Option<usize> {
        let (b, f) = grid.x_neighbors(idx);
        match self.x {
            Direction::Forward => f,
            Direction::Backward => b,
            Direction::None => None,
        }
    }

    /// Neighbor index used along y, if any.
    #[inline]
    pub fn y_neighbor(&self, grid: &Grid2D, idx: usize) -> Option<usize> {
        let (b, f) = grid.y_neighbors(idx);
        match self.y {
            Direction::Forward => f,
            Direction::Backward => b,
            Direction::None => None,
        }
    }

    /// `(𝒟ˣW, 𝒟ʸW)` at `idx`.
    pub fn apply(&self, grid: &Grid2D, w: &[f64], idx: usize) -> (f64, f64) {
        let d = |dir: Direction, n: Option<usize>, h: f64| match (dir, n) {
            (Direction::Forward, Some(n)) => (w[n] - w[idx]) / h,
            (Direction::Backward, Some(n)) => (w[idx] - w[n]) / h,
            _ => 0.0,
        };
        (
            d(self.x, self.x_neighbor(grid, idx), grid.dx()),
            d(self.y, self.y_neighbor(grid, idx), grid.dy()),
        )
    }
}
