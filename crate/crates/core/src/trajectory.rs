//! Path extraction by gradient descent on a value field, and line integrals
//! of `ψ` and `K` along the extracted paths.

use crate::error::{Error, Result};
use crate::grid::{sample_bilinear, DomainMask, Point, ScalarField};
use crate::terminated::TerminatedSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedBoundary,
    /// No descent step could lower the sampled value: a plateau, an obstacle,
    /// or the edge of the grid box.
    Stalled,
    StepCap,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::ReachedBoundary => "boundary",
            Termination::Stalled => "stalled",
            Termination::StepCap => "step-cap",
        }
    }
}

/// A traced polyline with cumulative time and cumulative `∫ψ`, `∫K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<Point>,
    pub times: Vec<f64>,
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
    pub termination: Termination,
}

impl Trajectory {
    fn empty() -> Self {
        Trajectory {
            points: Vec::new(),
            times: Vec::new(),
            j1: Vec::new(),
            j2: Vec::new(),
            termination: Termination::ReachedBoundary,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    pub fn end(&self) -> Option<Point> {
        self.points.last().copied()
    }

    /// Fills the cumulative `J₁`, `J₂` columns.
    pub fn with_functionals(mut self, psi: &ScalarField, cost: &ScalarField) -> Result<Self> {
        let n = self.points.len();
        let (mut j1, mut j2) = (vec![0.0; n], vec![0.0; n]);
        for s in 1..n {
            let mid = midpoint(self.points[s - 1], self.points[s]);
            let dt = self.times[s] - self.times[s - 1];
            j1[s] = j1[s - 1] + sample_bilinear(psi, mid)? * dt;
            j2[s] = j2[s - 1] + sample_bilinear(cost, mid)? * dt;
        }
        self.j1 = j1;
        self.j2 = j2;
        Ok(self)
    }
}

/// `(J₁, J₂, e^{−J₁})` of a whole path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathFunctionals {
    pub j1: f64,
    pub j2: f64,
    pub survival: f64,
}

impl PathFunctionals {
    pub fn payoff(&self, benefit: f64) -> f64 {
        benefit * self.survival - self.j2
    }
}

fn midpoint(a: Point, b: Point) -> Point {
    Point::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
}

/// Midpoint-rule integrals of `ψ` and `K` in time along `traj`.
pub fn path_functionals(traj: &Trajectory, psi: &ScalarField, cost: &ScalarField) -> Result<PathFunctionals> {
    let (mut j1, mut j2) = (0.0, 0.0);
    for s in 1..traj.points.len() {
        let mid = midpoint(traj.points[s - 1], traj.points[s]);
        let dt = traj.times[s] - traj.times[s - 1];
        j1 += sample_bilinear(psi, mid)? * dt;
        j2 += sample_bilinear(cost, mid)? * dt;
    }
    Ok(PathFunctionals {
        j1,
        j2,
        survival: (-j1).exp(),
    })
}

/// Nodal gradient by central differences, one-sided next to infinite values.
fn nodal_gradient(u: &ScalarField, idx: usize) -> Option<(f64, f64)> {
    let g = u.grid();
    let v = u.values();
    if !v[idx].is_finite() {
        return None;
    }
    let diff = |(b, f): (Option<usize>, Option<usize>), h: f64| {
        let b = b.map(|n| v[n]).filter(|x| x.is_finite());
        let f = f.map(|n| v[n]).filter(|x| x.is_finite());
        match (b, f) {
            (Some(b), Some(f)) => (f - b) / (2.0 * h),
            (Some(b), None) => (v[idx] - b) / h,
            (None, Some(f)) => (f - v[idx]) / h,
            (None, None) => 0.0,
        }
    };
    Some((diff(g.x_neighbors(idx), g.dx()), diff(g.y_neighbors(idx), g.dy())))
}

/// Bilinear interpolation of nodal gradients, renormalized over finite corners.
fn gradient_at(u: &ScalarField, p: Point) -> Option<(f64, f64)> {
    let g = u.grid();
    let fx = (p.x / g.dx()).clamp(0.0, g.nx() as f64);
    let fy = (p.y / g.dy()).clamp(0.0, g.ny() as f64);
    let i0 = (fx.floor() as usize).min(g.nx() - 1);
    let j0 = (fy.floor() as usize).min(g.ny() - 1);
    let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
    let (mut gx, mut gy, mut wsum) = (0.0, 0.0, 0.0);
    for (di, dj, w) in [
        (0, 0, (1.0 - tx) * (1.0 - ty)),
        (1, 0, tx * (1.0 - ty)),
        (0, 1, (1.0 - tx) * ty),
        (1, 1, tx * ty),
    ] {
        if w == 0.0 {
            continue;
        }
        if let Some((a, b)) = nodal_gradient(u, g.index(i0 + di, j0 + dj)) {
            gx += w * a;
            gy += w * b;
            wsum += w;
        }
    }
    (wsum > 0.0).then(|| (gx / wsum, gy / wsum))
}

const GRAD_MIN: f64 = 1e-12;
const MAX_HALVINGS: usize = 4;

/// Explicit Euler descent along `−∇u/|∇u|` with spatial step
/// `step_factor·min(dx, dy)` and time step `step/f` at the segment midpoint.
///
/// Stops when the containing cell touches an outside gridpoint, when the
/// gradient vanishes, when no (possibly halved) step lowers `u`, or after
/// `10·(Nx+Ny)/step_factor` steps. `J₁`, `J₂` are left at zero; see
/// [`Trajectory::with_functionals`].
pub fn trace_descent(
    mask: &DomainMask,
    u: &ScalarField,
    speed: &ScalarField,
    x0: Point,
    step_factor: f64,
) -> Result<Trajectory> {
    if !(step_factor > 0.0 && step_factor <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "step factor must lie in (0, 1], got {step_factor}"
        )));
    }
    let g = *mask.grid();
    if u.grid() != &g || speed.grid() != &g {
        return Err(Error::GridMismatch);
    }
    if !g.contains(x0) {
        return Err(Error::OutOfBounds { x: x0.x, y: x0.y });
    }
    let mut u_cur = sample_bilinear(u, x0)?;
    if !u_cur.is_finite() {
        return Err(Error::Unreachable { x: x0.x, y: x0.y });
    }
    let h = step_factor * g.dx().min(g.dy());
    let cap = (10.0 * (g.nx() + g.ny()) as f64 / step_factor).ceil() as usize;
    let mut traj = Trajectory {
        points: vec![x0],
        times: vec![0.0],
        j1: vec![0.0],
        j2: vec![0.0],
        termination: Termination::StepCap,
    };
    let mut p = x0;
    for _ in 0..cap {
        if mask.near_boundary(p) {
            traj.termination = Termination::ReachedBoundary;
            return Ok(traj);
        }
        let Some((gx, gy)) = gradient_at(u, p) else {
            traj.termination = Termination::Stalled;
            return Ok(traj);
        };
        let norm = gx.hypot(gy);
        if norm < GRAD_MIN {
            traj.termination = Termination::Stalled;
            return Ok(traj);
        }
        let (ex, ey) = (-gx / norm, -gy / norm);
        let mut step = h;
        let mut next = None;
        for _ in 0..=MAX_HALVINGS {
            let q = Point::new(p.x + step * ex, p.y + step * ey);
            if g.contains(q) {
                let uq = sample_bilinear(u, q)?;
                if uq < u_cur {
                    next = Some((q, uq, step));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((q, uq, step)) = next else {
            traj.termination = Termination::Stalled;
            return Ok(traj);
        };
        let f_mid = sample_bilinear(speed, midpoint(p, q))?;
        if !(f_mid > 0.0 && f_mid.is_finite()) {
            traj.termination = Termination::Stalled;
            return Ok(traj);
        }
        let t = traj.total_time() + step / f_mid;
        traj.points.push(q);
        traj.times.push(t);
        traj.j1.push(0.0);
        traj.j2.push(0.0);
        p = q;
        u_cur = uq;
    }
    if mask.near_boundary(p) {
        traj.termination = Termination::ReachedBoundary;
    }
    Ok(traj)
}

/// Ground-patrol paths: the pre-detection path descends `ū`; after a
/// detection the perpetrator follows the cheapest exit, descending `u_K`.
/// A detection point outside Ω gives an empty path.
pub fn model_g_paths(
    mask: &DomainMask,
    speed: &ScalarField,
    terminated: &TerminatedSolution,
    u_k: &ScalarField,
    x0: Point,
    detection_points: &[Point],
    step_factor: f64,
) -> Result<(Trajectory, Vec<Trajectory>)> {
    let pre = trace_descent(mask, &terminated.u_bar, speed, x0, step_factor)?;
    let g = mask.grid();
    let post = detection_points
        .iter()
        .map(|&d| {
            if !g.contains(d) || !mask.is_inside(g.nearest(d)) {
                Ok(Trajectory::empty())
            } else {
                trace_descent(mask, u_k, speed, d, step_factor)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((pre, post))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eikonal::solve_eikonal;
    use crate::grid::Grid2D;

    fn distance(n: usize) -> (DomainMask, ScalarField, ScalarField) {
        let g = Grid2D::unit_square(n).unwrap();
        let m = DomainMask::open_box(g);
        let one = ScalarField::constant(g, 1.0);
        let u = solve_eikonal(&m, &one, &one).unwrap().u;
        (m, u, one)
    }

    #[test]
    fn straight_descent_to_nearest_side() {
        let (m, u, one) = distance(100);
        let h = m.grid().dx();
        let t = trace_descent(&m, &u, &one, Point::new(0.5, 0.25), 0.5).unwrap();
        assert_eq!(t.termination, Termination::ReachedBoundary);
        let end = t.end().unwrap();
        assert!((end.x - 0.5).abs() < 1e-9);
        assert!(end.y < 2.0 * h);
        assert!((t.length() - 0.25).abs() < 2.0 * h);
        assert!((t.total_time() - t.length()).abs() < 1e-12);
        let vals: Vec<f64> = t.points.iter().map(|&p| sample_bilinear(&u, p).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn start_in_boundary_layer_gives_single_vertex() {
        let (m, u, one) = distance(50);
        let t = trace_descent(&m, &u, &one, Point::new(0.01, 0.5), 0.5).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.total_time(), 0.0);
        assert_eq!(t.termination, Termination::ReachedBoundary);
    }

    #[test]
    fn bad_inputs() {
        let (m, u, one) = distance(20);
        assert!(trace_descent(&m, &u, &one, Point::new(0.5, 0.5), 0.0).is_err());
        assert!(trace_descent(&m, &u, &one, Point::new(1.5, 0.5), 0.5).is_err());
        let inf = ScalarField::constant(*m.grid(), f64::INFINITY);
        assert!(matches!(
            trace_descent(&m, &inf, &one, Point::new(0.5, 0.5), 0.5),
            Err(Error::Unreachable { .. })
        ));
    }

    #[test]
    fn functionals_of_constant_fields() {
        let (m, u, one) = distance(80);
        let t = trace_descent(&m, &u, &one, Point::new(0.3, 0.6), 0.5).unwrap();
        let zero = ScalarField::constant(*m.grid(), 0.0);
        let pf = path_functionals(&t, &zero, &one).unwrap();
        assert_eq!(pf.j1, 0.0);
        assert_eq!(pf.survival, 1.0);
        let c = one.scale(3.0);
        let pf = path_functionals(&t, &c, &one).unwrap();
        assert!((pf.j1 - 3.0 * t.total_time()).abs() < 1e-12);
        assert!((pf.survival - (-3.0 * t.total_time()).exp()).abs() < 1e-12);
        let t = t.with_functionals(&c, &one).unwrap();
        assert!((t.j1.last().unwrap() - pf.j1).abs() < 1e-12);
        assert!(t.j1.windows(2).all(|w| w[1] >= w[0]));
    }
}
