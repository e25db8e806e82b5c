//! One-point upwind updates.
//!
//! Both updates take, per axis, the smallest already-known neighbor value
//! (`+∞` when the axis has none) and return the new value at the point.

/// Update for `f·|∇u| = rhs`.
///
/// Returns the larger root of the two-sided quadratic when it is upwind
/// consistent (not below either contributing neighbor); otherwise the
/// one-sided update from the smaller neighbor.
pub fn point_update(ax: f64, ay: f64, f: f64, rhs: f64, dx: f64, dy: f64) -> f64 {
    let c = rhs / f;
    let one_x = ax + dx * c;
    let one_y = ay + dy * c;
    if ax.is_finite() && ay.is_finite() {
        let p = 1.0 / (dx * dx);
        let q = 1.0 / (dy * dy);
        let diff = ax - ay;
        let disc = (p + q) * c * c - p * q * diff * diff;
        if disc >= 0.0 {
            let u = (p * ax + q * ay + disc.sqrt()) / (p + q);
            if u >= ax.max(ay) {
                return u;
            }
        }
    }
    one_x.min(one_y)
}

/// Inputs of the randomly-terminated update beyond the neighbor values.
#[derive(Debug, Clone, Copy)]
pub struct TerminatedCoeffs {
    pub speed: f64,
    pub cost: f64,
    pub psi: f64,
    /// Loot value plus pre-extraction cost at this point, `b + R`.
    pub continuation: f64,
}

impl TerminatedCoeffs {
    /// `K + ψ·(b + R)`, the effective cost at `Ū = 0`.
    pub fn base_cost(&self) -> f64 {
        self.cost + self.psi * self.continuation
    }

    /// `K + ψ·(b + R − u)`.
    pub fn effective_cost(&self, u: f64) -> f64 {
        self.cost + self.psi * (self.continuation - u)
    }
}

/// Update for `f·|∇ū| = K + ψ·(b + R − ū)`.
///
/// The right-hand side depends on `ū` itself, so the point equation is a
/// quadratic in `ū` whose admissible root lies in `[max used neighbor, c/ψ]`
/// where the effective cost stays nonnegative. On that interval the residual
/// is strictly increasing, so the admissible root is unique when it exists.
/// When even the one-sided root would push the effective cost negative the
/// cost is clamped at zero and the value saturates at the neighbor.
pub fn terminated_update(ax: f64, ay: f64, k: &TerminatedCoeffs, dx: f64, dy: f64) -> f64 {
    if k.psi == 0.0 {
        return point_update(ax, ay, k.speed, k.cost, dx, dy);
    }
    if !ax.is_finite() && !ay.is_finite() {
        return f64::INFINITY;
    }
    let one_x = one_sided_terminated(ax, dx, k);
    let one_y = one_sided_terminated(ay, dy, k);
    if ax.is_finite() && ay.is_finite() {
        let (lo, hlo, hi, hhi) = if ax <= ay {
            (ax, dx, ay, dy)
        } else {
            (ay, dy, ax, dx)
        };
        if let Some(u) = two_sided_terminated(lo, hlo, hi, hhi, k) {
            return u;
        }
    }
    one_x.min(one_y)
}

fn one_sided_terminated(a: f64, h: f64, k: &TerminatedCoeffs) -> f64 {
    if !a.is_finite() {
        return f64::INFINITY;
    }
    let c = k.base_cost();
    if c - k.psi * a < 0.0 {
        return a;
    }
    (a * k.speed + c * h) / (k.speed + k.psi * h)
}

/// Two-sided root written in the shifted variable `s = ū − lo`.
fn two_sided_terminated(lo: f64, hlo: f64, hi: f64, hhi: f64, k: &TerminatedCoeffs) -> Option<f64> {
    let d = hi - lo;
    let f2 = k.speed * k.speed;
    let c1 = k.effective_cost(lo);
    // Effective cost must still be nonnegative at the upper neighbor,
    // and the residual there must be nonpositive for a root to exist above it.
    let c_at_hi = c1 - k.psi * d;
    if c_at_hi < 0.0 {
        return None;
    }
    let wlo = 1.0 / (hlo * hlo);
    let whi = 1.0 / (hhi * hhi);
    if wlo * d * d - c_at_hi * c_at_hi / f2 > 0.0 {
        return None;
    }
    let a = wlo + whi - k.psi * k.psi / f2;
    let b = -2.0 * whi * d + 2.0 * c1 * k.psi / f2;
    let c = whi * d * d - c1 * c1 / f2;
    let s = if a.abs() < 1e-300 {
        -c / b
    } else {
        let disc = (b * b - 4.0 * a * c).max(0.0);
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let (r1, r2) = (q / a, if q != 0.0 { c / q } else { q / a });
        let (small, large) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        if a > 0.0 {
            large
        } else {
            small
        }
    };
    let upper = c1 / k.psi;
    Some(lo + s.clamp(d, upper.max(d)))
}
