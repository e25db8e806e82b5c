//! Aerial-patrol model: scalarized Eikonal solves over a λ grid, the two
//! restricted value functions per λ, and the expected-profit map
//! `Pᵃ = max_k { B·e^{−V₁ᵏ} − V₂ᵏ } − R`.

use rayon::prelude::*;

use crate::eikonal::{solve_eikonal, solve_transport_pair, RHS_FLOOR};
use crate::error::{Error, Result};
use crate::grid::{sample_bilinear, DomainMask, Point, Problem, ScalarField};

/// `K^λ = λψ̃ + (1−λ)K̃` with `ψ̃`, `K̃` floored at [`RHS_FLOOR`].
///
/// Flooring the two rates rather than their mix keeps
/// `U^λ = λV₁ + (1−λ)V₂` exact when the transport pair uses the same
/// floored rates (see [`floored`]).
pub fn scalarized_cost(psi: &ScalarField, cost: &ScalarField, lambda: f64) -> Result<ScalarField> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    psi.zip_map(cost, |p, k| {
        let (p, k) = (p.max(RHS_FLOOR), k.max(RHS_FLOOR));
        if lambda == 0.0 {
            k
        } else if lambda == 1.0 {
            p
        } else {
            lambda * p + (1.0 - lambda) * k
        }
    })
}

/// A rate field floored at [`RHS_FLOOR`].
pub fn floored(rate: &ScalarField) -> ScalarField {
    rate.map(|v| v.max(RHS_FLOOR))
}

/// `λ_k = k / n` for `k = 0..=n`.
pub fn lambda_grid(n_lambda: usize) -> Result<Vec<f64>> {
    if n_lambda == 0 {
        return Err(Error::InvalidParameter("need at least one lambda step".into()));
    }
    Ok((0..=n_lambda).map(|k| k as f64 / n_lambda as f64).collect())
}

/// `(U^λ, V^{λ,1}, V^{λ,2})` for one weight.
#[derive(Debug, Clone)]
pub struct ValueTriplet {
    pub lambda: f64,
    pub u: ScalarField,
    pub v1: ScalarField,
    pub v2: ScalarField,
}

pub fn solve_triplet(problem: &Problem, lambda: f64) -> Result<ValueTriplet> {
    let kl = scalarized_cost(&problem.psi, &problem.cost, lambda)?;
    let eik = solve_eikonal(&problem.mask, &problem.speed, &kl)?;
    let (v1, v2) = solve_transport_pair(
        &problem.mask,
        &eik,
        &problem.speed,
        &floored(&problem.psi),
        &floored(&problem.cost),
        &kl,
    )?;
    Ok(ValueTriplet {
        lambda,
        u: eik.u,
        v1,
        v2,
    })
}

/// All triplets of a λ grid, ordered by `k`.
#[derive(Debug, Clone)]
pub struct LambdaSweep {
    pub triplets: Vec<ValueTriplet>,
}

impl LambdaSweep {
    pub fn lambdas(&self) -> Vec<f64> {
        self.triplets.iter().map(|t| t.lambda).collect()
    }
}

/// Solves every `λ_k`. Solves run in parallel; results are merged by index.
pub fn run_lambda_sweep(problem: &Problem, n_lambda: usize) -> Result<LambdaSweep> {
    let lambdas = lambda_grid(n_lambda)?;
    let triplets = lambdas
        .par_iter()
        .enumerate()
        .map(|(k, &lam)| solve_triplet(problem, lam).map_err(|e| e.at_index(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LambdaSweep { triplets })
}

/// Cost of the cheapest approach path from ∂Ω.
pub fn compute_r(problem: &Problem) -> Result<ScalarField> {
    match problem.kappa {
        Some(kappa) => {
            let one = ScalarField::constant(problem.grid, 1.0);
            let tau = solve_eikonal(&problem.mask, &problem.speed, &one)?;
            Ok(tau.u.scale(kappa))
        }
        None => Ok(solve_eikonal(&problem.mask, &problem.speed, &problem.cost)?.u),
    }
}

/// Expected profit under aerial patrols with the maximizing λ index per point.
#[derive(Debug, Clone)]
pub struct ProfitMapA {
    pub p_a: ScalarField,
    pub argmax_k: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub r: ScalarField,
}

impl ProfitMapA {
    pub fn argmax_lambda(&self) -> ScalarField {
        let vals = self.argmax_k.iter().map(|&k| self.lambdas[k]).collect();
        ScalarField::new(*self.p_a.grid(), vals).expect("same grid")
    }

    /// `Pᵃ + R`, the payoff before the approach cost.
    pub fn gross(&self) -> ScalarField {
        self.p_a
            .zip_map(&self.r, |p, r| if p.is_finite() { p + r } else { p })
            .expect("same grid")
    }
}

#[inline]
fn payoff(b: f64, v1: f64, v2: f64) -> f64 {
    b * (-v1).exp() - v2
}

/// Streaming reduction of triplets into the λ-grid maximum.
///
/// Triplets must be pushed in increasing `k`, which makes ties resolve to the
/// smallest `k` and lets the accumulator record the payoff at the λ
/// neighbors of the argmax.
pub struct ProfitAccumulator {
    benefit: Vec<f64>,
    best: Vec<f64>,
    argmax: Vec<usize>,
    prev: Vec<f64>,
    before_best: Vec<f64>,
    after_best: Vec<f64>,
    lambdas: Vec<f64>,
    next_k: usize,
}

impl ProfitAccumulator {
    pub fn new(benefit: &ScalarField) -> Self {
        let n = benefit.values().len();
        ProfitAccumulator {
            benefit: benefit.values().to_vec(),
            best: vec![f64::NEG_INFINITY; n],
            argmax: vec![0; n],
            prev: vec![f64::NAN; n],
            before_best: vec![f64::NAN; n],
            after_best: vec![f64::NAN; n],
            lambdas: Vec::new(),
            next_k: 0,
        }
    }

    pub fn push(&mut self, lambda: f64, v1: &ScalarField, v2: &ScalarField) {
        let k = self.next_k;
        self.next_k += 1;
        self.lambdas.push(lambda);
        let (v1, v2) = (v1.values(), v2.values());
        for x in 0..self.best.len() {
            let p = payoff(self.benefit[x], v1[x], v2[x]);
            if k > 0 && self.argmax[x] + 1 == k {
                self.after_best[x] = p;
            }
            if p > self.best[x] || k == 0 {
                self.before_best[x] = self.prev[x];
                self.after_best[x] = f64::NAN;
                self.best[x] = p;
                self.argmax[x] = k;
            }
            self.prev[x] = p;
        }
    }

    /// Largest payoff change between the argmax and its λ-grid neighbors.
    pub fn lambda_gap(&self, mask: &DomainMask) -> ScalarField {
        let vals = (0..self.best.len())
            .map(|x| {
                if !mask.is_inside(x) || !self.best[x].is_finite() {
                    return 0.0;
                }
                [self.before_best[x], self.after_best[x]]
                    .iter()
                    .filter(|v| v.is_finite())
                    .map(|v| (self.best[x] - v).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        ScalarField::new(*mask.grid(), vals).expect("same grid")
    }

    pub fn finish(self, r: &ScalarField) -> ProfitMapA {
        let grid = *r.grid();
        let p = self
            .best
            .iter()
            .zip(r.values())
            .map(|(&b, &r)| b - r)
            .collect();
        ProfitMapA {
            p_a: ScalarField::new(grid, p).expect("same grid"),
            argmax_k: self.argmax,
            lambdas: self.lambdas,
            r: r.clone(),
        }
    }
}

/// λ-grid search over a stored sweep.
pub fn profit_map_a(problem: &Problem, sweep: &LambdaSweep, r: &ScalarField) -> Result<ProfitMapA> {
    r.check_same_grid(&problem.benefit)?;
    let mut acc = ProfitAccumulator::new(&problem.benefit);
    for t in &sweep.triplets {
        t.v1.check_same_grid(r)?;
        acc.push(t.lambda, &t.v1, &t.v2);
    }
    Ok(acc.finish(r))
}

/// One `(λ, J₁, J₂)` sample of the restricted value functions at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontPoint {
    pub lambda: f64,
    pub j1: f64,
    pub j2: f64,
}

impl FrontPoint {
    /// `a` dominates `b`: no worse in both objectives and strictly better in one.
    pub fn dominates(&self, other: &FrontPoint) -> bool {
        self.j1 <= other.j1 && self.j2 <= other.j2 && (self.j1 < other.j1 || self.j2 < other.j2)
    }

    pub fn payoff(&self, benefit: f64) -> f64 {
        payoff(benefit, self.j1, self.j2)
    }
}

/// Non-dominated subset sorted by `J₁` ascending (so `J₂` strictly decreasing).
/// Exact duplicates keep the smallest λ.
pub fn non_dominated(points: &[FrontPoint]) -> Vec<FrontPoint> {
    let mut sorted: Vec<FrontPoint> = points
        .iter()
        .copied()
        .filter(|p| p.j1.is_finite() && p.j2.is_finite())
        .collect();
    sorted.sort_by(|a, b| {
        a.j1.total_cmp(&b.j1)
            .then(a.j2.total_cmp(&b.j2))
            .then(a.lambda.total_cmp(&b.lambda))
    });
    let mut front: Vec<FrontPoint> = Vec::new();
    for p in sorted {
        match front.last() {
            Some(last) if p.j2 >= last.j2 => {}
            _ => front.push(p),
        }
    }
    front
}

/// Samples `(V₁ᵏ, V₂ᵏ)` at `x0` over a stored sweep.
pub fn samples_at(sweep: &LambdaSweep, mask: &DomainMask, x0: Point) -> Result<Vec<FrontPoint>> {
    check_inside(mask, x0)?;
    sweep
        .triplets
        .iter()
        .map(|t| {
            Ok(FrontPoint {
                lambda: t.lambda,
                j1: sample_bilinear(&t.v1, x0)?,
                j2: sample_bilinear(&t.v2, x0)?,
            })
        })
        .collect()
}

/// Pareto front of the sampled `(J₁, J₂)` pairs at `x0`.
pub fn pareto_front_at(sweep: &LambdaSweep, mask: &DomainMask, x0: Point) -> Result<Vec<FrontPoint>> {
    Ok(non_dominated(&samples_at(sweep, mask, x0)?))
}

pub(crate) fn check_inside(mask: &DomainMask, x0: Point) -> Result<()> {
    let g = mask.grid();
    if !g.contains(x0) {
        return Err(Error::OutOfBounds { x: x0.x, y: x0.y });
    }
    if !mask.is_inside(g.nearest(x0)) {
        return Err(Error::NotInside { x: x0.x, y: x0.y });
    }
    Ok(())
}

/// Everything a streamed λ sweep produces.
#[derive(Debug, Clone)]
pub struct ModelAOutput {
    pub profit: ProfitMapA,
    /// Per-point payoff change between the argmax λ and its grid neighbors.
    pub lambda_gap: ScalarField,
    /// For each probe point, the `(λ, J₁, J₂)` samples over all k.
    pub probes: Vec<Vec<FrontPoint>>,
}

/// Runs the λ sweep without keeping every triplet: solves are done in
/// parallel batches and folded in `k` order.
pub fn solve_model_a(
    problem: &Problem,
    r: &ScalarField,
    n_lambda: usize,
    probes: &[Point],
) -> Result<ModelAOutput> {
    for &p in probes {
        check_inside(&problem.mask, p)?;
    }
    let lambdas = lambda_grid(n_lambda)?;
    let mut acc = ProfitAccumulator::new(&problem.benefit);
    let mut probe_samples = vec![Vec::with_capacity(lambdas.len()); probes.len()];
    let batch = rayon::current_num_threads().max(1);
    for (c, chunk) in lambdas.chunks(batch).enumerate() {
        let solved = chunk
            .par_iter()
            .enumerate()
            .map(|(off, &lam)| {
                solve_triplet(problem, lam).map_err(|e| e.at_index(c * batch + off))
            })
            .collect::<Result<Vec<_>>>()?;
        for t in solved {
            for (samples, &p) in probe_samples.iter_mut().zip(probes) {
                samples.push(FrontPoint {
                    lambda: t.lambda,
                    j1: sample_bilinear(&t.v1, p)?,
                    j2: sample_bilinear(&t.v2, p)?,
                });
            }
            acc.push(t.lambda, &t.v1, &t.v2);
        }
    }
    let lambda_gap = acc.lambda_gap(&problem.mask);
    Ok(ModelAOutput {
        profit: acc.finish(r),
        lambda_gap,
        probes: probe_samples,
    })
}

/// Linearized-detection bound `P♯ = B − (B+1)·u^{λ♯} − R` with `λ♯ = B/(B+1)`.
///
/// For constant `B` this is a single solve. Otherwise `(b+1)·u^{b/(b+1)}` is
/// computed on the uniform grid `b_m` over `[min B, max B]` and linearly
/// interpolated in `b` at each point.
pub fn profit_sharp(problem: &Problem, r: &ScalarField, n_b: usize) -> Result<ScalarField> {
    if n_b == 0 {
        return Err(Error::InvalidParameter("need at least one b step".into()));
    }
    let grid = problem.grid;
    let weighted = |b: f64| -> Result<Vec<f64>> {
        let lam = b / (b + 1.0);
        let kl = scalarized_cost(&problem.psi, &problem.cost, lam)?;
        let u = solve_eikonal(&problem.mask, &problem.speed, &kl)?.u;
        Ok(u.values().iter().map(|&v| (b + 1.0) * v).collect())
    };
    let b = problem.benefit.values();
    let rv = r.values();
    if let Some(bc) = problem.constant_benefit() {
        let w = weighted(bc)?;
        let vals = (0..grid.len()).map(|x| b[x] - w[x] - rv[x]).collect();
        return ScalarField::new(grid, vals);
    }
    let (bmin, bmax) = problem.benefit.inside_range(&problem.mask);
    let grid_b: Vec<f64> = (0..=n_b)
        .map(|m| bmin + m as f64 * (bmax - bmin) / n_b as f64)
        .collect();
    let mut out = vec![f64::NAN; grid.len()];
    let mut prev = weighted(grid_b[0])?;
    for x in 0..grid.len() {
        if !problem.mask.is_inside(x) || b[x] <= grid_b[0] {
            out[x] = b[x] - prev[x] - rv[x];
        }
    }
    for m in 0..n_b {
        let next = weighted(grid_b[m + 1])?;
        let (lo, hi) = (grid_b[m], grid_b[m + 1]);
        for x in problem.mask.inside_indices() {
            if b[x] > lo && (b[x] <= hi || m + 1 == n_b) {
                let t = ((b[x] - lo) / (hi - lo)).clamp(0.0, 1.0);
                let w = if prev[x].is_finite() && next[x].is_finite() {
                    (1.0 - t) * prev[x] + t * next[x]
                } else {
                    f64::INFINITY
                };
                out[x] = b[x] - w - rv[x];
            }
        }
        prev = next;
    }
    ScalarField::new(grid, out)
}

/// `P♯` at one site using its exact benefit (bilinearly sampled).
pub fn profit_sharp_at(problem: &Problem, r: &ScalarField, x0: Point) -> Result<f64> {
    check_inside(&problem.mask, x0)?;
    let b = sample_bilinear(&problem.benefit, x0)?;
    let lam = b / (b + 1.0);
    let kl = scalarized_cost(&problem.psi, &problem.cost, lam)?;
    let u = solve_eikonal(&problem.mask, &problem.speed, &kl)?.u;
    Ok(b - (b + 1.0) * sample_bilinear(&u, x0)? - sample_bilinear(r, x0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    fn square_problem(n: usize, psi: impl Fn(f64, f64) -> f64, b: impl Fn(f64, f64) -> f64) -> Problem {
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

    #[test]
    fn scalarized_cost_endpoints() {
        let g = Grid2D::unit_square(4).unwrap();
        let psi = ScalarField::constant(g, 3.0);
        let k = ScalarField::constant(g, 1.0);
        assert_eq!(scalarized_cost(&psi, &k, 0.0).unwrap(), k);
        assert_eq!(scalarized_cost(&psi, &k, 1.0).unwrap(), psi);
        assert!(scalarized_cost(&psi, &k, 0.5).unwrap().values().iter().all(|&v| v == 2.0));
        let zero = ScalarField::constant(g, 0.0);
        assert!(scalarized_cost(&zero, &k, 1.0).unwrap().values().iter().all(|&v| v == RHS_FLOOR));
        assert!(scalarized_cost(&psi, &k, 1.5).is_err());
        assert!(scalarized_cost(&psi, &k, -0.1).is_err());
    }

    #[test]
    fn endpoint_grid_has_two_triplets() {
        let p = square_problem(12, |_, _| 1.0, |_, _| 1.0);
        let sweep = run_lambda_sweep(&p, 1).unwrap();
        assert_eq!(sweep.lambdas(), vec![0.0, 1.0]);
        assert!(run_lambda_sweep(&p, 0).is_err());
    }

    #[test]
    fn zero_detection_gives_vanishing_v1_for_every_lambda() {
        let p = square_problem(16, |_, _| 0.0, |_, _| 1.0);
        let sweep = run_lambda_sweep(&p, 4).unwrap();
        for t in &sweep.triplets {
            assert!(t.v1.values().iter().all(|&v| v < 1e-11));
        }
    }

    #[test]
    fn zero_benefit_gives_pure_cost() {
        let p = square_problem(16, |x, y| 1.0 + x * y, |_, _| 0.0);
        let r = compute_r(&p).unwrap();
        let sweep = run_lambda_sweep(&p, 5).unwrap();
        let pa = profit_map_a(&p, &sweep, &r).unwrap();
        for k in p.mask.inside_indices() {
            let expected = -sweep.triplets[0].v2.values()[k] - r.values()[k];
            assert!((pa.p_a.values()[k] - expected).abs() < 1e-12);
            assert!(pa.p_a.values()[k] <= 0.0);
            assert_eq!(pa.argmax_k[k], 0);
        }
    }

    #[test]
    fn r_is_linear_in_kappa() {
        let g = Grid2D::unit_square(20).unwrap();
        let m = DomainMask::open_box(g);
        let one = ScalarField::constant(g, 1.0);
        let mk = |kappa: f64| {
            Problem::new(m.clone(), one.clone(), one.clone(), one.clone(), one.scale(kappa), 0.0).unwrap()
        };
        let r1 = compute_r(&mk(1.0)).unwrap();
        let r2 = compute_r(&mk(2.0)).unwrap();
        for k in 0..g.len() {
            assert_eq!(r2.values()[k], 2.0 * r1.values()[k]);
        }
        let tau = solve_eikonal(&m, &one, &one).unwrap().u;
        assert_eq!(r1, tau);
    }

    #[test]
    fn non_dominated_filter() {
        let fp = |lambda, j1, j2| FrontPoint { lambda, j1, j2 };
        let pts = [
            fp(0.0, 1.0, 1.0),
            fp(0.1, 0.8, 1.2),
            fp(0.2, 0.9, 1.3), // dominated by (0.8, 1.2)
            fp(0.3, 0.5, 2.0),
            fp(0.4, 0.5, 2.0), // duplicate, keeps smaller λ
            fp(0.5, 1.0, 1.0), // duplicate
        ];
        let front = non_dominated(&pts);
        assert_eq!(
            front,
            vec![fp(0.3, 0.5, 2.0), fp(0.1, 0.8, 1.2), fp(0.0, 1.0, 1.0)]
        );
        assert!(front.windows(2).all(|w| w[0].j1 < w[1].j1 && w[0].j2 > w[1].j2));
        assert!(fp(0.0, 1.0, 1.0).dominates(&fp(0.0, 1.0, 2.0)));
        assert!(!fp(0.0, 1.0, 1.0).dominates(&fp(0.0, 1.0, 1.0)));
    }

    #[test]
    fn zero_detection_front_is_single_point() {
        let p = square_problem(20, |_, _| 0.0, |_, _| 1.0);
        let sweep = run_lambda_sweep(&p, 4).unwrap();
        let x0 = Point::new(0.3, 0.45);
        let front = pareto_front_at(&sweep, &p.mask, x0).unwrap();
        let uk = sample_bilinear(&solve_eikonal(&p.mask, &p.speed, &p.cost).unwrap().u, x0).unwrap();
        assert_eq!(front.len(), 1);
        assert!(front[0].j1 < 1e-11);
        assert!((front[0].j2 - uk).abs() < 1e-12);
        assert!(pareto_front_at(&sweep, &p.mask, Point::new(0.0, 0.5)).is_err());
    }

    #[test]
    fn sharp_equals_profit_without_detection() {
        let p = square_problem(20, |_, _| 0.0, |x, _| 1.0 + x);
        let r = compute_r(&p).unwrap();
        let sharp = profit_sharp(&p, &r, 4).unwrap();
        let sweep = run_lambda_sweep(&p, 4).unwrap();
        let pa = profit_map_a(&p, &sweep, &r).unwrap();
        assert!(sharp.max_abs_diff(&pa.p_a, &p.mask) < 1e-10);
    }

    #[test]
    fn streamed_sweep_matches_stored_sweep() {
        let p = square_problem(24, |x, y| 2.0 * (-20.0 * ((x - 0.5).powi(2) + (y - 0.3).powi(2))).exp(), |x, _| 1.0 + x);
        let r = compute_r(&p).unwrap();
        let sweep = run_lambda_sweep(&p, 6).unwrap();
        let stored = profit_map_a(&p, &sweep, &r).unwrap();
        let x0 = Point::new(0.4, 0.35);
        let streamed = solve_model_a(&p, &r, 6, &[x0]).unwrap();
        assert_eq!(stored.p_a, streamed.profit.p_a);
        assert_eq!(stored.argmax_k, streamed.profit.argmax_k);
        assert_eq!(streamed.probes[0], samples_at(&sweep, &p.mask, x0).unwrap());
    }
}
