use crate::error::{Error, Result};
use crate::grid::{Point, Problem, ScalarField};
use crate::multiobjective::{compute_r, solve_model_a};

use super::scenario::{build_scenario, ScenarioKind, ScenarioSpec};
use super::stats::region_stats;

/// Headline numbers of one Model A evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub a_p: f64,
    pub v_p: f64,
    pub p_max: f64,
}

/// One search: every candidate with its summary, and the indices of all
/// candidates whose `A_p` is within `tie_tol` of the best.
#[derive(Debug, Clone)]
pub struct SearchResult<C> {
    pub candidates: Vec<(C, Summary)>,
    pub best: Vec<usize>,
}

impl<C: Copy> SearchResult<C> {
    pub fn best_candidates(&self) -> Vec<C> {
        self.best.iter().map(|&i| self.candidates[i].0).collect()
    }

    pub fn best_summary(&self) -> Summary {
        self.candidates[self.best[0]].1
    }
}

/// Full λ sweep and pristine statistics for one problem.
pub fn evaluate_model_a(problem: &Problem, r: &ScalarField, n_lambda: usize) -> Result<Summary> {
    let out = solve_model_a(problem, r, n_lambda, &[])?;
    let s = region_stats(&out.profit.p_a, &problem.benefit, &problem.mask, problem.p_tilde)?;
    Ok(Summary {
        a_p: s.a_p,
        v_p: s.v_p,
        p_max: s.p_max,
    })
}

fn ties(summaries: &[Summary], tie_tol: f64) -> Vec<usize> {
    let best = summaries.iter().map(|s| s.a_p).fold(f64::NEG_INFINITY, f64::max);
    (0..summaries.len())
        .filter(|&i| summaries[i].a_p >= best - tie_tol)
        .collect()
}

/// `n × n` candidate points covering the closed unit square.
pub fn candidate_grid(n: usize) -> Vec<Point> {
    if n == 1 {
        return vec![Point::new(0.5, 0.5)];
    }
    let step = 1.0 / (n - 1) as f64;
    (0..n)
        .flat_map(|j| (0..n).map(move |i| Point::new(i as f64 * step, j as f64 * step)))
        .collect()
}

fn search<C: Copy>(
    spec: &ScenarioSpec,
    candidates: &[C],
    apply: impl Fn(&mut ScenarioSpec, C),
    tie_tol: f64,
) -> Result<SearchResult<C>> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidates to search".into()));
    }
    // R depends only on speed and cost, which no candidate changes
    let r = compute_r(&build_scenario(spec)?)?;
    let mut out = Vec::with_capacity(candidates.len());
    for (i, &c) in candidates.iter().enumerate() {
        let mut s = spec.clone();
        apply(&mut s, c);
        let summary = build_scenario(&s)
            .and_then(|p| evaluate_model_a(&p, &r, s.n_lambda))
            .map_err(|e| e.at_index(i))?;
        out.push((c, summary));
    }
    let summaries: Vec<Summary> = out.iter().map(|c| c.1).collect();
    let best = ties(&summaries, tie_tol);
    Ok(SearchResult { candidates: out, best })
}

/// Exhaustive search over single-station locations.
pub fn optimize_station(spec: &ScenarioSpec, candidates: &[Point], tie_tol: f64) -> Result<SearchResult<Point>> {
    if spec.kind != ScenarioKind::Station {
        return Err(Error::InvalidParameter(format!("`{}` has no patrol station", spec.name)));
    }
    search(spec, candidates, |s, c| s.station = c, tie_tol)
}

/// Exhaustive search over `w₁ ∈ {0, 1/N_w, …, 1}` with `w₂ = 1 − w₁`.
pub fn optimize_weights(spec: &ScenarioSpec, n_w: usize, tie_tol: f64) -> Result<SearchResult<(f64, f64)>> {
    if spec.kind != ScenarioKind::TwoStations {
        return Err(Error::InvalidParameter(format!("`{}` has no station weights", spec.name)));
    }
    if n_w == 0 {
        return Err(Error::InvalidParameter("need at least one weight step".into()));
    }
    let weights: Vec<(f64, f64)> = (0..=n_w)
        .map(|i| {
            let w1 = i as f64 / n_w as f64;
            (w1, 1.0 - w1)
        })
        .collect();
    search(spec, &weights, |s, w| s.weights = w, tie_tol)
}
