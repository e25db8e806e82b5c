//! Dijkstra-like marcher shared by the Eikonal and randomly-terminated solvers.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::grid::{DomainMask, Grid2D};

const FAR: u8 = 0;
const TRIAL: u8 = 1;
const ACCEPTED: u8 = 2;

/// Result of one march: values per gridpoint and the inside acceptance order.
pub(crate) struct Marched {
    pub values: Vec<f64>,
    pub order: Vec<usize>,
}

/// Smallest accepted neighbor value along each axis.
#[inline]
fn axis_minima(grid: &Grid2D, state: &[u8], values: &[f64], idx: usize) -> (f64, f64) {
    let pick = |(b, f): (Option<usize>, Option<usize>)| {
        let mut m = f64::INFINITY;
        for n in [b, f].into_iter().flatten() {
            if state[n] == ACCEPTED && values[n] < m {
                m = values[n];
            }
        }
        m
    };
    (pick(grid.x_neighbors(idx)), pick(grid.y_neighbors(idx)))
}

/// Runs the marcher. Outside points start accepted at zero; inside points
/// with `passable[k] == false` are never accepted and stay at `+∞`.
///
/// `update(idx, ax, ay)` computes the tentative value at `idx` from the
/// per-axis minima of accepted neighbors and must return a value no smaller
/// than the neighbors it uses. The heap key is `(value, flat index)`, so ties
/// are accepted in index order.
pub(crate) fn march<F>(mask: &DomainMask, passable: &[bool], update: F) -> Marched
where
    F: Fn(usize, f64, f64) -> f64,
{
    let grid = *mask.grid();
    let n = grid.len();
    let mut values = vec![f64::INFINITY; n];
    let mut state = vec![FAR; n];
    for k in 0..n {
        if !mask.is_inside(k) {
            values[k] = 0.0;
            state[k] = ACCEPTED;
        }
    }

    // Nonnegative doubles order the same as their bit patterns.
    let mut heap: BinaryHeap<Reverse<(u64, u32)>> = BinaryHeap::new();
    let relax = |idx: usize,
                 values: &mut [f64],
                 state: &mut [u8],
                 heap: &mut BinaryHeap<Reverse<(u64, u32)>>| {
        let (ax, ay) = axis_minima(&grid, state, values, idx);
        let cand = update(idx, ax, ay);
        if cand < values[idx] {
            debug_assert!(cand >= 0.0);
            values[idx] = cand;
            state[idx] = TRIAL;
            heap.push(Reverse((cand.to_bits(), idx as u32)));
        }
    };

    for k in mask.inside_indices() {
        if passable[k] && grid.neighbors4(k).any(|nb| !mask.is_inside(nb)) {
            relax(k, &mut values, &mut state, &mut heap);
        }
    }

    let mut order = Vec::with_capacity(mask.inside_count());
    while let Some(Reverse((bits, idx))) = heap.pop() {
        let idx = idx as usize;
        if state[idx] == ACCEPTED || values[idx].to_bits() != bits {
            continue;
        }
        state[idx] = ACCEPTED;
        order.push(idx);
        for nb in grid.neighbors4(idx) {
            if state[nb] != ACCEPTED && passable[nb] {
                relax(nb, &mut values, &mut state, &mut heap);
            }
        }
    }
    Marched { values, order }
}
