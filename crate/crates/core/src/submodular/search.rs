use crate::error::{Error, Result};
use crate::par::{map_indices, Execution};

use super::matroid::FeasibleRegion;
use super::oracle::SetFunction;

const MIN_GAIN: f64 = 1e-12;

/// Default cap on improving moves in [`local_search`].
pub const LOCAL_SEARCH_MOVE_CAP: usize = 10_000;

/// Adds the feasible element with the largest marginal gain (lowest index
/// on ties) until no feasible element has a positive gain.
///
/// Marginal gains of one round are evaluated in parallel.
pub fn greedy_matroid_intersection(oracle: &dyn SetFunction, region: &FeasibleRegion) -> Vec<usize> {
    greedy_with(oracle, region, Execution::Parallel)
}

pub fn greedy_with(oracle: &dyn SetFunction, region: &FeasibleRegion, execution: Execution) -> Vec<usize> {
    let n = region.ground.len();
    let mut set: Vec<usize> = Vec::new();
    loop {
        let gains = map_indices(n, execution, |e| {
            if region.can_add(&set, e) {
                Some(oracle.gain(&set, e))
            } else {
                None
            }
        });
        let best = gains
            .iter()
            .enumerate()
            .filter_map(|(e, g)| g.map(|g| (e, g)))
            .fold(None, |acc: Option<(usize, f64)>, (e, g)| match acc {
                Some((_, bg)) if bg >= g => acc,
                _ => Some((e, g)),
            });
        match best {
            Some((e, g)) if g > MIN_GAIN => set.push(e),
            _ => break,
        }
    }
    set.sort_unstable();
    set
}

/// Local search from the greedy solution.
///
/// Moves are: add one element, drop one element, or drop one element and
/// add up to r (the number of matroids). A move is taken when it raises the
/// value by more than `epsilon / n²` times the current value, n being the
/// ground-set size; the first such move in a fixed scan order is taken.
pub fn local_search(oracle: &dyn SetFunction, region: &FeasibleRegion, epsilon: f64) -> Result<Vec<usize>> {
    local_search_with(oracle, region, epsilon, LOCAL_SEARCH_MOVE_CAP)
}

pub fn local_search_with(
    oracle: &dyn SetFunction,
    region: &FeasibleRegion,
    epsilon: f64,
    move_cap: usize,
) -> Result<Vec<usize>> {
    let n = region.ground.len();
    let r = region.rank_count().max(1);
    let mut set = greedy_matroid_intersection(oracle, region);
    let mut value = oracle.value(&set);
    let mut moves = 0;
    while let Some((next, next_value)) = improving_move(oracle, region, &set, value, epsilon / (n * n).max(1) as f64, r) {
        moves += 1;
        if moves > move_cap {
            return Err(Error::IterationCapExceeded { cap: move_cap });
        }
        set = next;
        value = next_value;
    }
    set.sort_unstable();
    Ok(set)
}

fn improving_move(
    oracle: &dyn SetFunction,
    region: &FeasibleRegion,
    set: &[usize],
    value: f64,
    relative: f64,
    r: usize,
) -> Option<(Vec<usize>, f64)> {
    let threshold = value + relative * value.max(0.0) + MIN_GAIN;
    let n = region.ground.len();
    let try_set = |candidate: Vec<usize>| {
        let v = oracle.value(&candidate);
        (v > threshold).then_some((candidate, v))
    };

    for e in 0..n {
        if region.can_add(set, e) {
            let mut c = set.to_vec();
            c.push(e);
            if let Some(found) = try_set(c) {
                return Some(found);
            }
        }
    }
    for k in 0..set.len() {
        let mut rest = set.to_vec();
        rest.remove(k);
        if let Some(found) = try_set(rest.clone()) {
            return Some(found);
        }
        let outside: Vec<usize> = (0..n).filter(|e| !set.contains(e)).collect();
        let mut chosen = Vec::new();
        if let Some(found) = grow(oracle, region, &rest, &outside, 0, r, &mut chosen, threshold) {
            return Some(found);
        }
    }
    None
}

/// Depth-first search over additions of up to `left` elements from
/// `outside[from..]` to `base`, returning the first independent set whose
/// value exceeds `threshold`.
#[allow(clippy::too_many_arguments)]
fn grow(
    oracle: &dyn SetFunction,
    region: &FeasibleRegion,
    base: &[usize],
    outside: &[usize],
    from: usize,
    left: usize,
    chosen: &mut Vec<usize>,
    threshold: f64,
) -> Option<(Vec<usize>, f64)> {
    if left == 0 {
        return None;
    }
    for idx in from..outside.len() {
        let e = outside[idx];
        let mut current = base.to_vec();
        current.extend_from_slice(chosen);
        if !region.can_add(&current, e) {
            continue;
        }
        chosen.push(e);
        current.push(e);
        let v = oracle.value(&current);
        if v > threshold {
            return Some((current, v));
        }
        if let Some(found) = grow(oracle, region, base, outside, idx + 1, left - 1, chosen, threshold) {
            return Some(found);
        }
        chosen.pop();
    }
    None
}
