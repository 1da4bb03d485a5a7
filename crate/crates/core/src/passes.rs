//! Building blocks shared by the propagation routes: a solution checker,
//! bounds consistency on the strict precedences, and bounds consistency on
//! the plain `AllDifferent` via Hall intervals.

use crate::model::{IntervalDomain, PrecedenceGraph, Wipeout};

/// `true` iff `values` is pairwise distinct and respects every precedence.
pub fn is_solution(graph: &PrecedenceGraph, values: &[i64]) -> bool {
    if values.len() != graph.len() {
        return false;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    graph.closure_edges().all(|(i, j)| values[i] < values[j])
}

/// `true` iff `values` is a solution lying inside `bounds`.
pub fn is_bound_support(
    graph: &PrecedenceGraph,
    bounds: &[IntervalDomain],
    values: &[i64],
) -> bool {
    values.len() == bounds.len()
        && values.iter().zip(bounds).all(|(&v, b)| b.contains(v))
        && is_solution(graph, values)
}

/// Bounds consistency on `X_i < X_j` for every closed edge. One forward and
/// one backward sweep in topological order reach the fixpoint.
pub fn precedence_pass(
    graph: &PrecedenceGraph,
    bounds: &mut [IntervalDomain],
) -> Result<bool, Wipeout> {
    let mut changed = false;
    for &j in graph.topological_order() {
        for &i in graph.predecessors(j) {
            if bounds[j].lb <= bounds[i].lb {
                bounds[j].lb = bounds[i].lb + 1;
                changed = true;
            }
        }
        if bounds[j].is_empty() {
            return Err(Wipeout);
        }
    }
    for &i in graph.topological_order().iter().rev() {
        for &j in graph.successors(i) {
            if bounds[i].ub >= bounds[j].ub {
                bounds[i].ub = bounds[j].ub - 1;
                changed = true;
            }
        }
        if bounds[i].is_empty() {
            return Err(Wipeout);
        }
    }
    Ok(changed)
}

/// One round of Hall-interval pruning for `AllDifferent`. Returns whether
/// anything changed; call repeatedly (or use [`alldiff_fixpoint`]).
pub fn alldiff_pass(bounds: &mut [IntervalDomain]) -> Result<bool, Wipeout> {
    if bounds.iter().any(IntervalDomain::is_empty) {
        return Err(Wipeout);
    }
    let mut lows: Vec<i64> = bounds.iter().map(|b| b.lb).collect();
    lows.sort_unstable();
    lows.dedup();
    let mut by_ub: Vec<usize> = (0..bounds.len()).collect();
    by_ub.sort_by_key(|&j| bounds[j].ub);

    let mut changed = false;
    for &l in &lows {
        let mut count = 0i64;
        let mut idx = 0;
        while idx < by_ub.len() {
            let u = bounds[by_ub[idx]].ub;
            while idx < by_ub.len() && bounds[by_ub[idx]].ub == u {
                if bounds[by_ub[idx]].lb >= l {
                    count += 1;
                }
                idx += 1;
            }
            if u < l {
                continue;
            }
            let capacity = u - l + 1;
            if count > capacity {
                return Err(Wipeout);
            }
            if count == capacity {
                for b in bounds.iter_mut() {
                    if b.is_subset_of(l, u) {
                        continue;
                    }
                    if l <= b.lb && b.lb <= u {
                        b.lb = u + 1;
                        changed = true;
                    }
                    if l <= b.ub && b.ub <= u {
                        b.ub = l - 1;
                        changed = true;
                    }
                    if b.is_empty() {
                        return Err(Wipeout);
                    }
                }
            }
        }
        if changed {
            // the sorted views are stale; let the caller rerun
            return Ok(true);
        }
    }
    Ok(false)
}

/// Bounds consistency on `AllDifferent`.
pub fn alldiff_fixpoint(bounds: &mut [IntervalDomain]) -> Result<bool, Wipeout> {
    let mut any = false;
    while alldiff_pass(bounds)? {
        any = true;
    }
    Ok(any)
}

/// Alternates [`precedence_pass`] and [`alldiff_fixpoint`] until neither
/// changes anything: bounds consistency on the decomposition into
/// `AllDifferent` plus binary orderings.
pub fn decomposed_fixpoint(
    graph: &PrecedenceGraph,
    bounds: &mut [IntervalDomain],
) -> Result<bool, Wipeout> {
    let mut any = false;
    loop {
        let a = precedence_pass(graph, bounds)?;
        let b = alldiff_fixpoint(bounds)?;
        if !(a || b) {
            return Ok(any);
        }
        any = true;
    }
}
