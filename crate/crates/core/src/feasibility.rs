//! Bound-support existence: precedence-aware preprocessing followed by a
//! greedy sweep over values.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::model::{IntervalDomain, PrecedenceGraph, PropagationOutcome};

/// Outcome of [`greedy_bound_support`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GreedyOutcome {
    Assignment(Vec<i64>),
    Infeasible,
}

impl GreedyOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Assignment(_))
    }
}

/// Enforces the weak edge condition `min(X_i) <= min(X_j)` and
/// `max(X_i) <= max(X_j)` for every `(i, j)` in the closure.
pub fn preprocess_bounds(graph: &PrecedenceGraph, bounds: &[IntervalDomain]) -> PropagationOutcome {
    let mut out = bounds.to_vec();
    for &j in graph.topological_order() {
        for &i in graph.predecessors(j) {
            out[j].lb = out[j].lb.max(out[i].lb);
        }
    }
    for &i in graph.topological_order().iter().rev() {
        for &j in graph.successors(i) {
            out[i].ub = out[i].ub.min(out[j].ub);
        }
    }
    PropagationOutcome::from_bounds(out)
}

/// `true` iff `bounds` satisfy the weak edge condition.
pub fn is_preprocessed(graph: &PrecedenceGraph, bounds: &[IntervalDomain]) -> bool {
    graph
        .closure_edges()
        .all(|(i, j)| bounds[i].lb <= bounds[j].lb && bounds[i].ub <= bounds[j].ub)
}

/// Builds a bound support by sweeping values upwards, giving each value to
/// the pending variable with the smallest upper bound.
///
/// Among candidates sharing that upper bound the one with no predecessor in
/// the tied set is chosen, lowest index first. `bounds` must already be
/// preprocessed; this is checked.
pub fn greedy_bound_support(graph: &PrecedenceGraph, bounds: &[IntervalDomain]) -> GreedyOutcome {
    assert!(
        is_preprocessed(graph, bounds),
        "greedy_bound_support needs preprocessed bounds"
    );
    if bounds.iter().any(IntervalDomain::is_empty) {
        return GreedyOutcome::Infeasible;
    }
    let n = bounds.len();
    let mut by_lb: Vec<usize> = (0..n).collect();
    by_lb.sort_by_key(|&j| (bounds[j].lb, j));

    let mut values = vec![0i64; n];
    let mut heap: BinaryHeap<Reverse<(i64, usize)>> = BinaryHeap::new();
    let mut next = 0;
    let mut v = i64::MIN;
    let mut tied = Vec::new();
    for _ in 0..n {
        if heap.is_empty() {
            v = v.max(bounds[by_lb[next]].lb);
        }
        while next < n && bounds[by_lb[next]].lb <= v {
            let j = by_lb[next];
            heap.push(Reverse((bounds[j].ub, j)));
            next += 1;
        }
        let Reverse((u, _)) = *heap.peek().expect("at least one pending variable");
        if u < v {
            return GreedyOutcome::Infeasible;
        }
        tied.clear();
        while let Some(&Reverse((w, j))) = heap.peek() {
            if w != u {
                break;
            }
            heap.pop();
            tied.push(j);
        }
        // heap order already gives ascending index among ties
        let pick = *tied
            .iter()
            .find(|&&j| !tied.iter().any(|&k| graph.precedes(k, j)))
            .expect("closure of a DAG has a minimal element");
        for &j in &tied {
            if j != pick {
                heap.push(Reverse((u, j)));
            }
        }
        values[pick] = v;
        v += 1;
    }
    GreedyOutcome::Assignment(values)
}

/// Preprocess, then run the greedy. `true` iff a bound support exists.
pub fn has_bound_support(graph: &PrecedenceGraph, bounds: &[IntervalDomain]) -> bool {
    match preprocess_bounds(graph, bounds) {
        PropagationOutcome::Failure => false,
        PropagationOutcome::Consistent(b) => greedy_bound_support(graph, &b).is_feasible(),
    }
}
