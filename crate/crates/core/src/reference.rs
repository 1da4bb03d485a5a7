//! Two slow, transparent bounds-consistency routes used as oracles.
//!
//! * [`filter_binary_search`] narrows each bound by halving around the
//!   greedy feasibility test.
//! * [`conditions_prune`] evaluates the interval counting conditions on
//!   endpoints drawn from `L ∪ U` and removes `[l - (c - 1), u]` (resp. the
//!   mirrored range) for each violated interval of cost `c`.

use crate::feasibility::has_bound_support;
use crate::model::{BoundsIndex, IntervalDomain, PrecedenceGraph, PropagationOutcome, Wipeout};
use crate::passes::{alldiff_fixpoint, precedence_pass};

/// Domains after the one-shot direct pruning of `X_i = v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectPruneStore {
    pub var: usize,
    pub value: i64,
    pub domains: Vec<IntervalDomain>,
}

impl DirectPruneStore {
    pub fn has_wipeout(&self) -> bool {
        self.domains.iter().any(IntervalDomain::is_empty)
    }
}

/// Applies the four direct-pruning rules once, without iterating.
pub fn direct_prune(
    graph: &PrecedenceGraph,
    bounds: &[IntervalDomain],
    i: usize,
    v: i64,
) -> DirectPruneStore {
    let mut domains = bounds.to_vec();
    for (j, d) in domains.iter_mut().enumerate() {
        if j == i {
            *d = IntervalDomain::singleton(v);
            continue;
        }
        // v leaves every domain that has it as a bound
        d.remove_range(v, v);
        if graph.precedes(j, i) {
            d.ub = d.ub.min(v - 1);
        } else if graph.precedes(i, j) {
            d.lb = d.lb.max(v + 1);
        }
    }
    DirectPruneStore {
        var: i,
        value: v,
        domains,
    }
}

/// `true` iff `X_i = v` extends to a bound support, decided by running the
/// greedy on the direct-pruned store.
pub fn bound_support_exists(
    graph: &PrecedenceGraph,
    bounds: &[IntervalDomain],
    i: usize,
    v: i64,
) -> bool {
    let store = direct_prune(graph, bounds, i, v);
    !store.has_wipeout() && has_bound_support(graph, &store.domains)
}

/// Bounds consistency by binary search over the feasibility test.
pub fn filter_binary_search(
    graph: &PrecedenceGraph,
    bounds: &[IntervalDomain],
) -> PropagationOutcome {
    let mut cur = bounds.to_vec();
    if !has_bound_support(graph, &cur) {
        return PropagationOutcome::Failure;
    }
    loop {
        let mut changed = false;
        for i in 0..cur.len() {
            let orig = cur[i];
            let lb = smallest_supported(graph, &mut cur, i);
            let ub = largest_supported(graph, &mut cur, i);
            cur[i] = IntervalDomain::new(lb, ub);
            changed |= cur[i] != orig;
        }
        if !changed {
            return PropagationOutcome::Consistent(cur);
        }
    }
}

fn feasible_with(
    graph: &PrecedenceGraph,
    bounds: &mut [IntervalDomain],
    i: usize,
    lo: i64,
    hi: i64,
) -> bool {
    let saved = bounds[i];
    bounds[i] = IntervalDomain::new(lo, hi);
    let ok = has_bound_support(graph, bounds);
    bounds[i] = saved;
    ok
}

// Caller guarantees the full interval of `i` is feasible.
fn smallest_supported(graph: &PrecedenceGraph, bounds: &mut [IntervalDomain], i: usize) -> i64 {
    let IntervalDomain { mut lb, mut ub } = bounds[i];
    while lb < ub {
        let mid = lb + (ub - lb) / 2;
        if feasible_with(graph, bounds, i, lb, mid) {
            ub = mid;
        } else {
            lb = mid + 1;
        }
    }
    lb
}

fn largest_supported(graph: &PrecedenceGraph, bounds: &mut [IntervalDomain], i: usize) -> i64 {
    let IntervalDomain { mut lb, mut ub } = bounds[i];
    while lb < ub {
        let mid = lb + (ub - lb + 1) / 2;
        if feasible_with(graph, bounds, i, mid, ub) {
            lb = mid;
        } else {
            ub = mid - 1;
        }
    }
    ub
}

/// Which family of conditions an interval violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Successors in `[1, u]` plus other non-successors inside `[l, u]`.
    Upper,
    /// Predecessors in `[l, d]` plus other non-predecessors inside `[l, u]`.
    Lower,
}

/// Counters for one interval.
///
/// `anchored` counts successors with `max <= u` (resp. predecessors with
/// `min >= l`); `inside` counts other variables, `X_i` excluded, whose
/// domain lies in `[l, u]`; `cost = anchored + inside - (u - l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionCounters {
    pub anchored: i64,
    pub inside: i64,
    pub cost: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ViolatedInterval {
    pub side: Side,
    pub lo: i64,
    pub hi: i64,
    pub counters: ConditionCounters,
}

/// Evaluates the counting conditions for one variable on `[lo, hi]`.
pub fn interval_counters(
    graph: &PrecedenceGraph,
    bounds: &[IntervalDomain],
    i: usize,
    side: Side,
    lo: i64,
    hi: i64,
) -> ConditionCounters {
    let mut anchored = 0;
    let mut inside = 0;
    for (j, d) in bounds.iter().enumerate() {
        if j == i {
            continue;
        }
        let related = match side {
            Side::Upper => graph.precedes(i, j),
            Side::Lower => graph.precedes(j, i),
        };
        if related {
            let hit = match side {
                Side::Upper => d.ub <= hi,
                Side::Lower => d.lb >= lo,
            };
            anchored += i64::from(hit);
        } else if d.is_subset_of(lo, hi) {
            inside += 1;
        }
    }
    ConditionCounters {
        anchored,
        inside,
        cost: anchored + inside - (hi - lo),
    }
}

/// Every violated interval with endpoints in `L ∪ U ∪ {v}` that rules out
/// `X_i = v`. Requires the `AllDifferent` and the precedences to be bounds
/// consistent on `bounds` for the list to be complete.
pub fn conditions_check(
    graph: &PrecedenceGraph,
    bounds: &[IntervalDomain],
    i: usize,
    v: i64,
) -> Vec<ViolatedInterval> {
    let mut points = BoundsIndex::new(bounds).endpoints();
    if let Err(pos) = points.binary_search(&v) {
        points.insert(pos, v);
    }
    let mut out = Vec::new();
    for (a, &lo) in points.iter().enumerate() {
        for &hi in &points[a..] {
            if v <= lo {
                let c = interval_counters(graph, bounds, i, Side::Upper, lo, hi);
                if c.cost > lo - v {
                    out.push(ViolatedInterval {
                        side: Side::Upper,
                        lo,
                        hi,
                        counters: c,
                    });
                }
            }
            if hi <= v {
                let c = interval_counters(graph, bounds, i, Side::Lower, lo, hi);
                if c.cost > v - hi {
                    out.push(ViolatedInterval {
                        side: Side::Lower,
                        lo,
                        hi,
                        counters: c,
                    });
                }
            }
        }
    }
    out
}

/// One pass of interval-condition pruning over every variable.
pub fn conditions_pass(
    graph: &PrecedenceGraph,
    bounds: &mut [IntervalDomain],
) -> Result<bool, Wipeout> {
    let mut changed = false;
    for i in 0..bounds.len() {
        loop {
            let points = BoundsIndex::new(bounds).endpoints();
            let mut moved = false;
            for (a, &lo) in points.iter().enumerate() {
                for &hi in &points[a..] {
                    let up = interval_counters(graph, bounds, i, Side::Upper, lo, hi);
                    if up.cost >= 1 {
                        moved |= bounds[i].remove_range(lo - (up.cost - 1), hi);
                    }
                    let down = interval_counters(graph, bounds, i, Side::Lower, lo, hi);
                    if down.cost >= 1 {
                        moved |= bounds[i].remove_range(lo, hi + (down.cost - 1));
                    }
                    if bounds[i].is_empty() {
                        return Err(Wipeout);
                    }
                }
            }
            if !moved {
                break;
            }
            changed = true;
        }
    }
    Ok(changed)
}

/// Round-robin of precedence, `AllDifferent` and condition passes to a
/// common fixpoint.
pub fn conditions_prune(graph: &PrecedenceGraph, bounds: &[IntervalDomain]) -> PropagationOutcome {
    let mut cur = bounds.to_vec();
    if cur.iter().any(IntervalDomain::is_empty) {
        return PropagationOutcome::Failure;
    }
    let run = |cur: &mut Vec<IntervalDomain>| -> Result<(), Wipeout> {
        loop {
            let a = precedence_pass(graph, cur)?;
            let b = alldiff_fixpoint(cur)?;
            let c = conditions_pass(graph, cur)?;
            if !(a || b || c) {
                return Ok(());
            }
        }
    };
    match run(&mut cur) {
        Ok(()) => PropagationOutcome::Consistent(cur),
        Err(Wipeout) => PropagationOutcome::Failure,
    }
}
