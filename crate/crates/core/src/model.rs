//! Domains, precedence graphs and the `AllDiffPrec` instance type.
//!
//! Variables are indexed from zero. Values are arbitrary integers at
//! ingestion; [`build_instance`] translates them so the smallest value in any
//! domain becomes 1, which lets the propagators index arrays by value.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building an instance.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("precedence relation has a directed cycle through variable {0}")]
    Cycle(usize),
    #[error("variable {0} has an empty domain")]
    EmptyDomain(usize),
    #[error("precedence ({0}, {1}) references a variable outside 0..{2}")]
    IndexOutOfRange(usize, usize, usize),
}

/// Bounds view of a variable. `lb > ub` marks a wiped-out domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalDomain {
    pub lb: i64,
    pub ub: i64,
}

impl IntervalDomain {
    pub const fn new(lb: i64, ub: i64) -> Self {
        Self { lb, ub }
    }

    pub const fn singleton(v: i64) -> Self {
        Self { lb: v, ub: v }
    }

    pub fn is_empty(&self) -> bool {
        self.lb > self.ub
    }

    pub fn is_fixed(&self) -> bool {
        self.lb == self.ub
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lb <= v && v <= self.ub
    }

    /// Number of values in the interval (zero when empty).
    pub fn width(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.ub - self.lb) as u64 + 1
        }
    }

    pub fn is_subset_of(&self, lo: i64, hi: i64) -> bool {
        lo <= self.lb && self.ub <= hi
    }

    /// Removes `[lo, hi]` when it covers a bound. Interior removals are
    /// ignored because an interval cannot hold holes. Returns whether the
    /// domain changed.
    pub fn remove_range(&mut self, lo: i64, hi: i64) -> bool {
        if lo > hi || self.is_empty() {
            return false;
        }
        let before = *self;
        if lo <= self.lb && self.lb <= hi {
            self.lb = hi + 1;
        }
        if !self.is_empty() && lo <= self.ub && self.ub <= hi {
            self.ub = lo - 1;
        }
        *self != before
    }
}

impl fmt::Display for IntervalDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "[]")
        } else {
            write!(f, "[{}, {}]", self.lb, self.ub)
        }
    }
}

/// Explicit value set, holes included.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FiniteDomain {
    values: BTreeSet<i64>,
}

impl FiniteDomain {
    pub fn new<I: IntoIterator<Item = i64>>(values: I) -> Self {
        Self {
            values: values.into_iter().collect(),
        }
    }

    pub fn range(lo: i64, hi: i64) -> Self {
        Self::new(lo..=hi)
    }

    pub fn values(&self) -> &BTreeSet<i64> {
        &self.values
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = i64> + '_ {
        self.values.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, v: i64) -> bool {
        self.values.contains(&v)
    }

    pub fn min(&self) -> Option<i64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.values.last().copied()
    }

    /// Bounds view; an empty set maps to the canonical failed interval.
    pub fn bounds(&self) -> IntervalDomain {
        match (self.min(), self.max()) {
            (Some(lb), Some(ub)) => IntervalDomain::new(lb, ub),
            _ => IntervalDomain::new(1, 0),
        }
    }

    pub fn insert(&mut self, v: i64) -> bool {
        self.values.insert(v)
    }

    fn shifted(&self, by: i64) -> Self {
        Self::new(self.values.iter().map(|v| v + by))
    }
}

impl FromIterator<i64> for FiniteDomain {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        Self::new(iter)
    }
}

/// A DAG over variable indices together with its transitive closure.
///
/// An edge `(i, j)` reads `X_i < X_j`. `successors(i)` is the closed set
/// S(i) and `predecessors(j)` the closed set P(j).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    reach: Vec<Vec<bool>>,
    topo: Vec<usize>,
}

impl PrecedenceGraph {
    /// Builds the graph, rejecting cycles and out-of-range indices.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, ModelError> {
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(ModelError::IndexOutOfRange(i, j, n));
            }
        }
        let edges: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
        let topo = topological_order(n, &edges)?;
        let (succ, pred) = transitive_closure(n, &edges)?;
        let mut reach = vec![vec![false; n]; n];
        for (i, s) in succ.iter().enumerate() {
            for &j in s {
                reach[i][j] = true;
            }
        }
        Ok(Self {
            n,
            edges,
            succ,
            pred,
            reach,
            topo,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, &[]).expect("an edgeless graph is acyclic")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Edges as given (not closed).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Every pair `(i, j)` with `j ∈ S(i)`.
    pub fn closure_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.pred[i]
    }

    /// `true` iff `j ∈ S(i)`.
    #[inline]
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.reach[i][j]
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Graph with every edge reversed.
    pub fn reversed(&self) -> Self {
        let edges: Vec<_> = self.edges.iter().map(|&(i, j)| (j, i)).collect();
        Self::new(self.n, &edges).expect("reversing a DAG keeps it acyclic")
    }

    /// Length (in edges) of the longest directed path of the given edges.
    pub fn longest_path(&self) -> usize {
        let mut depth = vec![0usize; self.n];
        for &v in &self.topo {
            for &(i, j) in &self.edges {
                if i == v {
                    depth[j] = depth[j].max(depth[i] + 1);
                }
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }
}

fn topological_order(n: usize, edges: &BTreeSet<(usize, usize)>) -> Result<Vec<usize>, ModelError> {
    let mut indeg = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for &(i, j) in edges {
        indeg[j] += 1;
        out[i].push(j);
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &out[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&v| indeg[v] > 0).unwrap_or(0);
        return Err(ModelError::Cycle(stuck));
    }
    Ok(order)
}

/// Successor and predecessor closures of `edges`, each list sorted.
///
/// Cycle detection runs first, so a cyclic input never yields `i ∈ S(i)`.
pub fn transitive_closure(
    n: usize,
    edges: &BTreeSet<(usize, usize)>,
) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>), ModelError> {
    if let Some(&(i, j)) = edges.iter().find(|&&(i, j)| i >= n || j >= n) {
        return Err(ModelError::IndexOutOfRange(i, j, n));
    }
    topological_order(n, edges)?;
    let mut out = vec![Vec::new(); n];
    for &(i, j) in edges {
        out[i].push(j);
    }
    let mut succ = vec![Vec::new(); n];
    let mut pred = vec![Vec::new(); n];
    for (start, s) in succ.iter_mut().enumerate() {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &out[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        *s = (0..n).filter(|&w| seen[w]).collect();
    }
    for (i, s) in succ.iter().enumerate() {
        for &j in s {
            pred[j].push(i);
        }
    }
    Ok((succ, pred))
}

/// One `AllDiffPrec` constraint: variables, their domains and the precedences.
///
/// Domains are stored normalized (global minimum at 1); `value_offset` is
/// the amount added to every raw value during normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    domains: Vec<FiniteDomain>,
    graph: PrecedenceGraph,
    value_offset: i64,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn domains(&self) -> &[FiniteDomain] {
        &self.domains
    }

    pub fn graph(&self) -> &PrecedenceGraph {
        &self.graph
    }

    pub fn value_offset(&self) -> i64 {
        self.value_offset
    }

    /// Largest normalized value, `d`.
    pub fn max_value(&self) -> i64 {
        self.domains
            .iter()
            .filter_map(FiniteDomain::max)
            .max()
            .unwrap_or(0)
    }

    /// Bounds view of every domain, normalized.
    pub fn bounds(&self) -> Vec<IntervalDomain> {
        self.domains.iter().map(FiniteDomain::bounds).collect()
    }

    pub fn normalize(&self, raw: i64) -> i64 {
        raw + self.value_offset
    }

    pub fn denormalize(&self, v: i64) -> i64 {
        v - self.value_offset
    }

    pub fn denormalize_bounds(&self, bounds: &[IntervalDomain]) -> Vec<IntervalDomain> {
        bounds
            .iter()
            .map(|b| IntervalDomain::new(self.denormalize(b.lb), self.denormalize(b.ub)))
            .collect()
    }

    /// Raw (pre-normalization) domains.
    pub fn raw_domains(&self) -> Vec<FiniteDomain> {
        self.domains
            .iter()
            .map(|d| d.shifted(-self.value_offset))
            .collect()
    }

    /// Replaces every domain by the full interval of its bounds.
    pub fn with_bounds(&self, bounds: &[IntervalDomain]) -> Self {
        let domains = bounds
            .iter()
            .map(|b| FiniteDomain::range(b.lb, b.ub))
            .collect();
        Self {
            domains,
            graph: self.graph.clone(),
            value_offset: self.value_offset,
        }
    }
}

/// Validates, closes and normalizes a raw `AllDiffPrec` instance.
pub fn build_instance(
    raw_domains: Vec<FiniteDomain>,
    raw_edges: &[(usize, usize)],
) -> Result<Instance, ModelError> {
    if let Some(i) = raw_domains.iter().position(FiniteDomain::is_empty) {
        return Err(ModelError::EmptyDomain(i));
    }
    let graph = PrecedenceGraph::new(raw_domains.len(), raw_edges)?;
    let global_min = raw_domains
        .iter()
        .filter_map(FiniteDomain::min)
        .min()
        .unwrap_or(1);
    let value_offset = 1 - global_min;
    let domains = raw_domains
        .iter()
        .map(|d| d.shifted(value_offset))
        .collect();
    Ok(Instance {
        domains,
        graph,
        value_offset,
    })
}

/// Convenience constructor from `[lb, ub]` pairs.
pub fn build_interval_instance(
    bounds: &[(i64, i64)],
    edges: &[(usize, usize)],
) -> Result<Instance, ModelError> {
    let domains = bounds
        .iter()
        .map(|&(lo, hi)| FiniteDomain::range(lo, hi))
        .collect();
    build_instance(domains, edges)
}

/// Sorted sets of all domain minima (`L`) and maxima (`U`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsIndex {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
}

impl BoundsIndex {
    pub fn new(bounds: &[IntervalDomain]) -> Self {
        let lower: BTreeSet<i64> = bounds.iter().map(|b| b.lb).collect();
        let upper: BTreeSet<i64> = bounds.iter().map(|b| b.ub).collect();
        Self {
            lower: lower.into_iter().collect(),
            upper: upper.into_iter().collect(),
        }
    }

    /// `L ∪ U`, sorted.
    pub fn endpoints(&self) -> Vec<i64> {
        let all: BTreeSet<i64> = self.lower.iter().chain(&self.upper).copied().collect();
        all.into_iter().collect()
    }
}

/// Result of a propagation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropagationOutcome {
    /// Some domain wiped out; the constraint has no (bound) support.
    Failure,
    /// Bounds at the fixpoint.
    Consistent(Vec<IntervalDomain>),
}

impl PropagationOutcome {
    /// Wraps a bounds store, mapping any empty domain to `Failure`.
    pub fn from_bounds(bounds: Vec<IntervalDomain>) -> Self {
        if bounds.iter().any(IntervalDomain::is_empty) {
            Self::Failure
        } else {
            Self::Consistent(bounds)
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Self::Failure)
    }

    pub fn bounds(&self) -> Option<&[IntervalDomain]> {
        match self {
            Self::Failure => None,
            Self::Consistent(b) => Some(b),
        }
    }

    pub fn into_bounds(self) -> Option<Vec<IntervalDomain>> {
        match self {
            Self::Failure => None,
            Self::Consistent(b) => Some(b),
        }
    }

    /// Per-variable `(index, before, after)` for every bound that moved.
    pub fn changes(
        &self,
        before: &[IntervalDomain],
    ) -> Vec<(usize, IntervalDomain, IntervalDomain)> {
        match self {
            Self::Failure => Vec::new(),
            Self::Consistent(after) => before
                .iter()
                .zip(after)
                .enumerate()
                .filter(|(_, (b, a))| b != a)
                .map(|(i, (b, a))| (i, *b, *a))
                .collect(),
        }
    }
}

/// Marker for a wiped-out domain, used with `?` inside propagation passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Wipeout;
