//! Depth-first search over a bounds store, propagating at every node.
//!
//! A [`Model`] is a set of integer variables with raw (unnormalized) domains,
//! any number of `AllDiffPrec` constraints over subsets of them, and
//! arbitrary side constraints. The store is copied per node.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decomposition::{encode_graph, propagate_decomposition};
use crate::fast::{propagate_bc, Mode};
use crate::model::{
    FiniteDomain, Instance, IntervalDomain, ModelError, PrecedenceGraph, PropagationOutcome,
    Wipeout,
};
use crate::passes::{decomposed_fixpoint, is_solution};
use crate::reference::{conditions_prune, filter_binary_search};

/// How an `AllDiffPrec` constraint is propagated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Fast(Mode),
    /// Direct evaluation of the interval conditions.
    Reference,
    /// Halving with the greedy feasibility check.
    BinarySearch,
    Decomposition,
    /// `AllDifferent` plus binary orderings; weaker than the others.
    Weak,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fast(Mode::FullUniverse) => "fast",
            Self::Fast(Mode::Compressed) => "fast-compressed",
            Self::Reference => "reference",
            Self::BinarySearch => "binary-search",
            Self::Decomposition => "decomposition",
            Self::Weak => "weak",
        }
    }

    /// Runs the route on bounds normalized to start at 1.
    pub fn propagate(
        self,
        graph: &PrecedenceGraph,
        bounds: &[IntervalDomain],
    ) -> PropagationOutcome {
        match self {
            Self::Fast(mode) => propagate_bc(graph, bounds, mode),
            Self::Reference => conditions_prune(graph, bounds),
            Self::BinarySearch => filter_binary_search(graph, bounds),
            Self::Decomposition => {
                let d = bounds.iter().map(|b| b.ub).max().unwrap_or(1).max(1);
                propagate_decomposition(&encode_graph(graph, d), bounds)
            }
            Self::Weak => {
                let mut out = bounds.to_vec();
                match decomposed_fixpoint(graph, &mut out) {
                    Ok(_) => PropagationOutcome::Consistent(out),
                    Err(Wipeout) => PropagationOutcome::Failure,
                }
            }
        }
    }
}

/// A constraint propagated by bounds reasoning and checked on full assignments.
pub trait SideConstraint: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;
    /// Narrows `bounds`; `Ok(true)` if anything moved.
    fn propagate(&self, bounds: &mut [IntervalDomain]) -> Result<bool, Wipeout>;
    fn check(&self, values: &[i64]) -> bool;
}

/// `AllDiffPrec` over `vars`, with `graph` indexed by position in `vars`.
#[derive(Debug, Clone)]
pub struct Global {
    pub vars: Vec<usize>,
    pub graph: PrecedenceGraph,
}

#[derive(Debug, Default)]
pub struct Model {
    names: Vec<String>,
    domains: Vec<FiniteDomain>,
    globals: Vec<Global>,
    sides: Vec<Box<dyn SideConstraint>>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        domain: FiniteDomain,
    ) -> Result<usize, ModelError> {
        let i = self.domains.len();
        if domain.is_empty() {
            return Err(ModelError::EmptyDomain(i));
        }
        self.names.push(name.into());
        self.domains.push(domain);
        Ok(i)
    }

    /// Posts `AllDiffPrec` over `vars`; edges index into `vars`.
    pub fn post_alldiffprec(
        &mut self,
        vars: &[usize],
        edges: &[(usize, usize)],
    ) -> Result<(), ModelError> {
        let graph = PrecedenceGraph::new(vars.len(), edges)?;
        if let Some(&v) = vars.iter().find(|&&v| v >= self.domains.len()) {
            return Err(ModelError::IndexOutOfRange(v, v, self.domains.len()));
        }
        self.globals.push(Global {
            vars: vars.to_vec(),
            graph,
        });
        Ok(())
    }

    pub fn post(&mut self, side: Box<dyn SideConstraint>) {
        self.sides.push(side);
    }

    /// One variable per instance variable, one global over all of them.
    /// Values are the instance's raw values.
    pub fn from_instance(instance: &Instance) -> Self {
        let mut m = Self::new();
        for (i, d) in instance.raw_domains().into_iter().enumerate() {
            m.add_var(format!("X{}", i + 1), d)
                .expect("instance domains are non-empty");
        }
        let vars: Vec<usize> = (0..instance.len()).collect();
        let edges: Vec<_> = instance.graph().edges().collect();
        m.post_alldiffprec(&vars, &edges)
            .expect("instance graph is valid");
        m
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn globals(&self) -> &[Global] {
        &self.globals
    }

    /// Independent check of a full assignment.
    pub fn check(&self, values: &[i64]) -> bool {
        values.len() == self.len()
            && values
                .iter()
                .zip(&self.domains)
                .all(|(v, d)| d.contains(*v))
            && self.globals.iter().all(|g| {
                let sub: Vec<i64> = g.vars.iter().map(|&v| values[v]).collect();
                is_solution(&g.graph, &sub)
            })
            && self.sides.iter().all(|s| s.check(values))
    }

    /// Snaps bounds onto domain values.
    fn membership(&self, bounds: &mut [IntervalDomain]) -> Result<bool, Wipeout> {
        let mut changed = false;
        for (b, d) in bounds.iter_mut().zip(&self.domains) {
            let lo = d.values().range(b.lb..).next().copied();
            let hi = d.values().range(..=b.ub).next_back().copied();
            match (lo, hi) {
                (Some(lo), Some(hi)) if lo <= hi => {
                    changed |= lo != b.lb || hi != b.ub;
                    *b = IntervalDomain::new(lo, hi);
                }
                _ => return Err(Wipeout),
            }
        }
        Ok(changed)
    }

    fn propagate_global(
        &self,
        g: &Global,
        route: Route,
        bounds: &mut [IntervalDomain],
    ) -> Result<bool, Wipeout> {
        let sub: Vec<IntervalDomain> = g.vars.iter().map(|&v| bounds[v]).collect();
        let Some(min) = sub.iter().map(|b| b.lb).min() else {
            return Ok(false);
        };
        let shift = 1 - min;
        let norm: Vec<IntervalDomain> = sub
            .iter()
            .map(|b| IntervalDomain::new(b.lb + shift, b.ub + shift))
            .collect();
        let out = route
            .propagate(&g.graph, &norm)
            .into_bounds()
            .ok_or(Wipeout)?;
        let mut changed = false;
        for (&v, b) in g.vars.iter().zip(out) {
            let nb = IntervalDomain::new(b.lb - shift, b.ub - shift);
            if nb != bounds[v] {
                changed = true;
                bounds[v] = nb;
            }
        }
        Ok(changed)
    }

    /// Propagates every constraint until nothing moves.
    pub fn propagate(&self, route: Route, bounds: &mut [IntervalDomain]) -> Result<(), Wipeout> {
        loop {
            let mut changed = self.membership(bounds)?;
            for g in &self.globals {
                changed |= self.propagate_global(g, route, bounds)?;
            }
            for s in &self.sides {
                changed |= s.propagate(bounds)?;
            }
            if bounds.iter().any(IntervalDomain::is_empty) {
                return Err(Wipeout);
            }
            if !changed {
                return Ok(());
            }
        }
    }

    pub fn initial_bounds(&self) -> Vec<IntervalDomain> {
        self.domains.iter().map(FiniteDomain::bounds).collect()
    }

    /// Positions of the variables in a topological order of the union of all
    /// global precedence graphs. Variables outside any precedence come last.
    fn topological_rank(&self) -> Vec<usize> {
        let n = self.len();
        let mut edges = Vec::new();
        for g in &self.globals {
            for (a, b) in g.graph.edges() {
                edges.push((g.vars[a], g.vars[b]));
            }
        }
        match PrecedenceGraph::new(n, &edges) {
            Ok(graph) => {
                let mut rank = vec![0; n];
                for (pos, &v) in graph.topological_order().iter().enumerate() {
                    rank[v] = pos;
                }
                rank
            }
            // globals can be acyclic one by one yet cyclic together
            Err(_) => (0..n).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarOrder {
    MinDomain,
    Lex,
    Topological,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueOrder {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branching {
    /// `X = bound` on the left, the rest on the right.
    AssignBound,
    /// Halves the domain at its midpoint.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub var_order: VarOrder,
    pub value_order: ValueOrder,
    pub branching: Branching,
    pub route: Route,
    pub node_limit: u64,
    /// Breaks ties between equally small domains under `MinDomain`.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            var_order: VarOrder::MinDomain,
            value_order: ValueOrder::Ascending,
            branching: Branching::AssignBound,
            route: Route::Fast(Mode::FullUniverse),
            node_limit: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solution(Vec<i64>),
    Unsatisfiable,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub outcome: SolveOutcome,
    pub nodes: u64,
    pub failures: u64,
}

/// Finds one solution, proves there is none, or runs out of nodes.
pub fn solve(model: &Model, config: &SearchConfig) -> SolveResult {
    assert!(config.node_limit > 0, "node limit must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rank = model.topological_rank();
    let mut stack = vec![model.initial_bounds()];
    let mut nodes = 0;
    let mut failures = 0;
    while let Some(mut bounds) = stack.pop() {
        if nodes == config.node_limit {
            return SolveResult {
                outcome: SolveOutcome::NodeLimit,
                nodes,
                failures,
            };
        }
        nodes += 1;
        if model.propagate(config.route, &mut bounds).is_err() {
            failures += 1;
            continue;
        }
        let open: Vec<usize> = (0..bounds.len())
            .filter(|&v| !bounds[v].is_fixed())
            .collect();
        if open.is_empty() {
            let values: Vec<i64> = bounds.iter().map(|b| b.lb).collect();
            if model.check(&values) {
                return SolveResult {
                    outcome: SolveOutcome::Solution(values),
                    nodes,
                    failures,
                };
            }
            failures += 1;
            continue;
        }
        let var = match config.var_order {
            VarOrder::Lex => open[0],
            VarOrder::Topological => *open.iter().min_by_key(|&&v| (rank[v], v)).unwrap(),
            VarOrder::MinDomain => {
                let w = open.iter().map(|&v| bounds[v].width()).min().unwrap();
                let tied: Vec<usize> = open
                    .iter()
                    .copied()
                    .filter(|&v| bounds[v].width() == w)
                    .collect();
                *tied.choose(&mut rng).unwrap()
            }
        };
        let IntervalDomain { lb, ub } = bounds[var];
        let (low, high) = match config.branching {
            Branching::AssignBound => match config.value_order {
                ValueOrder::Ascending => ((lb, lb), (lb + 1, ub)),
                ValueOrder::Descending => ((lb, ub - 1), (ub, ub)),
            },
            Branching::Split => {
                let mid = lb + (ub - lb) / 2;
                ((lb, mid), (mid + 1, ub))
            }
        };
        let mut left = bounds.clone();
        left[var] = IntervalDomain::new(low.0, low.1);
        let mut right = bounds;
        right[var] = IntervalDomain::new(high.0, high.1);
        // the branch explored first goes on top
        match config.value_order {
            ValueOrder::Ascending => {
                stack.push(right);
                stack.push(left);
            }
            ValueOrder::Descending => {
                stack.push(left);
                stack.push(right);
            }
        }
    }
    SolveResult {
        outcome: SolveOutcome::Unsatisfiable,
        nodes,
        failures,
    }
}
