//! Propagation for `AllDiffPrec`: pairwise-distinct integer variables with
//! strict precedences `X_i < X_j` along a DAG.
//!
//! Several independent routes reach the same bounds-consistency fixpoint:
//!
//! * [`fast`]: the union-find sweep, in full-universe and compressed modes;
//! * [`reference::filter_binary_search`]: halving around the greedy
//!   feasibility test of [`feasibility`];
//! * [`reference::conditions_prune`]: direct evaluation of the interval
//!   counting conditions;
//! * [`decomposition`]: a Boolean/linear encoding run in a small engine.
//!
//! [`dc`] enumerates supports exhaustively and [`sat`] encodes 3-SAT into
//! the constraint. [`search`], [`generators`] and [`fuzz`] drive the
//! propagators on whole problems.

pub mod dc;
pub mod decomposition;
pub mod fast;
pub mod feasibility;
pub mod format;
pub mod fuzz;
pub mod generators;
pub mod model;
pub mod passes;
pub mod reference;
pub mod sat;
pub mod search;
pub mod union_find;

pub use fast::{propagate_bc, Mode};
pub use model::{
    build_instance, build_interval_instance, BoundsIndex, FiniteDomain, Instance, IntervalDomain,
    ModelError, PrecedenceGraph, PropagationOutcome,
};
pub use passes::is_solution;
