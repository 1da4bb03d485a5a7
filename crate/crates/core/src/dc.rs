//! Exhaustive support enumeration: the domain-consistency oracle.
//!
//! Only meant for small instances; the product of domain sizes is checked
//! against a cap before any work starts.

use thiserror::Error;

use crate::model::{FiniteDomain, IntervalDomain, PrecedenceGraph};

pub const DEFAULT_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search space of {size} assignments exceeds the cap of {cap}")]
    Explosion { size: u128, cap: u128 },
}

/// Depth-first enumeration of every assignment that is pairwise distinct and
/// respects all precedences. Partial assignments are checked as they grow,
/// so the cap bounds the worst case rather than the typical cost.
pub struct Supports<'a> {
    graph: &'a PrecedenceGraph,
    domains: Vec<Vec<i64>>,
    cursor: Vec<usize>,
    values: Vec<i64>,
    depth: usize,
    done: bool,
}

impl<'a> Supports<'a> {
    fn consistent(&self, var: usize, v: i64) -> bool {
        self.values[..var].iter().enumerate().all(|(k, &w)| {
            w != v
                && (!self.graph.precedes(k, var) || w < v)
                && (!self.graph.precedes(var, k) || v < w)
        })
    }
}

impl Iterator for Supports<'_> {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let n = self.domains.len();
        if self.done {
            return None;
        }
        if n == 0 {
            self.done = true;
            return Some(Vec::new());
        }
        loop {
            let var = self.depth;
            let mut placed = false;
            while self.cursor[var] < self.domains[var].len() {
                let v = self.domains[var][self.cursor[var]];
                self.cursor[var] += 1;
                if self.consistent(var, v) {
                    self.values[var] = v;
                    placed = true;
                    break;
                }
            }
            if placed {
                if var + 1 == n {
                    return Some(self.values.clone());
                }
                self.depth += 1;
                self.cursor[self.depth] = 0;
            } else {
                if var == 0 {
                    self.done = true;
                    return None;
                }
                self.depth -= 1;
            }
        }
    }
}

/// Product of domain sizes, saturating.
pub fn search_space(domains: &[FiniteDomain]) -> u128 {
    domains
        .iter()
        .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
}

/// Iterates over all supports of `AllDiffPrec(domains, graph)`.
pub fn enumerate_supports<'a>(
    graph: &'a PrecedenceGraph,
    domains: &[FiniteDomain],
    cap: u128,
) -> Result<Supports<'a>, OracleError> {
    let size = search_space(domains);
    if size > cap {
        return Err(OracleError::Explosion { size, cap });
    }
    let n = domains.len();
    let empty = domains.iter().any(FiniteDomain::is_empty);
    Ok(Supports {
        graph,
        domains: domains.iter().map(|d| d.iter().collect()).collect(),
        cursor: vec![0; n],
        values: vec![0; n],
        depth: 0,
        done: empty,
    })
}

/// Domain consistency: each domain cut down to the values that occur in some
/// support. `None` when there is no support at all.
pub fn enforce_dc(
    graph: &PrecedenceGraph,
    domains: &[FiniteDomain],
    cap: u128,
) -> Result<Option<Vec<FiniteDomain>>, OracleError> {
    let mut seen = vec![FiniteDomain::default(); domains.len()];
    let mut any = false;
    for support in enumerate_supports(graph, domains, cap)? {
        any = true;
        for (d, v) in seen.iter_mut().zip(support) {
            d.insert(v);
        }
    }
    Ok(any.then_some(seen))
}

/// Bounds-consistency ground truth: per variable, the smallest and largest
/// value used by any support inside the box `bounds`.
pub fn bound_hull(
    graph: &PrecedenceGraph,
    bounds: &[IntervalDomain],
    cap: u128,
) -> Result<Option<Vec<IntervalDomain>>, OracleError> {
    if bounds.iter().any(IntervalDomain::is_empty) {
        return Ok(None);
    }
    let boxed: Vec<FiniteDomain> = bounds
        .iter()
        .map(|b| FiniteDomain::range(b.lb, b.ub))
        .collect();
    Ok(enforce_dc(graph, &boxed, cap)?.map(|doms| doms.iter().map(FiniteDomain::bounds).collect()))
}

/// First support found, if any.
pub fn find_support(
    graph: &PrecedenceGraph,
    domains: &[FiniteDomain],
    cap: u128,
) -> Result<Option<Vec<i64>>, OracleError> {
    Ok(enumerate_supports(graph, domains, cap)?.next())
}
