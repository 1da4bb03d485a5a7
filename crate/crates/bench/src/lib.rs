//! Fixed instance families shared by the benches.

use alldiffprec::generators::planted_instance;
use alldiffprec::{IntervalDomain, PrecedenceGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` satisfiable instances with `n` variables over `[1, 2n]`, built
/// around a hidden solution so propagation does not stop at the first pass.
pub fn random_family(
    n: usize,
    count: usize,
    edge_prob: f64,
    seed: u64,
) -> Vec<(PrecedenceGraph, Vec<IntervalDomain>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
    (0..count)
        .map(|_| {
            let (inst, _) = planted_instance(&mut rng, n, 2 * n as i64, edge_prob, n as i64 / 2);
            (inst.graph, inst.bounds)
        })
        .collect()
}

/// Chain `0 -> 1 -> .. -> n-1` over `[1, n + slack]`.
pub fn chain(n: usize, slack: i64) -> (PrecedenceGraph, Vec<IntervalDomain>) {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    let graph = PrecedenceGraph::new(n, &edges).expect("chain");
    (graph, vec![IntervalDomain::new(1, n as i64 + slack); n])
}
