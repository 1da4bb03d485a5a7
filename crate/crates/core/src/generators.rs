//! Random instances and the two application models: instruction scheduling
//! and graceful labelling with first-occurrence variables.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{
    build_instance, FiniteDomain, Instance, IntervalDomain, ModelError, PrecedenceGraph, Wipeout,
};
use crate::search::{Model, SideConstraint};

/// Random DAG on `n` nodes: each pair is an edge with probability `p`,
/// oriented along a random permutation.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((perm[a], perm[b]));
            }
        }
    }
    edges
}

/// `n` random intervals inside `[1, d]`.
pub fn random_bounds<R: Rng>(rng: &mut R, n: usize, d: i64) -> Vec<IntervalDomain> {
    (0..n)
        .map(|_| {
            let a = rng.gen_range(1..=d);
            let b = rng.gen_range(1..=d);
            IntervalDomain::new(a.min(b), a.max(b))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub graph: PrecedenceGraph,
    pub edges: Vec<(usize, usize)>,
    pub bounds: Vec<IntervalDomain>,
    pub d: i64,
}

/// `n` in `1..=max_n`, `d` in `n..=max_d` (or just `max_d` when `n` is
/// larger), random DAG and intervals.
pub fn random_instance<R: Rng>(rng: &mut R, max_n: usize, max_d: i64, p: f64) -> RandomInstance {
    let n = rng.gen_range(1..=max_n);
    let d = rng.gen_range((n as i64).min(max_d)..=max_d);
    let edges = random_dag(rng, n, p);
    let graph = PrecedenceGraph::new(n, &edges).expect("edges follow a permutation");
    let bounds = random_bounds(rng, n, d);
    RandomInstance {
        graph,
        edges,
        bounds,
        d,
    }
}

/// Satisfiable instance around a hidden solution: `n` distinct values in
/// `[1, d]`, edges only from smaller to larger hidden value, and each interval
/// stretched up to `width` on either side of its value. Returns the hidden
/// solution as well.
pub fn planted_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    d: i64,
    p: f64,
    width: i64,
) -> (RandomInstance, Vec<i64>) {
    assert!(d >= n as i64, "need d >= n for distinct values");
    let mut values: Vec<i64> = (1..=d).collect();
    values.shuffle(rng);
    values.truncate(n);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if values[a] < values[b] && rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    let graph = PrecedenceGraph::new(n, &edges).expect("edges follow the hidden values");
    let bounds = values
        .iter()
        .map(|&v| {
            IntervalDomain::new(
                (v - rng.gen_range(0..=width)).max(1),
                (v + rng.gen_range(0..=width)).min(d),
            )
        })
        .collect();
    (
        RandomInstance {
            graph,
            edges,
            bounds,
            d,
        },
        values,
    )
}

/// One variable per instruction with domain `[1, n]`, or the given release
/// and due window; dependence edges become precedences.
pub fn gen_instruction_schedule(
    n: usize,
    deps: &[(usize, usize)],
    windows: Option<&[(i64, i64)]>,
) -> Result<Instance, ModelError> {
    let domains = match windows {
        Some(w) => {
            assert_eq!(w.len(), n, "one window per instruction");
            w.iter().map(|&(r, d)| FiniteDomain::range(r, d)).collect()
        }
        None => vec![FiniteDomain::range(1, n as i64); n],
    };
    build_instance(domains, deps)
}

/// `K3 x P2`: two triangles `0 1 2` and `3 4 5` joined by rungs `i -- i+3`.
pub fn k3_p2_edges() -> Vec<(usize, usize)> {
    vec![
        (0, 1),
        (1, 2),
        (0, 2),
        (3, 4),
        (4, 5),
        (3, 5),
        (0, 3),
        (1, 4),
        (2, 5),
    ]
}

/// Vertex labels distinct in `0..=e` and edge labels `|l_a - l_b|` distinct.
pub fn is_graceful(n: usize, edges: &[(usize, usize)], labels: &[i64]) -> bool {
    let e = edges.len() as i64;
    if labels.len() != n || labels.iter().any(|&l| !(0..=e).contains(&l)) {
        return false;
    }
    let mut seen = vec![false; e as usize + 1];
    for &l in labels {
        if std::mem::replace(&mut seen[l as usize], true) {
            return false;
        }
    }
    let mut diffs = vec![false; e as usize + 1];
    for &(a, b) in edges {
        let d = (labels[a] - labels[b]).abs();
        if d == 0 || std::mem::replace(&mut diffs[d as usize], true) {
            return false;
        }
    }
    true
}

/// Edge labels of a labelling must be pairwise distinct.
#[derive(Debug, Clone)]
pub struct DistinctDifferences {
    pub edges: Vec<(usize, usize)>,
}

impl DistinctDifferences {
    fn diff_range(&self, bounds: &[IntervalDomain], (a, b): (usize, usize)) -> (i64, i64) {
        let (x, y) = (bounds[a], bounds[b]);
        let hi = (x.ub - y.lb).max(y.ub - x.lb);
        let lo = if x.ub < y.lb {
            y.lb - x.ub
        } else if y.ub < x.lb {
            x.lb - y.ub
        } else {
            0
        };
        (lo, hi)
    }
}

impl SideConstraint for DistinctDifferences {
    fn name(&self) -> &str {
        "distinct-differences"
    }

    fn propagate(&self, bounds: &mut [IntervalDomain]) -> Result<bool, Wipeout> {
        let ranges: Vec<_> = self
            .edges
            .iter()
            .map(|&e| self.diff_range(bounds, e))
            .collect();
        for (k, &(lo, hi)) in ranges.iter().enumerate() {
            if hi < 1 {
                return Err(Wipeout);
            }
            if lo != hi {
                continue;
            }
            if ranges[k + 1..].iter().any(|&(l, h)| l == h && l == lo) {
                return Err(Wipeout);
            }
        }
        Ok(false)
    }

    fn check(&self, values: &[i64]) -> bool {
        let mut diffs: Vec<i64> = self
            .edges
            .iter()
            .map(|&(a, b)| (values[a] - values[b]).abs())
            .collect();
        diffs.sort_unstable();
        diffs.windows(2).all(|w| w[0] != w[1])
    }
}

/// `X_i = j => Z_j <= i` and `Z_j = i => X_i = j`, for label variables `x`
/// and first-occurrence variables `z`. `Z_j >= n` marks label `j` as unused.
#[derive(Debug, Clone)]
pub struct FirstOccurrence {
    pub x: Vec<usize>,
    pub z: Vec<usize>,
}

impl SideConstraint for FirstOccurrence {
    fn name(&self) -> &str {
        "first-occurrence"
    }

    fn propagate(&self, bounds: &mut [IntervalDomain]) -> Result<bool, Wipeout> {
        let n = self.x.len() as i64;
        let mut changed = false;
        for (i, &xv) in self.x.iter().enumerate() {
            let xb = bounds[xv];
            if xb.is_fixed() {
                let zv = self.z[xb.lb as usize];
                if bounds[zv].ub > i as i64 {
                    bounds[zv].ub = i as i64;
                    changed = true;
                }
            }
        }
        for (j, &zv) in self.z.iter().enumerate() {
            let zb = bounds[zv];
            if !zb.is_fixed() {
                continue;
            }
            let j = j as i64;
            if zb.lb < n {
                let xv = self.x[zb.lb as usize];
                if bounds[xv] != IntervalDomain::singleton(j) {
                    changed = true;
                    bounds[xv].lb = bounds[xv].lb.max(j);
                    bounds[xv].ub = bounds[xv].ub.min(j);
                }
            } else {
                // label j unused: trim it off any bound it sits on
                for &xv in &self.x {
                    if bounds[xv].lb == j {
                        bounds[xv].lb += 1;
                        changed = true;
                    }
                    if bounds[xv].ub == j {
                        bounds[xv].ub -= 1;
                        changed = true;
                    }
                }
            }
        }
        if self.x.iter().chain(&self.z).any(|&v| bounds[v].is_empty()) {
            return Err(Wipeout);
        }
        Ok(changed)
    }

    fn check(&self, values: &[i64]) -> bool {
        let n = self.x.len() as i64;
        self.z.iter().enumerate().all(|(j, &zv)| {
            let first = self.x.iter().position(|&xv| values[xv] == j as i64);
            match first {
                Some(i) => values[zv] == i as i64,
                None => values[zv] >= n,
            }
        })
    }
}

/// Graceful labelling of `K3 x P2` with value symmetry broken through
/// first-occurrence variables `Z_0..=Z_e`, which carry an `AllDiffPrec`
/// with `Z0<Z1, Z0<Z3, Z0<Z4, Z0<Z5, Z1<Z2`.
///
/// Variables `0..6` are the vertex labels, `6..6+e+1` the `Z_j`.
pub fn graceful_k3_p2_model() -> Model {
    let edges = k3_p2_edges();
    let n = 6;
    let e = edges.len() as i64;
    let mut m = Model::new();
    let x: Vec<usize> = (0..n)
        .map(|i| {
            m.add_var(format!("X{i}"), FiniteDomain::range(0, e))
                .unwrap()
        })
        .collect();
    // unused labels take distinct values above n - 1
    let z: Vec<usize> = (0..=e)
        .map(|j| {
            m.add_var(format!("Z{j}"), FiniteDomain::range(0, n as i64 + e))
                .unwrap()
        })
        .collect();
    m.post_alldiffprec(&x, &[]).unwrap();
    m.post_alldiffprec(&z, &[(0, 1), (0, 3), (0, 4), (0, 5), (1, 2)])
        .unwrap();
    m.post(Box::new(FirstOccurrence { x, z }));
    m.post(Box::new(DistinctDifferences { edges }));
    m
}
