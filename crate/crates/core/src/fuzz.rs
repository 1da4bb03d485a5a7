//! Differential driver: every bounds route against the exhaustive hull, plus
//! the sweep's step budgets, invariant audit and universe size.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dc::{bound_hull, enforce_dc};
use crate::fast::{propagate_bc_with, Mode, SweepOptions, SweepReport};
use crate::generators::random_instance;
use crate::model::{FiniteDomain, IntervalDomain, PrecedenceGraph, PropagationOutcome};
use crate::search::Route;

/// Anything that maps a store to a fixpoint.
pub trait BoundsRoute {
    fn name(&self) -> String;
    fn run(&self, graph: &PrecedenceGraph, bounds: &[IntervalDomain]) -> PropagationOutcome;
}

impl BoundsRoute for Route {
    fn name(&self) -> String {
        Route::name(*self).to_string()
    }

    fn run(&self, graph: &PrecedenceGraph, bounds: &[IntervalDomain]) -> PropagationOutcome {
        self.propagate(graph, bounds)
    }
}

/// The routes that must agree with the hull.
pub fn standard_routes() -> Vec<Box<dyn BoundsRoute>> {
    vec![
        Box::new(Route::BinarySearch),
        Box::new(Route::Reference),
        Box::new(Route::Fast(Mode::FullUniverse)),
        Box::new(Route::Fast(Mode::Compressed)),
        Box::new(Route::Decomposition),
    ]
}

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub seed: u64,
    pub count: usize,
    pub max_n: usize,
    pub max_d: i64,
    pub edge_prob: f64,
    pub cap: u128,
    /// Also compare against domain consistency.
    pub check_dc: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            count: 1000,
            max_n: 7,
            max_d: 9,
            edge_prob: 0.3,
            cap: crate::dc::DEFAULT_CAP,
            check_dc: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscrepancyKind {
    /// Route fixpoint differs from the hull of supports.
    Mismatch {
        expected: Option<Vec<IntervalDomain>>,
        got: Option<Vec<IntervalDomain>>,
    },
    /// A DC domain reaches outside the BC bounds, or BC fails where DC does not.
    DcNotDominated,
    BudgetExceeded,
    InvariantViolated(u64),
    UniverseTooLarge {
        universe: usize,
        limit: usize,
    },
    Oracle(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discrepancy {
    pub instance: usize,
    pub route: String,
    pub edges: Vec<(usize, usize)>,
    pub bounds: Vec<IntervalDomain>,
    pub kind: DiscrepancyKind,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b: Vec<String> = self.bounds.iter().map(ToString::to_string).collect();
        write!(
            f,
            "instance {} route {}: {:?} on {} edges {:?}",
            self.instance,
            self.route,
            self.kind,
            b.join(" "),
            self.edges
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub instances: usize,
    pub pruned: usize,
    pub failed: usize,
    pub sweep: SweepReport,
    pub discrepancies: Vec<Discrepancy>,
}

impl FuzzReport {
    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "instances={} pruned={} failed={} discrepancies={} max_fwd={} max_back={} audits={} max_universe={}",
            self.instances,
            self.pruned,
            self.failed,
            self.discrepancies.len(),
            self.sweep.max_forward_steps,
            self.sweep.max_backward_steps,
            self.sweep.invariant_checks,
            self.sweep.max_universe,
        )
    }
}

fn merge(into: &mut SweepReport, r: &SweepReport) {
    into.outer_iterations += r.outer_iterations;
    into.max_forward_steps = into.max_forward_steps.max(r.max_forward_steps);
    into.max_backward_steps = into.max_backward_steps.max(r.max_backward_steps);
    into.budget_violations += r.budget_violations;
    into.invariant_checks += r.invariant_checks;
    into.invariant_violations += r.invariant_violations;
    into.max_universe = into.max_universe.max(r.max_universe);
    into.max_n_plus_one = into.max_n_plus_one.max(r.max_n_plus_one);
    into.finds += r.finds;
    into.unions += r.unions;
}

/// Runs `routes` on `config.count` seeded random instances.
pub fn fuzz_differential_with(config: &FuzzConfig, routes: &[Box<dyn BoundsRoute>]) -> FuzzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut report = FuzzReport::default();
    for idx in 0..config.count {
        let inst = random_instance(&mut rng, config.max_n, config.max_d, config.edge_prob);
        let g = &inst.graph;
        let b = &inst.bounds;
        report.instances += 1;
        let mut flag = |route: &str, kind| {
            report.discrepancies.push(Discrepancy {
                instance: idx,
                route: route.to_string(),
                edges: inst.edges.clone(),
                bounds: b.clone(),
                kind,
            })
        };
        let hull = match bound_hull(g, b, config.cap) {
            Ok(h) => h,
            Err(e) => {
                flag("oracle", DiscrepancyKind::Oracle(e.to_string()));
                continue;
            }
        };
        for r in routes {
            let got = r.run(g, b).into_bounds();
            if got != hull {
                flag(
                    &r.name(),
                    DiscrepancyKind::Mismatch {
                        expected: hull.clone(),
                        got,
                    },
                );
            }
        }
        for mode in [Mode::FullUniverse, Mode::Compressed] {
            let opts = SweepOptions {
                mode,
                audit: true,
                trace: false,
            };
            let mut sweep = SweepReport::default();
            let bc = propagate_bc_with(g, b, &opts, &mut sweep).into_bounds();
            let name = Route::Fast(mode).name();
            if sweep.budget_violations > 0 {
                flag(name, DiscrepancyKind::BudgetExceeded);
            }
            if sweep.invariant_violations > 0 {
                flag(
                    name,
                    DiscrepancyKind::InvariantViolated(sweep.invariant_violations),
                );
            }
            if mode == Mode::Compressed && sweep.max_universe > sweep.max_n_plus_one {
                flag(
                    name,
                    DiscrepancyKind::UniverseTooLarge {
                        universe: sweep.max_universe,
                        limit: sweep.max_n_plus_one,
                    },
                );
            }
            if mode == Mode::FullUniverse {
                if config.check_dc {
                    let boxed: Vec<FiniteDomain> =
                        b.iter().map(|x| FiniteDomain::range(x.lb, x.ub)).collect();
                    let dc = enforce_dc(g, &boxed, config.cap).unwrap_or(None);
                    if !dc_dominates(dc.as_deref(), bc.as_deref()) {
                        flag(name, DiscrepancyKind::DcNotDominated);
                    }
                }
                match &bc {
                    None => report.failed += 1,
                    Some(out) if out != b => report.pruned += 1,
                    _ => {}
                }
            }
            merge(&mut report.sweep, &sweep);
        }
    }
    report
}

pub fn fuzz_differential(config: &FuzzConfig) -> FuzzReport {
    fuzz_differential_with(config, &standard_routes())
}

/// Every DC domain inside the BC bounds, and BC failure implies DC failure.
pub fn dc_dominates(dc: Option<&[FiniteDomain]>, bc: Option<&[IntervalDomain]>) -> bool {
    match (dc, bc) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(dc), Some(bc)) => dc
            .iter()
            .zip(bc)
            .all(|(d, b)| d.iter().all(|v| b.contains(v))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct LoosensUpper;

    impl BoundsRoute for LoosensUpper {
        fn name(&self) -> String {
            "corrupted".into()
        }

        fn run(&self, graph: &PrecedenceGraph, bounds: &[IntervalDomain]) -> PropagationOutcome {
            // forgets the last pruned upper bound
            match Route::Fast(Mode::FullUniverse).propagate(graph, bounds) {
                PropagationOutcome::Consistent(mut out) => {
                    if let Some(i) = (0..out.len()).rev().find(|&i| out[i].ub < bounds[i].ub) {
                        out[i].ub = bounds[i].ub;
                    }
                    PropagationOutcome::Consistent(out)
                }
                f => f,
            }
        }
    }

    fn small() -> FuzzConfig {
        FuzzConfig {
            count: 60,
            max_n: 5,
            max_d: 6,
            ..FuzzConfig::default()
        }
    }

    #[test]
    fn empty_run() {
        let r = fuzz_differential(&FuzzConfig {
            count: 0,
            ..FuzzConfig::default()
        });
        assert_eq!(r.instances, 0);
        assert!(r.is_clean());
    }

    #[test]
    fn small_run_is_clean() {
        let r = fuzz_differential(&small());
        assert_eq!(r.instances, 60);
        assert!(r.is_clean(), "{:?}", r.discrepancies.first());
    }

    #[test]
    fn corrupted_route_is_caught() {
        let routes: Vec<Box<dyn BoundsRoute>> = vec![Box::new(LoosensUpper)];
        let r = fuzz_differential_with(&small(), &routes);
        assert!(!r.is_clean());
        assert!(r.discrepancies.iter().all(|d| d.route == "corrupted"));
    }

    #[test]
    fn domination() {
        let dc = vec![FiniteDomain::new([1, 3])];
        assert!(dc_dominates(Some(&dc), Some(&[IntervalDomain::new(1, 3)])));
        assert!(!dc_dominates(Some(&dc), Some(&[IntervalDomain::new(1, 2)])));
        assert!(!dc_dominates(Some(&dc), None));
        assert!(dc_dominates(None, None));
    }
}
