//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::time::Instant;

use alldiffprec::fast::{propagate_bc_with, prune_upper_bounds, Mode, SweepOptions, SweepReport};
use alldiffprec::feasibility::{greedy_bound_support, preprocess_bounds, GreedyOutcome};
use alldiffprec::generators::{
    gen_instruction_schedule, graceful_k3_p2_model, k3_p2_edges, random_dag, random_instance,
};
use alldiffprec::model::{IntervalDomain, PrecedenceGraph, PropagationOutcome};
use alldiffprec::reference::{
    conditions_prune, direct_prune, filter_binary_search, interval_counters, Side,
};
use alldiffprec::sat::{encode_3sat, Formula};
use alldiffprec::search::{solve, Model, Route, SearchConfig, SolveOutcome, VarOrder};
use alldiffprec::{decomposition, propagate_bc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn iv(pairs: &[(i64, i64)]) -> Vec<IntervalDomain> {
    pairs
        .iter()
        .map(|&(l, u)| IntervalDomain::new(l, u))
        .collect()
}

fn pairs(b: &[IntervalDomain]) -> Vec<(i64, i64)> {
    b.iter().map(|x| (x.lb, x.ub)).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const BC_ROUTES: [Route; 5] = [
    Route::Fast(Mode::FullUniverse),
    Route::Fast(Mode::Compressed),
    Route::Reference,
    Route::BinarySearch,
    Route::Decomposition,
];

fn forced_successor() -> Check {
    let g = PrecedenceGraph::new(3, &[(0, 2), (1, 2)]).unwrap();
    let b = iv(&[(1, 3), (1, 3), (2, 4)]);
    for r in BC_ROUTES {
        let out = r.propagate(&g, &b);
        let x3 = out.bounds().map(|o| o[2]);
        ensure(x3 == Some(IntervalDomain::new(3, 4)), || {
            format!("{} gave {x3:?}", r.name())
        })?;
    }
    let weak = Route::Weak.propagate(&g, &b);
    ensure(weak == PropagationOutcome::Consistent(b.clone()), || {
        format!("weak route pruned: {weak:?}")
    })?;
    Ok("every BC route gives X3 = [3,4]; AllDifferent + binary < prunes nothing".into())
}

fn diamond() -> Check {
    let g = PrecedenceGraph::new(4, &[(0, 2), (1, 2), (0, 3), (1, 3)]).unwrap();
    let pre = preprocess_bounds(&g, &iv(&[(1, 5), (1, 5), (1, 3), (2, 4)]));
    let want = iv(&[(1, 3), (1, 3), (1, 3), (2, 4)]);
    ensure(pre.bounds() == Some(&want[..]), || {
        format!("preprocessing gave {pre:?}")
    })?;
    let greedy = greedy_bound_support(&g, &want);
    ensure(
        greedy == GreedyOutcome::Assignment(vec![1, 2, 3, 4]),
        || format!("greedy gave {greedy:?}"),
    )?;
    Ok("preprocessed [1,3]x3 [2,4], greedy (1,2,3,4)".into())
}

fn pruning_case() -> Check {
    let g = PrecedenceGraph::new(3, &[(0, 1)]).unwrap();
    let b = iv(&[(1, 2), (2, 3), (1, 3)]);
    let a = direct_prune(&g, &b, 0, 2).domains;
    ensure(a == iv(&[(2, 2), (3, 3), (1, 3)]), || {
        format!("X1=2 gave {a:?}")
    })?;
    let c = direct_prune(&g, &b, 2, 1).domains;
    ensure(c == iv(&[(2, 2), (2, 3), (1, 1)]), || {
        format!("X3=1 gave {c:?}")
    })?;
    Ok("X1=2 -> {2},{3},{1..3}; X3=1 -> {2},{2,3},{1}".into())
}

fn sweep_case_and_trace() -> Check {
    let g = PrecedenceGraph::new(5, &[(0, 1), (0, 2)]).unwrap();
    let b = iv(&[(1, 5), (2, 6), (2, 6), (3, 6), (3, 6)]);
    let c = interval_counters(&g, &b, 0, Side::Upper, 3, 6);
    ensure((c.anchored, c.inside) == (2, 2), || {
        format!("counters {c:?}")
    })?;
    let golden = include_str!("golden/sweep_trace.txt");
    for mode in [Mode::FullUniverse, Mode::Compressed] {
        let opts = SweepOptions {
            mode,
            audit: true,
            trace: true,
        };
        let mut report = SweepReport::default();
        let out = prune_upper_bounds(&g, &b, &opts, &mut report);
        let steps: Vec<_> = report.trace.iter().filter(|s| s.outer == 0).collect();
        let text: String = steps.iter().map(|s| format!("{s}\n")).collect();
        ensure(text == golden, || {
            format!("{mode:?} trace differs:\n{text}")
        })?;
        ensure(steps.last().map(|s| s.b_after) == Some(3), || {
            "final b is not 3".into()
        })?;
        let x1 = out.bounds().map(|o| o[0]);
        ensure(x1 == Some(IntervalDomain::new(1, 2)), || {
            format!("X1 = {x1:?}")
        })?;
    }
    Ok("B=2 D=2 on [3,6]; five-step trace matches golden, b=3, X1=[1,2]".into())
}

/// Random instance as plain pairs for the oracle.
struct Case {
    graph: PrecedenceGraph,
    edges: Vec<(usize, usize)>,
    bounds: Vec<IntervalDomain>,
}

fn cases(seed: u64, count: usize, max_n: usize, max_d: i64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = random_instance(&mut rng, max_n, max_d, 0.3);
            Case {
                graph: r.graph,
                edges: r.edges,
                bounds: r.bounds,
            }
        })
        .collect()
}

fn expected(c: &Case) -> Option<Vec<IntervalDomain>> {
    common::hull(c.bounds.len(), &c.edges, &pairs(&c.bounds))
        .map(|h| h.iter().map(|&(l, u)| IntervalDomain::new(l, u)).collect())
}

fn route_equivalence(all: &[Case]) -> Check {
    let (mut pruned, mut failed) = (0, 0);
    for (k, c) in all.iter().enumerate() {
        let want = expected(c);
        match &want {
            None => failed += 1,
            Some(w) if *w != c.bounds => pruned += 1,
            _ => {}
        }
        let outs = [
            ("binary-search", filter_binary_search(&c.graph, &c.bounds)),
            ("conditions", conditions_prune(&c.graph, &c.bounds)),
            (
                "fast",
                propagate_bc(&c.graph, &c.bounds, Mode::FullUniverse),
            ),
            (
                "fast-compressed",
                propagate_bc(&c.graph, &c.bounds, Mode::Compressed),
            ),
        ];
        for (name, out) in outs {
            ensure(out.bounds().map(<[_]>::to_vec) == want, || {
                format!(
                    "instance {k} {name}: {out:?} vs {want:?} on {:?} {:?}",
                    c.bounds, c.edges
                )
            })?;
        }
    }
    Ok(format!(
        "{} instances agree ({pruned} pruned, {failed} failed)",
        all.len()
    ))
}

fn decomposition_equivalence() -> Check {
    let all = cases(3, 300, 6, 7);
    for (k, c) in all.iter().enumerate() {
        let d = c.bounds.iter().map(|b| b.ub).max().unwrap();
        let enc = decomposition::encode_graph(&c.graph, d);
        let got = decomposition::propagate_decomposition(&enc, &c.bounds);
        let bc = propagate_bc(&c.graph, &c.bounds, Mode::FullUniverse);
        ensure(got == bc, || {
            format!(
                "instance {k}: {got:?} vs {bc:?} on {:?} {:?}",
                c.bounds, c.edges
            )
        })?;
        let want = expected(c);
        ensure(got.bounds().map(<[_]>::to_vec) == want, || {
            format!("instance {k} differs from the oracle")
        })?;
    }
    Ok(format!(
        "{} instances: decomposition fixpoint = propagate_bc",
        all.len()
    ))
}

fn soundness() -> Check {
    let all = cases(4, 300, 6, 8);
    let mut removed = 0;
    for (k, c) in all.iter().enumerate() {
        let reach = common::closure(c.bounds.len(), &c.edges);
        let box_ = pairs(&c.bounds);
        match propagate_bc(&c.graph, &c.bounds, Mode::FullUniverse).into_bounds() {
            None => ensure(
                common::find(&reach, &common::boxed(&box_)).is_none(),
                || format!("instance {k}: failure on a satisfiable store"),
            )?,
            Some(out) => {
                for (i, (o, n)) in c.bounds.iter().zip(&out).enumerate() {
                    for v in (o.lb..n.lb).chain(n.ub + 1..=o.ub) {
                        removed += 1;
                        ensure(!common::supported(&reach, &box_, i, v), || {
                            format!("instance {k}: pruned X{}={v} has a support", i + 1)
                        })?;
                    }
                    for v in [n.lb, n.ub] {
                        ensure(common::supported(&reach, &box_, i, v), || {
                            format!("instance {k}: bound X{}={v} has no support", i + 1)
                        })?;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{} instances, {removed} pruned values all unsupported, all bounds supported",
        all.len()
    ))
}

fn random_formula(rng: &mut ChaCha8Rng) -> Formula {
    let n = rng.gen_range(1..=4u32);
    let m = rng.gen_range(1..=5usize);
    let clauses = (0..m)
        .map(|_| loop {
            let c: Vec<i32> = (0..3)
                .map(|_| {
                    let v = rng.gen_range(1..=n) as i32;
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            if !c.iter().any(|&a| c.contains(&-a)) {
                break c;
            }
        })
        .collect();
    Formula::new(n, clauses)
}

fn reduction() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut formulas: Vec<Formula> = (0..48).map(|_| random_formula(&mut rng)).collect();
    formulas.push(Formula::new(1, vec![vec![1, 1, 1], vec![-1, -1, -1]]));
    formulas.push(Formula::new(1, vec![vec![1, 1, 1]]));
    let mut sat = 0;
    for (k, f) in formulas.iter().enumerate() {
        let inst = encode_3sat(f).map_err(|e| e.to_string())?;
        let edges: Vec<_> = inst.graph().edges().collect();
        let has_out: Vec<bool> = (0..inst.len())
            .map(|v| edges.iter().any(|&(a, _)| a == v))
            .collect();
        ensure(edges.iter().all(|&(_, b)| !has_out[b]), || {
            format!("formula {k}: DAG not flat")
        })?;
        let reach = common::closure(inst.len(), &edges);
        let doms: Vec<Vec<i64>> = inst.domains().iter().map(|d| d.iter().collect()).collect();
        let support = common::find(&reach, &doms).is_some();
        let truth = common::truth_table(f.num_vars, &f.clauses);
        ensure(support == truth, || {
            format!(
                "formula {k} {:?}: support {support}, sat {truth}",
                f.clauses
            )
        })?;
        sat += usize::from(truth);
    }
    Ok(format!(
        "{} formulas ({sat} sat, {} unsat) agree; every DAG flat",
        formulas.len(),
        formulas.len() - sat
    ))
}

fn sweep_reports(all: &[Case]) -> Vec<(usize, SweepReport)> {
    let mut out = Vec::new();
    for c in all {
        for mode in [Mode::FullUniverse, Mode::Compressed] {
            let opts = SweepOptions {
                mode,
                audit: true,
                trace: false,
            };
            let mut r = SweepReport::default();
            propagate_bc_with(&c.graph, &c.bounds, &opts, &mut r);
            out.push((c.bounds.len(), r));
        }
    }
    out
}

fn counters(all: &[Case], reports: &[(usize, SweepReport)]) -> Check {
    let mut max_fwd = 0;
    let mut max_back = 0;
    for (k, (n, r)) in reports.iter().enumerate() {
        let c = &all[k / 2];
        let d = c.bounds.iter().map(|b| b.ub).max().unwrap()
            - c.bounds.iter().map(|b| b.lb).min().unwrap()
            + 1;
        ensure(r.budget_violations == 0, || {
            format!("instance {}: budget exceeded", k / 2)
        })?;
        ensure(
            r.max_forward_steps <= d as u64 && r.max_backward_steps <= *n as u64,
            || {
                format!(
                    "instance {}: steps {} / {}",
                    k / 2,
                    r.max_forward_steps,
                    r.max_backward_steps
                )
            },
        )?;
        if k % 2 == 1 {
            ensure(r.max_universe <= n + 1, || {
                format!("instance {}: universe {} > n+1", k / 2, r.max_universe)
            })?;
        }
        max_fwd = max_fwd.max(r.max_forward_steps);
        max_back = max_back.max(r.max_backward_steps);
    }
    Ok(format!("forward <= d, backward <= n, compressed universe <= n+1 (max fwd {max_fwd}, max back {max_back})"))
}

fn audit(reports: &[(usize, SweepReport)]) -> Check {
    let checks: u64 = reports.iter().map(|(_, r)| r.invariant_checks).sum();
    let bad: u64 = reports.iter().map(|(_, r)| r.invariant_violations).sum();
    ensure(checks > 0 && bad == 0, || {
        format!("{bad} violations in {checks} checks")
    })?;
    Ok(format!("{checks} invariant checks, 0 violations"))
}

fn applications() -> Check {
    let m = graceful_k3_p2_model();
    let r = solve(&m, &SearchConfig::default());
    let SolveOutcome::Solution(v) = &r.outcome else {
        return Err(format!("graceful model: {:?}", r.outcome));
    };
    ensure(common::graceful(&k3_p2_edges(), &v[..6]), || {
        format!("labels {:?} not graceful", &v[..6])
    })?;
    let zs = &v[6..];
    for (a, b) in [(0, 1), (0, 3), (0, 4), (0, 5), (1, 2)] {
        ensure(zs[a] < zs[b], || format!("Z{a} < Z{b} violated"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 10;
    let deps = random_dag(&mut rng, n, 0.3);
    let inst = gen_instruction_schedule(n, &deps, None).map_err(|e| e.to_string())?;
    let cfg = SearchConfig {
        var_order: VarOrder::Topological,
        ..SearchConfig::default()
    };
    let r = solve(&Model::from_instance(&inst), &cfg);
    let SolveOutcome::Solution(s) = &r.outcome else {
        return Err(format!("schedule: {:?}", r.outcome));
    };
    let mut sorted = s.clone();
    sorted.sort_unstable();
    ensure(sorted == (1..=n as i64).collect::<Vec<_>>(), || {
        format!("slots {s:?}")
    })?;
    ensure(deps.iter().all(|&(a, b)| s[a] < s[b]), || {
        format!("schedule {s:?} breaks a dependence")
    })?;
    Ok(format!(
        "K3xP2 labelled {:?}; 10-instruction schedule ({} deps) {:?}",
        &v[..6],
        deps.len(),
        s
    ))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: &str, f: &dyn Fn() -> Check| {
        let t = Instant::now();
        let res = f();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("PASS {id}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {id}: {msg} [{secs:.1}s]");
            }
        }
    };
    report("1a forced-successor", &forced_successor);
    report("1b diamond", &diamond);
    report("1c direct-pruning", &pruning_case);
    report("1d sweep-trace", &sweep_case_and_trace);
    let fuzz = cases(1, 1000, 7, 9);
    report("2 bc-route-equivalence", &|| route_equivalence(&fuzz));
    report("3 decomposition-equivalence", &decomposition_equivalence);
    report("4 bc-soundness", &soundness);
    report("5 sat-reduction", &reduction);
    let reports = sweep_reports(&fuzz);
    report("6 complexity-counters", &|| counters(&fuzz, &reports));
    report("7 invariant-audit", &|| audit(&reports));
    report("8 applications", &applications);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
