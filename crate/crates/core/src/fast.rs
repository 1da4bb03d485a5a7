//! The efficient bounds-consistency propagator.
//!
//! For every variable `X_i` the other variables are swept in non-decreasing
//! order of upper bound. Non-successors of `X_i` claim the smallest
//! available value at or above their lower bound; a pointer `b` is kept at
//! the smallest value such that `[b, max(X_j) + 1)` holds exactly as many
//! available values as successors of `X_i` seen so far. Any value of `X_i`
//! at or above `b` would leave those successors without room, so the upper
//! bound of `X_i` is clamped to `b - 1`. Lower bounds are pruned by running
//! the same sweep on the mirrored problem (values negated, edges reversed).
//!
//! Availability is tracked either over every value (`FullUniverse`) or over
//! blocks between consecutive lower bounds (`Compressed`); both answer the
//! same queries and must give identical results.

use std::fmt;

use crate::model::{IntervalDomain, PrecedenceGraph, PropagationOutcome, Wipeout};
use crate::passes::{alldiff_fixpoint, precedence_pass};
use crate::union_find::IntervalUnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    FullUniverse,
    Compressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub mode: Mode,
    /// Re-derive the pointer invariant from scratch after every inner step.
    pub audit: bool,
    /// Record one [`TraceStep`] per inner step.
    pub trace: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            mode: Mode::FullUniverse,
            audit: cfg!(debug_assertions),
            trace: false,
        }
    }
}

impl SweepOptions {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

/// Which bound a sweep prunes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    /// Runs on mirrored values; traced values are mirrored too.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepAction {
    /// The outer variable itself: it claims nothing.
    Outer,
    Successor,
    Claim {
        value: i64,
        run_start: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub side: Side,
    pub outer: usize,
    pub var: usize,
    pub action: StepAction,
    pub b_before: i64,
    pub b_after: i64,
    pub forward: u64,
    pub backward: u64,
    /// New upper bound of the outer variable when this step tightened it.
    pub clamp: Option<i64>,
}

impl fmt::Display for TraceStep {
    /// `upper i=1 j=4 claim=3 b=5->5 fwd=0 back=0`, indices one-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Upper => "upper",
            Side::Lower => "lower",
        };
        write!(f, "{side} i={} j={} ", self.outer + 1, self.var + 1)?;
        match self.action {
            StepAction::Outer => write!(f, "outer")?,
            StepAction::Successor => write!(f, "succ")?,
            StepAction::Claim { value, .. } => write!(f, "claim={value}")?,
        }
        write!(
            f,
            " b={}->{} fwd={} back={}",
            self.b_before, self.b_after, self.forward, self.backward
        )?;
        if let Some(ub) = self.clamp {
            write!(f, " ub={ub}")?;
        }
        Ok(())
    }
}

/// Counters collected across sweeps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepReport {
    pub outer_iterations: u64,
    pub max_forward_steps: u64,
    pub max_backward_steps: u64,
    /// Outer iterations whose forward steps exceeded `d` or backward steps
    /// exceeded `n`.
    pub budget_violations: u64,
    pub invariant_checks: u64,
    pub invariant_violations: u64,
    /// Largest union-find universe allocated by a sweep.
    pub max_universe: usize,
    /// Largest `n + 1` seen, for comparing against `max_universe`.
    pub max_n_plus_one: usize,
    pub finds: u64,
    pub unions: u64,
    pub trace: Vec<TraceStep>,
}

/// Free/taken bookkeeping behind the sweep.
///
/// `next_free(x)` is the largest element of the run containing `x` and
/// `run_start(x)` its smallest; a run is a stretch of taken values ending in
/// one free value.
trait Availability {
    fn next_free(&mut self, x: i64) -> i64;
    fn run_start(&mut self, x: i64) -> i64;
    fn claim(&mut self, c: i64);
    fn universe(&self) -> usize;
    fn operations(&self) -> (u64, u64);
}

/// One element per value in `0..=d + 1`; 0 and `d + 1` are sentinels.
struct FullAvailability {
    uf: IntervalUnionFind,
}

impl FullAvailability {
    fn new(d: i64) -> Self {
        Self {
            uf: IntervalUnionFind::new(d as usize + 2),
        }
    }
}

impl Availability for FullAvailability {
    fn next_free(&mut self, x: i64) -> i64 {
        self.uf.find_max(x as usize) as i64
    }

    fn run_start(&mut self, x: i64) -> i64 {
        self.uf.find_min(x as usize) as i64
    }

    fn claim(&mut self, c: i64) {
        self.uf.union(c as usize, c as usize + 1);
    }

    fn universe(&self) -> usize {
        self.uf.len()
    }

    fn operations(&self) -> (u64, u64) {
        self.uf.operations()
    }
}

/// Blocks `[l_k, l_{k+1})` between consecutive distinct lower bounds, the
/// last one ending at `d + 2`. Claims fill a block from its left end, so a
/// counter of free slots describes it completely. Two union-finds over the
/// blocks find the nearest non-full block on either side.
struct CompressedAvailability {
    starts: Vec<i64>,
    end: i64,
    free: Vec<i64>,
    /// Block `k` is element `k`; a full block is merged with its right
    /// neighbour, so `find_max` is the first non-full block.
    right: IntervalUnionFind,
    /// Block `k` is element `k + 1` and element 0 stands for the values
    /// below the first block; a full block is merged with its left neighbour.
    left: IntervalUnionFind,
}

impl CompressedAvailability {
    fn new(lower_bounds: &[i64], d: i64) -> Self {
        let mut starts = lower_bounds.to_vec();
        starts.sort_unstable();
        starts.dedup();
        let end = d + 2;
        let m = starts.len();
        let free = (0..m)
            .map(|k| starts.get(k + 1).copied().unwrap_or(end) - starts[k])
            .collect();
        Self {
            starts,
            end,
            free,
            right: IntervalUnionFind::new(m),
            left: IntervalUnionFind::new(m + 1),
        }
    }

    fn block_end(&self, k: usize) -> i64 {
        self.starts.get(k + 1).copied().unwrap_or(self.end)
    }

    fn first_free_in(&self, k: usize) -> i64 {
        self.block_end(k) - self.free[k]
    }

    fn block_of(&self, x: i64) -> Option<usize> {
        let p = self.starts.partition_point(|&s| s <= x);
        p.checked_sub(1)
    }

    fn prev_free(&mut self, x: i64) -> i64 {
        let Some(k) = self.block_of(x) else {
            return x;
        };
        if self.free[k] > 0 && x >= self.first_free_in(k) {
            return x;
        }
        match self.left.find_min(k) {
            0 => self.starts[0] - 1,
            t => self.block_end(t - 1) - 1,
        }
    }
}

impl Availability for CompressedAvailability {
    fn next_free(&mut self, x: i64) -> i64 {
        let Some(k) = self.block_of(x) else {
            return x;
        };
        let first = self.right.find_max(k);
        if first == k {
            x.max(self.first_free_in(k))
        } else {
            self.first_free_in(first)
        }
    }

    fn run_start(&mut self, x: i64) -> i64 {
        let f = self.next_free(x);
        self.prev_free(f - 1) + 1
    }

    fn claim(&mut self, c: i64) {
        let k = self
            .block_of(c)
            .expect("claims land at or above the smallest lower bound");
        debug_assert_eq!(c, self.first_free_in(k));
        self.free[k] -= 1;
        if self.free[k] == 0 {
            self.right.union(k, k + 1);
            self.left.union(k, k + 1);
        }
    }

    fn universe(&self) -> usize {
        self.right.len().max(self.left.len())
    }

    fn operations(&self) -> (u64, u64) {
        let (f1, u1) = self.right.operations();
        let (f2, u2) = self.left.operations();
        (f1 + f2, u1 + u2)
    }
}

/// Core sweep on normalized bounds (`lb >= 1`). `related(i, j)` says whether
/// `X_j` must lie above `X_i`. Returns the clamped upper bound of every
/// variable.
fn sweep(
    bounds: &[IntervalDomain],
    related: impl Fn(usize, usize) -> bool,
    side: Side,
    opts: &SweepOptions,
    report: &mut SweepReport,
) -> Result<Vec<i64>, Wipeout> {
    let n = bounds.len();
    let mut new_ub: Vec<i64> = bounds.iter().map(|b| b.ub).collect();
    if n == 0 {
        return Ok(new_ub);
    }
    let d = bounds.iter().map(|b| b.ub).max().unwrap_or(0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| (bounds[j].ub, j));
    let lows: Vec<i64> = bounds.iter().map(|b| b.lb).collect();
    report.max_n_plus_one = report.max_n_plus_one.max(n + 1);

    for i in 0..n {
        report.outer_iterations += 1;
        let mut avail: Box<dyn Availability> = match opts.mode {
            Mode::FullUniverse => Box::new(FullAvailability::new(d)),
            Mode::Compressed => Box::new(CompressedAvailability::new(&lows, d)),
        };
        report.max_universe = report.max_universe.max(avail.universe());
        // Independent record of claimed values for the audit.
        let mut taken = if opts.audit {
            vec![false; d as usize + 2]
        } else {
            Vec::new()
        };

        let first_ub = bounds[order[0]].ub;
        let mut b = first_ub + 1;
        let mut prev_ub = first_ub;
        let mut successors_seen = 0i64;
        let (mut forward, mut backward) = (0u64, 0u64);
        let mut outcome = Ok(());

        for &j in &order {
            let b_before = b;
            let (fwd0, back0) = (forward, backward);
            // Forward steps come before the claim so the claim is judged
            // against a pointer that already covers max(X_j).
            for _ in 0..(bounds[j].ub - prev_ub) {
                b = avail.next_free(b) + 1;
                forward += 1;
            }
            let action = if j == i {
                StepAction::Outer
            } else if related(i, j) {
                successors_seen += 1;
                StepAction::Successor
            } else {
                let c = avail.next_free(bounds[j].lb);
                if c > bounds[j].ub {
                    outcome = Err(Wipeout);
                    break;
                }
                let v = avail.run_start(bounds[j].lb);
                avail.claim(c);
                if opts.audit {
                    taken[c as usize] = true;
                }
                StepAction::Claim {
                    value: c,
                    run_start: v,
                }
            };

            let back = match action {
                StepAction::Successor => true,
                StepAction::Claim { run_start: v, .. } => {
                    avail.next_free(v) == avail.next_free(b) || v > b
                }
                StepAction::Outer => false,
            };
            if back {
                if b < 1 {
                    outcome = Err(Wipeout);
                    break;
                }
                b = avail.run_start(b - 1);
                backward += 1;
            }
            prev_ub = bounds[j].ub;
            if b < 1 {
                // more successors than free values below max(X_j)
                outcome = Err(Wipeout);
                break;
            }

            if opts.audit {
                report.invariant_checks += 1;
                let ub_j = bounds[j].ub;
                let available = (b..=ub_j).filter(|&x| !taken[x as usize]).count() as i64;
                let minimal = !taken[(b - 1) as usize];
                if available != successors_seen || !minimal {
                    report.invariant_violations += 1;
                }
            }

            let mut clamp = None;
            if bounds[j].ub >= bounds[i].ub && b - 1 < new_ub[i] {
                new_ub[i] = b - 1;
                clamp = Some(b - 1);
            }
            if opts.trace {
                report.trace.push(TraceStep {
                    side,
                    outer: i,
                    var: j,
                    action,
                    b_before,
                    b_after: b,
                    forward: forward - fwd0,
                    backward: backward - back0,
                    clamp,
                });
            }
            if new_ub[i] < bounds[i].lb {
                outcome = Err(Wipeout);
                break;
            }
        }

        let (f, u) = avail.operations();
        report.finds += f;
        report.unions += u;
        report.max_forward_steps = report.max_forward_steps.max(forward);
        report.max_backward_steps = report.max_backward_steps.max(backward);
        if forward > d as u64 || backward > n as u64 {
            report.budget_violations += 1;
        }
        outcome?;
    }
    Ok(new_ub)
}

/// Shifts bounds so the smallest lower bound is 1; returns the shift.
fn normalized(bounds: &[IntervalDomain]) -> (Vec<IntervalDomain>, i64) {
    let shift = 1 - bounds.iter().map(|b| b.lb).min().unwrap_or(1);
    let out = bounds
        .iter()
        .map(|b| IntervalDomain::new(b.lb + shift, b.ub + shift))
        .collect();
    (out, shift)
}

fn upper_in_place(
    graph: &PrecedenceGraph,
    bounds: &mut [IntervalDomain],
    opts: &SweepOptions,
    report: &mut SweepReport,
) -> Result<bool, Wipeout> {
    let (norm, shift) = normalized(bounds);
    let ubs = sweep(
        &norm,
        |i, j| graph.precedes(i, j),
        Side::Upper,
        opts,
        report,
    )?;
    let mut changed = false;
    for (b, ub) in bounds.iter_mut().zip(ubs) {
        let ub = ub - shift;
        if ub < b.ub {
            b.ub = ub;
            changed = true;
        }
    }
    Ok(changed)
}

fn lower_in_place(
    graph: &PrecedenceGraph,
    bounds: &mut [IntervalDomain],
    opts: &SweepOptions,
    report: &mut SweepReport,
) -> Result<bool, Wipeout> {
    let (norm, _) = normalized(bounds);
    let d = norm.iter().map(|b| b.ub).max().unwrap_or(0);
    let mirrored: Vec<IntervalDomain> = norm
        .iter()
        .map(|b| IntervalDomain::new(d + 1 - b.ub, d + 1 - b.lb))
        .collect();
    let mubs = sweep(
        &mirrored,
        |i, j| graph.precedes(j, i),
        Side::Lower,
        opts,
        report,
    )?;
    let mut changed = false;
    for ((b, n), mub) in bounds.iter_mut().zip(&norm).zip(mubs) {
        // mirrored ub m maps back to normalized lb d + 1 - m
        let lb = b.lb + ((d + 1 - mub) - n.lb);
        if lb > b.lb {
            b.lb = lb;
            changed = true;
        }
    }
    Ok(changed)
}

/// Enforces the successor-side interval conditions on every upper bound.
pub fn prune_upper_bounds(
    graph: &PrecedenceGraph,
    bounds: &[IntervalDomain],
    opts: &SweepOptions,
    report: &mut SweepReport,
) -> PropagationOutcome {
    let mut out = bounds.to_vec();
    if out.iter().any(IntervalDomain::is_empty) {
        return PropagationOutcome::Failure;
    }
    match upper_in_place(graph, &mut out, opts, report) {
        Ok(_) => PropagationOutcome::from_bounds(out),
        Err(Wipeout) => PropagationOutcome::Failure,
    }
}

/// Mirror of [`prune_upper_bounds`]: predecessors take the role of
/// successors and lower bounds are pruned.
pub fn prune_lower_bounds(
    graph: &PrecedenceGraph,
    bounds: &[IntervalDomain],
    opts: &SweepOptions,
    report: &mut SweepReport,
) -> PropagationOutcome {
    let mut out = bounds.to_vec();
    if out.iter().any(IntervalDomain::is_empty) {
        return PropagationOutcome::Failure;
    }
    match lower_in_place(graph, &mut out, opts, report) {
        Ok(_) => PropagationOutcome::from_bounds(out),
        Err(Wipeout) => PropagationOutcome::Failure,
    }
}

/// Bounds consistency on `AllDiffPrec`: round-robin of the precedence pass,
/// the `AllDifferent` pass and both sweeps until nothing moves.
pub fn propagate_bc_with(
    graph: &PrecedenceGraph,
    bounds: &[IntervalDomain],
    opts: &SweepOptions,
    report: &mut SweepReport,
) -> PropagationOutcome {
    let mut cur = bounds.to_vec();
    if cur.iter().any(IntervalDomain::is_empty) {
        return PropagationOutcome::Failure;
    }
    let mut run = || -> Result<(), Wipeout> {
        loop {
            let a = precedence_pass(graph, &mut cur)?;
            let b = alldiff_fixpoint(&mut cur)?;
            let c = upper_in_place(graph, &mut cur, opts, report)?;
            let d = lower_in_place(graph, &mut cur, opts, report)?;
            if !(a || b || c || d) {
                return Ok(());
            }
        }
    };
    match run() {
        Ok(()) => PropagationOutcome::Consistent(cur),
        Err(Wipeout) => PropagationOutcome::Failure,
    }
}

pub fn propagate_bc(
    graph: &PrecedenceGraph,
    bounds: &[IntervalDomain],
    mode: Mode,
) -> PropagationOutcome {
    let opts = SweepOptions {
        mode,
        audit: false,
        trace: false,
    };
    propagate_bc_with(graph, bounds, &opts, &mut SweepReport::default())
}
