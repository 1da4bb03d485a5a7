//! Boolean/linear decomposition of `AllDiffPrec` and a small queue-based
//! engine that runs it to fixpoint.
//!
//! `B[i,l]` is `X_i <= l` for `l` in `1..=d`; `B[i,0]` is the constant 0 and
//! never materialized. `A[i,l,u]` is `l <= X_i <= u`, created for every
//! interval with `u - l < n`.
//!
//! The successor family is posted as
//! `A[i,l,u] = 1  =>  sum_{j in S(i)} B[j,u] + sum_{j not in S(i), j != i} A[j,l,u] <= u - l`
//! and the predecessor family as its mirror with `1 - B[j,l-1]`. Both are
//! linearized with a big-M coefficient on `A[i,l,u]`.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::model::{Instance, IntervalDomain, PrecedenceGraph, PropagationOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolName {
    /// `X_var <= l`
    B { var: usize, l: i64 },
    /// `l <= X_var <= u`
    A { var: usize, l: i64, u: i64 },
}

impl fmt::Display for BoolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::B { var, l } => write!(f, "B[{},{}]", var + 1, l),
            Self::A { var, l, u } => write!(f, "A[{},{},{}]", var + 1, l, u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoolVar {
    pub id: usize,
    pub name: BoolName,
    pub lb: u8,
    pub ub: u8,
}

impl BoolVar {
    pub fn is_fixed(&self) -> bool {
        self.lb == self.ub
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Literal {
    Pos(usize),
    Neg(usize),
}

impl Literal {
    fn var(self) -> usize {
        match self {
            Self::Pos(b) | Self::Neg(b) => b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    ChannelB,
    ChannelA,
    IntervalSum,
    SuccessorSum,
    PredecessorSum,
    StrictLess,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompConstraint {
    /// `B[b] = 1 <=> X_var <= l`
    ChannelB { b: usize, var: usize, l: i64 },
    /// `A[a] = 1 <=> not below and upto`, `below = None` standing for the constant 0.
    ChannelA {
        a: usize,
        below: Option<usize>,
        upto: usize,
    },
    /// `sum coef * lit <= rhs`
    Linear {
        kind: ConstraintKind,
        terms: Vec<(i64, Literal)>,
        rhs: i64,
    },
    /// `X_before < X_after`
    Less { before: usize, after: usize },
}

impl DecompConstraint {
    pub fn kind(&self) -> ConstraintKind {
        match self {
            Self::ChannelB { .. } => ConstraintKind::ChannelB,
            Self::ChannelA { .. } => ConstraintKind::ChannelA,
            Self::Linear { kind, .. } => *kind,
            Self::Less { .. } => ConstraintKind::StrictLess,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Encoding {
    n: usize,
    d: i64,
    bools: Vec<BoolVar>,
    constraints: Vec<DecompConstraint>,
    b_ids: Vec<Vec<usize>>,
    a_ids: HashMap<(usize, i64, i64), usize>,
}

impl Encoding {
    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn max_value(&self) -> i64 {
        self.d
    }

    pub fn bools(&self) -> &[BoolVar] {
        &self.bools
    }

    pub fn constraints(&self) -> &[DecompConstraint] {
        &self.constraints
    }

    /// Id of `B[i,l]`, `None` for `l = 0`.
    pub fn b(&self, i: usize, l: i64) -> Option<usize> {
        (l >= 1).then(|| self.b_ids[i][(l - 1) as usize])
    }

    pub fn a(&self, i: usize, l: i64, u: i64) -> Option<usize> {
        self.a_ids.get(&(i, l, u)).copied()
    }

    pub fn count(&self, kind: ConstraintKind) -> usize {
        self.constraints.iter().filter(|c| c.kind() == kind).count()
    }

    pub fn count_b(&self) -> usize {
        self.n * self.d as usize
    }

    pub fn count_a(&self) -> usize {
        self.a_ids.len()
    }

    fn lit(&self, l: Literal) -> String {
        match l {
            Literal::Pos(b) => self.bools[b].name.to_string(),
            Literal::Neg(b) => format!("!{}", self.bools[b].name),
        }
    }

    /// One constraint per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in &self.constraints {
            let line = match c {
                DecompConstraint::ChannelB { b, var, l } => {
                    format!("channel {} <-> X{} <= {}", self.bools[*b].name, var + 1, l)
                }
                DecompConstraint::ChannelA { a, below, upto } => {
                    let below =
                        below.map_or("!0".to_string(), |b| format!("!{}", self.bools[b].name));
                    format!(
                        "channel {} <-> {} & {}",
                        self.bools[*a].name, below, self.bools[*upto].name
                    )
                }
                DecompConstraint::Linear { kind, terms, rhs } => {
                    let tag = match kind {
                        ConstraintKind::IntervalSum => "interval",
                        ConstraintKind::SuccessorSum => "succ",
                        _ => "pred",
                    };
                    let sum: Vec<String> = terms
                        .iter()
                        .map(|&(c, l)| {
                            if c == 1 {
                                self.lit(l)
                            } else {
                                format!("{c}*{}", self.lit(l))
                            }
                        })
                        .collect();
                    format!("{tag} {} <= {rhs}", sum.join(" + "))
                }
                DecompConstraint::Less { before, after } => {
                    format!("less X{} < X{}", before + 1, after + 1)
                }
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// Encodes a normalized instance.
pub fn encode(instance: &Instance) -> Encoding {
    encode_graph(instance.graph(), instance.max_value())
}

/// Encodes `AllDiffPrec` over `graph` with values `1..=d`.
pub fn encode_graph(graph: &PrecedenceGraph, d: i64) -> Encoding {
    let n = graph.len();
    let mut bools = Vec::new();
    let mut new_bool = |name: BoolName| {
        let id = bools.len();
        bools.push(BoolVar {
            id,
            name,
            lb: 0,
            ub: 1,
        });
        id
    };
    let b_ids: Vec<Vec<usize>> = (0..n)
        .map(|var| (1..=d).map(|l| new_bool(BoolName::B { var, l })).collect())
        .collect();
    let b = |i: usize, l: i64| (l >= 1).then(|| b_ids[i][(l - 1) as usize]);

    let mut intervals = Vec::new();
    for l in 1..=d {
        for u in l..=d.min(l + n as i64 - 1) {
            intervals.push((l, u));
        }
    }
    let mut a_ids = HashMap::new();
    for &(l, u) in &intervals {
        for var in 0..n {
            a_ids.insert((var, l, u), new_bool(BoolName::A { var, l, u }));
        }
    }

    let mut constraints = Vec::new();
    for i in 0..n {
        for l in 1..=d {
            constraints.push(DecompConstraint::ChannelB {
                b: b(i, l).unwrap(),
                var: i,
                l,
            });
        }
    }
    for &(l, u) in &intervals {
        for i in 0..n {
            constraints.push(DecompConstraint::ChannelA {
                a: a_ids[&(i, l, u)],
                below: b(i, l - 1),
                upto: b(i, u).unwrap(),
            });
        }
    }
    for &(l, u) in &intervals {
        constraints.push(DecompConstraint::Linear {
            kind: ConstraintKind::IntervalSum,
            terms: (0..n)
                .map(|i| (1, Literal::Pos(a_ids[&(i, l, u)])))
                .collect(),
            rhs: u - l + 1,
        });
    }
    for &(l, u) in &intervals {
        for i in 0..n {
            let others = |anchored: &dyn Fn(usize) -> bool| -> Vec<(i64, Literal)> {
                (0..n)
                    .filter(|&j| j != i && !anchored(j))
                    .map(|j| (1, Literal::Pos(a_ids[&(j, l, u)])))
                    .collect()
            };
            if !graph.successors(i).is_empty() {
                let mut terms: Vec<(i64, Literal)> = graph
                    .successors(i)
                    .iter()
                    .map(|&j| (1, Literal::Pos(b(j, u).unwrap())))
                    .collect();
                terms.extend(others(&|j| graph.precedes(i, j)));
                push_reified(
                    &mut constraints,
                    ConstraintKind::SuccessorSum,
                    terms,
                    0,
                    a_ids[&(i, l, u)],
                    u - l,
                );
            }
            if !graph.predecessors(i).is_empty() {
                // X_j >= l is `!B[j,l-1]`, constant true for l = 1
                let mut terms = Vec::new();
                let mut constant = 0;
                for &j in graph.predecessors(i) {
                    match b(j, l - 1) {
                        Some(bj) => terms.push((1, Literal::Neg(bj))),
                        None => constant += 1,
                    }
                }
                terms.extend(others(&|j| graph.precedes(j, i)));
                push_reified(
                    &mut constraints,
                    ConstraintKind::PredecessorSum,
                    terms,
                    constant,
                    a_ids[&(i, l, u)],
                    u - l,
                );
            }
        }
    }
    for (i, j) in graph.closure_edges() {
        constraints.push(DecompConstraint::Less {
            before: i,
            after: j,
        });
    }
    Encoding {
        n,
        d,
        bools,
        constraints,
        b_ids,
        a_ids,
    }
}

/// Posts `guard = 1 => constant + sum terms <= cap` as one linear inequality.
fn push_reified(
    out: &mut Vec<DecompConstraint>,
    kind: ConstraintKind,
    mut terms: Vec<(i64, Literal)>,
    constant: i64,
    guard: usize,
    cap: i64,
) {
    let big = constant + terms.len() as i64 - cap;
    if big <= 0 {
        return;
    }
    terms.push((big, Literal::Pos(guard)));
    out.push(DecompConstraint::Linear {
        kind,
        terms,
        rhs: cap - constant + big,
    });
}

/// Fixpoint state: X bounds, Boolean bounds, and the order in which Booleans
/// became fixed.
#[derive(Debug, Clone)]
pub struct DecompState {
    pub bounds: Vec<IntervalDomain>,
    pub bools: Vec<BoolVar>,
    pub fixings: Vec<(usize, u8)>,
    pub revisions: u64,
}

struct Engine<'a> {
    enc: &'a Encoding,
    st: DecompState,
    int_watch: Vec<Vec<usize>>,
    bool_watch: Vec<Vec<usize>>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
}

struct Fail;

impl Engine<'_> {
    fn schedule(&mut self, cs: &[usize]) {
        for &c in cs {
            if !self.queued[c] {
                self.queued[c] = true;
                self.queue.push_back(c);
            }
        }
    }

    fn fix(&mut self, b: usize, v: u8) -> Result<(), Fail> {
        let bv = &mut self.st.bools[b];
        if bv.is_fixed() {
            return if bv.lb == v { Ok(()) } else { Err(Fail) };
        }
        bv.lb = v;
        bv.ub = v;
        self.st.fixings.push((b, v));
        let w = std::mem::take(&mut self.bool_watch[b]);
        self.schedule(&w);
        self.bool_watch[b] = w;
        Ok(())
    }

    fn set_lit_false(&mut self, l: Literal) -> Result<(), Fail> {
        match l {
            Literal::Pos(b) => self.fix(b, 0),
            Literal::Neg(b) => self.fix(b, 1),
        }
    }

    fn lit_min(&self, l: Literal) -> i64 {
        match l {
            Literal::Pos(b) => self.st.bools[b].lb as i64,
            Literal::Neg(b) => 1 - self.st.bools[b].ub as i64,
        }
    }

    fn lit_fixed(&self, l: Literal) -> bool {
        self.st.bools[l.var()].is_fixed()
    }

    fn set_ub(&mut self, x: usize, v: i64) -> Result<(), Fail> {
        if v < self.st.bounds[x].ub {
            self.st.bounds[x].ub = v;
            if v < self.st.bounds[x].lb {
                return Err(Fail);
            }
            let w = std::mem::take(&mut self.int_watch[x]);
            self.schedule(&w);
            self.int_watch[x] = w;
        }
        Ok(())
    }

    fn set_lb(&mut self, x: usize, v: i64) -> Result<(), Fail> {
        if v > self.st.bounds[x].lb {
            self.st.bounds[x].lb = v;
            if v > self.st.bounds[x].ub {
                return Err(Fail);
            }
            let w = std::mem::take(&mut self.int_watch[x]);
            self.schedule(&w);
            self.int_watch[x] = w;
        }
        Ok(())
    }

    fn revise(&mut self, c: usize) -> Result<(), Fail> {
        self.st.revisions += 1;
        match &self.enc.constraints[c] {
            &DecompConstraint::ChannelB { b, var, l } => {
                let x = self.st.bounds[var];
                if x.ub <= l {
                    self.fix(b, 1)?;
                } else if x.lb > l {
                    self.fix(b, 0)?;
                }
                let bv = self.st.bools[b];
                if bv.is_fixed() {
                    if bv.lb == 1 {
                        self.set_ub(var, l)?;
                    } else {
                        self.set_lb(var, l + 1)?;
                    }
                }
            }
            &DecompConstraint::ChannelA { a, below, upto } => {
                // a <=> p & q with p = !below, q = upto
                let p = below.map_or((1, 1), |b| {
                    let v = self.st.bools[b];
                    (1 - v.ub, 1 - v.lb)
                });
                let q = (self.st.bools[upto].lb, self.st.bools[upto].ub);
                if p.0 == 1 && q.0 == 1 {
                    self.fix(a, 1)?;
                }
                if p.1 == 0 || q.1 == 0 {
                    self.fix(a, 0)?;
                }
                let av = self.st.bools[a];
                if av.lb == 1 {
                    if let Some(b) = below {
                        self.fix(b, 0)?;
                    }
                    self.fix(upto, 1)?;
                } else if av.ub == 0 {
                    if p.0 == 1 {
                        self.fix(upto, 0)?;
                    }
                    if q.0 == 1 {
                        match below {
                            Some(b) => self.fix(b, 1)?,
                            None => return Err(Fail),
                        }
                    }
                }
            }
            DecompConstraint::Linear { terms, rhs, .. } => {
                let min: i64 = terms.iter().map(|&(k, l)| k * self.lit_min(l)).sum();
                if min > *rhs {
                    return Err(Fail);
                }
                for &(k, l) in terms {
                    if !self.lit_fixed(l) && min + k > *rhs {
                        self.set_lit_false(l)?;
                    }
                }
            }
            &DecompConstraint::Less { before, after } => {
                let ub = self.st.bounds[after].ub - 1;
                self.set_ub(before, ub)?;
                let lb = self.st.bounds[before].lb + 1;
                self.set_lb(after, lb)?;
            }
        }
        Ok(())
    }
}

/// Runs the encoding to fixpoint from `bounds`. `None` on failure.
pub fn propagate_decomposition_state(
    enc: &Encoding,
    bounds: &[IntervalDomain],
) -> Option<DecompState> {
    assert_eq!(bounds.len(), enc.n, "bounds do not match the encoding");
    if bounds.iter().any(IntervalDomain::is_empty) {
        return None;
    }
    let mut int_watch = vec![Vec::new(); enc.n];
    let mut bool_watch = vec![Vec::new(); enc.bools.len()];
    for (c, con) in enc.constraints.iter().enumerate() {
        match con {
            &DecompConstraint::ChannelB { b, var, .. } => {
                int_watch[var].push(c);
                bool_watch[b].push(c);
            }
            &DecompConstraint::ChannelA { a, below, upto } => {
                bool_watch[a].push(c);
                bool_watch[upto].push(c);
                if let Some(b) = below {
                    bool_watch[b].push(c);
                }
            }
            DecompConstraint::Linear { terms, .. } => {
                for &(_, l) in terms {
                    bool_watch[l.var()].push(c);
                }
            }
            &DecompConstraint::Less { before, after } => {
                int_watch[before].push(c);
                int_watch[after].push(c);
            }
        }
    }
    let clipped = bounds
        .iter()
        .map(|b| IntervalDomain::new(b.lb.max(1), b.ub.min(enc.d)))
        .collect::<Vec<_>>();
    if clipped.iter().any(IntervalDomain::is_empty) {
        return None;
    }
    let m = enc.constraints.len();
    let mut eng = Engine {
        enc,
        st: DecompState {
            bounds: clipped,
            bools: enc.bools.clone(),
            fixings: Vec::new(),
            revisions: 0,
        },
        int_watch,
        bool_watch,
        queue: (0..m).collect(),
        queued: vec![true; m],
    };
    while let Some(c) = eng.queue.pop_front() {
        eng.queued[c] = false;
        if eng.revise(c).is_err() {
            return None;
        }
    }
    Some(eng.st)
}

pub fn propagate_decomposition(enc: &Encoding, bounds: &[IntervalDomain]) -> PropagationOutcome {
    match propagate_decomposition_state(enc, bounds) {
        None => PropagationOutcome::Failure,
        Some(st) => PropagationOutcome::Consistent(st.bounds),
    }
}
