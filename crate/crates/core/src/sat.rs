//! 3-CNF formulas, a DIMACS reader, and the encoding of 3-SAT into a single
//! `AllDiffPrec` constraint whose support existence matches satisfiability.

use thiserror::Error;

use crate::model::{build_instance, FiniteDomain, Instance, ModelError, PrecedenceGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("clause {0} has {1} literals, expected 3")]
    ClauseWidth(usize, usize),
    #[error("clause {0} is tautological")]
    Tautology(usize),
    #[error("clause {0} mentions variable {1}, formula has {2}")]
    LiteralOutOfRange(usize, u32, u32),
    #[error("literal 0 in clause {0}")]
    ZeroLiteral(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A CNF formula. Literals are DIMACS-style: `k` is `x_k`, `-k` is `¬x_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
}

impl Formula {
    pub fn new(num_vars: u32, clauses: Vec<Vec<i32>>) -> Self {
        Self { num_vars, clauses }
    }

    /// `true` iff `assignment[k - 1]` satisfies every clause.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&lit| {
                let v = assignment[lit.unsigned_abs() as usize - 1];
                if lit > 0 {
                    v
                } else {
                    !v
                }
            })
        })
    }

    /// Checks the shape the encoder needs.
    pub fn validate_3cnf(&self) -> Result<(), SatError> {
        for (ci, c) in self.clauses.iter().enumerate() {
            if c.len() != 3 {
                return Err(SatError::ClauseWidth(ci, c.len()));
            }
            for &lit in c {
                if lit == 0 {
                    return Err(SatError::ZeroLiteral(ci));
                }
                if lit.unsigned_abs() > self.num_vars {
                    return Err(SatError::LiteralOutOfRange(
                        ci,
                        lit.unsigned_abs(),
                        self.num_vars,
                    ));
                }
            }
            if c.iter().any(|&a| c.contains(&-a)) {
                return Err(SatError::Tautology(ci));
            }
        }
        Ok(())
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for lit in c {
                out.push_str(&format!("{lit} "));
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Reads DIMACS CNF. Comment lines start with `c`; a lone `%` ends the input
/// (as in the SATLIB benchmark files). Clauses may span lines.
pub fn parse_dimacs(text: &str) -> Result<Formula, SatError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        let err = |msg: &str| SatError::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err("duplicate header"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(err("expected `p cnf <vars> <clauses>`"));
            }
            let n = parts[2].parse().map_err(|_| err("bad variable count"))?;
            let m = parts[3].parse().map_err(|_| err("bad clause count"))?;
            header = Some((n, m));
            continue;
        }
        if header.is_none() {
            return Err(err("clause before header"));
        }
        for tok in line.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| err(&format!("bad literal `{tok}`")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    let (n, m) = header.ok_or(SatError::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != m {
        return Err(SatError::Parse {
            line: 0,
            msg: format!("header declares {m} clauses, found {}", clauses.len()),
        });
    }
    let f = Formula::new(n, clauses);
    for (ci, c) in f.clauses.iter().enumerate() {
        if let Some(&lit) = c.iter().find(|l| l.unsigned_abs() > n) {
            return Err(SatError::LiteralOutOfRange(ci, lit.unsigned_abs(), n));
        }
    }
    Ok(f)
}

/// Index of the truth variable that must be small for `lit` to hold.
///
/// Variable `2k - 2` (0-based) taking value `k` means `x_k` false, variable
/// `2k - 1` taking `k` means `x_k` true.
fn truth_var(lit: i32) -> usize {
    let k = lit.unsigned_abs() as usize;
    if lit > 0 {
        2 * k - 1
    } else {
        2 * k - 2
    }
}

/// Index of the variable for literal `p` (0..3) of clause `c` (0-based).
pub fn clause_var(num_vars: u32, c: usize, p: usize) -> usize {
    2 * num_vars as usize + 3 * c + p
}

/// Builds the `2N + 3M` variable instance. Values are already 1-based so
/// normalization leaves them alone.
pub fn encode_3sat(formula: &Formula) -> Result<Instance, SatError> {
    formula.validate_3cnf()?;
    let n = formula.num_vars as i64;
    let m = formula.clauses.len() as i64;
    let mut domains = Vec::new();
    for i in 1..=n {
        let d = FiniteDomain::new([i, n + m + i]);
        domains.push(d.clone());
        domains.push(d);
    }
    let mut edges = Vec::new();
    for (c, clause) in formula.clauses.iter().enumerate() {
        let i = c as i64 + 1;
        for (p, &lit) in clause.iter().enumerate() {
            domains.push(FiniteDomain::new([
                n + i,
                2 * n + m + 2 * i - 1,
                2 * n + m + 2 * i,
            ]));
            edges.push((truth_var(lit), clause_var(formula.num_vars, c, p)));
        }
    }
    Ok(build_instance(domains, &edges)?)
}

/// Reads the truth assignment off a support of the encoding.
pub fn decode_assignment(num_vars: u32, support: &[i64]) -> Vec<bool> {
    (1..=num_vars as usize)
        .map(|k| support[2 * k - 1] == k as i64)
        .collect()
}

/// No directed path with two or more edges.
pub fn is_flat(graph: &PrecedenceGraph) -> bool {
    graph.longest_path() <= 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dc::{enumerate_supports, DEFAULT_CAP};

    #[test]
    fn single_variable_single_clause() {
        let f = Formula::new(1, vec![vec![1, 1, 1]]);
        let inst = encode_3sat(&f).unwrap();
        assert_eq!(inst.len(), 5);
        assert_eq!(inst.value_offset(), 0);
        assert_eq!(inst.domains()[0], FiniteDomain::new([1, 3]));
        assert_eq!(inst.domains()[1], FiniteDomain::new([1, 3]));
        for v in 2..5 {
            assert_eq!(inst.domains()[v], FiniteDomain::new([2, 4, 5]));
        }
        let edges: Vec<_> = inst.graph().edges().collect();
        assert_eq!(edges, vec![(1, 2), (1, 3), (1, 4)]);
        assert!(is_flat(inst.graph()));
        let s = enumerate_supports(inst.graph(), inst.domains(), DEFAULT_CAP)
            .unwrap()
            .next()
            .unwrap();
        assert_eq!(decode_assignment(1, &s), vec![true]);
    }

    #[test]
    fn contradiction_has_no_support() {
        let f = Formula::new(1, vec![vec![1, 1, 1], vec![-1, -1, -1]]);
        let inst = encode_3sat(&f).unwrap();
        assert!(
            enumerate_supports(inst.graph(), inst.domains(), DEFAULT_CAP)
                .unwrap()
                .next()
                .is_none()
        );
    }

    #[test]
    fn example_clause_edges() {
        // x_1 ∨ ¬x_2 ∨ x_3
        let f = Formula::new(3, vec![vec![1, -2, 3]]);
        let inst = encode_3sat(&f).unwrap();
        let edges: Vec<_> = inst.graph().edges().collect();
        assert_eq!(edges, vec![(1, 6), (2, 7), (5, 8)]);
    }

    #[test]
    fn rejects_malformed() {
        assert_eq!(
            Formula::new(2, vec![vec![1, 2]]).validate_3cnf(),
            Err(SatError::ClauseWidth(0, 2))
        );
        assert_eq!(
            Formula::new(2, vec![vec![1, -1, 2]]).validate_3cnf(),
            Err(SatError::Tautology(0))
        );
        assert_eq!(
            Formula::new(2, vec![vec![1, 2, 3]]).validate_3cnf(),
            Err(SatError::LiteralOutOfRange(0, 3, 2))
        );
    }

    #[test]
    fn dimacs_round_trip() {
        let text = "c example\np cnf 3 2\n1 -2 3 0\n-1 2\n -3 0\n%\n0\n";
        let f = parse_dimacs(text).unwrap();
        assert_eq!(f, Formula::new(3, vec![vec![1, -2, 3], vec![-1, 2, -3]]));
        assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }

    #[test]
    fn dimacs_errors() {
        assert!(parse_dimacs("1 2 3 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 2 x 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 2 -1 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 2 5 0\n").is_err());
    }
}
