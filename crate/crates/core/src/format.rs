//! Instance files.
//!
//! Text form, one item per line:
//!
//! ```text
//! alldiffprec v1
//! # comment
//! meta source diamond
//! var X1 [1,5]
//! var X3 {1,2,3}
//! prec X1 X3
//! ```
//!
//! The same document is accepted as JSON (see [`InstanceFile`]'s serde
//! derive); [`parse`] picks the form from the first non-blank character.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{build_instance, FiniteDomain, Instance, ModelError};

pub const VERSION_TAG: &str = "alldiffprec v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVar(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainSpec {
    Interval(i64, i64),
    Values(Vec<i64>),
}

impl DomainSpec {
    pub fn to_domain(&self) -> FiniteDomain {
        match self {
            Self::Interval(lo, hi) => FiniteDomain::range(*lo, *hi),
            Self::Values(v) => v.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarDecl {
    pub name: String,
    pub domain: DomainSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InstanceFile {
    pub vars: Vec<VarDecl>,
    #[serde(default)]
    pub precedences: Vec<(String, String)>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl InstanceFile {
    /// Builds the normalized instance; variable order is file order.
    pub fn to_instance(&self) -> Result<Instance, FormatError> {
        let index = self.index()?;
        let edges = self
            .precedences
            .iter()
            .map(|(a, b)| Ok((lookup(&index, a)?, lookup(&index, b)?)))
            .collect::<Result<Vec<_>, FormatError>>()?;
        let domains = self.vars.iter().map(|v| v.domain.to_domain()).collect();
        Ok(build_instance(domains, &edges)?)
    }

    fn index(&self) -> Result<HashMap<&str, usize>, FormatError> {
        let mut index = HashMap::new();
        for (i, v) in self.vars.iter().enumerate() {
            if index.insert(v.name.as_str(), i).is_some() {
                return Err(FormatError::DuplicateVar(v.name.clone()));
            }
        }
        Ok(index)
    }

    /// Raw domains written as intervals where they have no holes.
    pub fn from_instance(instance: &Instance) -> Self {
        let vars = instance
            .raw_domains()
            .iter()
            .enumerate()
            .map(|(i, d)| VarDecl {
                name: format!("X{}", i + 1),
                domain: domain_spec(d),
            })
            .collect();
        let precedences = instance
            .graph()
            .edges()
            .map(|(a, b)| (format!("X{}", a + 1), format!("X{}", b + 1)))
            .collect();
        Self {
            vars,
            precedences,
            meta: BTreeMap::new(),
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    /// Canonical text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(VERSION_TAG);
        out.push('\n');
        for (k, v) in &self.meta {
            let _ = writeln!(out, "meta {k} {v}");
        }
        for v in &self.vars {
            let dom = match &v.domain {
                DomainSpec::Interval(lo, hi) => format!("[{lo},{hi}]"),
                DomainSpec::Values(vals) => {
                    let parts: Vec<String> = vals.iter().map(i64::to_string).collect();
                    format!("{{{}}}", parts.join(","))
                }
            };
            let _ = writeln!(out, "var {} {dom}", v.name);
        }
        for (a, b) in &self.precedences {
            let _ = writeln!(out, "prec {a} {b}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }
}

fn domain_spec(d: &FiniteDomain) -> DomainSpec {
    let (lo, hi) = (d.min().unwrap_or(1), d.max().unwrap_or(0));
    if d.len() as i64 == hi - lo + 1 {
        DomainSpec::Interval(lo, hi)
    } else {
        DomainSpec::Values(d.iter().collect())
    }
}

fn lookup(index: &HashMap<&str, usize>, name: &str) -> Result<usize, FormatError> {
    index
        .get(name)
        .copied()
        .ok_or_else(|| FormatError::UnknownVar(name.to_string()))
}

/// Parses either form.
pub fn parse(text: &str) -> Result<InstanceFile, FormatError> {
    if text.trim_start().starts_with('{') {
        Ok(serde_json::from_str(text)?)
    } else {
        parse_text(text)
    }
}

pub fn parse_text(text: &str) -> Result<InstanceFile, FormatError> {
    let mut file = InstanceFile::default();
    let mut tagged = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |msg: String| FormatError::Syntax { line: idx + 1, msg };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !tagged {
            if line != VERSION_TAG {
                return Err(err(format!("expected `{VERSION_TAG}`, found `{line}`")));
            }
            tagged = true;
            continue;
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match keyword {
            "var" => {
                let (name, dom) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| err("expected `var NAME DOMAIN`".into()))?;
                let domain = parse_domain(dom.trim()).map_err(err)?;
                file.vars.push(VarDecl {
                    name: name.to_string(),
                    domain,
                });
            }
            "prec" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [a, b] = parts[..] else {
                    return Err(err("expected `prec A B`".into()));
                };
                file.precedences.push((a.to_string(), b.to_string()));
            }
            "meta" => {
                let (k, v) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                if k.is_empty() {
                    return Err(err("expected `meta KEY VALUE`".into()));
                }
                file.meta.insert(k.to_string(), v.trim().to_string());
            }
            other => return Err(err(format!("unknown keyword `{other}`"))),
        }
    }
    if !tagged {
        return Err(FormatError::Syntax {
            line: 0,
            msg: "missing version tag".into(),
        });
    }
    file.index()?;
    Ok(file)
}

fn parse_domain(s: &str) -> Result<DomainSpec, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|_| format!("bad integer `{}`", t.trim()))
    };
    if let Some(inner) = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        let (lo, hi) = inner.split_once(',').ok_or("expected `[lo,hi]`")?;
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(format!("empty interval [{lo},{hi}]"));
        }
        Ok(DomainSpec::Interval(lo, hi))
    } else if let Some(inner) = s.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
        let mut vals = inner.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        vals.sort_unstable();
        vals.dedup();
        Ok(DomainSpec::Values(vals))
    } else {
        Err(format!("bad domain `{s}`"))
    }
}
