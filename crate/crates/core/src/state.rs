//! Machine states, observations, directives and their text formats.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::label::Labeling;

/// Total map from scalar names to naturals, defaulting to 0.
///
/// Zero bindings are never stored, so structural equality coincides with
/// equality of the total maps.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScalarState(BTreeMap<String, u64>);

impl ScalarState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, x: &str) -> u64 {
        self.0.get(x).copied().unwrap_or(0)
    }

    pub fn set(&mut self, x: &str, v: u64) {
        if v == 0 {
            self.0.remove(x);
        } else {
            self.0.insert(x.to_string(), v);
        }
    }

    pub fn with(mut self, x: &str, v: u64) -> Self {
        self.set(x, v);
        self
    }

    /// Names bound to a nonzero value.
    pub fn support(&self) -> impl Iterator<Item = (&str, u64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl FromIterator<(String, u64)> for ScalarState {
    fn from_iter<I: IntoIterator<Item = (String, u64)>>(iter: I) -> Self {
        let mut s = ScalarState::new();
        for (k, v) in iter {
            s.set(&k, v);
        }
        s
    }
}

/// Arrays of fixed size. An array that is absent has size 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrayState(BTreeMap<String, Vec<u64>>);

impl ArrayState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: &str, contents: Vec<u64>) {
        self.0.insert(a.to_string(), contents);
    }

    pub fn with(mut self, a: &str, contents: Vec<u64>) -> Self {
        self.insert(a, contents);
        self
    }

    pub fn get(&self, a: &str) -> Option<&[u64]> {
        self.0.get(a).map(Vec::as_slice)
    }

    pub fn len(&self, a: &str) -> usize {
        self.0.get(a).map_or(0, Vec::len)
    }

    pub fn read(&self, a: &str, i: u64) -> Option<u64> {
        self.0.get(a)?.get(usize::try_from(i).ok()?).copied()
    }

    /// In-bounds update; returns false and leaves the state alone otherwise.
    pub fn write(&mut self, a: &str, i: u64, v: u64) -> bool {
        let Some(slot) = self
            .0
            .get_mut(a)
            .and_then(|arr| arr.get_mut(usize::try_from(i).ok()?))
        else {
            return false;
        };
        *slot = v;
        true
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[u64])> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Declared arrays of length zero. Security checks reject these.
    pub fn empty_arrays(&self) -> Vec<String> {
        self.0
            .iter()
            .filter(|(_, v)| v.is_empty())
            .map(|(k, _)| k.clone())
            .collect()
    }
}

/// Attacker-visible event.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obs {
    Branch(bool),
    Read(String, u64),
    Write(String, u64),
}

/// Attacker directive. The derived order (`step < force < load < store`,
/// then by array name and index) is the witness order of the checker.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Step,
    Force,
    Load(String, u64),
    Store(String, u64),
}

impl fmt::Display for Obs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obs::Branch(b) => write!(f, "branch {b}"),
            Obs::Read(a, i) => write!(f, "read {a} {i}"),
            Obs::Write(a, i) => write!(f, "write {a} {i}"),
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dir::Step => f.write_str("step"),
            Dir::Force => f.write_str("force"),
            Dir::Load(a, j) => write!(f, "load {a} {j}"),
            Dir::Store(a, j) => write!(f, "store {a} {j}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("duplicate binding for `{0}`")]
    Duplicate(String),
    #[error("{0}")]
    Token(String),
}

fn line_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Line { line, msg: msg.into() }
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Strips a `#` comment and surrounding whitespace.
pub(crate) fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub(crate) fn parse_nat_list(s: &str, line: usize) -> Result<Vec<u64>, FormatError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| line_err(line, format!("`{}` is not a natural number", t.trim())))
        })
        .collect()
}

/// Parses a state file: `NAME = NAT` and `NAME = [NAT, ...]` lines.
pub fn parse_state(text: &str) -> Result<(ScalarState, ArrayState), FormatError> {
    let mut rho = ScalarState::new();
    let mut mu = ArrayState::new();
    let mut seen = BTreeSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let (name, value) = body
            .split_once('=')
            .ok_or_else(|| line_err(line, "expected `NAME = value`"))?;
        let (name, value) = (name.trim(), value.trim());
        if !is_ident(name) {
            return Err(line_err(line, format!("`{name}` is not a valid name")));
        }
        if !seen.insert(name.to_string()) {
            return Err(FormatError::Duplicate(name.to_string()));
        }
        if let Some(inner) = value.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| line_err(line, "unterminated array literal"))?;
            mu.insert(name, parse_nat_list(inner, line)?);
        } else {
            let v = value
                .parse::<u64>()
                .map_err(|_| line_err(line, format!("`{value}` is not a natural number")))?;
            rho.set(name, v);
        }
    }
    Ok((rho, mu))
}

/// Renders a state in the state-file format.
pub fn render_state(rho: &ScalarState, mu: &ArrayState) -> String {
    let mut out = String::new();
    for (x, v) in rho.support() {
        out.push_str(&format!("{x} = {v}\n"));
    }
    for (a, vs) in mu.iter() {
        let items: Vec<String> = vs.iter().map(u64::to_string).collect();
        out.push_str(&format!("{a} = [{}]\n", items.join(", ")));
    }
    out
}

impl FromStr for Dir {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let dirs = parse_dirs(s)?;
        match <[Dir; 1]>::try_from(dirs) {
            Ok([d]) => Ok(d),
            Err(_) => Err(FormatError::Token(format!("expected one directive in `{s}`"))),
        }
    }
}

/// Parses a whitespace-separated directive string such as
/// `force load a3 0 step`.
pub fn parse_dirs(s: &str) -> Result<Vec<Dir>, FormatError> {
    let toks: Vec<&str> = s.split_whitespace().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < toks.len() {
        match toks[k] {
            "step" => out.push(Dir::Step),
            "force" => out.push(Dir::Force),
            kw @ ("load" | "store") => {
                let (Some(a), Some(j)) = (toks.get(k + 1), toks.get(k + 2)) else {
                    return Err(FormatError::Token(format!("`{kw}` needs an array and an index")));
                };
                if !is_ident(a) {
                    return Err(FormatError::Token(format!("`{a}` is not an array name")));
                }
                let j = j
                    .parse::<u64>()
                    .map_err(|_| FormatError::Token(format!("`{j}` is not an index")))?;
                out.push(if kw == "load" {
                    Dir::Load(a.to_string(), j)
                } else {
                    Dir::Store(a.to_string(), j)
                });
                k += 2;
            }
            other => return Err(FormatError::Token(format!("unknown directive `{other}`"))),
        }
        k += 1;
    }
    Ok(out)
}

/// Parses a trace in the one-observation-per-line format.
pub fn parse_trace(s: &str) -> Result<Vec<Obs>, FormatError> {
    let mut out = Vec::new();
    for (n, raw) in s.lines().enumerate() {
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let obs = match toks.as_slice() {
            ["branch", "true"] => Obs::Branch(true),
            ["branch", "false"] => Obs::Branch(false),
            [kw @ ("read" | "write"), a, i] if is_ident(a) => {
                let i = i
                    .parse::<u64>()
                    .map_err(|_| line_err(n + 1, format!("`{i}` is not an index")))?;
                if *kw == "read" {
                    Obs::Read(a.to_string(), i)
                } else {
                    Obs::Write(a.to_string(), i)
                }
            }
            _ => return Err(line_err(n + 1, format!("malformed observation `{body}`"))),
        };
        out.push(obs);
    }
    Ok(out)
}

pub fn render_trace(trace: &[Obs]) -> String {
    trace.iter().map(|o| format!("{o}\n")).collect()
}

pub fn render_dirs(dirs: &[Dir]) -> String {
    dirs.iter().map(Dir::to_string).collect::<Vec<_>>().join(" ")
}

/// Public equivalence: equal public scalars and equal public arrays.
pub fn pub_equiv(
    labels: &Labeling,
    s1: (&ScalarState, &ArrayState),
    s2: (&ScalarState, &ArrayState),
) -> bool {
    scalars_pub_equiv(labels, s1.0, s2.0) && arrays_pub_equiv(labels, s1.1, s2.1)
}

pub fn scalars_pub_equiv(labels: &Labeling, r1: &ScalarState, r2: &ScalarState) -> bool {
    let names: BTreeSet<&str> = r1.support().chain(r2.support()).map(|(x, _)| x).collect();
    names
        .into_iter()
        .filter(|x| labels.var(x).is_public())
        .all(|x| r1.get(x) == r2.get(x))
}

pub fn arrays_pub_equiv(labels: &Labeling, m1: &ArrayState, m2: &ArrayState) -> bool {
    let names: BTreeSet<&str> = m1.names().chain(m2.names()).collect();
    names
        .into_iter()
        .filter(|a| labels.arr(a).is_public())
        .all(|a| m1.get(a) == m2.get(a))
}
