//! Finite state spaces and public-equivalence pairing.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::label::Labeling;
use crate::state::{content, is_ident, parse_nat_list, ArrayState, FormatError, ScalarState};

use super::State;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArrayDomain {
    Fixed(Vec<u64>),
    /// Every array of `size` elements drawn from `values`.
    Free { size: usize, values: Vec<u64> },
}

impl ArrayDomain {
    pub fn size(&self) -> usize {
        match self {
            ArrayDomain::Fixed(v) => v.len(),
            ArrayDomain::Free { size, .. } => *size,
        }
    }
}

/// Declared domains; undeclared scalars are 0 and undeclared arrays absent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateSpace {
    pub scalars: BTreeMap<String, Vec<u64>>,
    pub arrays: BTreeMap<String, ArrayDomain>,
}

fn parse_domain(s: &str, line: usize) -> Result<Vec<u64>, FormatError> {
    let err = |msg: String| FormatError::Line { line, msg };
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| err("expected a `{...}` domain".into()))?;
    let mut out = BTreeSet::new();
    for item in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| err(format!("bad range `{item}`")))?;
            let hi: u64 = hi.trim().parse().map_err(|_| err(format!("bad range `{item}`")))?;
            out.extend(lo..=hi);
        } else {
            out.insert(item.parse().map_err(|_| err(format!("`{item}` is not a natural number")))?);
        }
    }
    if out.is_empty() {
        return Err(err("empty domain".into()));
    }
    Ok(out.into_iter().collect())
}

impl StateSpace {
    /// Parses lines of the forms `x in {0, 1}`, `x in {0..3}`, `x = 4`,
    /// `a : size 2 in {0..3}` and `a = [1, 2]`.
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut space = StateSpace::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |msg: String| FormatError::Line { line, msg };
            let body = content(raw);
            if body.is_empty() {
                continue;
            }
            let name_end = body
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(body.len());
            let (name, rest) = (&body[..name_end], body[name_end..].trim());
            if !is_ident(name) {
                return Err(err(format!("`{body}` does not start with a name")));
            }
            if space.scalars.contains_key(name) || space.arrays.contains_key(name) {
                return Err(FormatError::Duplicate(name.to_string()));
            }
            if let Some(dom) = rest
                .strip_prefix("in")
                .filter(|d| d.trim_start().starts_with('{'))
            {
                space.scalars.insert(name.to_string(), parse_domain(dom, line)?);
            } else if let Some(v) = rest.strip_prefix('=') {
                let v = v.trim();
                if let Some(inner) = v.strip_prefix('[') {
                    let inner = inner
                        .strip_suffix(']')
                        .ok_or_else(|| err("unterminated array literal".into()))?;
                    space
                        .arrays
                        .insert(name.to_string(), ArrayDomain::Fixed(parse_nat_list(inner, line)?));
                } else {
                    let v = v.parse().map_err(|_| err(format!("`{v}` is not a natural number")))?;
                    space.scalars.insert(name.to_string(), vec![v]);
                }
            } else if let Some(shape) = rest.strip_prefix(':') {
                let shape = shape.trim();
                let shape = shape
                    .strip_prefix("size")
                    .ok_or_else(|| err("expected `: size K in {...}`".into()))?
                    .trim();
                let (size, dom) = shape
                    .split_once("in")
                    .ok_or_else(|| err("expected `in {...}` after the size".into()))?;
                let size = size
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("`{}` is not a size", size.trim())))?;
                let values = parse_domain(dom, line)?;
                space.arrays.insert(name.to_string(), ArrayDomain::Free { size, values });
            } else {
                return Err(err(format!("cannot read `{body}`")));
            }
        }
        Ok(space)
    }

    /// Number of states `enum_states` yields.
    pub fn count(&self) -> u128 {
        let mut n: u128 = 1;
        for d in self.scalars.values() {
            n = n.saturating_mul(d.len() as u128);
        }
        for a in self.arrays.values() {
            if let ArrayDomain::Free { size, values } = a {
                for _ in 0..*size {
                    n = n.saturating_mul(values.len() as u128);
                }
            }
        }
        n
    }
}

/// Cartesian product of the declared domains, in odometer order with the
/// last declared slot varying fastest.
pub fn enum_states(space: &StateSpace) -> impl Iterator<Item = State> + '_ {
    // One slot per scalar and per element of a free array.
    let mut radices: Vec<usize> = space.scalars.values().map(Vec::len).collect();
    for a in space.arrays.values() {
        if let ArrayDomain::Free { size, values } = a {
            radices.extend(std::iter::repeat_n(values.len(), *size));
        }
    }
    let mut digits = vec![0usize; radices.len()];
    let mut done = radices.contains(&0);
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let state = build(space, &digits);
        done = true;
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < radices[k] {
                done = false;
                break;
            }
            digits[k] = 0;
        }
        Some(state)
    })
}

fn build(space: &StateSpace, digits: &[usize]) -> State {
    let mut rho = ScalarState::new();
    let mut k = 0;
    for (x, dom) in &space.scalars {
        rho.set(x, dom[digits[k]]);
        k += 1;
    }
    let mut mu = ArrayState::new();
    for (a, dom) in &space.arrays {
        match dom {
            ArrayDomain::Fixed(v) => mu.insert(a, v.clone()),
            ArrayDomain::Free { size, values } => {
                let v = digits[k..k + size].iter().map(|&d| values[d]).collect();
                k += size;
                mu.insert(a, v);
            }
        }
    }
    (rho, mu)
}

/// All index pairs `(i, j)`, `i < j`, of publicly equivalent states.
pub fn pub_equiv_pairs(states: &[State], labels: &Labeling) -> Vec<(usize, usize)> {
    let mut groups: HashMap<(Vec<(&str, u64)>, Vec<(&str, &[u64])>), Vec<usize>> = HashMap::new();
    for (idx, (rho, mu)) in states.iter().enumerate() {
        let scalars = rho.support().filter(|(x, _)| labels.var(x).is_public()).collect();
        let arrays = mu.iter().filter(|(a, _)| labels.arr(a).is_public()).collect();
        groups.entry((scalars, arrays)).or_default().push(idx);
    }
    let mut pairs: Vec<(usize, usize)> = groups
        .values()
        .flat_map(|g| {
            g.iter()
                .enumerate()
                .flat_map(move |(k, &i)| g[k + 1..].iter().map(move |&j| (i, j)))
        })
        .collect();
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::pub_equiv;

    #[test]
    fn empty_space_has_one_state() {
        let states: Vec<_> = enum_states(&StateSpace::default()).collect();
        assert_eq!(states, [(ScalarState::new(), ArrayState::new())]);
    }

    #[test]
    fn product_count() {
        let space = StateSpace::parse("i in {0,1}\na : size 1 in {0,1}").unwrap();
        assert_eq!(enum_states(&space).count(), 4);
        assert_eq!(space.count(), 4);
        let space = StateSpace::parse("i in {0..3}\na : size 2 in {0..2}\nk = 5").unwrap();
        let states: Vec<_> = enum_states(&space).collect();
        assert_eq!(states.len(), 36);
        assert!(states.iter().all(|(r, _)| r.get("k") == 5));
        let distinct: BTreeSet<_> = states.iter().collect();
        assert_eq!(distinct.len(), 36);
    }

    #[test]
    fn example3_space() {
        let space = StateSpace::parse(
            "i in {1, 4}\na1_size = 4\na1 = [0, 7, 1, 2]\na2 : size 1000 in {0}\na3 : size 1 in {42, 43}",
        )
        .unwrap();
        let states: Vec<_> = enum_states(&space).collect();
        assert_eq!(states.len(), 4);
        assert!(states.iter().any(|(_, m)| m.get("a3") == Some(&[42][..])));
        assert!(states.iter().any(|(_, m)| m.get("a3") == Some(&[43][..])));
    }

    #[test]
    fn parse_errors() {
        assert!(StateSpace::parse("x in {}").is_err());
        assert!(StateSpace::parse("x in {1}\nx = 2").is_err());
        assert!(StateSpace::parse("a : size in {1}").is_err());
        assert!(StateSpace::parse("x is 3").is_err());
    }

    #[test]
    fn pairs_match_pub_equiv() {
        let space = StateSpace::parse("p in {0,1}\ns in {0,1,2}\npa : size 1 in {0,1}\nsa : size 1 in {0,1}").unwrap();
        let states: Vec<_> = enum_states(&space).collect();
        let l = Labeling::with_public(["p"], ["pa"]);
        let pairs = pub_equiv_pairs(&states, &l);
        let mut brute = Vec::new();
        for i in 0..states.len() {
            for j in i + 1..states.len() {
                let (a, b) = (&states[i], &states[j]);
                if pub_equiv(&l, (&a.0, &a.1), (&b.0, &b.1)) {
                    brute.push((i, j));
                }
            }
        }
        assert_eq!(pairs, brute);
    }
}
