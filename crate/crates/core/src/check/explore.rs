//! Exhaustive exploration of directive trees.

use crate::lang::Com;
use crate::machine::{feasible, settle, Machine, OutcomeKind, Settled};
use crate::seq::seq_run;
use crate::speculative::SpecConfig;
use crate::state::{Dir, Obs};

use super::{prefix_of, Bounds, State, Verdict, Witness};

/// One maximal run of a directive tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunLeaf {
    pub dirs: Vec<Dir>,
    pub trace: Vec<Obs>,
    pub kind: OutcomeKind,
}

/// Every maximal run of `m` using at most `max_dirs` directives. A run
/// stops when it terminates, when fuel runs out, when the directive budget
/// is spent, or when no directive is feasible.
pub fn enum_runs<M: Machine>(m: M, max_dirs: usize, fuel: usize) -> Vec<RunLeaf> {
    let mut out = Vec::new();
    let mut dirs = Vec::new();
    let mut trace = Vec::new();
    walk(m, fuel, max_dirs, &mut dirs, &mut trace, &mut out);
    out
}

fn walk<M: Machine>(
    m: M,
    mut fuel: usize,
    max_dirs: usize,
    dirs: &mut Vec<Dir>,
    trace: &mut Vec<Obs>,
    out: &mut Vec<RunLeaf>,
) {
    let leaf = |kind, dirs: &Vec<Dir>, trace: &Vec<Obs>| RunLeaf {
        dirs: dirs.clone(),
        trace: trace.clone(),
        kind,
    };
    let m = match settle(m, &mut fuel) {
        Settled::Final(_) => return out.push(leaf(OutcomeKind::Terminated, dirs, trace)),
        Settled::OutOfFuel(_) => return out.push(leaf(OutcomeKind::FuelExhausted, dirs, trace)),
        Settled::Blocked(m) => m,
    };
    if fuel == 0 {
        return out.push(leaf(OutcomeKind::FuelExhausted, dirs, trace));
    }
    if dirs.len() == max_dirs {
        return out.push(leaf(OutcomeKind::DirectivesExhausted, dirs, trace));
    }
    let next = feasible(&m);
    if next.is_empty() {
        return out.push(leaf(OutcomeKind::Stuck, dirs, trace));
    }
    for (d, m2, o) in next {
        dirs.push(d);
        trace.push(o);
        walk(m2, fuel - 1, max_dirs, dirs, trace, out);
        dirs.pop();
        trace.pop();
    }
}

pub fn enum_spec_runs(cfg: SpecConfig, max_dirs: usize, fuel: usize) -> Vec<RunLeaf> {
    enum_runs(cfg, max_dirs, fuel)
}

/// Directives and traces up to the first differing observation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub dirs: Vec<Dir>,
    pub trace1: Vec<Obs>,
    pub trace2: Vec<Obs>,
}

/// Explores the directive sequences both machines can follow, in
/// lexicographic order, and returns the first one on which they observe
/// different things.
pub fn first_divergence<M: Machine>(m1: M, m2: M, bounds: Bounds) -> Option<Divergence> {
    let mut d = Divergence { dirs: Vec::new(), trace1: Vec::new(), trace2: Vec::new() };
    joint(m1, bounds.fuel, m2, bounds.fuel, bounds.max_dirs, &mut d).then_some(d)
}

fn joint<M: Machine>(
    m1: M,
    mut f1: usize,
    m2: M,
    mut f2: usize,
    max_dirs: usize,
    path: &mut Divergence,
) -> bool {
    let (Settled::Blocked(m1), Settled::Blocked(m2)) = (settle(m1, &mut f1), settle(m2, &mut f2))
    else {
        return false;
    };
    if f1 == 0 || f2 == 0 || path.dirs.len() == max_dirs {
        return false;
    }
    let mut right = feasible(&m2);
    for (d, n1, o1) in feasible(&m1) {
        let Some(k) = right.iter().position(|(d2, _, _)| *d2 == d) else {
            continue;
        };
        let (_, n2, o2) = right.swap_remove(k);
        let differ = o1 != o2;
        path.dirs.push(d);
        path.trace1.push(o1);
        path.trace2.push(o2);
        if differ || joint(n1, f1 - 1, n2, f2 - 1, max_dirs, path) {
            return true;
        }
        path.dirs.pop();
        path.trace1.pop();
        path.trace2.pop();
    }
    false
}

pub(crate) fn witness(s1: &State, s2: &State, d: Divergence) -> Witness {
    Witness {
        s1: s1.clone(),
        s2: s2.clone(),
        diverges_at: d.trace1.len(),
        dirs: d.dirs,
        trace1: d.trace1,
        trace2: d.trace2,
    }
}

/// Sequential observational equivalence at the given fuel.
pub fn check_seq_obs_equiv(c: &Com, s1: &State, s2: &State, fuel: usize) -> Verdict {
    let t1 = seq_run(c, &s1.0, &s1.1, fuel).trace;
    let t2 = seq_run(c, &s2.0, &s2.1, fuel).trace;
    if prefix_of(&t1, &t2) {
        return Verdict::Holds { bounds: Bounds { max_dirs: 0, fuel }, pairs: 1 };
    }
    let at = t1.iter().zip(&t2).take_while(|(a, b)| a == b).count();
    Verdict::Violated(Box::new(Witness {
        s1: s1.clone(),
        s2: s2.clone(),
        dirs: Vec::new(),
        trace1: t1[..=at].to_vec(),
        trace2: t2[..=at].to_vec(),
        diverges_at: at + 1,
    }))
}

/// Speculative observational equivalence of two configurations under every
/// shared directive sequence within the bounds.
pub fn check_spec_obs_equiv(
    c1: &Com,
    s1: &State,
    c2: &Com,
    s2: &State,
    flag: bool,
    bounds: Bounds,
) -> Verdict {
    let m1 = SpecConfig { com: c1.clone(), rho: s1.0.clone(), mu: s1.1.clone(), flag };
    let m2 = SpecConfig { com: c2.clone(), rho: s2.0.clone(), mu: s2.1.clone(), flag };
    match first_divergence(m1, m2, bounds) {
        None => Verdict::Holds { bounds, pairs: 1 },
        Some(d) => Verdict::Violated(Box::new(witness(s1, s2, d))),
    }
}
