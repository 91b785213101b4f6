//! Seeded random programs, states, labelings and directive sequences.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::label::{Label, Labeling};
use crate::lang::{AExp, ArithOp, BExp, CmpOp, Com};
use crate::machine::{feasible, settle, Machine, Settled};
use crate::state::{ArrayState, Dir, ScalarState};

use super::State;

/// Names generated programs may use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamePools {
    pub vars: Vec<String>,
    pub arrays: Vec<String>,
}

impl Default for NamePools {
    fn default() -> Self {
        NamePools {
            vars: ["x", "y", "z", "i", "k"].map(String::from).to_vec(),
            arrays: ["a", "s"].map(String::from).to_vec(),
        }
    }
}

/// Largest literal generated programs and states use.
const MAX_VALUE: u64 = 3;
const MAX_ARRAY: usize = 3;

struct Gen<'a> {
    rng: ChaCha8Rng,
    pools: &'a NamePools,
}

impl Gen<'_> {
    fn aexp(&mut self, depth: usize) -> AExp {
        let leaf = depth == 0 || self.rng.gen_bool(0.5);
        if leaf {
            return if self.pools.vars.is_empty() || self.rng.gen_bool(0.4) {
                AExp::num(self.rng.gen_range(0..=MAX_VALUE))
            } else {
                AExp::var(self.pools.vars.choose(&mut self.rng).unwrap().clone())
            };
        }
        if self.rng.gen_bool(0.8) {
            let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul].choose(&mut self.rng).unwrap();
            AExp::bin(op, self.aexp(depth - 1), self.aexp(depth - 1))
        } else {
            AExp::cond(self.bexp(depth - 1), self.aexp(depth - 1), self.aexp(depth - 1))
        }
    }

    fn bexp(&mut self, depth: usize) -> BExp {
        match self.rng.gen_range(0..10) {
            0 => BExp::Bool(self.rng.gen()),
            1 if depth > 0 => BExp::not(self.bexp(depth - 1)),
            2 if depth > 0 => BExp::and(self.bexp(depth - 1), self.bexp(depth - 1)),
            3 if depth > 0 => BExp::or(self.bexp(depth - 1), self.bexp(depth - 1)),
            _ => {
                let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Le, CmpOp::Lt].choose(&mut self.rng).unwrap();
                BExp::cmp(op, self.aexp(depth.min(1)), self.aexp(depth.min(1)))
            }
        }
    }

    fn atom(&mut self, assignable: &[String], simple: bool) -> Com {
        let choice = if simple { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..4) };
        let x = assignable.choose(&mut self.rng).cloned();
        let a = self.pools.arrays.choose(&mut self.rng).cloned();
        match (choice, x, a) {
            (1, Some(x), _) => Com::asgn(x, self.aexp(2)),
            (2, Some(x), Some(a)) => Com::read(x, a, self.aexp(1)),
            (3, _, Some(a)) => Com::write(a, self.aexp(1), self.aexp(1)),
            _ => Com::Skip,
        }
    }

    /// A command with at most `budget` nodes. Sequences keep a non-sequence
    /// head so the printer and parser agree on the shape.
    fn com(&mut self, budget: usize, assignable: &[String]) -> Com {
        if budget <= 1 {
            return self.atom(assignable, true);
        }
        match self.rng.gen_range(0..10) {
            0..=2 => self.atom(assignable, false),
            3..=5 if budget >= 3 => {
                let head_budget = self.rng.gen_range(1..budget - 1);
                let head = loop {
                    let h = self.com(head_budget, assignable);
                    if !matches!(h, Com::Seq(..)) {
                        break h;
                    }
                };
                let tail = self.com(budget - 1 - head.size(), assignable);
                Com::seq(head, tail)
            }
            6..=8 if budget >= 3 => {
                let rest = budget - 1;
                let left = self.rng.gen_range(1..rest);
                let then = self.com(left, assignable);
                let els = self.com(rest - then.size(), assignable);
                Com::if_(self.bexp(1), then, els)
            }
            _ if budget >= 4 && !assignable.is_empty() => {
                let counter = assignable.choose(&mut self.rng).unwrap().clone();
                let inner: Vec<String> = assignable.iter().filter(|v| **v != counter).cloned().collect();
                let body = self.com(budget - 3, &inner);
                let bound = self.rng.gen_range(1..=MAX_VALUE);
                let step = Com::asgn(counter.clone(), AExp::bin(ArithOp::Add, AExp::var(&counter), AExp::num(1)));
                Com::while_(
                    BExp::cmp(CmpOp::Lt, AExp::var(&counter), AExp::num(bound)),
                    append(body, step),
                )
            }
            _ => self.atom(assignable, false),
        }
    }
}

/// Appends `last` at the end of a right-nested sequence.
fn append(c: Com, last: Com) -> Com {
    match c {
        Com::Seq(h, t) => Com::Seq(h, Box::new(append(*t, last))),
        c => Com::seq(c, last),
    }
}

/// A deterministic random program with at most `budget` command nodes.
/// Loops count a variable up to a small constant and never assign the
/// counter in their body.
pub fn gen_program(seed: u64, budget: usize, pools: &NamePools) -> Com {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), pools };
    let vars = pools.vars.clone();
    g.com(budget.max(1), &vars)
}

/// A state binding every pooled name: scalars in `0..=3`, arrays of one to
/// three elements in `0..=3`.
pub fn gen_state(seed: u64, pools: &NamePools) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rho = ScalarState::new();
    for x in &pools.vars {
        rho.set(x, rng.gen_range(0..=MAX_VALUE));
    }
    let mut mu = ArrayState::new();
    for a in &pools.arrays {
        let n = rng.gen_range(1..=MAX_ARRAY);
        mu.insert(a, (0..n).map(|_| rng.gen_range(0..=MAX_VALUE)).collect());
    }
    (rho, mu)
}

/// A copy of `s` with fresh values for every secret name. Array sizes are
/// kept so that the two states agree on bounds.
pub fn gen_secret_variant(seed: u64, s: &State, labels: &Labeling, pools: &NamePools) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut rho, mut mu) = s.clone();
    for x in &pools.vars {
        if labels.var(x) == Label::Secret {
            rho.set(x, rng.gen_range(0..=MAX_VALUE));
        }
    }
    let names: Vec<String> = mu.names().map(String::from).collect();
    for a in names {
        if labels.arr(&a) == Label::Secret {
            let n = mu.len(&a);
            mu.insert(&a, (0..n).map(|_| rng.gen_range(0..=MAX_VALUE)).collect());
        }
    }
    (rho, mu)
}

/// Each pooled name is public with probability one half.
pub fn gen_labeling(seed: u64, pools: &NamePools) -> Labeling {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<&str> = pools.vars.iter().filter(|_| rng.gen_bool(0.5)).map(String::as_str).collect();
    let arrs: Vec<&str> = pools.arrays.iter().filter(|_| rng.gen_bool(0.5)).map(String::as_str).collect();
    Labeling::with_public(vars, arrs)
}

/// Follows uniformly chosen feasible directives for at most `max_dirs`
/// observing steps.
pub fn random_feasible_dirs<M: Machine>(seed: u64, m: M, max_dirs: usize, mut fuel: usize) -> Vec<Dir> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs = Vec::new();
    let mut m = m;
    while dirs.len() < max_dirs {
        let Settled::Blocked(b) = settle(m, &mut fuel) else { break };
        if fuel == 0 {
            break;
        }
        let mut next = feasible(&b);
        if next.is_empty() {
            break;
        }
        let k = rng.gen_range(0..next.len());
        let (d, n, _) = next.swap_remove(k);
        dirs.push(d);
        m = n;
        fuel -= 1;
    }
    dirs
}
