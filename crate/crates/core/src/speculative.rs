//! Speculative semantics: the attacker steers branches and redirects
//! out-of-bounds accesses once misspeculation has started.

use crate::lang::{eval_aexp, eval_bexp, Com};
use crate::machine::{self, Machine, Outcome, Redex, Step};
use crate::state::{ArrayState, Dir, Obs, ScalarState};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpecConfig {
    pub com: Com,
    pub rho: ScalarState,
    pub mu: ArrayState,
    /// Misspeculation flag.
    pub flag: bool,
}

impl SpecConfig {
    pub fn new(com: Com, rho: ScalarState, mu: ArrayState) -> Self {
        SpecConfig { com, rho, mu, flag: false }
    }
}

enum R {
    Silent(Com),
    Obs(Com, Obs),
    Blocked(Com),
    Stuck(Com),
}

fn step_com(
    c: Com,
    rho: &mut ScalarState,
    mu: &mut ArrayState,
    flag: &mut bool,
    dir: Option<&Dir>,
) -> R {
    match c {
        Com::Skip => R::Stuck(Com::Skip),
        Com::Asgn(x, e) => {
            let v = eval_aexp(rho, &e);
            rho.set(&x, v);
            R::Silent(Com::Skip)
        }
        Com::Seq(c1, c2) => {
            if *c1 == Com::Skip {
                return R::Silent(*c2);
            }
            let wrap = |c1: Com| Com::Seq(Box::new(c1), c2);
            match step_com(*c1, rho, mu, flag, dir) {
                R::Silent(c1) => R::Silent(wrap(c1)),
                R::Obs(c1, o) => R::Obs(wrap(c1), o),
                R::Blocked(c1) => R::Blocked(wrap(c1)),
                R::Stuck(c1) => R::Stuck(wrap(c1)),
            }
        }
        Com::While(be, body) => {
            let again = Com::While(be.clone(), body.clone());
            R::Silent(Com::if_(be, Com::Seq(body, Box::new(again)), Com::Skip))
        }
        Com::If(be, c1, c2) => {
            let b = eval_bexp(rho, &be);
            match dir {
                None => R::Blocked(Com::If(be, c1, c2)),
                Some(Dir::Step) => R::Obs(if b { *c1 } else { *c2 }, Obs::Branch(b)),
                Some(Dir::Force) => {
                    *flag = true;
                    R::Obs(if b { *c2 } else { *c1 }, Obs::Branch(b))
                }
                Some(_) => R::Stuck(Com::If(be, c1, c2)),
            }
        }
        Com::ARead(x, a, ie) => {
            let i = eval_aexp(rho, &ie);
            let v = match dir {
                None => return R::Blocked(Com::ARead(x, a, ie)),
                Some(Dir::Step) => mu.read(&a, i),
                Some(Dir::Load(b, j)) if *flag && i >= mu.len(&a) as u64 => mu.read(b, *j),
                Some(_) => None,
            };
            match v {
                Some(v) => {
                    rho.set(&x, v);
                    R::Obs(Com::Skip, Obs::Read(a, i))
                }
                None => R::Stuck(Com::ARead(x, a, ie)),
            }
        }
        Com::AWrite(a, ie, e) => {
            let i = eval_aexp(rho, &ie);
            let v = eval_aexp(rho, &e);
            let ok = match dir {
                None => return R::Blocked(Com::AWrite(a, ie, e)),
                Some(Dir::Step) => mu.write(&a, i, v),
                Some(Dir::Store(b, j)) if *flag && i >= mu.len(&a) as u64 => mu.write(b, *j, v),
                Some(_) => false,
            };
            if ok {
                R::Obs(Com::Skip, Obs::Write(a, i))
            } else {
                R::Stuck(Com::AWrite(a, ie, e))
            }
        }
    }
}

pub(crate) fn head_redex(c: &Com) -> Option<Redex> {
    match c {
        Com::Seq(c1, _) if **c1 != Com::Skip => head_redex(c1),
        Com::If(..) => Some(Redex::Branch),
        Com::ARead(..) => Some(Redex::Read),
        Com::AWrite(..) => Some(Redex::Write),
        _ => None,
    }
}

impl Machine for SpecConfig {
    fn step(self, dir: Option<&Dir>) -> Step<Self> {
        let SpecConfig { com, mut rho, mut mu, mut flag } = self;
        match step_com(com, &mut rho, &mut mu, &mut flag, dir) {
            R::Silent(com) => Step::Silent(SpecConfig { com, rho, mu, flag }),
            R::Obs(com, o) => Step::Observed(SpecConfig { com, rho, mu, flag }, o),
            R::Blocked(com) => Step::NeedsDirective(SpecConfig { com, rho, mu, flag }),
            R::Stuck(com) => Step::Stuck(SpecConfig { com, rho, mu, flag }),
        }
    }

    fn is_final(&self) -> bool {
        self.com == Com::Skip
    }

    fn flag(&self) -> bool {
        self.flag
    }

    fn arrays(&self) -> &ArrayState {
        &self.mu
    }

    fn pending(&self) -> Option<Redex> {
        head_redex(&self.com)
    }
}

/// One step. `None` when no rule applies, including when the next rule
/// needs a directive and `next` is `None`. The count is the number of
/// directives consumed.
pub fn spec_step(cfg: &SpecConfig, next: Option<&Dir>) -> Option<(SpecConfig, Option<Obs>, usize)> {
    match cfg.clone().step(next) {
        Step::Silent(c) => Some((c, None, 0)),
        Step::Observed(c, o) => Some((c, Some(o), 1)),
        Step::NeedsDirective(_) | Step::Stuck(_) => None,
    }
}

pub fn spec_run(cfg: SpecConfig, dirs: &[Dir], fuel: usize) -> Outcome<SpecConfig> {
    machine::run(cfg, dirs, fuel)
}
