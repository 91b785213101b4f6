//! Directive-driven small-step machines and a shared bounded runner.

use crate::state::{ArrayState, Dir, Obs};

/// Result of one step attempt. Every variant hands the configuration back
/// so callers never have to clone before stepping.
#[derive(Debug)]
pub enum Step<C> {
    /// A rule fired without consuming a directive.
    Silent(C),
    /// A rule fired, consumed the directive and emitted an observation.
    Observed(C, Obs),
    /// The next rule consumes a directive and none was supplied.
    NeedsDirective(C),
    /// No rule applies to the supplied directive (or the configuration is final).
    Stuck(C),
}

/// Kind of an observing redex at the head of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Redex {
    Branch,
    Read,
    Write,
}

pub trait Machine: Clone + Send + Sync {
    fn step(self, dir: Option<&Dir>) -> Step<Self>;
    fn is_final(&self) -> bool;
    fn flag(&self) -> bool;
    fn arrays(&self) -> &ArrayState;
    /// The observing redex the next step would fire, if any.
    fn pending(&self) -> Option<Redex>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeKind {
    Terminated,
    Stuck,
    FuelExhausted,
    DirectivesExhausted,
}

impl std::fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutcomeKind::Terminated => "terminated",
            OutcomeKind::Stuck => "stuck",
            OutcomeKind::FuelExhausted => "fuel-exhausted",
            OutcomeKind::DirectivesExhausted => "directives-exhausted",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Outcome<C> {
    pub kind: OutcomeKind,
    pub config: C,
    pub trace: Vec<Obs>,
    /// Directives consumed; always equal to `trace.len()`.
    pub consumed: usize,
    pub steps: usize,
}

/// Runs `m` on `dirs` for at most `fuel` steps, silent or not.
pub fn run<M: Machine>(mut m: M, dirs: &[Dir], fuel: usize) -> Outcome<M> {
    let mut trace = Vec::new();
    let mut steps = 0;
    let kind = loop {
        if m.is_final() {
            break OutcomeKind::Terminated;
        }
        if steps == fuel {
            break OutcomeKind::FuelExhausted;
        }
        match m.step(dirs.get(trace.len())) {
            Step::Silent(next) => m = next,
            Step::Observed(next, o) => {
                m = next;
                trace.push(o);
            }
            Step::NeedsDirective(back) => {
                m = back;
                break OutcomeKind::DirectivesExhausted;
            }
            Step::Stuck(back) => {
                m = back;
                break OutcomeKind::Stuck;
            }
        }
        steps += 1;
    };
    Outcome { kind, config: m, consumed: trace.len(), trace, steps }
}

/// Where a machine stops when run silently.
pub enum Settled<M> {
    /// At an observing redex; the directive decides what happens next.
    Blocked(M),
    Final(M),
    OutOfFuel(M),
}

/// Takes silent steps until a directive is needed, charging `fuel`.
pub fn settle<M: Machine>(mut m: M, fuel: &mut usize) -> Settled<M> {
    loop {
        if m.is_final() {
            return Settled::Final(m);
        }
        if *fuel == 0 {
            return Settled::OutOfFuel(m);
        }
        match m.step(None) {
            Step::Silent(next) => {
                *fuel -= 1;
                m = next;
            }
            Step::NeedsDirective(back) | Step::Stuck(back) => return Settled::Blocked(back),
            Step::Observed(..) => unreachable!("observation without a directive"),
        }
    }
}

/// Directives worth trying at the current redex, in witness order.
pub fn candidates<M: Machine>(m: &M) -> Vec<Dir> {
    let mut out = vec![Dir::Step];
    match m.pending() {
        Some(Redex::Branch) => out.push(Dir::Force),
        Some(kind @ (Redex::Read | Redex::Write)) if m.flag() => {
            for (a, vs) in m.arrays().iter() {
                for j in 0..vs.len() as u64 {
                    out.push(if kind == Redex::Read {
                        Dir::Load(a.to_string(), j)
                    } else {
                        Dir::Store(a.to_string(), j)
                    });
                }
            }
        }
        _ => {}
    }
    out
}

/// Every directive some rule consumes at a blocked configuration, with the
/// resulting successor and observation. An access that `Step` performs is in
/// bounds or masked, and no rule redirects such an access, so the remaining
/// candidates are skipped.
pub fn feasible<M: Machine>(m: &M) -> Vec<(Dir, M, Obs)> {
    let access = matches!(m.pending(), Some(Redex::Read | Redex::Write));
    let mut out = Vec::new();
    for d in candidates(m) {
        let is_step = d == Dir::Step;
        if let Step::Observed(next, o) = m.clone().step(Some(&d)) {
            out.push((d, next, o));
            if is_step && access {
                break;
            }
        }
    }
    out
}
