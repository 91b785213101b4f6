//! Sequential small-step semantics with observation traces.

use crate::lang::{eval_aexp, eval_bexp, Com};
use crate::state::{ArrayState, Obs, ScalarState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqKind {
    Terminated,
    Stuck,
    FuelExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqOutcome {
    pub kind: SeqKind,
    pub com: Com,
    pub rho: ScalarState,
    pub mu: ArrayState,
    pub trace: Vec<Obs>,
    pub steps: usize,
}

/// One step; `None` when `c` is `skip` or an access is out of bounds.
pub fn seq_step(
    c: &Com,
    rho: &ScalarState,
    mu: &ArrayState,
) -> Option<(Com, ScalarState, ArrayState, Option<Obs>)> {
    let (mut rho, mut mu) = (rho.clone(), mu.clone());
    let (c, o) = step_owned(c.clone(), &mut rho, &mut mu).ok()?;
    Some((c, rho, mu, o))
}

/// Steps `c` in place. On failure the command is handed back untouched and
/// the stores are unchanged.
pub(crate) fn step_owned(
    c: Com,
    rho: &mut ScalarState,
    mu: &mut ArrayState,
) -> Result<(Com, Option<Obs>), Com> {
    match c {
        Com::Skip => Err(Com::Skip),
        Com::Asgn(x, e) => {
            let v = eval_aexp(rho, &e);
            rho.set(&x, v);
            Ok((Com::Skip, None))
        }
        Com::Seq(c1, c2) => {
            if *c1 == Com::Skip {
                return Ok((*c2, None));
            }
            match step_owned(*c1, rho, mu) {
                Ok((c1, o)) => Ok((Com::Seq(Box::new(c1), c2), o)),
                Err(c1) => Err(Com::Seq(Box::new(c1), c2)),
            }
        }
        Com::If(be, c1, c2) => {
            let b = eval_bexp(rho, &be);
            Ok((if b { *c1 } else { *c2 }, Some(Obs::Branch(b))))
        }
        Com::While(be, body) => {
            let again = Com::While(be.clone(), body.clone());
            Ok((Com::if_(be, Com::Seq(body, Box::new(again)), Com::Skip), None))
        }
        Com::ARead(x, a, ie) => {
            let i = eval_aexp(rho, &ie);
            match mu.read(&a, i) {
                Some(v) => {
                    rho.set(&x, v);
                    Ok((Com::Skip, Some(Obs::Read(a, i))))
                }
                None => Err(Com::ARead(x, a, ie)),
            }
        }
        Com::AWrite(a, ie, e) => {
            let i = eval_aexp(rho, &ie);
            let v = eval_aexp(rho, &e);
            if mu.write(&a, i, v) {
                Ok((Com::Skip, Some(Obs::Write(a, i))))
            } else {
                Err(Com::AWrite(a, ie, e))
            }
        }
    }
}

/// Runs for at most `fuel` steps; every step costs one unit.
pub fn seq_run(c: &Com, rho: &ScalarState, mu: &ArrayState, fuel: usize) -> SeqOutcome {
    let (mut rho, mut mu) = (rho.clone(), mu.clone());
    let mut com = c.clone();
    let mut trace = Vec::new();
    let mut steps = 0;
    let kind = loop {
        if com == Com::Skip {
            break SeqKind::Terminated;
        }
        if steps == fuel {
            break SeqKind::FuelExhausted;
        }
        match step_owned(com, &mut rho, &mut mu) {
            Ok((next, o)) => {
                com = next;
                trace.extend(o);
                steps += 1;
            }
            Err(back) => {
                com = back;
                break SeqKind::Stuck;
            }
        }
    };
    SeqOutcome { kind, com, rho, mu, trace, steps }
}
