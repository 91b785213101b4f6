//! Abstract syntax of AWhile, expression evaluation and name queries.

mod parser;
mod printer;

use std::collections::BTreeSet;
use std::fmt;

pub use parser::{parse_com, ParseError};
pub use printer::{pretty_aexp, pretty_bexp, pretty_com};

use crate::state::ScalarState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Le,
    Lt,
}

/// Arithmetic expressions over naturals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AExp {
    Num(u64),
    Var(String),
    Bin(ArithOp, Box<AExp>, Box<AExp>),
    /// Constant-time conditional `(be ? e1 : e2)`.
    Cond(Box<BExp>, Box<AExp>, Box<AExp>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BExp {
    Bool(bool),
    Cmp(CmpOp, AExp, AExp),
    Not(Box<BExp>),
    And(Box<BExp>, Box<BExp>),
    Or(Box<BExp>, Box<BExp>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Com {
    Skip,
    Asgn(String, AExp),
    Seq(Box<Com>, Box<Com>),
    If(BExp, Box<Com>, Box<Com>),
    While(BExp, Box<Com>),
    /// `x <- a[i]`
    ARead(String, String, AExp),
    /// `a[i] <- e`
    AWrite(String, AExp, AExp),
}

impl AExp {
    pub fn num(n: u64) -> Self {
        AExp::Num(n)
    }

    pub fn var(x: impl Into<String>) -> Self {
        AExp::Var(x.into())
    }

    pub fn bin(op: ArithOp, l: AExp, r: AExp) -> Self {
        AExp::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn cond(b: BExp, t: AExp, e: AExp) -> Self {
        AExp::Cond(Box::new(b), Box::new(t), Box::new(e))
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            AExp::Num(_) => {}
            AExp::Var(x) => {
                out.insert(x.clone());
            }
            AExp::Bin(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
            AExp::Cond(b, t, e) => {
                b.vars(out);
                t.vars(out);
                e.vars(out);
            }
        }
    }
}

impl BExp {
    pub fn cmp(op: CmpOp, l: AExp, r: AExp) -> Self {
        BExp::Cmp(op, l, r)
    }

    pub fn not(b: BExp) -> Self {
        BExp::Not(Box::new(b))
    }

    pub fn and(l: BExp, r: BExp) -> Self {
        BExp::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: BExp, r: BExp) -> Self {
        BExp::Or(Box::new(l), Box::new(r))
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            BExp::Bool(_) => {}
            BExp::Cmp(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
            BExp::Not(b) => b.vars(out),
            BExp::And(l, r) | BExp::Or(l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }
}

impl Com {
    pub fn asgn(x: impl Into<String>, e: AExp) -> Self {
        Com::Asgn(x.into(), e)
    }

    pub fn seq(c1: Com, c2: Com) -> Self {
        Com::Seq(Box::new(c1), Box::new(c2))
    }

    pub fn if_(b: BExp, c1: Com, c2: Com) -> Self {
        Com::If(b, Box::new(c1), Box::new(c2))
    }

    pub fn while_(b: BExp, body: Com) -> Self {
        Com::While(b, Box::new(body))
    }

    pub fn read(x: impl Into<String>, a: impl Into<String>, i: AExp) -> Self {
        Com::ARead(x.into(), a.into(), i)
    }

    pub fn write(a: impl Into<String>, i: AExp, e: AExp) -> Self {
        Com::AWrite(a.into(), i, e)
    }

    /// Number of command nodes.
    pub fn size(&self) -> usize {
        match self {
            Com::Skip | Com::Asgn(..) | Com::ARead(..) | Com::AWrite(..) => 1,
            Com::Seq(a, b) | Com::If(_, a, b) => 1 + a.size() + b.size(),
            Com::While(_, b) => 1 + b.size(),
        }
    }

    /// Array names read or written.
    pub fn arrays(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_arrays(&mut out);
        out
    }

    fn collect_arrays(&self, out: &mut BTreeSet<String>) {
        match self {
            Com::ARead(_, a, _) | Com::AWrite(a, _, _) => {
                out.insert(a.clone());
            }
            Com::Seq(a, b) | Com::If(_, a, b) => {
                a.collect_arrays(out);
                b.collect_arrays(out);
            }
            Com::While(_, b) => b.collect_arrays(out),
            Com::Skip | Com::Asgn(..) => {}
        }
    }

    /// Scalars and arrays that some command may assign.
    pub fn assigned(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut vars = BTreeSet::new();
        let mut arrs = BTreeSet::new();
        self.collect_assigned(&mut vars, &mut arrs);
        (vars, arrs)
    }

    fn collect_assigned(&self, vars: &mut BTreeSet<String>, arrs: &mut BTreeSet<String>) {
        match self {
            Com::Asgn(x, _) | Com::ARead(x, _, _) => {
                vars.insert(x.clone());
            }
            Com::AWrite(a, _, _) => {
                arrs.insert(a.clone());
            }
            Com::Seq(a, b) | Com::If(_, a, b) => {
                a.collect_assigned(vars, arrs);
                b.collect_assigned(vars, arrs);
            }
            Com::While(_, b) => b.collect_assigned(vars, arrs),
            Com::Skip => {}
        }
    }
}

impl fmt::Display for Com {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_com(self))
    }
}

impl fmt::Display for AExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_aexp(self))
    }
}

impl fmt::Display for BExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_bexp(self))
    }
}

pub fn eval_aexp(rho: &ScalarState, e: &AExp) -> u64 {
    match e {
        AExp::Num(n) => *n,
        AExp::Var(x) => rho.get(x),
        AExp::Bin(op, l, r) => {
            let (l, r) = (eval_aexp(rho, l), eval_aexp(rho, r));
            match op {
                ArithOp::Add => l.saturating_add(r),
                ArithOp::Sub => l.saturating_sub(r),
                ArithOp::Mul => l.saturating_mul(r),
            }
        }
        AExp::Cond(b, t, e) => {
            if eval_bexp(rho, b) {
                eval_aexp(rho, t)
            } else {
                eval_aexp(rho, e)
            }
        }
    }
}

pub fn eval_bexp(rho: &ScalarState, b: &BExp) -> bool {
    match b {
        BExp::Bool(v) => *v,
        BExp::Cmp(op, l, r) => {
            let (l, r) = (eval_aexp(rho, l), eval_aexp(rho, r));
            match op {
                CmpOp::Eq => l == r,
                CmpOp::Ne => l != r,
                CmpOp::Le => l <= r,
                CmpOp::Lt => l < r,
            }
        }
        BExp::Not(b) => !eval_bexp(rho, b),
        BExp::And(l, r) => eval_bexp(rho, l) && eval_bexp(rho, r),
        BExp::Or(l, r) => eval_bexp(rho, l) || eval_bexp(rho, r),
    }
}

/// Every scalar name occurring in `c`, whether read or written.
pub fn used_vars(c: &Com) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_used(c, &mut out);
    out
}

fn collect_used(c: &Com, out: &mut BTreeSet<String>) {
    match c {
        Com::Skip => {}
        Com::Asgn(x, e) => {
            out.insert(x.clone());
            e.vars(out);
        }
        Com::Seq(a, b) => {
            collect_used(a, out);
            collect_used(b, out);
        }
        Com::If(be, a, b) => {
            be.vars(out);
            collect_used(a, out);
            collect_used(b, out);
        }
        Com::While(be, b) => {
            be.vars(out);
            collect_used(b, out);
        }
        Com::ARead(x, _, i) => {
            out.insert(x.clone());
            i.vars(out);
        }
        Com::AWrite(_, i, e) => {
            i.vars(out);
            e.vars(out);
        }
    }
}
