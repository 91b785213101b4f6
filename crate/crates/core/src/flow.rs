//! Annotated commands, the flow-sensitive label analysis and the
//! well-labeledness judgment.

use crate::ifc::{label_aexp, label_bexp};
use crate::label::{Label, Labeling};
use crate::lang::{pretty_aexp, pretty_bexp, AExp, BExp, Com};

/// A command carrying the labels the analysis computed for it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ACom {
    Skip,
    Asgn(String, AExp),
    /// Second field runs from the stored intermediate labeling.
    Seq(Box<ACom>, Box<ACom>, Labeling),
    /// Label of the condition.
    If(BExp, Box<ACom>, Box<ACom>, Label),
    /// Condition label and fixpoint labeling.
    While(BExp, Box<ACom>, Label, Labeling),
    /// `x <- a[i]` with the destination label and the index label.
    Read(String, String, AExp, Label, Label),
    /// `a[i] <- e` with the index label.
    Write(String, AExp, AExp, Label),
    /// Marks a branch body entered at program-counter label `pc`.
    Branch(Label, Box<ACom>),
}

impl ACom {
    /// `skip` under any number of branch markers.
    pub fn is_terminal(&self) -> bool {
        match self {
            ACom::Skip => true,
            ACom::Branch(_, c) => c.is_terminal(),
            _ => false,
        }
    }

    pub fn is_branch_free(&self) -> bool {
        match self {
            ACom::Skip | ACom::Asgn(..) | ACom::Read(..) | ACom::Write(..) => true,
            ACom::Seq(a, b, _) | ACom::If(_, a, b, _) => a.is_branch_free() && b.is_branch_free(),
            ACom::While(_, body, _, _) => body.is_branch_free(),
            ACom::Branch(..) => false,
        }
    }

    /// Label of the outermost branch marker, looking through the heads of
    /// sequences; `pc` when there is none.
    pub fn pc_of(&self, pc: Label) -> Label {
        match self {
            ACom::Branch(l, _) => *l,
            ACom::Seq(head, _, _) => head.pc_of(pc),
            _ => pc,
        }
    }

    pub fn erase(&self) -> Com {
        match self {
            ACom::Skip => Com::Skip,
            ACom::Asgn(x, e) => Com::Asgn(x.clone(), e.clone()),
            ACom::Seq(a, b, _) => Com::seq(a.erase(), b.erase()),
            ACom::If(be, a, b, _) => Com::if_(be.clone(), a.erase(), b.erase()),
            ACom::While(be, body, _, _) => Com::while_(be.clone(), body.erase()),
            ACom::Read(x, a, i, _, _) => Com::ARead(x.clone(), a.clone(), i.clone()),
            ACom::Write(a, i, e, _) => Com::AWrite(a.clone(), i.clone(), e.clone()),
            ACom::Branch(_, c) => c.erase(),
        }
    }
}

pub fn terminal(c: &ACom) -> bool {
    c.is_terminal()
}

pub fn branch_free(c: &ACom) -> bool {
    c.is_branch_free()
}

pub fn pc_of_acom(c: &ACom, pc: Label) -> Label {
    c.pc_of(pc)
}

pub fn erase_acom(c: &ACom) -> Com {
    c.erase()
}

pub fn join_labelings(l1: &Labeling, l2: &Labeling) -> Labeling {
    l1.join(l2)
}

/// Flow-sensitive analysis. Returns the annotated command and the labeling
/// after it.
pub fn flow_track(c: &Com, labels: &Labeling, pc: Label) -> (ACom, Labeling) {
    match c {
        Com::Skip => (ACom::Skip, labels.clone()),
        Com::Asgn(x, e) => {
            let mut out = labels.clone();
            out.set_var(x, label_aexp(labels, e));
            (ACom::Asgn(x.clone(), e.clone()), out)
        }
        Com::Seq(c1, c2) => {
            let (a1, mid) = flow_track(c1, labels, pc);
            let (a2, out) = flow_track(c2, &mid, pc);
            (ACom::Seq(Box::new(a1), Box::new(a2), mid), out)
        }
        Com::If(be, c1, c2) => {
            let l = label_bexp(labels, be);
            let (a1, o1) = flow_track(c1, labels, pc.join(l));
            let (a2, o2) = flow_track(c2, labels, pc.join(l));
            (ACom::If(be.clone(), Box::new(a1), Box::new(a2), l), o1.join(&o2))
        }
        Com::While(be, body) => {
            let fix = loop_fixpoint(be, body, labels, pc);
            let l = label_bexp(&fix, be);
            let (abody, _) = flow_track(body, &fix, pc.join(l));
            (ACom::While(be.clone(), Box::new(abody), l, fix.clone()), fix)
        }
        Com::ARead(x, a, i) => {
            let li = label_aexp(labels, i);
            let lx = pc.join(li).join(labels.arr(a));
            let mut out = labels.clone();
            out.set_var(x, lx);
            (ACom::Read(x.clone(), a.clone(), i.clone(), lx, li), out)
        }
        Com::AWrite(a, i, e) => {
            let li = label_aexp(labels, i);
            let la = labels.arr(a).join(pc).join(li).join(label_aexp(labels, e));
            let mut out = labels.clone();
            out.set_arr(a, la);
            (ACom::Write(a.clone(), i.clone(), e.clone(), li), out)
        }
    }
}

/// Iterates `L ↦ analyse(body, L) ⊔ entry` from the entry labeling. Each
/// unstable round turns at least one assigned name secret, so the number of
/// assigned names bounds the rounds.
fn loop_fixpoint(be: &BExp, body: &Com, entry: &Labeling, pc: Label) -> Labeling {
    let (vars, arrs) = body.assigned();
    let rounds = vars.len() + arrs.len() + 1;
    let mut fix = entry.clone();
    for _ in 0..rounds {
        let l = label_bexp(&fix, be);
        let (_, after) = flow_track(body, &fix, pc.join(l));
        let next = after.join(entry);
        if next == fix {
            break;
        }
        fix = next;
    }
    fix
}

/// Checks that the annotations of `c` over-approximate the flows from
/// `initial` to `fin` at program counter `pc`.
pub fn well_labeled(c: &ACom, initial: &Labeling, pc: Label, fin: &Labeling) -> bool {
    match c {
        ACom::Skip => initial.flows_to(fin),
        ACom::Asgn(x, e) => {
            let mut after = initial.clone();
            after.set_var(x, label_aexp(initial, e));
            after.flows_to(fin)
        }
        ACom::Seq(c1, c2, mid) => {
            c2.is_branch_free()
                && well_labeled(c1, initial, pc, mid)
                && well_labeled(c2, mid, c1.pc_of(pc), fin)
        }
        ACom::If(be, c1, c2, l) => {
            let pc = pc.join(*l);
            label_bexp(initial, be).flows_to(*l)
                && c1.is_branch_free()
                && c2.is_branch_free()
                && well_labeled(c1, initial, pc, fin)
                && well_labeled(c2, initial, pc, fin)
        }
        ACom::While(be, body, l, fix) => {
            label_bexp(initial, be).flows_to(*l)
                && label_bexp(fix, be).flows_to(*l)
                && body.is_branch_free()
                && initial.flows_to(fix)
                && fix.flows_to(fin)
                && well_labeled(body, fix, pc.join(*l), fix)
        }
        ACom::Read(x, a, i, lx, li) => {
            let mut after = initial.clone();
            after.set_var(x, *lx);
            label_aexp(initial, i).flows_to(*li)
                && pc.flows_to(*lx)
                && li.flows_to(*lx)
                && initial.arr(a).flows_to(*lx)
                && after.flows_to(fin)
        }
        ACom::Write(a, i, e, li) => {
            let mut after = initial.clone();
            let la = initial
                .arr(a)
                .join(pc)
                .join(*li)
                .join(label_aexp(initial, e));
            after.set_arr(a, la);
            label_aexp(initial, i).flows_to(*li) && after.flows_to(fin)
        }
        ACom::Branch(_, inner) => well_labeled(inner, initial, pc, fin),
    }
}

/// Prints the program with its annotations as trailing `#` comments. The
/// output parses back to the erased program.
pub fn pretty_acom(c: &ACom) -> String {
    let mut out = String::new();
    acom(c, 0, &mut out);
    out
}

fn publics(l: &Labeling) -> String {
    let names: Vec<&str> = l.public_vars().chain(l.public_arrs()).collect();
    format!("{{{}}}", names.join(", "))
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn acom(c: &ACom, depth: usize, out: &mut String) {
    match c {
        ACom::Seq(a, b, _) => {
            acom(a, depth, out);
            // Put the separator before any trailing comment on the line.
            let line_start = out.rfind('\n').map_or(0, |p| p + 1);
            match out[line_start..].find("  #") {
                Some(p) => out.insert(line_start + p, ';'),
                None => out.push(';'),
            }
            out.push('\n');
            acom(b, depth, out);
        }
        ACom::Branch(l, inner) => {
            indent(depth, out);
            out.push_str(&format!("# entered branch at pc {l}\n"));
            acom(inner, depth, out);
        }
        _ => {
            indent(depth, out);
            simple(c, depth, out);
        }
    }
}

fn simple(c: &ACom, depth: usize, out: &mut String) {
    match c {
        ACom::Skip => out.push_str("skip"),
        ACom::Asgn(x, e) => out.push_str(&format!("{x} := {}", pretty_aexp(e))),
        ACom::Read(x, a, i, lx, li) => out.push_str(&format!(
            "{x} <- {a}[{}]  # dest {lx}, index {li}",
            pretty_aexp(i)
        )),
        ACom::Write(a, i, e, li) => out.push_str(&format!(
            "{a}[{}] <- {}  # index {li}",
            pretty_aexp(i),
            pretty_aexp(e)
        )),
        ACom::If(be, c1, c2, l) => {
            out.push_str(&format!("if {} then  # condition {l}\n", pretty_bexp(be)));
            acom(c1, depth + 1, out);
            if **c2 != ACom::Skip {
                out.push('\n');
                indent(depth, out);
                out.push_str("else\n");
                acom(c2, depth + 1, out);
            }
            out.push('\n');
            indent(depth, out);
            out.push_str("end");
        }
        ACom::While(be, body, l, fix) => {
            out.push_str(&format!(
                "while {} do  # condition {l}, fixpoint public {}\n",
                pretty_bexp(be),
                publics(fix)
            ));
            acom(body, depth + 1, out);
            out.push('\n');
            indent(depth, out);
            out.push_str("end");
        }
        ACom::Seq(..) | ACom::Branch(..) => acom(c, depth, out),
    }
}
