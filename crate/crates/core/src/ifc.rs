//! Expression labels and the flow-insensitive type systems.

use crate::label::{Label, Labeling};
use crate::lang::{AExp, BExp, Com};

/// Join of the labels of all variables in `e`; literals are public.
pub fn label_aexp(labels: &Labeling, e: &AExp) -> Label {
    match e {
        AExp::Num(_) => Label::Public,
        AExp::Var(x) => labels.var(x),
        AExp::Bin(_, l, r) => label_aexp(labels, l).join(label_aexp(labels, r)),
        AExp::Cond(b, t, f) => label_bexp(labels, b)
            .join(label_aexp(labels, t))
            .join(label_aexp(labels, f)),
    }
}

pub fn label_bexp(labels: &Labeling, b: &BExp) -> Label {
    match b {
        BExp::Bool(_) => Label::Public,
        BExp::Cmp(_, l, r) => label_aexp(labels, l).join(label_aexp(labels, r)),
        BExp::Not(b) => label_bexp(labels, b),
        BExp::And(l, r) | BExp::Or(l, r) => label_bexp(labels, l).join(label_bexp(labels, r)),
    }
}

/// IFC typing with implicit flows tracked through `pc`. Secret branch
/// conditions and secret indices are allowed.
pub fn wt_ifc(labels: &Labeling, pc: Label, c: &Com) -> bool {
    match c {
        Com::Skip => true,
        Com::Asgn(x, e) => pc.join(label_aexp(labels, e)).flows_to(labels.var(x)),
        Com::Seq(a, b) => wt_ifc(labels, pc, a) && wt_ifc(labels, pc, b),
        Com::If(be, a, b) => {
            let pc = pc.join(label_bexp(labels, be));
            wt_ifc(labels, pc, a) && wt_ifc(labels, pc, b)
        }
        Com::While(be, body) => wt_ifc(labels, pc.join(label_bexp(labels, be)), body),
        Com::ARead(x, a, i) => pc
            .join(label_aexp(labels, i))
            .join(labels.arr(a))
            .flows_to(labels.var(x)),
        Com::AWrite(a, i, e) => pc
            .join(label_aexp(labels, i))
            .join(label_aexp(labels, e))
            .flows_to(labels.arr(a)),
    }
}

/// Constant-time typing: public conditions and indices, explicit flows only.
pub fn wt_cct(labels: &Labeling, c: &Com) -> bool {
    match c {
        Com::Skip => true,
        Com::Asgn(x, e) => label_aexp(labels, e).flows_to(labels.var(x)),
        Com::Seq(a, b) => wt_cct(labels, a) && wt_cct(labels, b),
        Com::If(be, a, b) => {
            label_bexp(labels, be).is_public() && wt_cct(labels, a) && wt_cct(labels, b)
        }
        Com::While(be, body) => label_bexp(labels, be).is_public() && wt_cct(labels, body),
        Com::ARead(x, a, i) => {
            label_aexp(labels, i).is_public() && labels.arr(a).flows_to(labels.var(x))
        }
        Com::AWrite(a, i, e) => {
            label_aexp(labels, i).is_public() && label_aexp(labels, e).flows_to(labels.arr(a))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_com, ArithOp, CmpOp};

    fn l1_labels() -> Labeling {
        Labeling::with_public(["i", "a1_size", "j", "x"], ["a1", "a2"])
    }

    #[test]
    fn expression_labels() {
        let l = Labeling::with_public(["x", "i", "a1_size"], []);
        assert_eq!(label_aexp(&l, &AExp::num(3)), Label::Public);
        let c = BExp::cmp(CmpOp::Lt, AExp::var("i"), AExp::var("a1_size"));
        assert_eq!(label_bexp(&l, &c), Label::Public);
        let e = AExp::bin(ArithOp::Add, AExp::var("x"), AExp::var("y"));
        assert_eq!(label_aexp(&l, &e), Label::Secret);
        let e = AExp::cond(BExp::cmp(CmpOp::Eq, AExp::var("y"), AExp::num(0)), AExp::num(1), AExp::num(2));
        assert_eq!(label_aexp(&l, &e), Label::Secret);
    }

    #[test]
    fn ifc_rules() {
        let l = Labeling::with_public(["pub"], []);
        assert!(wt_ifc(&l, Label::Secret, &Com::Skip));
        assert!(!wt_ifc(&l, Label::Public, &parse_com("pub := sec").unwrap()));
        let c = parse_com("if false then if secret = 0 then pub := 1 end end").unwrap();
        assert!(!wt_ifc(&l, Label::Public, &c));
        let c = parse_com("if secret = 0 then sec := 1 end").unwrap();
        assert!(wt_ifc(&l, Label::Public, &c));
        assert!(!wt_cct(&l, &c));
    }

    #[test]
    fn array_rules() {
        let l = Labeling::with_public(["x", "i"], ["pa"]);
        assert!(wt_ifc(&l, Label::Public, &parse_com("x <- pa[i]").unwrap()));
        assert!(!wt_ifc(&l, Label::Public, &parse_com("x <- sa[i]").unwrap()));
        assert!(!wt_ifc(&l, Label::Public, &parse_com("x <- pa[s]").unwrap()));
        assert!(!wt_ifc(&l, Label::Secret, &parse_com("x <- pa[i]").unwrap()));
        assert!(wt_ifc(&l, Label::Public, &parse_com("sa[s] <- x").unwrap()));
        assert!(!wt_ifc(&l, Label::Public, &parse_com("pa[s] <- x").unwrap()));
        assert!(!wt_ifc(&l, Label::Public, &parse_com("pa[i] <- s").unwrap()));
    }

    #[test]
    fn cct_listings() {
        let c = parse_com("if i < a1_size then j <- a1[i]; x <- a2[j] end").unwrap();
        assert!(wt_cct(&l1_labels(), &c));
        let c = parse_com("if false then xsecret <- a[isecret] end").unwrap();
        assert!(!wt_cct(&Labeling::with_public([], ["a"]), &c));
        let c = parse_com("while s < 1 do skip end").unwrap();
        assert!(!wt_cct(&Labeling::all_secret(), &c));
    }
}
