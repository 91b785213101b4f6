//! Pretty printer emitting the concrete syntax with minimal parentheses.
//!
//! Sequences print flat, so only right-nested `Seq` chains survive a
//! print/parse round trip; `;` has no grouping syntax of its own.

use super::{AExp, ArithOp, BExp, CmpOp, Com};

pub fn pretty_com(c: &Com) -> String {
    let mut out = String::new();
    com(c, 0, &mut out);
    out
}

pub fn pretty_aexp(e: &AExp) -> String {
    let mut out = String::new();
    aexp(e, 0, &mut out);
    out
}

pub fn pretty_bexp(b: &BExp) -> String {
    let mut out = String::new();
    bexp(b, 0, &mut out);
    out
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn com(c: &Com, depth: usize, out: &mut String) {
    match c {
        Com::Seq(a, b) => {
            com(a, depth, out);
            out.push_str(";\n");
            com(b, depth, out);
        }
        _ => {
            indent(depth, out);
            simple(c, depth, out);
        }
    }
}

fn simple(c: &Com, depth: usize, out: &mut String) {
    match c {
        Com::Skip => out.push_str("skip"),
        Com::Asgn(x, e) => {
            out.push_str(x);
            out.push_str(" := ");
            aexp(e, 0, out);
        }
        Com::ARead(x, a, i) => {
            out.push_str(&format!("{x} <- {a}["));
            aexp(i, 0, out);
            out.push(']');
        }
        Com::AWrite(a, i, e) => {
            out.push_str(a);
            out.push('[');
            aexp(i, 0, out);
            out.push_str("] <- ");
            aexp(e, 0, out);
        }
        Com::If(b, c1, c2) => {
            out.push_str("if ");
            bexp(b, 0, out);
            out.push_str(" then\n");
            com(c1, depth + 1, out);
            if **c2 != Com::Skip {
                out.push('\n');
                indent(depth, out);
                out.push_str("else\n");
                com(c2, depth + 1, out);
            }
            out.push('\n');
            indent(depth, out);
            out.push_str("end");
        }
        Com::While(b, body) => {
            out.push_str("while ");
            bexp(b, 0, out);
            out.push_str(" do\n");
            com(body, depth + 1, out);
            out.push('\n');
            indent(depth, out);
            out.push_str("end");
        }
        Com::Seq(..) => com(c, depth, out),
    }
}

// Arithmetic precedence: 1 for + and -, 2 for *, 3 for atoms.
fn aexp(e: &AExp, ctx: u8, out: &mut String) {
    match e {
        AExp::Num(n) => out.push_str(&n.to_string()),
        AExp::Var(x) => out.push_str(x),
        AExp::Bin(op, l, r) => {
            let (prec, sym) = match op {
                ArithOp::Add => (1, " + "),
                ArithOp::Sub => (1, " - "),
                ArithOp::Mul => (2, " * "),
            };
            let wrap = prec < ctx;
            if wrap {
                out.push('(');
            }
            aexp(l, prec, out);
            out.push_str(sym);
            aexp(r, prec + 1, out);
            if wrap {
                out.push(')');
            }
        }
        AExp::Cond(b, t, f) => {
            out.push('(');
            bexp(b, 0, out);
            out.push_str(" ? ");
            aexp(t, 0, out);
            out.push_str(" : ");
            aexp(f, 0, out);
            out.push(')');
        }
    }
}

// Boolean precedence: 1 for ||, 2 for &&, 3 for ! and atoms.
fn bexp(b: &BExp, ctx: u8, out: &mut String) {
    let bin = |l: &BExp, r: &BExp, prec: u8, sym: &str, out: &mut String| {
        let wrap = prec < ctx;
        if wrap {
            out.push('(');
        }
        bexp(l, prec, out);
        out.push_str(sym);
        bexp(r, prec + 1, out);
        if wrap {
            out.push(')');
        }
    };
    match b {
        BExp::Bool(v) => out.push_str(if *v { "true" } else { "false" }),
        BExp::Cmp(op, l, r) => {
            aexp(l, 0, out);
            out.push_str(match op {
                CmpOp::Eq => " = ",
                CmpOp::Ne => " <> ",
                CmpOp::Le => " <= ",
                CmpOp::Lt => " < ",
            });
            aexp(r, 0, out);
        }
        BExp::Not(inner) => {
            out.push('!');
            bexp(inner, 3, out);
        }
        BExp::And(l, r) => bin(l, r, 2, " && ", out),
        BExp::Or(l, r) => bin(l, r, 1, " || ", out),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_com;
    use super::*;

    fn roundtrip(text: &str) {
        let c = parse_com(text).unwrap();
        let printed = pretty_com(&c);
        assert_eq!(parse_com(&printed).unwrap(), c, "{printed}");
    }

    #[test]
    fn skip() {
        assert_eq!(pretty_com(&Com::Skip), "skip");
    }

    #[test]
    fn minimal_parens() {
        let c = parse_com("x := (1 - 2) - (3 - 4) * 5").unwrap();
        assert_eq!(pretty_com(&c), "x := 1 - 2 - (3 - 4) * 5");
        let c = parse_com("if !(x < 1 || y < 2) && (z < 1 || true) then skip end").unwrap();
        assert_eq!(
            pretty_com(&c),
            "if !(x < 1 || y < 2) && (z < 1 || true) then\n  skip\nend"
        );
    }

    #[test]
    fn ct_cond_inside_binop() {
        let e = AExp::bin(
            ArithOp::Mul,
            AExp::cond(BExp::Bool(true), AExp::num(1), AExp::num(2)),
            AExp::num(3),
        );
        assert_eq!(pretty_aexp(&e), "(true ? 1 : 2) * 3");
        let c = Com::asgn("x", e);
        assert_eq!(parse_com(&pretty_com(&c)).unwrap(), c);
    }

    #[test]
    fn roundtrips() {
        roundtrip("skip");
        roundtrip("if i < a1_size then j <- a1[i]; x <- a2[j] end");
        roundtrip("while k < 3 do a[(b = 1 ? 0 : k)] <- k * (k + 1); k := k + 1 end; x := 0");
        roundtrip("if !!(x < 1) then skip else if y = 0 then skip end end");
        roundtrip("x := (x < 1 && (y < 1 || z < 1) ? (1 < 2 ? 3 : 4) : 5 - (6 - 7))");
    }

    #[test]
    fn else_skip_is_omitted() {
        let c = parse_com("if true then x := 1 else skip end").unwrap();
        assert!(!pretty_com(&c).contains("else"));
    }
}
