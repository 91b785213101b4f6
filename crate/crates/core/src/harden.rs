//! Speculative load hardening transformations.
//!
//! All variants share one recipe: a flag variable tracks misspeculation,
//! every branch updates it with a constant-time conditional, and selected
//! array indices (or loaded values) are masked with `(b = 1 ? 0 : _)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::flow::{flow_track, ACom};
use crate::ifc::{label_aexp, label_bexp};
use crate::label::{Label, Labeling};
use crate::lang::{used_vars, AExp, BExp, CmpOp, Com};

pub const DEFAULT_FLAG: &str = "b";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HardenVariant {
    /// Masks every index.
    PlainIslh,
    /// Selective index masking for constant-time programs. `mask_stores:
    /// false` drops store masking and is insecure.
    Sislh { mask_stores: bool },
    /// Flexible index masking driven by IFC labels.
    Fislh,
    /// Guards every branch and masks every index.
    Uslh,
    /// Masks loaded public values instead of indices.
    Svslh,
    /// Flexible value masking driven by IFC labels.
    Fvslh,
}

/// Every protection the tools accept, including the unprotected source and
/// the flow-sensitive pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Protection {
    None,
    Static(HardenVariant),
    FlowSensitive,
}

impl Protection {
    pub const ALL: [Protection; 9] = [
        Protection::None,
        Protection::Static(HardenVariant::PlainIslh),
        Protection::Static(HardenVariant::Sislh { mask_stores: true }),
        Protection::Static(HardenVariant::Sislh { mask_stores: false }),
        Protection::Static(HardenVariant::Fislh),
        Protection::Static(HardenVariant::Uslh),
        Protection::Static(HardenVariant::Svslh),
        Protection::Static(HardenVariant::Fvslh),
        Protection::FlowSensitive,
    ];

    /// Hardens `c`; the flow-sensitive pass analyses from a public pc.
    pub fn apply(self, c: &Com, labels: &Labeling, flag: &str) -> Result<Com, HardenError> {
        match self {
            Protection::None => Ok(c.clone()),
            Protection::Static(v) => harden(v, c, labels, flag),
            Protection::FlowSensitive => {
                check_flag(c, flag)?;
                let (a, _) = flow_track(c, labels, Label::Public);
                harden_fs(&a, flag)
            }
        }
    }
}

impl fmt::Display for Protection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protection::None => "none",
            Protection::Static(HardenVariant::PlainIslh) => "islh",
            Protection::Static(HardenVariant::Sislh { mask_stores: true }) => "sislh",
            Protection::Static(HardenVariant::Sislh { mask_stores: false }) => "sislh-no-store-mask",
            Protection::Static(HardenVariant::Fislh) => "fislh",
            Protection::Static(HardenVariant::Uslh) => "uslh",
            Protection::Static(HardenVariant::Svslh) => "svslh",
            Protection::Static(HardenVariant::Fvslh) => "fvslh",
            Protection::FlowSensitive => "fsfvslh",
        })
    }
}

impl FromStr for Protection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Protection::ALL
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HardenError {
    #[error("flag variable `{0}` is already used by the program")]
    FlagCollision(String),
    #[error("branch markers only occur at run time and cannot be hardened")]
    BranchNode,
}

fn check_flag(c: &Com, flag: &str) -> Result<(), HardenError> {
    if used_vars(c).contains(flag) || c.arrays().contains(flag) {
        Err(HardenError::FlagCollision(flag.to_string()))
    } else {
        Ok(())
    }
}

fn flag_is(flag: &str, v: u64) -> BExp {
    BExp::cmp(CmpOp::Eq, AExp::var(flag), AExp::num(v))
}

fn mask(flag: &str, e: AExp) -> AExp {
    AExp::cond(flag_is(flag, 1), AExp::num(0), e)
}

fn guard(flag: &str, be: BExp) -> BExp {
    BExp::and(flag_is(flag, 0), be)
}

/// Prefixes a branch body with a flag update. A `skip` body is dropped so
/// that empty else branches stay empty.
fn prefix(update: Com, body: Com) -> Com {
    match body {
        Com::Skip => update,
        body => Com::seq(update, body),
    }
}

fn wrap_if(flag: &str, cond: BExp, c1: Com, c2: Com) -> Com {
    let on_true = Com::asgn(flag, AExp::cond(cond.clone(), AExp::var(flag), AExp::num(1)));
    let on_false = Com::asgn(flag, AExp::cond(cond.clone(), AExp::num(1), AExp::var(flag)));
    Com::if_(cond, prefix(on_true, c1), prefix(on_false, c2))
}

fn wrap_while(flag: &str, cond: BExp, body: Com) -> Com {
    let on_true = Com::asgn(flag, AExp::cond(cond.clone(), AExp::var(flag), AExp::num(1)));
    let on_false = Com::asgn(flag, AExp::cond(cond.clone(), AExp::num(1), AExp::var(flag)));
    Com::seq(Com::while_(cond, prefix(on_true, body)), on_false)
}

fn value_masked_read(flag: &str, x: &str, a: &str, i: AExp) -> Com {
    Com::seq(
        Com::read(x, a, i),
        Com::asgn(x, mask(flag, AExp::var(x))),
    )
}

/// Applies a label-directed variant to a plain program.
pub fn harden(
    variant: HardenVariant,
    c: &Com,
    labels: &Labeling,
    flag: &str,
) -> Result<Com, HardenError> {
    check_flag(c, flag)?;
    Ok(go(variant, c, labels, flag))
}

fn go(v: HardenVariant, c: &Com, l: &Labeling, flag: &str) -> Com {
    use HardenVariant::*;
    let secret = |lab: Label| !lab.is_public();
    match c {
        Com::Skip | Com::Asgn(..) => c.clone(),
        Com::Seq(a, b) => Com::seq(go(v, a, l, flag), go(v, b, l, flag)),
        Com::If(be, a, b) => {
            let cond = branch_cond(v, be, l, flag);
            wrap_if(flag, cond, go(v, a, l, flag), go(v, b, l, flag))
        }
        Com::While(be, body) => {
            let cond = branch_cond(v, be, l, flag);
            wrap_while(flag, cond, go(v, body, l, flag))
        }
        Com::ARead(x, a, i) => {
            let lx = l.var(x);
            let li = label_aexp(l, i);
            match v {
                PlainIslh | Uslh => Com::read(x, a, mask(flag, i.clone())),
                Sislh { .. } if lx.is_public() => Com::read(x, a, mask(flag, i.clone())),
                Fislh if lx.is_public() || secret(li) => Com::read(x, a, mask(flag, i.clone())),
                Svslh if lx.is_public() => value_masked_read(flag, x, a, i.clone()),
                Fvslh if lx.is_public() && li.is_public() => value_masked_read(flag, x, a, i.clone()),
                Fvslh if secret(li) => Com::read(x, a, mask(flag, i.clone())),
                _ => c.clone(),
            }
        }
        Com::AWrite(a, i, e) => {
            let li = label_aexp(l, i);
            let le = label_aexp(l, e);
            let masked = match v {
                PlainIslh | Uslh => true,
                Sislh { mask_stores } => mask_stores && secret(le),
                Fislh => secret(le) || secret(li),
                Svslh => false,
                Fvslh => secret(li),
            };
            if masked {
                Com::write(a, mask(flag, i.clone()), e.clone())
            } else {
                c.clone()
            }
        }
    }
}

fn branch_cond(v: HardenVariant, be: &BExp, l: &Labeling, flag: &str) -> BExp {
    use HardenVariant::*;
    match v {
        Uslh => guard(flag, be.clone()),
        Fislh | Fvslh if !label_bexp(l, be).is_public() => guard(flag, be.clone()),
        _ => be.clone(),
    }
}

/// Flow-sensitive value hardening keyed on analysis annotations.
pub fn harden_fs(c: &ACom, flag: &str) -> Result<Com, HardenError> {
    check_flag(&c.erase(), flag)?;
    fs(c, flag)
}

fn fs(c: &ACom, flag: &str) -> Result<Com, HardenError> {
    Ok(match c {
        ACom::Skip => Com::Skip,
        ACom::Asgn(x, e) => Com::asgn(x.clone(), e.clone()),
        ACom::Seq(a, b, _) => Com::seq(fs(a, flag)?, fs(b, flag)?),
        ACom::If(be, a, b, l) => {
            let cond = if l.is_public() { be.clone() } else { guard(flag, be.clone()) };
            wrap_if(flag, cond, fs(a, flag)?, fs(b, flag)?)
        }
        ACom::While(be, body, l, _) => {
            let cond = if l.is_public() { be.clone() } else { guard(flag, be.clone()) };
            wrap_while(flag, cond, fs(body, flag)?)
        }
        ACom::Read(x, a, i, lx, li) => match (lx.is_public(), li.is_public()) {
            (true, true) => value_masked_read(flag, x, a, i.clone()),
            (false, true) => Com::read(x.clone(), a.clone(), i.clone()),
            _ => Com::read(x.clone(), a.clone(), mask(flag, i.clone())),
        },
        ACom::Write(a, i, e, li) => {
            let i = if li.is_public() { i.clone() } else { mask(flag, i.clone()) };
            Com::write(a.clone(), i, e.clone())
        }
        ACom::Branch(..) => return Err(HardenError::BranchNode),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_com, pretty_com};

    fn squash(s: &str) -> String {
        s.split_whitespace().collect()
    }

    const LISTING1: &str = "if i < a1_size then j <- a1[i]; x <- a2[j] end";

    #[test]
    fn plain_islh_listing1() {
        let c = parse_com(LISTING1).unwrap();
        let h = harden(HardenVariant::PlainIslh, &c, &Labeling::all_secret(), "b").unwrap();
        let want = "if i < a1_size then b := (i < a1_size ? b : 1); \
                    j <- a1[(b = 1 ? 0 : i)]; x <- a2[(b = 1 ? 0 : j)] \
                    else b := (i < a1_size ? 1 : b) end";
        assert_eq!(squash(&pretty_com(&h)), squash(want));
    }

    #[test]
    fn flag_collision() {
        let c = parse_com("b := 1").unwrap();
        assert_eq!(
            harden(HardenVariant::Uslh, &c, &Labeling::all_secret(), "b"),
            Err(HardenError::FlagCollision("b".into()))
        );
        let c = parse_com("x <- b[0]").unwrap();
        assert!(harden(HardenVariant::Uslh, &c, &Labeling::all_secret(), "b").is_err());
        assert!(harden(HardenVariant::Uslh, &c, &Labeling::all_secret(), "f").is_ok());
    }

    #[test]
    fn while_recipe() {
        let c = parse_com("while k < 2 do k := k + 1 end").unwrap();
        let h = harden(HardenVariant::Uslh, &c, &Labeling::all_secret(), "b").unwrap();
        let want = "while b = 0 && k < 2 do b := (b = 0 && k < 2 ? b : 1); k := k + 1 end; \
                    b := (b = 0 && k < 2 ? 1 : b)";
        assert_eq!(squash(&pretty_com(&h)), squash(want));
    }

    #[test]
    fn sislh_store_masking() {
        let c = parse_com("a[i] <- key").unwrap();
        let l = Labeling::with_public(["i"], ["a"]);
        let on = harden(HardenVariant::Sislh { mask_stores: true }, &c, &l, "b").unwrap();
        assert_eq!(squash(&pretty_com(&on)), squash("a[(b = 1 ? 0 : i)] <- key"));
        let off = harden(HardenVariant::Sislh { mask_stores: false }, &c, &l, "b").unwrap();
        assert_eq!(off, c);
    }

    #[test]
    fn value_masking_variants() {
        let c = parse_com("x <- a[i]").unwrap();
        let l = Labeling::with_public(["x", "i"], []);
        let masked = squash("x <- a[i]; x := (b = 1 ? 0 : x)");
        for v in [HardenVariant::Svslh, HardenVariant::Fvslh] {
            assert_eq!(squash(&pretty_com(&harden(v, &c, &l, "b").unwrap())), masked);
        }
        let (a, _) = flow_track(&c, &Labeling::with_public(["x", "i"], ["a"]), Label::Public);
        assert_eq!(squash(&pretty_com(&harden_fs(&a, "b").unwrap())), masked);
        // Secret destination and public index: left alone.
        let l = Labeling::with_public(["i"], []);
        assert_eq!(harden(HardenVariant::Fvslh, &c, &l, "b").unwrap(), c);
        // Secret index: index masked.
        let l = Labeling::with_public(["x"], []);
        let h = harden(HardenVariant::Fvslh, &c, &l, "b").unwrap();
        assert_eq!(squash(&pretty_com(&h)), squash("x <- a[(b = 1 ? 0 : i)]"));
    }

    #[test]
    fn fislh_branch_guarding() {
        let c = parse_com("if s < 1 then skip end; if p < 1 then skip end").unwrap();
        let l = Labeling::with_public(["p"], []);
        let h = harden(HardenVariant::Fislh, &c, &l, "b").unwrap();
        let text = squash(&pretty_com(&h));
        assert!(text.starts_with("ifb=0&&s<1then"));
        assert!(text.contains(";ifp<1then"));
    }

    #[test]
    fn fs_rejects_branch_nodes() {
        let a = ACom::Branch(Label::Public, Box::new(ACom::Skip));
        assert_eq!(harden_fs(&a, "b"), Err(HardenError::BranchNode));
    }

    /// Every condition and index mentions some variable.
    fn no_literal_only_guards(c: &Com) -> bool {
        let has_var_b = |b: &BExp| {
            let mut vs = std::collections::BTreeSet::new();
            b.vars(&mut vs);
            !vs.is_empty()
        };
        let has_var_a = |e: &AExp| {
            let mut vs = std::collections::BTreeSet::new();
            e.vars(&mut vs);
            !vs.is_empty()
        };
        match c {
            Com::Skip | Com::Asgn(..) => true,
            Com::Seq(a, b) => no_literal_only_guards(a) && no_literal_only_guards(b),
            Com::If(be, a, b) => has_var_b(be) && no_literal_only_guards(a) && no_literal_only_guards(b),
            Com::While(be, body) => has_var_b(be) && no_literal_only_guards(body),
            Com::ARead(_, _, i) | Com::AWrite(_, i, _) => has_var_a(i),
        }
    }

    #[test]
    fn all_secret_matches_uslh_without_literal_guards() {
        use crate::check::{gen_program, NamePools};
        let pools = NamePools::default();
        let l = Labeling::all_secret();
        let mut n = 0;
        for seed in 0..3000 {
            let c = gen_program(seed, 15, &pools);
            if !no_literal_only_guards(&c) {
                continue;
            }
            n += 1;
            let u = harden(HardenVariant::Uslh, &c, &l, "b").unwrap();
            assert_eq!(harden(HardenVariant::Fislh, &c, &l, "b").unwrap(), u, "{}", pretty_com(&c));
            assert_eq!(harden(HardenVariant::Fvslh, &c, &l, "b").unwrap(), u, "{}", pretty_com(&c));
        }
        assert!(n >= 100, "{n}");
    }

    #[test]
    fn literal_conditions_stay_unguarded() {
        let c = parse_com("if true then x <- a[1] end").unwrap();
        let l = Labeling::all_secret();
        let f = harden(HardenVariant::Fislh, &c, &l, "b").unwrap();
        assert_eq!(
            squash(&pretty_com(&f)),
            squash("if true then b := (true ? b : 1); x <- a[1] else b := (true ? 1 : b) end")
        );
        assert_ne!(f, harden(HardenVariant::Uslh, &c, &l, "b").unwrap());
    }

    #[test]
    fn protection_names_roundtrip() {
        for p in Protection::ALL {
            assert_eq!(p.to_string().parse::<Protection>().unwrap(), p);
        }
        assert!("nope".parse::<Protection>().is_err());
    }
}
