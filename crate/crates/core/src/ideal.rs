//! Ideal semantics: the speculative semantics restricted to the behaviour a
//! hardened program can exhibit. One stepper serves all variants; they differ
//! only in the masking policy and in whether labels are tracked at run time.

use std::fmt;
use std::str::FromStr;

use crate::flow::ACom;
use crate::ifc::{label_aexp, label_bexp};
use crate::label::{Label, Labeling};
use crate::lang::{eval_aexp, eval_bexp, Com};
use crate::machine::{self, Machine, Outcome, Redex, Step};
use crate::state::{ArrayState, Dir, Obs, ScalarState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IdealKind {
    Fislh,
    Fvslh,
    /// Flow-sensitive value masking over analysis annotations.
    Fs,
}

impl fmt::Display for IdealKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdealKind::Fislh => "fislh",
            IdealKind::Fvslh => "fvslh",
            IdealKind::Fs => "fs",
        })
    }
}

impl FromStr for IdealKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fislh" => Ok(IdealKind::Fislh),
            "fvslh" => Ok(IdealKind::Fvslh),
            "fs" | "fsfvslh" => Ok(IdealKind::Fs),
            _ => Err(format!("unknown ideal semantics `{s}`")),
        }
    }
}

/// Per-rule predicates. Masks apply only while misspeculating; forced
/// accesses are only possible then.
struct Policy {
    read_index_mask: fn(Label, Label) -> bool,
    read_value_mask: fn(Label, Label) -> bool,
    read_force_ok: fn(Label, Label) -> bool,
    read_force_value_mask: fn(Label) -> bool,
    write_index_mask: fn(Label, Label) -> bool,
    write_force_ok: fn(Label, Label) -> bool,
    track_labels: bool,
}

const INDEX_POLICY: Policy = Policy {
    read_index_mask: |lx, li| !li.is_public() || lx.is_public(),
    read_value_mask: |_, _| false,
    read_force_ok: |lx, li| li.is_public() && !lx.is_public(),
    read_force_value_mask: |_| false,
    write_index_mask: |li, le| !li.is_public() || !le.is_public(),
    write_force_ok: |li, le| li.is_public() && le.is_public(),
    track_labels: false,
};

const VALUE_POLICY: Policy = Policy {
    read_index_mask: |_, li| !li.is_public(),
    read_value_mask: |lx, li| lx.is_public() && li.is_public(),
    read_force_ok: |_, li| li.is_public(),
    read_force_value_mask: |lx| lx.is_public(),
    write_index_mask: |li, _| !li.is_public(),
    write_force_ok: |li, _| li.is_public(),
    track_labels: false,
};

const FS_POLICY: Policy = Policy { track_labels: true, ..VALUE_POLICY };

impl IdealKind {
    fn policy(self) -> &'static Policy {
        match self {
            IdealKind::Fislh => &INDEX_POLICY,
            IdealKind::Fvslh => &VALUE_POLICY,
            IdealKind::Fs => &FS_POLICY,
        }
    }
}

/// Configuration of an ideal run. For the static variants `labels` is the
/// fixed labeling and `pc` stays public; for the flow-sensitive variant both
/// evolve with the run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IdealConfig {
    pub kind: IdealKind,
    pub com: ACom,
    pub rho: ScalarState,
    pub mu: ArrayState,
    pub flag: bool,
    pub pc: Label,
    pub labels: Labeling,
}

/// Annotates a plain program with labels read off a fixed labeling.
pub fn annotate_static(c: &Com, l: &Labeling) -> ACom {
    match c {
        Com::Skip => ACom::Skip,
        Com::Asgn(x, e) => ACom::Asgn(x.clone(), e.clone()),
        Com::Seq(a, b) => ACom::Seq(
            Box::new(annotate_static(a, l)),
            Box::new(annotate_static(b, l)),
            l.clone(),
        ),
        Com::If(be, a, b) => ACom::If(
            be.clone(),
            Box::new(annotate_static(a, l)),
            Box::new(annotate_static(b, l)),
            label_bexp(l, be),
        ),
        Com::While(be, body) => ACom::While(
            be.clone(),
            Box::new(annotate_static(body, l)),
            label_bexp(l, be),
            l.clone(),
        ),
        Com::ARead(x, a, i) => {
            ACom::Read(x.clone(), a.clone(), i.clone(), l.var(x), label_aexp(l, i))
        }
        Com::AWrite(a, i, e) => ACom::Write(a.clone(), i.clone(), e.clone(), label_aexp(l, i)),
    }
}

impl IdealConfig {
    /// Configuration for a static variant over a plain program.
    pub fn of_com(
        kind: IdealKind,
        c: &Com,
        labels: &Labeling,
        rho: ScalarState,
        mu: ArrayState,
        flag: bool,
    ) -> Self {
        IdealConfig {
            kind,
            com: annotate_static(c, labels),
            rho,
            mu,
            flag,
            pc: Label::Public,
            labels: labels.clone(),
        }
    }

    /// Configuration for the flow-sensitive variant.
    pub fn flow_sensitive(
        com: ACom,
        labels: Labeling,
        pc: Label,
        rho: ScalarState,
        mu: ArrayState,
        flag: bool,
    ) -> Self {
        IdealConfig { kind: IdealKind::Fs, com, rho, mu, flag, pc, labels }
    }
}

enum R {
    Silent(ACom),
    Obs(ACom, Obs),
    Blocked(ACom),
    Stuck(ACom),
}

struct Ctx<'a> {
    rho: &'a mut ScalarState,
    mu: &'a mut ArrayState,
    flag: &'a mut bool,
    pc: &'a mut Label,
    labels: &'a mut Labeling,
    policy: &'static Policy,
}

fn rewrap(r: R, f: impl FnOnce(ACom) -> ACom) -> R {
    match r {
        R::Silent(c) => R::Silent(f(c)),
        R::Obs(c, o) => R::Obs(f(c), o),
        R::Blocked(c) => R::Blocked(f(c)),
        R::Stuck(c) => R::Stuck(f(c)),
    }
}

fn step_acom(c: ACom, cx: &mut Ctx<'_>, dir: Option<&Dir>) -> R {
    let p = cx.policy;
    match c {
        ACom::Skip => R::Stuck(ACom::Skip),
        ACom::Branch(l, inner) => {
            if inner.is_terminal() {
                return R::Stuck(ACom::Branch(l, inner));
            }
            rewrap(step_acom(*inner, cx, dir), |c| ACom::Branch(l, Box::new(c)))
        }
        ACom::Asgn(x, e) => {
            let v = eval_aexp(cx.rho, &e);
            if p.track_labels {
                let l = label_aexp(cx.labels, &e);
                cx.labels.set_var(&x, l);
            }
            cx.rho.set(&x, v);
            R::Silent(ACom::Skip)
        }
        ACom::Seq(c1, c2, mid) => {
            if c1.is_terminal() {
                if p.track_labels {
                    *cx.pc = c1.pc_of(*cx.pc);
                }
                return R::Silent(*c2);
            }
            rewrap(step_acom(*c1, cx, dir), |c1| ACom::Seq(Box::new(c1), c2, mid))
        }
        ACom::While(be, body, l, fix) => {
            let again = ACom::While(be.clone(), body.clone(), l, fix.clone());
            R::Silent(ACom::If(
                be,
                Box::new(ACom::Seq(body, Box::new(again), fix)),
                Box::new(ACom::Skip),
                l,
            ))
        }
        ACom::If(be, c1, c2, l) => {
            let b = (l.is_public() || !*cx.flag) && eval_bexp(cx.rho, &be);
            let take_then = match dir {
                None => return R::Blocked(ACom::If(be, c1, c2, l)),
                Some(Dir::Step) => b,
                Some(Dir::Force) => {
                    *cx.flag = true;
                    !b
                }
                Some(_) => return R::Stuck(ACom::If(be, c1, c2, l)),
            };
            let mut next = if take_then { *c1 } else { *c2 };
            if p.track_labels {
                next = ACom::Branch(*cx.pc, Box::new(next));
                *cx.pc = cx.pc.join(l);
            }
            R::Obs(next, Obs::Branch(b))
        }
        ACom::Read(x, a, ie, lx, li) => {
            let i0 = eval_aexp(cx.rho, &ie);
            let flag = *cx.flag;
            let hit = match dir {
                None => return R::Blocked(ACom::Read(x, a, ie, lx, li)),
                Some(Dir::Step) => {
                    let i = if flag && (p.read_index_mask)(lx, li) { 0 } else { i0 };
                    cx.mu.read(&a, i).map(|v| {
                        let v = if flag && (p.read_value_mask)(lx, li) { 0 } else { v };
                        (i, v)
                    })
                }
                Some(Dir::Load(b, j))
                    if flag && (p.read_force_ok)(lx, li) && i0 >= cx.mu.len(&a) as u64 =>
                {
                    cx.mu.read(b, *j).map(|v| {
                        let v = if (p.read_force_value_mask)(lx) { 0 } else { v };
                        (i0, v)
                    })
                }
                Some(_) => None,
            };
            match hit {
                Some((i, v)) => {
                    cx.rho.set(&x, v);
                    if p.track_labels {
                        cx.labels.set_var(&x, lx);
                    }
                    R::Obs(ACom::Skip, Obs::Read(a, i))
                }
                None => R::Stuck(ACom::Read(x, a, ie, lx, li)),
            }
        }
        ACom::Write(a, ie, e, li) => {
            let i0 = eval_aexp(cx.rho, &ie);
            let v = eval_aexp(cx.rho, &e);
            let le = label_aexp(cx.labels, &e);
            let flag = *cx.flag;
            let i = match dir {
                None => return R::Blocked(ACom::Write(a, ie, e, li)),
                Some(Dir::Step) => {
                    let i = if flag && (p.write_index_mask)(li, le) { 0 } else { i0 };
                    cx.mu.write(&a, i, v).then_some(i)
                }
                Some(Dir::Store(b, j))
                    if flag && (p.write_force_ok)(li, le) && i0 >= cx.mu.len(&a) as u64 =>
                {
                    cx.mu.write(b, *j, v).then_some(i0)
                }
                Some(_) => None,
            };
            match i {
                Some(i) => {
                    if p.track_labels {
                        let la = cx.labels.arr(&a).join(*cx.pc).join(li).join(le);
                        cx.labels.set_arr(&a, la);
                    }
                    R::Obs(ACom::Skip, Obs::Write(a, i))
                }
                None => R::Stuck(ACom::Write(a, ie, e, li)),
            }
        }
    }
}

fn head_redex(c: &ACom) -> Option<Redex> {
    match c {
        ACom::Seq(c1, _, _) if !c1.is_terminal() => head_redex(c1),
        ACom::Branch(_, c) => head_redex(c),
        ACom::If(..) => Some(Redex::Branch),
        ACom::Read(..) => Some(Redex::Read),
        ACom::Write(..) => Some(Redex::Write),
        _ => None,
    }
}

impl Machine for IdealConfig {
    fn step(self, dir: Option<&Dir>) -> Step<Self> {
        let IdealConfig { kind, com, mut rho, mut mu, mut flag, mut pc, mut labels } = self;
        let r = {
            let mut cx = Ctx {
                rho: &mut rho,
                mu: &mut mu,
                flag: &mut flag,
                pc: &mut pc,
                labels: &mut labels,
                policy: kind.policy(),
            };
            step_acom(com, &mut cx, dir)
        };
        let make = |com| IdealConfig { kind, com, rho, mu, flag, pc, labels };
        match r {
            R::Silent(c) => Step::Silent(make(c)),
            R::Obs(c, o) => Step::Observed(make(c), o),
            R::Blocked(c) => Step::NeedsDirective(make(c)),
            R::Stuck(c) => Step::Stuck(make(c)),
        }
    }

    fn is_final(&self) -> bool {
        self.com.is_terminal()
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

/// One ideal step; see [`crate::speculative::spec_step`] for the shape.
pub fn ideal_step(cfg: &IdealConfig, next: Option<&Dir>) -> Option<(IdealConfig, Option<Obs>, usize)> {
    match cfg.clone().step(next) {
        Step::Silent(c) => Some((c, None, 0)),
        Step::Observed(c, o) => Some((c, Some(o), 1)),
        Step::NeedsDirective(_) | Step::Stuck(_) => None,
    }
}

pub fn ideal_run(cfg: IdealConfig, dirs: &[Dir], fuel: usize) -> Outcome<IdealConfig> {
    machine::run(cfg, dirs, fuel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::flow_track;
    use crate::lang::parse_com;
    use crate::machine::OutcomeKind;
    use crate::seq::seq_run;

    fn cfg(kind: IdealKind, src: &str, l: &Labeling, rho: ScalarState, mu: ArrayState, flag: bool) -> IdealConfig {
        IdealConfig::of_com(kind, &parse_com(src).unwrap(), l, rho, mu, flag)
    }

    #[test]
    fn secret_branch_reads_false_when_misspeculating() {
        for secret in [0, 1] {
            let c = cfg(
                IdealKind::Fislh,
                "if secret = 0 then skip end",
                &Labeling::all_secret(),
                ScalarState::new().with("secret", secret),
                ArrayState::new(),
                true,
            );
            let (_, o, _) = ideal_step(&c, Some(&Dir::Step)).unwrap();
            assert_eq!(o, Some(Obs::Branch(false)));
        }
    }

    #[test]
    fn value_policy_masks_forced_loads_into_public() {
        let l = Labeling::with_public(["x", "i"], ["a"]);
        let mu = ArrayState::new().with("a", vec![5]).with("s", vec![9]);
        let c = cfg(IdealKind::Fvslh, "x <- a[i]", &l, ScalarState::new().with("i", 3), mu, true);
        let (next, o, _) = ideal_step(&c, Some(&Dir::Load("s".into(), 0))).unwrap();
        assert_eq!(o, Some(Obs::Read("a".into(), 3)));
        assert_eq!(next.rho.get("x"), 0);
    }

    #[test]
    fn index_policy_blocks_forced_loads_into_public() {
        let l = Labeling::with_public(["x", "i"], ["a"]);
        let mu = ArrayState::new().with("a", vec![5]).with("s", vec![9]);
        let c = cfg(IdealKind::Fislh, "x <- a[i]", &l, ScalarState::new().with("i", 3), mu, true);
        assert!(ideal_step(&c, Some(&Dir::Load("s".into(), 0))).is_none());
        let (next, o, _) = ideal_step(&c, Some(&Dir::Step)).unwrap();
        assert_eq!(o, Some(Obs::Read("a".into(), 0)));
        assert_eq!(next.rho.get("x"), 5);
    }

    #[test]
    fn fs_if_wraps_branch() {
        let c = parse_com("if s < 1 then x := 1 end").unwrap();
        let l = Labeling::all_secret();
        let (a, _) = flow_track(&c, &l, Label::Public);
        let cfg = IdealConfig::flow_sensitive(a, l, Label::Public, ScalarState::new(), ArrayState::new(), false);
        let (next, o, _) = ideal_step(&cfg, Some(&Dir::Step)).unwrap();
        assert_eq!(o, Some(Obs::Branch(true)));
        assert_eq!(next.pc, Label::Secret);
        assert!(matches!(next.com, ACom::Branch(Label::Public, _)));
        let out = ideal_run(next, &[], 10);
        assert_eq!(out.kind, OutcomeKind::Terminated);
        assert!(out.config.com.is_terminal());
    }

    #[test]
    fn fs_write_index_masked() {
        let c = parse_com("if false then a[isecret] <- epublic end").unwrap();
        let l = Labeling::with_public(["epublic"], []);
        let (a, _) = flow_track(&c, &l, Label::Public);
        let rho = ScalarState::new().with("isecret", 1);
        let mu = ArrayState::new().with("a", vec![0, 0]);
        let cfg = IdealConfig::flow_sensitive(a, l, Label::Public, rho, mu, false);
        let out = ideal_run(cfg, &[Dir::Force, Dir::Step], 20);
        assert_eq!(out.trace, [Obs::Branch(false), Obs::Write("a".into(), 0)]);
    }

    #[test]
    fn fs_tracks_labels() {
        let c = parse_com("x := s; y <- a[0]; a[0] <- x").unwrap();
        let l = Labeling::with_public(["x", "y"], ["a"]);
        let (a, _) = flow_track(&c, &l, Label::Public);
        let cfg = IdealConfig::flow_sensitive(
            a,
            l,
            Label::Public,
            ScalarState::new(),
            ArrayState::new().with("a", vec![0]),
            false,
        );
        let out = ideal_run(cfg, &[Dir::Step, Dir::Step], 20);
        assert_eq!(out.kind, OutcomeKind::Terminated);
        assert_eq!(out.config.labels.var("x"), Label::Secret);
        assert_eq!(out.config.labels.var("y"), Label::Public);
        assert_eq!(out.config.labels.arr("a"), Label::Secret);
    }

    #[test]
    fn step_only_matches_sequential() {
        let src = "i := 0; while i < 3 do x <- a[i]; a[i] <- x + s; i := i + 1 end; if x < 2 then y := 1 end";
        let c = parse_com(src).unwrap();
        let l = Labeling::with_public(["i", "x"], ["a"]);
        let mu = ArrayState::new().with("a", vec![1, 2, 3]);
        let rho = ScalarState::new().with("s", 1);
        let seq = seq_run(&c, &rho, &mu, 500);
        let steps = vec![Dir::Step; 50];
        for kind in [IdealKind::Fislh, IdealKind::Fvslh] {
            let out = ideal_run(IdealConfig::of_com(kind, &c, &l, rho.clone(), mu.clone(), false), &steps, 500);
            assert_eq!(out.trace, seq.trace);
            assert_eq!(out.config.rho, seq.rho);
        }
        let (a, _) = flow_track(&c, &l, Label::Public);
        let out = ideal_run(IdealConfig::flow_sensitive(a, l, Label::Public, rho, mu, false), &steps, 500);
        assert_eq!(out.trace, seq.trace);
        assert_eq!(out.config.mu, seq.mu);
    }
}
