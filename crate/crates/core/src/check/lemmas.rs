//! Executable instances of the lemmas linking hardened programs to the
//! ideal semantics.

use crate::flow::{flow_track, well_labeled};
use crate::harden::{harden, harden_fs, HardenVariant};
use crate::ideal::{IdealConfig, IdealKind};
use crate::ifc::wt_ifc;
use crate::label::{Label, Labeling};
use crate::lang::Com;
use crate::machine::{settle, Machine, Settled, Step};
use crate::speculative::SpecConfig;
use crate::state::{arrays_pub_equiv, scalars_pub_equiv, Dir, Obs};

use super::explore::{first_divergence, witness};
use super::{Bounds, CheckError, State, Verdict};

/// The hardened program and the ideal configuration of the source that
/// must simulate it.
fn target_and_source(
    kind: IdealKind,
    c: &Com,
    labels: &Labeling,
    s: &State,
    flag: bool,
    flag_var: &str,
) -> Result<(Com, IdealConfig), CheckError> {
    let (rho, mu) = s.clone();
    Ok(match kind {
        IdealKind::Fislh | IdealKind::Fvslh => {
            let v = if kind == IdealKind::Fislh { HardenVariant::Fislh } else { HardenVariant::Fvslh };
            let t = harden(v, c, labels, flag_var)?;
            (t, IdealConfig::of_com(kind, c, labels, rho, mu, flag))
        }
        IdealKind::Fs => {
            let (a, _) = flow_track(c, labels, Label::Public);
            let t = harden_fs(&a, flag_var)?;
            (t, IdealConfig::flow_sensitive(a, labels.clone(), Label::Public, rho, mu, flag))
        }
    })
}

struct Quiescent {
    consumed: usize,
    trace: Vec<Obs>,
    cfg: SpecConfig,
    fin: bool,
}

/// Points of the target run where it waits for a directive, has finished
/// or is stuck.
fn target_points(mut m: SpecConfig, dirs: &[Dir], mut fuel: usize) -> Vec<Quiescent> {
    let mut out = Vec::new();
    let mut trace = Vec::new();
    loop {
        let (cfg, fin) = match settle(m, &mut fuel) {
            Settled::Final(cfg) => (cfg, true),
            Settled::Blocked(cfg) => (cfg, false),
            Settled::OutOfFuel(_) => return out,
        };
        out.push(Quiescent { consumed: trace.len(), trace: trace.clone(), cfg: cfg.clone(), fin });
        if fin || fuel == 0 || trace.len() == dirs.len() {
            return out;
        }
        match cfg.step(Some(&dirs[trace.len()])) {
            Step::Observed(n, o) => {
                m = n;
                trace.push(o);
                fuel -= 1;
            }
            _ => return out,
        }
    }
}

/// Every configuration the source passes through, grouped by the number of
/// directives consumed, and the trace it produced.
fn source_segments(mut m: IdealConfig, dirs: &[Dir], mut fuel: usize) -> (Vec<Vec<IdealConfig>>, Vec<Obs>) {
    let mut segs = vec![Vec::new()];
    let mut trace = Vec::new();
    loop {
        segs[trace.len()].push(m.clone());
        if m.is_final() || fuel == 0 {
            break;
        }
        fuel -= 1;
        match m.step(dirs.get(trace.len())) {
            Step::Silent(n) => m = n,
            Step::Observed(n, o) => {
                m = n;
                trace.push(o);
                segs.push(Vec::new());
            }
            Step::NeedsDirective(_) | Step::Stuck(_) => break,
        }
    }
    (segs, trace)
}

/// Runs the hardened program speculatively and the source under the ideal
/// semantics on the same directives. Returns a description of the first
/// point where the source cannot match the target.
#[allow(clippy::too_many_arguments)]
pub fn bcc_mismatch(
    kind: IdealKind,
    c: &Com,
    labels: &Labeling,
    s: &State,
    flag: bool,
    dirs: &[Dir],
    fuel: usize,
    flag_var: &str,
) -> Result<Option<String>, CheckError> {
    for a in c.arrays() {
        if s.1.len(&a) == 0 {
            return Err(CheckError::EmptyArray(a));
        }
    }
    if let Some(a) = s.1.empty_arrays().into_iter().next() {
        return Err(CheckError::EmptyArray(a));
    }
    let expected = u64::from(flag);
    if s.0.get(flag_var) != expected {
        return Err(CheckError::FlagEncoding { expected });
    }
    let (target, source) = target_and_source(kind, c, labels, s, flag, flag_var)?;
    let t0 = SpecConfig { com: target, rho: s.0.clone(), mu: s.1.clone(), flag };
    let (segs, strace) = source_segments(source, dirs, 2 * fuel);
    for q in target_points(t0, dirs, fuel) {
        if q.consumed >= segs.len() || strace[..q.consumed] != q.trace[..] {
            return Ok(Some(format!(
                "source cannot produce the target trace after {} directives",
                q.consumed
            )));
        }
        let mut rho = q.cfg.rho.clone();
        rho.set(flag_var, s.0.get(flag_var));
        let matches = |sc: &&IdealConfig| sc.mu == q.cfg.mu && sc.flag == q.cfg.flag && sc.rho == rho;
        let cands: Vec<&IdealConfig> = segs[q.consumed].iter().filter(matches).collect();
        if cands.is_empty() {
            return Ok(Some(format!("no source state matches the target after {} directives", q.consumed)));
        }
        if q.fin {
            if !cands.iter().any(|sc| sc.is_final()) {
                return Ok(Some("target terminated but the source did not".into()));
            }
            if q.cfg.rho.get(flag_var) != u64::from(q.cfg.flag) {
                return Ok(Some("flag variable disagrees with the misspeculation flag".into()));
            }
        }
    }
    Ok(None)
}

/// Backwards compiler correctness on one run.
#[allow(clippy::too_many_arguments)]
pub fn check_bcc(
    kind: IdealKind,
    c: &Com,
    labels: &Labeling,
    s: &State,
    flag: bool,
    dirs: &[Dir],
    fuel: usize,
    flag_var: &str,
) -> Result<bool, CheckError> {
    Ok(bcc_mismatch(kind, c, labels, s, flag, dirs, fuel, flag_var)?.is_none())
}

fn typed(cfg: &IdealConfig) -> bool {
    match cfg.kind {
        IdealKind::Fislh | IdealKind::Fvslh => wt_ifc(&cfg.labels, cfg.pc, &cfg.com.erase()),
        // The weakest final labeling: any well-labeled command is
        // well-labeled against it.
        IdealKind::Fs => well_labeled(&cfg.com, &cfg.labels, cfg.pc, &Labeling::all_secret()),
    }
}

fn related(c1: &IdealConfig, c2: &IdealConfig) -> bool {
    let arrays_needed = c1.kind == IdealKind::Fislh || !c1.flag;
    scalars_pub_equiv(&c1.labels, &c1.rho, &c2.rho)
        && (!arrays_needed || arrays_pub_equiv(&c1.labels, &c1.mu, &c2.mu))
}

/// One ideal step from two related configurations with the same directive:
/// if both produce the same observation, the successors are related again.
pub fn check_step_ni(c1: &IdealConfig, c2: &IdealConfig, dir: &Dir) -> Result<bool, CheckError> {
    if c1.kind != c2.kind
        || c1.com != c2.com
        || c1.flag != c2.flag
        || c1.pc != c2.pc
        || c1.labels != c2.labels
    {
        return Err(CheckError::Mismatched);
    }
    if !typed(c1) {
        return Err(if c1.kind == IdealKind::Fs { CheckError::NotWellLabeled } else { CheckError::IllTyped });
    }
    if !related(c1, c2) {
        return Err(CheckError::NotPubEquiv);
    }
    let (n1, n2) = match (c1.clone().step(Some(dir)), c2.clone().step(Some(dir))) {
        (Step::Silent(n1), Step::Silent(n2)) => (n1, n2),
        (Step::Observed(n1, o1), Step::Observed(n2, o2)) if o1 == o2 => (n1, n2),
        _ => return Ok(true),
    };
    Ok(n1.com == n2.com
        && n1.flag == n2.flag
        && n1.pc == n2.pc
        && n1.labels == n2.labels
        && related(&n1, &n2))
}

/// Ideal observational equivalence of a typed program run from two related
/// states that are already misspeculating.
pub fn check_unwinding(
    kind: IdealKind,
    c: &Com,
    labels: &Labeling,
    s1: &State,
    s2: &State,
    bounds: Bounds,
) -> Result<Verdict, CheckError> {
    let make = |s: &State| match kind {
        IdealKind::Fs => {
            let (a, _) = flow_track(c, labels, Label::Public);
            IdealConfig::flow_sensitive(a, labels.clone(), Label::Public, s.0.clone(), s.1.clone(), true)
        }
        _ => IdealConfig::of_com(kind, c, labels, s.0.clone(), s.1.clone(), true),
    };
    let (m1, m2) = (make(s1), make(s2));
    if !typed(&m1) {
        return Err(CheckError::IllTyped);
    }
    if !related(&m1, &m2) {
        return Err(CheckError::NotPubEquiv);
    }
    Ok(match first_divergence(m1, m2, bounds) {
        None => Verdict::Holds { bounds, pairs: 1 },
        Some(d) => Verdict::Violated(Box::new(witness(s1, s2, d))),
    })
}

/// One flow-sensitive ideal step keeps the configuration well-labeled
/// against the same final labeling.
pub fn check_wl_preservation(cfg: &IdealConfig, fin: &Labeling, dir: &Dir) -> Result<bool, CheckError> {
    if cfg.kind != IdealKind::Fs {
        return Err(CheckError::Unsupported(format!(
            "well-labeledness concerns the flow-sensitive semantics, not {}",
            cfg.kind
        )));
    }
    if !well_labeled(&cfg.com, &cfg.labels, cfg.pc, fin) {
        return Err(CheckError::NotWellLabeled);
    }
    Ok(match cfg.clone().step(Some(dir)) {
        Step::Silent(n) | Step::Observed(n, _) => well_labeled(&n.com, &n.labels, n.pc, fin),
        Step::NeedsDirective(_) | Step::Stuck(_) => true,
    })
}
