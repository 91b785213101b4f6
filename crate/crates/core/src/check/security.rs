//! Speculative constant time and relative security over a finite state space.

use rayon::prelude::*;

use crate::harden::Protection;
use crate::label::Labeling;
use crate::lang::Com;

use super::explore::{check_seq_obs_equiv, check_spec_obs_equiv};
use super::space::{enum_states, pub_equiv_pairs, StateSpace};
use super::{Bounds, CheckError, State, Verdict};

/// Checks `pairs` in parallel and keeps the violation of the first pair in
/// index order, so the result does not depend on scheduling.
fn check_pairs(c: &Com, states: &[State], pairs: &[(usize, usize)], bounds: Bounds) -> Verdict {
    let found = pairs.par_iter().find_map_first(|&(i, j)| {
        let v = check_spec_obs_equiv(c, &states[i], c, &states[j], false, bounds);
        (!v.holds()).then_some(v)
    });
    found.unwrap_or(Verdict::Holds { bounds, pairs: pairs.len() })
}

/// Speculative constant time: every publicly equivalent pair of states in
/// `space` observes the same under every directive sequence.
pub fn check_sct(c: &Com, labels: &Labeling, space: &StateSpace, bounds: Bounds) -> Verdict {
    let states: Vec<State> = enum_states(space).collect();
    let pairs = pub_equiv_pairs(&states, labels);
    check_pairs(c, &states, &pairs, bounds)
}

/// Relative security of `protection` applied to `c`: pairs the source keeps
/// apart sequentially are skipped, the rest must be speculatively
/// indistinguishable after hardening.
pub fn check_relative_security(
    protection: Protection,
    c: &Com,
    labels: &Labeling,
    space: &StateSpace,
    bounds: Bounds,
    flag_var: &str,
) -> Result<Verdict, CheckError> {
    for a in c.arrays() {
        if space.arrays.get(&a).is_none_or(|d| d.size() == 0) {
            return Err(CheckError::EmptyArray(a));
        }
    }
    if let Some((a, _)) = space.arrays.iter().find(|(_, d)| d.size() == 0) {
        return Err(CheckError::EmptyArray(a.clone()));
    }
    if protection != Protection::None
        && (space.scalars.contains_key(flag_var) || space.arrays.contains_key(flag_var)) {
            return Err(CheckError::FlagInSpace(flag_var.to_string()));
        }
    let hardened = protection.apply(c, labels, flag_var)?;
    let states: Vec<State> = enum_states(space).collect();
    let pairs: Vec<(usize, usize)> = pub_equiv_pairs(&states, labels)
        .into_par_iter()
        .filter(|&(i, j)| check_seq_obs_equiv(c, &states[i], &states[j], bounds.fuel).holds())
        .collect();
    Ok(check_pairs(&hardened, &states, &pairs, bounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harden::HardenVariant;
    use crate::lang::parse_com;
    use crate::state::Dir;

    fn listing1() -> (Com, Labeling, StateSpace) {
        (
            parse_com("if i < a1_size then j <- a1[i]; x <- a2[j] end").unwrap(),
            Labeling::with_public(["i", "a1_size", "j", "x"], ["a1", "a2"]),
            StateSpace::parse(
                "i in {1, 4}\na1_size = 4\na1 = [0, 7, 1, 2]\na2 : size 1000 in {0}\na3 : size 1 in {42, 43}",
            )
            .unwrap(),
        )
    }

    #[test]
    fn unprotected_gadget_is_not_sct() {
        let (c, l, space) = listing1();
        let v = check_sct(&c, &l, &space, Bounds { max_dirs: 3, fuel: 100 });
        let w = v.witness().unwrap();
        assert_eq!(w.dirs, [Dir::Force, Dir::Load("a3".into(), 0), Dir::Step]);
        assert_eq!(w.s1.0.get("i"), 4);
    }

    #[test]
    fn selective_hardening_is_sct() {
        let (c, l, space) = listing1();
        let h = HardenVariant::Sislh { mask_stores: true };
        let hc = Protection::Static(h).apply(&c, &l, "b").unwrap();
        assert!(check_sct(&hc, &l, &space, Bounds { max_dirs: 6, fuel: 200 }).holds());
    }

    #[test]
    fn relsec_preconditions() {
        let (c, l, space) = listing1();
        let mut bad = space.clone();
        bad.scalars.insert("b".into(), vec![0]);
        assert_eq!(
            check_relative_security(Protection::Static(HardenVariant::Uslh), &c, &l, &bad, Bounds::default(), "b"),
            Err(CheckError::FlagInSpace("b".into()))
        );
        let mut bad = space.clone();
        bad.arrays.remove("a2");
        assert_eq!(
            check_relative_security(Protection::None, &c, &l, &bad, Bounds::default(), "b"),
            Err(CheckError::EmptyArray("a2".into()))
        );
        assert!(matches!(
            check_relative_security(Protection::FlowSensitive, &c, &l, &space, Bounds::default(), "x"),
            Err(CheckError::Harden(_))
        ));
    }

    #[test]
    fn relsec_on_gadget() {
        let (c, l, space) = listing1();
        let b = Bounds { max_dirs: 4, fuel: 100 };
        assert!(!check_relative_security(Protection::None, &c, &l, &space, b, "b").unwrap().holds());
        for p in [Protection::Static(HardenVariant::Uslh), Protection::FlowSensitive] {
            assert!(check_relative_security(p, &c, &l, &space, b, "b").unwrap().holds(), "{p}");
        }
    }
}
