//! Bounded checking of speculative security properties and of the lemmas
//! relating hardened programs to the ideal semantics.
//!
//! Quantifiers over directive sequences are explored exhaustively up to
//! `max_dirs` directives, trying only directives some rule can consume.
//! Quantifiers over execution prefixes are realised by running once with the
//! full fuel and comparing traces up to prefix.

mod explore;
mod gen;
mod lemmas;
mod security;
mod space;

use std::fmt;

use thiserror::Error;

use crate::harden::HardenError;
use crate::state::{render_dirs, ArrayState, Dir, Obs, ScalarState};

pub use explore::{
    check_seq_obs_equiv, check_spec_obs_equiv, enum_runs, enum_spec_runs, first_divergence, Divergence,
    RunLeaf,
};
pub use gen::{
    gen_labeling, gen_program, gen_secret_variant, gen_state, random_feasible_dirs, NamePools,
};
pub use lemmas::{bcc_mismatch, check_bcc, check_step_ni, check_unwinding, check_wl_preservation};
pub use security::{check_relative_security, check_sct};
pub use space::{enum_states, pub_equiv_pairs, ArrayDomain, StateSpace};

pub type State = (ScalarState, ArrayState);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_dirs: usize,
    pub fuel: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_dirs: 8, fuel: 200 }
    }
}

/// Two runs that take the same directives and observe different things.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub s1: State,
    pub s2: State,
    pub dirs: Vec<Dir>,
    pub trace1: Vec<Obs>,
    pub trace2: Vec<Obs>,
    /// 1-based position of the first differing observation.
    pub diverges_at: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds { bounds: Bounds, pairs: usize },
    Violated(Box<Witness>),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Violated(w) => Some(w),
            Verdict::Holds { .. } => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds { bounds, pairs } => write!(
                f,
                "holds ({pairs} state pairs, max-dirs {}, fuel {})",
                bounds.max_dirs, bounds.fuel
            ),
            Verdict::Violated(w) => {
                writeln!(f, "violated at observation {}", w.diverges_at)?;
                writeln!(f, "directives: {}", render_dirs(&w.dirs))?;
                let show = |t: &[Obs]| t.iter().map(Obs::to_string).collect::<Vec<_>>().join("; ");
                writeln!(f, "trace 1: {}", show(&w.trace1))?;
                write!(f, "trace 2: {}", show(&w.trace2))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Harden(#[from] HardenError),
    #[error("array `{0}` must be declared with at least one element")]
    EmptyArray(String),
    #[error("the state space binds the flag variable `{0}`")]
    FlagInSpace(String),
    #[error("flag variable must hold {expected} to match the misspeculation flag")]
    FlagEncoding { expected: u64 },
    #[error("program is not well typed under the labeling")]
    IllTyped,
    #[error("configuration is not well labeled")]
    NotWellLabeled,
    #[error("states are not publicly equivalent")]
    NotPubEquiv,
    #[error("configurations differ in command, flag or labels")]
    Mismatched,
    #[error("{0}")]
    Unsupported(String),
}

/// True iff one trace is a prefix of the other.
pub fn prefix_of(o1: &[Obs], o2: &[Obs]) -> bool {
    o1.iter().zip(o2).all(|(a, b)| a == b)
}
