//! Reference programs with their state spaces, labelings and the verdicts
//! each protection is expected to get.

use std::collections::BTreeSet;

use crate::check::{check_relative_security, check_sct, Bounds, CheckError, StateSpace, Verdict};
use crate::harden::{HardenVariant, Protection};
use crate::label::Labeling;
use crate::lang::{parse_com, Com};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    /// Speculative constant time of the hardened program.
    Sct,
    /// Relative security of the hardened program against the source.
    RelSec,
}

impl std::fmt::Display for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Property::Sct => "sct",
            Property::RelSec => "relsec",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub property: Property,
    pub protection: Protection,
    pub holds: bool,
}

const fn expect(property: Property, protection: Protection, holds: bool) -> Expectation {
    Expectation { property, protection, holds }
}

#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub id: usize,
    pub title: &'static str,
    pub program: &'static str,
    pub public_vars: &'static [&'static str],
    pub public_arrays: &'static [&'static str],
    pub space: &'static str,
    /// Flag variable for hardening; must not occur in the program.
    pub flag_var: &'static str,
    pub bounds: Bounds,
    /// The first entry is the one `repro` replays.
    pub expected: &'static [Expectation],
}

use HardenVariant::*;
use Property::*;
use Protection::{FlowSensitive, None as Unprotected, Static};

const GADGET_SPACE: &str = "\
i in {1, 4}
a1_size = 4
a1 = [0, 7, 1, 2]
a2 : size 1000 in {0}
a3 : size 1 in {42, 43}
";

pub const FIXTURES: [Fixture; 6] = [
    Fixture {
        id: 1,
        title: "bounds-check bypass gadget",
        program: "if i < a1_size then\n  j <- a1[i];\n  x <- a2[j]\nend\n",
        public_vars: &["i", "a1_size", "j", "x"],
        public_arrays: &["a1", "a2"],
        space: GADGET_SPACE,
        flag_var: "b",
        bounds: Bounds { max_dirs: 6, fuel: 200 },
        expected: &[
            expect(RelSec, Unprotected, false),
            expect(Sct, Unprotected, false),
            expect(Sct, Static(PlainIslh), true),
            expect(Sct, Static(Sislh { mask_stores: true }), true),
            expect(RelSec, Static(Fislh), true),
            expect(RelSec, Static(Fvslh), true),
            expect(RelSec, Static(Uslh), true),
            expect(RelSec, FlowSensitive, true),
        ],
    },
    Fixture {
        id: 2,
        title: "gadget after index masking",
        program: "\
if i < a1_size then
  b := (i < a1_size ? b : 1);
  j <- a1[(b = 1 ? 0 : i)];
  x <- a2[(b = 1 ? 0 : j)]
else
  b := (i < a1_size ? 1 : b)
end
",
        public_vars: &["i", "a1_size", "j", "x", "b"],
        public_arrays: &["a1", "a2"],
        space: GADGET_SPACE,
        flag_var: "b2",
        bounds: Bounds { max_dirs: 10, fuel: 200 },
        expected: &[
            expect(Sct, Unprotected, true),
            expect(RelSec, Unprotected, true),
            expect(RelSec, FlowSensitive, true),
        ],
    },
    Fixture {
        id: 3,
        title: "store to an unmasked out-of-bounds index",
        program: "\
if i < secrets_size then
  secrets[i] <- key;
  x <- a[0];
  if 1 <= x then
    skip
  end
end
",
        public_vars: &["i", "secrets_size", "x"],
        public_arrays: &["a"],
        space: "\
i in {0, 1}
secrets_size = 1
secrets : size 1 in {0}
a : size 1 in {0}
key in {0, 1}
",
        flag_var: "b",
        bounds: Bounds { max_dirs: 6, fuel: 200 },
        expected: &[
            expect(Sct, Static(Sislh { mask_stores: false }), false),
            expect(Sct, Static(Sislh { mask_stores: true }), true),
            expect(Sct, Static(Svslh), true),
            expect(RelSec, Unprotected, false),
            expect(RelSec, Static(Fislh), true),
            expect(RelSec, Static(Fvslh), true),
            expect(RelSec, Static(Uslh), true),
            expect(RelSec, FlowSensitive, true),
        ],
    },
    Fixture {
        id: 4,
        title: "secret branch in dead code",
        program: "\
if false then
  if secret = 0 then
    skip
  end
end
",
        public_vars: &[],
        public_arrays: &[],
        space: "secret in {0, 1}\n",
        flag_var: "b",
        bounds: Bounds { max_dirs: 6, fuel: 200 },
        expected: &[
            expect(RelSec, Unprotected, false),
            expect(RelSec, Static(Fislh), true),
            expect(RelSec, Static(Fvslh), true),
            expect(RelSec, Static(Uslh), true),
            expect(RelSec, FlowSensitive, true),
        ],
    },
    Fixture {
        id: 5,
        title: "secret-indexed load in dead code",
        program: "\
if false then
  xsecret <- a[isecret]
end
",
        public_vars: &[],
        public_arrays: &["a"],
        space: "isecret in {0, 1}\na : size 2 in {0}\n",
        flag_var: "b",
        bounds: Bounds { max_dirs: 6, fuel: 200 },
        expected: &[
            expect(RelSec, Unprotected, false),
            expect(RelSec, Static(Fislh), true),
            expect(RelSec, Static(Fvslh), true),
            expect(RelSec, Static(Uslh), true),
            expect(RelSec, FlowSensitive, true),
        ],
    },
    Fixture {
        id: 6,
        title: "secret-indexed store in dead code",
        program: "\
if false then
  a[isecret] <- epublic
end
",
        public_vars: &["epublic"],
        public_arrays: &[],
        space: "isecret in {0, 1}\nepublic in {0}\na : size 2 in {0}\n",
        flag_var: "b",
        bounds: Bounds { max_dirs: 6, fuel: 200 },
        expected: &[
            expect(RelSec, Unprotected, false),
            expect(RelSec, Static(Fislh), true),
            expect(RelSec, Static(Fvslh), true),
            expect(RelSec, Static(Uslh), true),
            expect(RelSec, FlowSensitive, true),
        ],
    },
];

pub fn fixture(id: usize) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.id == id)
}

impl Fixture {
    pub fn com(&self) -> Com {
        parse_com(self.program).expect("fixture programs parse")
    }

    pub fn labels(&self) -> Labeling {
        Labeling::with_public(self.public_vars.iter().copied(), self.public_arrays.iter().copied())
    }

    pub fn state_space(&self) -> StateSpace {
        StateSpace::parse(self.space).expect("fixture spaces parse")
    }

    /// Array names the program or the space mention.
    pub fn arrays(&self) -> BTreeSet<String> {
        let mut out = self.com().arrays();
        out.extend(self.state_space().arrays.into_keys());
        out
    }

    pub fn evaluate(&self, e: &Expectation, bounds: Bounds) -> Result<Verdict, CheckError> {
        let (c, l, space) = (self.com(), self.labels(), self.state_space());
        match e.property {
            Sct => {
                let hardened = e.protection.apply(&c, &l, self.flag_var)?;
                Ok(check_sct(&hardened, &l, &space, bounds))
            }
            RelSec => check_relative_security(e.protection, &c, &l, &space, bounds, self.flag_var),
        }
    }

    /// Replays the headline expectation at the fixture's bounds.
    pub fn repro(&self) -> (Expectation, Result<Verdict, CheckError>) {
        let e = self.expected[0];
        (e, self.evaluate(&e, self.bounds))
    }
}
