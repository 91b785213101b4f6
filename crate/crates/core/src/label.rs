//! Two-point security lattice and labelings of scalars and arrays.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::state::{content, is_ident, FormatError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Public,
    Secret,
}

impl Label {
    pub fn is_public(self) -> bool {
        self == Label::Public
    }

    pub fn join(self, other: Label) -> Label {
        if self.is_public() && other.is_public() {
            Label::Public
        } else {
            Label::Secret
        }
    }

    /// `self ⊑ other`: public flows anywhere, secret only into secret.
    pub fn flows_to(self, other: Label) -> bool {
        self.is_public() || !other.is_public()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Public => "public",
            Label::Secret => "secret",
        })
    }
}

/// Total labeling of scalars and arrays. Unlisted names are secret, so only
/// the public names are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Labeling {
    public_vars: BTreeSet<String>,
    public_arrs: BTreeSet<String>,
}

impl Labeling {
    pub fn all_secret() -> Self {
        Self::default()
    }

    pub fn with_public<'a>(
        vars: impl IntoIterator<Item = &'a str>,
        arrs: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        Labeling {
            public_vars: vars.into_iter().map(str::to_string).collect(),
            public_arrs: arrs.into_iter().map(str::to_string).collect(),
        }
    }

    pub fn var(&self, x: &str) -> Label {
        if self.public_vars.contains(x) {
            Label::Public
        } else {
            Label::Secret
        }
    }

    pub fn arr(&self, a: &str) -> Label {
        if self.public_arrs.contains(a) {
            Label::Public
        } else {
            Label::Secret
        }
    }

    pub fn set_var(&mut self, x: &str, l: Label) {
        if l.is_public() {
            self.public_vars.insert(x.to_string());
        } else {
            self.public_vars.remove(x);
        }
    }

    pub fn set_arr(&mut self, a: &str, l: Label) {
        if l.is_public() {
            self.public_arrs.insert(a.to_string());
        } else {
            self.public_arrs.remove(a);
        }
    }

    pub fn public_vars(&self) -> impl Iterator<Item = &str> {
        self.public_vars.iter().map(String::as_str)
    }

    pub fn public_arrs(&self) -> impl Iterator<Item = &str> {
        self.public_arrs.iter().map(String::as_str)
    }

    /// Pointwise join.
    pub fn join(&self, other: &Labeling) -> Labeling {
        Labeling {
            public_vars: self.public_vars.intersection(&other.public_vars).cloned().collect(),
            public_arrs: self.public_arrs.intersection(&other.public_arrs).cloned().collect(),
        }
    }

    /// Pointwise `⊑`.
    pub fn flows_to(&self, other: &Labeling) -> bool {
        other.public_vars.is_subset(&self.public_vars)
            && other.public_arrs.is_subset(&self.public_arrs)
    }

    /// Renders the labels of `vars` and `arrs` in labeling-file format.
    pub fn render<'a>(
        &self,
        vars: impl IntoIterator<Item = &'a str>,
        arrs: impl IntoIterator<Item = &'a str>,
    ) -> String {
        let mut out = String::new();
        for x in vars {
            out.push_str(&format!("{x}: {}\n", self.var(x)));
        }
        for a in arrs {
            out.push_str(&format!("{a}: {}\n", self.arr(a)));
        }
        out
    }
}

/// Contents of a labeling file before names are split into scalars and
/// arrays.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelSpec(BTreeMap<String, Label>);

impl LabelSpec {
    /// Parses `NAME: public|secret` lines with `#` comments.
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let body = content(raw);
            if body.is_empty() {
                continue;
            }
            let err = |msg: String| FormatError::Line { line: n + 1, msg };
            let (name, label) = body
                .split_once(':')
                .ok_or_else(|| err("expected `NAME: public|secret`".into()))?;
            let (name, label) = (name.trim(), label.trim());
            if !is_ident(name) {
                return Err(err(format!("`{name}` is not a valid name")));
            }
            let label = match label {
                "public" => Label::Public,
                "secret" => Label::Secret,
                other => return Err(err(format!("unknown label `{other}`"))),
            };
            if map.insert(name.to_string(), label).is_some() {
                return Err(FormatError::Duplicate(name.to_string()));
            }
        }
        Ok(LabelSpec(map))
    }

    /// Splits the listed names using the set of names known to be arrays.
    pub fn resolve(&self, arrays: &BTreeSet<String>) -> Labeling {
        let mut l = Labeling::all_secret();
        for (name, label) in &self.0 {
            if arrays.contains(name) {
                l.set_arr(name, *label);
            } else {
                l.set_var(name, *label);
            }
        }
        l
    }
}
