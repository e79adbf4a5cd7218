use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of atomic propositions, stored as a bitmask over an ordered AP list.
///
/// Bit `i` is set when the `i`-th proposition of the owning AP list holds.
/// The mask alone carries no names; pair it with the AP list to print it.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct LabelSet(pub u32);

/// Upper bound on the number of atomic propositions a [`LabelSet`] can index.
pub const MAX_PROPOSITIONS: usize = 32;

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn contains(self, index: usize) -> bool {
        index < MAX_PROPOSITIONS && self.0 & (1 << index) != 0
    }

    pub fn with(self, index: usize) -> LabelSet {
        LabelSet(self.0 | (1 << index))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Builds a label set from proposition names. Returns the first unknown
    /// name on failure.
    pub fn from_names<S: AsRef<str>>(ap: &[String], names: &[S]) -> Result<LabelSet, String> {
        let mut set = LabelSet::EMPTY;
        for name in names {
            let name = name.as_ref();
            match ap.iter().position(|p| p == name) {
                Some(i) => set = set.with(i),
                None => return Err(name.to_string()),
            }
        }
        Ok(set)
    }

    pub fn names(self, ap: &[String]) -> Vec<String> {
        ap.iter()
            .enumerate()
            .filter(|(i, _)| self.contains(*i))
            .map(|(_, p)| p.clone())
            .collect()
    }

    /// Re-indexes this set from one AP ordering into another. Propositions
    /// that are absent from `to` are dropped.
    pub fn project(self, from: &[String], to: &[String]) -> LabelSet {
        let mut out = LabelSet::EMPTY;
        for (i, name) in from.iter().enumerate() {
            if self.contains(i) {
                if let Some(j) = to.iter().position(|p| p == name) {
                    out = out.with(j);
                }
            }
        }
        out
    }

    pub fn display(self, ap: &[String]) -> LabelDisplay<'_> {
        LabelDisplay { set: self, ap }
    }
}

pub struct LabelDisplay<'a> {
    set: LabelSet,
    ap: &'a [String],
}

impl fmt::Display for LabelDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.set.names(self.ap).join(","))
    }
}
