//! Element labels, actions, and the sets built from them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tag {
    Zero,
    One,
    Star,
}

impl Tag {
    pub fn from_bit(bit: bool) -> Tag {
        if bit {
            Tag::One
        } else {
            Tag::Zero
        }
    }

    pub const ALL: [Tag; 3] = [Tag::Zero, Tag::One, Tag::Star];
}

/// A ground-set element.
///
/// `Tagged` elements carry the `(i, 0)`, `(i, 1)`, `(i, *)` labels of a hard
/// instance; `F` and `T` are the two terminal special elements. `Bit`
/// elements are the distinguished `(i, b)` elements grafted on by an
/// extension and are kept apart from `Tagged` so that an extended hard
/// instance never aliases its own special labels. `Anon` covers everything
/// else.
///
/// The derived order (variant first, then fields) is the total order used for
/// every deterministic tie-break in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Tagged { index: u32, tag: Tag },
    F,
    T,
    Bit { index: u32, value: bool },
    Anon(u32),
}

impl Label {
    pub fn tagged(index: u32, tag: Tag) -> Label {
        assert!(index >= 1, "tagged label index must be >= 1");
        Label::Tagged { index, tag }
    }

    pub fn bit(index: u32, value: bool) -> Label {
        assert!(index >= 1, "bit label index must be >= 1");
        Label::Bit { index, value }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tagged { index, tag } => {
                let t = match tag {
                    Tag::Zero => "0",
                    Tag::One => "1",
                    Tag::Star => "*",
                };
                write!(f, "{index}:{t}")
            }
            Label::F => f.write_str("F"),
            Label::T => f.write_str("T"),
            Label::Bit { index, value } => write!(f, "b{index}:{}", u8::from(*value)),
            Label::Anon(id) => write!(f, "a{id}"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Label> {
        let bad = || Error::InvalidInput(format!("bad label {s:?}"));
        match s {
            "F" => return Ok(Label::F),
            "T" => return Ok(Label::T),
            _ => {}
        }
        if let Some(id) = s.strip_prefix('a') {
            return id.parse().map(Label::Anon).map_err(|_| bad());
        }
        let (bit, body) = match s.strip_prefix('b') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (index, tag) = body.split_once(':').ok_or_else(bad)?;
        let index: u32 = index.parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(bad());
        }
        match (bit, tag) {
            (true, "0") => Ok(Label::bit(index, false)),
            (true, "1") => Ok(Label::bit(index, true)),
            (false, "0") => Ok(Label::tagged(index, Tag::Zero)),
            (false, "1") => Ok(Label::tagged(index, Tag::One)),
            (false, "*") => Ok(Label::tagged(index, Tag::Star)),
            _ => Err(bad()),
        }
    }
}

fn join_labels<'a>(labels: impl Iterator<Item = &'a Label>) -> String {
    labels.map(|l| l.to_string()).collect::<Vec<_>>().join(";")
}

/// A finite set of elements. Ordered lexicographically over its sorted labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Action(BTreeSet<Label>);

impl Action {
    pub fn new(members: BTreeSet<Label>) -> Action {
        Action(members)
    }

    pub fn empty() -> Action {
        Action(BTreeSet::new())
    }

    pub fn members(&self) -> &BTreeSet<Label> {
        &self.0
    }

    pub fn into_members(self) -> BTreeSet<Label> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.0.contains(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Label> {
        self.0.iter()
    }

    pub fn is_awake(&self, sleeping: &SleepingSet) -> bool {
        self.0.is_disjoint(&sleeping.0)
    }

    pub fn is_subset_of(&self, other: &BTreeSet<Label>) -> bool {
        self.0.is_subset(other)
    }

    pub fn intersect(&self, other: &BTreeSet<Label>) -> Action {
        Action(self.0.intersection(other).copied().collect())
    }

    pub fn union(&self, other: &Action) -> Action {
        Action(self.0.union(&other.0).copied().collect())
    }

    pub fn count_in(&self, other: &BTreeSet<Label>) -> usize {
        self.0.intersection(other).count()
    }
}

impl FromIterator<Label> for Action {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> Self {
        Action(iter.into_iter().collect())
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", join_labels(self.0.iter()))
    }
}

impl Action {
    /// Semicolon-joined labels in label order, as used by CSV output.
    pub fn to_field(&self) -> String {
        join_labels(self.0.iter())
    }
}

/// Elements declared unavailable in a round.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SleepingSet(BTreeSet<Label>);

impl SleepingSet {
    pub fn new(sleeping: BTreeSet<Label>) -> SleepingSet {
        SleepingSet(sleeping)
    }

    pub fn empty() -> SleepingSet {
        SleepingSet(BTreeSet::new())
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.0
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.0.contains(label)
    }

    pub fn insert(&mut self, label: Label) {
        self.0.insert(label);
    }

    pub fn extend(&mut self, labels: impl IntoIterator<Item = Label>) {
        self.0.extend(labels);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_field(&self) -> String {
        join_labels(self.0.iter())
    }
}

impl FromIterator<Label> for SleepingSet {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> Self {
        SleepingSet(iter.into_iter().collect())
    }
}

/// The `d` elements of an instance, in construction order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    elements: Vec<Label>,
    index: BTreeSet<Label>,
}

impl GroundSet {
    pub fn new(elements: Vec<Label>) -> Result<GroundSet> {
        let index: BTreeSet<Label> = elements.iter().copied().collect();
        if index.len() != elements.len() {
            return Err(Error::InvalidInput("duplicate label in ground set".into()));
        }
        Ok(GroundSet { elements, index })
    }

    pub fn elements(&self) -> &[Label] {
        &self.elements
    }

    pub fn as_set(&self) -> &BTreeSet<Label> {
        &self.index
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.index.contains(label)
    }

    /// Elements not in `sleeping`.
    pub fn awake(&self, sleeping: &SleepingSet) -> BTreeSet<Label> {
        self.index.difference(sleeping.labels()).copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn label_syntax() {
        for s in ["1:0", "2:1", "3:*", "F", "T", "a0", "a17", "b4:1", "b1:0"] {
            let l: Label = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
        }
        for s in ["0:1", "x", "1:2", "b1:*", "a", "1"] {
            assert!(s.parse::<Label>().is_err(), "{s}");
        }
    }

    #[test]
    fn action_order_is_lexicographic() {
        let a: Action = ["1:0".parse().unwrap(), Label::T].into_iter().collect();
        let b: Action = ["1:1".parse().unwrap(), Label::F].into_iter().collect();
        assert!(a < b);
        assert_eq!(a.to_field(), "1:0;T");
    }

    #[test]
    fn ground_set_rejects_duplicates() {
        assert!(GroundSet::new(vec![Label::F, Label::F]).is_err());
        let g = GroundSet::new(vec![Label::F, Label::T]).unwrap();
        let s: SleepingSet = [Label::F].into_iter().collect();
        assert_eq!(g.awake(&s).into_iter().collect::<Vec<_>>(), vec![Label::T]);
    }

    fn any_label() -> impl Strategy<Value = Label> {
        prop_oneof![
            (1u32..50, 0usize..3).prop_map(|(i, t)| Label::tagged(i, Tag::ALL[t])),
            Just(Label::F),
            Just(Label::T),
            (1u32..50, any::<bool>()).prop_map(|(i, b)| Label::bit(i, b)),
            (0u32..1000).prop_map(Label::Anon),
        ]
    }

    proptest! {
        #[test]
        fn label_text_round_trip(l in any_label()) {
            prop_assert_eq!(l.to_string().parse::<Label>().unwrap(), l);
        }
    }
}
