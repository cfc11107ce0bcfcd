//! Allen's basic relations, set-valued labels, and the composition algebra.
//!
//! The 13×13 composition table is not hand-typed: it is generated once from
//! point-order semantics by enumerating every rank assignment of the six
//! endpoints of three intervals and reading off which relations co-occur.

use std::fmt;
use std::sync::OnceLock;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of Allen's 13 basic interval relations.
///
/// Converse pairs sit at adjacent indices (2k, 2k+1) so taking the converse
/// is a single bit flip; `Equals` is self-converse at index 12.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[repr(u8)]
pub enum AllenRelation {
    Before = 0,
    After = 1,
    Meets = 2,
    MetBy = 3,
    Overlaps = 4,
    OverlappedBy = 5,
    Starts = 6,
    StartedBy = 7,
    During = 8,
    Contains = 9,
    Finishes = 10,
    FinishedBy = 11,
    Equals = 12,
}

use AllenRelation::*;

impl AllenRelation {
    pub const COUNT: usize = 13;

    pub const ALL: [AllenRelation; 13] = [
        Before,
        After,
        Meets,
        MetBy,
        Overlaps,
        OverlappedBy,
        Starts,
        StartedBy,
        During,
        Contains,
        Finishes,
        FinishedBy,
        Equals,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<AllenRelation> {
        Self::ALL.get(i).copied()
    }

    /// Converse relation: `a r b` iff `b converse(r) a`.
    pub fn converse(self) -> AllenRelation {
        if self == Equals {
            Equals
        } else {
            Self::ALL[self.index() ^ 1]
        }
    }

    /// Lowercase hyphenated name, e.g. `met-by`.
    pub fn name(self) -> &'static str {
        match self {
            Before => "before",
            After => "after",
            Meets => "meets",
            MetBy => "met-by",
            Overlaps => "overlaps",
            OverlappedBy => "overlapped-by",
            Starts => "starts",
            StartedBy => "started-by",
            During => "during",
            Contains => "contains",
            Finishes => "finishes",
            FinishedBy => "finished-by",
            Equals => "equals",
        }
    }

    pub fn from_name(s: &str) -> Option<AllenRelation> {
        Self::ALL.iter().copied().find(|r| r.name() == s)
    }

    /// Conceptual neighbors: relations reachable by sliding a single
    /// endpoint across exactly one equality. Used to model "adjacent"
    /// corruption that shares most of the endpoint ordering with the truth.
    pub fn neighbors(self) -> &'static [AllenRelation] {
        match self {
            Before => &[Meets],
            Meets => &[Before, Overlaps],
            Overlaps => &[Meets, Starts, FinishedBy],
            Starts => &[Overlaps, Equals, During],
            During => &[Starts, Finishes],
            Finishes => &[During, Equals, OverlappedBy],
            FinishedBy => &[Overlaps, Equals, Contains],
            Equals => &[Starts, StartedBy, Finishes, FinishedBy],
            Contains => &[FinishedBy, StartedBy],
            StartedBy => &[Equals, Contains, OverlappedBy],
            OverlappedBy => &[StartedBy, Finishes, MetBy],
            MetBy => &[OverlappedBy, After],
            After => &[MetBy],
        }
    }
}

impl fmt::Display for AllenRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of basic relations, packed into 13 bits.
///
/// The empty set denotes a local contradiction; an absent graph edge is
/// interpreted as [`RelationSet::UNIVERSAL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSet(u16);

impl RelationSet {
    pub const EMPTY: RelationSet = RelationSet(0);
    pub const UNIVERSAL: RelationSet = RelationSet(0x1FFF);

    pub fn singleton(r: AllenRelation) -> RelationSet {
        RelationSet(1 << r.index())
    }

    pub fn from_bits(bits: u16) -> RelationSet {
        RelationSet(bits & 0x1FFF)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn contains(self, r: AllenRelation) -> bool {
        self.0 & (1 << r.index()) != 0
    }

    pub fn insert(&mut self, r: AllenRelation) {
        self.0 |= 1 << r.index();
    }

    pub fn union(self, other: RelationSet) -> RelationSet {
        RelationSet(self.0 | other.0)
    }

    pub fn intersect(self, other: RelationSet) -> RelationSet {
        RelationSet(self.0 & other.0)
    }

    pub fn complement(self) -> RelationSet {
        RelationSet(!self.0 & 0x1FFF)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_universal(self) -> bool {
        self.0 == 0x1FFF
    }

    pub fn is_subset(self, other: RelationSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = AllenRelation> {
        AllenRelation::ALL
            .iter()
            .copied()
            .filter(move |r| self.contains(*r))
    }

    /// Elementwise converse; an involution.
    pub fn converse(self) -> RelationSet {
        let mut out = RelationSet::EMPTY;
        for r in self.iter() {
            out.insert(r.converse());
        }
        out
    }

    /// Allen composition lifted to sets: the union over all basic pairs.
    pub fn compose(self, other: RelationSet) -> RelationSet {
        let table = composition_table();
        let mut out = 0u16;
        for r in self.iter() {
            let row = &table[r.index()];
            for s in other.iter() {
                out |= row[s.index()];
            }
        }
        RelationSet(out)
    }
}

impl FromIterator<AllenRelation> for RelationSet {
    fn from_iter<T: IntoIterator<Item = AllenRelation>>(iter: T) -> Self {
        let mut s = RelationSet::EMPTY;
        for r in iter {
            s.insert(r);
        }
        s
    }
}

impl fmt::Display for RelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, r) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for RelationSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for r in self.iter() {
            seq.serialize_element(r.name())?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for RelationSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RelationSet;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a sequence of Allen relation names")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<RelationSet, A::Error> {
                let mut set = RelationSet::EMPTY;
                while let Some(name) = seq.next_element::<String>()? {
                    let r = AllenRelation::from_name(&name)
                        .ok_or_else(|| de::Error::custom(format!("unknown relation `{name}`")))?;
                    set.insert(r);
                }
                Ok(set)
            }
        }
        deserializer.deserialize_seq(V)
    }
}

/// Classify the relation between two intervals given by endpoint ranks.
fn relation_of_ranks(xs: u8, xe: u8, ys: u8, ye: u8) -> AllenRelation {
    use std::cmp::Ordering::*;
    if xe < ys {
        return Before;
    }
    if xe == ys {
        return Meets;
    }
    if ye < xs {
        return After;
    }
    if ye == xs {
        return MetBy;
    }
    match (xs.cmp(&ys), xe.cmp(&ye)) {
        (Less, Less) => Overlaps,
        (Less, Equal) => FinishedBy,
        (Less, Greater) => Contains,
        (Equal, Less) => Starts,
        (Equal, Equal) => Equals,
        (Equal, Greater) => StartedBy,
        (Greater, Less) => During,
        (Greater, Equal) => Finishes,
        (Greater, Greater) => OverlappedBy,
    }
}

/// table[r][s] = bitmask of relations t such that some intervals a,b,c
/// satisfy a r b, b s c, a t c.
fn composition_table() -> &'static [[u16; 13]; 13] {
    static TABLE: OnceLock<[[u16; 13]; 13]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[0u16; 13]; 13];
        // Six endpoints never need more than six distinct rank levels, so
        // enumerating ranks in 0..6 covers every point-order configuration.
        for a_s in 0..6u8 {
            for a_e in a_s + 1..6 {
                for b_s in 0..6u8 {
                    for b_e in b_s + 1..6 {
                        for c_s in 0..6u8 {
                            for c_e in c_s + 1..6 {
                                let ab = relation_of_ranks(a_s, a_e, b_s, b_e);
                                let bc = relation_of_ranks(b_s, b_e, c_s, c_e);
                                let ac = relation_of_ranks(a_s, a_e, c_s, c_e);
                                t[ab.index()][bc.index()] |= 1 << ac.index();
                            }
                        }
                    }
                }
            }
        }
        t
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converse_is_involution() {
        for r in AllenRelation::ALL {
            assert_eq!(r.converse().converse(), r);
        }
        assert_eq!(Equals.converse(), Equals);
        assert_eq!(Before.converse(), After);
        assert_eq!(RelationSet::UNIVERSAL.converse(), RelationSet::UNIVERSAL);
        assert_eq!(
            RelationSet::singleton(Before).converse(),
            RelationSet::singleton(After)
        );
    }

    #[test]
    fn equals_is_composition_identity() {
        let e = RelationSet::singleton(Equals);
        for r in AllenRelation::ALL {
            let s = RelationSet::singleton(r);
            assert_eq!(e.compose(s), s, "equals ∘ {r}");
            assert_eq!(s.compose(e), s, "{r} ∘ equals");
        }
    }

    #[test]
    fn composition_set_semantics() {
        let empty = RelationSet::EMPTY;
        let univ = RelationSet::UNIVERSAL;
        assert!(empty.compose(univ).is_empty());
        assert!(univ.compose(empty).is_empty());
        assert!(univ.compose(univ).is_universal());
        // Frozen from the endpoint-enumeration oracle.
        assert_eq!(
            RelationSet::singleton(Before).compose(RelationSet::singleton(Before)),
            RelationSet::singleton(Before)
        );
        assert_eq!(
            RelationSet::singleton(Meets).compose(RelationSet::singleton(Meets)),
            RelationSet::singleton(Before)
        );
    }

    #[test]
    fn converse_composition_identity_all_pairs() {
        for r in AllenRelation::ALL {
            for s in AllenRelation::ALL {
                let rs = RelationSet::singleton(r);
                let ss = RelationSet::singleton(s);
                assert_eq!(
                    rs.compose(ss).converse(),
                    ss.converse().compose(rs.converse()),
                    "converse(compose({r},{s}))"
                );
            }
        }
    }

    #[test]
    fn neighbors_are_symmetric_and_irreflexive() {
        for r in AllenRelation::ALL {
            for &s in r.neighbors() {
                assert_ne!(r, s);
                assert!(s.neighbors().contains(&r), "{r} ~ {s} not symmetric");
            }
        }
        // Connectivity: walk the graph from `before`.
        let mut seen = RelationSet::singleton(Before);
        let mut frontier = vec![Before];
        while let Some(r) = frontier.pop() {
            for &s in r.neighbors() {
                if !seen.contains(s) {
                    seen.insert(s);
                    frontier.push(s);
                }
            }
        }
        assert!(seen.is_universal());
    }

    #[test]
    fn relation_names_round_trip() {
        for r in AllenRelation::ALL {
            assert_eq!(AllenRelation::from_name(r.name()), Some(r));
        }
        let set: RelationSet = [Before, MetBy, Equals].into_iter().collect();
        let json = serde_json::to_string(&set).unwrap();
        assert_eq!(json, r#"["before","met-by","equals"]"#);
        let back: RelationSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);
    }
}
