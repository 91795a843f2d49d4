//! Gauss diagrams with wens.
//!
//! A diagram is an ordered list of oriented circles. Each circle carries a
//! cyclic sequence of events: chord endpoints and wens. Every chord runs from
//! its tail (the over-crossing) to its head (the under-crossing) and carries a
//! crossing sign. The two ends of a chord may sit on different circles.
//!
//! Cyclic sequences are stored with an arbitrary linear anchor. Positions are
//! 0-based indices into that stored order; components are 0-based in the API
//! and 1-based in every text format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Neg;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flipped_if(self, flip: bool) -> Sign {
        if flip {
            -self
        } else {
            self
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChordId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WenId(pub u32);

impl fmt::Display for ChordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for WenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which end of a chord an event is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// Initial endpoint, the over-crossing.
    Tail,
    /// Terminal endpoint, the under-crossing.
    Head,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    Wen(WenId),
    End(ChordId, Role),
}

impl Event {
    pub fn is_wen(&self) -> bool {
        matches!(self, Event::Wen(_))
    }

    pub fn is_tail(&self) -> bool {
        matches!(self, Event::End(_, Role::Tail))
    }

    pub fn is_head(&self) -> bool {
        matches!(self, Event::End(_, Role::Head))
    }

    pub fn chord(&self) -> Option<ChordId> {
        match *self {
            Event::End(c, _) => Some(c),
            Event::Wen(_) => None,
        }
    }
}

/// A (component, position) address in the stored linear order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub component: usize,
    pub index: usize,
}

impl Pos {
    pub fn new(component: usize, index: usize) -> Self {
        Pos { component, index }
    }
}

/// Parity vector of a link: entry `i` is the wen count of component `i` mod 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkType(pub Vec<u8>);

impl LinkType {
    pub fn deltas(&self) -> &[u8] {
        &self.0
    }

    pub fn is_odd(&self, component: usize) -> bool {
        self.0[component] == 1
    }

    pub fn all_even(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }
}

impl fmt::Display for LinkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A broken well-formedness invariant, with the coordinates where it was seen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoComponents,
    DuplicateRole { chord: ChordId, role: Role, at: Pos },
    MissingRole { chord: ChordId, role: Role },
    DuplicateWen { wen: WenId, at: Pos },
    OrphanChord { chord: ChordId },
    UnsignedChord { chord: ChordId, at: Pos },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = |p: &Pos| format!("component {}, position {}", p.component + 1, p.index);
        match self {
            Violation::NoComponents => write!(f, "no components"),
            Violation::DuplicateRole { chord, role, at: p } => {
                write!(f, "duplicate role: chord {chord} has a second {role:?} at {}", at(p))
            }
            Violation::MissingRole { chord, role } => {
                write!(f, "missing role: chord {chord} has no {role:?}")
            }
            Violation::DuplicateWen { wen, at: p } => {
                write!(f, "duplicate wen: wen {wen} repeated at {}", at(p))
            }
            Violation::OrphanChord { chord } => {
                write!(f, "orphan chord: chord {chord} has a sign but no endpoints")
            }
            Violation::UnsignedChord { chord, at: p } => {
                write!(f, "unsigned chord: chord {chord} at {} has no sign", at(p))
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("invalid diagram: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("component {0} out of range (diagram has {1})")]
    ComponentOutOfRange(usize, usize),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussDiagram {
    components: Vec<Vec<Event>>,
    signs: BTreeMap<ChordId, Sign>,
}

impl GaussDiagram {
    /// Builds a diagram, rejecting anything that fails [`GaussDiagram::validate`].
    pub fn new(
        components: Vec<Vec<Event>>,
        signs: BTreeMap<ChordId, Sign>,
    ) -> Result<Self, DiagramError> {
        let d = Self::from_parts_unchecked(components, signs);
        match d.validate() {
            Ok(()) => Ok(d),
            Err(v) => Err(DiagramError::Invalid(v)),
        }
    }

    /// Builds without checking. Used by the text parser's lenient mode so that
    /// `validate` can report every violation at once.
    pub fn from_parts_unchecked(
        components: Vec<Vec<Event>>,
        signs: BTreeMap<ChordId, Sign>,
    ) -> Self {
        GaussDiagram { components, signs }
    }

    /// The diagram with `mu` empty circles.
    pub fn unknot(mu: usize) -> Self {
        GaussDiagram {
            components: vec![Vec::new(); mu.max(1)],
            signs: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.components.is_empty() {
            out.push(Violation::NoComponents);
        }
        let mut tails: BTreeMap<ChordId, Pos> = BTreeMap::new();
        let mut heads: BTreeMap<ChordId, Pos> = BTreeMap::new();
        let mut wens: BTreeSet<WenId> = BTreeSet::new();
        let mut seen_chords: BTreeSet<ChordId> = BTreeSet::new();
        for (c, comp) in self.components.iter().enumerate() {
            for (i, ev) in comp.iter().enumerate() {
                let at = Pos::new(c, i);
                match *ev {
                    Event::Wen(w) => {
                        if !wens.insert(w) {
                            out.push(Violation::DuplicateWen { wen: w, at });
                        }
                    }
                    Event::End(ch, role) => {
                        let table = match role {
                            Role::Tail => &mut tails,
                            Role::Head => &mut heads,
                        };
                        if table.insert(ch, at).is_some() {
                            out.push(Violation::DuplicateRole { chord: ch, role, at });
                        }
                        if seen_chords.insert(ch) && !self.signs.contains_key(&ch) {
                            out.push(Violation::UnsignedChord { chord: ch, at });
                        }
                    }
                }
            }
        }
        for &ch in &seen_chords {
            if !tails.contains_key(&ch) {
                out.push(Violation::MissingRole { chord: ch, role: Role::Tail });
            }
            if !heads.contains_key(&ch) {
                out.push(Violation::MissingRole { chord: ch, role: Role::Head });
            }
        }
        for ch in self.signs.keys() {
            if !seen_chords.contains(ch) {
                out.push(Violation::OrphanChord { chord: *ch });
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn components(&self) -> &[Vec<Event>] {
        &self.components
    }

    pub fn component(&self, c: usize) -> &[Event] {
        &self.components[c]
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn len_of(&self, c: usize) -> usize {
        self.components[c].len()
    }

    pub fn event(&self, p: Pos) -> Option<Event> {
        self.components.get(p.component)?.get(p.index).copied()
    }

    pub fn signs(&self) -> &BTreeMap<ChordId, Sign> {
        &self.signs
    }

    pub fn sign(&self, chord: ChordId) -> Sign {
        self.signs[&chord]
    }

    pub fn num_chords(&self) -> usize {
        self.signs.len()
    }

    pub fn num_wens(&self) -> usize {
        self.components
            .iter()
            .flatten()
            .filter(|e| e.is_wen())
            .count()
    }

    pub fn check_component(&self, c: usize) -> Result<(), DiagramError> {
        if c < self.components.len() {
            Ok(())
        } else {
            Err(DiagramError::ComponentOutOfRange(c, self.components.len()))
        }
    }

    pub fn wen_count(&self, c: usize) -> Result<usize, DiagramError> {
        self.check_component(c)?;
        Ok(self.components[c].iter().filter(|e| e.is_wen()).count())
    }

    pub fn link_type(&self) -> LinkType {
        LinkType(
            self.components
                .iter()
                .map(|comp| (comp.iter().filter(|e| e.is_wen()).count() % 2) as u8)
                .collect(),
        )
    }

    /// Where the given end of a chord sits.
    pub fn locate(&self, chord: ChordId, role: Role) -> Option<Pos> {
        self.locate_event(Event::End(chord, role))
    }

    pub fn locate_wen(&self, wen: WenId) -> Option<Pos> {
        self.locate_event(Event::Wen(wen))
    }

    fn locate_event(&self, target: Event) -> Option<Pos> {
        self.components.iter().enumerate().find_map(|(c, comp)| {
            comp.iter()
                .position(|e| *e == target)
                .map(|i| Pos::new(c, i))
        })
    }

    /// Wen ids of a component in stored order.
    pub fn wens_on(&self, c: usize) -> Vec<WenId> {
        self.components[c]
            .iter()
            .filter_map(|e| match e {
                Event::Wen(w) => Some(*w),
                _ => None,
            })
            .collect()
    }

    pub fn fresh_chord_id(&self) -> ChordId {
        ChordId(self.signs.keys().next_back().map_or(1, |c| c.0 + 1))
    }

    pub fn fresh_wen_id(&self) -> WenId {
        let max = self
            .components
            .iter()
            .flatten()
            .filter_map(|e| match e {
                Event::Wen(w) => Some(w.0),
                _ => None,
            })
            .max();
        WenId(max.map_or(1, |m| m + 1))
    }

    /// Signed chords as (tail position, head position, sign) keyed by chord id.
    pub fn chords(&self) -> BTreeMap<ChordId, (Pos, Pos, Sign)> {
        self.signs
            .iter()
            .map(|(&ch, &s)| {
                let t = self.locate(ch, Role::Tail).expect("validated diagram");
                let h = self.locate(ch, Role::Head).expect("validated diagram");
                (ch, (t, h, s))
            })
            .collect()
    }

    pub(crate) fn components_mut(&mut self) -> &mut Vec<Vec<Event>> {
        &mut self.components
    }

    pub(crate) fn signs_mut(&mut self) -> &mut BTreeMap<ChordId, Sign> {
        &mut self.signs
    }

    /// Same events, every sign for which `flip` holds negated.
    pub(crate) fn with_flipped(&self, mut flip: impl FnMut(ChordId) -> bool) -> GaussDiagram {
        let mut out = self.clone();
        for (ch, s) in out.signs.iter_mut() {
            if flip(*ch) {
                *s = -*s;
            }
        }
        out
    }
}

/// Index of the element after `i` on a cycle of length `n`.
pub(crate) fn next(i: usize, n: usize) -> usize {
    (i + 1) % n
}

/// Index of the element before `i` on a cycle of length `n`.
pub(crate) fn prev(i: usize, n: usize) -> usize {
    (i + n - 1) % n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chord(c: u32, r: Role) -> Event {
        Event::End(ChordId(c), r)
    }

    fn signs(pairs: &[(u32, Sign)]) -> BTreeMap<ChordId, Sign> {
        pairs.iter().map(|&(c, s)| (ChordId(c), s)).collect()
    }

    #[test]
    fn single_chord_is_valid() {
        let d = GaussDiagram::new(
            vec![vec![chord(1, Role::Tail), chord(1, Role::Head)]],
            signs(&[(1, Sign::Positive)]),
        );
        assert!(d.is_ok());
    }

    #[test]
    fn duplicate_tail_is_reported() {
        let d = GaussDiagram::from_parts_unchecked(
            vec![vec![chord(1, Role::Tail), chord(1, Role::Tail)]],
            signs(&[(1, Sign::Positive)]),
        );
        let v = d.validate().unwrap_err();
        assert!(v.iter().any(|x| matches!(x, Violation::DuplicateRole { .. })));
        assert!(v.iter().any(|x| x.to_string().starts_with("duplicate role")));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::MissingRole { role: Role::Head, .. })));
    }

    #[test]
    fn orphan_chord_is_reported() {
        let d = GaussDiagram::from_parts_unchecked(
            vec![vec![]],
            signs(&[(4, Sign::Negative)]),
        );
        let v = d.validate().unwrap_err();
        assert_eq!(v, vec![Violation::OrphanChord { chord: ChordId(4) }]);
        assert!(v[0].to_string().starts_with("orphan chord"));
    }

    #[test]
    fn no_components_is_invalid() {
        let d = GaussDiagram::from_parts_unchecked(vec![], BTreeMap::new());
        assert_eq!(d.validate().unwrap_err(), vec![Violation::NoComponents]);
    }

    #[test]
    fn duplicate_wen_is_reported() {
        let d = GaussDiagram::from_parts_unchecked(
            vec![vec![Event::Wen(WenId(1)), Event::Wen(WenId(1))]],
            BTreeMap::new(),
        );
        assert!(matches!(
            d.validate().unwrap_err()[0],
            Violation::DuplicateWen { .. }
        ));
    }

    #[test]
    fn wen_counts_and_type() {
        let w = |i| Event::Wen(WenId(i));
        let d = GaussDiagram::new(
            vec![
                vec![w(1), chord(1, Role::Tail), chord(1, Role::Head)],
                vec![w(2), w(3)],
            ],
            signs(&[(1, Sign::Positive)]),
        )
        .unwrap();
        assert_eq!(d.wen_count(0).unwrap(), 1);
        assert_eq!(d.wen_count(1).unwrap(), 2);
        assert!(d.wen_count(2).is_err());
        assert_eq!(d.link_type(), LinkType(vec![1, 0]));
        assert_eq!(GaussDiagram::unknot(1).wen_count(0).unwrap(), 0);
    }

    #[test]
    fn sign_negation_is_an_involution() {
        for s in [Sign::Positive, Sign::Negative] {
            assert_eq!(-(-s), s);
            assert_ne!(-s, s);
        }
    }
}
