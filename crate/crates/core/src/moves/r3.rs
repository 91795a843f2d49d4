//! Third Reidemeister move at the Gauss level.
//!
//! Three chords form a triangle: chord 1 runs from the top strand to the
//! middle strand, chord 2 from top to bottom, chord 3 from middle to bottom.
//! Their six endpoints sit in three adjacent pairs, (T1, T2) on the top
//! strand, (H1, T3) on the middle strand and (H2, H3) on the bottom strand.
//! The move transposes each pair. Whether a configuration is a genuine
//! (classical) R3 depends on the reading order of each pair and the signs.

use crate::diagram::{next, ChordId, Event, GaussDiagram, Pos, Role, Sign};

use super::MoveError;

/// Reading orders of the three pairs plus the three signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct R3Pattern {
    /// T1 precedes T2 on the top pair.
    pub t1_first: bool,
    /// H1 precedes T3 on the middle pair.
    pub h1_first: bool,
    /// H2 precedes H3 on the bottom pair.
    pub h2_first: bool,
    pub signs: [Sign; 3],
}

const P: Sign = Sign::Positive;
const N: Sign = Sign::Negative;

/// Every oriented classical R3 configuration (both sides of all eight oriented
/// moves), obtained from three oriented lines in general position by sliding
/// one line across the crossing of the other two.
const ORIENTED: [(bool, bool, bool, [Sign; 3]); 16] = [
    (false, false, false, [N, N, N]),
    (false, false, false, [P, P, P]),
    (false, false, true, [N, P, P]),
    (false, false, true, [P, N, N]),
    (false, true, false, [N, P, N]),
    (false, true, false, [P, N, P]),
    (false, true, true, [N, N, P]),
    (false, true, true, [P, P, N]),
    (true, false, false, [N, N, P]),
    (true, false, false, [P, P, N]),
    (true, false, true, [N, P, N]),
    (true, false, true, [P, N, P]),
    (true, true, false, [N, P, P]),
    (true, true, false, [P, N, N]),
    (true, true, true, [N, N, N]),
    (true, true, true, [P, P, P]),
];

impl R3Pattern {
    pub fn all_oriented() -> impl Iterator<Item = R3Pattern> {
        ORIENTED.iter().map(|&(t1_first, h1_first, h2_first, signs)| R3Pattern {
            t1_first,
            h1_first,
            h2_first,
            signs,
        })
    }

    /// A classical configuration, whatever table is enabled.
    pub fn is_oriented_r3(&self) -> bool {
        Self::all_oriented().any(|p| p == *self)
    }

    /// The braid-like family: the all-positive pattern with T1 T2 adjacent,
    /// its local mirror, both sides of each, and the conjugates by an R8 on
    /// the top pair. These are the patterns whose middle and bottom pairs are
    /// read in the same order.
    pub fn is_base(&self) -> bool {
        self.is_oriented_r3() && self.h1_first == self.h2_first
    }

    /// Whether `apply` accepts this pattern under the compiled feature set.
    pub fn is_enabled(&self) -> bool {
        if cfg!(feature = "extended-r3") {
            self.is_oriented_r3()
        } else {
            self.is_base()
        }
    }

    /// The pattern seen after the move: every pair transposed.
    pub fn transposed(&self) -> R3Pattern {
        R3Pattern {
            t1_first: !self.t1_first,
            h1_first: !self.h1_first,
            h2_first: !self.h2_first,
            signs: self.signs,
        }
    }

    pub fn mirrored(&self) -> R3Pattern {
        R3Pattern {
            signs: self.signs.map(|s| -s),
            ..*self
        }
    }
}

/// A located triangle: the three pair starts and the chord labels 1, 2, 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    pub top: Pos,
    pub middle: Pos,
    pub bottom: Pos,
    pub chords: [ChordId; 3],
    pub pattern: R3Pattern,
}

fn pair(d: &GaussDiagram, p: Pos) -> Result<(Event, Event, Pos), MoveError> {
    if p.component >= d.num_components() {
        return Err(MoveError::OutOfRange(format!(
            "component {} does not exist",
            p.component + 1
        )));
    }
    let n = d.len_of(p.component);
    if n < 2 || p.index >= n {
        return Err(MoveError::OutOfRange(format!(
            "no adjacent pair at c{} p{}",
            p.component + 1,
            p.index
        )));
    }
    let q = Pos::new(p.component, next(p.index, n));
    Ok((d.event(p).unwrap(), d.event(q).unwrap(), q))
}

/// Identifies the strand roles of three adjacent pairs given in any order.
pub fn locate_triangle(d: &GaussDiagram, starts: [Pos; 3]) -> Result<Triangle, MoveError> {
    let mut top = None;
    let mut middle = None;
    let mut bottom = None;
    let mut seen = Vec::new();
    for s in starts {
        let (a, b, q) = pair(d, s)?;
        if seen.contains(&s) || seen.contains(&q) {
            return Err(MoveError::SiteMismatch("R3 pairs overlap".into()));
        }
        seen.push(s);
        seen.push(q);
        let slot = match (a, b) {
            (Event::End(_, Role::Tail), Event::End(_, Role::Tail)) => &mut top,
            (Event::End(_, Role::Head), Event::End(_, Role::Head)) => &mut bottom,
            (Event::End(_, _), Event::End(_, _)) => &mut middle,
            _ => return Err(MoveError::SiteMismatch("R3 pair contains a wen".into())),
        };
        if slot.is_some() {
            return Err(MoveError::SiteMismatch(
                "R3 needs one tail pair, one mixed pair and one head pair".into(),
            ));
        }
        *slot = Some((s, a, b));
    }
    let (Some(top), Some(middle), Some(bottom)) = (top, middle, bottom) else {
        return Err(MoveError::SiteMismatch(
            "R3 needs one tail pair, one mixed pair and one head pair".into(),
        ));
    };
    let chord = |e: Event| e.chord().unwrap();
    let (ta, tb) = (chord(top.1), chord(top.2));
    let (h1_ev, t3_ev, h1_first) = if middle.1.is_head() {
        (middle.1, middle.2, true)
    } else {
        (middle.2, middle.1, false)
    };
    let c1 = chord(h1_ev);
    let c3 = chord(t3_ev);
    let c2 = if c1 == ta {
        tb
    } else if c1 == tb {
        ta
    } else {
        return Err(MoveError::SiteMismatch(
            "middle head does not belong to a top chord".into(),
        ));
    };
    if c3 == ta || c3 == tb || ta == tb {
        return Err(MoveError::SiteMismatch("R3 chords are not distinct".into()));
    }
    let (b1, b2) = (chord(bottom.1), chord(bottom.2));
    let h2_first = if (b1, b2) == (c2, c3) {
        true
    } else if (b1, b2) == (c3, c2) {
        false
    } else {
        return Err(MoveError::SiteMismatch(
            "bottom pair does not hold the heads of chords 2 and 3".into(),
        ));
    };
    let pattern = R3Pattern {
        t1_first: ta == c1,
        h1_first,
        h2_first,
        signs: [d.sign(c1), d.sign(c2), d.sign(c3)],
    };
    Ok(Triangle {
        top: top.0,
        middle: middle.0,
        bottom: bottom.0,
        chords: [c1, c2, c3],
        pattern,
    })
}
