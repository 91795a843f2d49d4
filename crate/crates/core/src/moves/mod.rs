//! Gauss-level moves: R1, R2, R3, R8, W1, W2, W4 and the mirrors M, M_i.
//!
//! Pair moves address a pair of cyclically adjacent events by the position of
//! the first one; the second is the next position mod the component length.
//! Insertion moves address a gap: `index` means "insert before position
//! `index`", and `index == len` appends at the anchor end.

mod r3;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::canon::canonical_form;
use crate::diagram::{next, ChordId, Event, GaussDiagram, Pos, Role, Sign, WenId};

pub use r3::{locate_triangle, R3Pattern, Triangle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    R1Add,
    R1Del,
    R2Add,
    R2Del,
    R3,
    R8,
    W1,
    W2,
    W4Add,
    W4Del,
    Mirror,
    MirrorComponent,
}

impl MoveKind {
    pub const ALL: [MoveKind; 12] = [
        MoveKind::R1Add,
        MoveKind::R1Del,
        MoveKind::R2Add,
        MoveKind::R2Del,
        MoveKind::R3,
        MoveKind::R8,
        MoveKind::W1,
        MoveKind::W2,
        MoveKind::W4Add,
        MoveKind::W4Del,
        MoveKind::Mirror,
        MoveKind::MirrorComponent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::R1Add => "R1Add",
            MoveKind::R1Del => "R1Del",
            MoveKind::R2Add => "R2Add",
            MoveKind::R2Del => "R2Del",
            MoveKind::R3 => "R3",
            MoveKind::R8 => "R8",
            MoveKind::W1 => "W1",
            MoveKind::W2 => "W2",
            MoveKind::W4Add => "W4Add",
            MoveKind::W4Del => "W4Del",
            MoveKind::Mirror => "Mirror",
            MoveKind::MirrorComponent => "MirrorComponent",
        }
    }

    pub fn inverse(self) -> MoveKind {
        match self {
            MoveKind::R1Add => MoveKind::R1Del,
            MoveKind::R1Del => MoveKind::R1Add,
            MoveKind::R2Add => MoveKind::R2Del,
            MoveKind::R2Del => MoveKind::R2Add,
            MoveKind::W4Add => MoveKind::W4Del,
            MoveKind::W4Del => MoveKind::W4Add,
            k => k,
        }
    }

    pub fn is_w4(self) -> bool {
        matches!(self, MoveKind::W4Add | MoveKind::W4Del)
    }

    pub fn is_wen_move(self) -> bool {
        matches!(
            self,
            MoveKind::W1 | MoveKind::W2 | MoveKind::W4Add | MoveKind::W4Del
        )
    }

    pub fn is_reidemeister(self) -> bool {
        matches!(
            self,
            MoveKind::R1Add
                | MoveKind::R1Del
                | MoveKind::R2Add
                | MoveKind::R2Del
                | MoveKind::R3
                | MoveKind::R8
        )
    }

    pub fn is_mirror(self) -> bool {
        matches!(self, MoveKind::Mirror | MoveKind::MirrorComponent)
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MoveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MoveKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown move kind `{s}`"))
    }
}

/// A set of allowed move kinds.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MoveSet(BTreeSet<MoveKind>);

impl MoveSet {
    pub fn new(kinds: impl IntoIterator<Item = MoveKind>) -> Self {
        MoveSet(kinds.into_iter().collect())
    }

    /// R1, R2, R3 and R8 in both directions.
    pub fn reidemeister() -> Self {
        Self::new(MoveKind::ALL.into_iter().filter(|k| k.is_reidemeister()))
    }

    /// W1, W2 and W4 in both directions.
    pub fn wen() -> Self {
        Self::new(MoveKind::ALL.into_iter().filter(|k| k.is_wen_move()))
    }

    /// Every kind except the mirrors.
    pub fn extended_welded() -> Self {
        Self::reidemeister().union(&Self::wen())
    }

    pub fn all() -> Self {
        Self::new(MoveKind::ALL)
    }

    pub fn union(&self, other: &MoveSet) -> MoveSet {
        MoveSet(self.0.union(&other.0).copied().collect())
    }

    pub fn without(&self, kinds: &[MoveKind]) -> MoveSet {
        MoveSet(self.0.iter().copied().filter(|k| !kinds.contains(k)).collect())
    }

    pub fn contains(&self, k: MoveKind) -> bool {
        self.0.contains(&k)
    }

    pub fn iter(&self) -> impl Iterator<Item = MoveKind> + '_ {
        self.0.iter().copied()
    }

    /// Closed under `MoveKind::inverse`.
    pub fn is_inverse_closed(&self) -> bool {
        self.0.iter().all(|k| self.0.contains(&k.inverse()))
    }
}

impl FromStr for MoveSet {
    type Err = String;

    /// Comma-separated kinds. Also accepts `R1`, `R2`, `W4` for both
    /// directions, and the groups `reidemeister`, `wen`, `welded` (R and W
    /// kinds) and `all`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = MoveSet::default();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let add = match tok {
                "R1" => MoveSet::new([MoveKind::R1Add, MoveKind::R1Del]),
                "R2" => MoveSet::new([MoveKind::R2Add, MoveKind::R2Del]),
                "W4" => MoveSet::new([MoveKind::W4Add, MoveKind::W4Del]),
                "M" => MoveSet::new([MoveKind::Mirror]),
                "reidemeister" => MoveSet::reidemeister(),
                "wen" => MoveSet::wen(),
                "welded" => MoveSet::extended_welded(),
                "all" => MoveSet::all(),
                k => MoveSet::new([k.parse::<MoveKind>()?]),
            };
            out = out.union(&add);
        }
        Ok(out)
    }
}

/// One concrete application site of a move.
///
/// Variants are ordered like [`MoveKind`], so the derived `Ord` sorts by kind,
/// then component, positions, parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    /// Insert a kink chord at a gap, tail first unless `head_first`.
    R1Add { at: Pos, sign: Sign, head_first: bool },
    R1Del { at: Pos },
    /// Insert two chords `a` (signed `sign`) and `b` (opposite sign). Tails
    /// `Ta Tb` go into gap `tails`; heads go into gap `heads` as `Ha Hb` when
    /// `parallel`, else `Hb Ha`. Both gaps refer to the diagram before the
    /// move; when they are the same gap `heads_first` orders the two blocks.
    R2Add {
        tails: Pos,
        heads: Pos,
        sign: Sign,
        parallel: bool,
        heads_first: bool,
    },
    R2Del { tails: Pos, heads: Pos },
    /// The three pair starts, normally listed top (two tails), middle (head
    /// and tail), bottom (two heads); any order is accepted.
    R3 { top: Pos, middle: Pos, bottom: Pos },
    R8 { at: Pos },
    W1 { at: Pos },
    W2 { at: Pos },
    W4Add { at: Pos },
    W4Del { at: Pos },
    Mirror,
    MirrorComponent { component: usize },
}

impl Move {
    pub fn kind(&self) -> MoveKind {
        match self {
            Move::R1Add { .. } => MoveKind::R1Add,
            Move::R1Del { .. } => MoveKind::R1Del,
            Move::R2Add { .. } => MoveKind::R2Add,
            Move::R2Del { .. } => MoveKind::R2Del,
            Move::R3 { .. } => MoveKind::R3,
            Move::R8 { .. } => MoveKind::R8,
            Move::W1 { .. } => MoveKind::W1,
            Move::W2 { .. } => MoveKind::W2,
            Move::W4Add { .. } => MoveKind::W4Add,
            Move::W4Del { .. } => MoveKind::W4Del,
            Move::Mirror => MoveKind::Mirror,
            Move::MirrorComponent { .. } => MoveKind::MirrorComponent,
        }
    }

    /// Every position or gap the move addresses, for translation between
    /// rotated copies of a diagram.
    pub fn map_sites(&self, mut f: impl FnMut(Pos, bool) -> Pos) -> Move {
        // The flag tells `f` whether the site is a gap (true) or a position.
        match *self {
            Move::R1Add { at, sign, head_first } => Move::R1Add {
                at: f(at, true),
                sign,
                head_first,
            },
            Move::R1Del { at } => Move::R1Del { at: f(at, false) },
            Move::R2Add {
                tails,
                heads,
                sign,
                parallel,
                heads_first,
            } => Move::R2Add {
                tails: f(tails, true),
                heads: f(heads, true),
                sign,
                parallel,
                heads_first,
            },
            Move::R2Del { tails, heads } => Move::R2Del {
                tails: f(tails, false),
                heads: f(heads, false),
            },
            Move::R3 { top, middle, bottom } => Move::R3 {
                top: f(top, false),
                middle: f(middle, false),
                bottom: f(bottom, false),
            },
            Move::R8 { at } => Move::R8 { at: f(at, false) },
            Move::W1 { at } => Move::W1 { at: f(at, false) },
            Move::W2 { at } => Move::W2 { at: f(at, false) },
            Move::W4Add { at } => Move::W4Add { at: f(at, true) },
            Move::W4Del { at } => Move::W4Del { at: f(at, false) },
            m @ (Move::Mirror | Move::MirrorComponent { .. }) => m,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::codec::format_move(self))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("site out of range: {0}")]
    OutOfRange(String),
    #[error("site mismatch: {0}")]
    SiteMismatch(String),
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("inconsistent inversion: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("inapplicable: {0}")]
    Inapplicable(MoveError),
    #[error("result mismatch: expected {expected}, got {actual}")]
    ResultMismatch { expected: String, actual: String },
}

/// Caps on diagram size for moves that grow the diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeCaps {
    pub max_chords: usize,
    pub max_wens: usize,
}

impl SizeCaps {
    pub fn unbounded() -> Self {
        SizeCaps {
            max_chords: usize::MAX / 2,
            max_wens: usize::MAX / 2,
        }
    }

    /// Room for `extra` more chords and wens than `d` has.
    pub fn around(d: &GaussDiagram, extra: usize) -> Self {
        SizeCaps {
            max_chords: d.num_chords() + extra,
            max_wens: d.num_wens() + extra,
        }
    }
}

fn out_of_range(what: impl Into<String>) -> MoveError {
    MoveError::OutOfRange(what.into())
}

fn mismatch(what: impl Into<String>) -> MoveError {
    MoveError::SiteMismatch(what.into())
}

fn check_component(d: &GaussDiagram, c: usize) -> Result<(), MoveError> {
    if c < d.num_components() {
        Ok(())
    } else {
        Err(out_of_range(format!("component {} does not exist", c + 1)))
    }
}

/// The adjacent pair starting at `p`.
fn pair(d: &GaussDiagram, p: Pos) -> Result<(Pos, Pos), MoveError> {
    check_component(d, p.component)?;
    let n = d.len_of(p.component);
    if n < 2 || p.index >= n {
        return Err(out_of_range(format!(
            "no adjacent pair at c{} p{}",
            p.component + 1,
            p.index
        )));
    }
    Ok((p, Pos::new(p.component, next(p.index, n))))
}

fn check_gap(d: &GaussDiagram, g: Pos) -> Result<(), MoveError> {
    check_component(d, g.component)?;
    if g.index > d.len_of(g.component) {
        return Err(out_of_range(format!(
            "gap {} beyond component {} of length {}",
            g.index,
            g.component + 1,
            d.len_of(g.component)
        )));
    }
    Ok(())
}

/// Gap index reduced mod the component length, so `len` and `0` coincide.
pub(crate) fn normalize_gap(g: usize, len: usize) -> usize {
    if len == 0 {
        0
    } else {
        g % len
    }
}

fn ev(d: &GaussDiagram, p: Pos) -> Event {
    d.event(p).expect("position checked")
}

fn swap(d: &mut GaussDiagram, a: Pos, b: Pos) {
    d.components_mut()[a.component].swap(a.index, b.index);
}

fn remove_positions(d: &mut GaussDiagram, positions: &[Pos]) {
    let mut sorted = positions.to_vec();
    sorted.sort();
    for p in sorted.into_iter().rev() {
        d.components_mut()[p.component].remove(p.index);
    }
}

fn insert_block(d: &mut GaussDiagram, g: Pos, block: &[Event]) {
    let comp = &mut d.components_mut()[g.component];
    for (k, e) in block.iter().enumerate() {
        comp.insert(g.index + k, *e);
    }
}

/// Rewrites `d` by `m`; fails if the site does not match the move's pattern.
pub fn apply(d: &GaussDiagram, m: &Move) -> Result<GaussDiagram, MoveError> {
    let mut out = d.clone();
    match *m {
        Move::R1Add { at, sign, head_first } => {
            check_gap(d, at)?;
            let ch = d.fresh_chord_id();
            let (t, h) = (Event::End(ch, Role::Tail), Event::End(ch, Role::Head));
            let block = if head_first { [h, t] } else { [t, h] };
            insert_block(&mut out, at, &block);
            out.signs_mut().insert(ch, sign);
        }
        Move::R1Del { at } => {
            let (p, q) = pair(d, at)?;
            match (ev(d, p), ev(d, q)) {
                (Event::End(a, ra), Event::End(b, rb)) if a == b && ra != rb => {
                    remove_positions(&mut out, &[p, q]);
                    out.signs_mut().remove(&a);
                }
                _ => return Err(mismatch("R1Del needs the two ends of one chord")),
            }
        }
        Move::R2Add {
            tails,
            heads,
            sign,
            parallel,
            heads_first,
        } => {
            check_gap(d, tails)?;
            check_gap(d, heads)?;
            let a = d.fresh_chord_id();
            let b = ChordId(a.0 + 1);
            let tail_block = [Event::End(a, Role::Tail), Event::End(b, Role::Tail)];
            let head_block = if parallel {
                [Event::End(a, Role::Head), Event::End(b, Role::Head)]
            } else {
                [Event::End(b, Role::Head), Event::End(a, Role::Head)]
            };
            let same_gap = tails.component == heads.component && {
                let n = d.len_of(tails.component);
                normalize_gap(tails.index, n) == normalize_gap(heads.index, n)
            };
            if heads_first && !same_gap {
                return Err(MoveError::ParamMismatch(
                    "heads-first ordering only applies when both blocks share a gap".into(),
                ));
            }
            if same_gap {
                let mut block = Vec::with_capacity(4);
                if heads_first {
                    block.extend(head_block);
                    block.extend(tail_block);
                } else {
                    block.extend(tail_block);
                    block.extend(head_block);
                }
                insert_block(&mut out, tails, &block);
            } else if tails.component == heads.component && tails.index > heads.index {
                insert_block(&mut out, tails, &tail_block);
                insert_block(&mut out, heads, &head_block);
            } else {
                insert_block(&mut out, heads, &head_block);
                insert_block(&mut out, tails, &tail_block);
            }
            out.signs_mut().insert(a, sign);
            out.signs_mut().insert(b, -sign);
        }
        Move::R2Del { tails, heads } => {
            let (t1, t2) = pair(d, tails)?;
            let (h1, h2) = pair(d, heads)?;
            let (a, b) = match (ev(d, t1), ev(d, t2)) {
                (Event::End(a, Role::Tail), Event::End(b, Role::Tail)) => (a, b),
                _ => return Err(mismatch("R2Del tail pair must hold two tails")),
            };
            let (x, y) = match (ev(d, h1), ev(d, h2)) {
                (Event::End(x, Role::Head), Event::End(y, Role::Head)) => (x, y),
                _ => return Err(mismatch("R2Del head pair must hold two heads")),
            };
            if !((x == a && y == b) || (x == b && y == a)) {
                return Err(mismatch("R2Del head pair belongs to other chords"));
            }
            if d.sign(a) == d.sign(b) {
                return Err(mismatch("R2Del chords must have opposite signs"));
            }
            remove_positions(&mut out, &[t1, t2, h1, h2]);
            out.signs_mut().remove(&a);
            out.signs_mut().remove(&b);
        }
        Move::R3 { top, middle, bottom } => {
            let tri = locate_triangle(d, [top, middle, bottom])?;
            if !tri.pattern.is_enabled() {
                return Err(mismatch(format!(
                    "pattern {:?} is not an enabled R3 configuration",
                    tri.pattern
                )));
            }
            for s in [tri.top, tri.middle, tri.bottom] {
                let (p, q) = pair(d, s)?;
                swap(&mut out, p, q);
            }
        }
        Move::R8 { at } => {
            let (p, q) = pair(d, at)?;
            if !(ev(d, p).is_tail() && ev(d, q).is_tail()) {
                return Err(mismatch("R8 needs two adjacent tails"));
            }
            swap(&mut out, p, q);
        }
        Move::W1 { at } | Move::W2 { at } => {
            let (p, q) = pair(d, at)?;
            let (e, f) = (ev(d, p), ev(d, q));
            let end = match (e, f) {
                (Event::Wen(_), Event::End(c, r)) | (Event::End(c, r), Event::Wen(_)) => (c, r),
                _ => return Err(mismatch("wen move needs a wen next to a chord end")),
            };
            let is_w2 = matches!(m, Move::W2 { .. });
            match (is_w2, end.1) {
                (false, Role::Head) => {}
                (true, Role::Tail) => {
                    let s = out.signs_mut().get_mut(&end.0).unwrap();
                    *s = -*s;
                }
                (false, Role::Tail) => return Err(mismatch("W1 passes a head, found a tail")),
                (true, Role::Head) => return Err(mismatch("W2 passes a tail, found a head")),
            }
            swap(&mut out, p, q);
        }
        Move::W4Add { at } => {
            check_gap(d, at)?;
            let w = d.fresh_wen_id();
            insert_block(&mut out, at, &[Event::Wen(w), Event::Wen(WenId(w.0 + 1))]);
        }
        Move::W4Del { at } => {
            let (p, q) = pair(d, at)?;
            if !(ev(d, p).is_wen() && ev(d, q).is_wen()) {
                return Err(mismatch("W4Del needs two adjacent wens"));
            }
            remove_positions(&mut out, &[p, q]);
        }
        Move::Mirror => {
            if !d.link_type().all_even() {
                return Err(MoveError::Parity(
                    "Mirror needs an even wen count on every component".into(),
                ));
            }
            out = d.with_flipped(|_| true);
        }
        Move::MirrorComponent { component } => {
            check_component(d, component)?;
            if d.link_type().is_odd(component) {
                return Err(MoveError::Parity(format!(
                    "MirrorComponent needs an even wen count on component {}",
                    component + 1
                )));
            }
            out = mirror_component_unchecked(d, component);
        }
    }
    Ok(out)
}

/// Negates every chord whose tail lies on `component`.
pub(crate) fn mirror_component_unchecked(d: &GaussDiagram, component: usize) -> GaussDiagram {
    let on: BTreeSet<ChordId> = d.component(component)
        .iter()
        .filter_map(|e| match e {
            Event::End(c, Role::Tail) => Some(*c),
            _ => None,
        })
        .collect();
    d.with_flipped(|c| on.contains(&c))
}

/// `m` applies to `d` and lands on `d_next` up to canonical equality.
pub fn check_step(d: &GaussDiagram, m: &Move, d_next: &GaussDiagram) -> Result<(), StepError> {
    let got = apply(d, m).map_err(StepError::Inapplicable)?;
    let (expected, actual) = (canonical_form(d_next), canonical_form(&got));
    if expected == actual && got.num_components() == d_next.num_components() {
        Ok(())
    } else {
        Err(StepError::ResultMismatch { expected, actual })
    }
}

fn gaps(d: &GaussDiagram, c: usize) -> std::ops::Range<usize> {
    0..d.len_of(c).max(1)
}

/// Pair starts of a component, skipping the duplicate reading of a 2-cycle.
fn pair_starts(d: &GaussDiagram, c: usize) -> std::ops::Range<usize> {
    match d.len_of(c) {
        0 | 1 => 0..0,
        2 => 0..1,
        n => 0..n,
    }
}

/// Every applicable instance of every allowed kind, sorted.
pub fn enumerate(d: &GaussDiagram, allowed: &MoveSet, caps: SizeCaps) -> Vec<Move> {
    let mut out: BTreeSet<Move> = BTreeSet::new();
    let mu = d.num_components();
    let chords = d.num_chords();
    let wens = d.num_wens();
    let signs = [Sign::Positive, Sign::Negative];

    if allowed.contains(MoveKind::R1Add) && chords < caps.max_chords {
        for c in 0..mu {
            for g in gaps(d, c) {
                for sign in signs {
                    for head_first in [false, true] {
                        out.insert(Move::R1Add {
                            at: Pos::new(c, g),
                            sign,
                            head_first,
                        });
                    }
                }
            }
        }
    }
    if allowed.contains(MoveKind::R2Add) && chords + 2 <= caps.max_chords {
        for c1 in 0..mu {
            for g1 in gaps(d, c1) {
                for c2 in 0..mu {
                    for g2 in gaps(d, c2) {
                        let same = c1 == c2 && g1 == g2;
                        for sign in signs {
                            for parallel in [true, false] {
                                for heads_first in [false, true] {
                                    if heads_first && !same {
                                        continue;
                                    }
                                    out.insert(Move::R2Add {
                                        tails: Pos::new(c1, g1),
                                        heads: Pos::new(c2, g2),
                                        sign,
                                        parallel,
                                        heads_first,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if allowed.contains(MoveKind::W4Add) && wens + 2 <= caps.max_wens {
        for c in 0..mu {
            for g in gaps(d, c) {
                out.insert(Move::W4Add { at: Pos::new(c, g) });
            }
        }
    }

    for c in 0..mu {
        let n = d.len_of(c);
        for i in pair_starts(d, c) {
            let p = Pos::new(c, i);
            let (e, f) = (d.component(c)[i], d.component(c)[next(i, n)]);
            match (e, f) {
                (Event::End(a, ra), Event::End(b, rb)) if a == b && ra != rb => {
                    if allowed.contains(MoveKind::R1Del) {
                        out.insert(Move::R1Del { at: p });
                    }
                }
                (Event::End(a, Role::Tail), Event::End(b, Role::Tail)) => {
                    if allowed.contains(MoveKind::R8) {
                        out.insert(Move::R8 { at: p });
                    }
                    if allowed.contains(MoveKind::R2Del) && d.sign(a) != d.sign(b) {
                        let ha = d.locate(a, Role::Head).unwrap();
                        let hb = d.locate(b, Role::Head).unwrap();
                        if ha.component == hb.component {
                            let m = d.len_of(ha.component);
                            let start = if next(ha.index, m) == hb.index {
                                Some(ha)
                            } else if next(hb.index, m) == ha.index {
                                Some(hb)
                            } else {
                                None
                            };
                            if let Some(h) = start {
                                out.insert(Move::R2Del { tails: p, heads: h });
                            }
                        }
                    }
                }
                (Event::Wen(_), Event::Wen(_)) => {
                    if allowed.contains(MoveKind::W4Del) {
                        out.insert(Move::W4Del { at: p });
                    }
                }
                (Event::Wen(_), Event::End(_, r)) | (Event::End(_, r), Event::Wen(_)) => {
                    let kind = if r == Role::Head { MoveKind::W1 } else { MoveKind::W2 };
                    if allowed.contains(kind) {
                        out.insert(if kind == MoveKind::W1 {
                            Move::W1 { at: p }
                        } else {
                            Move::W2 { at: p }
                        });
                    }
                }
                _ => {}
            }
        }
    }

    if allowed.contains(MoveKind::R3) {
        for m in r3_sites(d) {
            if apply(d, &m).is_ok() {
                out.insert(m);
            }
        }
    }
    let ty = d.link_type();
    if allowed.contains(MoveKind::Mirror) && ty.all_even() {
        out.insert(Move::Mirror);
    }
    if allowed.contains(MoveKind::MirrorComponent) {
        for c in 0..mu {
            if !ty.is_odd(c) {
                out.insert(Move::MirrorComponent { component: c });
            }
        }
    }
    out.into_iter().collect()
}

/// Candidate R3 sites: every triangle of adjacent pairs, every reading.
fn r3_sites(d: &GaussDiagram) -> Vec<Move> {
    let mut out = Vec::new();
    // Pairs with both readings, so that 2-cycles are read both ways.
    let readings = |c: usize| -> Vec<usize> {
        match d.len_of(c) {
            0 | 1 => vec![],
            n => (0..n).collect(),
        }
    };
    let adjacent_starts = |x: Pos| -> Vec<Pos> {
        let n = d.len_of(x.component);
        if n < 2 {
            return vec![];
        }
        let mut v = vec![Pos::new(x.component, (x.index + n - 1) % n), x];
        v.dedup();
        v
    };
    for c in 0..d.num_components() {
        let n = d.len_of(c);
        for i in readings(c) {
            let (e, f) = (d.component(c)[i], d.component(c)[next(i, n)]);
            let (Event::End(a, Role::Tail), Event::End(b, Role::Tail)) = (e, f) else {
                continue;
            };
            let top = Pos::new(c, i);
            for (c1, c2) in [(a, b), (b, a)] {
                let h1 = d.locate(c1, Role::Head).unwrap();
                let h2 = d.locate(c2, Role::Head).unwrap();
                for mid in adjacent_starts(h1) {
                    let m = d.len_of(mid.component);
                    let other = if mid == h1 {
                        Pos::new(mid.component, next(mid.index, m))
                    } else {
                        mid
                    };
                    let Event::End(c3, Role::Tail) = ev(d, other) else {
                        continue;
                    };
                    if c3 == a || c3 == b {
                        continue;
                    }
                    let h3 = d.locate(c3, Role::Head).unwrap();
                    if h3.component != h2.component {
                        continue;
                    }
                    let k = d.len_of(h2.component);
                    for bottom in [h2, h3] {
                        let partner = if bottom == h2 { h3 } else { h2 };
                        if next(bottom.index, k) == partner.index {
                            out.push(Move::R3 { top, middle: mid, bottom });
                        }
                    }
                }
            }
        }
    }
    out
}

/// A move undoing `m`, checked against the two diagrams.
pub fn invert(m: &Move, before: &GaussDiagram, after: &GaussDiagram) -> Result<Move, MoveError> {
    check_step(before, m, after).map_err(|e| MoveError::Inconsistent(e.to_string()))?;
    let candidate = direct_inverse(m, before, after);
    if let Some(c) = candidate {
        if check_step(after, &c, before).is_ok() {
            return Ok(c);
        }
    }
    // Fall back on scanning every instance of the inverse kind.
    let caps = SizeCaps::around(after, 2);
    enumerate(after, &MoveSet::new([m.kind().inverse()]), caps)
        .into_iter()
        .find(|c| check_step(after, c, before).is_ok())
        .ok_or_else(|| MoveError::Inconsistent(format!("no inverse found for {m}")))
}

fn direct_inverse(m: &Move, before: &GaussDiagram, after: &GaussDiagram) -> Option<Move> {
    // Gap left behind when removing the pair starting at `p`.
    let gap_after_removal = |p: Pos, removed: &[Pos]| -> Pos {
        let n = before.len_of(p.component);
        let survivors_before = |limit: usize| {
            (0..limit)
                .filter(|&i| !removed.contains(&Pos::new(p.component, i)))
                .count()
        };
        if next(p.index, n) == 0 {
            Pos::new(p.component, survivors_before(n))
        } else {
            Pos::new(p.component, survivors_before(p.index))
        }
    };
    Some(match *m {
        Move::R1Add { at, .. } => Move::R1Del { at },
        Move::W4Add { at } => Move::W4Del { at },
        Move::R1Del { at } => {
            let (p, q) = pair(before, at).ok()?;
            let sign = before.sign(ev(before, p).chord()?);
            Move::R1Add {
                at: gap_after_removal(p, &[p, q]),
                sign,
                head_first: ev(before, p).is_head(),
            }
        }
        Move::W4Del { at } => {
            let (p, q) = pair(before, at).ok()?;
            Move::W4Add {
                at: gap_after_removal(p, &[p, q]),
            }
        }
        Move::R2Add { parallel, .. } => {
            let a = before.fresh_chord_id();
            let b = ChordId(a.0 + 1);
            let tails = after.locate(a, Role::Tail)?;
            let heads = after.locate(if parallel { a } else { b }, Role::Head)?;
            Move::R2Del { tails, heads }
        }
        Move::R2Del { tails, heads } => {
            let (t1, t2) = pair(before, tails).ok()?;
            let (h1, h2) = pair(before, heads).ok()?;
            let removed = [t1, t2, h1, h2];
            let gt = gap_after_removal(t1, &removed);
            let gh = gap_after_removal(h1, &removed);
            let first = ev(before, t1).chord()?;
            let parallel = ev(before, h1).chord()? == first;
            let same_gap = gt.component == gh.component && {
                let len = after.len_of(gt.component);
                normalize_gap(gt.index, len) == normalize_gap(gh.index, len)
            };
            let heads_first = same_gap && h1.component == t2.component && {
                let n = before.len_of(t2.component);
                next(t2.index, n) != h1.index
            };
            Move::R2Add {
                tails: gt,
                heads: gh,
                sign: before.sign(first),
                parallel,
                heads_first,
            }
        }
        other => other,
    })
}

/// Signed-chord multiset: (sign, tail component, head component) counts.
pub fn signed_chord_multiset(d: &GaussDiagram) -> BTreeMap<(Sign, usize, usize), usize> {
    let mut out = BTreeMap::new();
    for (_, (t, h, s)) in d.chords() {
        *out.entry((s, t.component, h.component)).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{parse, serialize};

    fn p(c: usize, i: usize) -> Pos {
        Pos::new(c, i)
    }

    fn run(code: &str, m: Move) -> String {
        serialize(&apply(&parse(code).unwrap(), &m).unwrap())
    }

    #[test]
    fn r8_swaps_adjacent_tails() {
        assert_eq!(
            run("O1+ O2+ U1+ U2+", Move::R8 { at: p(0, 0) }),
            "O1+ O2+ U2+ U1+"
        );
        // Same diagram as "O2+ O1+ U1+ U2+" after renumbering by first encounter.
        let d = apply(&parse("O1+ O2+ U1+ U2+").unwrap(), &Move::R8 { at: p(0, 0) }).unwrap();
        assert!(crate::canon::canonically_equal(
            &d,
            &parse("O2+ O1+ U1+ U2+").unwrap()
        ));
    }

    #[test]
    fn w2_negates_the_passed_chord() {
        let d = apply(&parse("w O1+ U1+").unwrap(), &Move::W2 { at: p(0, 0) }).unwrap();
        assert_eq!(serialize(&d), "O1- w U1-");
    }

    #[test]
    fn w1_keeps_the_sign() {
        assert_eq!(run("w U1+ O1+", Move::W1 { at: p(0, 0) }), "U1+ w O1+");
    }

    #[test]
    fn r1_del_removes_a_kink() {
        assert_eq!(run("O1+ U1+ O2- U2-", Move::R1Del { at: p(0, 0) }), "O1- U1-");
    }

    #[test]
    fn mirror_negates_everything() {
        assert_eq!(run("O1+ U1+", Move::Mirror), "O1- U1-");
    }

    #[test]
    fn mirror_needs_even_wens() {
        let d = parse("w O1+ U1+").unwrap();
        assert!(matches!(apply(&d, &Move::Mirror), Err(MoveError::Parity(_))));
        assert!(matches!(
            apply(&d, &Move::MirrorComponent { component: 0 }),
            Err(MoveError::Parity(_))
        ));
    }

    #[test]
    fn wrong_wen_move_kind_is_rejected() {
        let d = parse("w U1+ O1+").unwrap();
        assert!(matches!(
            apply(&d, &Move::W2 { at: p(0, 0) }),
            Err(MoveError::SiteMismatch(_))
        ));
    }

    #[test]
    fn r2_round_trip_in_one_gap() {
        let d = GaussDiagram::unknot(1);
        let m = Move::R2Add {
            tails: p(0, 0),
            heads: p(0, 0),
            sign: Sign::Positive,
            parallel: true,
            heads_first: false,
        };
        let e = apply(&d, &m).unwrap();
        assert_eq!(serialize(&e), "O1+ O2- U1+ U2-");
        let back = invert(&m, &d, &e).unwrap();
        assert_eq!(back, Move::R2Del { tails: p(0, 0), heads: p(0, 2) });
        assert_eq!(serialize(&apply(&e, &back).unwrap()), "-");
    }

    #[test]
    fn r2_across_components() {
        let d = parse("- / -").unwrap();
        let m = Move::R2Add {
            tails: p(0, 0),
            heads: p(1, 0),
            sign: Sign::Negative,
            parallel: false,
            heads_first: false,
        };
        let e = apply(&d, &m).unwrap();
        assert_eq!(serialize(&e), "O1- O2+ / U2+ U1-");
        let back = invert(&m, &d, &e).unwrap();
        assert!(matches!(back, Move::R2Del { .. }));
    }

    #[test]
    fn r2_del_rejects_equal_signs() {
        let d = parse("O1+ O2+ U1+ U2+").unwrap();
        let m = Move::R2Del { tails: p(0, 0), heads: p(0, 2) };
        assert!(apply(&d, &m).is_err());
    }

    #[test]
    fn r3_on_the_braid_pattern() {
        // Top pair (T1 T2), middle (H1 T3), bottom (H2 H3), all positive.
        let d = parse("O1+ O2+ / U1+ O3+ / U2+ U3+").unwrap();
        let m = Move::R3 { top: p(0, 0), middle: p(1, 0), bottom: p(2, 0) };
        let e = apply(&d, &m).unwrap();
        assert!(crate::canon::canonically_equal(
            &e,
            &parse("O2+ O1+ / O3+ U1+ / U3+ U2+").unwrap()
        ));
        assert_eq!(invert(&m, &d, &e).unwrap(), m);
        // Flipping chord 3 alone leaves the classical configurations.
        let bad = parse("O1+ O2+ / U1+ O3- / U2+ U3-").unwrap();
        assert!(apply(&bad, &m).is_err());
    }

    #[test]
    fn enumerate_small_cases() {
        let d = parse("O1+ U1+").unwrap();
        let ms = enumerate(&d, &MoveSet::new([MoveKind::R1Del]), SizeCaps::unbounded());
        assert_eq!(ms, vec![Move::R1Del { at: p(0, 0) }]);
        let e = GaussDiagram::unknot(1);
        let ms = enumerate(&e, &MoveSet::new([MoveKind::W4Add]), SizeCaps::unbounded());
        assert_eq!(ms, vec![Move::W4Add { at: p(0, 0) }]);
        let braid = parse("O1+ O2+ w / U1+ O3+ w / U2+ U3+ w").unwrap();
        let ms = enumerate(&braid, &MoveSet::new([MoveKind::R3]), SizeCaps::unbounded());
        assert_eq!(
            ms,
            vec![Move::R3 { top: p(0, 0), middle: p(1, 0), bottom: p(2, 0) }]
        );
        // On 2-cycles both readings of each pair are listed.
        let tight = parse("O1+ O2+ / U1+ O3+ / U2+ U3+").unwrap();
        let ms = enumerate(&tight, &MoveSet::new([MoveKind::R3]), SizeCaps::unbounded());
        assert_eq!(ms.len(), 2);
    }

    #[test]
    fn enumerate_respects_caps() {
        let d = parse("O1+ U1+").unwrap();
        let caps = SizeCaps { max_chords: 2, max_wens: 1 };
        let ms = enumerate(&d, &MoveSet::all(), caps);
        assert!(ms.iter().any(|m| m.kind() == MoveKind::R1Add));
        assert!(!ms.iter().any(|m| matches!(m.kind(), MoveKind::R2Add | MoveKind::W4Add)));
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn check_step_distinguishes_failures() {
        let d = parse("O1+ O2+ U1+ U2+").unwrap();
        let m = Move::R8 { at: p(0, 0) };
        let good = apply(&d, &m).unwrap();
        assert!(check_step(&d, &m, &good).is_ok());
        let wrong = parse("O1+ O2- U2- U1+").unwrap();
        assert!(matches!(
            check_step(&d, &m, &wrong),
            Err(StepError::ResultMismatch { .. })
        ));
        let w = parse("w U1+ O1+").unwrap();
        assert!(matches!(
            check_step(&w, &Move::W2 { at: p(0, 0) }, &w),
            Err(StepError::Inapplicable(_))
        ));
    }

    #[test]
    fn inverse_of_wrapping_deletions() {
        let d = parse("U1+ O2+ U2+ O1+").unwrap();
        let m = Move::R1Del { at: p(0, 3) };
        let e = apply(&d, &m).unwrap();
        let inv = invert(&m, &d, &e).unwrap();
        assert!(crate::canon::canonically_equal(&apply(&e, &inv).unwrap(), &d));
        let d = parse("w O1+ U1+ w").unwrap();
        let m = Move::W4Del { at: p(0, 3) };
        let e = apply(&d, &m).unwrap();
        let inv = invert(&m, &d, &e).unwrap();
        assert!(crate::canon::canonically_equal(&apply(&e, &inv).unwrap(), &d));
    }

    #[test]
    fn moveset_parsing() {
        let s: MoveSet = "R1,R8,W4".parse().unwrap();
        assert!(s.contains(MoveKind::R1Add) && s.contains(MoveKind::W4Del));
        assert!(s.is_inverse_closed());
        assert!("R9".parse::<MoveSet>().is_err());
        assert!(!MoveSet::new([MoveKind::R1Add]).is_inverse_closed());
    }
}
