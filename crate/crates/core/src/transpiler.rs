//! Trace transpilers: wen slides, mirrors realized by wens, transport of a
//! single move through a wen reduction, and elimination of W4 (odd
//! components) or of all wens (even components) from a whole trace.
//!
//! Everything here goes through one engine. Each component carries a
//! [`ComponentState`]: an anchor wen on odd components, a phase bit on even
//! ones. For every input step the engine picks anchors, bridges anchor
//! changes with slides, and transports the step to the reduced diagrams.
//! Pieces are computed against the expected reduced diagram and replayed on
//! the actual one after aligning rotations, because wrap-around swaps shift
//! the stored linear order without changing the cyclic one.

use thiserror::Error;

use crate::canon::canonical_form;
use crate::diagram::{next, prev, Event, GaussDiagram, Pos, WenId};
use crate::moves::{
    apply, check_step, locate_triangle, mirror_component_unchecked, normalize_gap, Move,
};
use crate::reduction::{gap_marked, mirror, reduce_with, ArcSet, ComponentState};
use crate::trace::{Trace, TraceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranspileError {
    #[error("input trace does not verify: {0}")]
    Trace(#[from] TraceError),
    #[error("wen {0} is not on the diagram")]
    NoSuchWen(WenId),
    #[error("wen {0} is not common to both sides of the step")]
    NotCommon(WenId),
    #[error("target position {0} out of range")]
    OutOfRange(usize),
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("endpoint mismatch: {0}")]
    Endpoint(String),
    #[error("expected a single-component diagram, found {0} components")]
    MultiComponent(usize),
    #[error("step does not hold: {0}")]
    Step(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

fn single(d: &GaussDiagram) -> Result<(), TranspileError> {
    match d.num_components() {
        1 => Ok(()),
        n => Err(TranspileError::MultiComponent(n)),
    }
}

fn wen_move(at: Pos, passed: Event) -> Move {
    if passed.is_tail() {
        Move::W2 { at }
    } else {
        Move::W1 { at }
    }
}

/// Moves the wen at `start` on component `c` past `count` events. Other wens
/// met on the way are not moved: the slide continues from them instead.
fn slide_steps(
    d: &GaussDiagram,
    c: usize,
    start: usize,
    count: usize,
    dir: Direction,
) -> (Vec<Move>, GaussDiagram) {
    let mut cur = d.clone();
    let mut idx = start;
    let mut moves = Vec::new();
    let n = d.len_of(c);
    for _ in 0..count {
        let j = match dir {
            Direction::Forward => next(idx, n),
            Direction::Backward => prev(idx, n),
        };
        let e = cur.component(c)[j];
        if !e.is_wen() {
            let at = Pos::new(c, if dir == Direction::Forward { idx } else { j });
            let m = wen_move(at, e);
            cur = apply(&cur, &m).expect("slide step matches its pattern");
            moves.push(m);
        }
        idx = j;
    }
    (moves, cur)
}

/// Slides `w` in `direction` until it sits at index `to` of its component.
/// Emits one W1 per head and one W2 per tail passed; wens are passed without
/// a move.
pub fn slide_wen(
    d: &GaussDiagram,
    w: WenId,
    to: usize,
    direction: Direction,
) -> Result<Trace, TranspileError> {
    let p = d.locate_wen(w).ok_or(TranspileError::NoSuchWen(w))?;
    let n = d.len_of(p.component);
    if to >= n {
        return Err(TranspileError::OutOfRange(to));
    }
    let count = match direction {
        Direction::Forward => (to + n - p.index) % n,
        Direction::Backward => (p.index + n - to) % n,
    };
    let (moves, _) = slide_steps(d, p.component, p.index, count, direction);
    Ok(Trace::from_moves(d.clone(), moves))
}

/// Index of `e` in the reduced diagram: removed wens before it drop out.
fn reduced_index(d: &GaussDiagram, states: &[ComponentState], c: usize, i: usize) -> usize {
    let removed = d.component(c)[..i]
        .iter()
        .filter(|e| match (e, states[c]) {
            (Event::Wen(w), ComponentState::Anchored(a)) => *w != a,
            (Event::Wen(_), ComponentState::Arcs(_)) => true,
            _ => false,
        })
        .count();
    i - removed
}

fn wen_index(d: &GaussDiagram, c: usize, w: WenId) -> usize {
    d.component(c)
        .iter()
        .position(|e| *e == Event::Wen(w))
        .expect("wen lies on the component")
}

/// Slides realizing G(from) -> G(to) on an odd component, in reduced
/// coordinates. With `to` the j-th wen after `from`, an even j slides forward
/// across the events in between and an odd j slides backward across the rest.
fn bridge_moves(
    d: &GaussDiagram,
    states: &[ComponentState],
    c: usize,
    from: WenId,
    to: WenId,
) -> Vec<Move> {
    let comp = d.component(c);
    let n = comp.len();
    let a = wen_index(d, c, from);
    let b = wen_index(d, c, to);
    let span = (b + n - a) % n;
    let j = (1..=span).filter(|t| comp[(a + t) % n].is_wen()).count();
    let ends_between = |x: usize, len: usize| {
        (1..len).filter(|t| !comp[(x + t) % n].is_wen()).count()
    };
    let e = reduce_with(d, states);
    let start = reduced_index(d, states, c, a);
    let (count, dir) = if j % 2 == 0 {
        (ends_between(a, span), Direction::Forward)
    } else {
        (ends_between(b, (a + n - b) % n), Direction::Backward)
    };
    slide_steps(&e, c, start, count, dir).0
}

/// Trace from G(from) to G(to) made of W1 and W2 only.
pub fn bridge_anchor(d: &GaussDiagram, from: WenId, to: WenId) -> Result<Trace, TranspileError> {
    single(d)?;
    if !d.link_type().is_odd(0) {
        return Err(TranspileError::Parity("bridging needs an odd wen count".into()));
    }
    for w in [from, to] {
        d.locate_wen(w).ok_or(TranspileError::NoSuchWen(w))?;
    }
    let states = [ComponentState::Anchored(from)];
    let moves = bridge_moves(d, &states, 0, from, to);
    Ok(Trace::from_moves(reduce_with(d, &states), moves))
}

fn realize_component(d: &GaussDiagram, c: usize) -> (Vec<Move>, GaussDiagram) {
    let n = d.len_of(c);
    match d.component(c).iter().position(|e| e.is_wen()) {
        Some(a) => slide_steps(d, c, a, n.saturating_sub(1), Direction::Forward),
        None => {
            let add = Move::W4Add { at: Pos::new(c, 0) };
            let with_pair = apply(d, &add).expect("W4Add always applies");
            let (mut moves, slid) = slide_steps(&with_pair, c, 1, n, Direction::Forward);
            let del = Move::W4Del { at: Pos::new(c, n + 1) };
            let done = apply(&slid, &del).expect("the pair meets again at the anchor end");
            moves.insert(0, add);
            moves.push(del);
            (moves, done)
        }
    }
}

/// Mirror of a knot diagram by wen moves: a full circuit of an existing wen,
/// or of a fresh W4 pair when there is none.
pub fn realize_mirror_by_wens(d: &GaussDiagram) -> Result<Trace, TranspileError> {
    single(d)?;
    Ok(Trace::from_moves(d.clone(), realize_component(d, 0).0))
}

/// The component mirror M_i by wen moves on component `i` alone.
pub fn realize_mirror_component_by_wens(
    d: &GaussDiagram,
    i: usize,
) -> Result<Trace, TranspileError> {
    if i >= d.num_components() {
        return Err(TranspileError::Step(format!("component {} does not exist", i + 1)));
    }
    Ok(Trace::from_moves(d.clone(), realize_component(d, i).0))
}

/// Per-component rotation carrying `expected` onto `actual`.
fn alignment(expected: &GaussDiagram, actual: &GaussDiagram) -> Result<Vec<usize>, TranspileError> {
    let fail = |c: usize| {
        TranspileError::Internal(format!(
            "component {} of the replayed diagram drifted from the expected one",
            c + 1
        ))
    };
    if expected.num_components() != actual.num_components() {
        return Err(fail(0));
    }
    let mut out = Vec::with_capacity(expected.num_components());
    for c in 0..expected.num_components() {
        let (e, a) = (expected.component(c), actual.component(c));
        let n = e.len();
        if a.len() != n {
            return Err(fail(c));
        }
        let r = match e.iter().position(|x| !x.is_wen()) {
            None => 0,
            Some(i0) => {
                let j0 = a.iter().position(|x| *x == e[i0]).ok_or_else(|| fail(c))?;
                (j0 + n - i0) % n
            }
        };
        let same = (0..n).all(|i| match (e[i], a[(i + r) % n]) {
            (Event::Wen(_), Event::Wen(_)) => true,
            (x, y) => x == y,
        });
        if !same {
            return Err(fail(c));
        }
        out.push(r);
    }
    Ok(out)
}

fn translate(m: &Move, rot: &[usize], d: &GaussDiagram) -> Move {
    m.map_sites(|p, _| {
        let n = d.len_of(p.component);
        if n == 0 {
            p
        } else {
            Pos::new(p.component, (p.index % n + rot[p.component]) % n)
        }
    })
}

/// Replays pieces on the actual reduced diagram.
struct Engine {
    cur: GaussDiagram,
    out: Trace,
}

impl Engine {
    fn new(initial: GaussDiagram) -> Self {
        Engine {
            cur: initial.clone(),
            out: Trace::new(initial),
        }
    }

    /// Applies `moves`, computed against `expected`, and returns the expected
    /// diagram after them.
    fn emit(&mut self, expected: &GaussDiagram, moves: &[Move]) -> Result<GaussDiagram, TranspileError> {
        let mut e = expected.clone();
        for m in moves {
            let rot = alignment(&e, &self.cur)?;
            let actual = translate(m, &rot, &e);
            self.cur = apply(&self.cur, &actual)
                .map_err(|err| TranspileError::Internal(format!("emitted {actual}: {err}")))?;
            e = apply(&e, m)
                .map_err(|err| TranspileError::Internal(format!("planned {m}: {err}")))?;
            self.out.push(actual);
        }
        Ok(e)
    }

    fn check(&self, expected: &GaussDiagram) -> Result<(), TranspileError> {
        let (a, b) = (canonical_form(&self.cur), canonical_form(expected));
        if a == b {
            Ok(())
        } else {
            Err(TranspileError::Internal(format!(
                "reduced diagram {a} differs from the expected {b}"
            )))
        }
    }

    fn bridge(
        &mut self,
        d: &GaussDiagram,
        states: &mut [ComponentState],
        c: usize,
        to: WenId,
    ) -> Result<(), TranspileError> {
        let ComponentState::Anchored(from) = states[c] else {
            unreachable!("only odd components carry anchors")
        };
        if from == to {
            return Ok(());
        }
        let moves = bridge_moves(d, states, c, from, to);
        self.emit(&reduce_with(d, states), &moves)?;
        states[c] = ComponentState::Anchored(to);
        self.check(&reduce_with(d, states))
    }

    fn transport(
        &mut self,
        d: &GaussDiagram,
        m: &Move,
        d2: &GaussDiagram,
        states: &[ComponentState],
        states2: &[ComponentState],
    ) -> Result<(), TranspileError> {
        let e = reduce_with(d, states);
        let e2 = reduce_with(d2, states2);
        let moves = transported_moves(d, m, states)?;
        let planned = self.emit(&e, &moves)?;
        if canonical_form(&planned) != canonical_form(&e2) {
            return Err(TranspileError::Internal(format!(
                "transport of {m} lands on {} instead of {}",
                canonical_form(&planned),
                canonical_form(&e2)
            )));
        }
        self.check(&e2)
    }
}

/// Positions `g1, g1+1, ...` up to gap `g2` hold only wens removed by the
/// reduction.
fn only_removed_between(d: &GaussDiagram, states: &[ComponentState], c: usize, g1: usize, g2: usize) -> bool {
    let n = d.len_of(c);
    if n == 0 {
        return true;
    }
    let (g1, g2) = (g1 % n, g2 % n);
    let k = (g2 + n - g1) % n;
    (0..k).all(|t| match (d.component(c)[(g1 + t) % n], states[c]) {
        (Event::Wen(w), ComponentState::Anchored(a)) => w != a,
        (Event::Wen(_), ComponentState::Arcs(_)) => true,
        _ => false,
    })
}

/// The moves carrying R(d) to R(apply(d, m)) for fixed states.
fn transported_moves(
    d: &GaussDiagram,
    m: &Move,
    states: &[ComponentState],
) -> Result<Vec<Move>, TranspileError> {
    let map = |p: Pos| Pos::new(p.component, reduced_index(d, states, p.component, p.index));
    let marked = |p: Pos| gap_marked(d, p.component, states[p.component], p.index);
    let step_err = |e: crate::moves::MoveError| TranspileError::Step(e.to_string());
    Ok(match *m {
        Move::R1Add { at, sign, head_first } => vec![Move::R1Add {
            at: map(at),
            sign: sign.flipped_if(marked(at)),
            head_first,
        }],
        Move::R1Del { at } => vec![Move::R1Del { at: map(at) }],
        Move::R2Add {
            tails,
            heads,
            sign,
            parallel,
            heads_first,
        } => {
            let (t, h) = (map(tails), map(heads));
            let same_in_d = tails.component == heads.component && {
                let n = d.len_of(tails.component);
                normalize_gap(tails.index, n) == normalize_gap(heads.index, n)
            };
            let same_in_e = t.component == h.component && {
                let ne = reduced_index(d, states, t.component, d.len_of(t.component));
                normalize_gap(t.index, ne) == normalize_gap(h.index, ne)
            };
            let hf = if same_in_d {
                heads_first
            } else if same_in_e {
                !only_removed_between(d, states, tails.component, tails.index, heads.index)
            } else {
                false
            };
            vec![Move::R2Add {
                tails: t,
                heads: h,
                sign: sign.flipped_if(marked(tails)),
                parallel,
                heads_first: hf,
            }]
        }
        Move::R2Del { tails, heads } => vec![Move::R2Del {
            tails: map(tails),
            heads: map(heads),
        }],
        Move::R8 { at } => vec![Move::R8 { at: map(at) }],
        Move::R3 { top, middle, bottom } => {
            let tri = locate_triangle(d, [top, middle, bottom]).map_err(step_err)?;
            let site = Move::R3 {
                top: map(tri.top),
                middle: map(tri.middle),
                bottom: map(tri.bottom),
            };
            if marked(tri.top) == marked(tri.middle) {
                vec![site]
            } else {
                // Chord 3 flipped against chords 1 and 2: conjugate by an R8
                // on the top pair.
                let r8 = Move::R8 { at: map(tri.top) };
                vec![r8, site, r8]
            }
        }
        Move::W1 { at } | Move::W2 { at } => {
            let n = d.len_of(at.component);
            let q = Pos::new(at.component, next(at.index, n));
            let wen = [at, q]
                .into_iter()
                .find_map(|p| match d.event(p) {
                    Some(Event::Wen(w)) => Some(w),
                    _ => None,
                })
                .ok_or_else(|| TranspileError::Step(format!("{m} has no wen")))?;
            if states[at.component] == ComponentState::Anchored(wen) {
                vec![m.map_sites(|p, _| map(p))]
            } else {
                vec![]
            }
        }
        Move::W4Add { .. } | Move::W4Del { .. } | Move::Mirror | Move::MirrorComponent { .. } => {
            vec![]
        }
    })
}

/// Phase of an even component after `m`, keeping marks fixed away from the
/// move: the gap just before the moved pair keeps its membership.
fn next_phase(d: &GaussDiagram, m: &Move, d2: &GaussDiagram, c: usize, phase: bool) -> bool {
    let wens_before = |g: usize| d2.component(c)[..g].iter().filter(|e| e.is_wen()).count();
    let arcs = ArcSet { component: c, phase };
    match *m {
        Move::W1 { at } | Move::W2 { at } if at.component == c => {
            arcs.contains_gap(d, at.index) ^ (wens_before(at.index) % 2 == 1)
        }
        Move::W4Del { at } if at.component == c => {
            let n = d.len_of(c);
            let g2 = if next(at.index, n) == 0 { at.index - 1 } else { at.index };
            arcs.contains_gap(d, at.index) ^ (wens_before(g2) % 2 == 1)
        }
        Move::Mirror => !phase,
        Move::MirrorComponent { component } if component == c => !phase,
        _ => phase,
    }
}

fn advance(d: &GaussDiagram, m: &Move, d2: &GaussDiagram, states: &[ComponentState]) -> Vec<ComponentState> {
    states
        .iter()
        .enumerate()
        .map(|(c, s)| match *s {
            ComponentState::Arcs(phase) => ComponentState::Arcs(next_phase(d, m, d2, c, phase)),
            anchored => anchored,
        })
        .collect()
}

/// Common wen for the step: the first wen of the component, in stored order,
/// that the move neither moves nor deletes; the moved wen if nothing else.
fn choose_anchor(d: &GaussDiagram, m: &Move, c: usize) -> WenId {
    let n = d.len_of(c);
    let pair_wens = |at: Pos| -> Vec<WenId> {
        if at.component != c {
            return vec![];
        }
        [at.index, next(at.index, n)]
            .into_iter()
            .filter_map(|i| match d.component(c)[i] {
                Event::Wen(w) => Some(w),
                _ => None,
            })
            .collect()
    };
    let locus = match *m {
        Move::W1 { at } | Move::W2 { at } | Move::W4Del { at } => pair_wens(at),
        _ => vec![],
    };
    d.wens_on(c)
        .into_iter()
        .find(|w| !locus.contains(w))
        .unwrap_or_else(|| locus[0])
}

/// Runs the engine over a whole trace. Returns the output trace and the final
/// component states.
fn eliminate(t: &Trace) -> Result<(Trace, Vec<ComponentState>), TranspileError> {
    let diags = t.replay()?;
    let d0 = &diags[0];
    let ty = d0.link_type();
    let last = diags.last().unwrap();
    if last.link_type() != ty {
        return Err(TranspileError::Endpoint("link type changes along the trace".into()));
    }
    for (label, d) in [("initial", d0), ("final", last)] {
        for c in 0..d.num_components() {
            let want = ty.deltas()[c] as usize;
            let got = d.wens_on(c).len();
            if got != want {
                return Err(TranspileError::Endpoint(format!(
                    "{label} diagram has {got} wens on component {}, expected {want}",
                    c + 1
                )));
            }
        }
    }
    let mut states: Vec<ComponentState> = (0..d0.num_components())
        .map(|c| match d0.wens_on(c).first() {
            Some(&w) => ComponentState::Anchored(w),
            None => ComponentState::Arcs(false),
        })
        .collect();
    let mut engine = Engine::new(d0.clone());
    for (k, step) in t.steps.iter().enumerate() {
        let (d, d2, m) = (&diags[k], &diags[k + 1], &step.mv);
        for c in 0..states.len() {
            if matches!(states[c], ComponentState::Anchored(_)) {
                let w = choose_anchor(d, m, c);
                engine.bridge(d, &mut states, c, w)?;
            }
        }
        let states2 = advance(d, m, d2, &states);
        engine.transport(d, m, d2, &states, &states2)?;
        states = states2;
    }
    let out = engine.out;
    out.verify()?;
    Ok((out, states))
}

fn flags_of(states: &[ComponentState]) -> Vec<bool> {
    states
        .iter()
        .map(|s| matches!(s, ComponentState::Arcs(true)))
        .collect()
}

fn check_endpoint(out: &Trace, target: &GaussDiagram) -> Result<(), TranspileError> {
    let got = out.verify()?;
    if canonical_form(&got) != canonical_form(target) {
        return Err(TranspileError::Internal(format!(
            "output ends at {} instead of {}",
            canonical_form(&got),
            canonical_form(target)
        )));
    }
    Ok(())
}

/// Transports one step through G(w) for a wen `w` common to both sides.
/// The output runs from G(w) of `d` to G(w) of `d2` and uses no W4.
pub fn transport_move_odd(
    d: &GaussDiagram,
    m: &Move,
    d2: &GaussDiagram,
    w: WenId,
) -> Result<Trace, TranspileError> {
    single(d)?;
    if !d.link_type().is_odd(0) {
        return Err(TranspileError::Parity("transport through G(w) needs an odd wen count".into()));
    }
    check_step(d, m, d2).map_err(|e| TranspileError::Step(e.to_string()))?;
    let after = apply(d, m).expect("checked above");
    if d.locate_wen(w).is_none() || after.locate_wen(w).is_none() {
        return Err(TranspileError::NotCommon(w));
    }
    let states = [ComponentState::Anchored(w)];
    let mut engine = Engine::new(reduce_with(d, &states));
    engine.transport(d, m, &after, &states, &states)?;
    check_endpoint(&engine.out, &reduce_with(&after, &states))?;
    Ok(engine.out)
}

/// Transports one step through G(A). Returns the trace from G(A) of `d` to
/// G(A') of `d2` and the tracked arc set A'.
pub fn transport_move_even(
    d: &GaussDiagram,
    m: &Move,
    d2: &GaussDiagram,
    arcs: ArcSet,
) -> Result<(Trace, ArcSet), TranspileError> {
    single(d)?;
    if !d.link_type().all_even() {
        return Err(TranspileError::Parity("transport through G(A) needs an even wen count".into()));
    }
    if arcs.component != 0 {
        return Err(TranspileError::Step(format!("component {} does not exist", arcs.component + 1)));
    }
    check_step(d, m, d2).map_err(|e| TranspileError::Step(e.to_string()))?;
    let after = apply(d, m).expect("checked above");
    let states = [ComponentState::Arcs(arcs.phase)];
    let states2 = advance(d, m, &after, &states);
    let mut engine = Engine::new(reduce_with(d, &states));
    engine.transport(d, m, &after, &states, &states2)?;
    check_endpoint(&engine.out, &reduce_with(&after, &states2))?;
    let ComponentState::Arcs(phase) = states2[0] else {
        unreachable!()
    };
    Ok((engine.out, ArcSet { component: 0, phase }))
}

/// Rewrites a trace between single-wen knot diagrams into one without W4.
pub fn eliminate_w4_single_wen(t: &Trace) -> Result<Trace, TranspileError> {
    single(&t.initial)?;
    if t.initial.num_wens() != 1 {
        return Err(TranspileError::Endpoint(format!(
            "initial diagram has {} wens, expected 1",
            t.initial.num_wens()
        )));
    }
    let (out, _) = eliminate(t)?;
    check_endpoint(&out, &t.verify()?)?;
    Ok(out)
}

/// Rewrites a trace between wen-free knot diagrams into Reidemeister moves.
/// The flag says whether the output ends at the mirror of the final diagram.
pub fn eliminate_wens_even(t: &Trace) -> Result<(Trace, bool), TranspileError> {
    single(&t.initial)?;
    if t.initial.num_wens() != 0 {
        return Err(TranspileError::Endpoint(format!(
            "initial diagram has {} wens, expected none",
            t.initial.num_wens()
        )));
    }
    let (out, states) = eliminate(t)?;
    let flag = flags_of(&states)[0];
    let last = t.verify()?;
    let target = if flag { mirror(&last) } else { last };
    check_endpoint(&out, &target)?;
    Ok((out, flag))
}

/// Link version: component `i` keeps `δ_i` wens throughout the output and the
/// flags name the even components whose mirror the output ends at.
pub fn eliminate_wens_link(t: &Trace) -> Result<(Trace, Vec<bool>), TranspileError> {
    let (out, states) = eliminate(t)?;
    let flags = flags_of(&states);
    let mut target = t.verify()?;
    for (c, &f) in flags.iter().enumerate() {
        if f {
            target = mirror_component_unchecked(&target, c);
        }
    }
    check_endpoint(&out, &target)?;
    Ok((out, flags))
}

/// `t` followed by the mirror steps named by `flags`.
pub fn append_mirrors(t: &Trace, flags: &[bool]) -> Trace {
    let mut out = t.clone();
    let all = flags.len() > 1 && flags.iter().all(|&f| f);
    if all || (flags.len() == 1 && flags[0]) {
        out.push(Move::Mirror);
    } else {
        for (c, &f) in flags.iter().enumerate() {
            if f {
                out.push(Move::MirrorComponent { component: c });
            }
        }
    }
    out
}
