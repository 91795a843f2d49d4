//! Wen reduction: collapsing a component's wens to one anchored wen (odd
//! count) or to none relative to a set of marked arcs (even count), and the
//! normal form built on top of them.
//!
//! Both reductions negate exactly the chords whose tail sits in a marked
//! region. For an anchored component the marked gaps are those preceded by an
//! odd number of wens counted forward from the anchor (the anchor excluded).
//! For an arc set the marking is a phase bit for the gap before position 0,
//! toggled at every wen.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::canon::canonical_form;
use crate::diagram::{ChordId, Event, GaussDiagram, LinkType, Role, WenId};
use crate::moves::mirror_component_unchecked;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("component {0} has an even number of wens")]
    EvenWenCount(usize),
    #[error("component {0} has an odd number of wens")]
    OddWenCount(usize),
    #[error("wen {0} is not on the diagram")]
    NoSuchWen(WenId),
    #[error("expected a single-component diagram, found {0} components")]
    MultiComponent(usize),
    #[error("component {0} out of range")]
    ComponentOutOfRange(usize),
}

/// Marked arcs of one component with an even number of wens.
///
/// `phase` is the membership of the gap before position 0; membership flips
/// at every wen. On a wen-free component `false` is the empty set and `true`
/// the whole circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ArcSet {
    pub component: usize,
    pub phase: bool,
}

impl ArcSet {
    pub fn complement(self) -> ArcSet {
        ArcSet {
            phase: !self.phase,
            ..self
        }
    }

    /// Membership of gap `g` (the gap before position `g`, `g <= len`).
    pub fn contains_gap(&self, d: &GaussDiagram, g: usize) -> bool {
        let wens = d.component(self.component)[..g]
            .iter()
            .filter(|e| e.is_wen())
            .count();
        self.phase ^ (wens % 2 == 1)
    }

    /// Flags of the wen-delimited arcs in order, the arc after the first wen
    /// first. A wen-free component has the single flag `phase`.
    pub fn arc_flags(&self, d: &GaussDiagram) -> Vec<bool> {
        let comp = d.component(self.component);
        let wens: Vec<usize> = (0..comp.len()).filter(|&i| comp[i].is_wen()).collect();
        if wens.is_empty() {
            return vec![self.phase];
        }
        wens.iter().map(|&i| self.contains_gap(d, i + 1)).collect()
    }
}

fn single(d: &GaussDiagram) -> Result<(), ReductionError> {
    match d.num_components() {
        1 => Ok(()),
        n => Err(ReductionError::MultiComponent(n)),
    }
}

/// A′ and A″ of a component: A′ holds the arcs from the 1st wen to the 2nd,
/// 3rd to 4th, ..., reading from the stored anchor; A″ the others.
pub fn compute_arc_sets(
    d: &GaussDiagram,
    component: usize,
) -> Result<(ArcSet, ArcSet), ReductionError> {
    let n = d
        .wen_count(component)
        .map_err(|_| ReductionError::ComponentOutOfRange(component))?;
    if n % 2 == 1 {
        return Err(ReductionError::OddWenCount(component));
    }
    let a = ArcSet {
        component,
        phase: false,
    };
    Ok((a, a.complement()))
}

/// Per-component reduction data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum ComponentState {
    Anchored(WenId),
    Arcs(bool),
}

/// Membership of gap `g` on component `c` under `state`.
pub(crate) fn gap_marked(d: &GaussDiagram, c: usize, state: ComponentState, g: usize) -> bool {
    let comp = d.component(c);
    match state {
        ComponentState::Arcs(phase) => ArcSet { component: c, phase }.contains_gap(d, g),
        ComponentState::Anchored(w) => {
            let n = comp.len();
            let a = comp
                .iter()
                .position(|e| *e == Event::Wen(w))
                .expect("anchor lies on its component");
            let g = g % n;
            let between = (g + n - a - 1) % n;
            let wens = (1..=between)
                .filter(|t| comp[(a + t) % n].is_wen())
                .count();
            wens % 2 == 1
        }
    }
}

/// Removes every wen except anchors and negates chords with marked tails.
pub(crate) fn reduce_with(d: &GaussDiagram, states: &[ComponentState]) -> GaussDiagram {
    let mut flip: BTreeSet<ChordId> = BTreeSet::new();
    let mut comps = Vec::with_capacity(d.num_components());
    for (c, comp) in d.components().iter().enumerate() {
        for (i, e) in comp.iter().enumerate() {
            if let Event::End(ch, Role::Tail) = e {
                if gap_marked(d, c, states[c], i) {
                    flip.insert(*ch);
                }
            }
        }
        comps.push(
            comp.iter()
                .copied()
                .filter(|e| match (e, states[c]) {
                    (Event::Wen(w), ComponentState::Anchored(a)) => *w == a,
                    (Event::Wen(_), ComponentState::Arcs(_)) => false,
                    _ => true,
                })
                .collect(),
        );
    }
    let signs = d
        .signs()
        .iter()
        .map(|(ch, s)| (*ch, s.flipped_if(flip.contains(ch))))
        .collect();
    GaussDiagram::from_parts_unchecked(comps, signs)
}

/// G(w): keeps only `w`, negating chords whose tail lies in the arcs from the
/// 1st to the 2nd wen, 3rd to 4th, ..., counted forward from `w`.
pub fn reduce_to_single_wen(d: &GaussDiagram, w: WenId) -> Result<GaussDiagram, ReductionError> {
    single(d)?;
    if d.link_type().all_even() {
        return Err(ReductionError::EvenWenCount(0));
    }
    if d.locate_wen(w).is_none() {
        return Err(ReductionError::NoSuchWen(w));
    }
    Ok(reduce_with(d, &[ComponentState::Anchored(w)]))
}

/// G(A): drops every wen, negating chords whose tail lies in `arcs`.
pub fn reduce_to_no_wen(d: &GaussDiagram, arcs: ArcSet) -> Result<GaussDiagram, ReductionError> {
    single(d)?;
    if arcs.component != 0 {
        return Err(ReductionError::ComponentOutOfRange(arcs.component));
    }
    if !d.link_type().all_even() {
        return Err(ReductionError::OddWenCount(0));
    }
    Ok(reduce_with(d, &[ComponentState::Arcs(arcs.phase)]))
}

/// Negates every chord sign.
pub fn mirror(d: &GaussDiagram) -> GaussDiagram {
    let all: Vec<ChordId> = d.signs().keys().copied().collect();
    let mut out = d.clone();
    for ch in all {
        if let Some(s) = out.signs_mut().get_mut(&ch) {
            *s = -*s;
        }
    }
    out
}

/// Negates chords whose tail lies on component `i`.
pub fn mirror_component(d: &GaussDiagram, i: usize) -> Result<GaussDiagram, ReductionError> {
    if i >= d.num_components() {
        return Err(ReductionError::ComponentOutOfRange(i));
    }
    Ok(mirror_component_unchecked(d, i))
}

/// Every placement of the single wen of `g` among its chord ends, each also
/// mirrored: the orbit of `g` under W1 and W2.
fn slide_orbit(g: &GaussDiagram) -> Vec<GaussDiagram> {
    let comp = g.component(0);
    let w = comp.iter().position(|e| e.is_wen()).expect("one wen");
    let n = comp.len();
    let ends: Vec<Event> = (1..n).map(|k| comp[(w + k) % n]).collect();
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..ends.len().max(1) {
        let mut events: Vec<Event> = ends.iter().take(k).copied().collect();
        events.push(comp[w]);
        events.extend(ends.iter().skip(k).copied());
        let passed: BTreeSet<ChordId> = ends[..k.min(ends.len())]
            .iter()
            .filter_map(|e| match e {
                Event::End(c, Role::Tail) => Some(*c),
                _ => None,
            })
            .collect();
        let signs = g
            .signs()
            .iter()
            .map(|(c, s)| (*c, s.flipped_if(passed.contains(c))))
            .collect();
        let h = GaussDiagram::from_parts_unchecked(vec![events], signs);
        out.push(mirror(&h));
        out.push(h);
    }
    out
}

/// Link type plus a normal form of a knot diagram.
///
/// Odd type: the least canonical form over the W1/W2 orbit of G(w) for the
/// first wen `w`. Even type: the lesser canonical form of G(A′) and its mirror.
pub fn classify(d: &GaussDiagram) -> Result<(LinkType, String), ReductionError> {
    single(d)?;
    let ty = d.link_type();
    let form = if ty.is_odd(0) {
        let w = d.wens_on(0)[0];
        let g = reduce_to_single_wen(d, w)?;
        slide_orbit(&g)
            .iter()
            .map(canonical_form)
            .min()
            .expect("orbit is never empty")
    } else {
        let (a, _) = compute_arc_sets(d, 0)?;
        let r = reduce_to_no_wen(d, a)?;
        canonical_form(&r).min(canonical_form(&mirror(&r)))
    };
    Ok((ty, form))
}
