//! Canonical forms up to rotation of each component and renaming of ids.
//!
//! For every choice of starting position per component, chords are relabeled
//! 1, 2, ... in first-encounter order (components read in their given order)
//! and the result is encoded; the minimum encoding wins. Components are never
//! permuted. Because labels are assigned left to right, the minimum can be
//! found one component at a time, keeping only the tied prefixes.

use std::collections::BTreeMap;

use crate::codec;
use crate::diagram::{ChordId, Event, GaussDiagram, Role, Sign, WenId};

#[derive(Clone)]
struct Prefix {
    labels: BTreeMap<ChordId, u32>,
    starts: Vec<usize>,
}

fn encode(
    d: &GaussDiagram,
    comp: &[Event],
    start: usize,
    labels: &mut BTreeMap<ChordId, u32>,
) -> Vec<u32> {
    let n = comp.len();
    (0..n)
        .map(|k| match comp[(start + k) % n] {
            Event::Wen(_) => 0,
            Event::End(ch, role) => {
                let next = labels.len() as u32 + 1;
                let label = *labels.entry(ch).or_insert(next);
                let head = u32::from(role == Role::Head);
                let neg = u32::from(d.sign(ch) == Sign::Negative);
                1 + 4 * label + 2 * head + neg
            }
        })
        .collect()
}

/// The canonical representative: rotated per component, chords numbered by
/// first encounter, wens numbered in reading order.
pub fn canonical_diagram(d: &GaussDiagram) -> GaussDiagram {
    let mut prefixes = vec![Prefix {
        labels: BTreeMap::new(),
        starts: Vec::new(),
    }];
    for comp in d.components() {
        let n = comp.len();
        let mut best: Option<Vec<u32>> = None;
        let mut tied: Vec<Prefix> = Vec::new();
        for p in &prefixes {
            for s in 0..n.max(1) {
                let mut labels = p.labels.clone();
                let code = encode(d, comp, s, &mut labels);
                let ord = best.as_ref().map(|b| code.cmp(b));
                match ord {
                    Some(std::cmp::Ordering::Greater) => continue,
                    Some(std::cmp::Ordering::Equal) => {}
                    _ => {
                        best = Some(code);
                        tied.clear();
                    }
                }
                if tied.iter().all(|t| t.labels != labels) {
                    let mut starts = p.starts.clone();
                    starts.push(s);
                    tied.push(Prefix { labels, starts });
                }
            }
        }
        prefixes = tied;
    }
    let winner = &prefixes[0];
    let mut components = Vec::with_capacity(d.num_components());
    let mut next_wen = 1;
    for (comp, &s) in d.components().iter().zip(&winner.starts) {
        let n = comp.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(match comp[(s + k) % n] {
                Event::Wen(_) => {
                    next_wen += 1;
                    Event::Wen(WenId(next_wen - 1))
                }
                Event::End(ch, role) => Event::End(ChordId(winner.labels[&ch]), role),
            });
        }
        components.push(out);
    }
    let signs = d
        .signs()
        .iter()
        .map(|(ch, s)| (ChordId(winner.labels[ch]), *s))
        .collect();
    GaussDiagram::from_parts_unchecked(components, signs)
}

/// Canonical Gauss code; two diagrams are equal iff these strings are equal.
pub fn canonical_form(d: &GaussDiagram) -> String {
    codec::serialize(&canonical_diagram(d))
}

pub fn canonically_equal(a: &GaussDiagram, b: &GaussDiagram) -> bool {
    a.num_components() == b.num_components() && canonical_form(a) == canonical_form(b)
}
