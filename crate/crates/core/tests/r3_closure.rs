//! With the extended R3 table enabled, every extra pattern must be reachable
//! from the base patterns and R2 moves. Checked on bare triangles by a
//! bidirectional search, depth at most 8.
#![cfg(feature = "extended-r3")]

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use wenforge::{
    apply, canonical_form, enumerate, locate_triangle, ChordId, Event, GaussDiagram, Move,
    MoveKind, MoveSet, R3Pattern, Role, SizeCaps,
};

fn triangle(p: &R3Pattern) -> GaussDiagram {
    let end = |c: u32, role| Event::End(ChordId(c), role);
    let (t, h) = (Role::Tail, Role::Head);
    let order = |first: bool, x: Event, y: Event| if first { [x, y] } else { [y, x] };
    let mut comp = Vec::new();
    comp.extend(order(p.t1_first, end(1, t), end(2, t)));
    comp.extend(order(p.h1_first, end(1, h), end(3, t)));
    comp.extend(order(p.h2_first, end(2, h), end(3, h)));
    let signs: BTreeMap<_, _> = (0..3).map(|i| (ChordId(i as u32 + 1), p.signs[i])).collect();
    GaussDiagram::new(vec![comp], signs).unwrap()
}

fn allowed_moves(d: &GaussDiagram) -> Vec<Move> {
    let set = MoveSet::new([MoveKind::R2Add, MoveKind::R2Del, MoveKind::R3]);
    let caps = SizeCaps { max_chords: 7, max_wens: 0 };
    enumerate(d, &set, caps)
        .into_iter()
        .filter(|m| match *m {
            Move::R3 { top, middle, bottom } => {
                locate_triangle(d, [top, middle, bottom]).unwrap().pattern.is_base()
            }
            _ => true,
        })
        .collect()
}

/// Frontier expansion: canonical forms of the next level, each with one
/// representative diagram.
fn expand(
    frontier: &[GaussDiagram],
    seen: &HashMap<String, usize>,
) -> Vec<(String, GaussDiagram)> {
    let found: Vec<(String, GaussDiagram)> = frontier
        .par_iter()
        .flat_map_iter(|d| {
            allowed_moves(d).into_iter().map(move |m| {
                let e = apply(d, &m).unwrap();
                (canonical_form(&e), e)
            })
        })
        .collect();
    let mut out: BTreeMap<String, GaussDiagram> = BTreeMap::new();
    for (k, d) in found {
        if !seen.contains_key(&k) {
            out.entry(k).or_insert(d);
        }
    }
    out.into_iter().collect()
}

/// Length of a shortest path within `max_depth`, if any.
fn distance(a: &GaussDiagram, b: &GaussDiagram, max_depth: usize) -> Option<usize> {
    let mut seen = [HashMap::new(), HashMap::new()];
    let mut frontier = [vec![a.clone()], vec![b.clone()]];
    seen[0].insert(canonical_form(a), 0);
    seen[1].insert(canonical_form(b), 0);
    if seen[0].keys().any(|k| seen[1].contains_key(k)) {
        return Some(0);
    }
    let mut depth = [0, 0];
    while depth[0] + depth[1] < max_depth {
        let side = usize::from(frontier[1].len() < frontier[0].len());
        let next = expand(&frontier[side], &seen[side]);
        if next.is_empty() {
            return None;
        }
        depth[side] += 1;
        let mut best = None;
        for (k, _) in &next {
            if let Some(&other) = seen[1 - side].get(k) {
                best = Some(best.map_or(depth[side] + other, |b: usize| b.min(depth[side] + other)));
            }
        }
        if best.is_some() {
            return best;
        }
        for (k, _) in &next {
            seen[side].insert(k.clone(), depth[side]);
        }
        frontier[side] = next.into_iter().map(|(_, d)| d).collect();
    }
    None
}

#[test]
fn extended_patterns_follow_from_base_and_r2() {
    let extra: Vec<R3Pattern> = R3Pattern::all_oriented().filter(|p| !p.is_base()).collect();
    assert_eq!(extra.len(), 8);
    let mut misses = Vec::new();
    for p in &extra {
        let d = triangle(p);
        let mv = enumerate(&d, &MoveSet::new([MoveKind::R3]), SizeCaps::around(&d, 0))
            .into_iter()
            .find(|m| matches!(m, Move::R3 { .. }))
            .expect("the triangle admits its own move");
        let d2 = apply(&d, &mv).unwrap();
        match distance(&d, &d2, 8) {
            Some(n) => {
                println!("{p:?}: {n} steps");
                assert!(n >= 2, "{p:?} reached in {n} steps without an extended move");
            }
            None => misses.push(*p),
        }
    }
    assert!(misses.is_empty(), "not reachable within depth 8: {misses:?}");
}
