//! Bounded breadth-first equivalence search and seeded random generation.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::canon::canonical_form;
use crate::diagram::{next, ChordId, Event, GaussDiagram, Pos, Role, Sign, WenId};
use crate::moves::{apply, enumerate, Move, MoveKind, MoveSet, SizeCaps};
use crate::trace::{Trace, TraceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_depth: usize,
    pub max_nodes: usize,
    pub max_chords: usize,
    pub max_wens: usize,
}

impl SearchBounds {
    /// Depth 8, a million nodes, and two more chords and wens than the larger
    /// endpoint.
    pub fn for_pair(a: &GaussDiagram, b: &GaussDiagram) -> Self {
        SearchBounds {
            max_depth: 8,
            max_nodes: 1_000_000,
            max_chords: a.num_chords().max(b.num_chords()) + 2,
            max_wens: a.num_wens().max(b.num_wens()) + 2,
        }
    }

    fn caps(&self) -> SizeCaps {
        SizeCaps {
            max_chords: self.max_chords,
            max_wens: self.max_wens,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Endpoints differ in component count or link type.
    TypeMismatch,
    DepthLimit,
    NodeLimit,
    /// Every reachable node within the caps was visited.
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrontierStats {
    pub depth: usize,
    pub visited: usize,
    pub frontier: usize,
    pub reason: StopReason,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchResult {
    Found(Trace),
    Exhausted(FrontierStats),
}

impl SearchResult {
    pub fn trace(&self) -> Option<&Trace> {
        match self {
            SearchResult::Found(t) => Some(t),
            SearchResult::Exhausted(_) => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("size caps ({max_chords} chords, {max_wens} wens) are below the input sizes")]
    CapsBelowInput { max_chords: usize, max_wens: usize },
    #[error("reconstructed trace failed to verify: {0}")]
    Unverified(#[from] TraceError),
}

type Expansion = (String, usize, Move, GaussDiagram);

/// Breadth-first search from `a` to `b` over canonical forms.
///
/// Levels are expanded in parallel and merged in frontier order, frontier
/// nodes sorted by canonical form, so the result is deterministic.
pub fn bfs_equivalence(
    a: &GaussDiagram,
    b: &GaussDiagram,
    allowed: &MoveSet,
    bounds: SearchBounds,
) -> Result<SearchResult, SearchError> {
    for d in [a, b] {
        if d.num_chords() > bounds.max_chords || d.num_wens() > bounds.max_wens {
            return Err(SearchError::CapsBelowInput {
                max_chords: bounds.max_chords,
                max_wens: bounds.max_wens,
            });
        }
    }
    let exhausted = |depth, visited, frontier, reason| {
        Ok(SearchResult::Exhausted(FrontierStats {
            depth,
            visited,
            frontier,
            reason,
        }))
    };
    let ty = b.link_type();
    if a.num_components() != b.num_components() || a.link_type() != ty {
        return exhausted(0, 0, 0, StopReason::TypeMismatch);
    }
    let target = canonical_form(b);
    let start = canonical_form(a);
    if start == target {
        return Ok(SearchResult::Found(Trace::new(a.clone())));
    }
    let caps = bounds.caps();
    // Node keys are indices into `keys`; parents point at earlier indices.
    let mut keys: Vec<String> = vec![start.clone()];
    let mut parents: Vec<Option<(usize, Move)>> = vec![None];
    let mut seen: HashSet<String> = HashSet::from([start]);
    let mut frontier: Vec<(usize, GaussDiagram)> = vec![(0, a.clone())];
    for depth in 1..=bounds.max_depth {
        let expansions: Vec<Vec<Expansion>> = frontier
            .par_iter()
            .map(|(id, d)| {
                enumerate(d, allowed, caps)
                    .into_iter()
                    .filter_map(|m| {
                        let d2 = apply(d, &m).ok()?;
                        (d2.link_type() == ty).then(|| (canonical_form(&d2), *id, m, d2))
                    })
                    .collect()
            })
            .collect();
        let mut next_frontier: Vec<(usize, GaussDiagram)> = Vec::new();
        for (key, parent, m, d2) in expansions.into_iter().flatten() {
            if seen.contains(&key) {
                continue;
            }
            seen.insert(key.clone());
            let id = keys.len();
            keys.push(key.clone());
            parents.push(Some((parent, m)));
            if key == target {
                let mut moves = Vec::new();
                let mut cur = id;
                while let Some((p, m)) = parents[cur] {
                    moves.push(m);
                    cur = p;
                }
                moves.reverse();
                let t = Trace::from_moves(a.clone(), moves);
                let end = t.verify()?;
                assert_eq!(canonical_form(&end), target, "reconstructed path drifted");
                return Ok(SearchResult::Found(t));
            }
            if seen.len() >= bounds.max_nodes {
                return exhausted(depth, seen.len(), next_frontier.len(), StopReason::NodeLimit);
            }
            next_frontier.push((id, d2));
        }
        if next_frontier.is_empty() {
            return exhausted(depth, seen.len(), 0, StopReason::Closed);
        }
        next_frontier.sort_by(|x, y| keys[x.0].cmp(&keys[y.0]));
        frontier = next_frontier;
    }
    exhausted(bounds.max_depth, seen.len(), frontier.len(), StopReason::DepthLimit)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `chords` chords and `wens` wens spread over `components` circles: each
/// event lands on a uniform component, each circle is uniformly shuffled, and
/// signs and tail/head roles are uniform.
pub fn random_diagram(chords: usize, wens: usize, components: usize, seed: u64) -> GaussDiagram {
    random_diagram_with(&mut rng(seed), chords, wens, components)
}

pub fn random_diagram_with(
    rng: &mut impl Rng,
    chords: usize,
    wens: usize,
    components: usize,
) -> GaussDiagram {
    let mu = components.max(1);
    let mut comps: Vec<Vec<Event>> = vec![Vec::new(); mu];
    let mut signs = std::collections::BTreeMap::new();
    for i in 1..=chords as u32 {
        let ch = ChordId(i);
        for role in [Role::Tail, Role::Head] {
            comps[rng.gen_range(0..mu)].push(Event::End(ch, role));
        }
        signs.insert(ch, if rng.gen_bool(0.5) { Sign::Positive } else { Sign::Negative });
    }
    for i in 1..=wens as u32 {
        comps[rng.gen_range(0..mu)].push(Event::Wen(WenId(i)));
    }
    for comp in comps.iter_mut() {
        comp.shuffle(rng);
    }
    GaussDiagram::new(comps, signs).expect("generated diagrams are well formed")
}

/// Like [`random_diagram_with`] but with a fixed wen count per component.
pub fn random_diagram_typed(
    rng: &mut impl Rng,
    chords: usize,
    wens_per_component: &[usize],
) -> GaussDiagram {
    let base = random_diagram_with(rng, chords, 0, wens_per_component.len());
    let mut comps: Vec<Vec<Event>> = base.components().to_vec();
    let mut next_wen = 1;
    for (c, &k) in wens_per_component.iter().enumerate() {
        for _ in 0..k {
            let at = rng.gen_range(0..=comps[c].len());
            comps[c].insert(at, Event::Wen(WenId(next_wen)));
            next_wen += 1;
        }
    }
    GaussDiagram::new(comps, base.signs().clone()).expect("generated diagrams are well formed")
}

/// A random walk, and whether it reached the requested length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomTrace {
    pub trace: Trace,
    pub complete: bool,
}

/// At each step picks uniformly among all enumerated instances.
pub fn random_trace(
    d0: &GaussDiagram,
    length: usize,
    allowed: &MoveSet,
    caps: SizeCaps,
    seed: u64,
) -> RandomTrace {
    walk(d0, length, allowed, caps, &mut rng(seed), false)
}

/// At each step picks a kind uniformly among those with an instance, then an
/// instance of that kind. Keeps insertions from swamping short walks.
pub fn random_trace_balanced(
    d0: &GaussDiagram,
    length: usize,
    allowed: &MoveSet,
    caps: SizeCaps,
    rng: &mut impl Rng,
) -> RandomTrace {
    walk(d0, length, allowed, caps, rng, true)
}

fn walk(
    d0: &GaussDiagram,
    length: usize,
    allowed: &MoveSet,
    caps: SizeCaps,
    rng: &mut impl Rng,
    balanced: bool,
) -> RandomTrace {
    let mut t = Trace::new(d0.clone());
    let mut cur = d0.clone();
    for _ in 0..length {
        let ms = enumerate(&cur, allowed, caps);
        if ms.is_empty() {
            return RandomTrace { trace: t, complete: false };
        }
        let m = if balanced {
            let mut kinds: Vec<MoveKind> = ms.iter().map(Move::kind).collect();
            kinds.dedup();
            let k = kinds[rng.gen_range(0..kinds.len())];
            let of_kind: Vec<&Move> = ms.iter().filter(|m| m.kind() == k).collect();
            *of_kind[rng.gen_range(0..of_kind.len())]
        } else {
            ms[rng.gen_range(0..ms.len())]
        };
        cur = apply(&cur, &m).expect("enumerated moves apply");
        t.push(m);
    }
    RandomTrace { trace: t, complete: true }
}

/// W1/W2 slides and W4 deletions bringing every component `c` of `d` down to
/// `target[c]` wens (same parity). Each round cancels the closest pair of
/// cyclically consecutive wens.
pub fn close_wens(d: &GaussDiagram, target: &[usize]) -> Vec<Move> {
    let mut cur = d.clone();
    let mut out = Vec::new();
    for (c, &goal) in target.iter().enumerate() {
        while cur.wens_on(c).len() > goal {
            let comp = cur.component(c);
            let n = comp.len();
            let idx: Vec<usize> = (0..n).filter(|&i| comp[i].is_wen()).collect();
            let gap = |k: usize| {
                let (a, b) = (idx[k], idx[(k + 1) % idx.len()]);
                (b + n - a) % n
            };
            let k = (0..idx.len()).min_by_key(|&k| gap(k)).unwrap();
            let mut at = idx[k];
            for _ in 1..gap(k) {
                let passed = cur.component(c)[next(at, n)];
                let m = if passed.is_tail() {
                    Move::W2 { at: Pos::new(c, at) }
                } else {
                    Move::W1 { at: Pos::new(c, at) }
                };
                cur = apply(&cur, &m).expect("slide toward the partner wen");
                out.push(m);
                at = next(at, n);
            }
            let m = Move::W4Del { at: Pos::new(c, at) };
            cur = apply(&cur, &m).expect("the two wens are adjacent");
            out.push(m);
        }
    }
    out
}

/// A balanced random walk of `walk_len` steps followed by [`close_wens`], so
/// that the final diagram has as many wens per component as `d0`.
pub fn random_closed_trace(
    d0: &GaussDiagram,
    walk_len: usize,
    allowed: &MoveSet,
    caps: SizeCaps,
    rng: &mut impl Rng,
) -> Trace {
    let mut t = random_trace_balanced(d0, walk_len, allowed, caps, rng).trace;
    let end = t.verify().expect("walks replay");
    let target: Vec<usize> = (0..d0.num_components()).map(|c| d0.wens_on(c).len()).collect();
    for m in close_wens(&end, &target) {
        t.push(m);
    }
    t
}

/// Counts diagrams reached per depth, for diagnostics.
pub fn level_sizes(a: &GaussDiagram, allowed: &MoveSet, caps: SizeCaps, depth: usize) -> Vec<usize> {
    let mut seen: HashSet<String> = HashSet::from([canonical_form(a)]);
    let mut frontier = vec![a.clone()];
    let mut out = vec![1];
    for _ in 0..depth {
        let mut nxt = Vec::new();
        for d in &frontier {
            for m in enumerate(d, allowed, caps) {
                let d2 = apply(d, &m).expect("enumerated moves apply");
                if seen.insert(canonical_form(&d2)) {
                    nxt.push(d2);
                }
            }
        }
        out.push(nxt.len());
        frontier = nxt;
    }
    out
}
