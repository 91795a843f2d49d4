//! Rewriting engine for Gauss diagrams of extended welded knots and links.
//!
//! Diagrams carry signed chords and wens. The crate implements the move
//! calculus on them, the wen-reduction constructions, trace transpilers that
//! eliminate wen-pair moves or all wens, and a bounded search oracle.

pub mod canon;
pub mod codec;
pub mod diagram;
pub mod moves;
pub mod reduction;
pub mod search;
pub mod trace;
pub mod transpiler;

pub use canon::{canonical_diagram, canonical_form, canonically_equal};
pub use codec::{parse, serialize, ParseError};
pub use diagram::{ChordId, DiagramError, Event, GaussDiagram, LinkType, Pos, Role, Sign, WenId};
pub use moves::{
    apply, check_step, enumerate, invert, locate_triangle, Move, MoveError, MoveKind, MoveSet,
    R3Pattern, SizeCaps,
};
pub use trace::{Trace, TraceError, TraceStep};
pub use reduction::{
    classify, compute_arc_sets, mirror, mirror_component, reduce_to_no_wen, reduce_to_single_wen,
    ArcSet, ReductionError,
};
pub use search::{bfs_equivalence, random_diagram, random_trace, SearchBounds, SearchResult};
pub use transpiler::{
    eliminate_w4_single_wen, eliminate_wens_even, eliminate_wens_link, realize_mirror_by_wens,
    slide_wen, transport_move_even, transport_move_odd, Direction, TranspileError,
};
