//! Move sequences with optional checkpoints, replayed and checked step by step.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::canon::canonical_form;
use crate::diagram::GaussDiagram;
use crate::moves::{apply, Move, MoveError, MoveKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub mv: Move,
    pub checkpoint: Option<GaussDiagram>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub initial: GaussDiagram,
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceErrorKind {
    #[error("move not applicable: {0}")]
    Inapplicable(MoveError),
    #[error("checkpoint mismatch: expected {expected}, replay gives {actual}")]
    CheckpointMismatch { expected: String, actual: String },
}

/// A failed replay. `step` is 1-based, matching the order of `MOVE` lines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("step {step}: {kind}")]
pub struct TraceError {
    pub step: usize,
    pub kind: TraceErrorKind,
}

impl Trace {
    pub fn new(initial: GaussDiagram) -> Self {
        Trace {
            initial,
            steps: Vec::new(),
        }
    }

    pub fn from_moves(initial: GaussDiagram, moves: impl IntoIterator<Item = Move>) -> Self {
        Trace {
            initial,
            steps: moves
                .into_iter()
                .map(|mv| TraceStep { mv, checkpoint: None })
                .collect(),
        }
    }

    pub fn push(&mut self, mv: Move) {
        self.steps.push(TraceStep { mv, checkpoint: None });
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn moves(&self) -> impl Iterator<Item = &Move> + '_ {
        self.steps.iter().map(|s| &s.mv)
    }

    pub fn kinds(&self) -> BTreeSet<MoveKind> {
        self.moves().map(Move::kind).collect()
    }

    pub fn count(&self, pred: impl Fn(MoveKind) -> bool) -> usize {
        self.moves().filter(|m| pred(m.kind())).count()
    }

    /// Every diagram along the trace, the initial one first.
    pub fn replay(&self) -> Result<Vec<GaussDiagram>, TraceError> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(self.initial.clone());
        for (i, step) in self.steps.iter().enumerate() {
            let cur = out.last().unwrap();
            let nxt = apply(cur, &step.mv).map_err(|e| TraceError {
                step: i + 1,
                kind: TraceErrorKind::Inapplicable(e),
            })?;
            if let Some(cp) = &step.checkpoint {
                let (expected, actual) = (canonical_form(cp), canonical_form(&nxt));
                if expected != actual {
                    return Err(TraceError {
                        step: i + 1,
                        kind: TraceErrorKind::CheckpointMismatch { expected, actual },
                    });
                }
            }
            out.push(nxt);
        }
        Ok(out)
    }

    /// Replays every step and checks every checkpoint; returns the final diagram.
    pub fn verify(&self) -> Result<GaussDiagram, TraceError> {
        Ok(self.replay()?.pop().unwrap())
    }

    /// Fills in every checkpoint from a replay.
    pub fn with_checkpoints(&self) -> Result<Trace, TraceError> {
        let diags = self.replay()?;
        let steps = self
            .steps
            .iter()
            .zip(diags.into_iter().skip(1))
            .map(|(s, d)| TraceStep {
                mv: s.mv,
                checkpoint: Some(d),
            })
            .collect();
        Ok(Trace {
            initial: self.initial.clone(),
            steps,
        })
    }

    /// Drops every checkpoint.
    pub fn bare(&self) -> Trace {
        Trace::from_moves(self.initial.clone(), self.moves().copied())
    }
}
