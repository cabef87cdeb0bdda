//! The cell archive driving return-then-explore search.
//!
//! Every distinct state signature owns one cell. A cell remembers how to get
//! back to its state (a snapshot id plus the action prefix that produced
//! it), how often it has been picked for expansion, and the best episode
//! score observed there. Selection favors rarely-visited cells — weight
//! `1/(1 + visits)` — optionally scaled by `(1 + best_score)` when reward
//! bias is enabled; turning that bias on is precisely what makes selection
//! herd toward early high scorers, which is measurable as a drop in how
//! many distinct cells a fixed budget discovers.
//!
//! The archive only grows. Cells are never pruned or evicted, so cell count
//! is a faithful coverage metric across a run, and selection iterates cells
//! in insertion order so the weighted draw is a pure function of (archive
//! contents, stream position).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::signature::Signature;
use crate::stream::SeededStream;
use crate::trajectory::Trajectory;
use crate::world::SnapshotId;

/// Errors surfaced by archive operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArchiveError {
    #[error("cannot select from an empty archive")]
    Empty,
}

/// How selection weighs cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Weight `1 / (1 + visit_count)`: pure novelty pressure.
    VisitOnly,
    /// Weight `(1 + best_score) / (1 + visit_count)`: score-greedy.
    RewardBiased,
}

/// One archived state.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub signature: Signature,
    /// User messages that reach this state from the initial world.
    pub action_prefix: Vec<String>,
    /// Saved world state at the end of the prefix.
    pub snapshot: SnapshotId,
    /// Times this cell has been chosen for expansion (creation counts once).
    pub visit_count: u64,
    /// Prefix length; lineages stop expanding at the campaign depth cap.
    pub depth: u32,
    /// Best episode score observed at this signature.
    pub best_score: f64,
    /// Canonical trajectory that first reached this cell; expansions extend
    /// it so children can compute whole-episode signatures without replay.
    pub trajectory: Trajectory,
}

impl Cell {
    /// A fresh cell with one creation visit on the clock.
    #[must_use]
    pub fn new(
        signature: Signature,
        action_prefix: Vec<String>,
        snapshot: SnapshotId,
        trajectory: Trajectory,
        best_score: f64,
    ) -> Self {
        let depth = action_prefix.len() as u32;
        Self {
            signature,
            action_prefix,
            snapshot,
            visit_count: 1,
            depth,
            best_score,
            trajectory,
        }
    }

    fn weight(&self, policy: SelectionPolicy) -> f64 {
        let novelty = 1.0 / (1.0 + self.visit_count as f64);
        match policy {
            SelectionPolicy::VisitOnly => novelty,
            SelectionPolicy::RewardBiased => (1.0 + self.best_score) * novelty,
        }
    }
}

/// Insertion-ordered, grow-only cell store.
#[derive(Debug, Clone, Default)]
pub struct Archive {
    cells: Vec<Cell>,
    index: BTreeMap<Signature, usize>,
}

impl Archive {
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// True iff no cell holds this signature yet.
    #[must_use]
    pub fn is_novel(&self, signature: &Signature) -> bool {
        !self.index.contains_key(signature)
    }

    #[must_use]
    pub fn get(&self, signature: &Signature) -> Option<&Cell> {
        self.index.get(signature).map(|&i| &self.cells[i])
    }

    /// Mutable cell access (used by tests and score upkeep).
    pub fn get_mut(&mut self, signature: &Signature) -> Option<&mut Cell> {
        self.index.get(signature).map(|&i| &mut self.cells[i])
    }

    /// Cells in insertion order.
    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter()
    }

    /// Inserts the cell if its signature is new; returns whether it was.
    ///
    /// On a duplicate, the stored cell keeps its prefix, snapshot, and visit
    /// count, and only lifts `best_score` if the new observation beats it.
    pub fn insert_if_novel(&mut self, cell: Cell) -> bool {
        if let Some(&i) = self.index.get(&cell.signature) {
            let existing = &mut self.cells[i];
            if cell.best_score > existing.best_score {
                existing.best_score = cell.best_score;
            }
            return false;
        }
        self.index.insert(cell.signature, self.cells.len());
        self.cells.push(cell);
        true
    }

    /// Weighted draw over all cells; increments the winner's visit count.
    ///
    /// Consumes exactly one `f64` from the stream. The cumulative-weight
    /// walk runs in insertion order, so identical archive contents and
    /// stream position always select the same cell.
    pub fn select_cell(
        &mut self,
        stream: &mut SeededStream,
        policy: SelectionPolicy,
    ) -> Result<&Cell, ArchiveError> {
        if self.cells.is_empty() {
            return Err(ArchiveError::Empty);
        }
        let total: f64 = self.cells.iter().map(|c| c.weight(policy)).sum();
        let mut remaining = stream.next_f64() * total;
        let mut chosen = self.cells.len() - 1;
        for (i, cell) in self.cells.iter().enumerate() {
            remaining -= cell.weight(policy);
            if remaining < 0.0 {
                chosen = i;
                break;
            }
        }
        self.cells[chosen].visit_count += 1;
        Ok(&self.cells[chosen])
    }
}
