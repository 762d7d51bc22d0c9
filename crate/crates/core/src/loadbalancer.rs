//! Reliability-weighted request routing.
//!
//! Scores become integer weights (`max(1, round(100 * score))`) and requests
//! are spread with the interleaving ("smooth") weighted round-robin used by
//! common reverse proxies: every pick adds each weight to a running counter,
//! takes the largest counter and subtracts the weight total from it.

use alloc::vec::Vec;

use crate::model::VersionId;

/// Weight granularity: a score of 1.0 maps to this weight.
pub const WEIGHT_SCALE: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightTable {
    entries: Vec<(VersionId, u32)>,
    generation: u64,
}

impl WeightTable {
    pub fn weights(&self) -> Vec<u32> {
        self.entries.iter().map(|(_, w)| *w).collect()
    }

    pub fn weight(&self, version: &VersionId) -> Option<u32> {
        self.entries
            .iter()
            .find(|(v, _)| v == version)
            .map(|(_, w)| *w)
    }

    pub fn versions(&self) -> impl Iterator<Item = &VersionId> {
        self.entries.iter().map(|(v, _)| v)
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.entries.iter().map(|(_, w)| u64::from(*w)).sum()
    }
}

fn weight_for(score: f64) -> u32 {
    let w = libm::round(WEIGHT_SCALE * score.clamp(0.0, 1.0));
    (w as u32).max(1)
}

/// Builds a generation-0 table. Every version gets a weight of at least 1 so
/// a live version always sees some traffic.
pub fn derive_weights(scores: &[(VersionId, f64)]) -> WeightTable {
    WeightTable {
        entries: scores
            .iter()
            .map(|(v, s)| (v.clone(), weight_for(*s)))
            .collect(),
        generation: 0,
    }
}

/// Smooth weighted round-robin over a [`WeightTable`].
#[derive(Debug, Clone)]
pub struct SmoothRouter {
    table: WeightTable,
    current: Vec<i64>,
}

impl SmoothRouter {
    /// # Panics
    /// If `table` is empty.
    pub fn new(table: WeightTable) -> Self {
        assert!(!table.is_empty(), "router needs at least one version");
        let current = alloc::vec![0; table.len()];
        Self { table, current }
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    /// Index (in table order) of the version that serves the next request.
    pub fn next_index(&mut self) -> usize {
        let total = self.table.total_weight() as i64;
        let mut best = 0;
        for (cur, (_, w)) in self.current.iter_mut().zip(&self.table.entries) {
            *cur += i64::from(*w);
        }
        for i in 1..self.current.len() {
            // strict: ties stay with the lower index
            if self.current[i] > self.current[best] {
                best = i;
            }
        }
        self.current[best] -= total;
        best
    }

    pub fn next_version(&mut self) -> &VersionId {
        let idx = self.next_index();
        &self.table.entries[idx].0
    }

    /// Swaps in weights derived from `scores`, bumps the generation and
    /// restarts the interleaving from zero.
    pub fn reconfigure(&mut self, scores: &[(VersionId, f64)]) -> &WeightTable {
        let generation = self.table.generation + 1;
        self.table = WeightTable {
            generation,
            ..derive_weights(scores)
        };
        self.current = alloc::vec![0; self.table.len()];
        &self.table
    }
}
