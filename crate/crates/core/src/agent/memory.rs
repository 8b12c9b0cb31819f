//! Working memory, long-term memory and object memory.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_WM_CAPACITY: usize = 10;
pub const DEFAULT_RETRIEVAL_K: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WmEntry {
    pub round: u64,
    pub text: String,
}

/// Fixed-length FIFO of recent actions (performed and received).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkingMemory {
    capacity: usize,
    entries: VecDeque<WmEntry>,
}

impl WorkingMemory {
    /// `capacity` is clamped to at least one.
    pub fn new(capacity: usize) -> Self {
        Self { capacity: capacity.max(1), entries: VecDeque::new() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, round: u64, text: impl Into<String>) {
        self.entries.push_back(WmEntry { round, text: text.into() });
        while self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &WmEntry> {
        self.entries.iter()
    }
}

impl Default for WorkingMemory {
    fn default() -> Self {
        Self::new(DEFAULT_WM_CAPACITY)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongTermMemoryEntry {
    pub round: u64,
    pub cognition_text: String,
    pub action_text: String,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("embedding has dimension {found}, memory uses {expected}")]
pub struct DimensionMismatch {
    pub expected: usize,
    pub found: usize,
}

/// Chronological store of cognition/action pairs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LongTermMemory {
    entries: Vec<LongTermMemoryEntry>,
}

impl LongTermMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> Option<usize> {
        self.entries.first().map(|e| e.embedding.len())
    }

    pub fn push(&mut self, entry: LongTermMemoryEntry) -> Result<(), DimensionMismatch> {
        if let Some(expected) = self.dim() {
            if expected != entry.embedding.len() {
                return Err(DimensionMismatch { expected, found: entry.embedding.len() });
            }
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[LongTermMemoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (libm::sqrt(na) * libm::sqrt(nb))
    }
}

/// Top-`k` entries by cosine similarity to `query`, most similar first;
/// equal similarities put the newer entry first.
pub fn retrieve_memories<'a>(
    ltm: &'a LongTermMemory,
    query: &[f64],
    k: usize,
) -> Result<Vec<(&'a LongTermMemoryEntry, f64)>, DimensionMismatch> {
    if let Some(expected) = ltm.dim() {
        if expected != query.len() {
            return Err(DimensionMismatch { expected, found: query.len() });
        }
    }
    let mut scored: Vec<(usize, f64)> =
        ltm.entries.iter().enumerate().map(|(i, e)| (i, cosine(&e.embedding, query))).collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.0.cmp(&a.0)));
    scored.truncate(k);
    Ok(scored.into_iter().map(|(i, s)| (&ltm.entries[i], s)).collect())
}

/// Latest impression per target id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectMemory {
    pub impressions: BTreeMap<String, String>,
}

impl ObjectMemory {
    pub fn get(&self, target: &str) -> Option<&str> {
        self.impressions.get(target).map(String::as_str)
    }

    pub fn set(&mut self, target: impl Into<String>, text: impl Into<String>) {
        self.impressions.insert(target.into(), text.into());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    #[test]
    fn fifo_eviction() {
        let mut wm = WorkingMemory::new(3);
        for i in 1..=4 {
            wm.push(i, format!("e{i}"));
        }
        let texts: Vec<&str> = wm.iter().map(|e| e.text.as_str()).collect();
        assert_eq!(texts, ["e2", "e3", "e4"]);
        let mut empty = WorkingMemory::new(3);
        empty.push(0, "x");
        assert_eq!(empty.len(), 1);
    }

    proptest::proptest! {
        #[test]
        fn wm_keeps_suffix(cap in 1usize..15, n in 0usize..100) {
            let mut wm = WorkingMemory::new(cap);
            let pushed: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
            for (i, t) in pushed.iter().enumerate() {
                wm.push(i as u64, t.clone());
            }
            let expect = &pushed[n.saturating_sub(cap)..];
            let got: Vec<String> = wm.iter().map(|e| e.text.clone()).collect();
            proptest::prop_assert_eq!(got.len(), n.min(cap));
            proptest::prop_assert_eq!(&got[..], expect);
        }
    }

    fn entry(round: u64, e: Vec<f64>) -> LongTermMemoryEntry {
        LongTermMemoryEntry { round, cognition_text: format!("c{round}"), action_text: String::new(), embedding: e }
    }

    #[test]
    fn empty_ltm_returns_nothing() {
        assert!(retrieve_memories(&LongTermMemory::new(), &[1.0, 0.0], 5).unwrap().is_empty());
    }

    #[test]
    fn exact_match_wins() {
        let mut ltm = LongTermMemory::new();
        ltm.push(entry(0, vec![0.0, 1.0])).unwrap();
        ltm.push(entry(1, vec![1.0, 0.2])).unwrap();
        let top = retrieve_memories(&ltm, &[0.0, 1.0], 1).unwrap();
        assert_eq!(top[0].0.round, 0);
        assert!((top[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_prefer_newer() {
        let mut ltm = LongTermMemory::new();
        ltm.push(entry(0, vec![1.0, 0.0])).unwrap();
        ltm.push(entry(1, vec![2.0, 0.0])).unwrap();
        let top = retrieve_memories(&ltm, &[1.0, 0.0], 2).unwrap();
        assert_eq!(top[0].0.round, 1);
        assert_eq!(top[1].0.round, 0);
    }

    #[test]
    fn dimension_mismatch() {
        let mut ltm = LongTermMemory::new();
        ltm.push(entry(0, vec![1.0, 0.0])).unwrap();
        assert!(retrieve_memories(&ltm, &[1.0], 1).is_err());
        assert!(ltm.push(entry(1, vec![1.0])).is_err());
    }
}
