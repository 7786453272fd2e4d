//! Long-term memory pool: the least redundant tracker seen for each distinct
//! match sequence.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::CategorySeq;
use crate::error::{Error, Result};
use crate::matching::{MatchResult, TrendSet};
use crate::population::{init_pool, Generation, IdSource, Origin, PoolConfig, Tracker};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryCell {
    pub ms: CategorySeq,
    pub tracker_values: CategorySeq,
    pub redundancy: usize,
    pub created_gen: Generation,
    pub source_antigen: String,
}

/// Result of offering a candidate to the pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Admission {
    Inserted,
    Replaced,
    Unchanged,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryPool {
    cells: BTreeMap<CategorySeq, MemoryCell>,
}

impl MemoryPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, ms: &CategorySeq) -> Option<&MemoryCell> {
        self.cells.get(ms)
    }

    /// Cells in match-sequence order.
    pub fn cells(&self) -> impl Iterator<Item = &MemoryCell> {
        self.cells.values()
    }

    /// Admits a tracker whose match is a repeating trend. A match sequence
    /// not yet held is inserted; a held one is replaced only by a candidate
    /// carrying strictly less redundant information.
    pub fn consider(
        &mut self,
        candidate: &Tracker,
        m: &MatchResult,
        gen: Generation,
        antigen_label: &str,
    ) -> Result<Admission> {
        if m.ml < 2 || m.sf < 2 {
            return Err(Error::ContractViolation(format!(
                "memory candidate {} has ml {} and sf {}; both must be at least 2",
                candidate.id, m.ml, m.sf
            )));
        }
        let cell = MemoryCell {
            ms: m.ms.clone(),
            tracker_values: candidate.values.clone(),
            redundancy: candidate.values.len() - m.ml,
            created_gen: gen,
            source_antigen: antigen_label.to_string(),
        };
        Ok(match self.cells.get_mut(&m.ms) {
            None => {
                self.cells.insert(m.ms.clone(), cell);
                Admission::Inserted
            }
            Some(existing) if cell.redundancy < existing.redundancy => {
                *existing = cell;
                Admission::Replaced
            }
            Some(_) => Admission::Unchanged,
        })
    }

    /// The match sequences held; a trend counts as detected only on exact
    /// equality with one of them.
    pub fn detected_trends(&self) -> TrendSet {
        self.cells.keys().cloned().collect()
    }

    /// Re-populates a tracker pool from memory: one clone per cell, topped up
    /// to `min_pool` with copies of uniformly chosen cells. An empty memory
    /// yields a fresh naive pool.
    pub fn feedback_clones<R: Rng + ?Sized>(
        &self,
        config: &PoolConfig,
        rng: &mut R,
        ids: &mut IdSource,
        gen: Generation,
    ) -> Vec<Tracker> {
        if self.cells.is_empty() {
            let mut pool = init_pool(config, rng, ids, gen);
            crate::population::homeostasis(&mut pool, config, rng, ids, gen);
            return pool;
        }
        let cells: Vec<&MemoryCell> = self.cells.values().collect();
        let clone = |cell: &MemoryCell, ids: &mut IdSource| {
            Tracker::new(ids.next_id(), cell.tracker_values.clone(), Origin::MemoryClone, gen)
        };
        let mut pool: Vec<Tracker> = cells.iter().map(|c| clone(c, ids)).collect();
        while pool.len() < config.min_pool {
            let cell = cells[rng.random_range(0..cells.len())];
            pool.push(clone(cell, ids));
        }
        pool
    }

    /// One `ms;tracker_values;redundancy;created_gen` row per cell.
    pub fn to_rows(&self) -> String {
        let mut out = String::new();
        for c in self.cells.values() {
            let _ = writeln!(
                out,
                "{};{};{};{}",
                c.ms.to_csv_field(),
                c.tracker_values.to_csv_field(),
                c.redundancy,
                c.created_gen
            );
        }
        out
    }

    /// Parses rows written by [`MemoryPool::to_rows`]. The source antigen is
    /// not part of the row format and is set to `label`.
    pub fn from_rows(text: &str, label: &str) -> Result<Self> {
        let mut pool = MemoryPool::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("memory row {}: {what}", lineno + 1));
            let fields: Vec<&str> = line.split(';').collect();
            if fields.len() != 4 {
                return Err(bad("expected 4 ';'-separated fields"));
            }
            let ms: CategorySeq = fields[0].parse()?;
            let tracker_values: CategorySeq = fields[1].parse()?;
            let redundancy: usize = fields[2].trim().parse().map_err(|_| bad("redundancy"))?;
            let created_gen: Generation = fields[3].trim().parse().map_err(|_| bad("created_gen"))?;
            if ms.len() < 2 {
                return Err(bad("match sequence shorter than 2"));
            }
            if tracker_values.len() < ms.len() || redundancy != tracker_values.len() - ms.len() {
                return Err(bad("redundancy does not equal tracker length minus match length"));
            }
            if pool.cells.contains_key(&ms) {
                return Err(bad("duplicate match sequence"));
            }
            pool.cells.insert(
                ms.clone(),
                MemoryCell { ms, tracker_values, redundancy, created_gen, source_antigen: label.to_string() },
            );
        }
        Ok(pool)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(values: &[f64]) -> CategorySeq {
        CategorySeq::from_values(values).unwrap()
    }

    fn candidate(values: &[f64], ms: &[f64]) -> (Tracker, MatchResult) {
        let t = Tracker::new(0, seq(values), Origin::Clone, 1);
        let m = MatchResult {
            ms: seq(ms),
            sf: 2,
            ml: ms.len(),
            redundancy: values.len() - ms.len(),
            affinity: 0.0,
        };
        (t, m)
    }

    #[test]
    fn admission_and_replacement() {
        let mut pool = MemoryPool::new();
        let (t, m) = candidate(&[1.0, 2.0, 5.0], &[1.0, 2.0]);
        assert_eq!(pool.consider(&t, &m, 3, "A1").unwrap(), Admission::Inserted);
        assert_eq!(pool.get(&seq(&[1.0, 2.0])).unwrap().redundancy, 1);

        let (t, m) = candidate(&[1.0, 2.0], &[1.0, 2.0]);
        assert_eq!(pool.consider(&t, &m, 5, "A1").unwrap(), Admission::Replaced);
        let cell = pool.get(&seq(&[1.0, 2.0])).unwrap();
        assert_eq!((cell.redundancy, cell.created_gen), (0, 5));

        let (t, m) = candidate(&[0.5, 1.0, 2.0, 0.5], &[1.0, 2.0]);
        assert_eq!(pool.consider(&t, &m, 6, "A1").unwrap(), Admission::Unchanged);
        assert_eq!(pool.get(&seq(&[1.0, 2.0])).unwrap().redundancy, 0);

        // equal redundancy does not replace
        let (t, m) = candidate(&[1.0, 2.0], &[1.0, 2.0]);
        assert_eq!(pool.consider(&t, &m, 7, "A1").unwrap(), Admission::Unchanged);
        assert_eq!(pool.len(), 1);
    }

    #[test]
    fn non_trend_candidates_are_rejected() {
        let mut pool = MemoryPool::new();
        let (t, mut m) = candidate(&[1.0, 2.0], &[1.0, 2.0]);
        m.sf = 1;
        assert!(matches!(pool.consider(&t, &m, 1, "A"), Err(Error::ContractViolation(_))));
        let (t, m) = candidate(&[1.0], &[1.0]);
        assert!(pool.consider(&t, &m, 1, "A").is_err());
        assert!(pool.is_empty());
    }

    #[test]
    fn detected_trends_is_exact_projection() {
        let mut pool = MemoryPool::new();
        assert!(pool.detected_trends().is_empty());
        let (t, m) = candidate(&[1.0, 2.0, 1.0], &[1.0, 2.0, 1.0]);
        pool.consider(&t, &m, 1, "A1").unwrap();
        let d = pool.detected_trends();
        assert!(d.contains(&seq(&[1.0, 2.0, 1.0])));
        assert!(!d.contains(&seq(&[1.0, 2.0])));
        let (t, m) = candidate(&[2.0, 1.0], &[2.0, 1.0]);
        pool.consider(&t, &m, 1, "A1").unwrap();
        assert_eq!(pool.detected_trends().len(), 2);
    }

    #[test]
    fn feedback_clones_cover_every_cell() {
        let config = PoolConfig::default();
        let mut pool = MemoryPool::new();
        for ms in [[1.0, 2.0], [2.0, 1.0], [2.0, -0.5]] {
            let (t, m) = candidate(&[ms[0], ms[1], 9.0], &ms);
            pool.consider(&t, &m, 2, "A1").unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let clones = pool.feedback_clones(&config, &mut rng, &mut IdSource::new(), 30);
        assert_eq!(clones.len(), 20);
        for cell in pool.cells() {
            assert!(clones.iter().any(|t| t.values == cell.tracker_values));
        }
        for t in &clones {
            assert_eq!(t.origin, Origin::MemoryClone);
            assert_eq!((t.best_sf, t.best_ml, t.birth_gen), (0, 0, 30));
        }
    }

    #[test]
    fn feedback_clones_one_per_cell_when_large() {
        let config = PoolConfig::default();
        let mut pool = MemoryPool::new();
        for i in 0..25 {
            let ms = [i as f64, 1.0];
            let (t, m) = candidate(&ms, &ms);
            pool.consider(&t, &m, 2, "A").unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let clones = pool.feedback_clones(&config, &mut rng, &mut IdSource::new(), 30);
        assert_eq!(clones.len(), 25);
    }

    #[test]
    fn feedback_from_empty_memory_is_random() {
        let config = PoolConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let clones = MemoryPool::new().feedback_clones(&config, &mut rng, &mut IdSource::new(), 30);
        assert_eq!(clones.len(), 20);
        assert!(clones.iter().all(|t| t.origin == Origin::Naive));
    }

    #[test]
    fn rows_round_trip() {
        let mut pool = MemoryPool::new();
        let (t, m) = candidate(&[2.0, 1.0, 2.0, -0.5, 1.5], &[2.0, 1.0, 2.0, -0.5]);
        pool.consider(&t, &m, 33, "A2").unwrap();
        let (t, m) = candidate(&[1.0, 2.0], &[1.0, 2.0]);
        pool.consider(&t, &m, 6, "A1").unwrap();
        let rows = pool.to_rows();
        assert!(rows.contains("2,1,2,-0.5;2,1,2,-0.5,1.5;1;33\n"));
        let back = MemoryPool::from_rows(&rows, "loaded").unwrap();
        assert_eq!(back.to_rows(), rows);
        assert_eq!(back.len(), 2);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(MemoryPool::from_rows("1,2;1,2;0", "x").is_err());
        assert!(MemoryPool::from_rows("1,2;1,2,3;0;1", "x").is_err());
        assert!(MemoryPool::from_rows("1;1;0;1", "x").is_err());
        assert!(MemoryPool::from_rows("1,2;1,2;0;1\n1,2;1,2;0;2", "x").is_err());
    }
}
