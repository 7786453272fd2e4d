//! Random-search comparator: a single random population bound once.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::Antigen;
use crate::error::Result;
use crate::matching::{longest_match, TrendSet};
use crate::memory::MemoryPool;
use crate::population::{random_trackers, IdSource, PoolConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSearchResult {
    pub population_size: usize,
    pub detected: TrendSet,
    pub memory: MemoryPool,
}

/// Generates `population_size` trackers the way the initial pool is built,
/// binds each to the whole antigen and keeps every trend match under the
/// memory admission rule.
pub fn random_search<R: Rng + ?Sized>(
    antigen: &Antigen,
    population_size: usize,
    config: &PoolConfig,
    rng: &mut R,
) -> Result<RandomSearchResult> {
    config.validate()?;
    let trackers = random_trackers(population_size, config, rng, &mut IdSource::new(), 0);
    let mut memory = MemoryPool::new();
    for t in &trackers {
        let m = longest_match(&t.values, &antigen.seq, config.bind_threshold)?;
        if m.is_trend() {
            memory.consider(t, &m, 0, &antigen.label)?;
        }
    }
    Ok(RandomSearchResult { population_size, detected: memory.detected_trends(), memory })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::matching::enumerate_trends;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_population_detects_nothing() {
        let config = PoolConfig::with_band_width(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = random_search(&fixtures::antigen_a(), 0, &config, &mut rng).unwrap();
        assert!(r.detected.is_empty());
        assert!(r.memory.is_empty());
    }

    #[test]
    fn detections_are_true_trends() {
        let config = PoolConfig::with_band_width(0.5);
        let a = fixtures::antigen_a();
        let truth = enumerate_trends(&a.seq);
        for seed in 0..3 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = random_search(&a, 4_000, &config, &mut rng).unwrap();
            assert!(r.detected.is_subset(&truth));
            assert_eq!(r.detected.len(), r.memory.len());
        }
    }
}
