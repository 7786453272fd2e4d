//! Short-term tracker pool: initialisation, proliferation, mutation and
//! population regulation.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::encoding::{band, Category, CategorySeq};
use crate::error::{Error, Result};
use crate::matching::MatchResult;

/// Generation index. Generation 0 is initialisation; the loop runs from 1.
pub type Generation = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Naive,
    Clone,
    MemoryClone,
}

/// A candidate pattern and its lineage record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tracker {
    pub id: u64,
    pub values: CategorySeq,
    pub origin: Origin,
    pub birth_gen: Generation,
    pub best_sf: usize,
    pub best_ml: usize,
    pub last_improvement_gen: Generation,
}

impl Tracker {
    pub fn new(id: u64, values: CategorySeq, origin: Origin, birth_gen: Generation) -> Self {
        Tracker { id, values, origin, birth_gen, best_sf: 0, best_ml: 0, last_improvement_gen: birth_gen }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether `pattern` appears as a contiguous run of this tracker's values.
    pub fn contains(&self, pattern: &[Category]) -> bool {
        !pattern.is_empty() && self.values.windows(pattern.len()).any(|w| w == pattern)
    }

    /// Raises the best-to-date record to include `m` and stamps the improvement.
    pub fn record_improvement(&mut self, m: &MatchResult, gen: Generation) {
        self.best_sf = self.best_sf.max(m.sf);
        self.best_ml = self.best_ml.max(m.ml);
        self.last_improvement_gen = gen;
    }
}

/// Monotonic tracker id allocator; one per run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct IdSource {
    next: u64,
}

impl IdSource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_id(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }

    /// Number of ids handed out so far.
    pub fn issued(&self) -> u64 {
        self.next
    }
}

/// Tunables of the tracker pool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub init_size: usize,
    pub init_len_min: usize,
    pub init_len_max: usize,
    pub gaussian_mean: f64,
    pub gaussian_std: f64,
    pub band_width: f64,
    pub clone_factor: usize,
    pub mutation_extend_prob: f64,
    pub apoptosis_rate: f64,
    pub min_pool: usize,
    pub clone_lifespan: Generation,
    pub bind_threshold: f64,
    pub shortening_enabled: bool,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig::with_band_width(1.0)
    }
}

impl PoolConfig {
    /// Defaults, with the Gaussian spread set to two band widths.
    pub fn with_band_width(band_width: f64) -> Self {
        PoolConfig {
            init_size: 20,
            init_len_min: 1,
            init_len_max: 4,
            gaussian_mean: 0.0,
            gaussian_std: 2.0 * band_width,
            band_width,
            clone_factor: 1,
            mutation_extend_prob: 0.5,
            apoptosis_rate: 0.10,
            min_pool: 20,
            clone_lifespan: 5,
            bind_threshold: 0.0,
            shortening_enabled: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.init_size < 1 || self.min_pool < 1 || self.clone_factor < 1 {
            return fail("init_size, min_pool and clone_factor must be at least 1".into());
        }
        if self.init_len_min < 1 || self.init_len_min > self.init_len_max {
            return fail(format!(
                "init length range {}..={} must be non-empty and start at 1 or more",
                self.init_len_min, self.init_len_max
            ));
        }
        if self.clone_lifespan < 1 {
            return fail("clone_lifespan must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.mutation_extend_prob) {
            return fail(format!("mutation_extend_prob {} not in [0, 1]", self.mutation_extend_prob));
        }
        if !(0.0..1.0).contains(&self.apoptosis_rate) {
            return fail(format!("apoptosis_rate {} not in [0, 1)", self.apoptosis_rate));
        }
        if !(self.band_width.is_finite() && self.band_width > 0.0) {
            return fail(format!("band_width {} must be positive", self.band_width));
        }
        band(0.0, self.band_width)?;
        if !self.gaussian_mean.is_finite() || !(self.gaussian_std.is_finite() && self.gaussian_std >= 0.0) {
            return fail("gaussian_mean must be finite and gaussian_std non-negative".into());
        }
        if !(self.bind_threshold.is_finite() && self.bind_threshold >= 0.0) {
            return fail(format!("bind_threshold {} must be non-negative", self.bind_threshold));
        }
        Ok(())
    }

    fn normal(&self) -> Normal<f64> {
        Normal::new(self.gaussian_mean, self.gaussian_std).expect("validated gaussian parameters")
    }
}

/// One Gaussian draw, banded onto the category alphabet.
pub fn random_estimate<R: Rng + ?Sized>(config: &PoolConfig, rng: &mut R) -> Category {
    let draw = config.normal().sample(rng);
    band(draw, config.band_width).expect("validated band width")
}

/// `config.init_size` naive trackers born at `gen`.
pub fn init_pool<R: Rng + ?Sized>(
    config: &PoolConfig,
    rng: &mut R,
    ids: &mut IdSource,
    gen: Generation,
) -> Vec<Tracker> {
    random_trackers(config.init_size, config, rng, ids, gen)
}

pub(crate) fn random_trackers<R: Rng + ?Sized>(
    count: usize,
    config: &PoolConfig,
    rng: &mut R,
    ids: &mut IdSource,
    gen: Generation,
) -> Vec<Tracker> {
    (0..count)
        .map(|_| {
            let len = rng.random_range(config.init_len_min..=config.init_len_max);
            let values = (0..len).map(|_| random_estimate(config, rng)).collect();
            Tracker::new(ids.next_id(), values, Origin::Naive, gen)
        })
        .collect()
}

/// Whether a bound tracker matched a repeating trend and improved on its
/// best stimulation or match length to date.
pub fn proliferation_check(tracker: &Tracker, m: &MatchResult) -> bool {
    m.is_trend() && (m.sf > tracker.best_sf || m.ml > tracker.best_ml)
}

/// Clones to create for a proliferating tracker, proportional to match length.
pub fn clone_count(m: &MatchResult, config: &PoolConfig) -> usize {
    config.clone_factor * m.ml
}

/// A mutated clone of `parent`: either one new estimate appended to the end,
/// or one uniformly chosen value removed.
pub fn mutate<R: Rng + ?Sized>(
    parent: &Tracker,
    config: &PoolConfig,
    rng: &mut R,
    ids: &mut IdSource,
    gen: Generation,
) -> Tracker {
    assert!(!parent.is_empty(), "tracker {} has no values", parent.id);
    let extend = !config.shortening_enabled || rng.random_bool(config.mutation_extend_prob);
    let mut values = parent.values.clone();
    if extend || values.len() == 1 {
        values.push(random_estimate(config, rng));
    } else {
        let at = rng.random_range(0..values.len());
        values.remove(at);
    }
    Tracker {
        id: ids.next_id(),
        values,
        origin: Origin::Clone,
        birth_gen: gen,
        best_sf: parent.best_sf,
        best_ml: parent.best_ml,
        last_improvement_gen: gen,
    }
}

/// Number of trackers random apoptosis removes from a pool of `n`.
pub fn apoptosis_count(n: usize, config: &PoolConfig) -> usize {
    // tolerance keeps e.g. 0.1 * 30 from flooring below 3
    ((config.apoptosis_rate * n as f64) + 1e-9).floor() as usize
}

/// Removes a uniformly chosen fraction of the pool regardless of affinity or
/// origin. Survivors keep their order.
pub fn apoptose<R: Rng + ?Sized>(pool: &mut Vec<Tracker>, config: &PoolConfig, rng: &mut R) {
    let n = pool.len();
    let k = apoptosis_count(n, config);
    if k == 0 {
        return;
    }
    let mut doomed = vec![false; n];
    for i in index::sample(rng, n, k) {
        doomed[i] = true;
    }
    let mut i = 0;
    pool.retain(|_| {
        let keep = !doomed[i];
        i += 1;
        keep
    });
}

/// Drops clones that have gone `clone_lifespan` generations without
/// improving. Naive trackers and memory clones are exempt.
pub fn cull_stale_clones(pool: &mut Vec<Tracker>, config: &PoolConfig, gen: Generation) {
    pool.retain(|t| {
        t.origin != Origin::Clone || gen.saturating_sub(t.last_improvement_gen) < config.clone_lifespan
    });
}

/// Tops the pool back up to `min_pool` with exact copies of uniformly chosen
/// survivors. An empty pool is re-seeded with fresh naive trackers.
pub fn homeostasis<R: Rng + ?Sized>(
    pool: &mut Vec<Tracker>,
    config: &PoolConfig,
    rng: &mut R,
    ids: &mut IdSource,
    gen: Generation,
) {
    if pool.is_empty() {
        log::warn!("tracker pool empty at generation {gen}; re-seeding");
        pool.extend(init_pool(config, rng, ids, gen));
    }
    let survivors = pool.len();
    while pool.len() < config.min_pool {
        let src = &pool[rng.random_range(0..survivors)];
        let copy = Tracker { id: ids.next_id(), ..src.clone() };
        pool.push(copy);
    }
}
