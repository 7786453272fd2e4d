//! The generation loop and declarative presentation schedules.
//!
//! Each generation runs, in order: binding of every tracker to the antigen
//! presented (if a phase is active), proliferation and mutation, memory
//! transfer, random apoptosis, stale-clone culling and homeostasis. All
//! random draws for one run come from a single seeded stream, consumed in a
//! fixed order: initialisation, then per generation the mutation decisions
//! in ascending tracker id order, apoptosis selection and homeostasis
//! selection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{Antigen, Category, CategorySeq};
use crate::error::{Error, Result};
use crate::matching::{longest_match, MatchResult, TrendSet};
use crate::memory::MemoryPool;
use crate::population::{
    apoptose, clone_count, cull_stale_clones, homeostasis, init_pool, mutate, proliferation_check,
    Generation, IdSource, PoolConfig, Tracker,
};

/// Random stream used by every run.
pub type RunRng = ChaCha8Rng;

/// What happens to the tracker pool when a phase begins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolAction {
    None,
    /// Replace the pool with the random pool created at generation 0.
    ResetToInitialPool,
    /// Replace the pool with clones of the long-term memory.
    FeedbackFromMemory,
}

/// One antigen presented over an inclusive window of generations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresentationPhase {
    pub start_gen: Generation,
    pub end_gen: Generation,
    pub antigen: Antigen,
    /// Generation `start_gen + k - 1` presents the first `k` values.
    pub incremental: bool,
    pub pool_action_at_start: PoolAction,
}

impl PresentationPhase {
    /// An incremental phase spanning exactly one generation per antigen value.
    pub fn incremental(start_gen: Generation, antigen: Antigen, action: PoolAction) -> Self {
        let end_gen = start_gen + antigen.len().max(1) as Generation - 1;
        PresentationPhase { start_gen, end_gen, antigen, incremental: true, pool_action_at_start: action }
    }

    pub fn contains(&self, gen: Generation) -> bool {
        (self.start_gen..=self.end_gen).contains(&gen)
    }

    /// The values presented at `gen`, which must lie inside the phase.
    pub fn presented(&self, gen: Generation) -> &[Category] {
        if self.incremental {
            let k = (gen - self.start_gen + 1) as usize;
            &self.antigen.seq[..k.min(self.antigen.len())]
        } else {
            &self.antigen.seq
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub phases: Vec<PresentationPhase>,
    pub total_generations: Generation,
    pub truth: TrendSet,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.total_generations < 1 {
            return bad("total_generations must be at least 1".into());
        }
        let mut last_end: Generation = 0;
        for (i, p) in self.phases.iter().enumerate() {
            if p.antigen.is_empty() {
                return bad(format!("phase {i} has an empty antigen"));
            }
            if p.start_gen < 1 || p.start_gen > p.end_gen {
                return bad(format!("phase {i} window {}..={} is invalid", p.start_gen, p.end_gen));
            }
            if p.end_gen > self.total_generations {
                return bad(format!(
                    "phase {i} ends at {} beyond total_generations {}",
                    p.end_gen, self.total_generations
                ));
            }
            if i > 0 && p.start_gen <= last_end {
                return bad(format!("phase {i} overlaps or precedes phase {}", i - 1));
            }
            let window = (p.end_gen - p.start_gen + 1) as usize;
            if p.incremental && window < p.antigen.len() {
                return bad(format!(
                    "phase {i} window of {window} generations cannot present {} values",
                    p.antigen.len()
                ));
            }
            last_end = p.end_gen;
        }
        Ok(())
    }

    pub fn phase_at(&self, gen: Generation) -> Option<&PresentationPhase> {
        self.phases.iter().find(|p| p.contains(gen))
    }
}

/// Per-generation trace entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: Generation,
    /// Pool size after regulation.
    pub pool_size: usize,
    /// Pool size after proliferation, before apoptosis.
    pub peak_size: usize,
    pub proliferating: usize,
    pub clones_created: usize,
    pub memory_size: usize,
    /// Trackers containing each truth trend, in truth order.
    pub matching: Vec<usize>,
}

/// Complete trace of one seeded run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub seed: u64,
    pub truth: Vec<CategorySeq>,
    pub records: Vec<GenerationRecord>,
    pub memory: MemoryPool,
    /// Every tracker created over the run, including the initial pool.
    pub trackers_created: u64,
}

impl RunStats {
    pub fn max_pool_size(&self) -> usize {
        self.records.iter().map(|r| r.peak_size).max().unwrap_or(0)
    }
}

/// Mutable state of a run between generations.
#[derive(Clone, Debug)]
pub struct EngineState {
    pub pool: Vec<Tracker>,
    pub memory: MemoryPool,
    pub ids: IdSource,
    pub generation: Generation,
}

impl EngineState {
    pub fn new(pool: Vec<Tracker>, ids: IdSource) -> Self {
        EngineState { pool, memory: MemoryPool::new(), ids, generation: 0 }
    }
}

/// Antigen visible during one generation.
#[derive(Clone, Copy, Debug)]
pub struct Presentation<'a> {
    pub values: &'a [Category],
    pub label: &'a str,
}

fn bind_all(pool: &[Tracker], antigen: &[Category], threshold: f64) -> Result<Vec<MatchResult>> {
    pool.par_iter().map(|t| longest_match(&t.values, antigen, threshold)).collect()
}

/// Advances `state` by one generation and returns its trace entry.
pub fn run_generation(
    state: &mut EngineState,
    presentation: Option<Presentation<'_>>,
    config: &PoolConfig,
    truth: &[CategorySeq],
    rng: &mut RunRng,
) -> Result<GenerationRecord> {
    state.generation += 1;
    let gen = state.generation;
    let mut proliferating = 0;
    let mut clones = Vec::new();

    if let Some(p) = presentation {
        let matches = bind_all(&state.pool, p.values, config.bind_threshold)?;
        for (tracker, m) in state.pool.iter_mut().zip(&matches) {
            // Every trend match is a memory candidate, not just the proliferating ones.
            if m.is_trend() {
                state.memory.consider(tracker, m, gen, p.label)?;
            }
            if !proliferation_check(tracker, m) {
                continue;
            }
            proliferating += 1;
            tracker.record_improvement(m, gen);
            for _ in 0..clone_count(m, config) {
                clones.push(mutate(tracker, config, rng, &mut state.ids, gen));
            }
        }
    }

    let clones_created = clones.len();
    state.pool.extend(clones);
    let peak_size = state.pool.len();

    apoptose(&mut state.pool, config, rng);
    cull_stale_clones(&mut state.pool, config, gen);
    homeostasis(&mut state.pool, config, rng, &mut state.ids, gen);

    let matching = truth.iter().map(|t| state.pool.iter().filter(|tr| tr.contains(t)).count()).collect();
    Ok(GenerationRecord {
        generation: gen,
        pool_size: state.pool.len(),
        peak_size,
        proliferating,
        clones_created,
        memory_size: state.memory.len(),
        matching,
    })
}

/// Runs one seeded experiment end to end.
pub fn run_experiment(spec: &ExperimentSpec, config: &PoolConfig, seed: u64) -> Result<RunStats> {
    run_experiment_with_memory(spec, config, seed, MemoryPool::new())
}

/// As [`run_experiment`], starting from an existing long-term memory.
pub fn run_experiment_with_memory(
    spec: &ExperimentSpec,
    config: &PoolConfig,
    seed: u64,
    memory: MemoryPool,
) -> Result<RunStats> {
    run_experiment_observed(spec, config, seed, memory, |_, _| {})
}

/// As [`run_experiment_with_memory`], calling `observe` with the state and
/// record at the end of every generation.
pub fn run_experiment_observed<F>(
    spec: &ExperimentSpec,
    config: &PoolConfig,
    seed: u64,
    memory: MemoryPool,
    mut observe: F,
) -> Result<RunStats>
where
    F: FnMut(&EngineState, &GenerationRecord),
{
    spec.validate()?;
    config.validate()?;
    let mut rng = RunRng::seed_from_u64(seed);
    let mut ids = IdSource::new();
    let initial = init_pool(config, &mut rng, &mut ids, 0);
    let mut state = EngineState::new(initial.clone(), ids);
    state.memory = memory;
    let truth: Vec<CategorySeq> = spec.truth.iter().cloned().collect();
    let mut records = Vec::with_capacity(spec.total_generations as usize);

    for gen in 1..=spec.total_generations {
        let phase = spec.phase_at(gen);
        if let Some(p) = phase.filter(|p| p.start_gen == gen) {
            match p.pool_action_at_start {
                PoolAction::None => {}
                PoolAction::ResetToInitialPool => {
                    state.pool =
                        initial.iter().map(|t| Tracker { id: state.ids.next_id(), ..t.clone() }).collect();
                }
                PoolAction::FeedbackFromMemory => {
                    let memory = &state.memory;
                    state.pool = memory.feedback_clones(config, &mut rng, &mut state.ids, gen);
                }
            }
        }
        let presentation = phase.map(|p| Presentation { values: p.presented(gen), label: &p.antigen.label });
        let record = run_generation(&mut state, presentation, config, &truth, &mut rng)?;
        observe(&state, &record);
        records.push(record);
    }

    Ok(RunStats { seed, truth, records, memory: state.memory, trackers_created: state.ids.issued() })
}

/// `n_runs` independent runs seeded `base_seed..base_seed + n_runs`, in seed
/// order.
pub fn run_batch(
    spec: &ExperimentSpec,
    config: &PoolConfig,
    n_runs: usize,
    base_seed: u64,
) -> Result<Vec<RunStats>> {
    if n_runs < 1 {
        return Err(Error::Argument("n_runs must be at least 1".into()));
    }
    spec.validate()?;
    config.validate()?;
    (0..n_runs as u64).into_par_iter().map(|i| run_experiment(spec, config, base_seed + i)).collect()
}
