//! Trend evaluation over banded price-change series with a population of
//! self-regulating trackers and a long-term memory of the most efficient
//! match found for each repeating trend.

pub mod baseline;
pub mod config;
pub mod encoding;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod matching;
pub mod memory;
pub mod population;
pub mod presets;
pub mod report;

pub use encoding::{band, encode, price_changes, Antigen, Category, CategorySeq, PricePoint};
pub use engine::{
    run_batch, run_experiment, run_experiment_with_memory, ExperimentSpec, PoolAction, PresentationPhase,
    RunStats,
};
pub use error::{Error, Result};
pub use matching::{count_occurrences, enumerate_trends, longest_match, MatchResult, TrendSet};
pub use memory::{MemoryCell, MemoryPool};
pub use population::{PoolConfig, Tracker};
