//! Detection metrics, population time series and their CSV/JSON renderings.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoding::CategorySeq;
use crate::engine::RunStats;
use crate::error::{Error, Result};
use crate::fixtures::trend_label;
use crate::matching::TrendSet;
use crate::memory::MemoryPool;

/// Short name for a trend: its reference label when it has one, else its values.
pub fn label_of(trend: &CategorySeq) -> String {
    trend_label(trend).unwrap_or_else(|| trend.to_string())
}

/// One decimal place, as a percentage. Halves round away from zero, so 77/80
/// prints as 96.3% rather than 96.2%.
pub fn percent(fraction: f64) -> String {
    format!("{:.1}%", (1000.0 * fraction).round() / 10.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub label: String,
    pub trend: CategorySeq,
    /// Runs whose final memory holds a cell keyed exactly by the trend.
    pub detected: usize,
    /// Sum of the matching cells' redundancy over those runs.
    pub redundant_values: usize,
    /// Sum of the matching cells' tracker lengths over those runs.
    pub stored_values: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionTable {
    pub runs: usize,
    pub rows: Vec<TrendRow>,
    pub total_detected: usize,
    pub detection_rate: f64,
    pub total_redundant: usize,
    pub total_stored: usize,
    pub inefficiency_rate: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-trend detection and redundancy over the final memories of `runs`.
pub fn detection_table(runs: &[RunStats], truth: &TrendSet) -> Result<DetectionTable> {
    if runs.is_empty() {
        return Err(Error::Argument("detection table needs at least one run".into()));
    }
    for r in runs {
        if !r.truth.iter().eq(truth.iter()) {
            return Err(Error::Argument(format!("run with seed {} has a different truth set", r.seed)));
        }
    }
    let rows: Vec<TrendRow> = truth
        .iter()
        .map(|t| {
            let cells: Vec<_> = runs.iter().filter_map(|r| r.memory.get(t)).collect();
            TrendRow {
                label: label_of(t),
                trend: t.clone(),
                detected: cells.len(),
                redundant_values: cells.iter().map(|c| c.redundancy).sum(),
                stored_values: cells.iter().map(|c| c.tracker_values.len()).sum(),
            }
        })
        .collect();
    let total_detected = rows.iter().map(|r| r.detected).sum();
    let total_redundant = rows.iter().map(|r| r.redundant_values).sum();
    let total_stored = rows.iter().map(|r| r.stored_values).sum();
    Ok(DetectionTable {
        runs: runs.len(),
        detection_rate: ratio(total_detected, truth.len() * runs.len()),
        inefficiency_rate: ratio(total_redundant, total_stored),
        rows,
        total_detected,
        total_redundant,
        total_stored,
    })
}

/// Redundant values over stored values, across cells whose ms is a truth
/// trend. Zero when no such cell exists.
pub fn inefficiency<'a, I>(pools: I, truth: &TrendSet) -> f64
where
    I: IntoIterator<Item = &'a MemoryPool>,
{
    let (mut redundant, mut stored) = (0, 0);
    for pool in pools {
        for cell in pool.cells().filter(|c| truth.contains(&c.ms)) {
            redundant += cell.redundancy;
            stored += cell.tracker_values.len();
        }
    }
    ratio(redundant, stored)
}

impl DetectionTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trend", "values", "detected", "runs", "redundant_values", "stored_values"])?;
        for r in &self.rows {
            w.write_record([
                r.label.clone(),
                r.trend.to_csv_field(),
                r.detected.to_string(),
                self.runs.to_string(),
                r.redundant_values.to_string(),
                r.stored_values.to_string(),
            ])?;
        }
        w.write_record([
            "total".to_string(),
            String::new(),
            self.total_detected.to_string(),
            self.runs.to_string(),
            self.total_redundant.to_string(),
            self.total_stored.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for DetectionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<6} {:<24} {:>9} {:>10}", "trend", "values", "detected", "redundant")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<6} {:<24} {:>9} {:>10}",
                r.label,
                r.trend.to_string(),
                format!("{}/{}", r.detected, self.runs),
                r.redundant_values
            )?;
        }
        writeln!(
            f,
            "total  {:<24} {:>9} {:>10}",
            "",
            format!("{}/{}", self.total_detected, self.rows.len() * self.runs),
            self.total_redundant
        )?;
        writeln!(f, "detection rate    {}", percent(self.detection_rate))?;
        write!(f, "inefficiency rate {}", percent(self.inefficiency_rate))
    }
}

/// Cross-run summary of one generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub generation: u32,
    pub pool_mean: f64,
    pub pool_min: usize,
    pub pool_max: usize,
    pub peak_mean: f64,
    pub memory_mean: f64,
    /// Mean count of trackers containing each truth trend.
    pub matching_mean: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationSeries {
    pub trends: Vec<String>,
    pub rows: Vec<SeriesRow>,
}

/// Per-generation pool statistics across runs, which must share a schedule.
pub fn population_series(runs: &[RunStats]) -> PopulationSeries {
    let Some(first) = runs.first() else {
        return PopulationSeries { trends: Vec::new(), rows: Vec::new() };
    };
    let n = runs.len() as f64;
    let rows = (0..first.records.len())
        .map(|g| {
            let recs: Vec<_> = runs.iter().map(|r| &r.records[g]).collect();
            let sizes: Vec<usize> = recs.iter().map(|r| r.pool_size).collect();
            SeriesRow {
                generation: recs[0].generation,
                pool_mean: sizes.iter().sum::<usize>() as f64 / n,
                pool_min: *sizes.iter().min().unwrap(),
                pool_max: *sizes.iter().max().unwrap(),
                peak_mean: recs.iter().map(|r| r.peak_size).sum::<usize>() as f64 / n,
                memory_mean: recs.iter().map(|r| r.memory_size).sum::<usize>() as f64 / n,
                matching_mean: (0..first.truth.len())
                    .map(|t| recs.iter().map(|r| r.matching[t]).sum::<usize>() as f64 / n)
                    .collect(),
            }
        })
        .collect();
    PopulationSeries { trends: first.truth.iter().map(label_of).collect(), rows }
}

impl PopulationSeries {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> =
            ["generation", "pool_mean", "pool_min", "pool_max", "peak_mean", "memory_mean"]
                .map(String::from)
                .to_vec();
        header.extend(self.trends.iter().map(|t| format!("matching_{t}")));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.generation.to_string(),
                format!("{:.3}", r.pool_mean),
                r.pool_min.to_string(),
                r.pool_max.to_string(),
                format!("{:.3}", r.peak_mean),
                format!("{:.3}", r.memory_mean),
            ];
            rec.extend(r.matching_mean.iter().map(|m| format!("{m:.3}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes `value` as pretty JSON to `path`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
