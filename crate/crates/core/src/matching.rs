//! Tracker-to-antigen binding and the exhaustive trend oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::encoding::{Category, CategorySeq, MICROS_PER_UNIT};
use crate::error::{Error, Result};

/// Outcome of binding one tracker to one antigen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Match sequence: the tracker window that bound.
    pub ms: CategorySeq,
    /// Stimulation factor: occurrences of `ms` in the antigen.
    pub sf: usize,
    /// Match length, always `ms.len()`.
    pub ml: usize,
    /// Tracker values outside the match sequence.
    pub redundancy: usize,
    /// Largest per-value distance of the winning alignment.
    pub affinity: f64,
}

impl MatchResult {
    /// Whether the match sequence is a repeating trend of the antigen.
    pub fn is_trend(&self) -> bool {
        self.sf > 1 && self.ml > 1
    }
}

/// A set of trends, ordered for stable output.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrendSet(BTreeSet<CategorySeq>);

impl TrendSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, trend: CategorySeq) -> bool {
        self.0.insert(trend)
    }

    pub fn contains(&self, trend: &CategorySeq) -> bool {
        self.0.contains(trend)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CategorySeq> {
        self.0.iter()
    }

    pub fn union(&self, other: &TrendSet) -> TrendSet {
        TrendSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &TrendSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl FromIterator<CategorySeq> for TrendSet {
    fn from_iter<I: IntoIterator<Item = CategorySeq>>(iter: I) -> Self {
        TrendSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a TrendSet {
    type Item = &'a CategorySeq;
    type IntoIter = std::collections::btree_set::Iter<'a, CategorySeq>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for TrendSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn threshold_micros(bind_threshold: f64) -> Result<i64> {
    if !(bind_threshold.is_finite() && bind_threshold >= 0.0) {
        return Err(Error::Argument(format!(
            "bind threshold must be finite and non-negative, got {bind_threshold}"
        )));
    }
    Ok((bind_threshold * MICROS_PER_UNIT as f64).round() as i64)
}

#[inline]
fn binds(a: Category, b: Category, threshold: i64) -> bool {
    (a.micros() - b.micros()).abs() <= threshold
}

fn windows_within(pattern: &[Category], antigen: &[Category], threshold: i64) -> usize {
    if pattern.is_empty() || pattern.len() > antigen.len() {
        return 0;
    }
    antigen
        .windows(pattern.len())
        .filter(|w| w.iter().zip(pattern).all(|(&a, &b)| binds(a, b, threshold)))
        .count()
}

/// Number of (possibly overlapping) positions where `pattern` occurs exactly.
pub fn count_occurrences(pattern: &[Category], antigen: &[Category]) -> Result<usize> {
    if pattern.is_empty() {
        return Err(Error::Argument("empty pattern".into()));
    }
    Ok(windows_within(pattern, antigen, 0))
}

/// Finds the longest contiguous tracker window that binds somewhere in the
/// antigen, with every aligned pair within `bind_threshold`.
///
/// Among windows of maximal length the one with the highest stimulation
/// factor wins; remaining ties go to the leftmost tracker window, and the
/// reported affinity is that of its leftmost antigen alignment.
pub fn longest_match(tracker: &[Category], antigen: &[Category], bind_threshold: f64) -> Result<MatchResult> {
    if tracker.is_empty() {
        return Err(Error::Argument("empty tracker".into()));
    }
    let threshold = threshold_micros(bind_threshold)?;
    let (n, m) = (tracker.len(), antigen.len());

    // run[j + 1] holds the length of the binding run ending at tracker[i], antigen[j].
    let mut prev = vec![0usize; m + 1];
    let mut run = vec![0usize; m + 1];
    let mut best_len = 0;
    // (tracker start, antigen start) of every maximal-length run found so far
    let mut starts: Vec<(usize, usize)> = Vec::new();
    for (i, &t) in tracker.iter().enumerate() {
        for (j, &a) in antigen.iter().enumerate() {
            run[j + 1] = if binds(t, a, threshold) { prev[j] + 1 } else { 0 };
            let len = run[j + 1];
            if len == 0 {
                continue;
            }
            if len > best_len {
                best_len = len;
                starts.clear();
            }
            if len == best_len {
                starts.push((i + 1 - len, j + 1 - len));
            }
        }
        std::mem::swap(&mut prev, &mut run);
    }

    if best_len == 0 {
        return Ok(MatchResult { ms: CategorySeq::default(), sf: 0, ml: 0, redundancy: n, affinity: 0.0 });
    }

    starts.sort_unstable();
    starts.dedup_by_key(|s| s.0);
    let mut best: Option<(usize, usize, usize)> = None; // (sf, tracker start, antigen start)
    for &(ts, as_) in &starts {
        let sf = windows_within(&tracker[ts..ts + best_len], antigen, threshold);
        if best.is_none_or(|(bsf, _, _)| sf > bsf) {
            best = Some((sf, ts, as_));
        }
    }
    let (sf, ts, as_) = best.expect("at least one maximal run");
    let ms: CategorySeq = tracker[ts..ts + best_len].into();
    let affinity =
        ms.iter().zip(&antigen[as_..as_ + best_len]).map(|(&a, &b)| a.distance(b)).fold(0.0, f64::max);
    Ok(MatchResult { ms, sf, ml: best_len, redundancy: n - best_len, affinity })
}

/// Every window of length at least 2 with its occurrence count, restricted to
/// windows that occur at least twice.
pub fn trend_counts(antigen: &[Category]) -> BTreeMap<CategorySeq, usize> {
    let mut counts: BTreeMap<&[Category], usize> = BTreeMap::new();
    for len in 2..antigen.len() {
        for w in antigen.windows(len) {
            *counts.entry(w).or_default() += 1;
        }
    }
    counts.into_iter().filter(|&(_, c)| c >= 2).map(|(w, c)| (CategorySeq::from(w), c)).collect()
}

/// All contiguous subsequences of length at least 2 occurring at least twice.
pub fn enumerate_trends(antigen: &[Category]) -> TrendSet {
    trend_counts(antigen).into_keys().collect()
}
