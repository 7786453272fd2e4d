//! Price series to banded price-change antigens.
//!
//! Category values are stored as fixed-point integers (micro-units of
//! currency) so that sequences can be compared, hashed and ordered exactly.
//! A value parsed from text such as `1.5` and a value produced by banding
//! `1.3` onto a width of `0.5` are the same [`Category`].

use std::fmt;
use std::io::Read;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Fixed-point resolution of a [`Category`]: one unit of currency.
pub const MICROS_PER_UNIT: i64 = 1_000_000;

fn to_micros(value: f64) -> Result<i64> {
    if !value.is_finite() {
        return Err(Error::Argument(format!("non-finite value {value}")));
    }
    let scaled = (value * MICROS_PER_UNIT as f64).round();
    if scaled.abs() >= i64::MAX as f64 {
        return Err(Error::Argument(format!("value {value} out of range")));
    }
    Ok(scaled as i64)
}

/// One banded price change, in currency units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Category(i64);

impl Category {
    pub const ZERO: Category = Category(0);

    pub fn from_micros(micros: i64) -> Self {
        Category(micros)
    }

    pub fn micros(self) -> i64 {
        self.0
    }

    /// Rounds `value` to the nearest micro-unit. Does not band.
    pub fn from_value(value: f64) -> Result<Self> {
        to_micros(value).map(Category)
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / MICROS_PER_UNIT as f64
    }

    /// Absolute difference in currency units.
    pub fn distance(self, other: Category) -> f64 {
        (self.0 - other.0).unsigned_abs() as f64 / MICROS_PER_UNIT as f64
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
        Category::from_value(v)
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Category::from_value(v).map_err(serde::de::Error::custom)
    }
}

/// Ordered sequence of categories: antigens, tracker genomes, match
/// sequences and trends all share this representation.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategorySeq(Vec<Category>);

impl CategorySeq {
    pub fn new(values: Vec<Category>) -> Self {
        CategorySeq(values)
    }

    /// Builds a sequence from plain values, rounding each to a micro-unit.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        values.iter().map(|&v| Category::from_value(v)).collect::<Result<Vec<_>>>().map(CategorySeq)
    }

    pub fn as_slice(&self) -> &[Category] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Category> {
        self.0
    }

    pub fn push(&mut self, value: Category) {
        self.0.push(value);
    }

    pub fn remove(&mut self, index: usize) -> Category {
        self.0.remove(index)
    }

    pub fn prefix(&self, len: usize) -> CategorySeq {
        CategorySeq(self.0[..len.min(self.0.len())].to_vec())
    }

    /// Comma-separated values without brackets, e.g. `1,2,-0.5`.
    pub fn to_csv_field(&self) -> String {
        self.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }
}

impl Deref for CategorySeq {
    type Target = [Category];

    fn deref(&self) -> &[Category] {
        &self.0
    }
}

impl From<Vec<Category>> for CategorySeq {
    fn from(values: Vec<Category>) -> Self {
        CategorySeq(values)
    }
}

impl From<&[Category]> for CategorySeq {
    fn from(values: &[Category]) -> Self {
        CategorySeq(values.to_vec())
    }
}

impl FromIterator<Category> for CategorySeq {
    fn from_iter<I: IntoIterator<Item = Category>>(iter: I) -> Self {
        CategorySeq(iter.into_iter().collect())
    }
}

impl fmt::Display for CategorySeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Parses `1, 2, -0.5` or `[1,2,-0.5]`. An empty string yields an empty
/// sequence.
impl FromStr for CategorySeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']').trim();
        if body.is_empty() {
            return Ok(CategorySeq::default());
        }
        body.split(',').map(str::parse).collect::<Result<Vec<_>>>().map(CategorySeq)
    }
}

/// A closing price observed at a time index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub timestamp: f64,
    pub close: f64,
}

impl PricePoint {
    pub fn new(timestamp: f64, close: f64) -> Self {
        PricePoint { timestamp, close }
    }
}

/// An encoded price-change sequence presented to the tracker population.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Antigen {
    pub label: String,
    pub seq: CategorySeq,
}

impl Antigen {
    pub fn new(label: impl Into<String>, seq: CategorySeq) -> Self {
        Antigen { label: label.into(), seq }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// The antigen as seen after its first `len` values have arrived.
    pub fn prefix(&self, len: usize) -> Antigen {
        Antigen { label: self.label.clone(), seq: self.seq.prefix(len) }
    }
}

/// Consecutive close-to-close differences.
pub fn price_changes(series: &[PricePoint]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::EmptyInput(format!("need at least 2 price points, got {}", series.len())));
    }
    for (i, w) in series.windows(2).enumerate() {
        if w[1].timestamp.partial_cmp(&w[0].timestamp) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Ordering { index: i + 1 });
        }
    }
    Ok(series.windows(2).map(|w| w[1].close - w[0].close).collect())
}

/// Rounds a price change outward onto a multiple of `width`.
///
/// Positive changes round up to the next multiple, negative changes round
/// down, and zero stays zero, so `(0, w]` bands to `w` and `[-w, 0)` bands
/// to `-w`.
pub fn band(delta: f64, width: f64) -> Result<Category> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::Config(format!("band width must be positive, got {width}")));
    }
    let w = to_micros(width)?;
    if w == 0 {
        return Err(Error::Config(format!("band width {width} below resolution")));
    }
    let d = to_micros(delta)?;
    let steps = if d > 0 {
        (d + w - 1) / w
    } else if d < 0 {
        -((-d + w - 1) / w)
    } else {
        0
    };
    Ok(Category(steps * w))
}

pub fn encode(series: &[PricePoint], width: f64) -> Result<Antigen> {
    let deltas = price_changes(series)?;
    let seq = deltas.into_iter().map(|d| band(d, width)).collect::<Result<CategorySeq>>()?;
    Ok(Antigen::new("input", seq))
}

#[derive(Deserialize)]
struct PriceRow {
    timestamp: f64,
    close: f64,
}

/// Reads a `timestamp,close` CSV with a header row.
pub fn read_prices_csv<R: Read>(reader: R) -> Result<Vec<PricePoint>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: PriceRow = row?;
        out.push(PricePoint::new(row.timestamp, row.close));
    }
    Ok(out)
}

/// Reads a single comma-separated row of already-banded values.
pub fn read_banded<R: Read>(mut reader: R) -> Result<CategorySeq> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .ok_or_else(|| Error::EmptyInput("no banded values".into()))?;
    line.parse()
}
