//! The reference antigens and their trends.

use crate::encoding::{Antigen, CategorySeq};
use crate::matching::TrendSet;

const A: [f64; 20] =
    [1.0, 2.0, 1.0, -0.5, 1.0, 2.0, 1.0, 0.5, -0.5, 0.5, 2.0, 1.0, 2.0, -0.5, 2.0, 1.0, 2.0, -0.5, 1.0, 1.5];

const TRENDS: [&[f64]; 8] = [
    &[1.0, 2.0],
    &[1.0, 2.0, 1.0],
    &[2.0, 1.0],
    &[1.0, 2.0, -0.5],
    &[2.0, -0.5],
    &[2.0, 1.0, 2.0],
    &[2.0, 1.0, 2.0, -0.5],
    &[-0.5, 1.0],
];

/// Band width under which the fixture values are exact categories.
pub const BAND_WIDTH: f64 = 0.5;

fn seq(values: &[f64]) -> CategorySeq {
    CategorySeq::from_values(values).expect("fixture values are finite")
}

/// Twenty price movements containing eight trends.
pub fn antigen_a() -> Antigen {
    Antigen::new("A", seq(&A))
}

/// First half of [`antigen_a`].
pub fn antigen_a1() -> Antigen {
    Antigen::new("A1", seq(&A[..10]))
}

/// Second half of [`antigen_a`].
pub fn antigen_a2() -> Antigen {
    Antigen::new("A2", seq(&A[10..]))
}

pub fn antigen(label: &str) -> Option<Antigen> {
    match label {
        "A" => Some(antigen_a()),
        "A1" => Some(antigen_a1()),
        "A2" => Some(antigen_a2()),
        _ => None,
    }
}

/// T1 through T8, in order.
pub fn trends() -> Vec<CategorySeq> {
    TRENDS.iter().map(|t| seq(t)).collect()
}

/// T1..T7: every trend of A1 or A2.
pub fn split_truth() -> TrendSet {
    trends().into_iter().take(7).collect()
}

/// T1..T8: every trend of A.
pub fn full_truth() -> TrendSet {
    trends().into_iter().collect()
}

/// `T1`..`T8` label of a fixture trend, if it is one.
pub fn trend_label(trend: &CategorySeq) -> Option<String> {
    trends().iter().position(|t| t == trend).map(|i| format!("T{}", i + 1))
}
