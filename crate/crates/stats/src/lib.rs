//! Inferential statistics used by the study pipelines: paired t-test,
//! two-way ANOVA with partial eta squared, Tukey HSD and Cohen's d with a
//! bootstrap interval.

mod anova;
mod effect;
mod quad;
mod range;
mod ttest;
mod tukey;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use anova::{two_way_anova, AnovaRow, AnovaTable};
pub use effect::{cohens_d, BOOTSTRAP_N};
pub use range::{ptukey, qtukey};
pub use ttest::paired_t_test;
pub use tukey::{significant, tukey_hsd};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    PairedT,
    Anova2way,
    TukeyPair,
    CohensD,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Df {
    One(f64),
    Two(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    PartialEtaSq(f64),
    D(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
    pub level: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub kind: StatKind,
    /// Effect name for ANOVA rows, `a-b` for Tukey pairs.
    pub label: String,
    pub statistic: f64,
    pub df: Option<Df>,
    pub p_value: Option<f64>,
    pub effect: Option<Effect>,
    /// Mean difference for Tukey pairs and t-tests.
    pub estimate: Option<f64>,
    pub ci: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("samples have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} observations, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("degenerate data: {0}")]
    Degenerate(&'static str),
    #[error("cell ({0}, {1}) has no observations")]
    EmptyCell(String, String),
    #[error("factor `{0}` has a single level")]
    SingleLevel(&'static str),
    #[error("group `{0}` has fewer than two observations")]
    UndersizedGroup(String),
    #[error("need at least two groups")]
    TooFewGroups,
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with `n - 1` in the denominator.
pub(crate) fn var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}
