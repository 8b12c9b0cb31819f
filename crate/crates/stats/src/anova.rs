use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::{Df, Effect, StatKind, StatResult, StatsError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub effect: String,
    pub sum_sq: f64,
    pub df: f64,
    pub f: f64,
    pub p_value: f64,
    pub partial_eta_sq: f64,
}

/// Type II two-way table: rows for factor A, factor B and their interaction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub rows: [AnovaRow; 3],
    pub ss_error: f64,
    pub df_error: f64,
    pub levels_a: Vec<String>,
    pub levels_b: Vec<String>,
}

impl AnovaTable {
    pub fn results(&self) -> Vec<StatResult> {
        self.rows
            .iter()
            .map(|r| StatResult {
                kind: StatKind::Anova2way,
                label: r.effect.clone(),
                statistic: r.f,
                df: Some(Df::Two(r.df, self.df_error)),
                p_value: Some(r.p_value),
                effect: Some(Effect::PartialEtaSq(r.partial_eta_sq)),
                estimate: None,
                ci: None,
            })
            .collect()
    }
}

pub(crate) fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)).clamp(0.0, 1.0)
}

fn levels<S: AsRef<str>>(labels: &[S]) -> (Vec<String>, Vec<usize>) {
    let mut names: Vec<String> = Vec::new();
    let idx = labels
        .iter()
        .map(|l| match names.iter().position(|n| n == l.as_ref()) {
            Some(i) => i,
            None => {
                names.push(l.as_ref().to_string());
                names.len() - 1
            }
        })
        .collect();
    (names, idx)
}

/// Residual sum of squares after subtracting group means.
fn rss_groups(y: &[f64], group: &[usize], n_groups: usize) -> f64 {
    let mut sum = vec![0.0; n_groups];
    let mut cnt = vec![0.0; n_groups];
    for (v, &g) in y.iter().zip(group) {
        sum[g] += v;
        cnt[g] += 1.0;
    }
    y.iter().zip(group).map(|(v, &g)| (v - sum[g] / cnt[g]).powi(2)).sum()
}

/// Residual sum of squares of the additive model `y ~ A + B`.
fn rss_additive(y: &[f64], a: &[usize], na: usize, b: &[usize], nb: usize) -> f64 {
    let cols = 1 + (na - 1) + (nb - 1);
    let x = DMatrix::from_fn(y.len(), cols, |r, c| match c {
        0 => 1.0,
        c if c < na => f64::from(a[r] == c),
        c => f64::from(b[r] == c - na + 1),
    });
    let yv = DVector::from_column_slice(y);
    let beta = x.clone().svd(true, true).solve(&yv, 1e-12).expect("svd computed with u and v");
    (yv - x * beta).norm_squared()
}

/// Two-way ANOVA with Type II sums of squares.
pub fn two_way_anova<S: AsRef<str>, T: AsRef<str>>(values: &[f64], a: &[S], b: &[T]) -> Result<AnovaTable, StatsError> {
    if values.len() != a.len() {
        return Err(StatsError::LengthMismatch(values.len(), a.len()));
    }
    if values.len() != b.len() {
        return Err(StatsError::LengthMismatch(values.len(), b.len()));
    }
    let (la, ia) = levels(a);
    let (lb, ib) = levels(b);
    if la.len() < 2 {
        return Err(StatsError::SingleLevel("A"));
    }
    if lb.len() < 2 {
        return Err(StatsError::SingleLevel("B"));
    }
    let cell: Vec<usize> = ia.iter().zip(&ib).map(|(x, y)| x * lb.len() + y).collect();
    for (i, a) in la.iter().enumerate() {
        for (j, b) in lb.iter().enumerate() {
            if !cell.contains(&(i * lb.len() + j)) {
                return Err(StatsError::EmptyCell(a.clone(), b.clone()));
            }
        }
    }
    let n = values.len() as f64;
    let (na, nb) = (la.len(), lb.len());
    let df_error = n - (na * nb) as f64;
    if df_error < 1.0 {
        return Err(StatsError::Degenerate("no residual degrees of freedom"));
    }
    let rss_full = rss_groups(values, &cell, na * nb);
    let scale: f64 = values.iter().map(|v| v * v).sum();
    if rss_full <= f64::EPSILON * scale.max(f64::MIN_POSITIVE) * n {
        return Err(StatsError::Degenerate("within-cell sum of squares is zero"));
    }
    let rss_a = rss_groups(values, &ia, na);
    let rss_b = rss_groups(values, &ib, nb);
    let rss_add = rss_additive(values, &ia, na, &ib, nb);
    let effects = [
        ("A", (rss_b - rss_add).max(0.0), (na - 1) as f64),
        ("B", (rss_a - rss_add).max(0.0), (nb - 1) as f64),
        ("A:B", (rss_add - rss_full).max(0.0), ((na - 1) * (nb - 1)) as f64),
    ];
    let ms_error = rss_full / df_error;
    let rows = effects.map(|(name, ss, df)| {
        let f = (ss / df) / ms_error;
        AnovaRow {
            effect: name.to_string(),
            sum_sq: ss,
            df,
            f,
            p_value: f_sf(f, df, df_error),
            partial_eta_sq: ss / (ss + rss_full),
        }
    });
    Ok(AnovaTable { rows, ss_error: rss_full, df_error, levels_a: la, levels_b: lb })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_interaction() {
        // Cell means (0, 0, 0, 1), two observations per cell at mean +/- 0.1.
        let values = [-0.1, 0.1, -0.1, 0.1, -0.1, 0.1, 0.9, 1.1];
        let a = ["a1", "a1", "a1", "a1", "a2", "a2", "a2", "a2"];
        let b = ["b1", "b1", "b2", "b2", "b1", "b1", "b2", "b2"];
        let t = two_way_anova(&values, &a, &b).unwrap();
        assert!((t.rows[2].sum_sq - 0.5).abs() < 1e-12);
        assert!((t.ss_error - 0.08).abs() < 1e-12);
        assert_eq!(t.df_error, 4.0);
        assert!((t.rows[2].partial_eta_sq - 0.5 / 0.58).abs() < 1e-12);
    }

    #[test]
    fn constant_values_are_degenerate() {
        let a = ["x", "x", "y", "y", "x", "y"];
        let b = ["p", "q", "p", "q", "p", "q"];
        assert!(matches!(two_way_anova(&[2.0; 6], &a, &b), Err(StatsError::Degenerate(_))));
        assert_eq!(two_way_anova(&[1.0, 2.0], &["x", "x"], &["p", "q"]), Err(StatsError::SingleLevel("A")));
        assert!(matches!(
            two_way_anova(&[1.0, 2.0, 3.0], &["x", "x", "y"], &["p", "q", "p"]),
            Err(StatsError::EmptyCell(..))
        ));
    }
}
