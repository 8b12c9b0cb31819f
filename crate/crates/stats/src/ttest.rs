use statrs::function::beta::beta_reg;

use crate::{mean, var, Df, StatKind, StatResult, StatsError};

/// Two-sided p-value of a t statistic.
pub(crate) fn t_two_sided(t: f64, df: f64) -> f64 {
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Paired-sample t-test of `x - y`.
pub fn paired_t_test(x: &[f64], y: &[f64]) -> Result<StatResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFew { need: 2, got: x.len() });
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let sd = var(&d).sqrt();
    if sd.is_nan() || sd <= 0.0 {
        return Err(StatsError::Degenerate("paired differences have zero variance"));
    }
    let n = d.len() as f64;
    let m = mean(&d);
    let t = m / (sd / n.sqrt());
    let df = n - 1.0;
    Ok(StatResult {
        kind: StatKind::PairedT,
        label: "paired".into(),
        statistic: t,
        df: Some(Df::One(df)),
        p_value: Some(t_two_sided(t, df)),
        effect: None,
        estimate: Some(m),
        ci: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed() {
        let r = paired_t_test(&[1.0, 2.0, 3.0], &[2.0, 3.0, 5.0]).unwrap();
        assert!((r.statistic + 4.0).abs() < 1e-12);
        assert_eq!(r.df, Some(Df::One(2.0)));
        assert_eq!(paired_t_test(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::Degenerate("paired differences have zero variance")));
        assert_eq!(paired_t_test(&[1.0], &[1.0, 2.0]), Err(StatsError::LengthMismatch(1, 2)));
    }
}
