use crate::range::{ptukey, qtukey};
use crate::{mean, var, Df, Interval, StatKind, StatResult, StatsError};

/// Tukey-Kramer pairwise comparisons. Pairs come in input order `(i, j)`
/// with `i < j`; the estimate is `mean_i - mean_j`. The interval is the
/// simultaneous `1 - alpha` interval.
pub fn tukey_hsd(groups: &[(String, Vec<f64>)], alpha: f64) -> Result<Vec<StatResult>, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups);
    }
    for (name, g) in groups {
        if g.len() < 2 {
            return Err(StatsError::UndersizedGroup(name.clone()));
        }
    }
    let k = groups.len() as f64;
    let n: usize = groups.iter().map(|(_, g)| g.len()).sum();
    let df = (n - groups.len()) as f64;
    let ss_within: f64 = groups.iter().map(|(_, g)| var(g) * (g.len() as f64 - 1.0)).sum();
    let mse = ss_within / df;
    let means: Vec<f64> = groups.iter().map(|(_, g)| mean(g)).collect();
    let crit = qtukey(1.0 - alpha, k, df);
    let mut out = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let diff = means[i] - means[j];
            let se = (mse / 2.0 * (1.0 / groups[i].1.len() as f64 + 1.0 / groups[j].1.len() as f64)).sqrt();
            let (q, p) = if se > 0.0 {
                let q = diff.abs() / se;
                (q, (1.0 - ptukey(q, k, df)).clamp(0.0, 1.0))
            } else if diff == 0.0 {
                (0.0, 1.0)
            } else {
                (f64::INFINITY, 0.0)
            };
            out.push(StatResult {
                kind: StatKind::TukeyPair,
                label: format!("{}-{}", groups[i].0, groups[j].0),
                statistic: q,
                df: Some(Df::Two(k, df)),
                p_value: Some(p),
                effect: None,
                estimate: Some(diff),
                ci: Some(Interval { low: diff - crit * se, high: diff + crit * se, level: 1.0 - alpha }),
            });
        }
    }
    Ok(out)
}

/// Whether a Tukey pair is significant at `alpha`.
pub fn significant(r: &StatResult, alpha: f64) -> bool {
    r.p_value.is_some_and(|p| p < alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_groups() {
        let g = vec![("a".to_string(), vec![1.0, 2.0, 3.0]), ("b".to_string(), vec![1.0, 2.0, 3.0])];
        let r = tukey_hsd(&g, 0.05).unwrap();
        assert_eq!(r[0].estimate, Some(0.0));
        assert!(!significant(&r[0], 0.05));
        assert!(tukey_hsd(&g[..1], 0.05).is_err());
    }

    #[test]
    fn differences_are_exact_subtraction() {
        let g = vec![
            ("a".to_string(), vec![1.0, 3.0]),
            ("b".to_string(), vec![4.0, 6.0]),
            ("c".to_string(), vec![10.0, 12.0, 14.0]),
        ];
        let r = tukey_hsd(&g, 0.05).unwrap();
        let diffs: Vec<f64> = r.iter().map(|x| x.estimate.unwrap()).collect();
        assert_eq!(diffs, vec![-3.0, -10.0, -7.0]);
    }
}
