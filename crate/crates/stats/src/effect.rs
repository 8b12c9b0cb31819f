use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{mean, var, Effect, Interval, StatKind, StatResult, StatsError};

pub const BOOTSTRAP_N: usize = 10_000;

fn d_of(x: &[f64], y: &[f64]) -> Option<f64> {
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let pooled = (((nx - 1.0) * var(x) + (ny - 1.0) * var(y)) / (nx + ny - 2.0)).sqrt();
    (pooled > 0.0).then(|| (mean(x) - mean(y)) / pooled)
}

/// Linear-interpolation percentile of sorted data, `p` in `[0, 1]`.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let i = h.floor() as usize;
    let frac = h - i as f64;
    match sorted.get(i + 1) {
        Some(next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    }
}

/// Cohen's d with pooled standard deviation and a percentile bootstrap
/// interval. Resamples whose pooled deviation is zero are dropped.
pub fn cohens_d(x: &[f64], y: &[f64], level: f64, resamples: usize, seed: u64) -> Result<StatResult, StatsError> {
    for s in [x, y] {
        if s.len() < 2 {
            return Err(StatsError::TooFew { need: 2, got: s.len() });
        }
    }
    let d = d_of(x, y).ok_or(StatsError::Degenerate("pooled standard deviation is zero"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bx = vec![0.0; x.len()];
    let mut by = vec![0.0; y.len()];
    let mut boots = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for v in bx.iter_mut() {
            *v = x[rng.random_range(0..x.len())];
        }
        for v in by.iter_mut() {
            *v = y[rng.random_range(0..y.len())];
        }
        if let Some(b) = d_of(&bx, &by) {
            boots.push(b);
        }
    }
    let ci = if boots.is_empty() {
        None
    } else {
        boots.sort_by(f64::total_cmp);
        let tail = (1.0 - level) / 2.0;
        Some(Interval { low: percentile(&boots, tail), high: percentile(&boots, 1.0 - tail), level })
    };
    Ok(StatResult {
        kind: StatKind::CohensD,
        label: "d".into(),
        statistic: d,
        df: None,
        p_value: None,
        effect: Some(Effect::D(d)),
        estimate: Some(mean(x) - mean(y)),
        ci,
    })
}
