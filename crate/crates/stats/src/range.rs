//! Studentized range distribution by direct numerical integration.

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::quad::integrate;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn phi(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

fn big_phi(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// P(range of `k` standard normals < `w`).
fn range_cdf(w: f64, k: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let mut f = |z: f64| {
        let d = big_phi(z) - big_phi(z - w);
        if d <= 0.0 {
            0.0
        } else {
            phi(z) * d.powf(k - 1.0)
        }
    };
    let mut total = 0.0;
    let edges = [-9.0, -4.0, -2.0, 0.0, 2.0, 4.0, 9.0 + w.min(20.0)];
    for pair in edges.windows(2) {
        total += integrate(&mut f, pair[0], pair[1], 1e-12);
    }
    (k * total).clamp(0.0, 1.0)
}

/// CDF of the studentized range for `k` means and `df` error degrees of
/// freedom.
pub fn ptukey(q: f64, k: f64, df: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    if df > 1e5 {
        return range_cdf(q, k);
    }
    let half = df / 2.0;
    let log_norm = half * df.ln() + std::f64::consts::LN_2 - half * std::f64::consts::LN_2 - ln_gamma(half);
    let mut f = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let log_density = log_norm + (df - 1.0) * s.ln() - df * s * s / 2.0;
        log_density.exp() * range_cdf(q * s, k)
    };
    let sd = 1.0 / (2.0 * df).sqrt();
    let lo = (1.0 - 14.0 * sd).max(0.0);
    let hi = 1.0 + 14.0 * sd;
    let pieces = 12;
    let step = (hi - lo) / pieces as f64;
    let mut total = 0.0;
    for i in 0..pieces {
        let a = lo + step * i as f64;
        total += integrate(&mut f, a, a + step, 1e-11);
    }
    total.clamp(0.0, 1.0)
}

/// Quantile of the studentized range: the `q` with `ptukey(q) = p`.
pub fn qtukey(p: f64, k: f64, df: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 8.0_f64);
    while ptukey(hi, k, df) < p {
        hi *= 2.0;
        if hi > 1e4 {
            return f64::INFINITY;
        }
    }
    let (mut flo, mut fhi) = (-p, ptukey(hi, k, df) - p);
    // Illinois variant of regula falsi.
    let mut side = 0;
    for _ in 0..100 {
        let x = (lo * fhi - hi * flo) / (fhi - flo);
        let fx = ptukey(x, k, df) - p;
        if fx.abs() < 1e-13 || (hi - lo) < 1e-12 {
            return x;
        }
        if fx * fhi > 0.0 {
            hi = x;
            fhi = fx;
            if side == -1 {
                flo /= 2.0;
            }
            side = -1;
        } else {
            lo = x;
            flo = fx;
            if side == 1 {
                fhi /= 2.0;
            }
            side = 1;
        }
    }
    (lo + hi) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_means_reduce_to_normal_difference() {
        // With k = 2 and infinite df, Q/sqrt(2) is |N(0,1)|.
        for q in [0.5, 1.0, 2.77, 4.0] {
            let want = 2.0 * big_phi(q / SQRT_2) - 1.0;
            assert!((range_cdf(q, 2.0) - want).abs() < 1e-10, "{q}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let q = qtukey(0.95, 3.0, 12.0);
        assert!((ptukey(q, 3.0, 12.0) - 0.95).abs() < 1e-9);
        // Tabulated critical value q(0.95; 3, 12) = 3.773.
        assert!((q - 3.773).abs() < 1e-3);
    }
}
