//! Statistical helpers shared by the samplers and diagnostics: running
//! moments, batch-means standard errors for correlated series, an
//! autocorrelation-based effective sample size, and a chi-square
//! goodness-of-fit test against a Poisson law with known mean.

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Standard error of the mean for independent draws.
pub fn std_error_iid(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    (sample_variance(xs) / n as f64).sqrt()
}

/// Standard error of the mean via non-overlapping batch means with batch
/// size ~ sqrt(n); robust to serial correlation. Falls back to the
/// independent-draw formula when there are too few batches.
pub fn batch_means_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    let b = (n as f64).sqrt().floor() as usize;
    if b < 2 || n / b < 2 {
        return std_error_iid(xs);
    }
    let nb = n / b;
    let batch_means: Vec<f64> = (0..nb).map(|k| mean(&xs[k * b..(k + 1) * b])).collect();
    (sample_variance(&batch_means) / nb as f64).sqrt()
}

/// Effective sample size from the initial-positive-sequence estimator:
/// autocorrelations are summed in adjacent pairs until a pair sum turns
/// nonpositive. Between 1 and n by construction.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(xs);
    let autocov = |k: usize| -> f64 {
        (0..n - k).map(|i| (xs[i] - m) * (xs[i + k] - m)).sum::<f64>() / n as f64
    };
    let c0 = autocov(0);
    if c0 <= 0.0 {
        return n as f64;
    }
    let mut gamma_sum = 0.0;
    let mut lag = 0usize;
    loop {
        let (k1, k2) = (2 * lag, 2 * lag + 1);
        if k2 >= n {
            break;
        }
        let g = (autocov(k1) + autocov(k2)) / c0;
        if g <= 0.0 {
            break;
        }
        gamma_sum += g;
        lag += 1;
    }
    let tau = (2.0 * gamma_sum - 1.0).max(1.0);
    (n as f64 / tau).min(n as f64)
}

#[derive(Debug, Clone)]
pub struct GofReport {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Pearson chi-square test of observed counts against Poisson(`lambda`)
/// with the mean known a priori (no parameters estimated from data).
/// Cells with expected mass below 5 are pooled upward; the open tail is a
/// cell of its own. With fewer than two cells the test is vacuous (p = 1).
pub fn chi_square_poisson_gof(counts: &[u64], lambda: f64) -> Result<GofReport> {
    if counts.is_empty() {
        return Err(Error::InvalidDiagnostic("goodness of fit needs at least one count".into()));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidDiagnostic(format!("Poisson mean must be >= 0, got {lambda}")));
    }
    let n = counts.len() as f64;
    if lambda == 0.0 {
        let all_zero = counts.iter().all(|&c| c == 0);
        return Ok(GofReport {
            statistic: if all_zero { 0.0 } else { f64::INFINITY },
            dof: 0,
            p_value: if all_zero { 1.0 } else { 0.0 },
        });
    }

    let kmax = *counts.iter().max().expect("nonempty") as usize;
    let mut observed = vec![0.0f64; kmax + 1];
    for &c in counts {
        observed[c as usize] += 1.0;
    }
    // pmf[k] built iteratively; the open tail k > kmax gets the remainder.
    let mut pmf = Vec::with_capacity(kmax + 2);
    let mut p = (-lambda).exp();
    let mut cum = 0.0;
    for k in 0..=kmax {
        pmf.push(p);
        cum += p;
        p *= lambda / (k + 1) as f64;
    }
    let tail = (1.0 - cum).max(0.0);

    // Pool cells left to right until each holds expected mass >= 5.
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut acc_obs = 0.0;
    let mut acc_exp = 0.0;
    for k in 0..=kmax + 1 {
        let (o, e) = if k <= kmax {
            (observed[k], n * pmf[k])
        } else {
            (0.0, n * tail)
        };
        acc_obs += o;
        acc_exp += e;
        if acc_exp >= 5.0 {
            cells.push((acc_obs, acc_exp));
            acc_obs = 0.0;
            acc_exp = 0.0;
        }
    }
    if acc_exp > 0.0 || acc_obs > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += acc_obs;
                last.1 += acc_exp;
            }
            None => cells.push((acc_obs, acc_exp)),
        }
    }

    if cells.len() < 2 {
        return Ok(GofReport { statistic: 0.0, dof: 0, p_value: 1.0 });
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (cells.len() - 1) as u64;
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidDiagnostic(format!("chi-square setup: {e}")))?;
    let p_value = (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0);
    Ok(GofReport { statistic, dof, p_value })
}

/// Mean distance from each point to its nearest neighbour; `None` for
/// configurations with fewer than two points.
pub fn nearest_neighbor_mean(w: &Configuration) -> Option<f64> {
    let pts = w.points();
    if pts.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let mut best = f64::INFINITY;
        for (j, q) in pts.iter().enumerate() {
            if i != j {
                best = best.min(p.distance(q));
            }
        }
        total += best;
    }
    Some(total / pts.len() as f64)
}
