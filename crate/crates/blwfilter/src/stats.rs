//! Paired two-sided Wilcoxon signed-rank test.
//!
//! Zero differences are dropped, tied absolute differences receive averaged
//! ranks, and the two-sided p-value is `min(1, 2·min(P(W ≤ w), P(W ≥ w)))`
//! for the positive-rank sum `w`. Small samples (n ≤ 25) use the exact null
//! distribution over all sign assignments, computed by dynamic programming
//! on doubled ranks (doubling makes tied half-ranks integral). Larger
//! samples use the normal approximation with tie-corrected variance and a
//! 0.5 continuity correction.

use crate::error::{Error, Result};

/// Largest n for which the exact distribution is used automatically.
const EXACT_LIMIT: usize = 25;

/// Minimum number of non-zero differences required.
const MIN_PAIRS: usize = 5;

/// How to compute the null distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilcoxonMethod {
    /// Exact for n ≤ 25, normal approximation above.
    Auto,
    Exact,
    NormalApprox,
}

/// Two-sided p-value for paired samples, with automatic method choice.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64> {
    wilcoxon_signed_rank_with(a, b, WilcoxonMethod::Auto)
}

/// Two-sided p-value with an explicit method, mainly for verification.
pub fn wilcoxon_signed_rank_with(a: &[f64], b: &[f64], method: WilcoxonMethod) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            context: "wilcoxon signed-rank",
            expected: format!("paired samples of length {}", a.len()),
            got: format!("length {}", b.len()),
        });
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n < MIN_PAIRS {
        return Err(Error::InsufficientData {
            what: "wilcoxon signed-rank",
            detail: format!("{n} non-zero difference pairs, need at least {MIN_PAIRS}"),
        });
    }

    let (ranks, tie_sizes) = average_ranks(&diffs);
    let w_plus: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| *r)
        .sum();

    let exact = match method {
        WilcoxonMethod::Auto => n <= EXACT_LIMIT,
        WilcoxonMethod::Exact => true,
        WilcoxonMethod::NormalApprox => false,
    };
    if exact {
        Ok(exact_p(&ranks, w_plus))
    } else {
        Ok(normal_approx_p(n, &tie_sizes, w_plus))
    }
}

/// Ascending ranks of |d| with ties averaged; also returns tie-group sizes.
fn average_ranks(diffs: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().partial_cmp(&diffs[j].abs()).unwrap());
    let mut ranks = vec![0.0; n];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[order[j + 1]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        // Positions i..=j (0-based) share the average of ranks i+1..=j+1.
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    (ranks, tie_sizes)
}

/// Exact two-sided p-value by enumerating the null distribution of W+.
///
/// Doubled ranks are integers even under ties; `dist[t]` counts sign
/// assignments whose doubled positive-rank sum is `t`.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut dist = vec![0u64; total + 1];
    dist[0] = 1;
    for &r in &doubled {
        for t in (r..=total).rev() {
            dist[t] += dist[t - r];
        }
    }
    let w2 = (2.0 * w_plus).round() as usize;
    let all = (1u64 << ranks.len()) as f64;
    let p_le: u64 = dist[..=w2].iter().sum();
    let p_ge: u64 = dist[w2..].iter().sum();
    let p = 2.0 * (p_le.min(p_ge) as f64) / all;
    p.min(1.0)
}

/// Normal approximation with continuity correction and tie-corrected variance.
fn normal_approx_p(n: usize, tie_sizes: &[usize], w_plus: f64) -> f64 {
    let nf = n as f64;
    let mu = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let sigma2 = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    if sigma2 <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mu).abs() - 0.5).max(0.0) / sigma2.sqrt();
    libm::erfc(z / std::f64::consts::SQRT_2).min(1.0)
}
