//! Concentration metrics over token holdings: Gini, 1 - normalized Shannon
//! entropy, whale share, and an OLS trend fit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_ingest::Day;
use crate::scenario::Agent;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("metric undefined: no strictly positive holding")]
    NoPositiveHolding,
    #[error("normalized entropy undefined for fewer than 2 holders (got {0})")]
    TooFewHolders(usize),
    #[error("regression needs at least two distinct x values")]
    DegenerateRegression,
}

/// Default supply fraction that defines the whale set.
pub const WHALE_THRESHOLD: f64 = 0.9;

/// Gini coefficient via the sorted-rank identity
/// `G = sum_i (2i - n - 1) x_(i) / (n sum x)` (ascending, 1-based).
pub fn gini(holdings: &[f64]) -> Result<f64, MetricError> {
    let mut sorted = holdings.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    gini_sorted(&sorted)
}

fn gini_sorted(ascending: &[f64]) -> Result<f64, MetricError> {
    let n = ascending.len();
    let total: f64 = ascending.iter().sum();
    if !(total > 0.0) {
        return Err(MetricError::NoPositiveHolding);
    }
    if ascending[0] == ascending[n - 1] {
        return Ok(0.0);
    }
    let nf = n as f64;
    let weighted: f64 = ascending
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i + 1) as f64 - nf - 1.0) * x)
        .sum();
    Ok((weighted / (nf * total)).max(0.0))
}

/// `1 - H(p) / ln n` with `0 ln 0 = 0`.
pub fn one_minus_nse(holdings: &[f64]) -> Result<f64, MetricError> {
    let n = holdings.len();
    let total: f64 = holdings.iter().sum();
    if !(total > 0.0) {
        return Err(MetricError::NoPositiveHolding);
    }
    if n < 2 {
        return Err(MetricError::TooFewHolders(n));
    }
    let entropy: f64 = holdings
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| {
            let p = x / total;
            -p * p.ln()
        })
        .sum();
    Ok((1.0 - entropy / (n as f64).ln()).clamp(0.0, 1.0))
}

/// Size of the smallest set of holders controlling at least `threshold` of
/// the supply, out of `n` holders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhaleCount {
    pub k: usize,
    pub n: usize,
}

impl WhaleCount {
    pub fn share(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

pub fn whale_count(holdings: &[f64], threshold: f64) -> Result<WhaleCount, MetricError> {
    let mut sorted = holdings.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    whale_count_sorted(&sorted, threshold)
}

pub fn whale_share(holdings: &[f64], threshold: f64) -> Result<f64, MetricError> {
    Ok(whale_count(holdings, threshold)?.share())
}

fn whale_count_sorted(ascending: &[f64], threshold: f64) -> Result<WhaleCount, MetricError> {
    let total: f64 = ascending.iter().sum();
    if !(total > 0.0) {
        return Err(MetricError::NoPositiveHolding);
    }
    // Relative slack so that e.g. nine of ten equal holders register as 90%.
    let target = threshold * total * (1.0 - 1e-12);
    let mut acc = 0.0;
    let mut k = 0;
    for &x in ascending.iter().rev() {
        acc += x;
        k += 1;
        if acc >= target {
            break;
        }
    }
    Ok(WhaleCount {
        k,
        n: ascending.len(),
    })
}

/// Ordinary least squares `value = slope * t + intercept`.
pub fn linreg(points: &[(f64, f64)]) -> Result<(f64, f64), MetricError> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(MetricError::DegenerateRegression);
    }
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(sxx, sxy), &(x, y)| {
        let dx = x - mean_x;
        (sxx + dx * dx, sxy + dx * (y - mean_y))
    });
    if !(sxx > 0.0) {
        return Err(MetricError::DegenerateRegression);
    }
    let slope = sxy / sxx;
    Ok((slope, mean_y - slope * mean_x))
}

/// End-of-day concentration snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricPoint {
    pub t: Day,
    pub gini: f64,
    pub one_minus_nse: f64,
    pub whale_share: f64,
    /// Whale set size `k` and metric population size.
    pub whales: WhaleCount,
    /// All agents in the market, holders or not.
    pub n_agents: usize,
}

/// Computes every metric over the agents' token holdings. By default the
/// metric population is the agents with a positive balance.
pub fn measure(
    t: Day,
    agents: &[Agent],
    include_zero_holders: bool,
    scratch: &mut Vec<f64>,
) -> Result<MetricPoint, MetricError> {
    scratch.clear();
    scratch.extend(
        agents
            .iter()
            .map(|a| a.tokens)
            .filter(|&y| include_zero_holders || y > 0.0),
    );
    scratch.sort_unstable_by(f64::total_cmp);
    let gini = gini_sorted(scratch)?;
    let one_minus_nse = one_minus_nse(scratch)?;
    let whales = whale_count_sorted(scratch, WHALE_THRESHOLD)?;
    Ok(MetricPoint {
        t,
        gini,
        one_minus_nse,
        whale_share: whales.share(),
        whales,
        n_agents: agents.len(),
    })
}
