//! One-sided Wilcoxon signed-rank test for a positive median.
//!
//! Exact zeros are dropped. Ranks of `|d|` use midranks for ties. Up to
//! [`EXACT_MAX_N`] nonzero differences the null distribution of `W⁺` is
//! enumerated exactly (on doubled ranks, so midranks stay integral); above
//! it a normal approximation with tie and continuity correction is used.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::ranks::{midranks, tie_sum};
use crate::error::{Error, Result};

pub const EXACT_MAX_N: usize = 25;
pub const MIN_N: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonOutcome {
    /// `None` when every difference is zero.
    pub p: Option<f64>,
    /// Sum of ranks of the positive differences.
    pub w_plus: f64,
    /// Nonzero differences used.
    pub n: usize,
    pub method: WilcoxonMethod,
}

struct Ranked {
    ranks: Vec<f64>,
    positive: Vec<bool>,
    ties: Vec<usize>,
}

fn rank_nonzero(diffs: &[f64]) -> Result<Ranked> {
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::Input("non-finite difference".into()));
    }
    let nz: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    let abs: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = midranks(&abs);
    Ok(Ranked { ranks, positive: nz.iter().map(|&d| d > 0.0).collect(), ties })
}

fn w_plus(r: &Ranked) -> f64 {
    r.ranks.iter().zip(&r.positive).filter(|(_, &p)| p).map(|(r, _)| r).sum()
}

fn exact_upper_tail(r: &Ranked) -> f64 {
    let doubled: Vec<usize> = r.ranks.iter().map(|x| (2.0 * x).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    // counts[s]: sign patterns whose positive doubled ranks sum to s
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &d in &doubled {
        for s in (d..=total).rev() {
            counts[s] += counts[s - d];
        }
    }
    let observed = (2.0 * w_plus(r)).round() as usize;
    let hits: u64 = counts[observed..].iter().sum();
    hits as f64 / 2f64.powi(doubled.len() as i32)
}

fn normal_upper_tail(r: &Ranked) -> f64 {
    let n = r.ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_sum(&r.ties) / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = (w_plus(r) - mean - 0.5) / var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    (1.0 - std_normal.cdf(z)).clamp(0.0, 1.0)
}

fn checked(diffs: &[f64]) -> Result<Option<Ranked>> {
    let r = rank_nonzero(diffs)?;
    match r.ranks.len() {
        0 => Ok(None),
        n if n < MIN_N => Err(Error::Input(format!("{n} nonzero differences; at least {MIN_N} are needed"))),
        _ => Ok(Some(r)),
    }
}

fn outcome(r: Option<Ranked>, method: WilcoxonMethod) -> WilcoxonOutcome {
    match r {
        None => WilcoxonOutcome { p: None, w_plus: 0.0, n: 0, method },
        Some(r) => {
            let p = match method {
                WilcoxonMethod::Exact => exact_upper_tail(&r),
                WilcoxonMethod::Normal => normal_upper_tail(&r),
            };
            WilcoxonOutcome { p: Some(p), w_plus: w_plus(&r), n: r.ranks.len(), method }
        }
    }
}

/// P(W⁺ ≥ observed) under the symmetric null, choosing the exact or normal
/// branch by sample size.
pub fn wilcoxon_greater(diffs: &[f64]) -> Result<WilcoxonOutcome> {
    let r = checked(diffs)?;
    let method = match &r {
        Some(r) if r.ranks.len() > EXACT_MAX_N => WilcoxonMethod::Normal,
        _ => WilcoxonMethod::Exact,
    };
    Ok(outcome(r, method))
}

/// Exact branch regardless of sample size (cost grows with `n²`).
pub fn wilcoxon_greater_exact(diffs: &[f64]) -> Result<WilcoxonOutcome> {
    Ok(outcome(checked(diffs)?, WilcoxonMethod::Exact))
}

/// Normal-approximation branch regardless of sample size.
pub fn wilcoxon_greater_normal(diffs: &[f64]) -> Result<WilcoxonOutcome> {
    Ok(outcome(checked(diffs)?, WilcoxonMethod::Normal))
}
