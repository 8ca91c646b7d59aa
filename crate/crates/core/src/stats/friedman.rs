use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::ranks::{midranks, tie_sum};
use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanOutcome {
    pub statistic: f64,
    pub p: f64,
    pub df: usize,
}

/// Friedman test on `subjects × methods` scores, ranking within each
/// subject with midranks and applying the tie correction.
pub fn friedman(scores: &Mat) -> Result<FriedmanOutcome> {
    let (n, k) = scores.shape();
    if k < 3 || n < 2 {
        return Err(Error::Input(format!("Friedman needs at least 2 subjects and 3 methods, got {n} × {k}")));
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite score".into()));
    }
    let mut rank_sums = vec![0.0; k];
    let mut ties_total = 0.0;
    for row in scores.row_iter() {
        let vals: Vec<f64> = row.iter().copied().collect();
        let (ranks, ties) = midranks(&vals);
        for (s, r) in rank_sums.iter_mut().zip(ranks) {
            *s += r;
        }
        ties_total += tie_sum(&ties);
    }
    let (nf, kf) = (n as f64, k as f64);
    let raw =
        12.0 / (nf * kf * (kf + 1.0)) * rank_sums.iter().map(|r| r * r).sum::<f64>() - 3.0 * nf * (kf + 1.0);
    let correction = 1.0 - ties_total / (nf * (kf * kf * kf - kf));
    let df = k - 1;
    if correction <= 1e-12 {
        return Ok(FriedmanOutcome { statistic: 0.0, p: 1.0, df });
    }
    let statistic = (raw / correction).max(0.0);
    let chi = ChiSquared::new(df as f64).expect("positive df");
    let p = (1.0 - chi.cdf(statistic)).clamp(0.0, 1.0);
    Ok(FriedmanOutcome { statistic, p, df })
}
