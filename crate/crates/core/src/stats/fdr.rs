use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BhOutcome {
    pub reject: Vec<bool>,
    pub adjusted: Vec<f64>,
}

/// Benjamini–Hochberg step-up at level `q`. Adjusted p-values are the
/// running minimum of `p₍ᵢ₎ · m / i` from the largest rank down, capped at 1.
pub fn bh_fdr(p: &[f64], q: f64) -> Result<BhOutcome> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Input(format!("FDR level {q} outside (0, 1]")));
    }
    if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Input(format!("p-value {bad} outside [0, 1]")));
    }
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0_f64;
    for (rank0, &i) in order.iter().enumerate().rev() {
        running = running.min(p[i] * m as f64 / (rank0 + 1) as f64);
        adjusted[i] = running;
    }
    let cutoff = order
        .iter()
        .enumerate()
        .filter(|(rank0, &i)| p[i] <= (rank0 + 1) as f64 * q / m as f64)
        .map(|(rank0, _)| rank0 + 1)
        .max()
        .unwrap_or(0);
    let mut reject = vec![false; m];
    for &i in &order[..cutoff] {
        reject[i] = true;
    }
    Ok(BhOutcome { reject, adjusted })
}
