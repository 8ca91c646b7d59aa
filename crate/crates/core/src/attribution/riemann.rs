use serde::{Deserialize, Serialize};

/// Where the gradient is sampled inside each of the `m` cells of `[0, 1]`.
///
/// `Right` is the `k/m, k = 1..=m` grid of the textbook integrated-gradients
/// sum. Both endpoint rules are first order in `1/m`; `Midpoint` is second
/// order and is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RiemannRule {
    Left,
    Right,
    #[default]
    Midpoint,
}

impl RiemannRule {
    /// Sample point of cell `k` (zero-based) out of `m`.
    pub fn point(self, k: usize, m: usize) -> f64 {
        let m = m as f64;
        let k = k as f64;
        match self {
            RiemannRule::Left => k / m,
            RiemannRule::Right => (k + 1.0) / m,
            RiemannRule::Midpoint => (k + 0.5) / m,
        }
    }
}
