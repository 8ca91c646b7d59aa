//! Multi-output ridge regression with an unpenalised intercept and
//! per-output penalty chosen by efficient leave-one-out error.
//!
//! With the centred design `Xc = U S Vᵀ`, the fit for penalty `α` is
//! `β = V diag(s / (s² + α)) Uᵀ yc` and the hat matrix is
//! `H = U diag(s² / (s² + α)) Uᵀ + 11ᵀ/n`, so each LOO residual is
//! `eᵢ / (1 − Hᵢᵢ)` without refitting.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, Mat};

/// `n` values log-spaced from `lo` to `hi` inclusive.
pub fn log_alphas(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

pub fn default_alphas() -> Vec<f64> {
    log_alphas(1e-3, 1e6, 10)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    /// `p × v`.
    pub weights: Mat,
    pub intercept: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl RidgeFit {
    pub fn predict(&self, x: &Mat) -> Result<Mat> {
        if x.ncols() != self.weights.nrows() {
            return Err(Error::Input(format!(
                "design has {} columns, model expects {}",
                x.ncols(),
                self.weights.nrows()
            )));
        }
        let mut y = x * &self.weights;
        for (j, b) in self.intercept.iter().enumerate() {
            y.column_mut(j).add_scalar_mut(*b);
        }
        Ok(y)
    }
}

/// The SVD of a centred design, reusable across response matrices.
#[derive(Debug, Clone)]
pub struct RidgeSolver {
    x_mean: Vec<f64>,
    u: Mat,
    s: Vec<f64>,
    v: Mat,
    alphas: Vec<f64>,
}

impl RidgeSolver {
    pub fn new(x: &Mat, alphas: &[f64]) -> Result<Self> {
        if alphas.is_empty() || alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Input("alphas must be a nonempty list of positive values".into()));
        }
        if x.nrows() < 2 {
            return Err(Error::Input("ridge needs at least two training rows".into()));
        }
        if !all_finite(x) {
            return Err(Error::Input("non-finite values in design matrix".into()));
        }
        let n = x.nrows() as f64;
        let x_mean: Vec<f64> = x.column_iter().map(|c| c.sum() / n).collect();
        let mut xc = x.clone();
        for (j, m) in x_mean.iter().enumerate() {
            xc.column_mut(j).add_scalar_mut(-m);
        }
        let svd = xc.svd(true, true);
        let u = svd.u.ok_or_else(|| Error::Numerical { step: 0, msg: "SVD failed".into() })?;
        let v_t = svd.v_t.ok_or_else(|| Error::Numerical { step: 0, msg: "SVD failed".into() })?;
        Ok(RidgeSolver {
            x_mean,
            u,
            s: svd.singular_values.iter().copied().collect(),
            v: v_t.transpose(),
            alphas: alphas.to_vec(),
        })
    }

    /// LOO squared error per `(alpha, output)`.
    pub fn loo_errors(&self, y: &Mat) -> Result<Mat> {
        let (yc, _) = self.center_y(y)?;
        let n = y.nrows();
        let uty = self.u.transpose() * &yc;
        let mut out = Mat::zeros(self.alphas.len(), y.ncols());
        let u_sq = self.u.map(|v| v * v);
        for (a, &alpha) in self.alphas.iter().enumerate() {
            let shrink: Vec<f64> = self.s.iter().map(|s| s * s / (s * s + alpha)).collect();
            let scaled = Mat::from_fn(uty.nrows(), uty.ncols(), |k, j| shrink[k] * uty[(k, j)]);
            let fitted = &self.u * scaled;
            let hat: Vec<f64> = (0..n)
                .map(|i| (0..shrink.len()).map(|k| u_sq[(i, k)] * shrink[k]).sum::<f64>() + 1.0 / n as f64)
                .collect();
            for j in 0..y.ncols() {
                let mut err = 0.0;
                for i in 0..n {
                    let e = (yc[(i, j)] - fitted[(i, j)]) / (1.0 - hat[i]).max(1e-12);
                    err += e * e;
                }
                out[(a, j)] = err;
            }
        }
        Ok(out)
    }

    fn center_y(&self, y: &Mat) -> Result<(Mat, Vec<f64>)> {
        if y.nrows() != self.u.nrows() {
            return Err(Error::Input(format!(
                "response has {} rows, design has {}",
                y.nrows(),
                self.u.nrows()
            )));
        }
        if !all_finite(y) {
            return Err(Error::Input("non-finite values in responses".into()));
        }
        let n = y.nrows() as f64;
        let y_mean: Vec<f64> = y.column_iter().map(|c| c.sum() / n).collect();
        let mut yc = y.clone();
        for (j, m) in y_mean.iter().enumerate() {
            yc.column_mut(j).add_scalar_mut(-m);
        }
        Ok((yc, y_mean))
    }

    /// Fits every output with its own LOO-selected penalty (first grid value
    /// on ties).
    pub fn fit(&self, y: &Mat) -> Result<RidgeFit> {
        let errors = self.loo_errors(y)?;
        let chosen: Vec<usize> = (0..y.ncols())
            .map(|j| {
                (0..self.alphas.len())
                    .min_by(|&a, &b| errors[(a, j)].total_cmp(&errors[(b, j)]).then(a.cmp(&b)))
                    .expect("nonempty alphas")
            })
            .collect();
        let (yc, y_mean) = self.center_y(y)?;
        let uty = self.u.transpose() * &yc;
        let coef = Mat::from_fn(uty.nrows(), uty.ncols(), |k, j| {
            let a = self.alphas[chosen[j]];
            self.s[k] / (self.s[k] * self.s[k] + a) * uty[(k, j)]
        });
        let weights = &self.v * coef;
        let intercept = (0..y.ncols())
            .map(|j| {
                y_mean[j] - self.x_mean.iter().enumerate().map(|(i, m)| m * weights[(i, j)]).sum::<f64>()
            })
            .collect();
        Ok(RidgeFit { weights, intercept, alpha: chosen.iter().map(|&a| self.alphas[a]).collect() })
    }
}

/// Ridge fit of every column of `y_train` on `x_train`.
pub fn ridge_fit(x_train: &Mat, y_train: &Mat, alphas: &[f64]) -> Result<RidgeFit> {
    RidgeSolver::new(x_train, alphas)?.fit(y_train)
}
