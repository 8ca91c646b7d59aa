use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Column z-scoring, and optionally PCA, fitted on training rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessor {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns with zero training variance; passed through as zeros.
    pub constant: Vec<bool>,
    /// `p × k` projection onto the leading principal axes. Axes beyond the
    /// rank of the training block are zero columns.
    pub pca_basis: Option<Mat>,
}

/// Relative singular-value cut-off below which a principal axis is treated
/// as absent.
const RANK_TOL: f64 = 1e-10;

impl Preprocessor {
    pub fn fit(x: &Mat, train_rows: &[usize], pca_components: Option<usize>) -> Result<Self> {
        if train_rows.is_empty() {
            return Err(Error::Input("no training rows".into()));
        }
        if let Some(&r) = train_rows.iter().find(|&&r| r >= x.nrows()) {
            return Err(Error::Input(format!("training row {r} out of range")));
        }
        let n = train_rows.len() as f64;
        let p = x.ncols();
        let mut mean = vec![0.0; p];
        let mut std = vec![0.0; p];
        let mut constant = vec![false; p];
        for j in 0..p {
            let m = train_rows.iter().map(|&r| x[(r, j)]).sum::<f64>() / n;
            let v = train_rows.iter().map(|&r| (x[(r, j)] - m).powi(2)).sum::<f64>() / n;
            let scale = train_rows.iter().fold(0.0_f64, |a, &r| a.max(x[(r, j)].abs()));
            mean[j] = m;
            std[j] = v.sqrt();
            constant[j] = std[j] <= 1e-12 * scale || std[j] == 0.0;
        }
        let mut pre = Preprocessor { mean, std, constant, pca_basis: None };
        if let Some(k) = pca_components {
            if k == 0 {
                return Err(Error::Input("pca_components must be positive".into()));
            }
            let z = pre.standardize(&x.select_rows(train_rows.iter()));
            pre.pca_basis = Some(principal_axes(&z, k)?);
        }
        Ok(pre)
    }

    fn standardize(&self, x: &Mat) -> Mat {
        Mat::from_fn(x.nrows(), x.ncols(), |i, j| {
            if self.constant[j] {
                0.0
            } else {
                (x[(i, j)] - self.mean[j]) / self.std[j]
            }
        })
    }

    pub fn transform(&self, x: &Mat) -> Result<Mat> {
        if x.ncols() != self.mean.len() {
            return Err(Error::Input(format!("expected {} columns, got {}", self.mean.len(), x.ncols())));
        }
        let z = self.standardize(x);
        Ok(match &self.pca_basis {
            Some(b) => z * b,
            None => z,
        })
    }

    pub fn n_outputs(&self) -> usize {
        self.pca_basis.as_ref().map_or(self.mean.len(), |b| b.ncols())
    }
}

/// Leading `k` right singular vectors of the (already centred) block `z`, as
/// columns of a `p × k` matrix. Each axis is signed so its largest-magnitude
/// loading is positive.
fn principal_axes(z: &Mat, k: usize) -> Result<Mat> {
    let p = z.ncols();
    let mut basis = Mat::zeros(p, k);
    if z.nrows() == 0 || p == 0 {
        return Ok(basis);
    }
    let svd = z.clone().svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical { step: 0, msg: "SVD failed".into() })?;
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let s_max = order.first().map_or(0.0, |&i| s[i]);
    for (c, &i) in order.iter().take(k).enumerate() {
        if s[i] <= RANK_TOL * s_max || s[i] == 0.0 {
            break;
        }
        let mut axis: Vec<f64> = v_t.row(i).iter().copied().collect();
        let pivot = axis.iter().copied().fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            axis.iter_mut().for_each(|v| *v = -*v);
        }
        for (j, v) in axis.into_iter().enumerate() {
            basis[(j, c)] = v;
        }
    }
    Ok(basis)
}

/// Fits on `train_rows` and transforms every row of `x`.
pub fn preprocess(
    x: &Mat,
    train_rows: &[usize],
    pca_components: Option<usize>,
) -> Result<(Preprocessor, Mat)> {
    let pre = Preprocessor::fit(x, train_rows, pca_components)?;
    let out = pre.transform(x)?;
    Ok((pre, out))
}
