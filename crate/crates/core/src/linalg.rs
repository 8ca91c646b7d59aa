//! Small dense-matrix helpers shared across modules.
//!
//! Matrices are `nalgebra::DMatrix<f64>`; on disk everything is row-major.

use nalgebra::DMatrix;

pub type Mat = DMatrix<f64>;

/// Flattens a matrix in row-major order.
pub fn to_row_major(m: &Mat) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Builds a matrix from a row-major slice. Panics if the length is wrong.
pub fn from_row_major(nrows: usize, ncols: usize, data: &[f64]) -> Mat {
    assert_eq!(data.len(), nrows * ncols, "row-major buffer has wrong length");
    Mat::from_row_slice(nrows, ncols, data)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Pearson correlation. `None` when either input has zero variance or the
/// lengths differ or are below two.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let ma = mean(a);
    let mb = mean(b);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    // relative guard: a column that is constant up to rounding counts as degenerate
    let scale_a = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let scale_b = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let n = a.len() as f64;
    let tiny = |scale: f64| (scale * 1e-12).powi(2) * n;
    if saa <= tiny(scale_a) || sbb <= tiny(scale_b) || saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

pub fn all_finite(m: &Mat) -> bool {
    m.iter().all(|v| v.is_finite())
}
