//! Voxelwise encoding: word features to TRs, FIR delays, per-fold
//! standardisation (and PCA for attention features), ridge regression and
//! held-out Pearson scoring.

mod design;
mod preprocess;
mod ridge;
mod score;

pub use design::{add_fir_delays, resample_to_tr, DesignMatrix};
pub use preprocess::{preprocess, Preprocessor};
pub use ridge::{default_alphas, log_alphas, ridge_fit, RidgeFit, RidgeSolver};
pub use score::{
    brain_score_cv, contiguous_folds, normalize_by_ceiling, read_scores, write_scores, BrainScoreMap,
    EncodingConfig, EncodingDesign, FoldScheme, DEFAULT_CEILING_EPSILON, SCORES_FORMAT_VERSION,
};
