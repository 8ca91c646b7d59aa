//! Significance testing, noise ceilings, layer preference and grouping.

mod ceiling;
mod fdr;
mod friedman;
mod groups;
mod layers;
mod ranks;
pub mod tables;
mod voxelwise;
mod wilcoxon;

pub use ceiling::{isc_noise_ceiling, NoiseCeiling};
pub use fdr::{bh_fdr, BhOutcome};
pub use friedman::{friedman, FriedmanOutcome};
pub use groups::{
    group_mean, group_mean_subjects, pos_grouped_importance, RoiSummary, OTHER_TAG, UPOS_TAGS, Z95,
};
pub use layers::{
    importance_alignment, layer_percentages, layer_preference, word_best_layers, LayerDistributions,
    LayerPreference,
};
pub use ranks::midranks;
pub use voxelwise::{voxelwise_significance, PValueSet, TestKind, VoxelSignificance};
pub use wilcoxon::{
    wilcoxon_greater, wilcoxon_greater_exact, wilcoxon_greater_normal, WilcoxonMethod, WilcoxonOutcome,
    EXACT_MAX_N, MIN_N,
};
