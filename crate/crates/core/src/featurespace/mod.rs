//! Word-aligned feature spaces built from a transcript and a language model.

mod build;
mod matrix;
mod tokens;
mod transcript;
mod windows;

pub use build::{
    activation_features, attention_features, attribution_features, column_means, conductance_feature_set,
    conductance_features, window_token_scores, window_word_scores, AttributionSettings, ATTENTION_WINDOW,
    DEFAULT_WINDOW_LEN,
};
pub use matrix::{common_word_indices, FeatureKind, FeatureMatrix};
pub use tokens::{Span, TokenizedStory};
pub use transcript::{StoryTranscript, Word};
pub use windows::{build_windows, plan_windows, Window, WindowPlan};
