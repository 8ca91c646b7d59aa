//! File codecs and the synthetic data generator.

mod bold;
pub mod container;
mod features;
mod labels;
mod synthetic;
pub mod text;
mod transcript;

pub use bold::{
    read_bold, read_dataset, write_bold, write_dataset, BoldDataset, BoldRun, BOLD_EXTENSION,
    BOLD_FORMAT_VERSION,
};
pub use features::{read_features, write_features, FEATURES_FORMAT_VERSION};
pub use labels::{labels_per_voxel, parse_pos_tags, parse_roi_labels};
pub use synthetic::{
    convolve_columns, generate_synthetic, generate_synthetic_sources, hrf_kernel, GroundTruthManifest,
    HrfParams, SyntheticSpec,
};
pub use transcript::{parse_transcript, parse_transcript_str, write_transcript, TRANSCRIPT_HEADER};
