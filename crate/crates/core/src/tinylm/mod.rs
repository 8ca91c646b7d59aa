//! Toy decoder-only transformer with exact input and layer gradients.

mod backward;
mod config;
mod forward;
mod io;
mod model;
mod train;
pub mod vocab;

pub use backward::TargetGradients;
pub use config::{ModelConfig, MIN_SEQ_LEN};
pub use forward::{target_scalar, ForwardRecord, TargetKind, TargetSpec};
pub use io::{load_model, save_model, MODEL_FORMAT_VERSION};
pub use model::{Block, Model, Params, LN_EPS};
pub use train::{corpus_loss, train};
pub use vocab::{Encoded, Vocabulary};
