//! Gradient norm, gradient × input, integrated gradients, erasure and layer
//! conductance over any [`AttributionModel`].

mod conductance;
mod methods;
mod model;
mod riemann;
mod words;

pub use conductance::{
    layer_conductance, layer_conductance_between, layer_importance, LayerConductanceMatrix, Reduction,
};
pub use methods::{
    erasure, erasure_groups, gradient_norm, gradient_x_input, integrated_gradients,
    integrated_gradients_signed, AttributionVector, BaselineKind, ErasureMode, Method, DEFAULT_STEPS,
};
pub use model::{AttributionModel, LinearModel};
pub use riemann::RiemannRule;
pub use words::{tokens_to_words, word_token_groups, WordScore};
