//! Two-layer network with DCT-parameterized adaptive activations.

pub mod basis;
pub mod grad;
pub mod model;
pub mod serialize;
pub mod train;

pub use basis::{
    activation, activation_at_index, activation_folded, activation_slope,
    activation_slope_at_index, argument_of_index, dct_basis_cos, dct_basis_sin, fold_index, Sign,
};
pub use grad::{
    first_layer_core, grad_first_layer, grad_receiver_params, gradients, lms_step, FirstLayerNorm,
    FirstLayerUpdate, Gradients, LearningRates, ReceiverGradients,
};
pub use model::{EnnConfig, EnnModel, ForwardTrace};
pub(crate) use train::epoch_orders;
pub use train::{accuracy, classify, train_centralized, EpochMetrics, TrainOptions};
