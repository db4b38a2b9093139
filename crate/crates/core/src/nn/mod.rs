//! Numerical engine: dense layers, activations, softmax cross-entropy and
//! full-batch Adam with coupled L2 weight decay.

mod activation;
mod adam;
mod layer;
mod loss;
mod train;

pub use activation::Activation;
pub use adam::{
    adam_step, apply_decoupled_weight_decay, apply_weight_decay, AdamState, TrainConfig,
};
pub use layer::{init_layer, LayerParams};
pub use loss::{batch_softmax_cross_entropy, softmax, softmax_cross_entropy};
pub use train::{train_model, BatchModel};
