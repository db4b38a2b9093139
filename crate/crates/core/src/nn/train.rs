use crate::error::{Error, Result};
use crate::nn::{
    adam_step, apply_decoupled_weight_decay, apply_weight_decay, AdamState, LayerParams,
    TrainConfig,
};
use crate::scalar::Scalar;

/// A model trainable by full-batch gradient descent: exposes its dense
/// layers and computes the mean batch loss with gradients of the same shape.
pub trait BatchModel<T: Scalar> {
    type Batch;

    fn layers(&self) -> &[LayerParams<T>];
    fn layers_mut(&mut self) -> &mut [LayerParams<T>];
    fn loss_and_grads(&self, batch: &Self::Batch, labels: &[usize]) -> (T, Vec<LayerParams<T>>);
}

/// Runs one full-batch forward/backward pass and one Adam step per epoch,
/// returning the per-epoch loss history. Weight decay is folded into the
/// weight gradients before each step. Fails if the loss goes non-finite.
pub fn train_model<T: Scalar, M: BatchModel<T>>(
    model: &mut M,
    batch: &M::Batch,
    labels: &[usize],
    cfg: &TrainConfig,
) -> Result<Vec<T>> {
    cfg.validate()?;
    if labels.is_empty() {
        return Err(Error::validation("cannot train on an empty batch"));
    }
    let mut state = AdamState::new(model.layers());
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (loss, mut grads) = model.loss_and_grads(batch, labels);
        if !loss.is_finite() {
            return Err(Error::numeric(format!(
                "non-finite training loss at epoch {epoch}"
            )));
        }
        if !cfg.decoupled_weight_decay {
            apply_weight_decay(&mut grads, model.layers(), cfg.weight_decay);
        }
        adam_step(model.layers_mut(), &grads, &mut state, cfg)?;
        if cfg.decoupled_weight_decay {
            apply_decoupled_weight_decay(model.layers_mut(), cfg);
        }
        history.push(loss);
    }
    Ok(history)
}
