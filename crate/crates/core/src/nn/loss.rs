use ndarray::Array2;

use crate::scalar::Scalar;

/// Softmax with max-subtraction stabilization.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits
        .iter()
        .copied()
        .fold(T::neg_infinity(), |a, b| a.max(b));
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Negative log-likelihood of `label` under softmax of `logits`, with the
/// gradient `softmax(logits) - onehot(label)`.
pub fn softmax_cross_entropy<T: Scalar>(logits: &[T], label: usize) -> (T, Vec<T>) {
    assert!(label < logits.len(), "label {label} out of range");
    let max = logits
        .iter()
        .copied()
        .fold(T::neg_infinity(), |a, b| a.max(b));
    let log_sum_exp = logits
        .iter()
        .map(|&z| (z - max).exp())
        .sum::<T>()
        .ln()
        + max;
    let loss = log_sum_exp - logits[label];
    let mut grad = softmax(logits);
    grad[label] -= T::one();
    (loss, grad)
}

/// Mean cross-entropy over a batch of logit rows, and its gradient with the
/// `1/N` factor already applied.
pub fn batch_softmax_cross_entropy<T: Scalar>(
    logits: &Array2<T>,
    labels: &[usize],
) -> (T, Array2<T>) {
    assert_eq!(logits.nrows(), labels.len(), "batch size mismatch");
    assert!(!labels.is_empty(), "empty batch");
    let n = T::from_f64(labels.len() as f64);
    let mut grad = Array2::zeros(logits.dim());
    let mut total = T::zero();
    for (i, (row, &label)) in logits.rows().into_iter().zip(labels).enumerate() {
        let (loss, g) = softmax_cross_entropy(&row.to_vec(), label);
        total += loss;
        for (j, gj) in g.into_iter().enumerate() {
            grad[[i, j]] = gj / n;
        }
    }
    (total / n, grad)
}
