use super::{Matrix, NnError};

/// Predictions are clamped into `(δ, 1−δ)` before taking logarithms.
pub const BCE_CLAMP: f64 = 1e-7;

/// Mean binary cross-entropy and its gradient with respect to `pred`.
pub fn bce_loss(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix), NnError> {
    target.ensure_shape("bce_loss", pred.shape())?;
    let n = pred.data().len().max(1) as f64;
    let mut grad = Matrix::zeros(pred.rows(), pred.cols());
    let mut total = 0.0;
    for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
        let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
        total += -(t * p.ln() + (1.0 - t) * (1.0 - p).ln());
        *g = (p - t) / (p * (1.0 - p)) / n;
    }
    Ok((total / n, grad))
}

/// Mean squared error over all elements and its gradient `2(p−t)/N`.
pub fn mse_loss(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix), NnError> {
    target.ensure_shape("mse_loss", pred.shape())?;
    let n = pred.data().len().max(1) as f64;
    let mut grad = Matrix::zeros(pred.rows(), pred.cols());
    let mut total = 0.0;
    for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
        let d = p - t;
        total += d * d;
        *g = 2.0 * d / n;
    }
    Ok((total / n, grad))
}
