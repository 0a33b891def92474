//! Model inversion: search the input space for a point whose model output
//! matches an observed confidence, with gradients flowing only to the input.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::classifier::ClassifierConfig;
use super::{AttackError, AttackKind, AttackReport};
use crate::nn::{bce_loss, logit, sigmoid, Activation, Adam, LayerSpec, Matrix, Network, Optimizer};
use crate::synthdata::{generate, Dataset};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            learning_rate: 0.01,
            seed: 0,
        }
    }
}

/// Runs Adam on the attacker's input `x̂ ∈ [0,1]^d` to minimise
/// `BCE(f(x̂), y_target)`. `true_input`, when the harness knows it, adds an
/// input MAE to the report.
pub fn inversion_run(
    model: &Network,
    y_target: f64,
    true_input: Option<&[f64]>,
    cfg: &InversionConfig,
) -> Result<AttackReport, AttackError> {
    if !(y_target > 0.0 && y_target < 1.0) {
        return Err(AttackError::InvalidConfig(format!("target {y_target} outside (0, 1)")));
    }
    if model.out_dim() != 1 {
        return Err(AttackError::InvalidConfig("inversion needs a single-output model".into()));
    }
    let d = model.in_dim();
    if let Some(t) = true_input {
        if t.len() != d {
            return Err(AttackError::LengthMismatch {
                scores: t.len(),
                labels: d,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = Matrix::from_vec(1, d, (0..d).map(|_| rng.gen::<f64>()).collect()).expect("1 × d");
    let target = Matrix::filled(1, 1, y_target);
    let mut adam = Adam::new(cfg.learning_rate)?;
    let mut trace_losses = Vec::with_capacity(cfg.steps);

    for step in 0..cfg.steps {
        let trace = model.trace(&x)?;
        let (loss, grad) = bce_loss(trace.output(), &target)?;
        if !loss.is_finite() {
            return Err(AttackError::NonFiniteLoss { step });
        }
        trace_losses.push(loss);
        let (_, input_grad) = model.backprop(&trace, &grad)?;
        adam.step(&mut [x.data_mut()], &[input_grad.data()])?;
        for v in x.data_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    }

    let out = model.predict(&x)?.get(0, 0);
    let (final_loss, _) = bce_loss(&Matrix::filled(1, 1, out), &target)?;
    if !final_loss.is_finite() {
        return Err(AttackError::NonFiniteLoss { step: cfg.steps });
    }
    let mut report = AttackReport::new(AttackKind::Inversion, cfg, cfg.seed);
    report.set_metric("inversion_output_gap", (out - y_target).abs());
    report.set_metric("y_target", y_target);
    report.set_metric("final_output", out);
    report.set_metric("initial_loss", trace_losses.first().copied().unwrap_or(final_loss));
    report.set_metric("final_loss", final_loss);
    if let Some(t) = true_input {
        let mae = t.iter().zip(x.data()).map(|(a, b)| (a - b).abs()).sum::<f64>() / d as f64;
        report.set_metric("inversion_input_mae", mae);
    }
    report.artifacts.recovered_input = Some(x.into_vec());
    report.artifacts.loss_trace = Some(trace_losses);
    report.finish()
}

/// `f(a) = sigmoid(w·a + b)`: the one-feature model whose inverse is known.
pub fn monotone_model(w: f64, b: f64) -> Network {
    let mut net = Network::zeroed(&[LayerSpec::new(1, 1, Activation::Sigmoid)]).expect("valid spec");
    let layer = net.layer_mut(0);
    layer.weights.set(0, 0, w);
    layer.bias.set(0, 0, b);
    net
}

/// Closed-form preimage of `y` under [`monotone_model`].
pub fn monotone_inverse(w: f64, b: f64, y: f64) -> f64 {
    (logit(y) - b) / w
}

/// Probability of the sickness label used to train inversion targets: rises
/// steeply with age, slightly with gender.
pub fn sickness_probability(age_norm: f64, gender: f64) -> f64 {
    sigmoid(8.0 * (age_norm - 0.5) + (gender - 0.5))
}

/// `n` synthetic records with sickness labels drawn from
/// [`sickness_probability`] of their true features.
pub fn inversion_training_set(n: usize, seed: u64) -> Result<(Dataset, Vec<f64>), AttackError> {
    let ds = generate(n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51c4);
    let labels = ds
        .records
        .iter()
        .map(|r| {
            let [age_n, _, gender] = ds.features_of(r);
            f64::from(u8::from(rng.gen::<f64>() < sickness_probability(age_n, gender)))
        })
        .collect();
    Ok((ds, labels))
}

/// Fits a classifier over (age_norm, gender) of `ds` against `labels`.
pub fn train_inversion_model(
    ds: &Dataset,
    labels: &[f64],
    model: &ClassifierConfig,
    seed: u64,
) -> Result<Network, AttackError> {
    let n = ds.len();
    if labels.len() != n {
        return Err(AttackError::LengthMismatch {
            scores: n,
            labels: labels.len(),
        });
    }
    let mut xs = Vec::with_capacity(n * 2);
    for r in &ds.records {
        let [age_n, _, gender] = ds.features_of(r);
        xs.extend([age_n, gender]);
    }
    let x = Matrix::from_vec(n, 2, xs).expect("n × 2");
    let y = Matrix::from_vec(n, 1, labels.to_vec()).expect("n × 1");
    let (net, _) = model.fit(&x, &y, seed.wrapping_add(1), seed.wrapping_add(2))?;
    Ok(net)
}

/// Trains the "medical" target over (age_norm, gender) on `n` synthetic
/// records whose labels follow [`sickness_probability`].
pub fn train_inversion_target(n: usize, model: &ClassifierConfig, seed: u64) -> Result<Network, AttackError> {
    let (ds, labels) = inversion_training_set(n, seed)?;
    train_inversion_model(&ds, &labels, model, seed)
}
