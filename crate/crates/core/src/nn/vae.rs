use super::network::check_finite_params;
use super::{mse_loss, Activation, Gradients, LayerSpec, Matrix, Network, NnError, Optimizer};

/// Weight of the KL term. Both terms are per-element means, so the weight has
/// to be small for reconstruction to dominate and for members to overfit.
pub const DEFAULT_BETA: f64 = 0.01;

/// Components of one VAE objective evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VaeLoss {
    pub total: f64,
    pub reconstruction: f64,
    pub kl: f64,
}

/// Variational autoencoder: the encoder emits `[mu | log_var]`, the decoder
/// maps a latent sample back to input space through a sigmoid.
#[derive(Clone, Debug, PartialEq)]
pub struct Vae {
    encoder: Network,
    decoder: Network,
    latent_dim: usize,
    beta: f64,
}

impl Vae {
    pub fn new(input_dim: usize, hidden_dim: usize, latent_dim: usize, seed: u64) -> Result<Self, NnError> {
        let encoder = Network::new(
            &[
                LayerSpec::new(input_dim, hidden_dim, Activation::Relu),
                LayerSpec::new(hidden_dim, 2 * latent_dim, Activation::Identity),
            ],
            seed,
        )?;
        let decoder = Network::new(
            &[
                LayerSpec::new(latent_dim, hidden_dim, Activation::Relu),
                LayerSpec::new(hidden_dim, input_dim, Activation::Sigmoid),
            ],
            seed.wrapping_add(0x9e37_79b9_7f4a_7c15),
        )?;
        Self::from_parts(encoder, decoder, latent_dim, DEFAULT_BETA)
    }

    pub fn from_parts(encoder: Network, decoder: Network, latent_dim: usize, beta: f64) -> Result<Self, NnError> {
        if encoder.out_dim() != 2 * latent_dim {
            return Err(NnError::InvalidConfig(format!(
                "encoder emits {} values, expected 2×{latent_dim}",
                encoder.out_dim()
            )));
        }
        if decoder.in_dim() != latent_dim || decoder.out_dim() != encoder.in_dim() {
            return Err(NnError::InvalidConfig(
                "decoder must map latent_dim back to the encoder input dim".into(),
            ));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(NnError::InvalidConfig(format!("beta must be finite and ≥ 0, got {beta}")));
        }
        Ok(Self {
            encoder,
            decoder,
            latent_dim,
            beta,
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.in_dim()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn encoder(&self) -> &Network {
        &self.encoder
    }

    pub fn decoder(&self) -> &Network {
        &self.decoder
    }

    pub fn encoder_mut(&mut self) -> &mut Network {
        &mut self.encoder
    }

    pub fn decoder_mut(&mut self) -> &mut Network {
        &mut self.decoder
    }

    /// Posterior parameters `(mu, log_var)`, each `batch × latent_dim`.
    pub fn encode(&self, x: &Matrix) -> Result<(Matrix, Matrix), NnError> {
        let h = self.encoder.predict(x)?;
        Ok(split_posterior(&h, self.latent_dim))
    }

    pub fn decode(&self, z: &Matrix) -> Result<Matrix, NnError> {
        self.decoder.predict(z)
    }

    /// Deterministic reconstruction through the posterior mean.
    pub fn reconstruct_mean(&self, x: &Matrix) -> Result<Matrix, NnError> {
        let (mu, _) = self.encode(x)?;
        self.decode(&mu)
    }

    /// Per-row mean squared reconstruction error via the posterior mean.
    pub fn reconstruction_errors(&self, x: &Matrix) -> Result<Vec<f64>, NnError> {
        let recon = self.reconstruct_mean(x)?;
        Ok((0..x.rows())
            .map(|r| {
                let d = x.cols() as f64;
                x.row(r)
                    .iter()
                    .zip(recon.row(r))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / d
            })
            .collect())
    }

    /// Objective and parameter gradients without mutating the model.
    ///
    /// `noise` is the standard-normal draw for `z = mu + exp(log_var/2)·noise`.
    pub fn evaluate(&self, x: &Matrix, noise: &Matrix) -> Result<(VaeLoss, Gradients, Gradients), NnError> {
        noise.ensure_shape("vae_loss", (x.rows(), self.latent_dim))?;
        let enc_trace = self.encoder.trace(x)?;
        let (mu, log_var) = split_posterior(enc_trace.output(), self.latent_dim);

        let mut z = mu.clone();
        for ((zv, &lv), &e) in z.data_mut().iter_mut().zip(log_var.data()).zip(noise.data()) {
            *zv += (0.5 * lv).exp() * e;
        }
        let dec_trace = self.decoder.trace(&z)?;
        let (reconstruction, d_recon) = mse_loss(dec_trace.output(), x)?;
        let (dec_grads, dz) = self.decoder.backprop(&dec_trace, &d_recon)?;

        let m = mu.data().len().max(1) as f64;
        let mut kl_sum = 0.0;
        let mut d_enc = Matrix::zeros(x.rows(), 2 * self.latent_dim);
        for r in 0..x.rows() {
            for j in 0..self.latent_dim {
                let (mu_v, lv) = (mu.get(r, j), log_var.get(r, j));
                let e = noise.get(r, j);
                let dzv = dz.get(r, j);
                kl_sum += 1.0 + lv - mu_v * mu_v - lv.exp();
                let d_mu = dzv + self.beta * mu_v / m;
                let d_lv = dzv * e * 0.5 * (0.5 * lv).exp() + self.beta * 0.5 * (lv.exp() - 1.0) / m;
                d_enc.set(r, j, d_mu);
                d_enc.set(r, self.latent_dim + j, d_lv);
            }
        }
        let kl = -0.5 * kl_sum / m;
        let (enc_grads, _) = self.encoder.backprop(&enc_trace, &d_enc)?;
        Ok((
            VaeLoss {
                total: reconstruction + self.beta * kl,
                reconstruction,
                kl,
            },
            enc_grads,
            dec_grads,
        ))
    }

    /// Evaluates the objective and accumulates gradients into both networks.
    pub fn loss_and_backward(&mut self, x: &Matrix, noise: &Matrix) -> Result<VaeLoss, NnError> {
        let (loss, enc, dec) = self.evaluate(x, noise)?;
        self.encoder.accumulate(&enc);
        self.decoder.accumulate(&dec);
        Ok(loss)
    }

    pub fn parameters(&self) -> Vec<f64> {
        let mut p = self.encoder.parameters();
        p.extend(self.decoder.parameters());
        p
    }

    pub fn gradients(&self) -> Vec<f64> {
        let mut g = self.encoder.gradients();
        g.extend(self.decoder.gradients());
        g
    }

    pub fn set_parameters(&mut self, values: &[f64]) -> Result<(), NnError> {
        let n = self.encoder.parameter_count();
        if values.len() != n + self.decoder.parameter_count() {
            return Err(NnError::Shape {
                op: "set_parameters",
                expected: (n + self.decoder.parameter_count(), 1),
                got: (values.len(), 1),
            });
        }
        self.encoder.set_parameters(&values[..n])?;
        self.decoder.set_parameters(&values[n..])
    }

    pub fn zero_grad(&mut self) {
        self.encoder.zero_grad();
        self.decoder.zero_grad();
    }

    /// One optimizer update over encoder then decoder parameters.
    pub fn step(&mut self, opt: &mut dyn Optimizer) -> Result<(), NnError> {
        {
            let (mut p, mut g) = self.encoder.param_slices();
            let (dp, dg) = self.decoder.param_slices();
            p.extend(dp);
            g.extend(dg);
            opt.step(&mut p, &g)?;
        }
        self.zero_grad();
        check_finite_params(&self.parameters())
    }
}

fn split_posterior(h: &Matrix, latent: usize) -> (Matrix, Matrix) {
    let mut mu = Matrix::zeros(h.rows(), latent);
    let mut log_var = Matrix::zeros(h.rows(), latent);
    for r in 0..h.rows() {
        mu.row_mut(r).copy_from_slice(&h.row(r)[..latent]);
        log_var.row_mut(r).copy_from_slice(&h.row(r)[latent..2 * latent]);
    }
    (mu, log_var)
}
