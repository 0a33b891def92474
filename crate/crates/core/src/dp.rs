//! Differential-privacy mechanisms with replayable noise.
//!
//! Every random draw is addressed by `(seed, index)`: the index selects a
//! ChaCha stream, so a given pair always yields the same sample and distinct
//! indices yield independent ones.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DpError {
    #[error("laplace scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("sensitivity must be positive and finite, got {0}")]
    InvalidSensitivity(f64),
    #[error("randomized response at epsilon 0 carries no signal to debias")]
    NoSignal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpParams {
    pub epsilon: f64,
    pub sensitivity: f64,
    pub seed: u64,
}

impl DpParams {
    pub fn new(epsilon: f64, sensitivity: f64, seed: u64) -> Result<Self, DpError> {
        let p = Self {
            epsilon,
            sensitivity,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    /// Counting query: sensitivity 1.
    pub fn counting(epsilon: f64, seed: u64) -> Result<Self, DpError> {
        Self::new(epsilon, 1.0, seed)
    }

    pub fn validate(&self) -> Result<(), DpError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(DpError::InvalidEpsilon(self.epsilon));
        }
        if !(self.sensitivity > 0.0 && self.sensitivity.is_finite()) {
            return Err(DpError::InvalidSensitivity(self.sensitivity));
        }
        Ok(())
    }

    /// Laplace scale `b = sensitivity / ε`.
    pub fn scale(&self) -> f64 {
        self.sensitivity / self.epsilon
    }
}

fn stream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform draw in `(−½, ½)` for `(seed, index)`; the open lower end keeps
/// the inverse CDF finite.
pub fn uniform_centered(seed: u64, index: u64) -> f64 {
    let mut rng = stream(seed, index);
    loop {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5;
        if u > -0.5 {
            return u;
        }
    }
}

/// Inverse CDF of Laplace(0, b) at a centered uniform `u`.
pub fn laplace_from_uniform(b: f64, u: f64) -> f64 {
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

pub fn laplace_sample(b: f64, seed: u64, index: u64) -> Result<f64, DpError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(DpError::InvalidScale(b));
    }
    Ok(laplace_from_uniform(b, uniform_centered(seed, index)))
}

pub fn laplace_density(x: f64, mean: f64, b: f64) -> f64 {
    (-(x - mean).abs() / b).exp() / (2.0 * b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyCount {
    pub value: f64,
    /// Set when the raw noisy value was negative and post-processed to 0.
    pub clamped: bool,
}

/// Laplace-noised count with scale `sensitivity/ε`, optionally clamped at 0.
pub fn dp_count(true_count: u64, params: &DpParams, index: u64, clamp_at_zero: bool) -> Result<NoisyCount, DpError> {
    params.validate()?;
    let raw = true_count as f64 + laplace_sample(params.scale(), params.seed, index)?;
    if clamp_at_zero && raw < 0.0 {
        Ok(NoisyCount {
            value: 0.0,
            clamped: true,
        })
    } else {
        Ok(NoisyCount {
            value: raw,
            clamped: false,
        })
    }
}

/// Probability of reporting the true bit: `e^ε / (e^ε + 1)`.
pub fn truth_probability(epsilon: f64) -> f64 {
    // 1/(1+e^-ε) avoids overflow for large ε
    1.0 / (1.0 + (-epsilon).exp())
}

pub fn randomized_response(bit: bool, epsilon: f64, seed: u64, index: u64) -> Result<bool, DpError> {
    if !(epsilon >= 0.0) || epsilon.is_nan() {
        return Err(DpError::InvalidEpsilon(epsilon));
    }
    let truthful = stream(seed, index).gen::<f64>() < truth_probability(epsilon);
    Ok(if truthful { bit } else { !bit })
}

/// Unbiased estimate of the true proportion of ones from the observed
/// proportion of reported ones.
pub fn debias_randomized_response(observed_fraction: f64, epsilon: f64) -> Result<f64, DpError> {
    let q = truth_probability(epsilon);
    if (2.0 * q - 1.0).abs() < 1e-12 {
        return Err(DpError::NoSignal);
    }
    Ok((observed_fraction - (1.0 - q)) / (2.0 * q - 1.0))
}
