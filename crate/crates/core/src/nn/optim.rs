use serde::{Deserialize, Serialize};

use super::NnError;

/// Updates parameter slots in place from matching gradient slots.
pub trait Optimizer {
    fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NnError>;
}

fn check_grads(grads: &[&[f64]]) -> Result<(), NnError> {
    let mut offset = 0;
    for g in grads {
        if let Some(i) = g.iter().position(|v| !v.is_finite()) {
            return Err(NnError::NonFiniteGradient { index: offset + i });
        }
        offset += g.len();
    }
    Ok(())
}

fn check_slots(params: &[&mut [f64]], grads: &[&[f64]]) -> Result<(), NnError> {
    if params.len() != grads.len() {
        return Err(NnError::Shape {
            op: "optimizer",
            expected: (params.len(), 1),
            got: (grads.len(), 1),
        });
    }
    for (p, g) in params.iter().zip(grads) {
        if p.len() != g.len() {
            return Err(NnError::Shape {
                op: "optimizer",
                expected: (p.len(), 1),
                got: (g.len(), 1),
            });
        }
    }
    Ok(())
}

/// Plain gradient descent: `p ← p − lr·g`.
pub fn sgd_step(params: &mut [f64], grads: &[f64], lr: f64) -> Result<(), NnError> {
    let mut p = [params];
    Sgd::new(lr)?.step(&mut p, &[grads])
}

#[derive(Clone, Debug)]
pub struct Sgd {
    lr: f64,
}

impl Sgd {
    pub fn new(lr: f64) -> Result<Self, NnError> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(NnError::InvalidConfig(format!("learning rate must be positive, got {lr}")));
        }
        Ok(Self { lr })
    }
}

impl Optimizer for Sgd {
    fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NnError> {
        check_slots(params, grads)?;
        check_grads(grads)?;
        for (p, g) in params.iter_mut().zip(grads) {
            for (pv, gv) in p.iter_mut().zip(g.iter()) {
                *pv -= self.lr * gv;
            }
        }
        Ok(())
    }
}

/// Hyperparameters and moment buffers of Adam.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
}

impl Default for AdamState {
    fn default() -> Self {
        Self {
            step: 0,
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Adam {
    state: AdamState,
}

impl Adam {
    pub fn new(lr: f64) -> Result<Self, NnError> {
        Self::with_params(lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_params(lr: f64, beta1: f64, beta2: f64, epsilon: f64) -> Result<Self, NnError> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(NnError::InvalidConfig(format!("learning rate must be positive, got {lr}")));
        }
        if !(0.0 < beta1 && beta1 < 1.0 && 0.0 < beta2 && beta2 < 1.0) {
            return Err(NnError::InvalidConfig("adam betas must lie in (0, 1)".into()));
        }
        if !(epsilon > 0.0) {
            return Err(NnError::InvalidConfig("adam epsilon must be positive".into()));
        }
        Ok(Self {
            state: AdamState {
                lr,
                beta1,
                beta2,
                epsilon,
                ..AdamState::default()
            },
        })
    }

    pub fn state(&self) -> &AdamState {
        &self.state
    }
}

impl Optimizer for Adam {
    fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NnError> {
        check_slots(params, grads)?;
        check_grads(grads)?;
        let s = &mut self.state;
        if s.first_moment.is_empty() {
            s.first_moment = grads.iter().map(|g| vec![0.0; g.len()]).collect();
            s.second_moment = s.first_moment.clone();
        } else if s.first_moment.len() != grads.len()
            || s.first_moment.iter().zip(grads).any(|(m, g)| m.len() != g.len())
        {
            return Err(NnError::InvalidConfig(
                "adam moment buffers do not match parameter shapes".into(),
            ));
        }
        s.step += 1;
        let t = s.step as i32;
        let c1 = 1.0 - s.beta1.powi(t);
        let c2 = 1.0 - s.beta2.powi(t);
        for (slot, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut s.first_moment[slot];
            let v = &mut s.second_moment[slot];
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * gi;
                v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * gi * gi;
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= s.lr * m_hat / (v_hat.sqrt() + s.epsilon);
            }
        }
        Ok(())
    }
}

/// Serializable optimizer choice used by training configs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerConfig {
    Sgd { lr: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimizerConfig {
    pub fn adam(lr: f64) -> Self {
        OptimizerConfig::Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn build(&self) -> Result<Box<dyn Optimizer>, NnError> {
        Ok(match *self {
            OptimizerConfig::Sgd { lr } => Box::new(Sgd::new(lr)?),
            OptimizerConfig::Adam {
                lr,
                beta1,
                beta2,
                epsilon,
            } => Box::new(Adam::with_params(lr, beta1, beta2, epsilon)?),
        })
    }
}
