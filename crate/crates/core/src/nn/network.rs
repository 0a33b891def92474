use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Matrix, NnError, Optimizer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            in_dim,
            out_dim,
            activation,
        }
    }
}

/// One fully connected layer: `activation(x · W + b)` with `W` of shape `in × out`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    spec: LayerSpec,
    pub weights: Matrix,
    pub bias: Matrix,
    grad_w: Matrix,
    grad_b: Matrix,
}

impl Dense {
    fn zeroed(spec: LayerSpec) -> Self {
        Self {
            spec,
            weights: Matrix::zeros(spec.in_dim, spec.out_dim),
            bias: Matrix::zeros(1, spec.out_dim),
            grad_w: Matrix::zeros(spec.in_dim, spec.out_dim),
            grad_b: Matrix::zeros(1, spec.out_dim),
        }
    }

    pub fn spec(&self) -> LayerSpec {
        self.spec
    }

    pub fn grad_weights(&self) -> &Matrix {
        &self.grad_w
    }

    pub fn grad_bias(&self) -> &Matrix {
        &self.grad_b
    }
}

/// Intermediate values of one forward pass, consumed by [`Network::backprop`].
#[derive(Clone, Debug)]
pub struct Trace {
    inputs: Vec<Matrix>,
    pre_activations: Vec<Matrix>,
    output: Matrix,
}

impl Trace {
    pub fn output(&self) -> &Matrix {
        &self.output
    }
}

/// Parameter gradients produced by a pure backward pass.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Matrix>,
}

/// Dense feed-forward network with per-layer gradient buffers.
#[derive(Clone, Debug)]
pub struct Network {
    layers: Vec<Dense>,
    cache: Option<Trace>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

impl Network {
    /// Builds a network with Glorot-uniform weights and zero biases.
    pub fn new(specs: &[LayerSpec], seed: u64) -> Result<Self, NnError> {
        let mut net = Self::zeroed(specs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut net.layers {
            let limit = (6.0 / (layer.spec.in_dim + layer.spec.out_dim) as f64).sqrt();
            for w in layer.weights.data_mut() {
                *w = rng.gen_range(-limit..=limit);
            }
        }
        Ok(net)
    }

    /// All weights and biases zero; useful for hand-set models.
    pub fn zeroed(specs: &[LayerSpec]) -> Result<Self, NnError> {
        if specs.is_empty() {
            return Err(NnError::InvalidConfig("network needs at least one layer".into()));
        }
        for (i, s) in specs.iter().enumerate() {
            if s.in_dim == 0 || s.out_dim == 0 {
                return Err(NnError::InvalidConfig(format!("layer {i} has a zero dimension")));
            }
        }
        for (i, pair) in specs.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(NnError::InvalidConfig(format!(
                    "layer {i} out_dim {} does not chain into layer {} in_dim {}",
                    pair[0].out_dim,
                    i + 1,
                    pair[1].in_dim
                )));
            }
        }
        Ok(Self {
            layers: specs.iter().copied().map(Dense::zeroed).collect(),
            cache: None,
        })
    }

    /// Convenience constructor for an MLP `dims[0] → … → dims[n]` with `hidden`
    /// activations between layers and `output` on the last one.
    pub fn mlp(dims: &[usize], hidden: Activation, output: Activation, seed: u64) -> Result<Self, NnError> {
        if dims.len() < 2 {
            return Err(NnError::InvalidConfig("mlp needs at least input and output dims".into()));
        }
        let n = dims.len() - 1;
        let specs: Vec<LayerSpec> = (0..n)
            .map(|i| LayerSpec::new(dims[i], dims[i + 1], if i + 1 == n { output } else { hidden }))
            .collect();
        Self::new(&specs, seed)
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layer_mut(&mut self, i: usize) -> &mut Dense {
        &mut self.layers[i]
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].spec.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].spec.out_dim
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.data().len() + l.bias.data().len())
            .sum()
    }

    /// Weights then bias of each layer, in layer order.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.data());
            out.extend_from_slice(l.bias.data());
        }
        out
    }

    /// Gradient buffers flattened in the same order as [`Network::parameters`].
    pub fn gradients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend_from_slice(l.grad_w.data());
            out.extend_from_slice(l.grad_b.data());
        }
        out
    }

    pub fn set_parameters(&mut self, values: &[f64]) -> Result<(), NnError> {
        if values.len() != self.parameter_count() {
            return Err(NnError::Shape {
                op: "set_parameters",
                expected: (self.parameter_count(), 1),
                got: (values.len(), 1),
            });
        }
        let mut off = 0;
        for l in &mut self.layers {
            let n = l.weights.data().len();
            l.weights.data_mut().copy_from_slice(&values[off..off + n]);
            off += n;
            let n = l.bias.data().len();
            l.bias.data_mut().copy_from_slice(&values[off..off + n]);
            off += n;
        }
        Ok(())
    }

    /// Order-sensitive FNV-style digest over the parameter bit patterns.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.parameters() {
            h ^= v.to_bits();
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }

    /// Forward pass without touching the network's cache.
    pub fn trace(&self, x: &Matrix) -> Result<Trace, NnError> {
        if x.cols() != self.in_dim() {
            return Err(NnError::Shape {
                op: "forward",
                expected: (x.rows(), self.in_dim()),
                got: x.shape(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut current = x.clone();
        for layer in &self.layers {
            let mut z = current.matmul(&layer.weights)?;
            let bias = layer.bias.data();
            for r in 0..z.rows() {
                for (v, b) in z.row_mut(r).iter_mut().zip(bias) {
                    *v += b;
                }
            }
            let act = layer.spec.activation;
            let a = z.map(|v| act.apply(v));
            inputs.push(current);
            pre_activations.push(z);
            current = a;
        }
        Ok(Trace {
            inputs,
            pre_activations,
            output: current,
        })
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix, NnError> {
        Ok(self.trace(x)?.output)
    }

    /// Forward pass that caches intermediates for a subsequent [`Network::backward`].
    pub fn forward(&mut self, x: &Matrix) -> Result<Matrix, NnError> {
        let trace = self.trace(x)?;
        let out = trace.output.clone();
        self.cache = Some(trace);
        Ok(out)
    }

    /// Reverse-mode pass over a trace. Returns parameter gradients and the
    /// gradient with respect to the network input; never mutates the network.
    pub fn backprop(&self, trace: &Trace, loss_grad: &Matrix) -> Result<(Gradients, Matrix), NnError> {
        loss_grad.ensure_shape("backward", trace.output.shape())?;
        let n = self.layers.len();
        let mut weights = vec![Matrix::zeros(0, 0); n];
        let mut biases = vec![Matrix::zeros(0, 0); n];
        let mut upstream = loss_grad.clone();
        for i in (0..n).rev() {
            let layer = &self.layers[i];
            let act = layer.spec.activation;
            let z = &trace.pre_activations[i];
            let a = if i + 1 == n { &trace.output } else { &trace.inputs[i + 1] };
            let mut dz = upstream;
            for ((g, &zv), &av) in dz.data_mut().iter_mut().zip(z.data()).zip(a.data()) {
                *g *= act.derivative(zv, av);
            }
            weights[i] = trace.inputs[i].t_matmul(&dz)?;
            biases[i] = dz.column_sums();
            upstream = dz.matmul_t(&layer.weights)?;
        }
        Ok((Gradients { weights, biases }, upstream))
    }

    /// Accumulates parameter gradients into the grad buffers using the cached
    /// forward pass and returns the input gradient.
    pub fn backward(&mut self, loss_grad: &Matrix) -> Result<Matrix, NnError> {
        let trace = self.cache.take().ok_or(NnError::NoForwardPass)?;
        let result = self.backprop(&trace, loss_grad);
        self.cache = Some(trace);
        let (grads, input_grad) = result?;
        self.accumulate(&grads);
        Ok(input_grad)
    }

    /// Adds externally computed gradients into the grad buffers.
    pub fn accumulate(&mut self, grads: &Gradients) {
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(grads.weights.iter().zip(&grads.biases)) {
            layer.grad_w.add_assign(gw);
            layer.grad_b.add_assign(gb);
        }
    }

    pub fn zero_grad(&mut self) {
        for l in &mut self.layers {
            l.grad_w.fill(0.0);
            l.grad_b.fill(0.0);
        }
    }

    pub(crate) fn param_slices(&mut self) -> (Vec<&mut [f64]>, Vec<&[f64]>) {
        let mut params = Vec::with_capacity(self.layers.len() * 2);
        let mut grads = Vec::with_capacity(self.layers.len() * 2);
        for l in &mut self.layers {
            let Dense {
                weights,
                bias,
                grad_w,
                grad_b,
                ..
            } = l;
            params.push(weights.data_mut());
            grads.push(grad_w.data());
            params.push(bias.data_mut());
            grads.push(grad_b.data());
        }
        (params, grads)
    }

    /// Applies one optimizer update from the grad buffers, then zeroes them.
    pub fn step(&mut self, opt: &mut dyn Optimizer) -> Result<(), NnError> {
        {
            let (mut params, grads) = self.param_slices();
            opt.step(&mut params, &grads)?;
        }
        self.zero_grad();
        check_finite_params(&self.parameters())
    }
}

pub(crate) fn check_finite_params(values: &[f64]) -> Result<(), NnError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(NnError::NonFiniteParameter { index }),
        None => Ok(()),
    }
}
