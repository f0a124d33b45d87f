use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn derivative(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// Affine layer `y = act(W x + b)` with `W` stored row-major, `rows`
/// outputs by `cols` inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub activation: Activation,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(rows: usize, cols: usize, activation: Activation) -> Self {
        Layer {
            rows,
            cols,
            activation,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    pub fn identity(n: usize, activation: Activation) -> Self {
        let mut l = Layer::zeros(n, n, activation);
        for i in 0..n {
            l.weights[i * n + i] = 1.0;
        }
        l
    }

    /// Orthogonal weights scaled by `gain`, zero bias.
    pub fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, activation: Activation, gain: f64, rng: &mut R) -> Self {
        let mut l = Layer::zeros(rows, cols, activation);
        // Orthonormalise the shorter side's vectors, each of the longer length.
        let (n_vec, len) = if rows >= cols { (cols, rows) } else { (rows, cols) };
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n_vec);
        while basis.len() < n_vec {
            let mut v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                v.iter_mut().for_each(|x| *x /= norm);
                basis.push(v);
            }
        }
        for r in 0..rows {
            for c in 0..cols {
                let w = if rows >= cols { basis[c][r] } else { basis[r][c] };
                l.weights[r * cols + c] = gain * w;
            }
        }
        l
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for r in 0..self.rows {
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            let z = row.iter().zip(x).fold(self.bias[r], |acc, (w, xi)| acc + w * xi);
            out.push(self.activation.apply(z));
        }
    }
}

/// Feed-forward network with reverse-mode gradients. `forward` caches the
/// activations that the next `backward` consumes; `predict` does not touch
/// the cache.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
    cache: Option<Vec<Vec<f64>>>,
}

impl DenseNet {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Usage("a network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.rows * l.cols || l.bias.len() != l.rows {
                return Err(Error::Usage(format!("layer {i} storage does not match {}x{}", l.rows, l.cols)));
            }
            if i > 0 && layers[i - 1].rows != l.cols {
                return Err(Error::Usage(format!(
                    "layer {i} expects {} inputs but layer {} produces {}",
                    l.cols,
                    i - 1,
                    layers[i - 1].rows
                )));
            }
        }
        Ok(DenseNet { layers, cache: None })
    }

    /// Multilayer perceptron with `sizes[0]` inputs, `hidden` activations on
    /// every layer but the last, and an identity output layer. Hidden layers
    /// get orthogonal weights with gain sqrt(2); the output layer uses
    /// `out_gain`.
    pub fn mlp<R: Rng + ?Sized>(sizes: &[usize], hidden: Activation, out_gain: f64, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let (act, gain) = if i + 1 == n {
                    (Activation::Identity, out_gain)
                } else {
                    (hidden, std::f64::consts::SQRT_2)
                };
                Layer::orthogonal(sizes[i + 1], sizes[i], act, gain, rng)
            })
            .collect();
        DenseNet { layers, cache: None }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Layer> {
        self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].rows
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Parameters flattened layer by layer, weights before bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Usage(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[off..off + nb]);
            off += nb;
        }
        self.cache = None;
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Usage(format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        Ok(())
    }

    /// Inference without caching.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for l in &self.layers {
            l.forward(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Forward pass that records activations for the next `backward`.
    pub fn forward(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for l in &self.layers {
            let mut out = Vec::with_capacity(l.rows);
            l.forward(acts.last().unwrap(), &mut out);
            acts.push(out);
        }
        let y = acts.last().unwrap().clone();
        self.cache = Some(acts);
        Ok(y)
    }

    pub fn has_pending_backward(&self) -> bool {
        self.cache.is_some()
    }

    /// Adds the parameter gradients of `grad_out . y` to `acc` (flat layout
    /// of [`DenseNet::params`]) and returns the gradient with respect to the
    /// input. Consumes the cached forward pass.
    pub fn backward_into(&mut self, grad_out: &[f64], acc: &mut [f64]) -> Result<Vec<f64>> {
        let acts = self
            .cache
            .take()
            .ok_or_else(|| Error::Usage("backward without a pending forward pass".into()))?;
        if grad_out.len() != self.output_dim() || acc.len() != self.param_count() {
            return Err(Error::Usage(format!(
                "gradient shapes ({}, {}) do not match the network ({}, {})",
                grad_out.len(),
                acc.len(),
                self.output_dim(),
                self.param_count()
            )));
        }
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for l in &self.layers {
            offsets.push(off);
            off += l.param_count();
        }
        let mut g: Vec<f64> = grad_out.to_vec();
        for (i, l) in self.layers.iter().enumerate().rev() {
            let x = &acts[i];
            let y = &acts[i + 1];
            let dz: Vec<f64> = g.iter().zip(y).map(|(gi, yi)| gi * l.activation.derivative(*yi)).collect();
            let (w_acc, rest) = acc[offsets[i]..].split_at_mut(l.weights.len());
            for r in 0..l.rows {
                if dz[r] == 0.0 {
                    continue;
                }
                let row = &mut w_acc[r * l.cols..(r + 1) * l.cols];
                row.iter_mut().zip(x).for_each(|(a, xi)| *a += dz[r] * xi);
                rest[r] += dz[r];
            }
            let mut gin = vec![0.0; l.cols];
            for r in 0..l.rows {
                if dz[r] == 0.0 {
                    continue;
                }
                let row = &l.weights[r * l.cols..(r + 1) * l.cols];
                gin.iter_mut().zip(row).for_each(|(a, w)| *a += dz[r] * w);
            }
            g = gin;
        }
        Ok(g)
    }

    /// Returns `(parameter gradients, input gradient)`.
    pub fn backward(&mut self, grad_out: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut acc = vec![0.0; self.param_count()];
        let gin = self.backward_into(grad_out, &mut acc)?;
        Ok((acc, gin))
    }
}
