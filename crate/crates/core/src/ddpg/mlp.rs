use crate::{Error, Result, Rng};

/// Fully connected network, ReLU on hidden layers, identity output.
///
/// Parameters live in one flat vector; each layer contributes its
/// `out × in` weights (row-major) followed by its `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Per-layer outputs from a forward pass, kept for backpropagation.
/// `layers[0]` is the input, `layers[l + 1]` the output of layer `l`
/// (after ReLU for hidden layers).
#[derive(Debug, Clone, Default)]
pub struct Activations {
    layers: Vec<Vec<f64>>,
}

impl Activations {
    pub fn output(&self) -> &[f64] {
        self.layers.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl Mlp {
    /// All-zero network.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid("mlp", format!("bad layer sizes {sizes:?}")));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
        })
    }

    /// Weights uniform in `±1/√fan_in`, biases zero.
    pub fn init(sizes: &[usize], rng: &mut Rng) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        let mut off = 0;
        for w in sizes.windows(2) {
            let (fan_in, out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut net.params[off..off + out * fan_in] {
                *p = rng.uniform_in(-bound, bound);
            }
            off += out * fan_in + out;
        }
        Ok(net)
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        if params.len() != net.params.len() {
            return Err(Error::Dimension {
                context: "mlp parameters",
                expected: net.params.len(),
                actual: params.len(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// `(weights, biases)` of layer `l` as flat slices.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (off, n_in, n_out) = self.layer_span(l);
        let (w, rest) = self.params[off..].split_at(n_in * n_out);
        (w, &rest[..n_out])
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let (off, n_in, n_out) = self.layer_span(l);
        let (w, rest) = self.params[off..].split_at_mut(n_in * n_out);
        (w, &mut rest[..n_out])
    }

    fn layer_span(&self, l: usize) -> (usize, usize, usize) {
        let off = param_count(&self.sizes[..=l]);
        (off, self.sizes[l], self.sizes[l + 1])
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut acts = Activations::default();
        self.forward_cached(x, &mut acts);
        acts.layers.pop().unwrap()
    }

    /// Forward pass that records every layer's output into `acts`.
    pub fn forward_cached(&self, x: &[f64], acts: &mut Activations) {
        debug_assert_eq!(x.len(), self.sizes[0]);
        let depth = self.sizes.len() - 1;
        acts.layers.resize(depth + 1, Vec::new());
        acts.layers[0].clear();
        acts.layers[0].extend_from_slice(x);
        let mut off = 0;
        for l in 0..depth {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let (before, after) = acts.layers.split_at_mut(l + 1);
            let input = &before[l];
            let out = &mut after[0];
            out.clear();
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut z = b[o];
                for (wi, xi) in row.iter().zip(input) {
                    z += wi * xi;
                }
                out.push(if l + 1 < depth { z.max(0.0) } else { z });
            }
            off += n_in * n_out + n_out;
        }
    }

    /// Backpropagate `grad_out = ∂L/∂output` through the pass recorded in
    /// `acts`. Parameter gradients are accumulated into `grad_params`;
    /// `grad_input`, when given, receives `∂L/∂input` (overwritten).
    pub fn backward(
        &self,
        acts: &Activations,
        grad_out: &[f64],
        mut grad_params: Option<&mut [f64]>,
        grad_input: Option<&mut [f64]>,
    ) {
        let depth = self.sizes.len() - 1;
        let mut delta = grad_out.to_vec();
        let mut next = Vec::new();
        let mut off = self.params.len();
        for l in (0..depth).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            off -= n_in * n_out + n_out;
            if l + 1 < depth {
                for (d, a) in delta.iter_mut().zip(&acts.layers[l + 1]) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let input = &acts.layers[l];
            if let Some(g) = grad_params.as_deref_mut() {
                let (gw, gb) = g[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
                for o in 0..n_out {
                    let d = delta[o];
                    if d != 0.0 {
                        for (gwi, xi) in gw[o * n_in..(o + 1) * n_in].iter_mut().zip(input) {
                            *gwi += d * xi;
                        }
                    }
                    gb[o] += d;
                }
            }
            if l == 0 && grad_input.is_none() {
                break;
            }
            let w = &self.params[off..off + n_in * n_out];
            next.clear();
            next.resize(n_in, 0.0);
            for o in 0..n_out {
                let d = delta[o];
                if d != 0.0 {
                    for (ni, wi) in next.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *ni += d * wi;
                    }
                }
            }
            std::mem::swap(&mut delta, &mut next);
        }
        if let Some(gi) = grad_input {
            gi.copy_from_slice(&delta);
        }
    }
}
