use rand::Rng;

use crate::error::{Result, VineError};
use crate::nn::init_uniform;

/// Fully connected network with ReLU hidden layers and a linear output.
/// Layer `l` stores its `out x in` weights row-major, then `out` biases.
#[derive(Clone, Debug)]
pub struct Fcnn {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Clone, Debug)]
pub struct FcnnTrace {
    /// Input of each layer; `inputs[0]` is the network input.
    inputs: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl FcnnTrace {
    pub fn logits(&self) -> &[f64] {
        &self.output
    }
}

impl Fcnn {
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Self {
        let mut net = Self::zeros(sizes);
        let mut off = 0;
        for w in sizes.windows(2) {
            let (fan_in, out) = (w[0], w[1]);
            init_uniform(&mut net.params[off..off + out * fan_in + out], fan_in, rng);
            off += out * fan_in + out;
        }
        net
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "a network needs input and output sizes");
        let n = sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum();
        Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; n],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("nonempty")
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn forward(&self, x: &[f64]) -> Result<FcnnTrace> {
        if x.len() != self.input_dim() {
            return Err(VineError::Shape {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let layers = self.sizes.len() - 1;
        let mut inputs = Vec::with_capacity(layers);
        let mut cur = x.to_vec();
        let mut off = 0;
        for l in 0..layers {
            let (fan_in, out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[off..off + out * fan_in];
            let b = &self.params[off + out * fan_in..off + out * fan_in + out];
            let mut z: Vec<f64> = (0..out)
                .map(|r| {
                    b[r] + w[r * fan_in..(r + 1) * fan_in]
                        .iter()
                        .zip(&cur)
                        .map(|(a, c)| a * c)
                        .sum::<f64>()
                })
                .collect();
            if l + 1 < layers {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            inputs.push(std::mem::replace(&mut cur, z));
            off += out * fan_in + out;
        }
        Ok(FcnnTrace { inputs, output: cur })
    }

    /// Gradient of `sum(dlogits * logits)` with respect to the parameters.
    pub fn backward(&self, trace: &FcnnTrace, dlogits: &[f64]) -> Vec<f64> {
        let layers = self.sizes.len() - 1;
        let mut grads = vec![0.0; self.params.len()];
        let mut offsets = Vec::with_capacity(layers);
        let mut off = 0;
        for w in self.sizes.windows(2) {
            offsets.push(off);
            off += w[1] * w[0] + w[1];
        }
        let mut delta = dlogits.to_vec();
        for l in (0..layers).rev() {
            let (fan_in, out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let input = &trace.inputs[l];
            for r in 0..out {
                let g = &mut grads[off + r * fan_in..off + (r + 1) * fan_in];
                for (gc, &a) in g.iter_mut().zip(input) {
                    *gc += delta[r] * a;
                }
                grads[off + out * fan_in + r] += delta[r];
            }
            if l > 0 {
                let w = &self.params[off..off + out * fan_in];
                // `input` is the ReLU output of the previous layer
                delta = (0..fan_in)
                    .map(|c| {
                        if input[c] > 0.0 {
                            (0..out).map(|r| w[r * fan_in + c] * delta[r]).sum()
                        } else {
                            0.0
                        }
                    })
                    .collect();
            }
        }
        grads
    }
}
