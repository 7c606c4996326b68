use rand::Rng;

use crate::error::{Result, VineError};
use crate::nn::init_uniform;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// LSTM cell followed by a linear read-out of the hidden state.
///
/// Layout: `Wx (4H x I)`, `Wh (4H x H)`, `b (4H)`, `Wy (O x H)`, `by (O)`,
/// with gate blocks ordered input, forget, candidate, output.
#[derive(Clone, Debug)]
pub struct Lstm {
    input: usize,
    hidden: usize,
    output: usize,
    params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

/// Everything one step needs for backpropagation through time.
#[derive(Clone, Debug)]
pub struct LstmStep {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
    pub logits: Vec<f64>,
}

impl Lstm {
    pub fn new(input: usize, hidden: usize, output: usize, rng: &mut impl Rng) -> Self {
        let mut net = Self::zeros(input, hidden, output);
        let (wx, wh, wy) = net.offsets();
        init_uniform(&mut net.params[wx..wh], input, rng);
        init_uniform(&mut net.params[wh..wh + 4 * hidden * hidden], hidden, rng);
        init_uniform(&mut net.params[wy..], hidden, rng);
        net
    }

    pub fn zeros(input: usize, hidden: usize, output: usize) -> Self {
        let n = 4 * hidden * (input + hidden + 1) + output * (hidden + 1);
        Self {
            input,
            hidden,
            output,
            params: vec![0.0; n],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    pub fn output_dim(&self) -> usize {
        self.output
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Start offsets of `Wx`, `Wh` and `Wy`; `b` follows `Wh`, `by` follows `Wy`.
    fn offsets(&self) -> (usize, usize, usize) {
        let h4 = 4 * self.hidden;
        let wh = h4 * self.input;
        let wy = wh + h4 * self.hidden + h4;
        (0, wh, wy)
    }

    /// Offset of the gate bias block; gate `k` occupies `[k*H, (k+1)*H)`.
    pub fn gate_bias_offset(&self) -> usize {
        4 * self.hidden * (self.input + self.hidden)
    }

    pub fn initial_state(&self) -> LstmState {
        LstmState {
            h: vec![0.0; self.hidden],
            c: vec![0.0; self.hidden],
        }
    }

    pub fn step(&self, x: &[f64], state: &LstmState) -> Result<(LstmState, LstmStep)> {
        if x.len() != self.input {
            return Err(VineError::Shape {
                expected: self.input,
                found: x.len(),
            });
        }
        if state.h.len() != self.hidden || state.c.len() != self.hidden {
            return Err(VineError::Shape {
                expected: self.hidden,
                found: state.h.len().min(state.c.len()),
            });
        }
        let (hd, ind) = (self.hidden, self.input);
        let (_, wh, wy) = self.offsets();
        let b = wh + 4 * hd * hd;
        let p = &self.params;
        let mut z = p[b..b + 4 * hd].to_vec();
        for (r, zr) in z.iter_mut().enumerate() {
            let rx = &p[r * ind..(r + 1) * ind];
            let rh = &p[wh + r * hd..wh + (r + 1) * hd];
            *zr += rx.iter().zip(x).map(|(a, c)| a * c).sum::<f64>()
                + rh.iter().zip(&state.h).map(|(a, c)| a * c).sum::<f64>();
        }
        let i: Vec<f64> = z[..hd].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<f64> = z[hd..2 * hd].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<f64> = z[2 * hd..3 * hd].iter().map(|&v| v.tanh()).collect();
        let o: Vec<f64> = z[3 * hd..].iter().map(|&v| sigmoid(v)).collect();
        let c: Vec<f64> = (0..hd).map(|k| f[k] * state.c[k] + i[k] * g[k]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<f64> = (0..hd).map(|k| o[k] * tanh_c[k]).collect();
        let by = wy + self.output * hd;
        let logits: Vec<f64> = (0..self.output)
            .map(|r| {
                p[by + r]
                    + p[wy + r * hd..wy + (r + 1) * hd]
                        .iter()
                        .zip(&h)
                        .map(|(a, c)| a * c)
                        .sum::<f64>()
            })
            .collect();
        let next = LstmState {
            h: h.clone(),
            c: c.clone(),
        };
        let cache = LstmStep {
            x: x.to_vec(),
            h_prev: state.h.clone(),
            c_prev: state.c.clone(),
            i,
            f,
            g,
            o,
            tanh_c,
            h,
            logits,
        };
        Ok((next, cache))
    }

    /// Gradient of `sum_t dlogits[t] . logits[t]` over a sequence that
    /// started from `initial_state`.
    pub fn backward(&self, steps: &[LstmStep], dlogits: &[Vec<f64>]) -> Vec<f64> {
        let (hd, ind, out) = (self.hidden, self.input, self.output);
        let (_, wh, wy) = self.offsets();
        let b = wh + 4 * hd * hd;
        let by = wy + out * hd;
        let p = &self.params;
        let mut grads = vec![0.0; p.len()];
        let mut dh_next = vec![0.0; hd];
        let mut dc_next = vec![0.0; hd];
        for (s, dy) in steps.iter().zip(dlogits).rev() {
            let mut dh = dh_next.clone();
            for r in 0..out {
                grads[by + r] += dy[r];
                for k in 0..hd {
                    grads[wy + r * hd + k] += dy[r] * s.h[k];
                    dh[k] += p[wy + r * hd + k] * dy[r];
                }
            }
            let mut dz = vec![0.0; 4 * hd];
            for k in 0..hd {
                let dc = dh[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]) + dc_next[k];
                let (di, df, dg, d_o) = (dc * s.g[k], dc * s.c_prev[k], dc * s.i[k], dh[k] * s.tanh_c[k]);
                dz[k] = di * s.i[k] * (1.0 - s.i[k]);
                dz[hd + k] = df * s.f[k] * (1.0 - s.f[k]);
                dz[2 * hd + k] = dg * (1.0 - s.g[k] * s.g[k]);
                dz[3 * hd + k] = d_o * s.o[k] * (1.0 - s.o[k]);
                dc_next[k] = dc * s.f[k];
            }
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            for (r, &d) in dz.iter().enumerate() {
                grads[b + r] += d;
                for c in 0..ind {
                    grads[r * ind + c] += d * s.x[c];
                }
                for c in 0..hd {
                    grads[wh + r * hd + c] += d * s.h_prev[c];
                    dh_next[c] += p[wh + r * hd + c] * d;
                }
            }
        }
        grads
    }
}
