//! Small tanh networks over a flat parameter vector with hand-written
//! backpropagation.
//!
//! Feed-forward: `hidden_layers` dense tanh layers then a linear output.
//! Recurrent: the first hidden layer is an Elman cell unrolled over `steps`
//! stacked input frames (oldest first); the remaining layers read its last
//! state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    /// Features per input frame.
    pub input: usize,
    /// Frames per sample; 1 unless recurrent.
    pub steps: usize,
    pub hidden: usize,
    pub hidden_layers: usize,
    pub output: usize,
    pub recurrent: bool,
}

impl Architecture {
    pub fn feed_forward(input: usize, hidden: usize, hidden_layers: usize, output: usize) -> Self {
        Architecture {
            input,
            steps: 1,
            hidden,
            hidden_layers,
            output,
            recurrent: false,
        }
    }

    pub fn recurrent(input: usize, steps: usize, hidden: usize, hidden_layers: usize, output: usize) -> Self {
        Architecture {
            input,
            steps: steps.max(1),
            hidden,
            hidden_layers: hidden_layers.max(1),
            output,
            recurrent: true,
        }
    }

    /// Length of one flattened sample.
    pub fn sample_len(&self) -> usize {
        self.input * self.steps
    }

    /// `(rows, cols)` of each weight block in parameter order; every block
    /// is followed by its bias except the recurrent matrix.
    fn blocks(&self) -> Vec<Block> {
        let mut out = Vec::new();
        let mut fan_in = self.input;
        for l in 0..self.hidden_layers {
            if l == 0 && self.recurrent {
                out.push(Block::recurrent(self.hidden, self.input));
            } else {
                out.push(Block::dense(self.hidden, fan_in));
            }
            fan_in = self.hidden;
        }
        out.push(Block::dense(self.output, fan_in));
        out
    }

    pub fn param_count(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Block {
    rows: usize,
    cols: usize,
    recurrent: bool,
}

impl Block {
    fn dense(rows: usize, cols: usize) -> Self {
        Block { rows, cols, recurrent: false }
    }

    fn recurrent(rows: usize, cols: usize) -> Self {
        Block { rows, cols, recurrent: true }
    }

    fn len(&self) -> usize {
        let w = self.rows * self.cols;
        let u = if self.recurrent { self.rows * self.rows } else { 0 };
        w + u + self.rows
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub arch: Architecture,
    pub params: Vec<f64>,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct Cache {
    input: Vec<f64>,
    /// Recurrent states `h_1..h_S` of the first layer, if recurrent.
    states: Vec<Vec<f64>>,
    /// Outputs of every dense hidden layer (post-tanh), in order.
    hidden: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

fn matvec(w: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        out[r] += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

impl Network {
    /// Uniform `±1/sqrt(fan_in)` weights, zero biases; the output layer is
    /// shrunk by `output_scale`.
    pub fn new(arch: Architecture, seed: u64, output_scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(arch.param_count());
        let blocks = arch.blocks();
        let last = blocks.len() - 1;
        for (i, b) in blocks.iter().enumerate() {
            let scale = if i == last { output_scale } else { 1.0 };
            let lim = 1.0 / (b.cols as f64).sqrt();
            for _ in 0..b.rows * b.cols {
                params.push(scale * rng.random_range(-lim..lim));
            }
            if b.recurrent {
                let lim_h = 1.0 / (b.rows as f64).sqrt();
                for _ in 0..b.rows * b.rows {
                    params.push(rng.random_range(-lim_h..lim_h));
                }
            }
            params.extend(std::iter::repeat_n(0.0, b.rows));
        }
        Network { arch, params }
    }

    pub fn zeros(arch: Architecture) -> Self {
        Network {
            arch,
            params: vec![0.0; arch.param_count()],
        }
    }

    pub fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arch.sample_len() {
            return Err(Error::Dimension {
                expected: self.arch.sample_len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(x)?.output)
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<Cache> {
        self.check_input(x)?;
        let a = &self.arch;
        let p = &self.params;
        let mut off = 0;
        let mut states = Vec::new();
        let mut hidden = Vec::new();
        let mut cur: Vec<f64> = x.to_vec();
        for b in a.blocks() {
            let w = &p[off..off + b.rows * b.cols];
            off += b.rows * b.cols;
            if b.recurrent {
                let u = &p[off..off + b.rows * b.rows];
                off += b.rows * b.rows;
                let bias = &p[off..off + b.rows];
                off += b.rows;
                let mut h = vec![0.0; b.rows];
                for s in 0..a.steps {
                    let frame = &x[s * a.input..(s + 1) * a.input];
                    let mut z = bias.to_vec();
                    matvec(w, b.rows, b.cols, frame, &mut z);
                    matvec(u, b.rows, b.rows, &h, &mut z);
                    h = z.iter().map(|v| v.tanh()).collect();
                    states.push(h.clone());
                }
                cur = h;
                hidden.push(cur.clone());
            } else {
                let bias = &p[off..off + b.rows];
                off += b.rows;
                let mut z = bias.to_vec();
                matvec(w, b.rows, b.cols, &cur, &mut z);
                if hidden.len() < a.hidden_layers {
                    cur = z.iter().map(|v| v.tanh()).collect();
                    hidden.push(cur.clone());
                } else {
                    cur = z;
                }
            }
        }
        Ok(Cache {
            input: x.to_vec(),
            states,
            hidden,
            output: cur,
        })
    }

    /// Adds `d(loss)/d(params)` for one sample to `grad`, given
    /// `d(loss)/d(output)`.
    pub fn backward(&self, cache: &Cache, d_out: &[f64], grad: &mut [f64]) {
        let a = &self.arch;
        let p = &self.params;
        let blocks = a.blocks();
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut off = 0;
        for b in &blocks {
            offsets.push(off);
            off += b.len();
        }

        let mut delta: Vec<f64> = d_out.to_vec();
        for (li, b) in blocks.iter().enumerate().rev() {
            let o = offsets[li];
            if b.recurrent {
                // delta is dL/dh_S; back through time
                let w_end = o + b.rows * b.cols;
                let u_end = w_end + b.rows * b.rows;
                let mut dh = delta.clone();
                for s in (0..a.steps).rev() {
                    let h = &cache.states[s];
                    let dz: Vec<f64> = dh.iter().zip(h).map(|(d, hv)| d * (1.0 - hv * hv)).collect();
                    let frame = &cache.input[s * a.input..(s + 1) * a.input];
                    let prev: Vec<f64> = if s == 0 { vec![0.0; b.rows] } else { cache.states[s - 1].clone() };
                    for r in 0..b.rows {
                        for c in 0..b.cols {
                            grad[o + r * b.cols + c] += dz[r] * frame[c];
                        }
                        for c in 0..b.rows {
                            grad[w_end + r * b.rows + c] += dz[r] * prev[c];
                        }
                        grad[u_end + r] += dz[r];
                    }
                    let mut next = vec![0.0; b.rows];
                    for r in 0..b.rows {
                        for c in 0..b.rows {
                            next[c] += p[w_end + r * b.rows + c] * dz[r];
                        }
                    }
                    dh = next;
                }
                continue;
            }
            let input: &[f64] = if li == 0 { &cache.input } else { &cache.hidden[li - 1] };
            let dz: Vec<f64> = if li < a.hidden_layers {
                let h = &cache.hidden[li];
                delta.iter().zip(h).map(|(d, hv)| d * (1.0 - hv * hv)).collect()
            } else {
                delta.clone()
            };
            let b_off = o + b.rows * b.cols;
            for r in 0..b.rows {
                for c in 0..b.cols {
                    grad[o + r * b.cols + c] += dz[r] * input[c];
                }
                grad[b_off + r] += dz[r];
            }
            if li > 0 {
                let mut prev = vec![0.0; b.cols];
                for r in 0..b.rows {
                    for c in 0..b.cols {
                        prev[c] += p[o + r * b.cols + c] * dz[r];
                    }
                }
                delta = prev;
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }
}

/// Scales `grad` down to `max_norm` if its Euclidean norm exceeds it.
/// Returns the norm before clipping.
pub fn clip_grad_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        for g in grad.iter_mut() {
            *g *= s;
        }
    }
    norm
}

pub fn sgd_step(params: &mut [f64], grad: &[f64], lr: f64) {
    for (p, g) in params.iter_mut().zip(grad) {
        *p -= lr * g;
    }
}
