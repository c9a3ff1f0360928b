//! Dense/dropout/LSTM network with hand-written backpropagation.
//!
//! Shape: `[LSTM(h) ->] dense(w_1) [-> dropout] ... dense(w_k) -> dense(out)`.
//! Hidden dense layers use ReLU, dropout `j` follows hidden layer `j`, and
//! the output layer is linear. With an LSTM the input window is read one
//! sample per step and the last hidden state feeds the dense stack.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rng;

/// Width of the fixed penultimate dense layer.
pub const HEAD_UNITS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_len: usize,
    pub output_len: usize,
    pub recurrent_units: Option<usize>,
    /// Widths of the ReLU hidden layers.
    pub hidden: Vec<usize>,
    /// `dropouts[j]` follows hidden layer `j`; `len <= hidden.len()`.
    pub dropouts: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Dense {
    w: usize,
    b: usize,
    n_in: usize,
    n_out: usize,
}

#[derive(Debug, Clone, Copy)]
struct Lstm {
    wx: usize,
    wh: usize,
    b: usize,
    h: usize,
}

#[derive(Debug, Clone)]
struct Layout {
    lstm: Option<Lstm>,
    dense: Vec<Dense>,
    total: usize,
}

impl Architecture {
    /// Base-learner stack: `dense(d1) -> dropout -> dense(d2) -> dropout ->
    /// dense(HEAD_UNITS) -> dense(out)`.
    pub fn base(
        input_len: usize,
        output_len: usize,
        recurrent_units: Option<usize>,
        dense_units: [usize; 2],
        dropouts: [f64; 2],
    ) -> Self {
        Self {
            input_len,
            output_len,
            recurrent_units,
            hidden: vec![dense_units[0], dense_units[1], HEAD_UNITS],
            dropouts: dropouts.to_vec(),
        }
    }

    fn layout(&self) -> Layout {
        let mut at = 0;
        let lstm = self.recurrent_units.map(|h| {
            let l = Lstm { wx: at, wh: at + 4 * h, b: at + 4 * h + 4 * h * h, h };
            at += 4 * h * (h + 2);
            l
        });
        let mut widths = vec![self.recurrent_units.unwrap_or(self.input_len)];
        widths.extend(&self.hidden);
        widths.push(self.output_len);
        let dense = widths
            .windows(2)
            .map(|w| {
                let d = Dense { w: at, b: at + w[0] * w[1], n_in: w[0], n_out: w[1] };
                at += w[1] * (w[0] + 1);
                d
            })
            .collect();
        Layout { lstm, dense, total: at }
    }

    pub fn param_count(&self) -> usize {
        self.layout().total
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn dense_forward(p: &[f64], d: Dense, x: &[f64], out: &mut [f64]) {
    for (o, slot) in out.iter_mut().enumerate() {
        let row = &p[d.w + o * d.n_in..d.w + (o + 1) * d.n_in];
        *slot = p[d.b + o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
    }
}

/// Accumulates parameter gradients and writes the input gradient.
fn dense_backward(p: &[f64], g: &mut [f64], d: Dense, x: &[f64], delta: &[f64], dx: Option<&mut [f64]>) {
    for (o, &dl) in delta.iter().enumerate() {
        g[d.b + o] += dl;
        let row = &mut g[d.w + o * d.n_in..d.w + (o + 1) * d.n_in];
        for (gw, v) in row.iter_mut().zip(x) {
            *gw += dl * v;
        }
    }
    if let Some(dx) = dx {
        dx.iter_mut().for_each(|v| *v = 0.0);
        for (o, &dl) in delta.iter().enumerate() {
            let row = &p[d.w + o * d.n_in..d.w + (o + 1) * d.n_in];
            for (v, w) in dx.iter_mut().zip(row) {
                *v += dl * w;
            }
        }
    }
}

/// Per-sample activations kept for the backward pass.
#[derive(Default)]
struct Trace {
    // LSTM, step-major: gates[t][4h] post-activation, cells[t][h].
    gates: Vec<f64>,
    cells: Vec<f64>,
    hiddens: Vec<f64>,
    /// Input of each dense layer (post-activation, post-dropout).
    acts: Vec<Vec<f64>>,
    /// Pre-activations of the hidden dense layers.
    pre: Vec<Vec<f64>>,
    /// Dropout multipliers per hidden layer; all ones when inactive.
    masks: Vec<Vec<f64>>,
    out: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub arch: Architecture,
    pub params: Vec<f64>,
}

impl Network {
    /// Glorot-uniform weights, zero biases, LSTM forget-gate bias 1.
    pub fn new(arch: Architecture, seed: u64) -> Self {
        let layout = arch.layout();
        let mut rng = rng::rng_from(seed);
        let mut params = vec![0.0; layout.total];
        let mut glorot = |params: &mut [f64], fan_in: usize, fan_out: usize| {
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            params.iter_mut().for_each(|w| *w = rng.random_range(-a..a));
        };
        if let Some(l) = layout.lstm {
            let h = l.h;
            glorot(&mut params[l.wx..l.wx + 4 * h], 1, 4 * h);
            glorot(&mut params[l.wh..l.wh + 4 * h * h], h, 4 * h);
            params[l.b + h..l.b + 2 * h].iter_mut().for_each(|b| *b = 1.0);
        }
        for d in layout.dense {
            glorot(&mut params[d.w..d.w + d.n_in * d.n_out], d.n_in, d.n_out);
        }
        Self { arch, params }
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn run(&self, x: &[f64], dropout: Option<&mut ChaCha8Rng>, tr: &mut Trace) {
        let layout = self.arch.layout();
        let p = &self.params;
        let nh = self.arch.hidden.len();
        tr.acts.resize(nh + 1, Vec::new());
        tr.pre.resize(nh, Vec::new());
        tr.masks.resize(nh, Vec::new());
        match layout.lstm {
            Some(l) => {
                let h = l.h;
                let steps = x.len();
                tr.gates.resize(steps * 4 * h, 0.0);
                tr.cells.resize(steps * h, 0.0);
                tr.hiddens.resize((steps + 1) * h, 0.0);
                tr.hiddens[..h].iter_mut().for_each(|v| *v = 0.0);
                let mut c_prev = vec![0.0; h];
                for (t, &xt) in x.iter().enumerate() {
                    let (done, rest) = tr.hiddens.split_at_mut((t + 1) * h);
                    let h_prev = &done[t * h..];
                    let gates = &mut tr.gates[t * 4 * h..(t + 1) * 4 * h];
                    for r in 0..4 * h {
                        let wh = &p[l.wh + r * h..l.wh + (r + 1) * h];
                        let z = p[l.b + r] + p[l.wx + r] * xt + wh.iter().zip(h_prev).map(|(w, v)| w * v).sum::<f64>();
                        gates[r] = if (2 * h..3 * h).contains(&r) { z.tanh() } else { sigmoid(z) };
                    }
                    let cells = &mut tr.cells[t * h..(t + 1) * h];
                    for k in 0..h {
                        let (i, f, g, o) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
                        cells[k] = f * c_prev[k] + i * g;
                        rest[k] = o * cells[k].tanh();
                    }
                    c_prev.copy_from_slice(cells);
                }
                tr.acts[0].clear();
                tr.acts[0].extend_from_slice(&tr.hiddens[steps * h..]);
            }
            None => {
                tr.acts[0].clear();
                tr.acts[0].extend_from_slice(x);
            }
        }
        let mut rng = dropout;
        for k in 0..nh {
            let d = layout.dense[k];
            tr.pre[k].resize(d.n_out, 0.0);
            dense_forward(p, d, &tr.acts[k], &mut tr.pre[k]);
            let rate = self.arch.dropouts.get(k).copied().unwrap_or(0.0);
            let mask = &mut tr.masks[k];
            mask.clear();
            match rng.as_deref_mut() {
                Some(r) if rate > 0.0 => {
                    let keep = 1.0 / (1.0 - rate);
                    mask.extend((0..d.n_out).map(|_| if r.random::<f64>() < rate { 0.0 } else { keep }));
                }
                _ => mask.resize(d.n_out, 1.0),
            }
            let a = &mut tr.acts[k + 1];
            a.clear();
            a.extend(tr.pre[k].iter().zip(mask.iter()).map(|(v, m)| v.max(0.0) * m));
        }
        let d = layout.dense[nh];
        tr.out.resize(d.n_out, 0.0);
        dense_forward(p, d, &tr.acts[nh], &mut tr.out);
    }

    /// Inference pass, dropout disabled.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut tr = Trace::default();
        self.run(x, None, &mut tr);
        tr.out
    }

    /// Mean squared error over every output of every sample.
    pub fn loss(&self, xs: &[&[f64]], ys: &[&[f64]]) -> f64 {
        let n = (xs.len() * self.arch.output_len) as f64;
        xs.iter()
            .zip(ys)
            .map(|(x, y)| self.forward(x).iter().zip(*y).map(|(p, t)| (p - t).powi(2)).sum::<f64>())
            .sum::<f64>()
            / n
    }

    /// Batch loss and its gradient with respect to `params` (written to
    /// `grad`, overwriting). Dropout masks are drawn from `dropout` if given.
    pub fn loss_and_gradient(
        &self,
        xs: &[&[f64]],
        ys: &[&[f64]],
        mut dropout: Option<&mut ChaCha8Rng>,
        grad: &mut [f64],
    ) -> f64 {
        let layout = self.arch.layout();
        let p = &self.params;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let scale = 1.0 / (xs.len() * self.arch.output_len) as f64;
        let mut tr = Trace::default();
        let mut loss = 0.0;
        let mut delta: Vec<f64> = Vec::new();
        let mut dx: Vec<f64> = Vec::new();
        for (x, y) in xs.iter().zip(ys) {
            self.run(x, dropout.as_deref_mut(), &mut tr);
            delta.clear();
            for (o, t) in tr.out.iter().zip(*y) {
                loss += (o - t).powi(2) * scale;
                delta.push(2.0 * (o - t) * scale);
            }
            for k in (0..layout.dense.len()).rev() {
                let d = layout.dense[k];
                dx.resize(d.n_in, 0.0);
                let need_dx = k > 0 || layout.lstm.is_some();
                dense_backward(p, grad, d, &tr.acts[k], &delta, need_dx.then_some(&mut dx[..]));
                if k == 0 {
                    break;
                }
                // Back through the dropout mask and ReLU of hidden layer k - 1.
                delta.clear();
                for (i, g) in dx.iter().enumerate() {
                    let m = tr.masks[k - 1][i];
                    let relu = if tr.pre[k - 1][i] > 0.0 { 1.0 } else { 0.0 };
                    delta.push(g * m * relu);
                }
            }
            if let Some(l) = layout.lstm {
                self.lstm_backward(l, x, &tr, &dx, grad);
            }
        }
        loss
    }

    fn lstm_backward(&self, l: Lstm, x: &[f64], tr: &Trace, dh_last: &[f64], grad: &mut [f64]) {
        let p = &self.params;
        let h = l.h;
        let mut dh = dh_last.to_vec();
        let mut dc = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];
        for t in (0..x.len()).rev() {
            let gates = &tr.gates[t * 4 * h..(t + 1) * 4 * h];
            let cells = &tr.cells[t * h..(t + 1) * h];
            let h_prev = &tr.hiddens[t * h..(t + 1) * h];
            for k in 0..h {
                let (i, f, g, o) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
                let c_prev = if t > 0 { tr.cells[(t - 1) * h + k] } else { 0.0 };
                let tc = cells[k].tanh();
                let d_o = dh[k] * tc;
                dc[k] += dh[k] * o * (1.0 - tc * tc);
                let (d_i, d_g, d_f) = (dc[k] * g, dc[k] * i, dc[k] * c_prev);
                dz[k] = d_i * i * (1.0 - i);
                dz[h + k] = d_f * f * (1.0 - f);
                dz[2 * h + k] = d_g * (1.0 - g * g);
                dz[3 * h + k] = d_o * o * (1.0 - o);
                dc[k] *= f;
            }
            dh.iter_mut().for_each(|v| *v = 0.0);
            for (r, &dzr) in dz.iter().enumerate() {
                grad[l.b + r] += dzr;
                grad[l.wx + r] += dzr * x[t];
                let row = l.wh + r * h;
                for k in 0..h {
                    grad[row + k] += dzr * h_prev[k];
                    dh[k] += dzr * p[row + k];
                }
            }
        }
    }
}
