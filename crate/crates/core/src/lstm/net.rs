//! Single-layer LSTM with a linear classification head.
//!
//! All parameters live in one flat vector so the optimizer, weight decay and
//! gradient checks can treat them uniformly. Layout:
//!
//! | block  | shape      |
//! |--------|------------|
//! | `W`    | 4H × I     |
//! | `U`    | 4H × H     |
//! | `b`    | 4H         |
//! | `Wout` | C × H      |
//! | `bout` | C          |
//!
//! Within the stacked gate blocks rows are ordered input, forget, output,
//! candidate (see [`Gate`]).

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Output = 2,
    Candidate = 3,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Output, Gate::Candidate];
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmNet {
    input: usize,
    hidden: usize,
    classes: usize,
    theta: Vec<f64>,
}

/// Hidden and cell state.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Dot product with four independent accumulators so the loop vectorizes
/// while the summation order stays fixed.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Intermediates of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    steps: usize,
    /// Inputs, `steps × I`.
    xs: Vec<f64>,
    /// Gate activations `[i, f, o, g]`, `steps × 4H`.
    acts: Vec<f64>,
    /// Cell states, `(steps + 1) × H`, starting from zero.
    cs: Vec<f64>,
    /// `tanh(c_t)`, `steps × H`.
    tcs: Vec<f64>,
    /// Hidden states, `(steps + 1) × H`, starting from zero.
    hs: Vec<f64>,
}

impl ForwardCache {
    pub fn final_hidden(&self, hidden: usize) -> &[f64] {
        &self.hs[self.steps * hidden..]
    }
}

impl LstmNet {
    pub fn zeros(input: usize, hidden: usize, classes: usize) -> Self {
        let n = Self::param_count_for(input, hidden, classes);
        Self {
            input,
            hidden,
            classes,
            theta: vec![0.0; n],
        }
    }

    /// Weights uniform in `±1/√H`, biases zero except the forget gate at 1.
    pub fn init<R: Rng>(input: usize, hidden: usize, classes: usize, rng: &mut R) -> Self {
        let mut net = Self::zeros(input, hidden, classes);
        let bound = 1.0 / (hidden as f64).sqrt();
        let (w, u, b, hw, _) = net.offsets();
        for k in w..b {
            net.theta[k] = rng.random_range(-bound..bound);
        }
        debug_assert!(u > w);
        for k in hw..hw + classes * hidden {
            net.theta[k] = rng.random_range(-bound..bound);
        }
        let fb = b + hidden;
        net.theta[fb..fb + hidden].fill(1.0);
        net
    }

    pub fn from_theta(input: usize, hidden: usize, classes: usize, theta: Vec<f64>) -> Self {
        assert_eq!(theta.len(), Self::param_count_for(input, hidden, classes));
        Self {
            input,
            hidden,
            classes,
            theta,
        }
    }

    pub fn param_count_for(input: usize, hidden: usize, classes: usize) -> usize {
        4 * hidden * (input + hidden + 1) + classes * (hidden + 1)
    }

    pub fn input_dim(&self) -> usize {
        self.input
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    /// Start offsets of `W`, `U`, `b`, `Wout`, `bout`.
    fn offsets(&self) -> (usize, usize, usize, usize, usize) {
        let (i, h) = (self.input, self.hidden);
        let w = 0;
        let u = w + 4 * h * i;
        let b = u + 4 * h * h;
        let hw = b + 4 * h;
        let hb = hw + self.classes * h;
        (w, u, b, hw, hb)
    }

    /// Range of `theta` holding weight matrices (subject to weight decay).
    pub fn is_weight(&self, k: usize) -> bool {
        let (_, _, b, hw, hb) = self.offsets();
        k < b || (hw..hb).contains(&k)
    }

    /// Row-major `H × I` input weights of one gate.
    pub fn gate_w(&self, g: Gate) -> &[f64] {
        let (w, ..) = self.offsets();
        let n = self.hidden * self.input;
        &self.theta[w + g as usize * n..w + (g as usize + 1) * n]
    }

    pub fn gate_u(&self, g: Gate) -> &[f64] {
        let (_, u, ..) = self.offsets();
        let n = self.hidden * self.hidden;
        &self.theta[u + g as usize * n..u + (g as usize + 1) * n]
    }

    pub fn gate_b(&self, g: Gate) -> &[f64] {
        let (_, _, b, ..) = self.offsets();
        let n = self.hidden;
        &self.theta[b + g as usize * n..b + (g as usize + 1) * n]
    }

    pub fn head_w(&self) -> &[f64] {
        let (.., hw, hb) = self.offsets();
        &self.theta[hw..hb]
    }

    pub fn head_b(&self) -> &[f64] {
        let (.., hb) = self.offsets();
        &self.theta[hb..]
    }

    /// Assemble a net from per-gate blocks (as stored in model files).
    pub fn from_blocks(
        input: usize,
        hidden: usize,
        gates: [(&[f64], &[f64], &[f64]); 4],
        head_w: &[f64],
        head_b: &[f64],
    ) -> Option<Self> {
        let classes = head_b.len();
        let mut w = Vec::new();
        let mut u = Vec::new();
        let mut b = Vec::new();
        for (gw, gu, gb) in gates {
            if gw.len() != hidden * input || gu.len() != hidden * hidden || gb.len() != hidden {
                return None;
            }
            w.extend_from_slice(gw);
            u.extend_from_slice(gu);
            b.extend_from_slice(gb);
        }
        if head_w.len() != classes * hidden {
            return None;
        }
        let mut theta = w;
        theta.extend(u);
        theta.extend(b);
        theta.extend_from_slice(head_w);
        theta.extend_from_slice(head_b);
        Some(Self::from_theta(input, hidden, classes, theta))
    }

    /// Stacked gate activations `[i, f, o, g]` for input `x` and previous
    /// hidden state `h`.
    fn gate_activations(&self, x: &[f64], h: &[f64], out: &mut [f64]) {
        let (wo, uo, bo, ..) = self.offsets();
        let (ni, nh) = (self.input, self.hidden);
        for r in 0..4 * nh {
            let wr = &self.theta[wo + r * ni..wo + (r + 1) * ni];
            let ur = &self.theta[uo + r * nh..uo + (r + 1) * nh];
            let z = self.theta[bo + r] + dot(wr, x) + dot(ur, h);
            out[r] = if r < 3 * nh { sigmoid(z) } else { z.tanh() };
        }
    }

    /// One recurrence step.
    pub fn step(&self, x: &[f64], s: &LstmState) -> LstmState {
        let nh = self.hidden;
        let mut a = vec![0.0; 4 * nh];
        self.gate_activations(x, &s.h, &mut a);
        let mut next = LstmState::zeros(nh);
        for k in 0..nh {
            let (i, f, o, g) = (a[k], a[nh + k], a[2 * nh + k], a[3 * nh + k]);
            next.c[k] = f * s.c[k] + i * g;
            next.h[k] = o * next.c[k].tanh();
        }
        next
    }

    pub fn head(&self, h: &[f64]) -> Vec<f64> {
        let w = self.head_w();
        let b = self.head_b();
        (0..self.classes)
            .map(|c| b[c] + dot(&w[c * self.hidden..(c + 1) * self.hidden], h))
            .collect()
    }

    /// Run the sequence `xs` (`steps × I`, row-major) from the zero state.
    /// Returns the logits and the cache needed by [`LstmNet::backward`].
    pub fn forward(&self, xs: &[f64]) -> (Vec<f64>, ForwardCache) {
        let (ni, nh) = (self.input, self.hidden);
        assert!(!xs.is_empty() && xs.len() % ni == 0, "input length must be a positive multiple of {ni}");
        let steps = xs.len() / ni;
        let mut cache = ForwardCache {
            steps,
            xs: xs.to_vec(),
            acts: vec![0.0; steps * 4 * nh],
            cs: vec![0.0; (steps + 1) * nh],
            tcs: vec![0.0; steps * nh],
            hs: vec![0.0; (steps + 1) * nh],
        };
        for t in 0..steps {
            let x = &xs[t * ni..(t + 1) * ni];
            let (h_prev, h_rest) = cache.hs.split_at_mut((t + 1) * nh);
            let h_prev = &h_prev[t * nh..];
            let a = &mut cache.acts[t * 4 * nh..(t + 1) * 4 * nh];
            self.gate_activations(x, h_prev, a);
            let (c_prev, c_rest) = cache.cs.split_at_mut((t + 1) * nh);
            let c_prev = &c_prev[t * nh..];
            let tc = &mut cache.tcs[t * nh..(t + 1) * nh];
            for k in 0..nh {
                let (i, f, o, g) = (a[k], a[nh + k], a[2 * nh + k], a[3 * nh + k]);
                let c = f * c_prev[k] + i * g;
                c_rest[k] = c;
                tc[k] = c.tanh();
                h_rest[k] = o * tc[k];
            }
        }
        let logits = self.head(cache.final_hidden(nh));
        (logits, cache)
    }

    /// Logits without keeping intermediates.
    pub fn logits(&self, xs: &[f64]) -> Vec<f64> {
        self.head(&self.final_state(xs).h)
    }

    pub fn final_state(&self, xs: &[f64]) -> LstmState {
        let ni = self.input;
        xs.chunks_exact(ni)
            .fold(LstmState::zeros(self.hidden), |s, x| self.step(x, &s))
    }

    /// Backpropagation through time.
    ///
    /// Adds `∂L/∂θ` to `grad` given `∂L/∂logits`; when `dx` is provided it
    /// receives `∂L/∂xs` (same layout as the forward input).
    pub fn backward(
        &self,
        cache: &ForwardCache,
        dlogits: &[f64],
        grad: &mut [f64],
        mut dx: Option<&mut [f64]>,
    ) {
        let (ni, nh, nc) = (self.input, self.hidden, self.classes);
        let (wo, uo, bo, hwo, hbo) = self.offsets();
        let steps = cache.steps;

        let mut dh = vec![0.0; nh];
        let h_last = cache.final_hidden(nh);
        for c in 0..nc {
            let g = dlogits[c];
            grad[hbo + c] += g;
            axpy(g, h_last, &mut grad[hwo + c * nh..hwo + (c + 1) * nh]);
            axpy(g, &self.theta[hwo + c * nh..hwo + (c + 1) * nh], &mut dh);
        }

        let mut dc_next = vec![0.0; nh];
        let mut dz = vec![0.0; 4 * nh];
        for t in (0..steps).rev() {
            let a = &cache.acts[t * 4 * nh..(t + 1) * 4 * nh];
            let tc = &cache.tcs[t * nh..(t + 1) * nh];
            let c_prev = &cache.cs[t * nh..(t + 1) * nh];
            for k in 0..nh {
                let (i, f, o, g) = (a[k], a[nh + k], a[2 * nh + k], a[3 * nh + k]);
                let d_o = dh[k] * tc[k];
                let dc = dc_next[k] + dh[k] * o * (1.0 - tc[k] * tc[k]);
                dz[k] = dc * g * i * (1.0 - i);
                dz[nh + k] = dc * c_prev[k] * f * (1.0 - f);
                dz[2 * nh + k] = d_o * o * (1.0 - o);
                dz[3 * nh + k] = dc * i * (1.0 - g * g);
                dc_next[k] = dc * f;
            }

            let x = &cache.xs[t * ni..(t + 1) * ni];
            let h_prev = &cache.hs[t * nh..(t + 1) * nh];
            dh.fill(0.0);
            let mut dxt = dx.as_deref_mut().map(|d| &mut d[t * ni..(t + 1) * ni]);
            for r in 0..4 * nh {
                let d = dz[r];
                if d == 0.0 {
                    continue;
                }
                grad[bo + r] += d;
                axpy(d, x, &mut grad[wo + r * ni..wo + (r + 1) * ni]);
                axpy(d, h_prev, &mut grad[uo + r * nh..uo + (r + 1) * nh]);
                axpy(d, &self.theta[uo + r * nh..uo + (r + 1) * nh], &mut dh);
                if let Some(dxt) = dxt.as_deref_mut() {
                    axpy(d, &self.theta[wo + r * ni..wo + (r + 1) * ni], dxt);
                }
            }
        }
    }
}

/// Softmax cross-entropy of `logits` against class `label`, using
/// max-subtraction for stability. Returns the loss and `∂loss/∂logits`.
pub fn cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() - (logits[label] - m);
    let mut grad: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    grad[label] -= 1.0;
    (loss, grad)
}
