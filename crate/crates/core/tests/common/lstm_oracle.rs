//! Scalar-loop LSTM forward pass and central-difference gradients.

use gaitsense::lstm::{Gate, LstmNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Cross-entropy loss computed from the per-gate blocks, one scalar at a
/// time.
pub fn loss(net: &LstmNet, xs: &[f64], label: usize) -> f64 {
    let (ni, nh, nc) = (net.input_dim(), net.hidden_dim(), net.classes());
    let mut h = vec![0.0; nh];
    let mut c = vec![0.0; nh];
    for x in xs.chunks(ni) {
        let pre = |g: Gate, k: usize| {
            let (w, u, b) = (net.gate_w(g), net.gate_u(g), net.gate_b(g));
            let mut z = b[k];
            for i in 0..ni {
                z += w[k * ni + i] * x[i];
            }
            for j in 0..nh {
                z += u[k * nh + j] * h[j];
            }
            z
        };
        let mut hn = vec![0.0; nh];
        for k in 0..nh {
            let i = sig(pre(Gate::Input, k));
            let f = sig(pre(Gate::Forget, k));
            let o = sig(pre(Gate::Output, k));
            let g = pre(Gate::Candidate, k).tanh();
            c[k] = f * c[k] + i * g;
            hn[k] = o * c[k].tanh();
        }
        h = hn;
    }
    let (w, b) = (net.head_w(), net.head_b());
    let z: Vec<f64> = (0..nc)
        .map(|r| b[r] + (0..nh).map(|j| w[r * nh + j] * h[j]).sum::<f64>())
        .collect();
    let sum: f64 = z.iter().map(|v| v.exp()).sum();
    sum.ln() - z[label]
}

/// Analytic and numerical gradients agree when the gap is within
/// `1e-4` relative or `1e-6` absolute.
pub fn agrees(analytic: f64, numeric: f64) -> bool {
    let gap = (analytic - numeric).abs();
    gap <= 1e-6 || gap <= 1e-4 * analytic.abs().max(numeric.abs())
}

pub struct GradCheck {
    pub params: usize,
    pub failures: usize,
    pub worst_gap: f64,
}

/// Random toy model (`H = 4`, three steps, 48 inputs) compared parameter by
/// parameter against central differences with step `1e-5`.
pub fn gradcheck(seed: u64) -> GradCheck {
    let (ni, nh, nc, steps) = (48, 4, 4, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: Vec<f64> = (0..LstmNet::param_count_for(ni, nh, nc))
        .map(|_| rng.random_range(-0.8..0.8))
        .collect();
    let mut net = LstmNet::from_theta(ni, nh, nc, theta);
    let xs: Vec<f64> = (0..steps * ni).map(|_| rng.random_range(0.0..1.0)).collect();
    let label = rng.random_range(0..nc);

    let (logits, cache) = net.forward(&xs);
    let (_, dlogits) = gaitsense::lstm::cross_entropy(&logits, label);
    let mut grad = vec![0.0; net.theta().len()];
    net.backward(&cache, &dlogits, &mut grad, None);

    let eps = 1e-5;
    let mut out = GradCheck {
        params: grad.len(),
        failures: 0,
        worst_gap: 0.0,
    };
    for k in 0..grad.len() {
        let orig = net.theta()[k];
        net.theta_mut()[k] = orig + eps;
        let up = loss(&net, &xs, label);
        net.theta_mut()[k] = orig - eps;
        let down = loss(&net, &xs, label);
        net.theta_mut()[k] = orig;
        let numeric = (up - down) / (2.0 * eps);
        out.worst_gap = out.worst_gap.max((grad[k] - numeric).abs());
        if !agrees(grad[k], numeric) {
            out.failures += 1;
        }
    }
    out
}
