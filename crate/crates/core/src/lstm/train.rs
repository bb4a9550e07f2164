use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::net::{cross_entropy, LstmNet};
use super::{InputScale, LstmModel, HIDDEN_SIZE, SEQ_LEN};
use crate::emotion::EmotionLabel;
use crate::gait::{Gait, POSE_DIM};

const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// Mini-batch Adam training settings. `lr_schedule` maps the epoch at which
/// a rate takes effect to that rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub lr_schedule: BTreeMap<usize, f64>,
    pub beta1: f64,
    pub weight_decay: f64,
    pub rng_seed: u64,
    pub hidden_size: usize,
    pub seq_len: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 8,
            epochs: 500,
            lr_schedule: BTreeMap::from([(0, 0.1), (250, 0.01), (375, 0.001), (438, 0.0001)]),
            beta1: 0.9,
            weight_decay: 5e-4,
            rng_seed: 0,
            hidden_size: HIDDEN_SIZE,
            seq_len: SEQ_LEN,
        }
    }
}

impl TrainConfig {
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.lr_schedule
            .range(..=epoch)
            .next_back()
            .map(|(_, &lr)| lr)
            .unwrap_or(0.0)
    }

    fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.hidden_size == 0 || self.seq_len == 0 {
            return bad("hidden_size and seq_len must be at least 1");
        }
        if !self.lr_schedule.contains_key(&0) {
            return bad("lr_schedule must set a rate for epoch 0");
        }
        if self.lr_schedule.values().any(|&lr| !(lr > 0.0 && lr.is_finite())) {
            return bad("learning rates must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(self.weight_decay >= 0.0) {
            return bad("beta1 must be in [0, 1) and weight_decay non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error("training set has {found} examples but batch_size is {batch_size}")]
    TooFewExamples { found: usize, batch_size: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LstmModel,
    /// Mean training loss per epoch.
    pub loss_curve: Vec<f64>,
}

/// Mean cross-entropy over `batch` and its gradient.
pub(crate) fn batch_gradient(net: &LstmNet, batch: &[(&[f64], usize)], grad: &mut [f64]) -> f64 {
    grad.fill(0.0);
    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for &(xs, label) in batch {
        let (logits, cache) = net.forward(xs);
        let (l, mut dlogits) = cross_entropy(&logits, label);
        loss += l * scale;
        for d in &mut dlogits {
            *d *= scale;
        }
        net.backward(&cache, &dlogits, grad, None);
    }
    loss
}

/// Train an LSTM classifier on root-normalized gaits.
///
/// Uses Adam (second-moment decay 0.999, ε = 1e-8) with decoupled weight
/// decay on the weight matrices and a step-wise learning-rate schedule.
/// Results are a pure function of the data and `cfg.rng_seed`.
pub fn train(data: &[(Gait, EmotionLabel)], cfg: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    if data.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    cfg.validate()?;
    if data.len() < cfg.batch_size {
        return Err(TrainError::TooFewExamples {
            found: data.len(),
            batch_size: cfg.batch_size,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let net = LstmNet::init(POSE_DIM, cfg.hidden_size, EmotionLabel::COUNT, &mut rng);
    let mut model = LstmModel {
        net,
        input_scale: InputScale::fit(data.iter().map(|(g, _)| g)),
        seq_len: cfg.seq_len,
    };
    let inputs: Vec<(Vec<f64>, usize)> = data
        .iter()
        .map(|(g, label)| (model.prepare(g), label.index()))
        .collect();

    let n_params = model.net.theta().len();
    let decays: Vec<bool> = (0..n_params).map(|k| model.net.is_weight(k)).collect();
    let mut grad = vec![0.0; n_params];
    let mut m = vec![0.0; n_params];
    let mut v = vec![0.0; n_params];
    let mut step = 0i32;
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut loss_curve = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate(epoch);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&[f64], usize)> = chunk
                .iter()
                .map(|&i| (inputs[i].0.as_slice(), inputs[i].1))
                .collect();
            epoch_loss += batch_gradient(&model.net, &batch, &mut grad) * chunk.len() as f64;

            step += 1;
            let c1 = 1.0 - cfg.beta1.powi(step);
            let c2 = 1.0 - BETA2.powi(step);
            let theta = model.net.theta_mut();
            for k in 0..n_params {
                let g = grad[k];
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
                v[k] = BETA2 * v[k] + (1.0 - BETA2) * g * g;
                let update = (m[k] / c1) / ((v[k] / c2).sqrt() + EPS);
                let decay = if decays[k] { cfg.weight_decay * theta[k] } else { 0.0 };
                theta[k] -= lr * (update + decay);
            }
        }
        loss_curve.push(epoch_loss / inputs.len() as f64);
    }

    Ok(TrainOutcome { model, loss_curve })
}
