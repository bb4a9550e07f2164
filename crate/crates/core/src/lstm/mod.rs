//! LSTM deep features and saliency maps.
//!
//! A gait is turned into network input by min-max scaling every coordinate
//! into `[0, 1]` with per-axis bounds fitted on the training set, then
//! linearly resampled to a fixed number of steps. The 32-dim deep feature is
//! the hidden state after the last step.
//!
//! All entry points expect root-normalized gaits.

mod net;
mod train;

pub use net::{cross_entropy, sigmoid, ForwardCache, Gate, LstmNet, LstmState};
pub use train::{train, TrainConfig, TrainError, TrainOutcome};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::emotion::EmotionLabel;
use crate::gait::{Gait, JOINT_COUNT, POSE_DIM};

pub const HIDDEN_SIZE: usize = 32;
pub const SEQ_LEN: usize = 48;

/// Per-axis bounds mapping coordinates into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputScale {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl InputScale {
    pub fn identity() -> Self {
        Self {
            min: [0.0; 3],
            max: [1.0; 3],
        }
    }

    pub fn fit<'a>(gaits: impl IntoIterator<Item = &'a Gait>) -> Self {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for g in gaits {
            for p in g.frames() {
                for (k, &c) in p.coords().iter().enumerate() {
                    min[k % 3] = min[k % 3].min(c);
                    max[k % 3] = max[k % 3].max(c);
                }
            }
        }
        if min[0] > max[0] {
            return Self::identity();
        }
        Self { min, max }
    }

    /// Width of each axis; degenerate axes use 1 so scaling stays finite.
    pub fn range(&self, axis: usize) -> f64 {
        let r = self.max[axis] - self.min[axis];
        if r > 0.0 {
            r
        } else {
            1.0
        }
    }

    pub fn apply(&self, coord: f64, axis: usize) -> f64 {
        (coord - self.min[axis]) / self.range(axis)
    }
}

/// Linear interpolation of `frames` (`n × dim`) onto `len` evenly spaced
/// samples. Returns `(lower index, weight of upper neighbour)` per sample.
fn resample_plan(n: usize, len: usize) -> Vec<(usize, f64)> {
    (0..len)
        .map(|k| {
            if len == 1 || n == 1 {
                return (0, 0.0);
            }
            let u = k as f64 * (n - 1) as f64 / (len - 1) as f64;
            let i = (u.floor() as usize).min(n - 1);
            if i == n - 1 {
                (i, 0.0)
            } else {
                (i, u - i as f64)
            }
        })
        .collect()
}

fn resample(frames: &[f64], dim: usize, len: usize) -> Vec<f64> {
    let n = frames.len() / dim;
    let mut out = Vec::with_capacity(len * dim);
    for (i, w) in resample_plan(n, len) {
        let a = &frames[i * dim..(i + 1) * dim];
        if w == 0.0 {
            out.extend_from_slice(a);
        } else {
            let b = &frames[(i + 1) * dim..(i + 2) * dim];
            out.extend(a.iter().zip(b).map(|(x, y)| (1.0 - w) * x + w * y));
        }
    }
    out
}

/// Transpose of [`resample`]: pulls gradients on resampled steps back onto
/// the original frames.
fn resample_adjoint(grad: &[f64], dim: usize, n: usize) -> Vec<f64> {
    let len = grad.len() / dim;
    let mut out = vec![0.0; n * dim];
    for (k, (i, w)) in resample_plan(n, len).into_iter().enumerate() {
        let g = &grad[k * dim..(k + 1) * dim];
        for d in 0..dim {
            out[i * dim + d] += (1.0 - w) * g[d];
            if w != 0.0 {
                out[(i + 1) * dim + d] += w * g[d];
            }
        }
    }
    out
}

/// Trained LSTM classifier plus its input preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    pub net: LstmNet,
    pub input_scale: InputScale,
    pub seq_len: usize,
}

/// Output of [`LstmModel::forward`].
#[derive(Debug, Clone)]
pub struct LstmOutput {
    pub logits: Vec<f64>,
    pub deep: Vec<f64>,
    pub cache: ForwardCache,
}

impl LstmModel {
    /// Scaled, resampled network input (`seq_len × 48`).
    pub fn prepare(&self, g: &Gait) -> Vec<f64> {
        resample(&self.scaled_frames(g), POSE_DIM, self.seq_len)
    }

    fn scaled_frames(&self, g: &Gait) -> Vec<f64> {
        g.frames()
            .iter()
            .flat_map(|p| {
                p.coords()
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| self.input_scale.apply(c, k % 3))
            })
            .collect()
    }

    pub fn forward(&self, g: &Gait) -> LstmOutput {
        let (logits, cache) = self.net.forward(&self.prepare(g));
        let deep = cache.final_hidden(self.net.hidden_dim()).to_vec();
        LstmOutput { logits, deep, cache }
    }

    pub fn deep_features(&self, g: &Gait) -> Vec<f64> {
        self.net.final_state(&self.prepare(g)).h
    }

    pub fn logits(&self, g: &Gait) -> Vec<f64> {
        self.net.logits(&self.prepare(g))
    }

    pub fn predict(&self, g: &Gait) -> EmotionLabel {
        let z = self.logits(g);
        let mut best = 0;
        for k in 1..z.len() {
            if z[k] > z[best] {
                best = k;
            }
        }
        EmotionLabel::from_index(best).expect("four-class head")
    }

    /// Gradient of the loss against the predicted class with respect to the
    /// scaled input coordinates of every original frame (`τ × 48`).
    pub fn input_gradient(&self, g: &Gait) -> Vec<f64> {
        let out = self.forward(g);
        let mut pred = 0;
        for k in 1..out.logits.len() {
            if out.logits[k] > out.logits[pred] {
                pred = k;
            }
        }
        let (_, dlogits) = cross_entropy(&out.logits, pred);
        let mut scratch = vec![0.0; self.net.theta().len()];
        let mut dx = vec![0.0; self.seq_len * POSE_DIM];
        self.net
            .backward(&out.cache, &dlogits, &mut scratch, Some(&mut dx));
        resample_adjoint(&dx, POSE_DIM, g.len())
    }

    /// Per-frame, per-joint saliency in `[0, 1]`: the Euclidean norm of each
    /// joint's three coordinate gradients, divided by the gait's maximum when
    /// that maximum exceeds 1.
    pub fn saliency(&self, g: &Gait) -> Vec<[f64; JOINT_COUNT]> {
        let grad = self.input_gradient(g);
        let mut map: Vec<[f64; JOINT_COUNT]> = grad
            .chunks_exact(POSE_DIM)
            .map(|frame| {
                let mut a = [0.0; JOINT_COUNT];
                for (j, slot) in a.iter_mut().enumerate() {
                    let d = &frame[3 * j..3 * j + 3];
                    *slot = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                }
                a
            })
            .collect();
        let max = map.iter().flatten().copied().fold(0.0, f64::max);
        if max > 1.0 {
            for v in map.iter_mut().flatten() {
                *v /= max;
            }
        }
        map
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelFile::from(self)).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelFileError> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("invalid model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model parameter shapes do not match h={h}, input={input}")]
    Shape { h: usize, input: usize },
    #[error("model contains non-finite parameters")]
    NonFinite,
}

#[derive(Serialize, Deserialize)]
struct GateFile {
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    #[serde(rename = "U")]
    u: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct HeadFile {
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    h: usize,
    input_dim: usize,
    params: BTreeMap<Gate, GateFile>,
    head: HeadFile,
    input_scale: InputScale,
    seq_len: usize,
}

fn rows(flat: &[f64], width: usize) -> Vec<Vec<f64>> {
    flat.chunks(width).map(<[f64]>::to_vec).collect()
}

impl From<&LstmModel> for ModelFile {
    fn from(m: &LstmModel) -> Self {
        let net = &m.net;
        let (ni, nh) = (net.input_dim(), net.hidden_dim());
        let params = Gate::ALL
            .into_iter()
            .map(|g| {
                let file = GateFile {
                    w: rows(net.gate_w(g), ni),
                    u: rows(net.gate_u(g), nh),
                    b: net.gate_b(g).to_vec(),
                };
                (g, file)
            })
            .collect();
        Self {
            h: nh,
            input_dim: ni,
            params,
            head: HeadFile {
                w: rows(net.head_w(), nh),
                b: net.head_b().to_vec(),
            },
            input_scale: m.input_scale,
            seq_len: m.seq_len,
        }
    }
}

impl TryFrom<ModelFile> for LstmModel {
    type Error = ModelFileError;

    fn try_from(f: ModelFile) -> Result<Self, Self::Error> {
        let (h, input) = (f.h, f.input_dim);
        let shape = || ModelFileError::Shape { h, input };
        let flat = |m: &[Vec<f64>], width: usize| -> Result<Vec<f64>, ModelFileError> {
            if m.iter().all(|r| r.len() == width) {
                Ok(m.concat())
            } else {
                Err(shape())
            }
        };
        let mut blocks = Vec::with_capacity(4);
        for g in Gate::ALL {
            let gf = f.params.get(&g).ok_or_else(shape)?;
            blocks.push((flat(&gf.w, input)?, flat(&gf.u, h)?, gf.b.clone()));
        }
        let head_w = flat(&f.head.w, h)?;
        let gates: [(&[f64], &[f64], &[f64]); 4] = std::array::from_fn(|k| {
            (
                blocks[k].0.as_slice(),
                blocks[k].1.as_slice(),
                blocks[k].2.as_slice(),
            )
        });
        let net = LstmNet::from_blocks(input, h, gates, &head_w, &f.head.b).ok_or_else(shape)?;
        if net.theta().iter().any(|v| !v.is_finite()) {
            return Err(ModelFileError::NonFinite);
        }
        Ok(Self {
            net,
            input_scale: f.input_scale,
            seq_len: f.seq_len.max(1),
        })
    }
}
