//! Procedural walker for building labeled desk-scale corpora.
//!
//! The walker advances along +Z with Y up. Each foot follows a periodic path
//! relative to the hips: forward and at its lowest point at the strike phase,
//! with a quartic dwell there so that its speed relative to the root vanishes.
//! Arms swing opposite to the same-side leg. Emotion presets scale stride,
//! cadence, arm swing and head pitch.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::emotion::EmotionLabel;
use crate::gait::{Gait, JointId, Pose, JOINT_COUNT};

pub const SYNTH_FRAMES: usize = 90;
pub const SYNTH_FPS: f64 = 30.0;
/// Walk-cycle period at `speed_scale = 1`, in seconds.
pub const BASE_PERIOD_S: f64 = 1.0;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.0002;

const HIP_HEIGHT: f64 = 0.95;
const FOOT_REACH: f64 = 0.3;
const FOOT_LIFT: f64 = 0.08;
const ROOT_BOB: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub emotion: EmotionLabel,
    pub stride_scale: f64,
    pub speed_scale: f64,
    /// Forward/backward hand excursion, in meters.
    pub arm_swing_amp: f64,
    /// Head pitch in radians; positive tilts forward (down).
    pub head_tilt: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid walker parameters: {0}")]
pub struct SynthParamsError(pub String);

impl SynthParams {
    pub fn preset(emotion: EmotionLabel, seed: u64) -> Self {
        let (stride_scale, speed_scale, arm_swing_amp, head_tilt_deg) = match emotion {
            EmotionLabel::Neutral => (1.0, 1.0, 0.15, 0.0),
            EmotionLabel::Happy => (1.15, 1.15, 0.25, -15.0),
            EmotionLabel::Angry => (1.3, 1.3, 0.32, 5.0),
            EmotionLabel::Sad => (0.7, 0.7, 0.06, 20.0),
        };
        Self {
            emotion,
            stride_scale,
            speed_scale,
            arm_swing_amp,
            head_tilt: f64::to_radians(head_tilt_deg),
            noise_sigma: DEFAULT_NOISE_SIGMA,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthParamsError> {
        if !(self.stride_scale > 0.0 && self.speed_scale > 0.0) {
            return Err(SynthParamsError("stride_scale and speed_scale must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.arm_swing_amp.is_finite() && self.head_tilt.is_finite()) {
            return Err(SynthParamsError("noise_sigma must be non-negative and all values finite".into()));
        }
        Ok(())
    }

    pub fn period_s(&self) -> f64 {
        BASE_PERIOD_S / self.speed_scale
    }

    /// Preset with per-walker variation: multiplicative 5% jitter on the
    /// scales and amplitude, ±3° on head pitch.
    pub fn jittered<R: Rng>(emotion: EmotionLabel, rng: &mut R) -> Self {
        let mut p = Self::preset(emotion, rng.random());
        let n = Normal::new(0.0, 1.0).unwrap();
        let mut scale = |v: f64| v * f64::max(1.0 + 0.05 * n.sample(rng), 0.5);
        p.stride_scale = scale(p.stride_scale);
        p.speed_scale = scale(p.speed_scale);
        p.arm_swing_amp = scale(p.arm_swing_amp);
        p.head_tilt += f64::to_radians(3.0) * n.sample(rng);
        p
    }
}

/// Rotate `v` about the X axis so that positive angles lean +Y toward +Z.
fn pitch(v: Vector3<f64>, angle: f64) -> Vector3<f64> {
    let (s, c) = angle.sin_cos();
    Vector3::new(v.x, c * v.y - s * v.z, s * v.y + c * v.z)
}

struct Walker<'a> {
    p: &'a SynthParams,
    phase0: f64,
}

impl Walker<'_> {
    fn pose(&self, t: f64) -> Pose {
        let p = self.p;
        let period = p.period_s();
        let phi = self.phase0 + TAU * t / period;
        let reach = FOOT_REACH * p.stride_scale;
        // one full stride per period for each foot
        let speed = 2.0 * reach / period;
        let root = Vector3::new(0.0, HIP_HEIGHT - ROOT_BOB * (2.0 * phi).cos(), speed * t);

        let lean = 0.5 * p.head_tilt.max(0.0);
        let spine = root + pitch(Vector3::new(0.0, 0.25, 0.0), lean);
        let neck = root + pitch(Vector3::new(0.0, 0.5, 0.0), lean);
        let head = neck + pitch(Vector3::new(0.0, 0.2, 0.0), lean + p.head_tilt);

        let mut joints = [Vector3::zeros(); JOINT_COUNT];
        joints[JointId::Root.index()] = root;
        joints[JointId::Spine.index()] = spine;
        joints[JointId::Neck.index()] = neck;
        joints[JointId::Head.index()] = head;

        for (side, leg_phase) in [(1.0, phi), (-1.0, phi + PI)] {
            let (shoulder_j, elbow_j, hand_j, hip_j, knee_j, foot_j) = if side > 0.0 {
                use JointId::*;
                (LShoulder, LElbow, LHand, LHip, LKnee, LFoot)
            } else {
                use JointId::*;
                (RShoulder, RElbow, RHand, RHip, RKnee, RFoot)
            };
            let c = leg_phase.cos();
            let shoulder = neck + Vector3::new(0.18 * side, -0.05, 0.0);
            let swing = -p.arm_swing_amp * c;
            let elbow = shoulder + Vector3::new(0.03 * side, -0.28, 0.5 * swing);
            let hand = shoulder + Vector3::new(0.05 * side, -0.55 + 0.3 * swing.abs(), swing);

            let hip = root + Vector3::new(0.1 * side, 0.0, 0.0);
            let dwell = 1.0 - (1.0 - c).powi(2) / 2.0;
            let foot = Vector3::new(
                0.12 * side,
                0.05 + FOOT_LIFT * p.stride_scale.sqrt() * (1.0 - c) / 2.0,
                root.z + reach * dwell,
            );
            let knee = Vector3::new(
                0.11 * side,
                0.5 * (hip.y + foot.y),
                0.5 * (hip.z + foot.z) + 0.06 + 0.04 * (1.0 - c) / 2.0,
            );
            for (j, v) in [
                (shoulder_j, shoulder),
                (elbow_j, elbow),
                (hand_j, hand),
                (hip_j, hip),
                (knee_j, knee),
                (foot_j, foot),
            ] {
                joints[j.index()] = v;
            }
        }
        Pose::from_joints(&joints).expect("walker produces finite joints")
    }
}

/// Generate a 90-frame, 30 fps walk. The starting phase is drawn from the
/// seed; `noise_sigma` adds independent Gaussian jitter to every coordinate.
pub fn synth_gait(p: &SynthParams) -> Result<Gait, SynthParamsError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let walker = Walker {
        p,
        phase0: rng.random_range(0.0..TAU),
    };
    let noise = Normal::new(0.0, p.noise_sigma).expect("validated sigma");
    let frames = (0..SYNTH_FRAMES)
        .map(|k| {
            let mut coords = *walker.pose(k as f64 / SYNTH_FPS).coords();
            if p.noise_sigma > 0.0 {
                coords.iter_mut().for_each(|c| *c += noise.sample(&mut rng));
            }
            Pose::new(coords).expect("finite")
        })
        .collect();
    Ok(Gait::new(format!("{}_{}", p.emotion, p.seed), SYNTH_FPS, frames).expect("valid walker"))
}

/// `n` jittered walkers of one emotion, ids `<emotion>_<k>` with k
/// zero-padded to three digits.
pub fn synth_corpus(emotion: EmotionLabel, n: usize, seed: u64) -> Vec<Gait> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (emotion.index() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    (0..n)
        .map(|k| {
            let p = SynthParams::jittered(emotion, &mut rng);
            let mut g = synth_gait(&p).expect("preset parameters are valid");
            g.set_id(format!("{emotion}_{k:03}"));
            g
        })
        .collect()
}
