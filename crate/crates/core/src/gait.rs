//! Skeleton, pose and gait data model, root normalization and walk-cycle
//! detection.
//!
//! Coordinates are meters with Y up; the ground is the XZ plane.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Joints of the canonical 16-joint skeleton. The discriminant is the stable
/// encoding used by every serialized form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JointId {
    Root = 0,
    Spine = 1,
    Neck = 2,
    Head = 3,
    LShoulder = 4,
    RShoulder = 5,
    LElbow = 6,
    RElbow = 7,
    LHand = 8,
    RHand = 9,
    LHip = 10,
    RHip = 11,
    LKnee = 12,
    RKnee = 13,
    LFoot = 14,
    RFoot = 15,
}

pub const JOINT_COUNT: usize = 16;
pub const POSE_DIM: usize = JOINT_COUNT * 3;

impl JointId {
    pub const ALL: [JointId; JOINT_COUNT] = [
        Self::Root,
        Self::Spine,
        Self::Neck,
        Self::Head,
        Self::LShoulder,
        Self::RShoulder,
        Self::LElbow,
        Self::RElbow,
        Self::LHand,
        Self::RHand,
        Self::LHip,
        Self::RHip,
        Self::LKnee,
        Self::RKnee,
        Self::LFoot,
        Self::RFoot,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Root => "root",
            Self::Spine => "spine",
            Self::Neck => "neck",
            Self::Head => "head",
            Self::LShoulder => "lshoulder",
            Self::RShoulder => "rshoulder",
            Self::LElbow => "lelbow",
            Self::RElbow => "relbow",
            Self::LHand => "lhand",
            Self::RHand => "rhand",
            Self::LHip => "lhip",
            Self::RHip => "rhip",
            Self::LKnee => "lknee",
            Self::RKnee => "rknee",
            Self::LFoot => "lfoot",
            Self::RFoot => "rfoot",
        }
    }

    /// The same joint on the other side of the body; midline joints map to
    /// themselves.
    pub fn mirrored(self) -> Self {
        match self {
            Self::LShoulder => Self::RShoulder,
            Self::RShoulder => Self::LShoulder,
            Self::LElbow => Self::RElbow,
            Self::RElbow => Self::LElbow,
            Self::LHand => Self::RHand,
            Self::RHand => Self::LHand,
            Self::LHip => Self::RHip,
            Self::RHip => Self::LHip,
            Self::LKnee => Self::RKnee,
            Self::RKnee => Self::LKnee,
            Self::LFoot => Self::RFoot,
            Self::RFoot => Self::LFoot,
            other => other,
        }
    }

    pub fn is_foot(self) -> bool {
        matches!(self, Self::LFoot | Self::RFoot)
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JointId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .iter()
            .copied()
            .find(|j| j.name() == lower)
            .ok_or_else(|| format!("unknown joint {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GaitError {
    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("frame rate must be positive and finite, got {0}")]
    InvalidFrameRate(f64),
    #[error("a gait needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("{0} is not a foot joint")]
    NotAFoot(JointId),
    #[error("fewer than two strikes of the same foot")]
    FewerThanTwoStrikes,
}

/// 3D positions of the 16 joints, flattened joint-major (`x, y, z` per joint).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    coords: [f64; POSE_DIM],
}

impl Pose {
    pub fn new(coords: [f64; POSE_DIM]) -> Result<Self, GaitError> {
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(GaitError::NonFinite { index });
        }
        Ok(Self { coords })
    }

    pub fn from_joints(joints: &[Vector3<f64>; JOINT_COUNT]) -> Result<Self, GaitError> {
        let mut coords = [0.0; POSE_DIM];
        for (j, p) in joints.iter().enumerate() {
            coords[3 * j..3 * j + 3].copy_from_slice(p.as_slice());
        }
        Self::new(coords)
    }

    pub fn zeros() -> Self {
        Self {
            coords: [0.0; POSE_DIM],
        }
    }

    pub fn joint(&self, j: JointId) -> Vector3<f64> {
        let k = 3 * j.index();
        Vector3::new(self.coords[k], self.coords[k + 1], self.coords[k + 2])
    }

    pub fn coords(&self) -> &[f64; POSE_DIM] {
        &self.coords
    }

    /// Returns a copy with joint `j` moved to `p`. Panics on non-finite input.
    pub fn with_joint(mut self, j: JointId, p: Vector3<f64>) -> Self {
        assert!(p.iter().all(|c| c.is_finite()), "non-finite joint position");
        let k = 3 * j.index();
        self.coords[k..k + 3].copy_from_slice(p.as_slice());
        self
    }

    pub fn translated(&self, v: Vector3<f64>) -> Self {
        let mut coords = self.coords;
        for (k, c) in coords.iter_mut().enumerate() {
            *c += v[k % 3];
        }
        Self { coords }
    }

    /// Reflection across the YZ plane with left/right joint labels swapped.
    pub fn mirrored(&self) -> Self {
        let mut coords = [0.0; POSE_DIM];
        for j in JointId::ALL {
            let p = self.joint(j);
            let k = 3 * j.mirrored().index();
            coords[k] = -p.x;
            coords[k + 1] = p.y;
            coords[k + 2] = p.z;
        }
        Self { coords }
    }
}

/// An ordered, timed sequence of poses.
#[derive(Debug, Clone, PartialEq)]
pub struct Gait {
    id: String,
    frame_rate: f64,
    frames: Vec<Pose>,
}

impl Gait {
    pub fn new(id: impl Into<String>, frame_rate: f64, frames: Vec<Pose>) -> Result<Self, GaitError> {
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            return Err(GaitError::InvalidFrameRate(frame_rate));
        }
        if frames.len() < 2 {
            return Err(GaitError::TooFewFrames(frames.len()));
        }
        Ok(Self {
            id: id.into(),
            frame_rate,
            frames,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn frames(&self) -> &[Pose] {
        &self.frames
    }

    /// Number of frames (τ).
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn joint(&self, t: usize, j: JointId) -> Vector3<f64> {
        self.frames[t].joint(j)
    }

    pub fn duration_s(&self) -> f64 {
        (self.len() - 1) as f64 / self.frame_rate
    }

    pub fn map_frames(&self, f: impl FnMut(&Pose) -> Pose) -> Self {
        Self {
            id: self.id.clone(),
            frame_rate: self.frame_rate,
            frames: self.frames.iter().map(f).collect(),
        }
    }

    pub fn translated(&self, v: Vector3<f64>) -> Self {
        self.map_frames(|p| p.translated(v))
    }
}

/// Translate every frame so the root joint sits at the origin.
pub fn normalize_root(g: &Gait) -> Gait {
    g.map_frames(|p| {
        let root = p.joint(JointId::Root);
        let mut coords = *p.coords();
        for (k, c) in coords.iter_mut().enumerate() {
            *c -= root[k % 3];
        }
        Pose { coords }
    })
}

/// Foot-strike detection.
///
/// Frame `t` is a strike when the foot height is a minimum over the ±2-frame
/// window (and strictly lower than at least one later frame in it) while the
/// horizontal backward-difference speed is at most 10% of the gait's mean
/// horizontal foot speed. Adjacent qualifying frames (≤ 2 apart) are one
/// event reported at its earliest frame.
pub fn detect_foot_strikes(g: &Gait, foot: JointId) -> Result<Vec<usize>, GaitError> {
    if !foot.is_foot() {
        return Err(GaitError::NotAFoot(foot));
    }
    let n = g.len();
    if n < 3 {
        return Ok(Vec::new());
    }
    let height: Vec<f64> = (0..n).map(|t| g.joint(t, foot).y).collect();
    let speed = horizontal_speeds(g, foot);
    let mean_speed = speed[1..].iter().sum::<f64>() / (n - 1) as f64;
    let limit = STRIKE_SPEED_FRACTION * mean_speed;

    let mut strikes: Vec<usize> = Vec::new();
    let mut last_candidate: Option<usize> = None;
    for t in 0..n {
        let lo = t.saturating_sub(STRIKE_WINDOW);
        let hi = (t + STRIKE_WINDOW).min(n - 1);
        let is_min = height[lo..=hi].iter().all(|&h| height[t] <= h);
        let rises_after = height[t + 1..=hi].iter().any(|&h| height[t] < h);
        if !(is_min && rises_after && speed[t] <= limit) {
            continue;
        }
        match last_candidate {
            Some(prev) if t - prev <= STRIKE_WINDOW => {}
            _ => strikes.push(t),
        }
        last_candidate = Some(t);
    }
    Ok(strikes)
}

const STRIKE_WINDOW: usize = 2;
const STRIKE_SPEED_FRACTION: f64 = 0.1;

/// Backward-difference speed in the XZ plane; frame 0 reuses frame 1's value.
fn horizontal_speeds(g: &Gait, foot: JointId) -> Vec<f64> {
    let n = g.len();
    let mut speed = vec![0.0; n];
    for t in 1..n {
        let d = g.joint(t, foot) - g.joint(t - 1, foot);
        speed[t] = (d.x * d.x + d.z * d.z).sqrt() * g.frame_rate();
    }
    speed[0] = speed[1];
    speed
}

/// A frame window `[start_frame, end_frame]` treated as one stride.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkCycle {
    pub start_frame: usize,
    pub end_frame: usize,
    /// Time for one walk cycle, in seconds.
    pub duration_s: f64,
}

impl WalkCycle {
    pub fn new(start_frame: usize, end_frame: usize, frame_rate: f64) -> Self {
        debug_assert!(start_frame < end_frame);
        Self {
            start_frame,
            end_frame,
            duration_s: (end_frame - start_frame) as f64 / frame_rate,
        }
    }

    /// The whole clip as a single stride.
    pub fn whole(g: &Gait) -> Self {
        Self::new(0, g.len() - 1, g.frame_rate())
    }

    pub fn frame_count(&self) -> usize {
        self.end_frame - self.start_frame + 1
    }

    pub fn frames(&self) -> std::ops::RangeInclusive<usize> {
        self.start_frame..=self.end_frame
    }
}

/// First pair of consecutive strikes of the same foot. When both feet have
/// two strikes the foot that strikes first wins (left on exact ties). A
/// strike inside the first ±2-frame window only opens the cycle when the
/// foot has no other pair.
pub fn extract_walk_cycle(g: &Gait) -> Result<WalkCycle, GaitError> {
    let mut best: Option<(usize, usize)> = None;
    for foot in [JointId::LFoot, JointId::RFoot] {
        let mut strikes = detect_foot_strikes(g, foot)?;
        // a strike in the first frames may be the tail of an unseen minimum
        if strikes.len() > 2 && strikes[0] < STRIKE_WINDOW {
            strikes.remove(0);
        }
        if let [a, b, ..] = strikes[..] {
            if best.is_none_or(|(s, _)| a < s) {
                best = Some((a, b));
            }
        }
    }
    best.map(|(a, b)| WalkCycle::new(a, b, g.frame_rate()))
        .ok_or(GaitError::FewerThanTwoStrikes)
}

/// [`extract_walk_cycle`], falling back to the whole clip.
pub fn walk_cycle_or_whole(g: &Gait) -> WalkCycle {
    extract_walk_cycle(g).unwrap_or_else(|_| WalkCycle::whole(g))
}
