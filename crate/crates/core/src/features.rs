//! Hand-crafted affective features: 13 posture and 16 movement descriptors.
//!
//! Posture features are averaged per-frame geometry (bounding-box volume,
//! five angles around the neck and shoulders, four hand/foot-to-root
//! distances, two triangle areas) plus the stride length. Movement features
//! are the mean magnitudes of the 1st, 2nd and 3rd backward differences of the
//! hand, head and foot trajectories plus the walk-cycle time.
//!
//! The layout of [`AffectiveFeatures::values`] is movement block first, then
//! posture, each in the order of [`FEATURE_NAMES`]. Model files depend on this
//! order; do not reorder.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::gait::{normalize_root, walk_cycle_or_whole, Gait, JointId, Pose, WalkCycle};

pub const POSTURE_FRAME_DIM: usize = 12;
pub const POSTURE_DIM: usize = 13;
pub const MOVEMENT_DIM: usize = 16;
pub const AFFECTIVE_DIM: usize = MOVEMENT_DIM + POSTURE_DIM;

/// Joints whose motion is summarized by the movement block, in order.
pub const MOVEMENT_JOINTS: [JointId; 5] = [
    JointId::RHand,
    JointId::LHand,
    JointId::Head,
    JointId::RFoot,
    JointId::LFoot,
];

pub const FEATURE_NAMES: [&str; AFFECTIVE_DIM] = [
    "speed_rhand",
    "speed_lhand",
    "speed_head",
    "speed_rfoot",
    "speed_lfoot",
    "accel_rhand",
    "accel_lhand",
    "accel_head",
    "accel_rfoot",
    "accel_lfoot",
    "jerk_rhand",
    "jerk_lhand",
    "jerk_head",
    "jerk_rfoot",
    "jerk_lfoot",
    "cycle_time",
    "volume",
    "angle_neck_shoulders",
    "angle_rshoulder_neck_lshoulder",
    "angle_lshoulder_neck_rshoulder",
    "angle_neck_vertical_back",
    "angle_neck_head_back",
    "dist_rhand_root",
    "dist_lhand_root",
    "dist_rfoot_root",
    "dist_lfoot_root",
    "stride_length",
    "area_hands_neck",
    "area_feet_root",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("movement window has {0} frames; at least 4 are needed")]
    WindowTooShort(usize),
}

/// Per-frame posture descriptor:
/// `[volume, 5 angles, 4 distances, 2 areas]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePosture {
    pub values: [f64; POSTURE_FRAME_DIM],
    /// Set when an angle ray had zero length; that angle is reported as 0.
    pub degenerate_angle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostureFeatures {
    pub volume: f64,
    pub angles: [f64; 5],
    pub distances: [f64; 4],
    pub stride_length: f64,
    pub areas: [f64; 2],
    pub degenerate_angle: bool,
}

impl PostureFeatures {
    pub fn to_array(&self) -> [f64; POSTURE_DIM] {
        let mut v = [0.0; POSTURE_DIM];
        v[0] = self.volume;
        v[1..6].copy_from_slice(&self.angles);
        v[6..10].copy_from_slice(&self.distances);
        v[10] = self.stride_length;
        v[11..13].copy_from_slice(&self.areas);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovementFeatures {
    pub speed: [f64; 5],
    pub accel: [f64; 5],
    pub jerk: [f64; 5],
    pub cycle_time: f64,
}

impl MovementFeatures {
    pub fn to_array(&self) -> [f64; MOVEMENT_DIM] {
        let mut v = [0.0; MOVEMENT_DIM];
        v[0..5].copy_from_slice(&self.speed);
        v[5..10].copy_from_slice(&self.accel);
        v[10..15].copy_from_slice(&self.jerk);
        v[15] = self.cycle_time;
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffectiveFeatures {
    pub values: [f64; AFFECTIVE_DIM],
    pub cycle: WalkCycle,
    pub degenerate_angle: bool,
}

/// Angle at `vertex` between the rays towards `a` and `b`, in `[0, π]`.
/// `None` when either ray has zero length.
fn angle_at(vertex: Vector3<f64>, a: Vector3<f64>, b: Vector3<f64>) -> Option<f64> {
    let u = a - vertex;
    let v = b - vertex;
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    // atan2 keeps precision near 0 and π where acos does not
    Some(u.cross(&v).norm().atan2(u.dot(&v)))
}

fn triangle_area(a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64>) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

fn bounding_box_volume(p: &Pose) -> f64 {
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for j in JointId::ALL {
        let q = p.joint(j);
        lo = lo.inf(&q);
        hi = hi.sup(&q);
    }
    let d = hi - lo;
    d.x * d.y * d.z
}

pub fn posture_features_frame(p: &Pose) -> FramePosture {
    use JointId::*;
    let j = |id| p.joint(id);
    let neck = j(Neck);
    let up = neck + Vector3::y();

    let angles = [
        angle_at(neck, j(LShoulder), j(RShoulder)),
        angle_at(j(RShoulder), neck, j(LShoulder)),
        angle_at(j(LShoulder), neck, j(RShoulder)),
        angle_at(neck, up, j(Spine)),
        angle_at(neck, j(Head), j(Spine)),
    ];
    let degenerate_angle = angles.iter().any(Option::is_none);

    let root = j(Root);
    let mut values = [0.0; POSTURE_FRAME_DIM];
    values[0] = bounding_box_volume(p);
    for (slot, a) in values[1..6].iter_mut().zip(angles) {
        *slot = a.unwrap_or(0.0);
    }
    for (slot, id) in values[6..10].iter_mut().zip([RHand, LHand, RFoot, LFoot]) {
        *slot = (j(id) - root).norm();
    }
    values[10] = triangle_area(j(RHand), j(LHand), neck);
    values[11] = triangle_area(j(RFoot), j(LFoot), root);
    FramePosture {
        values,
        degenerate_angle,
    }
}

/// Largest distance between the two feet over the whole gait.
pub fn stride_length(g: &Gait) -> f64 {
    stride_length_in(g, &WalkCycle::whole(g))
}

/// Largest distance between the two feet over the frames of `cycle`.
pub fn stride_length_in(g: &Gait, cycle: &WalkCycle) -> f64 {
    cycle
        .frames()
        .map(|t| (g.joint(t, JointId::LFoot) - g.joint(t, JointId::RFoot)).norm())
        .fold(0.0, f64::max)
}

pub fn posture_features(g: &Gait, cycle: &WalkCycle) -> PostureFeatures {
    let mut sum = [0.0; POSTURE_FRAME_DIM];
    let mut degenerate_angle = false;
    for t in cycle.frames() {
        let f = posture_features_frame(&g.frames()[t]);
        degenerate_angle |= f.degenerate_angle;
        for (s, v) in sum.iter_mut().zip(f.values) {
            *s += v;
        }
    }
    let n = cycle.frame_count() as f64;
    let mean = sum.map(|s| s / n);
    PostureFeatures {
        volume: mean[0],
        angles: mean[1..6].try_into().unwrap(),
        distances: mean[6..10].try_into().unwrap(),
        stride_length: stride_length_in(g, cycle),
        areas: mean[10..12].try_into().unwrap(),
        degenerate_angle,
    }
}

pub fn movement_features(g: &Gait, cycle: &WalkCycle) -> Result<MovementFeatures, FeatureError> {
    let n = cycle.frame_count();
    if n < 4 {
        return Err(FeatureError::WindowTooShort(n));
    }
    let fps = g.frame_rate();
    let mut mags = [[0.0; 5]; 3];
    for (k, joint) in MOVEMENT_JOINTS.into_iter().enumerate() {
        // successive backward differences, restricted to the window
        let mut series: Vec<Vector3<f64>> = cycle.frames().map(|t| g.joint(t, joint)).collect();
        for (order, row) in mags.iter_mut().enumerate() {
            series = series.windows(2).map(|w| (w[1] - w[0]) * fps).collect();
            let mean = series.iter().map(|d| d.norm()).sum::<f64>() / series.len() as f64;
            row[k] = mean;
            debug_assert_eq!(series.len(), n - order - 1);
        }
    }
    Ok(MovementFeatures {
        speed: mags[0],
        accel: mags[1],
        jerk: mags[2],
        cycle_time: cycle.duration_s,
    })
}

/// Root-normalize, select the walk cycle (whole clip when no cycle is found)
/// and compute the 29-dim feature vector.
pub fn affective_features(g: &Gait) -> Result<AffectiveFeatures, FeatureError> {
    let g = normalize_root(g);
    let cycle = walk_cycle_or_whole(&g);
    affective_features_in(&g, &cycle)
}

/// Features over an explicit window of an already-normalized gait.
pub fn affective_features_in(g: &Gait, cycle: &WalkCycle) -> Result<AffectiveFeatures, FeatureError> {
    let movement = movement_features(g, cycle)?;
    let posture = posture_features(g, cycle);
    let mut values = [0.0; AFFECTIVE_DIM];
    values[..MOVEMENT_DIM].copy_from_slice(&movement.to_array());
    values[MOVEMENT_DIM..].copy_from_slice(&posture.to_array());
    Ok(AffectiveFeatures {
        values,
        cycle: *cycle,
        degenerate_angle: posture.degenerate_angle,
    })
}

pub fn feature_csv_header() -> String {
    let mut h = String::from("gait_id");
    for name in FEATURE_NAMES {
        h.push(',');
        h.push_str(name);
    }
    h
}

pub fn feature_csv_row(id: &str, f: &AffectiveFeatures) -> String {
    let mut row = id.to_string();
    for v in f.values {
        row.push(',');
        row.push_str(&v.to_string());
    }
    row
}
