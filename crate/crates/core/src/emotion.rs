//! Emotion classes, class probabilities and the valence/arousal mapping.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the four perceived-emotion classes.
///
/// The discriminant is the class index used by every model and file format;
/// the declaration order doubles as the argmax tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Happy = 0,
    Angry = 1,
    Sad = 2,
    Neutral = 3,
}

impl EmotionLabel {
    pub const COUNT: usize = 4;
    pub const ALL: [EmotionLabel; 4] = [Self::Happy, Self::Angry, Self::Sad, Self::Neutral];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Happy => "happy",
            Self::Angry => "angry",
            Self::Sad => "sad",
            Self::Neutral => "neutral",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown emotion label {0:?} (expected happy, angry, sad or neutral)")]
pub struct UnknownLabel(pub String);

impl FromStr for EmotionLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "happy" => Ok(Self::Happy),
            "angry" => Ok(Self::Angry),
            "sad" => Ok(Self::Sad),
            "neutral" => Ok(Self::Neutral),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

/// A point on the 4-class probability simplex, indexed by [`EmotionLabel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassProbabilities(pub [f64; 4]);

impl ClassProbabilities {
    pub fn get(&self, label: EmotionLabel) -> f64 {
        self.0[label.index()]
    }

    /// Most probable class; exact ties go to the earlier class in
    /// [`EmotionLabel::ALL`] order.
    pub fn argmax(&self) -> EmotionLabel {
        let mut best = 0;
        for k in 1..4 {
            if self.0[k] > self.0[best] {
                best = k;
            }
        }
        EmotionLabel::ALL[best]
    }

    pub fn one_hot(label: EmotionLabel) -> Self {
        let mut p = [0.0; 4];
        p[label.index()] = 1.0;
        Self(p)
    }
}

/// Continuous affect estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affect {
    pub valence: f64,
    pub arousal: f64,
}

/// Coefficients of (happy, angry, sad) on the valence axis.
pub const VALENCE_WEIGHTS: [f64; 3] = [0.67, -0.04, -0.74];
/// Coefficients of (happy, angry, sad) on the arousal axis.
pub const AROUSAL_WEIGHTS: [f64; 3] = [-0.35, 0.86, -0.37];

/// Map class probabilities onto the valence/arousal plane.
///
/// Neutral sits at the origin of the affect space, so its probability
/// contributes to neither axis and the remaining three are not renormalized.
pub fn valence_arousal(p: &ClassProbabilities) -> Affect {
    let hap = [p.0[0], p.0[1], p.0[2]];
    let dot = |w: &[f64; 3]| w[0] * hap[0] + w[1] * hap[1] + w[2] * hap[2];
    Affect {
        valence: dot(&VALENCE_WEIGHTS),
        arousal: dot(&AROUSAL_WEIGHTS),
    }
}
