//! Emotion-conditioned gait selection from a labeled collection.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::emotion::EmotionLabel;
use crate::gait::{Gait, JointId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BankError {
    #[error("no gait labeled {0} in the bank")]
    NoGaitForEmotion(EmotionLabel),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    First,
    Random { seed: u64 },
    /// Gait whose mean foot speed (m/s) is nearest the target.
    ClosestSpeed { speed: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GaitBank {
    pub entries: Vec<(Gait, EmotionLabel)>,
}

/// Mean horizontal speed of both feet over the clip, in world coordinates.
pub fn mean_foot_speed(g: &Gait) -> f64 {
    let mut total = 0.0;
    for foot in [JointId::LFoot, JointId::RFoot] {
        for t in 1..g.len() {
            let d = g.joint(t, foot) - g.joint(t - 1, foot);
            total += (d.x * d.x + d.z * d.z).sqrt();
        }
    }
    total * g.frame_rate() / (2 * (g.len() - 1)) as f64
}

impl GaitBank {
    pub fn new(entries: Vec<(Gait, EmotionLabel)>) -> Self {
        Self { entries }
    }

    /// Index into `entries` of the selected gait.
    pub fn select_index(&self, e: EmotionLabel, criterion: Criterion) -> Result<usize, BankError> {
        let matching: Vec<usize> = (0..self.entries.len())
            .filter(|&i| self.entries[i].1 == e)
            .collect();
        let first = *matching.first().ok_or(BankError::NoGaitForEmotion(e))?;
        Ok(match criterion {
            Criterion::First => first,
            Criterion::Random { seed } => {
                *matching.choose(&mut ChaCha8Rng::seed_from_u64(seed)).expect("non-empty")
            }
            Criterion::ClosestSpeed { speed } => {
                let gap = |i: usize| (mean_foot_speed(&self.entries[i].0) - speed).abs();
                matching
                    .iter()
                    .copied()
                    .fold(first, |best, i| if gap(i) < gap(best) { i } else { best })
            }
        })
    }

    pub fn select(&self, e: EmotionLabel, criterion: Criterion) -> Result<&Gait, BankError> {
        self.select_index(e, criterion).map(|i| &self.entries[i].0)
    }
}
