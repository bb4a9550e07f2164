//! # gaitsense
//!
//! Perceived-emotion analysis from 3D walking sequences.
//!
//! A [`Gait`] is a timed sequence of 16-joint poses. From it the crate computes
//! 29 hand-crafted affective features ([`features`]), 32 learned deep features
//! from a from-scratch LSTM ([`lstm`]), and fuses both with a random forest
//! ([`forest`]) to predict one of four perceived emotions together with a
//! continuous valence/arousal estimate ([`pipeline`]).
//!
//! The [`study`] module holds the rating-aggregation math used to produce
//! training labels, and [`synth`]/[`bank`] provide a procedural walker and
//! emotion-conditioned gait selection.

pub mod bank;
pub mod emotion;
pub mod features;
pub mod forest;
pub mod gait;
pub mod io;
pub mod lstm;
pub mod pipeline;
pub mod study;
pub mod synth;

pub use emotion::{Affect, ClassProbabilities, EmotionLabel};
pub use features::AffectiveFeatures;
pub use forest::{NormalizationStats, RandomForest};
pub use gait::{Gait, JointId, Pose, WalkCycle};
pub use lstm::{LstmModel, TrainConfig};
pub use pipeline::Pipeline;
