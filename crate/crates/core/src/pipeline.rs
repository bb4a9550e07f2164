//! Deep + affective feature fusion and end-to-end classification.

use crate::emotion::{valence_arousal, Affect, ClassProbabilities, EmotionLabel};
use crate::features::{affective_features, FeatureError, AFFECTIVE_DIM};
use crate::forest::{ForestError, RandomForest};
use crate::gait::{normalize_root, Gait};
use crate::lstm::{train, LstmModel, TrainConfig, TrainError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("gait '{id}': {source}")]
    Feature {
        id: String,
        #[source]
        source: FeatureError,
    },
}

/// Final hidden state (32) followed by the affective features (29).
pub fn combined_features(lstm: &LstmModel, g: &Gait) -> Result<Vec<f64>, FeatureError> {
    let mut v = lstm.deep_features(&normalize_root(g));
    v.extend_from_slice(&affective_features(g)?.values);
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: EmotionLabel,
    pub probabilities: ClassProbabilities,
    pub affect: Affect,
}

impl Classification {
    pub fn from_probabilities(probabilities: ClassProbabilities) -> Self {
        Self {
            label: probabilities.argmax(),
            affect: valence_arousal(&probabilities),
            probabilities,
        }
    }
}

/// A trained LSTM and the forest fitted on its fused features.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub lstm: LstmModel,
    pub forest: RandomForest,
}

/// A fitted pipeline with the LSTM training loss per epoch.
#[derive(Debug, Clone)]
pub struct FittedPipeline {
    pub pipeline: Pipeline,
    pub loss_curve: Vec<f64>,
}

impl Pipeline {
    /// Train the LSTM on root-normalized gaits, then fit the forest on the
    /// fused features. The forest reuses `cfg.rng_seed`.
    pub fn fit(data: &[(Gait, EmotionLabel)], cfg: &TrainConfig) -> Result<FittedPipeline, PipelineError> {
        let normalized: Vec<(Gait, EmotionLabel)> =
            data.iter().map(|(g, e)| (normalize_root(g), *e)).collect();
        let outcome = train(&normalized, cfg)?;
        let rows = data
            .iter()
            .map(|(g, _)| {
                combined_features(&outcome.model, g).map_err(|source| PipelineError::Feature {
                    id: g.id().to_string(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let labels: Vec<usize> = data.iter().map(|(_, e)| e.index()).collect();
        let forest = RandomForest::fit(&rows, &labels, EmotionLabel::COUNT, cfg.rng_seed)?;
        Ok(FittedPipeline {
            pipeline: Pipeline {
                lstm: outcome.model,
                forest,
            },
            loss_curve: outcome.loss_curve,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.lstm.net.hidden_dim() + AFFECTIVE_DIM
    }

    pub fn classify(&self, g: &Gait) -> Result<Classification, FeatureError> {
        let v = combined_features(&self.lstm, g)?;
        let p = self.forest.predict_proba(&v);
        Ok(Classification::from_probabilities(ClassProbabilities([
            p[0], p[1], p[2], p[3],
        ])))
    }
}

/// Forest over affective features alone.
pub fn fit_affective_forest(
    data: &[(Gait, EmotionLabel)],
    seed: u64,
) -> Result<RandomForest, PipelineError> {
    let rows = data
        .iter()
        .map(|(g, _)| {
            affective_features(g)
                .map(|f| f.values.to_vec())
                .map_err(|source| PipelineError::Feature {
                    id: g.id().to_string(),
                    source,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let labels: Vec<usize> = data.iter().map(|(_, e)| e.index()).collect();
    Ok(RandomForest::fit(&rows, &labels, EmotionLabel::COUNT, seed)?)
}
