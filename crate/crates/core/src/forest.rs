//! Feature normalization and a Gini random forest.
//!
//! Each tree is grown on a bootstrap sample (n draws with replacement).
//! At every node `⌈√d⌉` candidate features are drawn without replacement and
//! the split minimizing the weighted Gini impurity of the children is kept;
//! ties go to the lowest feature index, then the lowest threshold. Nodes stop
//! splitting at the depth limit, when pure, or below two samples.
//!
//! Class probabilities are leaf class frequencies averaged over the trees.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const N_ESTIMATORS: usize = 10;
pub const MAX_DEPTH: usize = 5;
pub const MIN_SAMPLES_SPLIT: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForestError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error("row {row} has {found} features, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("{features} feature rows but {labels} labels")]
    LabelCount { features: usize, labels: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("invalid forest JSON: {0}")]
    Json(String),
}

/// Per-dimension training range used to map features onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationStats {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, ForestError> {
        let first = rows.first().ok_or(ForestError::EmptyDataset)?;
        let d = first.len();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(ForestError::RaggedRow {
                    row: r,
                    found: row.len(),
                    expected: d,
                });
            }
            for k in 0..d {
                min[k] = min[k].min(row[k]);
                max[k] = max[k].max(row[k]);
            }
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `2(v − min)/(max − min) − 1`, clamped to `[-1, 1]`; constant
    /// dimensions map to 0.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(k, &x)| {
                let span = self.max[k] - self.min[k];
                if span > 0.0 {
                    (2.0 * (x - self.min[k]) / span - 1.0).clamp(-1.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        counts: Vec<f64>,
    },
}

impl Node {
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn leaf<'a>(&'a self, x: &[f64]) -> &'a [f64] {
        match self {
            Node::Leaf { counts } => counts,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.leaf(x)
                } else {
                    right.leaf(x)
                }
            }
        }
    }

    pub fn leaves_mut(&mut self) -> Vec<&mut Vec<f64>> {
        match self {
            Node::Leaf { counts } => vec![counts],
            Node::Split { left, right, .. } => {
                let mut v = left.leaves_mut();
                v.extend(right.leaves_mut());
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionTree {
    pub root: Node,
}

impl DecisionTree {
    /// Leaf class-frequency distribution for `x`.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let counts = self.root.leaf(x);
        let total: f64 = counts.iter().sum();
        counts.iter().map(|c| c / total).collect()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

/// Growth settings. [`TreeParams::default_for`] gives the forest defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub max_features: usize,
}

impl TreeParams {
    pub fn default_for(dim: usize) -> Self {
        Self {
            max_depth: MAX_DEPTH,
            min_samples_split: MIN_SAMPLES_SPLIT,
            max_features: ((dim as f64).sqrt().ceil() as usize).clamp(1, dim.max(1)),
        }
    }
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total).powi(2)).sum::<f64>()
}

struct Grower<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    classes: usize,
    params: TreeParams,
    rng: &'a mut R,
}

impl<R: Rng> Grower<'_, R> {
    fn counts(&self, idx: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.classes];
        for &i in idx {
            c[self.y[i]] += 1.0;
        }
        c
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> Node {
        let counts = self.counts(idx);
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        if pure || depth >= self.params.max_depth || idx.len() < self.params.min_samples_split {
            return Node::Leaf { counts };
        }
        let dim = self.x[idx[0]].len();
        let mut features = sample(self.rng, dim, self.params.max_features.min(dim)).into_vec();
        features.sort_unstable();

        let Some((feature, threshold)) = self.best_split(idx, &features) else {
            return Node::Leaf { counts };
        };
        let mut mid = 0;
        for k in 0..idx.len() {
            if self.x[idx[k]][feature] <= threshold {
                idx.swap(mid, k);
                mid += 1;
            }
        }
        let (left, right) = idx.split_at_mut(mid);
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.grow(left, depth + 1)),
            right: Box::new(self.grow(right, depth + 1)),
        }
    }

    /// Lowest weighted child Gini over the candidate features; `None` when
    /// every candidate is constant on this node.
    fn best_split(&self, idx: &[usize], features: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len() as f64;
        let total = self.counts(idx);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        for &f in features {
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (self.x[i][f], self.y[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0.0; self.classes];
            for k in 0..pairs.len() - 1 {
                left[pairs[k].1] += 1.0;
                if pairs[k].0 == pairs[k + 1].0 {
                    continue;
                }
                let nl = (k + 1) as f64;
                let right: Vec<f64> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                let score = (nl * gini(&left, nl) + (n - nl) * gini(&right, n - nl)) / n;
                let threshold = 0.5 * (pairs[k].0 + pairs[k + 1].0);
                // features ascend and thresholds ascend within a feature, so a
                // strict improvement keeps the lowest index/threshold on ties
                if best.is_none_or(|(s, _, _)| score < s) {
                    best = Some((score, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Grow a single tree on the rows `idx` of `x`.
pub fn grow_tree<R: Rng>(
    x: &[Vec<f64>],
    y: &[usize],
    classes: usize,
    idx: &mut [usize],
    params: TreeParams,
    rng: &mut R,
) -> DecisionTree {
    let mut grower = Grower {
        x,
        y,
        classes,
        params,
        rng,
    };
    DecisionTree {
        root: grower.grow(idx, 0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub seed: u64,
    pub stats: NormalizationStats,
    pub trees: Vec<DecisionTree>,
}

fn validate(x: &[Vec<f64>], y: &[usize], classes: usize) -> Result<(), ForestError> {
    if x.is_empty() {
        return Err(ForestError::EmptyDataset);
    }
    if x.len() != y.len() {
        return Err(ForestError::LabelCount {
            features: x.len(),
            labels: y.len(),
        });
    }
    if let Some(&label) = y.iter().find(|&&l| l >= classes) {
        return Err(ForestError::LabelOutOfRange { label, classes });
    }
    Ok(())
}

impl RandomForest {
    /// Fit the normalizer on `x`, then grow [`N_ESTIMATORS`] bootstrap trees
    /// on the normalized rows.
    pub fn fit(x: &[Vec<f64>], y: &[usize], classes: usize, seed: u64) -> Result<Self, ForestError> {
        validate(x, y, classes)?;
        let stats = NormalizationStats::fit(x)?;
        let normalized: Vec<Vec<f64>> = x.iter().map(|r| stats.apply(r)).collect();
        let params = TreeParams::default_for(stats.dim());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = x.len();
        let trees = (0..N_ESTIMATORS)
            .map(|_| {
                let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                grow_tree(&normalized, y, classes, &mut idx, params, &mut rng)
            })
            .collect();
        Ok(Self { seed, stats, trees })
    }

    pub fn classes(&self) -> usize {
        let mut node = &self.trees[0].root;
        loop {
            match node {
                Node::Leaf { counts } => return counts.len(),
                Node::Split { left, .. } => node = left,
            }
        }
    }

    /// Class probabilities for an already-normalized vector.
    pub fn predict_proba_normalized(&self, v: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.classes()];
        for tree in &self.trees {
            for (acc, q) in p.iter_mut().zip(tree.predict_proba(v)) {
                *acc += q;
            }
        }
        let n = self.trees.len() as f64;
        p.iter_mut().for_each(|q| *q /= n);
        p
    }

    /// Class probabilities for a raw feature vector.
    pub fn predict_proba(&self, raw: &[f64]) -> Vec<f64> {
        self.predict_proba_normalized(&self.stats.apply(raw))
    }

    /// Most probable class, lowest index on ties.
    pub fn predict(&self, raw: &[f64]) -> usize {
        argmax(&self.predict_proba(raw))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ForestError> {
        let f: Self = serde_json::from_str(text).map_err(|e| ForestError::Json(e.to_string()))?;
        if f.trees.is_empty() || f.stats.min.len() != f.stats.max.len() {
            return Err(ForestError::Json("forest has no trees or mismatched stats".into()));
        }
        Ok(f)
    }
}

pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..p.len() {
        if p[k] > p[best] {
            best = k;
        }
    }
    best
}
