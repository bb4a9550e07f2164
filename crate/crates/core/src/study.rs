//! Rating aggregation, response correlation, Welch's t-test and PCA.
//!
//! Ratings are 5-point Likert responses per gait, participant and emotion
//! (happy, angry, sad, neutral). Per-gait means become training labels when
//! exactly one emotion clears the threshold.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::emotion::EmotionLabel;

pub const DEFAULT_THETA: f64 = 3.5;
pub const RATINGS_HEADER: &str = "gait_id,participant_id,gender,happy,angry,sad,neutral";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StudyError {
    #[error("line {line}: {message}")]
    Ratings { line: usize, message: String },
    #[error("need at least {needed} {what}, found {found}")]
    TooFew {
        what: &'static str,
        needed: usize,
        found: usize,
    },
    #[error("group {group} has zero variance")]
    ZeroVariance { group: char },
    #[error("rows have inconsistent widths")]
    Ragged,
}

/// One participant's four ratings for one gait.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub participant: String,
    pub gender: Option<String>,
    pub ratings: [u8; 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaitResponses {
    pub gait_id: String,
    pub responses: Vec<Response>,
}

/// All responses, grouped by gait in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResponseMatrix {
    pub gaits: Vec<GaitResponses>,
}

impl ResponseMatrix {
    pub fn push(&mut self, gait_id: &str, response: Response) {
        match self.gaits.iter_mut().find(|g| g.gait_id == gait_id) {
            Some(g) => g.responses.push(response),
            None => self.gaits.push(GaitResponses {
                gait_id: gait_id.to_string(),
                responses: vec![response],
            }),
        }
    }

    /// Parse `gait_id,participant_id,gender,happy,angry,sad,neutral` rows
    /// with integer ratings in 1..=5.
    pub fn from_csv(text: &str) -> Result<Self, StudyError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let err = |line: usize, message: String| StudyError::Ratings { line, message };
        match lines.next() {
            Some((_, h)) if h.trim() == RATINGS_HEADER => {}
            Some((i, h)) => return Err(err(i + 1, format!("expected header '{RATINGS_HEADER}', found '{}'", h.trim()))),
            None => return Err(err(1, "empty ratings file".into())),
        }
        let mut m = Self::default();
        for (i, line) in lines {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 7 {
                return Err(err(i + 1, format!("expected 7 columns, found {}", cells.len())));
            }
            let mut ratings = [0u8; 4];
            for (k, slot) in ratings.iter_mut().enumerate() {
                let cell = cells[3 + k];
                *slot = match cell.parse::<u8>() {
                    Ok(r @ 1..=5) => r,
                    _ => {
                        return Err(err(
                            i + 1,
                            format!("column {}: rating '{cell}' is not an integer in 1..=5", 4 + k),
                        ))
                    }
                };
            }
            let gender = (!cells[2].is_empty()).then(|| cells[2].to_string());
            m.push(
                cells[0],
                Response {
                    participant: cells[1].to_string(),
                    gender,
                    ratings,
                },
            );
        }
        Ok(m)
    }

    /// Drop participants whose ratings never vary across all their
    /// responses, then any gait left without responses.
    pub fn without_constant_raters(&self) -> Self {
        let mut seen: Vec<(&str, u8, bool)> = Vec::new();
        for r in self.gaits.iter().flat_map(|g| &g.responses) {
            let first = r.ratings[0];
            let varies = r.ratings.iter().any(|&x| x != first);
            match seen.iter_mut().find(|(p, _, _)| *p == r.participant) {
                Some((_, v0, var)) => *var |= varies || first != *v0,
                None => seen.push((&r.participant, first, varies)),
            }
        }
        let keep = |p: &str| seen.iter().any(|(q, _, var)| *q == p && *var);
        let gaits = self
            .gaits
            .iter()
            .map(|g| GaitResponses {
                gait_id: g.gait_id.clone(),
                responses: g.responses.iter().filter(|r| keep(&r.participant)).cloned().collect(),
            })
            .filter(|g| !g.responses.is_empty())
            .collect();
        Self { gaits }
    }
}

/// Mean rating per emotion for one gait.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionRatings {
    pub gait_id: String,
    pub means: [f64; 4],
}

pub fn mean_responses(m: &ResponseMatrix) -> Vec<EmotionRatings> {
    m.gaits
        .iter()
        .map(|g| {
            let mut sums = [0u32; 4];
            for r in &g.responses {
                for (s, &x) in sums.iter_mut().zip(&r.ratings) {
                    *s += u32::from(x);
                }
            }
            let n = g.responses.len() as f64;
            EmotionRatings {
                gait_id: g.gait_id.clone(),
                means: sums.map(|s| f64::from(s) / n),
            }
        })
        .collect()
}

/// The single emotion whose mean exceeds `theta`; `None` (unlabeled) when
/// no emotion or several do.
pub fn assign_label(means: &[f64; 4], theta: f64) -> Option<EmotionLabel> {
    let mut above = EmotionLabel::ALL.into_iter().filter(|e| means[e.index()] > theta);
    match (above.next(), above.next()) {
        (Some(e), None) => Some(e),
        _ => None,
    }
}

/// Pearson correlation between emotions over per-gait mean ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCorrelation {
    pub matrix: [[f64; 4]; 4],
    /// Emotions whose mean-rating column is constant; their off-diagonal
    /// correlations are reported as 0.
    pub constant: [bool; 4],
}

pub fn response_correlation(m: &ResponseMatrix) -> Result<ResponseCorrelation, StudyError> {
    let means = mean_responses(m);
    if means.len() < 2 {
        return Err(StudyError::TooFew {
            what: "gaits",
            needed: 2,
            found: means.len(),
        });
    }
    let columns: Vec<Vec<f64>> = (0..4).map(|e| means.iter().map(|r| r.means[e]).collect()).collect();
    let mut matrix = [[0.0; 4]; 4];
    let mut constant = [false; 4];
    for a in 0..4 {
        constant[a] = columns[a].iter().all(|&x| x == columns[a][0]);
    }
    for a in 0..4 {
        matrix[a][a] = 1.0;
        for b in a + 1..4 {
            let r = if constant[a] || constant[b] {
                0.0
            } else {
                pearson(&columns[a], &columns[b])
            };
            matrix[a][b] = r;
            matrix[b][a] = r;
        }
    }
    Ok(ResponseCorrelation { matrix, constant })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    /// Welch-Satterthwaite degrees of freedom.
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Welch's unequal-variance two-sample t-test.
pub fn gender_ttest(a: &[f64], b: &[f64]) -> Result<TTest, StudyError> {
    for xs in [a, b] {
        if xs.len() < 2 {
            return Err(StudyError::TooFew {
                what: "values per group",
                needed: 2,
                found: xs.len(),
            });
        }
    }
    let (va, vb) = (variance(a), variance(b));
    if va == 0.0 {
        return Err(StudyError::ZeroVariance { group: 'A' });
    }
    if vb == 0.0 {
        return Err(StudyError::ZeroVariance { group: 'B' });
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let t = (mean(a) - mean(b)) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest { t, df, p })
}

/// Principal axes of a data matrix (rows are observations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Unit principal directions, by descending variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

/// Eigendecomposition of the mean-centered sample covariance. Each
/// component's largest-magnitude entry is made positive.
pub fn pca(x: &[Vec<f64>]) -> Result<Pca, StudyError> {
    if x.len() < 2 {
        return Err(StudyError::TooFew {
            what: "rows",
            needed: 2,
            found: x.len(),
        });
    }
    let d = x[0].len();
    if d == 0 {
        return Err(StudyError::TooFew {
            what: "columns",
            needed: 1,
            found: 0,
        });
    }
    if x.iter().any(|r| r.len() != d) {
        return Err(StudyError::Ragged);
    }
    let n = x.len();
    let mean: Vec<f64> = (0..d).map(|k| x.iter().map(|r| r[k]).sum::<f64>() / n as f64).collect();
    let centered = DMatrix::from_fn(n, d, |i, k| x[i][k] - mean[k]);
    let cov = (centered.transpose() * &centered) / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let explained_variance: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let components = order
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0, |m: f64, c| if c.abs() > m.abs() { c } else { m });
            if lead < 0.0 {
                v.iter_mut().for_each(|c| *c = -*c);
            }
            v
        })
        .collect();
    let total: f64 = explained_variance.iter().sum();
    let explained_variance_ratio = if total > 0.0 {
        explained_variance.iter().map(|v| v / total).collect()
    } else {
        vec![1.0 / d as f64; d]
    };
    Ok(Pca {
        mean,
        components,
        explained_variance,
        explained_variance_ratio,
    })
}

impl Pca {
    /// Coordinates of `v` along the first `k` components.
    pub fn project(&self, v: &[f64], k: usize) -> Vec<f64> {
        self.components
            .iter()
            .take(k)
            .map(|c| c.iter().zip(v).zip(&self.mean).map(|((c, x), m)| c * (x - m)).sum())
            .collect()
    }
}
