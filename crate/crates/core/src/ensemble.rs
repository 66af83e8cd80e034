//! Majority voting over detection prediction sets.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline_models::Task1Prediction;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Label of the first model in `model_order`.
    #[default]
    FirstModel,
    /// 1 iff the mean of the available scores is at least 0.5.
    MeanScore,
    /// Always 1.
    Positive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub tie_policy: TiePolicy,
    /// Prediction-set names, strongest model first.
    pub model_order: Vec<String>,
}

/// Predictions of one model, identified by name.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub name: String,
    pub predictions: Vec<Task1Prediction>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EnsembleError {
    #[error("model order is empty")]
    EmptyOrder,
    #[error("model {0:?} appears more than once in the model order")]
    DuplicateModel(String),
    #[error("model {0:?} in the model order has no prediction set")]
    UnknownModel(String),
    #[error("{sets} prediction sets given for {order} models in the model order")]
    SetCount { sets: usize, order: usize },
    #[error("model {model:?} has {found} predictions, expected {expected}")]
    LengthMismatch {
        model: String,
        expected: usize,
        found: usize,
    },
    #[error("model {model:?} row {row}: sentence {found:?} where {expected:?} was expected")]
    IdMismatch {
        model: String,
        row: usize,
        expected: String,
        found: String,
    },
    #[error("tie at sentence {0:?} needs scores, but none are available")]
    MissingScores(String),
}

fn ordered_sets<'a>(sets: &'a [PredictionSet], config: &EnsembleConfig) -> Result<Vec<&'a PredictionSet>, EnsembleError> {
    if config.model_order.is_empty() {
        return Err(EnsembleError::EmptyOrder);
    }
    let mut seen = HashSet::new();
    for name in &config.model_order {
        if !seen.insert(name) {
            return Err(EnsembleError::DuplicateModel(name.clone()));
        }
    }
    if sets.len() != config.model_order.len() {
        return Err(EnsembleError::SetCount {
            sets: sets.len(),
            order: config.model_order.len(),
        });
    }
    config
        .model_order
        .iter()
        .map(|name| {
            sets.iter()
                .find(|s| &s.name == name)
                .ok_or_else(|| EnsembleError::UnknownModel(name.clone()))
        })
        .collect()
}

/// Combines aligned prediction sets by strict majority, settling ties with
/// the configured policy. The output score is the mean of the available
/// scores for each sentence.
pub fn majority_vote(sets: &[PredictionSet], config: &EnsembleConfig) -> Result<Vec<Task1Prediction>, EnsembleError> {
    let ordered = ordered_sets(sets, config)?;
    let reference = ordered[0];
    let n = reference.predictions.len();
    for set in &ordered {
        if set.predictions.len() != n {
            return Err(EnsembleError::LengthMismatch {
                model: set.name.clone(),
                expected: n,
                found: set.predictions.len(),
            });
        }
        for (row, (a, b)) in reference.predictions.iter().zip(&set.predictions).enumerate() {
            if a.sentence_id != b.sentence_id {
                return Err(EnsembleError::IdMismatch {
                    model: set.name.clone(),
                    row,
                    expected: a.sentence_id.clone(),
                    found: b.sentence_id.clone(),
                });
            }
        }
    }
    if config.tie_policy == TiePolicy::MeanScore
        && ordered.iter().all(|s| s.predictions.iter().all(|p| p.score.is_none()))
    {
        return Err(EnsembleError::MissingScores(String::from("<all>")));
    }

    (0..n)
        .map(|row| {
            let votes: Vec<&Task1Prediction> = ordered.iter().map(|s| &s.predictions[row]).collect();
            let positives = votes.iter().filter(|p| p.label == 1).count();
            let negatives = votes.len() - positives;
            let scores: Vec<f64> = votes.iter().filter_map(|p| p.score).collect();
            let mean_score = (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64);
            let label = if positives > negatives {
                1
            } else if negatives > positives {
                0
            } else {
                match config.tie_policy {
                    TiePolicy::FirstModel => votes[0].label,
                    TiePolicy::Positive => 1,
                    TiePolicy::MeanScore => {
                        let mean = mean_score.ok_or_else(|| EnsembleError::MissingScores(votes[0].sentence_id.clone()))?;
                        u8::from(mean >= 0.5)
                    }
                }
            };
            Ok(Task1Prediction {
                sentence_id: votes[0].sentence_id.clone(),
                label,
                score: mean_score,
            })
        })
        .collect()
}
