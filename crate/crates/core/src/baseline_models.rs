//! Deterministic linear baselines for both tracks, their configuration and
//! on-disk format, and readers for predictions produced by outside models.
//!
//! The detector is a logistic regression over hashed unigram/bigram
//! presence features, trained by mini-batch gradient descent. The tagger is
//! a greedy left-to-right averaged perceptron over windowed token features.
//! Both are pure functions of their inputs and [`TrainingConfig`]: all
//! shuffling is drawn from ChaCha8 seeded with `config.seed`, and feature
//! hashing uses 64-bit FNV-1a.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::hash::Hasher;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use fnv::FnvHasher;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clean_augment::truncate_tokens;
use crate::corpus::{io_error, read_ner_blocks, CorpusError, Task1Record};
use crate::span_codec::{Tag, TagSequence};
use crate::tokenizer::{tokenize, Token};

pub const MODEL_FORMAT: &str = "cfspan-model";
pub const MODEL_VERSION: u32 = 1;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 42;

/// Rows emitted by model tokenizers that carry no sentence content.
pub const MARKER_TOKENS: [&str; 5] = ["[CLS]", "[SEP]", "[PAD]", "<s>", "</s>"];

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(String),
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model file: {0}")]
    Format(String),
    #[error("line {line}: {message}")]
    Prediction { line: u64, message: String },
}

/// Training hyperparameters. Dropout and epsilon only describe outside
/// transformer runs; the linear baselines record but do not use them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub dropout: f64,
    pub epsilon: f64,
    pub max_sequence_length: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
    /// Loss multiplier for positive detection examples.
    pub positive_class_weight: f64,
}

impl TrainingConfig {
    /// Sentence classification settings: 3 epochs, batch 32, lr 5e-5, 95/5 split.
    pub fn detection() -> Self {
        Self {
            batch_size: 32,
            learning_rate: 5e-5,
            epochs: 3,
            dropout: 0.1,
            epsilon: 1e-8,
            max_sequence_length: 128,
            holdout_fraction: 0.05,
            seed: DEFAULT_SEED,
            positive_class_weight: 1.0,
        }
    }

    /// Token classification settings: 4 epochs, batch 32, lr 3e-5, 90/10 split.
    pub fn span_tagging() -> Self {
        Self {
            learning_rate: 3e-5,
            epochs: 4,
            holdout_fraction: 0.10,
            ..Self::detection()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |m: &str| Err(ModelError::InvalidConfig(m.to_string()));
        if self.batch_size < 1 {
            return fail("batch_size must be at least 1");
        }
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return fail("holdout_fraction must lie strictly between 0 and 1");
        }
        if self.max_sequence_length < 1 {
            return fail("max_sequence_length must be at least 1");
        }
        if !(self.positive_class_weight > 0.0 && self.positive_class_weight.is_finite()) {
            return fail("positive_class_weight must be positive");
        }
        Ok(())
    }
}

fn fnv1a(parts: &[&str]) -> u64 {
    let mut hasher = FnvHasher::default();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            hasher.write_u8(0x1f);
        }
        hasher.write(part.as_bytes());
    }
    hasher.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub unigrams: bool,
    pub bigrams: bool,
    pub lowercased: bool,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            unigrams: true,
            bigrams: true,
            lowercased: true,
        }
    }
}

/// Default number of hash buckets for detector features.
pub const DEFAULT_HASH_DIMENSION: usize = 1 << 18;

/// Logistic-regression sentence detector over hashed n-gram features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub config: TrainingConfig,
    pub feature_spec: FeatureSpec,
    pub hash_dimension: usize,
    #[serde(with = "sparse_weights")]
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Dense weights stored as `[index, value]` pairs of the non-zero entries.
mod sparse_weights {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(weights: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(usize, f64)> = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(i, w)| (i, *w))
            .collect();
        (weights.len(), pairs).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let (len, pairs): (usize, Vec<(usize, f64)>) = Deserialize::deserialize(d)?;
        let mut weights = vec![0.0; len];
        for (i, w) in pairs {
            let slot = weights
                .get_mut(i)
                .ok_or_else(|| serde::de::Error::custom(format!("weight index {i} out of range")))?;
            *slot = w;
        }
        Ok(weights)
    }
}

/// Sparse feature vector: sorted unique bucket indexes with L2-normalized
/// presence values.
pub type FeatureVector = Vec<(usize, f64)>;

impl DetectorModel {
    pub fn featurize(&self, text: &str) -> FeatureVector {
        featurize_sentence(text, &self.feature_spec, self.hash_dimension, self.config.max_sequence_length)
    }

    pub fn score(&self, features: &FeatureVector) -> f64 {
        let z = self.bias + features.iter().map(|&(i, v)| self.weights[i] * v).sum::<f64>();
        sigmoid(z)
    }
}

pub fn featurize_sentence(text: &str, spec: &FeatureSpec, dimension: usize, max_length: usize) -> FeatureVector {
    let tokens = truncate_tokens(&tokenize(text), max_length);
    assert!(tokens.len() <= max_length, "featurized sentence exceeds max_sequence_length");
    let words: Vec<String> = tokens
        .iter()
        .map(|t| if spec.lowercased { t.text.to_lowercase() } else { t.text.clone() })
        .collect();
    let mut buckets: Vec<usize> = Vec::new();
    let bucket = |parts: &[&str]| (fnv1a(parts) % dimension as u64) as usize;
    if spec.unigrams {
        buckets.extend(words.iter().map(|w| bucket(&["u", w])));
    }
    if spec.bigrams {
        buckets.extend(words.windows(2).map(|p| bucket(&["b", &p[0], &p[1]])));
    }
    buckets.sort_unstable();
    buckets.dedup();
    let value = if buckets.is_empty() {
        0.0
    } else {
        1.0 / (buckets.len() as f64).sqrt()
    };
    buckets.into_iter().map(|i| (i, value)).collect()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Trains the detector with mini-batch gradient descent on logistic loss.
pub fn train_detector(records: &[Task1Record], config: &TrainingConfig) -> Result<DetectorModel, ModelError> {
    train_detector_with(records, config, FeatureSpec::default(), DEFAULT_HASH_DIMENSION)
}

pub fn train_detector_with(
    records: &[Task1Record],
    config: &TrainingConfig,
    feature_spec: FeatureSpec,
    hash_dimension: usize,
) -> Result<DetectorModel, ModelError> {
    config.validate()?;
    if hash_dimension == 0 {
        return Err(ModelError::InvalidConfig("hash_dimension must be positive".into()));
    }
    let positives = records.iter().filter(|r| r.label == 1).count();
    if positives == 0 || positives == records.len() {
        return Err(ModelError::DegenerateTrainingSet(format!(
            "{} records, {positives} positive; both classes are required",
            records.len()
        )));
    }

    let mut model = DetectorModel {
        config: config.clone(),
        feature_spec,
        hash_dimension,
        weights: vec![0.0; hash_dimension],
        bias: 0.0,
    };
    let examples: Vec<(FeatureVector, f64, f64)> = records
        .iter()
        .map(|r| {
            let y = f64::from(r.label);
            let weight = if r.label == 1 { config.positive_class_weight } else { 1.0 };
            (model.featurize(&r.text), y, weight)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut gradient: Vec<(usize, f64)> = Vec::new();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            gradient.clear();
            let mut bias_gradient = 0.0;
            for &i in batch {
                let (features, y, weight) = &examples[i];
                let error = (model.score(features) - y) * weight;
                bias_gradient += error;
                gradient.extend(features.iter().map(|&(j, v)| (j, error * v)));
            }
            let step = config.learning_rate / batch.len() as f64;
            for &(j, g) in &gradient {
                model.weights[j] -= step * g;
            }
            model.bias -= step * bias_gradient;
        }
    }
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorOutput {
    pub label: u8,
    /// Positive-class probability.
    pub score: f64,
}

pub fn predict_detector<S: AsRef<str>>(model: &DetectorModel, sentences: &[S]) -> Vec<DetectorOutput> {
    sentences
        .iter()
        .map(|s| {
            let score = model.score(&model.featurize(s.as_ref()));
            DetectorOutput {
                label: u8::from(score >= 0.5),
                score,
            }
        })
        .collect()
}

/// Greedy averaged-perceptron token tagger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggerModel {
    pub config: TrainingConfig,
    pub averaged: bool,
    /// Per-feature weights indexed by [`Tag::index`].
    pub weights: BTreeMap<String, [f64; 3]>,
}

/// Tie-break preference when class scores are equal.
const TIE_ORDER: [Tag; 3] = [Tag::None, Tag::Ante, Tag::Cons];

fn tag_name(tag: Option<Tag>) -> &'static str {
    tag.map_or("<s>", Tag::as_str)
}

fn position_bucket(i: usize) -> &'static str {
    match i {
        0 => "0",
        1 => "1",
        2 => "2",
        3..=5 => "3-5",
        6..=10 => "6-10",
        11..=20 => "11-20",
        _ => "21+",
    }
}

fn shape(text: &str) -> &'static str {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_uppercase() => {
            if text.chars().all(|c| !c.is_lowercase()) && text.chars().count() > 1 {
                "upper"
            } else {
                "title"
            }
        }
        Some(c) if c.is_numeric() => "digit",
        Some(c) if c.is_alphabetic() => "lower",
        _ => "other",
    }
}

/// Window features of token `i` given the previous predicted tag.
fn token_features(words: &[String], raw: &[&str], i: usize, previous: Option<Tag>) -> Vec<String> {
    let word = &words[i];
    let chars: Vec<char> = word.chars().collect();
    let prefix: String = chars.iter().take(3).collect();
    let suffix: String = chars[chars.len().saturating_sub(3)..].iter().collect();
    let at = |offset: isize| -> &str {
        let j = i as isize + offset;
        if j < 0 {
            "<s>"
        } else {
            words.get(j as usize).map_or("</s>", String::as_str)
        }
    };
    vec![
        "bias".to_string(),
        format!("w={word}"),
        format!("p3={prefix}"),
        format!("s3={suffix}"),
        format!("cap={}", shape(raw[i])),
        format!("w-1={}", at(-1)),
        format!("w-2={}", at(-2)),
        format!("w+1={}", at(1)),
        format!("w+2={}", at(2)),
        format!("pos={}", position_bucket(i)),
        format!("t-1={}", tag_name(previous)),
    ]
}

fn best_tag(scores: &[f64; 3]) -> Tag {
    let mut best = TIE_ORDER[0];
    for tag in TIE_ORDER {
        if scores[tag.index()] > scores[best.index()] {
            best = tag;
        }
    }
    best
}

impl TaggerModel {
    fn scores(&self, features: &[String]) -> [f64; 3] {
        let mut scores = [0.0; 3];
        for f in features {
            if let Some(w) = self.weights.get(f) {
                for c in 0..3 {
                    scores[c] += w[c];
                }
            }
        }
        scores
    }
}

/// Lowercased surface forms plus the original text, truncated to `max_len`.
fn prepare(tokens: &[Token], max_len: usize) -> (Vec<String>, Vec<&str>) {
    let kept = &tokens[..tokens.len().min(max_len)];
    (
        kept.iter().map(|t| t.text.to_lowercase()).collect(),
        kept.iter().map(|t| t.text.as_str()).collect(),
    )
}

/// Tags tokens greedily left to right. Tokens past `max_sequence_length`
/// are tagged [`Tag::None`].
pub fn predict_tagger(model: &TaggerModel, tokens: &[Token]) -> Vec<Tag> {
    let (words, raw) = prepare(tokens, model.config.max_sequence_length);
    assert!(words.len() <= model.config.max_sequence_length);
    let mut tags = Vec::with_capacity(tokens.len());
    let mut previous = None;
    for i in 0..words.len() {
        let tag = best_tag(&model.scores(&token_features(&words, &raw, i, previous)));
        tags.push(tag);
        previous = Some(tag);
    }
    tags.resize(tokens.len(), Tag::None);
    tags
}

#[derive(Default)]
struct PerceptronWeight {
    current: [i64; 3],
    total: [i64; 3],
    stamp: [u64; 3],
}

/// Trains the averaged perceptron tagger.
pub fn train_tagger(sentences: &[TagSequence], config: &TrainingConfig) -> Result<TaggerModel, ModelError> {
    train_tagger_with_averaging(sentences, config, true)
}

pub fn train_tagger_with_averaging(
    sentences: &[TagSequence],
    config: &TrainingConfig,
    averaged: bool,
) -> Result<TaggerModel, ModelError> {
    config.validate()?;
    if sentences.iter().all(TagSequence::is_empty) {
        return Err(ModelError::EmptyCorpus);
    }

    let mut table: HashMap<String, PerceptronWeight> = HashMap::new();
    let mut instances: u64 = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..sentences.len()).collect();

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &s in &order {
            let sentence = &sentences[s];
            let (words, raw) = prepare(&sentence.tokens, config.max_sequence_length);
            assert!(words.len() <= config.max_sequence_length);
            let mut previous = None;
            for (i, &truth) in sentence.tags.iter().enumerate().take(words.len()) {
                let features = token_features(&words, &raw, i, previous);
                let mut scores = [0.0; 3];
                for f in &features {
                    if let Some(w) = table.get(f) {
                        for c in 0..3 {
                            scores[c] += w.current[c] as f64;
                        }
                    }
                }
                let guess = best_tag(&scores);
                instances += 1;
                if guess != truth {
                    for f in features {
                        let w = table.entry(f).or_default();
                        for (class, delta) in [(truth.index(), 1), (guess.index(), -1)] {
                            w.total[class] += (instances - w.stamp[class]) as i64 * w.current[class];
                            w.stamp[class] = instances;
                            w.current[class] += delta;
                        }
                    }
                }
                previous = Some(guess);
            }
        }
    }

    let weights = table
        .into_iter()
        .filter_map(|(feature, w)| {
            let mut out = [0.0; 3];
            for c in 0..3 {
                out[c] = if averaged {
                    let total = w.total[c] + (instances - w.stamp[c]) as i64 * w.current[c];
                    total as f64 / instances as f64
                } else {
                    w.current[c] as f64
                };
            }
            out.iter().any(|&v| v != 0.0).then_some((feature, out))
        })
        .collect();
    Ok(TaggerModel {
        config: config.clone(),
        averaged,
        weights,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Detector(DetectorModel),
    Tagger(TaggerModel),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: Model,
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Detector(_) => "detector",
            Model::Tagger(_) => "tagger",
        }
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        let mut json = serde_json::to_string_pretty(&file)?;
        json.push('\n');
        Ok(json)
    }

    pub fn from_json(json: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(json)?;
        if file.format != MODEL_FORMAT {
            return Err(ModelError::Format(format!("unexpected format {:?}", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(ModelError::Format(format!("unsupported version {}", file.version)));
        }
        Ok(file.model)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json()?).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let json = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&json)
    }
}

/// One row of a detection prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task1Prediction {
    pub sentence_id: String,
    pub label: u8,
    pub score: Option<f64>,
}

/// Reads `sentenceID,pred_label[,score]` rows (with a header line).
pub fn read_task1_predictions(path: &Path) -> Result<Vec<Task1Prediction>, ModelError> {
    let file = File::open(path).map_err(io_error(path)).map_err(ModelError::Corpus)?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(CorpusError::from)?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |message: String| ModelError::Prediction { line, message };
        if !(2..=3).contains(&row.len()) {
            return Err(bad(format!("expected 2 or 3 columns, found {}", row.len())));
        }
        let label = match row[1].trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(format!("label {other:?} is not 0 or 1"))),
        };
        let score = match row.get(2).map(str::trim) {
            None | Some("") => None,
            Some(s) => {
                let v: f64 = s.parse().map_err(|_| bad(format!("score {s:?} is not a number")))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(bad(format!("score {v} outside [0, 1]")));
                }
                Some(v)
            }
        };
        out.push(Task1Prediction {
            sentence_id: row[0].to_string(),
            label,
            score,
        });
    }
    Ok(out)
}

/// Writes a detection prediction file; the score column is present when
/// every row has a score.
pub fn write_task1_predictions(path: &Path, predictions: &[Task1Prediction]) -> Result<(), ModelError> {
    let file = File::create(path).map_err(io_error(path)).map_err(ModelError::Corpus)?;
    let with_scores = !predictions.is_empty() && predictions.iter().all(|p| p.score.is_some());
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    let header: &[&str] = if with_scores {
        &["sentenceID", "pred_label", "score"]
    } else {
        &["sentenceID", "pred_label"]
    };
    writer.write_record(header).map_err(CorpusError::from)?;
    for p in predictions {
        let label = p.label.to_string();
        let result = match (with_scores, p.score) {
            (true, Some(score)) => writer.write_record([p.sentence_id.as_str(), &label, &score.to_string()]),
            _ => writer.write_record([p.sentence_id.as_str(), &label]),
        };
        result.map_err(CorpusError::from)?;
    }
    writer.flush().map_err(io_error(path)).map_err(ModelError::Corpus)?;
    Ok(())
}

/// A tag-file block from an outside model, marker rows removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalTagBlock {
    /// Line of the first row of the block.
    pub line: u64,
    pub pieces: Vec<String>,
    pub tags: Vec<Tag>,
}

/// Reads a tag file produced by an outside model, dropping `[CLS]`/`[SEP]`
/// style marker rows before interpreting tags.
pub fn read_external_tags(path: &Path) -> Result<Vec<ExternalTagBlock>, ModelError> {
    let file = File::open(path).map_err(io_error(path)).map_err(ModelError::Corpus)?;
    let blocks = read_ner_blocks(BufReader::new(file))?;
    let mut out = Vec::with_capacity(blocks.len());
    for block in blocks {
        let mut pieces = Vec::new();
        let mut tags = Vec::new();
        for row in block.rows {
            if MARKER_TOKENS.contains(&row.word.as_str()) {
                continue;
            }
            let tag = row.tag.parse::<Tag>().map_err(|e| ModelError::Prediction {
                line: row.line,
                message: e.to_string(),
            })?;
            pieces.push(row.word);
            tags.push(tag);
        }
        if !pieces.is_empty() {
            out.push(ExternalTagBlock {
                line: block.line,
                pieces,
                tags,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionKind {
    Task1,
    Task2Tags,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExternalPredictions {
    Task1(Vec<Task1Prediction>),
    Task2Tags(Vec<ExternalTagBlock>),
}

pub fn import_external_predictions(path: &Path, kind: PredictionKind) -> Result<ExternalPredictions, ModelError> {
    Ok(match kind {
        PredictionKind::Task1 => ExternalPredictions::Task1(read_task1_predictions(path)?),
        PredictionKind::Task2Tags => ExternalPredictions::Task2Tags(read_external_tags(path)?),
    })
}

/// Predictions reordered to follow `gold_ids`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPredictions {
    /// One entry per gold id; `None` where no prediction was found.
    pub aligned: Vec<Option<Task1Prediction>>,
    /// Gold ids without a prediction.
    pub missing: Vec<String>,
    /// Prediction ids not present in the gold list.
    pub unmatched: Vec<String>,
}

pub fn match_task1_predictions(gold_ids: &[String], predictions: &[Task1Prediction]) -> MatchedPredictions {
    let by_id: HashMap<&str, &Task1Prediction> = predictions.iter().map(|p| (p.sentence_id.as_str(), p)).collect();
    let gold: HashSet<&str> = gold_ids.iter().map(String::as_str).collect();
    let aligned: Vec<Option<Task1Prediction>> = gold_ids.iter().map(|id| by_id.get(id.as_str()).map(|p| (*p).clone())).collect();
    let missing = gold_ids
        .iter()
        .zip(&aligned)
        .filter(|(_, p)| p.is_none())
        .map(|(id, _)| id.clone())
        .collect();
    let unmatched = predictions
        .iter()
        .filter(|p| !gold.contains(p.sentence_id.as_str()))
        .map(|p| p.sentence_id.clone())
        .collect();
    MatchedPredictions {
        aligned,
        missing,
        unmatched,
    }
}

/// Writes a model's tag predictions in tag-file layout.
pub fn write_predicted_tags<W: Write>(out: W, sequences: &[TagSequence]) -> Result<(), ModelError> {
    crate::corpus::write_ner_to(out, sequences, false)?;
    Ok(())
}
