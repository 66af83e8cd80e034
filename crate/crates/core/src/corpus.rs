//! Dataset ingestion, validation, statistics, splitting and the stacked
//! word-per-line tag file format.
//!
//! Detection rows are `sentenceID,sentence,gold_label`. Span rows are
//! `sentenceID,sentence,antecedent_startid,antecedent_endid,consequent_startid,consequent_endid`
//! with inclusive code-point indexes and `-1,-1` for an absent span.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::span_codec::{SpanIndexError, SpanPrediction, Tag, TagSequence};
use crate::tokenizer::Token;

pub const TASK1_HEADER: [&str; 3] = ["sentenceID", "sentence", "gold_label"];
pub const SPAN_PREDICTION_HEADER: [&str; 5] = [
    "sentenceID",
    "antecedent_startid",
    "antecedent_endid",
    "consequent_startid",
    "consequent_endid",
];
pub const TASK2_HEADER: [&str; 6] = [
    "sentenceID",
    "sentence",
    "antecedent_startid",
    "antecedent_endid",
    "consequent_startid",
    "consequent_endid",
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount { line: u64, expected: usize, found: usize },
    #[error("line {line}: label {value:?} is not 0 or 1")]
    InvalidLabel { line: u64, value: String },
    #[error("line {line}: {field} {value:?} is not an integer")]
    InvalidIndex { line: u64, field: &'static str, value: String },
    #[error("line {line}: sentence text is empty")]
    EmptyText { line: u64 },
    #[error("sentence {sentence}: {message}")]
    InvalidSentence { sentence: usize, message: String },
    #[error("line {line}: unknown tag '{tag}'")]
    UnknownTag { line: u64, tag: String },
    #[error("line {line}: expected `word<TAB>tag[<TAB>pos]`, found {found} columns")]
    NerColumns { line: u64, found: usize },
    #[error("line {line}: POS column present on some lines of a sentence but not others")]
    MixedPos { line: u64 },
    #[error("line {line}: {source}")]
    InvalidSpan {
        line: u64,
        #[source]
        source: SpanIndexError,
    },
    #[error("holdout fraction {0} must lie strictly between 0 and 1")]
    HoldoutFraction(f64),
}

pub(crate) fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// One sentence of the detection track.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task1Record {
    pub sentence_id: String,
    pub text: String,
    /// 1 = counterfactual, 0 = not.
    pub label: u8,
}

/// One sentence of the span extraction track, with indexes as read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task2Record {
    pub sentence_id: String,
    pub text: String,
    pub antecedent_start: i64,
    pub antecedent_end: i64,
    pub consequent_start: i64,
    pub consequent_end: i64,
}

impl Task2Record {
    pub fn indexes(&self) -> [i64; 4] {
        [
            self.antecedent_start,
            self.antecedent_end,
            self.consequent_start,
            self.consequent_end,
        ]
    }

    /// Gold spans of the record; errors when the indexes are malformed.
    pub fn spans(&self) -> Result<SpanPrediction, SpanIndexError> {
        let spans = SpanPrediction::from_indexes(self.indexes())?;
        spans.check_bounds(self.text.chars().count())?;
        Ok(spans)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IssueCode {
    EmptyText,
    HalfAbsentSpan,
    NegativeIndex,
    StartExceedsEnd,
    EndOutOfRange,
    MissingAntecedent,
    OverlappingSpans,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::EmptyText => "empty text",
            IssueCode::HalfAbsentSpan => "half-absent span",
            IssueCode::NegativeIndex => "negative index",
            IssueCode::StartExceedsEnd => "start exceeds end",
            IssueCode::EndOutOfRange => "end out of range",
            IssueCode::MissingAntecedent => "missing antecedent",
            IssueCode::OverlappingSpans => "overlapping spans",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            IssueCode::MissingAntecedent => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub record_id: String,
    /// Source line of the record, when it came from a file.
    pub line: Option<u64>,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    /// Highest severity among the issues, `None` for a clean record.
    pub fn severity(&self) -> Option<Severity> {
        self.issues.iter().map(|i| i.code.severity()).max()
    }

    pub fn push(&mut self, code: IssueCode, message: impl Into<String>) {
        self.issues.push(Issue {
            code,
            message: message.into(),
        });
    }
}

fn check_span(report: &mut ValidationReport, which: &str, start: i64, end: i64, len: usize) {
    if start == -1 && end == -1 {
        return;
    }
    if start == -1 || end == -1 {
        report.push(
            IssueCode::HalfAbsentSpan,
            format!("{which} ({start}, {end}): -1 must appear in both positions"),
        );
    }
    for (name, value) in [("start", start), ("end", end)] {
        if value < -1 {
            report.push(
                IssueCode::NegativeIndex,
                format!("{which} {name} {value} is negative but not -1"),
            );
        }
    }
    if start < 0 || end < 0 {
        return;
    }
    if start > end {
        report.push(
            IssueCode::StartExceedsEnd,
            format!("{which} start {start} exceeds end {end}"),
        );
    }
    if end as u64 >= len as u64 {
        report.push(
            IssueCode::EndOutOfRange,
            format!("{which} end {end} is out of range (text has {len} code points, max index {})", len as i64 - 1),
        );
    }
}

/// Lists every violated span invariant of a record.
pub fn validate_record(record: &Task2Record) -> ValidationReport {
    let mut report = ValidationReport {
        record_id: record.sentence_id.clone(),
        line: None,
        issues: Vec::new(),
    };
    let len = record.text.chars().count();
    if record.text.is_empty() {
        report.push(IssueCode::EmptyText, "sentence text is empty");
    }
    check_span(&mut report, "antecedent", record.antecedent_start, record.antecedent_end, len);
    check_span(&mut report, "consequent", record.consequent_start, record.consequent_end, len);
    if record.antecedent_start == -1 && record.antecedent_end == -1 {
        report.push(IssueCode::MissingAntecedent, "antecedent is absent (-1, -1)");
    }
    report
}

fn open(path: &Path) -> Result<File, CorpusError> {
    File::open(path).map_err(io_error(path))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>, CorpusError> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(open(path)?))
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn expect_columns(record: &csv::StringRecord, expected: usize) -> Result<u64, CorpusError> {
    let line = record_line(record);
    if record.len() != expected {
        return Err(CorpusError::ColumnCount {
            line,
            expected,
            found: record.len(),
        });
    }
    Ok(line)
}

fn ensure_header(reader: &mut csv::Reader<File>, expected: usize) -> Result<(), CorpusError> {
    let headers = reader.headers()?;
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(());
    }
    if headers.len() != expected {
        return Err(CorpusError::ColumnCount {
            line: 1,
            expected,
            found: headers.len(),
        });
    }
    Ok(())
}

/// Reads a detection CSV. Rows keep their order and text is preserved as read.
pub fn load_task1(path: &Path) -> Result<Vec<Task1Record>, CorpusError> {
    let mut reader = csv_reader(path)?;
    ensure_header(&mut reader, 3)?;
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = expect_columns(&row, 3)?;
        let label = match &row[2] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(CorpusError::InvalidLabel {
                    line,
                    value: other.to_string(),
                })
            }
        };
        if row[1].is_empty() {
            return Err(CorpusError::EmptyText { line });
        }
        records.push(Task1Record {
            sentence_id: row[0].to_string(),
            text: row[1].to_string(),
            label,
        });
    }
    Ok(records)
}

/// Outcome of reading a span CSV: usable records plus quarantined rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Task2Load {
    pub records: Vec<Task2Record>,
    /// Rows rejected for error-severity issues.
    pub rejects: Vec<ValidationReport>,
    /// Accepted rows that carry warnings.
    pub warnings: Vec<ValidationReport>,
}

fn parse_index(row: &csv::StringRecord, col: usize, line: u64) -> Result<i64, CorpusError> {
    row[col].trim().parse().map_err(|_| CorpusError::InvalidIndex {
        line,
        field: TASK2_HEADER[col],
        value: row[col].to_string(),
    })
}

/// Reads a span CSV. Rows violating span invariants are collected in
/// `rejects` instead of aborting the load.
pub fn load_task2(path: &Path) -> Result<Task2Load, CorpusError> {
    let mut reader = csv_reader(path)?;
    ensure_header(&mut reader, 6)?;
    let mut load = Task2Load::default();
    for row in reader.records() {
        let row = row?;
        let line = expect_columns(&row, 6)?;
        let record = Task2Record {
            sentence_id: row[0].to_string(),
            text: row[1].to_string(),
            antecedent_start: parse_index(&row, 2, line)?,
            antecedent_end: parse_index(&row, 3, line)?,
            consequent_start: parse_index(&row, 4, line)?,
            consequent_end: parse_index(&row, 5, line)?,
        };
        let mut report = validate_record(&record);
        report.line = Some(line);
        match report.severity() {
            Some(Severity::Error) => load.rejects.push(report),
            Some(Severity::Warning) => {
                load.warnings.push(report);
                load.records.push(record);
            }
            None => load.records.push(record),
        }
    }
    Ok(load)
}

/// Reads `(sentenceID, sentence)` pairs from the first two columns of any
/// headed CSV (detection, span or bare sentence files).
pub fn load_sentences(path: &Path) -> Result<Vec<(String, String)>, CorpusError> {
    let mut reader = csv_reader(path)?;
    reader.headers()?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = record_line(&row);
        if row.len() < 2 {
            return Err(CorpusError::ColumnCount {
                line,
                expected: 2,
                found: row.len(),
            });
        }
        out.push((row[0].to_string(), row[1].to_string()));
    }
    Ok(out)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CorpusError> {
    let file = File::create(path).map_err(io_error(path))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

pub fn write_task1(path: &Path, records: &[Task1Record]) -> Result<(), CorpusError> {
    let mut writer = csv_writer(path)?;
    writer.write_record(TASK1_HEADER)?;
    for r in records {
        writer.write_record([r.sentence_id.as_str(), r.text.as_str(), if r.label == 1 { "1" } else { "0" }])?;
    }
    writer.flush().map_err(io_error(path))?;
    Ok(())
}

pub fn write_task2(path: &Path, records: &[Task2Record]) -> Result<(), CorpusError> {
    let mut writer = csv_writer(path)?;
    writer.write_record(TASK2_HEADER)?;
    for r in records {
        let [a, b, c, d] = r.indexes().map(|i| i.to_string());
        writer.write_record([r.sentence_id.as_str(), r.text.as_str(), &a, &b, &c, &d])?;
    }
    writer.flush().map_err(io_error(path))?;
    Ok(())
}

/// Predicted spans of one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanPredictionRow {
    pub sentence_id: String,
    pub spans: SpanPrediction,
}

pub fn write_span_predictions(path: &Path, rows: &[SpanPredictionRow]) -> Result<(), CorpusError> {
    let mut writer = csv_writer(path)?;
    writer.write_record(SPAN_PREDICTION_HEADER)?;
    for r in rows {
        let [a, b, c, d] = r.spans.indexes().map(|i| i.to_string());
        writer.write_record([r.sentence_id.as_str(), &a, &b, &c, &d])?;
    }
    writer.flush().map_err(io_error(path))?;
    Ok(())
}

pub fn read_span_predictions(path: &Path) -> Result<Vec<SpanPredictionRow>, CorpusError> {
    let mut reader = csv_reader(path)?;
    ensure_header(&mut reader, 5)?;
    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = expect_columns(&row, 5)?;
        let mut indexes = [0i64; 4];
        for (k, slot) in indexes.iter_mut().enumerate() {
            let value = &row[k + 1];
            *slot = value.trim().parse().map_err(|_| CorpusError::InvalidIndex {
                line,
                field: SPAN_PREDICTION_HEADER[k + 1],
                value: value.to_string(),
            })?;
        }
        let spans = SpanPrediction::from_indexes(indexes).map_err(|source| CorpusError::InvalidSpan { line, source })?;
        rows.push(SpanPredictionRow {
            sentence_id: row[0].to_string(),
            spans,
        });
    }
    Ok(rows)
}

/// Class balance and length summary of a detection corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub positives: usize,
    pub negatives: usize,
    /// positives / total; absent for an empty corpus.
    pub positive_fraction: Option<f64>,
    /// positives / negatives; absent when there are no negatives.
    pub positive_to_negative_ratio: Option<f64>,
    pub max_code_point_length: usize,
    pub length_threshold: usize,
    /// Records longer than `length_threshold` code points.
    pub over_length_count: usize,
}

pub fn corpus_stats(records: &[Task1Record], length_threshold: usize) -> CorpusStats {
    let mut stats = CorpusStats {
        total: 0,
        positives: 0,
        negatives: 0,
        positive_fraction: None,
        positive_to_negative_ratio: None,
        max_code_point_length: 0,
        length_threshold,
        over_length_count: 0,
    };
    for record in records {
        let len = record.text.chars().count();
        stats.total += 1;
        if record.label == 1 {
            stats.positives += 1;
        } else {
            stats.negatives += 1;
        }
        stats.max_code_point_length = stats.max_code_point_length.max(len);
        if len > length_threshold {
            stats.over_length_count += 1;
        }
    }
    if stats.total > 0 {
        stats.positive_fraction = Some(stats.positives as f64 / stats.total as f64);
    }
    if stats.negatives > 0 {
        stats.positive_to_negative_ratio = Some(stats.positives as f64 / stats.negatives as f64);
    }
    stats
}

/// Grouping key used by [`stratified_split`].
pub trait Stratified {
    fn stratum(&self) -> u32;
}

impl Stratified for Task1Record {
    fn stratum(&self) -> u32 {
        self.label as u32
    }
}

impl Stratified for Task2Record {
    fn stratum(&self) -> u32 {
        0
    }
}

impl Stratified for TagSequence {
    fn stratum(&self) -> u32 {
        0
    }
}

/// Largest-remainder apportionment of `round(total * fraction)` held-out
/// records over strata. Each quota is the floor of its exact share plus at
/// most one; leftover units go to the largest fractional parts, earlier
/// strata first on ties.
fn holdout_quotas(sizes: impl Iterator<Item = usize>, fraction: f64) -> Vec<usize> {
    let sizes: Vec<usize> = sizes.collect();
    let total: usize = sizes.iter().sum();
    let target = (total as f64 * fraction).round() as usize;
    let mut quotas: Vec<usize> = sizes.iter().map(|&n| (n as f64 * fraction).floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    let remainder = |i: usize| sizes[i] as f64 * fraction - quotas[i] as f64;
    order.sort_by(|&a, &b| remainder(b).total_cmp(&remainder(a)).then(a.cmp(&b)));
    let assigned: usize = quotas.iter().sum();
    for &i in order.iter().take(target.saturating_sub(assigned)) {
        quotas[i] = (quotas[i] + 1).min(sizes[i]);
    }
    quotas
}

/// Partitions records into (train, validation), holding out about
/// `round(class_count * holdout_fraction)` records of each stratum (see
/// [`holdout_quotas`] for how exact halves are settled).
///
/// Membership is drawn by shuffling each stratum with ChaCha8 seeded from
/// `seed`; both outputs keep the input order.
pub fn stratified_split<T: Stratified + Clone>(
    records: &[T],
    holdout_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>), CorpusError> {
    if !(holdout_fraction > 0.0 && holdout_fraction < 1.0) {
        return Err(CorpusError::HoldoutFraction(holdout_fraction));
    }
    let mut strata: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        strata.entry(r.stratum()).or_default().push(i);
    }
    let quotas = holdout_quotas(strata.values().map(Vec::len), holdout_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut held_out = vec![false; records.len()];
    for (members, take) in strata.values_mut().zip(quotas) {
        members.shuffle(&mut rng);
        for &i in &members[..take] {
            held_out[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for (record, held) in records.iter().zip(held_out) {
        if held {
            validation.push(record.clone());
        } else {
            train.push(record.clone());
        }
    }
    Ok((train, validation))
}

fn check_ner_sentence(index: usize, sentence: &TagSequence, include_pos: bool) -> Result<(), CorpusError> {
    let invalid = |message: String| CorpusError::InvalidSentence { sentence: index, message };
    if sentence.tokens.len() != sentence.tags.len() {
        return Err(invalid(format!(
            "{} tokens but {} tags",
            sentence.tokens.len(),
            sentence.tags.len()
        )));
    }
    if sentence.tokens.is_empty() {
        return Err(invalid("sentence has no tokens".into()));
    }
    if include_pos {
        match &sentence.pos {
            Some(pos) if pos.len() == sentence.tokens.len() => {
                if let Some(p) = pos.iter().find(|p| p.chars().any(char::is_whitespace)) {
                    return Err(invalid(format!("POS tag {p:?} contains whitespace")));
                }
            }
            Some(pos) => {
                return Err(invalid(format!(
                    "{} tokens but {} POS tags",
                    sentence.tokens.len(),
                    pos.len()
                )))
            }
            None => return Err(invalid("POS column requested but sentence has none".into())),
        }
    }
    if let Some(t) = sentence
        .tokens
        .iter()
        .find(|t| t.text.is_empty() || t.text.chars().any(char::is_whitespace))
    {
        return Err(invalid(format!("token {:?} is empty or contains whitespace", t.text)));
    }
    Ok(())
}

/// Serializes sentences one token per line (`word<TAB>tag[<TAB>pos]`),
/// separating sentences by a blank line.
pub fn write_ner_to<W: Write>(mut out: W, sentences: &[TagSequence], include_pos: bool) -> Result<(), CorpusError> {
    let io = |source| CorpusError::Io {
        path: "<tag file>".into(),
        source,
    };
    for (index, sentence) in sentences.iter().enumerate() {
        check_ner_sentence(index, sentence, include_pos)?;
        for (i, (token, tag)) in sentence.tokens.iter().zip(&sentence.tags).enumerate() {
            match (&sentence.pos, include_pos) {
                (Some(pos), true) => writeln!(out, "{}\t{}\t{}", token.text, tag, pos[i]),
                _ => writeln!(out, "{}\t{}", token.text, tag),
            }
            .map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_ner(path: &Path, sentences: &[TagSequence], include_pos: bool) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(io_error(path))?;
    write_ner_to(BufWriter::new(file), sentences, include_pos).map_err(|e| match e {
        CorpusError::Io { source, .. } => io_error(path)(source),
        other => other,
    })
}

/// One block of a tag file as raw rows, before tags are interpreted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NerBlock {
    /// Line number of the first row.
    pub line: u64,
    pub rows: Vec<NerRow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NerRow {
    pub line: u64,
    pub word: String,
    pub tag: String,
    pub pos: Option<String>,
}

/// Splits a tag file into blocks of rows. A missing separator at end of
/// file is tolerated and runs of blank lines count as one separator.
pub fn read_ner_blocks<R: BufRead>(input: R) -> Result<Vec<NerBlock>, CorpusError> {
    let mut blocks = Vec::new();
    let mut current: Option<NerBlock> = None;
    for (i, line) in input.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: "<tag file>".into(),
            source,
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            blocks.extend(current.take());
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&cols.len()) || cols[0].is_empty() {
            return Err(CorpusError::NerColumns {
                line: line_no,
                found: cols.len(),
            });
        }
        let block = current.get_or_insert_with(|| NerBlock {
            line: line_no,
            rows: Vec::new(),
        });
        block.rows.push(NerRow {
            line: line_no,
            word: cols[0].to_string(),
            tag: cols[1].to_string(),
            pos: cols.get(2).map(|p| p.to_string()),
        });
    }
    blocks.extend(current);
    Ok(blocks)
}

/// Interprets a block as a tag sequence. Token offsets are laid out as if
/// the words were joined by single spaces, since the file does not store them.
pub fn block_to_sequence(block: &NerBlock) -> Result<TagSequence, CorpusError> {
    let has_pos = block.rows[0].pos.is_some();
    let mut tokens = Vec::with_capacity(block.rows.len());
    let mut tags = Vec::with_capacity(block.rows.len());
    let mut pos = Vec::new();
    let mut offset = 0;
    for row in &block.rows {
        let tag: Tag = row.tag.parse().map_err(|_| CorpusError::UnknownTag {
            line: row.line,
            tag: row.tag.clone(),
        })?;
        if row.pos.is_some() != has_pos {
            return Err(CorpusError::MixedPos { line: row.line });
        }
        let len = row.word.chars().count();
        tokens.push(Token::new(row.word.clone(), offset, offset + len - 1));
        offset += len + 1;
        tags.push(tag);
        pos.extend(row.pos.clone());
    }
    Ok(TagSequence {
        tokens,
        tags,
        pos: has_pos.then_some(pos),
    })
}

pub fn load_ner_from<R: BufRead>(input: R) -> Result<Vec<TagSequence>, CorpusError> {
    read_ner_blocks(input)?.iter().map(block_to_sequence).collect()
}

pub fn load_ner(path: &Path) -> Result<Vec<TagSequence>, CorpusError> {
    load_ner_from(BufReader::new(open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::tokenize;
    use std::io::Cursor;

    const WISH: &str = "I just wish it had been my hand holding my daughter, not his.";

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn task2(text: &str, idx: [i64; 4]) -> Task2Record {
        Task2Record {
            sentence_id: "s".into(),
            text: text.into(),
            antecedent_start: idx[0],
            antecedent_end: idx[1],
            consequent_start: idx[2],
            consequent_end: idx[3],
        }
    }

    fn codes(report: &ValidationReport) -> Vec<IssueCode> {
        report.issues.iter().map(|i| i.code).collect()
    }

    #[test]
    fn load_task1_rows() {
        let f = write_tmp(
            "sentenceID,sentence,gold_label\n\
             100,\"If only they had adhered to conservative principles...things would have been DIFFERENT.\",1\n\
             101,\"If needed, I would like to have the right to try.\",0\n",
        );
        let records = load_task1(f.path()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].label, 1);
        assert_eq!(records[1].label, 0);
        assert_eq!(records[1].text, "If needed, I would like to have the right to try.");
    }

    #[test]
    fn load_task1_header_only() {
        let f = write_tmp("sentenceID,sentence,gold_label\n");
        assert!(load_task1(f.path()).unwrap().is_empty());
    }

    #[test]
    fn load_task1_errors_name_line() {
        let f = write_tmp("sentenceID,sentence,gold_label\n1,a,0\n2,b\n");
        assert!(matches!(
            load_task1(f.path()),
            Err(CorpusError::ColumnCount { line: 3, found: 2, .. })
        ));
        let f = write_tmp("sentenceID,sentence,gold_label\n1,a,2\n");
        assert!(matches!(load_task1(f.path()), Err(CorpusError::InvalidLabel { line: 2, .. })));
    }

    #[test]
    fn load_task2_table_row() {
        let f = write_tmp(&format!(
            "{}\n1,\"{WISH}\",0,50,-1,-1\n2,\"{WISH}\",5,3,-1,-1\n3,\"{WISH}\",0,61,-1,-1\n",
            TASK2_HEADER.join(",")
        ));
        let load = load_task2(f.path()).unwrap();
        assert_eq!(load.records.len(), 1);
        assert_eq!(load.records[0].indexes(), [0, 50, -1, -1]);
        let gold = load.records[0].spans().unwrap();
        assert!(gold.consequent.is_none());
        assert_eq!(load.rejects.len(), 2);
        assert_eq!(codes(&load.rejects[0]), vec![IssueCode::StartExceedsEnd]);
        assert_eq!(load.rejects[0].line, Some(3));
        assert_eq!(codes(&load.rejects[1]), vec![IssueCode::EndOutOfRange]);
    }

    #[test]
    fn validate_table_record_clean() {
        assert!(validate_record(&task2(WISH, [0, 50, -1, -1])).is_clean());
    }

    #[test]
    fn validate_half_absent() {
        let report = validate_record(&task2(WISH, [-1, 50, -1, -1]));
        assert_eq!(codes(&report), vec![IssueCode::HalfAbsentSpan]);
        assert_eq!(report.issues[0].code.as_str(), "half-absent span");
    }

    #[test]
    fn validate_independent_spans() {
        let report = validate_record(&task2(WISH, [0, 4, 10, 5]));
        assert_eq!(report.issues.len(), 1);
        assert!(report.issues[0].message.starts_with("consequent"));
    }

    #[test]
    fn validate_four_corruptions() {
        let cases = [
            ([10, 5, -1, -1], IssueCode::StartExceedsEnd),
            ([0, 61, -1, -1], IssueCode::EndOutOfRange),
            ([0, 50, -3, 55], IssueCode::NegativeIndex),
            ([0, 50, 52, -1], IssueCode::HalfAbsentSpan),
        ];
        for (idx, code) in cases {
            let report = validate_record(&task2(WISH, idx));
            assert_eq!(codes(&report), vec![code], "{idx:?}");
            assert_eq!(report.severity(), Some(Severity::Error));
        }
    }

    #[test]
    fn validate_lists_every_issue() {
        let report = validate_record(&task2("", [3, 1, -1, 0]));
        assert_eq!(
            codes(&report),
            vec![
                IssueCode::EmptyText,
                IssueCode::StartExceedsEnd,
                IssueCode::EndOutOfRange,
                IssueCode::HalfAbsentSpan,
            ]
        );
        let absent = validate_record(&task2(WISH, [-1, -1, -1, -1]));
        assert_eq!(codes(&absent), vec![IssueCode::MissingAntecedent]);
        assert_eq!(absent.severity(), Some(Severity::Warning));
    }

    fn records(pos: usize, neg: usize) -> Vec<Task1Record> {
        (0..pos + neg)
            .map(|i| Task1Record {
                sentence_id: i.to_string(),
                text: format!("sentence {i}"),
                label: (i < pos) as u8,
            })
            .collect()
    }

    #[test]
    fn stats_published_counts() {
        let stats = corpus_stats(&records(1454, 11546), 512);
        assert_eq!((stats.total, stats.positives, stats.negatives), (13000, 1454, 11546));
        assert!((stats.positive_to_negative_ratio.unwrap() - 0.1259).abs() < 5e-5);
        assert!((stats.positive_fraction.unwrap() - 0.1118).abs() < 5e-5);
    }

    #[test]
    fn stats_edge_cases() {
        let one = corpus_stats(&records(1, 0), 10);
        assert_eq!(one.positive_fraction, Some(1.0));
        assert_eq!(one.positive_to_negative_ratio, None);
        let empty = corpus_stats(&[], 10);
        assert_eq!(empty.total, 0);
        assert_eq!(empty.positive_fraction, None);
        let long = corpus_stats(&records(0, 12), 10);
        assert_eq!(long.max_code_point_length, 11);
        assert_eq!(long.over_length_count, 2);
    }

    #[test]
    fn split_published_holdout_counts() {
        let all = records(1454, 11546);
        let (train, validation) = stratified_split(&all, 0.05, 7).unwrap();
        let pos = validation.iter().filter(|r| r.label == 1).count();
        assert_eq!((pos, validation.len() - pos), (73, 577));
        assert_eq!(validation.len(), 650);
        assert_eq!(train.len() + validation.len(), all.len());
    }

    #[test]
    fn split_symmetry_and_determinism() {
        let two = records(1, 1);
        let (train, validation) = stratified_split(&two, 0.5, 1).unwrap();
        assert_eq!((train.len(), validation.len()), (1, 1));

        let all = records(30, 70);
        assert_eq!(stratified_split(&all, 0.2, 9).unwrap(), stratified_split(&all, 0.2, 9).unwrap());
        let other = stratified_split(&all, 0.2, 10).unwrap();
        assert_eq!(other.1.iter().filter(|r| r.label == 1).count(), 6);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        for f in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(stratified_split(&records(2, 2), f, 0).is_err());
        }
    }

    fn table4() -> TagSequence {
        let tokens = tokenize("If I had 10 pharmacists");
        let pos = ["IN", "PRP", "VBD", "CD", "NNS"].map(String::from).to_vec();
        TagSequence::new(tokens, vec![Tag::Ante; 5], Some(pos)).unwrap()
    }

    #[test]
    fn write_ner_plain_and_pos() {
        let mut out = Vec::new();
        write_ner_to(&mut out, &[table4()], false).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "If\tante\nI\tante\nhad\tante\n10\tante\npharmacists\tante\n\n"
        );
        let mut out = Vec::new();
        write_ner_to(&mut out, &[table4()], true).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "If\tante\tIN\nI\tante\tPRP\nhad\tante\tVBD\n10\tante\tCD\npharmacists\tante\tNNS\n\n"
        );
        let mut out = Vec::new();
        write_ner_to(&mut out, &[], true).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn write_ner_length_mismatch_names_sentence() {
        let mut bad = table4();
        bad.tags.pop();
        let err = write_ner_to(Vec::new(), &[table4(), bad], false).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidSentence { sentence: 1, .. }));
    }

    #[test]
    fn ner_round_trip() {
        let mut out = Vec::new();
        write_ner_to(&mut out, &[table4()], true).unwrap();
        assert_eq!(load_ner_from(Cursor::new(out)).unwrap(), vec![table4()]);
    }

    #[test]
    fn load_ner_lines() {
        let seqs = load_ner_from(Cursor::new("people\tcons\nmore\tcons")).unwrap();
        assert_eq!(seqs.len(), 1);
        assert_eq!(seqs[0].tokens[0].text, "people");
        assert_eq!(seqs[0].tags, vec![Tag::Cons, Tag::Cons]);

        let err = load_ner_from(Cursor::new("If\tante\n\nword\tbanana\n")).unwrap_err();
        assert_eq!(err.to_string(), "line 3: unknown tag 'banana'");
    }

    #[test]
    fn span_prediction_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spans.csv");
        let rows = vec![
            SpanPredictionRow {
                sentence_id: "a".into(),
                spans: SpanPrediction::from_indexes([0, 47, 50, 89]).unwrap(),
            },
            SpanPredictionRow {
                sentence_id: "b".into(),
                spans: SpanPrediction::from_indexes([3, 9, -1, -1]).unwrap(),
            },
        ];
        write_span_predictions(&path, &rows).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "sentenceID,antecedent_startid,antecedent_endid,consequent_startid,consequent_endid\na,0,47,50,89\nb,3,9,-1,-1\n"
        );
        assert_eq!(read_span_predictions(&path).unwrap(), rows);

        std::fs::write(&path, "sentenceID,a,b,c,d\nx,0,-1,2,3\n").unwrap();
        assert!(matches!(read_span_predictions(&path), Err(CorpusError::InvalidSpan { line: 2, .. })));
    }
}
