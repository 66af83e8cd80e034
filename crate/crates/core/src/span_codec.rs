//! Conversion between character-indexed antecedent/consequent spans and
//! per-token tag sequences.
//!
//! Encoding marks every token that intersects a gold span. Decoding works
//! purely on token offsets: runs of a tag are formed, short holes may be
//! bridged, one run per class is selected and its first/last token offsets
//! become the predicted indexes. No string search is involved, so repeated
//! words in a sentence cannot confuse the recovered positions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenizer::{SurfaceAlignment, Token};

/// Word-level label for the span extraction track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    Ante,
    Cons,
    None,
}

impl Tag {
    pub const ALL: [Tag; 3] = [Tag::Ante, Tag::Cons, Tag::None];

    /// Serialized form used in tag files.
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Ante => "ante",
            Tag::Cons => "cons",
            Tag::None => "0",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown tag '{0}'")]
pub struct UnknownTag(pub String);

impl FromStr for Tag {
    type Err = UnknownTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ante" => Ok(Tag::Ante),
            "cons" => Ok(Tag::Cons),
            "0" => Ok(Tag::None),
            other => Err(UnknownTag(other.to_string())),
        }
    }
}

/// An inclusive code-point range `[start..=end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    /// Number of code points covered.
    pub fn width(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn intersects(&self, start: usize, end: usize) -> bool {
        self.start <= end && start <= self.end
    }

    /// Number of code points shared with `other`.
    pub fn overlap(&self, other: &CharSpan) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if lo <= hi {
            hi - lo + 1
        } else {
            0
        }
    }
}

/// Predicted or gold span pair; `None` corresponds to the `-1, -1` sentinel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpanPrediction {
    pub antecedent: Option<CharSpan>,
    pub consequent: Option<CharSpan>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SpanIndexError {
    #[error("{which} span ({start}, {end}) is half-absent")]
    HalfAbsent {
        which: &'static str,
        start: i64,
        end: i64,
    },
    #[error("{which} span ({start}, {end}) has a negative index other than -1")]
    Negative {
        which: &'static str,
        start: i64,
        end: i64,
    },
    #[error("{which} span start {start} exceeds end {end}")]
    Inverted {
        which: &'static str,
        start: i64,
        end: i64,
    },
    #[error("{which} span end {end} is out of range for a text of {len} code points")]
    OutOfRange {
        which: &'static str,
        end: usize,
        len: usize,
    },
}

fn span_from_pair(which: &'static str, start: i64, end: i64) -> Result<Option<CharSpan>, SpanIndexError> {
    match (start, end) {
        (-1, -1) => Ok(None),
        (-1, _) | (_, -1) => Err(SpanIndexError::HalfAbsent { which, start, end }),
        (s, e) if s < 0 || e < 0 => Err(SpanIndexError::Negative { which, start, end }),
        (s, e) if s > e => Err(SpanIndexError::Inverted { which, start, end }),
        (s, e) => Ok(Some(CharSpan::new(s as usize, e as usize))),
    }
}

fn pair_of(span: Option<CharSpan>) -> [i64; 2] {
    span.map_or([-1, -1], |s| [s.start as i64, s.end as i64])
}

impl SpanPrediction {
    pub fn new(antecedent: Option<CharSpan>, consequent: Option<CharSpan>) -> Self {
        Self {
            antecedent,
            consequent,
        }
    }

    /// Builds a prediction from the four-integer layout
    /// `[antecedent_start, antecedent_end, consequent_start, consequent_end]`.
    pub fn from_indexes(indexes: [i64; 4]) -> Result<Self, SpanIndexError> {
        Ok(Self {
            antecedent: span_from_pair("antecedent", indexes[0], indexes[1])?,
            consequent: span_from_pair("consequent", indexes[2], indexes[3])?,
        })
    }

    pub fn indexes(&self) -> [i64; 4] {
        let [a, b] = pair_of(self.antecedent);
        let [c, d] = pair_of(self.consequent);
        [a, b, c, d]
    }

    /// Checks that every present span ends inside a text of `len` code points.
    pub fn check_bounds(&self, len: usize) -> Result<(), SpanIndexError> {
        for (which, span) in [("antecedent", self.antecedent), ("consequent", self.consequent)] {
            if let Some(span) = span {
                if span.end >= len {
                    return Err(SpanIndexError::OutOfRange {
                        which,
                        end: span.end,
                        len,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn span(&self, tag: Tag) -> Option<CharSpan> {
        match tag {
            Tag::Ante => self.antecedent,
            Tag::Cons => self.consequent,
            Tag::None => None,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("sequence has {tokens} tokens but {tags} tags")]
    TagLength { tokens: usize, tags: usize },
    #[error("sequence has {tokens} tokens but {pos} POS entries")]
    PosLength { tokens: usize, pos: usize },
    #[error("antecedent {antecedent:?} and consequent {consequent:?} overlap")]
    OverlappingSpans {
        antecedent: CharSpan,
        consequent: CharSpan,
    },
    #[error(transparent)]
    Span(#[from] SpanIndexError),
    #[error("mapping has {mapping} entries for {tags} piece tags")]
    MappingLength { mapping: usize, tags: usize },
    #[error("piece {piece} maps to token {token}, but only {tokens} tokens exist")]
    MappingOutOfRange { piece: usize, token: usize, tokens: usize },
    #[error("token {0} has no pieces")]
    TokenWithoutPieces(usize),
}

/// Tokens of one sentence with their tags and an optional POS column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSequence {
    pub tokens: Vec<Token>,
    pub tags: Vec<Tag>,
    pub pos: Option<Vec<String>>,
}

impl TagSequence {
    pub fn new(tokens: Vec<Token>, tags: Vec<Tag>, pos: Option<Vec<String>>) -> Result<Self, CodecError> {
        if tokens.len() != tags.len() {
            return Err(CodecError::TagLength {
                tokens: tokens.len(),
                tags: tags.len(),
            });
        }
        if let Some(pos) = &pos {
            if pos.len() != tokens.len() {
                return Err(CodecError::PosLength {
                    tokens: tokens.len(),
                    pos: pos.len(),
                });
            }
        }
        Ok(Self { tokens, tags, pos })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// How tag runs are turned back into character indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodePolicy {
    pub run_selection: RunSelection,
    /// Number of tokens carrying another tag that may sit inside a run.
    pub max_bridge_gap: usize,
    /// When false, single-character punctuation tokens are trimmed from both
    /// ends of every candidate run.
    pub include_boundary_punctuation: bool,
}

impl Default for DecodePolicy {
    fn default() -> Self {
        Self {
            run_selection: RunSelection::LongestRun,
            max_bridge_gap: 1,
            include_boundary_punctuation: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunSelection {
    /// The run with the widest character extent; earliest wins ties.
    LongestRun,
    FirstRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeStrategy {
    FirstPiece,
    Majority,
}

/// Tags every token by intersection with the gold spans.
pub fn encode_tags(text: &str, tokens: &[Token], spans: &SpanPrediction) -> Result<TagSequence, CodecError> {
    spans.check_bounds(text.chars().count())?;
    if let (Some(antecedent), Some(consequent)) = (spans.antecedent, spans.consequent) {
        if antecedent.overlap(&consequent) > 0 {
            return Err(CodecError::OverlappingSpans {
                antecedent,
                consequent,
            });
        }
    }
    let tags = tokens
        .iter()
        .map(|token| {
            if spans.antecedent.is_some_and(|s| s.intersects(token.start, token.end)) {
                Tag::Ante
            } else if spans.consequent.is_some_and(|s| s.intersects(token.start, token.end)) {
                Tag::Cons
            } else {
                Tag::None
            }
        })
        .collect();
    TagSequence::new(tokens.to_vec(), tags, None)
}

/// Token index range `[first..=last]` of a candidate run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Run {
    first: usize,
    last: usize,
}

/// Maximal runs of `tag`, with interior holes of at most `max_gap` tokens bridged.
fn bridged_runs(tags: &[Tag], tag: Tag, max_gap: usize) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for (i, &t) in tags.iter().enumerate() {
        if t != tag {
            continue;
        }
        match runs.last_mut() {
            Some(run) if i - run.last - 1 <= max_gap => run.last = i,
            _ => runs.push(Run { first: i, last: i }),
        }
    }
    runs
}

fn trim_punctuation(tokens: &[Token], run: Run) -> Option<Run> {
    let first = (run.first..=run.last).find(|&i| !tokens[i].is_punctuation())?;
    let last = (first..=run.last).rev().find(|&i| !tokens[i].is_punctuation())?;
    Some(Run { first, last })
}

fn decode_class(sequence: &TagSequence, tag: Tag, policy: &DecodePolicy) -> Option<CharSpan> {
    let tokens = &sequence.tokens;
    let mut candidates = bridged_runs(&sequence.tags, tag, policy.max_bridge_gap)
        .into_iter()
        .filter_map(|run| {
            if policy.include_boundary_punctuation {
                Some(run)
            } else {
                trim_punctuation(tokens, run)
            }
        })
        .map(|run| CharSpan::new(tokens[run.first].start, tokens[run.last].end));

    match policy.run_selection {
        RunSelection::FirstRun => candidates.next(),
        RunSelection::LongestRun => candidates.fold(None, |best: Option<CharSpan>, span| match best {
            Some(b) if b.width() >= span.width() => Some(b),
            _ => Some(span),
        }),
    }
}

/// Recovers antecedent and consequent character indexes from a tag sequence.
///
/// The two classes are decoded independently; a token of the other class
/// inside a run counts toward the bridging budget like any other hole.
pub fn decode_spans(sequence: &TagSequence, policy: &DecodePolicy) -> SpanPrediction {
    SpanPrediction {
        antecedent: decode_class(sequence, Tag::Ante, policy),
        consequent: decode_class(sequence, Tag::Cons, policy),
    }
}

/// Collapses per-piece tags to one tag per token.
///
/// `mapping[i]` is the token of piece `i`. `FirstPiece` keeps the tag of a
/// token's first piece; `Majority` keeps the modal tag, ties going to the
/// first piece's tag.
pub fn merge_subword_tags(
    piece_tags: &[Tag],
    mapping: &[usize],
    token_count: usize,
    strategy: MergeStrategy,
) -> Result<Vec<Tag>, CodecError> {
    if piece_tags.len() != mapping.len() {
        return Err(CodecError::MappingLength {
            mapping: mapping.len(),
            tags: piece_tags.len(),
        });
    }
    let mut first: Vec<Option<Tag>> = vec![None; token_count];
    let mut counts = vec![[0usize; 3]; token_count];
    for (piece, (&tag, &token)) in piece_tags.iter().zip(mapping).enumerate() {
        if token >= token_count {
            return Err(CodecError::MappingOutOfRange {
                piece,
                token,
                tokens: token_count,
            });
        }
        first[token].get_or_insert(tag);
        counts[token][tag.index()] += 1;
    }

    first
        .into_iter()
        .zip(counts)
        .enumerate()
        .map(|(token, (first, counts))| {
            let first = first.ok_or(CodecError::TokenWithoutPieces(token))?;
            Ok(match strategy {
                MergeStrategy::FirstPiece => first,
                MergeStrategy::Majority => {
                    let top = counts.iter().copied().max().unwrap_or(0);
                    if counts[first.index()] == top {
                        first
                    } else {
                        Tag::ALL.into_iter().find(|t| counts[t.index()] == top).unwrap_or(first)
                    }
                }
            })
        })
        .collect()
}

/// Projects tags of externally aligned pieces onto sentence tokens.
///
/// Tokens that own at least one piece are merged with `strategy`; tokens
/// swallowed by a piece that started in an earlier token inherit that
/// piece's tag.
pub fn project_surface_tags(
    piece_tags: &[Tag],
    alignment: &SurfaceAlignment,
    strategy: MergeStrategy,
) -> Result<Vec<Tag>, CodecError> {
    let token_count = alignment.token_to_piece.len();
    let mut owned = vec![false; token_count];
    for &token in &alignment.piece_to_token {
        if token < token_count {
            owned[token] = true;
        }
    }
    // Give swallowed tokens a synthetic piece so the merge sees every token.
    let mut tags = piece_tags.to_vec();
    let mut mapping = alignment.piece_to_token.clone();
    for (token, &is_owned) in owned.iter().enumerate() {
        if is_owned {
            continue;
        }
        let cover = alignment.token_to_piece[token];
        let tag = *piece_tags.get(cover).ok_or(CodecError::TokenWithoutPieces(token))?;
        tags.push(tag);
        mapping.push(token);
    }
    merge_subword_tags(&tags, &mapping, token_count, strategy)
}
