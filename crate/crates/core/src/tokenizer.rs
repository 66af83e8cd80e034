//! Offset-preserving word tokenization and length-bounded subword splitting.
//!
//! All offsets are code-point positions into the original sentence and both
//! ends are inclusive. A token is either a maximal run of alphanumeric code
//! points or a single non-whitespace, non-alphanumeric code point. Whitespace
//! never produces a token.

use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A word-level unit of a sentence with inclusive code-point offsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn new(text: impl Into<String>, start: usize, end: usize) -> Self {
        Self {
            text: text.into(),
            start,
            end,
        }
    }

    /// Number of code points covered by the token.
    pub fn char_len(&self) -> usize {
        self.end - self.start + 1
    }

    /// True for single-character tokens that are not alphanumeric.
    pub fn is_punctuation(&self) -> bool {
        let mut chars = self.text.chars();
        matches!((chars.next(), chars.next()), (Some(c), None) if !c.is_alphanumeric())
    }
}

/// A fragment of a token produced by [`subword_split`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubwordPiece {
    pub text: String,
    /// Index of the source token.
    pub parent: usize,
    /// Position of this piece within its parent.
    pub piece_index: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlignError {
    #[error("piece {piece} refers to token {parent}, but only {tokens} tokens exist")]
    OrphanPiece {
        piece: usize,
        parent: usize,
        tokens: usize,
    },
    #[error("piece {piece} is out of order (parent {parent}, piece index {piece_index})")]
    OutOfOrder {
        piece: usize,
        parent: usize,
        piece_index: usize,
    },
    #[error("piece {piece} text {text:?} does not match token {parent} text {token:?}")]
    TextMismatch {
        piece: usize,
        parent: usize,
        text: String,
        token: String,
    },
    #[error("piece {piece} {text:?} does not match the sentence at code point {at}")]
    SurfaceMismatch { piece: usize, text: String, at: usize },
    #[error("{remaining} code points of the sentence are not covered by any piece")]
    Uncovered { remaining: usize },
}

/// Tokenizes `text` into alphanumeric runs and single punctuation characters.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run = String::new();
    let mut run_start = 0;

    for (idx, ch) in text.chars().enumerate() {
        if ch.is_alphanumeric() {
            if run.is_empty() {
                run_start = idx;
            }
            run.push(ch);
            continue;
        }
        if !run.is_empty() {
            tokens.push(Token::new(std::mem::take(&mut run), run_start, idx - 1));
        }
        if !ch.is_whitespace() {
            tokens.push(Token::new(ch.to_string(), idx, idx));
        }
    }
    if !run.is_empty() {
        let end = run_start + run.chars().count() - 1;
        tokens.push(Token::new(run, run_start, end));
    }
    tokens
}

/// Returns the inclusive code-point slice `[start..=end]` of `text`, or `None`
/// when the range falls outside the text.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<String> {
    if start > end {
        return None;
    }
    let slice: String = text.chars().skip(start).take(end - start + 1).collect();
    (slice.chars().count() == end - start + 1).then_some(slice)
}

/// Greedy left-to-right split of a token into pieces of at most `max_piece`
/// code points.
pub fn subword_split(token: &Token, parent: usize, max_piece: NonZeroUsize) -> Vec<SubwordPiece> {
    let chars: Vec<char> = token.text.chars().collect();
    chars
        .chunks(max_piece.get())
        .enumerate()
        .map(|(piece_index, chunk)| SubwordPiece {
            text: chunk.iter().collect(),
            parent,
            piece_index,
        })
        .collect()
}

/// Splits every token of a sentence, keeping pieces in sentence order.
pub fn subword_split_all(tokens: &[Token], max_piece: NonZeroUsize) -> Vec<SubwordPiece> {
    tokens
        .iter()
        .enumerate()
        .flat_map(|(parent, token)| subword_split(token, parent, max_piece))
        .collect()
}

/// Maps each piece to the index of the token it came from.
///
/// Pieces must appear in sentence order with consecutive piece indexes, and
/// the pieces of a token must concatenate to the token text. The returned
/// mapping is total and the pieces of each token occupy a contiguous range.
pub fn align_pieces_to_tokens(
    pieces: &[SubwordPiece],
    tokens: &[Token],
) -> Result<Vec<usize>, AlignError> {
    let mut mapping = Vec::with_capacity(pieces.len());
    let mut assembled = String::new();
    let mut previous: Option<(usize, usize)> = None;

    for (i, piece) in pieces.iter().enumerate() {
        if piece.parent >= tokens.len() {
            return Err(AlignError::OrphanPiece {
                piece: i,
                parent: piece.parent,
                tokens: tokens.len(),
            });
        }
        let in_order = match previous {
            None => piece.piece_index == 0,
            Some((parent, index)) if parent == piece.parent => piece.piece_index == index + 1,
            Some((parent, _)) => piece.parent > parent && piece.piece_index == 0,
        };
        if !in_order {
            return Err(AlignError::OutOfOrder {
                piece: i,
                parent: piece.parent,
                piece_index: piece.piece_index,
            });
        }
        if piece.piece_index == 0 {
            assembled.clear();
        }
        assembled.push_str(&piece.text);
        if !tokens[piece.parent].text.starts_with(assembled.as_str()) {
            return Err(AlignError::TextMismatch {
                piece: i,
                parent: piece.parent,
                text: piece.text.clone(),
                token: tokens[piece.parent].text.clone(),
            });
        }
        previous = Some((piece.parent, piece.piece_index));
        mapping.push(piece.parent);
    }
    Ok(mapping)
}

/// Result of aligning externally produced pieces to sentence tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceAlignment {
    /// Token containing the first code point of each piece.
    pub piece_to_token: Vec<usize>,
    /// Piece covering the first code point of each token.
    pub token_to_piece: Vec<usize>,
}

/// Continuation marker used by wordpiece vocabularies.
const CONTINUATION_PREFIX: &str = "##";

/// Aligns externally produced surface pieces (model tokenizer output, with
/// `##` continuation markers allowed) to the tokens of `text`.
///
/// Alignment walks the non-whitespace code points of the sentence in order,
/// so repeated words such as two occurrences of "if" are resolved by
/// position rather than by string search. Each piece maps to the token that
/// contains its first code point; a piece spanning several tokens (a model
/// that keeps "S&P" whole) is recorded as the cover of the later ones.
pub fn align_surface_pieces<S: AsRef<str>>(
    text: &str,
    tokens: &[Token],
    pieces: &[S],
) -> Result<SurfaceAlignment, AlignError> {
    // Every non-whitespace code point, with its index and owning token.
    let mut stream: Vec<(usize, char, usize)> = Vec::new();
    let mut owner = 0;
    for (idx, ch) in text.chars().enumerate() {
        if ch.is_whitespace() {
            continue;
        }
        while owner < tokens.len() && tokens[owner].end < idx {
            owner += 1;
        }
        stream.push((idx, ch, owner));
    }

    let mut cursor = 0;
    let mut mapping = Vec::with_capacity(pieces.len());
    let mut token_to_piece = vec![usize::MAX; tokens.len()];
    for (i, piece) in pieces.iter().enumerate() {
        let raw = piece.as_ref();
        let surface = raw.strip_prefix(CONTINUATION_PREFIX).filter(|s| !s.is_empty()).unwrap_or(raw);
        let at = stream.get(cursor).map_or(text.chars().count(), |entry| entry.0);
        let mismatch = || AlignError::SurfaceMismatch {
            piece: i,
            text: raw.to_string(),
            at,
        };
        if surface.is_empty() || cursor >= stream.len() {
            return Err(mismatch());
        }
        let first_owner = stream[cursor].2;
        for ch in surface.chars() {
            match stream.get(cursor) {
                Some(&(idx, expected, token)) if expected == ch => {
                    if tokens[token].start == idx {
                        token_to_piece[token] = i;
                    }
                    cursor += 1;
                }
                _ => return Err(mismatch()),
            }
        }
        mapping.push(first_owner);
    }
    if cursor < stream.len() {
        return Err(AlignError::Uncovered {
            remaining: stream.len() - cursor,
        });
    }
    Ok(SurfaceAlignment {
        piece_to_token: mapping,
        token_to_piece,
    })
}
