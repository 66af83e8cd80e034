//! Text cleaning variants for the detection track, merging of externally
//! back-translated rows, and token truncation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Task1Record;
use crate::tokenizer::Token;

/// Characters removed by punctuation stripping: ASCII punctuation plus the
/// typographic quotes, dashes and ellipsis common in news text.
pub const PUNCTUATION: &[char] = &[
    '!', '"', '#', '$', '%', '&', '\'', '(', ')', '*', '+', ',', '-', '.', '/', ':', ';', '<', '=', '>', '?',
    '@', '[', '\\', ']', '^', '_', '`', '{', '|', '}', '~', '\u{2018}', '\u{2019}', '\u{201C}', '\u{201D}',
    '\u{2013}', '\u{2014}', '\u{2026}',
];

pub fn is_punctuation(ch: char) -> bool {
    PUNCTUATION.contains(&ch)
}

/// Characters that survive rare-character stripping: letters, digits,
/// whitespace and [`PUNCTUATION`].
pub fn is_common(ch: char) -> bool {
    ch.is_alphanumeric() || ch.is_whitespace() || is_punctuation(ch)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanOptions {
    pub strip_punctuation: bool,
    pub strip_rare_characters: bool,
    pub strip_hashtags: bool,
}

impl CleanOptions {
    pub fn all() -> Self {
        Self {
            strip_punctuation: true,
            strip_rare_characters: true,
            strip_hashtags: true,
        }
    }

    pub fn any(&self) -> bool {
        self.strip_punctuation || self.strip_rare_characters || self.strip_hashtags
    }
}

/// Removes the leading `#` marks of every whitespace-delimited word. When
/// rare characters are also being stripped, characters that step would
/// delete do not shield a `#` from counting as leading.
fn strip_hashtags(text: &str, skip_rare: bool) -> String {
    let mut out = String::with_capacity(text.len());
    let mut at_word_start = true;
    for ch in text.chars() {
        if ch.is_whitespace() {
            at_word_start = true;
            out.push(ch);
        } else if at_word_start && ch == '#' {
            continue;
        } else {
            if !(skip_rare && !is_common(ch)) {
                at_word_start = false;
            }
            out.push(ch);
        }
    }
    out
}

/// Applies the selected cleaning steps in the order hashtags, rare
/// characters, punctuation, then collapses whitespace runs and trims.
/// With every option off the text is returned unchanged.
pub fn clean_text(text: &str, options: &CleanOptions) -> String {
    if !options.any() {
        return text.to_string();
    }
    let mut current = if options.strip_hashtags {
        strip_hashtags(text, options.strip_rare_characters)
    } else {
        text.to_string()
    };
    if options.strip_rare_characters {
        current.retain(is_common);
    }
    if options.strip_punctuation {
        current.retain(|c| !is_punctuation(c));
    }
    current.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentReport {
    pub added: usize,
    pub duplicates_skipped: usize,
    /// Rows added per label, indexed by label.
    pub label_distribution_delta: [usize; 2],
}

fn dedup_key(text: &str) -> String {
    clean_text(text, &CleanOptions::all()).to_lowercase()
}

/// Appends augmentation rows after the base rows. With `dedup`, a row whose
/// cleaned, lowercased text was already seen is skipped.
pub fn merge_augmented(
    base: &[Task1Record],
    augmented: &[Task1Record],
    dedup: bool,
) -> (Vec<Task1Record>, AugmentReport) {
    let mut seen: HashSet<String> = if dedup {
        base.iter().map(|r| dedup_key(&r.text)).collect()
    } else {
        HashSet::new()
    };
    let mut merged = base.to_vec();
    let mut report = AugmentReport::default();
    for row in augmented {
        if dedup && !seen.insert(dedup_key(&row.text)) {
            report.duplicates_skipped += 1;
            continue;
        }
        report.added += 1;
        report.label_distribution_delta[usize::from(row.label == 1)] += 1;
        merged.push(row.clone());
    }
    (merged, report)
}

/// Keeps the first `max_length` tokens; offsets are left untouched.
pub fn truncate_tokens(tokens: &[Token], max_length: usize) -> Vec<Token> {
    tokens[..tokens.len().min(max_length)].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::tokenize;

    fn only(p: bool, r: bool, h: bool) -> CleanOptions {
        CleanOptions {
            strip_punctuation: p,
            strip_rare_characters: r,
            strip_hashtags: h,
        }
    }

    #[test]
    fn all_off_is_identity() {
        let text = "  #odd   spacing, 😀 stays ";
        assert_eq!(clean_text(text, &CleanOptions::default()), text);
    }

    #[test]
    fn all_options() {
        assert_eq!(clean_text("#hope it's fine!", &CleanOptions::all()), "hope its fine");
    }

    #[test]
    fn punctuation_only() {
        assert_eq!(
            clean_text("If needed, I would like to have the right to try.", &only(true, false, false)),
            "If needed I would like to have the right to try"
        );
    }

    #[test]
    fn hashtags_keep_the_word() {
        assert_eq!(clean_text("so #blessed ##twice a#b", &only(false, false, true)), "so blessed twice a#b");
    }

    #[test]
    fn rare_characters() {
        assert_eq!(clean_text("great 😀 news™ — really", &only(false, true, false)), "great news — really");
    }

    #[test]
    fn hashtag_behind_rare_character() {
        let o = only(false, true, true);
        let once = clean_text("😀#tag", &o);
        assert_eq!(once, "tag");
        assert_eq!(clean_text(&once, &o), once);
    }

    fn rec(id: &str, text: &str, label: u8) -> Task1Record {
        Task1Record {
            sentence_id: id.into(),
            text: text.into(),
            label,
        }
    }

    #[test]
    fn merge_counts() {
        let base: Vec<_> = (0..13000).map(|i| rec(&i.to_string(), &format!("base {i}"), 0)).collect();
        let aug: Vec<_> = (0..1000).map(|i| rec(&format!("bt{i}"), &format!("augmented {i}"), 1)).collect();
        let (merged, report) = merge_augmented(&base, &aug, true);
        assert_eq!(merged.len(), 14000);
        assert_eq!(report.added, 1000);
        assert_eq!(report.label_distribution_delta, [0, 1000]);
    }

    #[test]
    fn merge_dedup() {
        let base = vec![rec("1", "If only I had known.", 1)];
        let aug = vec![rec("a", "if only I had known", 1), rec("b", "Something new.", 1)];
        let (merged, report) = merge_augmented(&base, &aug, true);
        assert_eq!(merged.len(), 2);
        assert_eq!(report.duplicates_skipped, 1);
        assert_eq!(report.added, 1);

        let (merged, report) = merge_augmented(&base, &aug, false);
        assert_eq!(merged.len(), 3);
        assert_eq!(report.duplicates_skipped, 0);
    }

    #[test]
    fn truncation() {
        let text = (0..130).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let tokens = tokenize(&text);
        let cut = truncate_tokens(&tokens, 128);
        assert_eq!(cut.len(), 128);
        assert_eq!(cut[127], tokens[127]);
        assert_eq!(truncate_tokens(&tokens[..5], 128).len(), 5);
        assert_eq!(truncate_tokens(&tokens, 1), vec![tokens[0].clone()]);
    }
}
