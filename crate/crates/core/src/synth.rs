//! Templated synthetic corpus: counterfactual sentences with token-aligned
//! gold spans, and declarative sentences without any.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Task1Record, Task2Record};
use crate::span_codec::{CharSpan, SpanPrediction, Tag};

const SUBJECTS: &[&str] = &[
    "José", "Zoë", "Søren", "Łukasz", "François", "Müller", "Aiko", "Priya", "the committee", "the investors",
    "my daughter", "the city council", "our team", "the senator", "the company", "Björn", "the doctors",
    "my neighbour", "the airline", "Nadia",
];

const PARTICIPLES: &[&str] = &[
    "sold", "bought", "signed", "finished", "cancelled", "approved", "read", "known", "invested in", "rejected",
    "funded", "built", "ignored", "seen", "answered",
];

const PAST: &[&str] = &[
    "sold", "bought", "signed", "finished", "cancelled", "approved", "read", "rejected", "funded", "built",
    "ignored", "answered", "reviewed", "opened",
];

const BASE: &[&str] = &["sell", "buy", "sign", "finish", "approve", "read", "fund", "build", "review", "open"];

const OBJECTS: &[&str] = &[
    "the house", "the contract", "the report", "the S&P 500", "that deal", "the bridge", "the proposal",
    "the letter", "the new café", "15.9% more shares", "the budget", "the old mill", "the vaccine trial",
    "the merger", "$200 million in bonds",
];

const OUTCOMES: &[&str] = &[
    "saved a fortune", "moved to Kraków", "won the election", "avoided the crisis", "hired more staff",
    "paid off the loan", "stayed in Zürich", "lost everything", "doubled the profit", "finished on time",
    "kept the jobs", "returned 12%", "been much happier", "closed the gap",
];

const CLAUSE_TAILS: &[&str] = &["last year", "in 2012", "on Monday", "this spring", "after the vote", "yesterday"];

#[derive(Clone, Copy)]
enum Part<'a> {
    Plain(&'a str),
    Span(&'a str, Tag),
}

/// Joins parts with single spaces, attaching `,` and `.` to the preceding
/// word, and records the character extent of each tagged class.
fn assemble(parts: &[Part]) -> (String, SpanPrediction) {
    let mut text = String::new();
    let mut len = 0usize;
    let mut spans = SpanPrediction::default();
    for part in parts {
        let (piece, tag) = match *part {
            Part::Plain(p) => (p, None),
            Part::Span(p, t) => (p, Some(t)),
        };
        if !text.is_empty() && !matches!(piece, "," | ".") {
            text.push(' ');
            len += 1;
        }
        let start = len;
        text.push_str(piece);
        len += piece.chars().count();
        if let Some(tag) = tag {
            let end = len - 1;
            let slot = match tag {
                Tag::Ante => &mut spans.antecedent,
                Tag::Cons => &mut spans.consequent,
                Tag::None => continue,
            };
            *slot = Some(match *slot {
                Some(span) => CharSpan::new(span.start, end),
                None => CharSpan::new(start, end),
            });
        }
    }
    (text, spans)
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn pick<'a, R: Rng>(rng: &mut R, words: &[&'a str]) -> &'a str {
    words.choose(rng).copied().unwrap_or_default()
}

/// One counterfactual sentence and its gold spans.
pub fn counterfactual<R: Rng>(rng: &mut R) -> (String, SpanPrediction) {
    use Part::{Plain, Span};
    use Tag::{Ante, Cons};
    let s1 = pick(rng, SUBJECTS);
    let s2 = pick(rng, SUBJECTS);
    let pp = pick(rng, PARTICIPLES);
    let obj = pick(rng, OBJECTS);
    let outcome = pick(rng, OUTCOMES);
    let modal = pick(rng, &["would", "could", "might"]);
    let cap2 = capitalize(s2);
    let parts: Vec<Part> = match rng.gen_range(0..6) {
        0 => vec![
            Span("If", Ante),
            Span(s1, Ante),
            Span("had", Ante),
            Span(pp, Ante),
            Span(obj, Ante),
            Plain(","),
            Span(s2, Cons),
            Span(modal, Cons),
            Span("have", Cons),
            Span(outcome, Cons),
            Plain("."),
        ],
        1 => vec![
            Span(&cap2, Cons),
            Span(modal, Cons),
            Span("have", Cons),
            Span(outcome, Cons),
            Span("if", Ante),
            Span(s1, Ante),
            Span("had", Ante),
            Span(pp, Ante),
            Span(obj, Ante),
            Plain("."),
        ],
        2 => vec![
            Span("Had", Ante),
            Span(s1, Ante),
            Span(pp, Ante),
            Span(obj, Ante),
            Plain(","),
            Span(s2, Cons),
            Span(modal, Cons),
            Span("have", Cons),
            Span(outcome, Cons),
            Plain("."),
        ],
        3 => vec![
            Span("I", Ante),
            Span("wish", Ante),
            Span(s1, Ante),
            Span("had", Ante),
            Span(pp, Ante),
            Span(obj, Ante),
            Plain("."),
        ],
        4 => vec![
            Span("If", Ante),
            Span("only", Ante),
            Span(s1, Ante),
            Span("had", Ante),
            Span(pp, Ante),
            Span(obj, Ante),
            Plain("."),
        ],
        _ => vec![
            Plain("Honestly"),
            Plain(","),
            Span("if", Ante),
            Span(s1, Ante),
            Span("had", Ante),
            Span("not", Ante),
            Span(pp, Ante),
            Span(obj, Ante),
            Plain(","),
            Span(s2, Cons),
            Span(modal, Cons),
            Span("have", Cons),
            Span(outcome, Cons),
            Plain("."),
        ],
    };
    assemble(&parts)
}

/// One factual sentence.
pub fn declarative<R: Rng>(rng: &mut R) -> String {
    use Part::Plain;
    let s1 = capitalize(pick(rng, SUBJECTS));
    let s2 = pick(rng, SUBJECTS);
    let v1 = pick(rng, PAST);
    let v2 = pick(rng, PAST);
    let obj = pick(rng, OBJECTS);
    let obj2 = pick(rng, OBJECTS);
    let tail = pick(rng, CLAUSE_TAILS);
    let base = pick(rng, BASE);
    let parts: Vec<Part> = match rng.gen_range(0..5) {
        0 => vec![Plain(&s1), Plain(v1), Plain(obj), Plain(tail), Plain(".")],
        1 => vec![Plain(&s1), Plain(v1), Plain(obj), Plain(","), Plain("and"), Plain(s2), Plain(v2), Plain(obj2), Plain(".")],
        2 => vec![Plain("When"), Plain(s2), Plain(v1), Plain(obj), Plain(","), Plain(&s1), Plain("also"), Plain(v2), Plain(obj2), Plain(".")],
        3 => vec![Plain(&s1), Plain("will"), Plain(base), Plain(obj), Plain(tail), Plain(".")],
        _ => vec![Plain(&s1), Plain("has"), Plain(v1), Plain(obj), Plain("since"), Plain(tail), Plain(".")],
    };
    assemble(&parts).0
}

/// Records for both tracks drawn from the grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    /// Every sentence with its detection label.
    pub detection: Vec<Task1Record>,
    /// The counterfactual sentences with gold spans.
    pub spans: Vec<Task2Record>,
}

/// Generates `total` sentences of which `positives` are counterfactual,
/// interleaved in a seeded random order. Identifiers are `syn00001`, ….
pub fn synthetic_corpus(total: usize, positives: usize, seed: u64) -> SyntheticCorpus {
    let positives = positives.min(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<u8> = (0..total).map(|i| u8::from(i < positives)).collect();
    labels.shuffle(&mut rng);
    let mut corpus = SyntheticCorpus {
        detection: Vec::with_capacity(total),
        spans: Vec::with_capacity(positives),
    };
    for (i, label) in labels.into_iter().enumerate() {
        let sentence_id = format!("syn{:05}", i + 1);
        let text = if label == 1 {
            let (text, spans) = counterfactual(&mut rng);
            let [a, b, c, d] = spans.indexes();
            corpus.spans.push(Task2Record {
                sentence_id: sentence_id.clone(),
                text: text.clone(),
                antecedent_start: a,
                antecedent_end: b,
                consequent_start: c,
                consequent_end: d,
            });
            text
        } else {
            declarative(&mut rng)
        };
        corpus.detection.push(Task1Record { sentence_id, text, label });
    }
    corpus
}
