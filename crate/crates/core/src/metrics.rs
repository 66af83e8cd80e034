//! Evaluation arithmetic for both tracks.
//!
//! Detection is scored with binary precision/recall/F1 over the positive
//! class. Span extraction is scored per sentence over labeled character
//! positions `(position, antecedent|consequent)`, then macro-averaged, with a
//! separate exact-match rate over the four gold integers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::span_codec::{SpanIndexError, SpanPrediction};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("gold has {gold} labels but predictions have {predicted}")]
    LengthMismatch { gold: usize, predicted: usize },
    #[error("label {value} at position {index} is not 0 or 1")]
    InvalidLabel { index: usize, value: u8 },
    #[error("cannot average an empty list of span scores")]
    Empty,
    #[error("{which} spans: {source}")]
    InvalidSpans {
        which: &'static str,
        #[source]
        source: SpanIndexError,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl BinaryCounts {
    pub fn from_labels(gold: &[u8], predicted: &[u8]) -> Result<Self, MetricsError> {
        if gold.len() != predicted.len() {
            return Err(MetricsError::LengthMismatch {
                gold: gold.len(),
                predicted: predicted.len(),
            });
        }
        let mut counts = Self::default();
        for (index, (&g, &p)) in gold.iter().zip(predicted).enumerate() {
            for value in [g, p] {
                if value > 1 {
                    return Err(MetricsError::InvalidLabel { index, value });
                }
            }
            match (g, p) {
                (1, 1) => counts.tp += 1,
                (0, 1) => counts.fp += 1,
                (1, 0) => counts.fn_ += 1,
                _ => counts.tn += 1,
            }
        }
        Ok(counts)
    }

    pub fn report(&self) -> MetricReport {
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        MetricReport {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
            support: self.tp + self.fn_,
        }
    }
}

/// `num / den`, with a zero denominator scoring 0.
fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn harmonic_mean(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of gold positives.
    pub support: usize,
}

/// Binary precision, recall and F1 of the positive class.
pub fn binary_prf(gold: &[u8], predicted: &[u8]) -> Result<MetricReport, MetricsError> {
    Ok(BinaryCounts::from_labels(gold, predicted)?.report())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub exact: bool,
}

fn labeled_positions(spans: &SpanPrediction) -> usize {
    spans.antecedent.map_or(0, |s| s.width()) + spans.consequent.map_or(0, |s| s.width())
}

fn shared_positions(a: &SpanPrediction, b: &SpanPrediction) -> usize {
    let overlap = |x: Option<_>, y: Option<_>| match (x, y) {
        (Some(x), Some(y)) => crate::span_codec::CharSpan::overlap(&x, &y),
        _ => 0,
    };
    overlap(a.antecedent, b.antecedent) + overlap(a.consequent, b.consequent)
}

/// Scores one sentence's predicted spans against gold over labeled
/// character positions. Two empty position sets agree perfectly.
pub fn span_score(text: &str, gold: &SpanPrediction, predicted: &SpanPrediction) -> Result<SpanScore, MetricsError> {
    let len = text.chars().count();
    gold.check_bounds(len)
        .map_err(|source| MetricsError::InvalidSpans { which: "gold", source })?;
    predicted
        .check_bounds(len)
        .map_err(|source| MetricsError::InvalidSpans {
            which: "predicted",
            source,
        })?;

    let exact = gold.indexes() == predicted.indexes();
    let gold_n = labeled_positions(gold);
    let pred_n = labeled_positions(predicted);
    if gold_n == 0 && pred_n == 0 {
        return Ok(SpanScore {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
            exact,
        });
    }
    let shared = shared_positions(gold, predicted);
    let precision = ratio(shared, pred_n);
    let recall = ratio(shared, gold_n);
    Ok(SpanScore {
        precision,
        recall,
        f1: harmonic_mean(precision, recall),
        exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroSpanReport {
    pub f1: f64,
    pub recall: f64,
    pub precision: f64,
    pub exact_match_rate: f64,
    pub exact_matches: usize,
    pub sentences: usize,
}

/// Arithmetic means of per-sentence scores plus the exact-match rate.
pub fn macro_span_report(scores: &[SpanScore]) -> Result<MacroSpanReport, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = scores.len() as f64;
    let mean = |f: fn(&SpanScore) -> f64| scores.iter().map(f).sum::<f64>() / n;
    let exact_matches = scores.iter().filter(|s| s.exact).count();
    Ok(MacroSpanReport {
        f1: mean(|s| s.f1),
        recall: mean(|s| s.recall),
        precision: mean(|s| s.precision),
        exact_match_rate: exact_matches as f64 / n,
        exact_matches,
        sentences: scores.len(),
    })
}

/// Rounds half away from zero to `decimals` places.
pub fn round_to(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (value * scale).round() / scale
}

/// Plain-text table in the layout of the results tables, three decimals.
pub fn format_binary_table(rows: &[(&str, MetricReport)]) -> String {
    let width = rows.iter().map(|(name, _)| name.len()).max().unwrap_or(0).max(5);
    let mut out = format!("{:<width$} | {:>6} | {:>6} | {:>9}\n", "Model", "F1", "Recall", "Precision");
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{name:<width$} | {:>6.3} | {:>6.3} | {:>9.3}",
            round_to(r.f1, 3),
            round_to(r.recall, 3),
            round_to(r.precision, 3)
        );
    }
    out
}

pub fn format_span_table(rows: &[(&str, MacroSpanReport)]) -> String {
    let width = rows.iter().map(|(name, _)| name.len()).max().unwrap_or(0).max(4);
    let mut out = format!(
        "{:<width$} | {:>6} | {:>6} | {:>9} | {:>11}\n",
        "Type", "F1", "Recall", "Precision", "Exact Match"
    );
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{name:<width$} | {:>6.3} | {:>6.3} | {:>9.3} | {:>11.6}",
            round_to(r.f1, 3),
            round_to(r.recall, 3),
            round_to(r.precision, 3),
            round_to(r.exact_match_rate, 6)
        );
    }
    out
}

/// `metric=value` lines for machine consumption, full precision.
pub fn binary_key_values(report: &MetricReport, counts: &BinaryCounts) -> String {
    format!(
        "task=1\nf1={}\nrecall={}\nprecision={}\nsupport={}\ntp={}\nfp={}\nfn={}\ntn={}\n",
        round_to(report.f1, 6), round_to(report.recall, 6), round_to(report.precision, 6), report.support, counts.tp, counts.fp, counts.fn_, counts.tn
    )
}

pub fn span_key_values(report: &MacroSpanReport) -> String {
    format!(
        "task=2\nmetric_definition=character-position macro average\nf1={}\nrecall={}\nprecision={}\nexact_match={}\nexact_matches={}\nsentences={}\n",
        round_to(report.f1, 6), round_to(report.recall, 6), round_to(report.precision, 6), round_to(report.exact_match_rate, 6), report.exact_matches, report.sentences
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::span_codec::CharSpan;

    const WISH: &str = "I just wish it had been my hand holding my daughter, not his.";

    fn spans(idx: [i64; 4]) -> SpanPrediction {
        SpanPrediction::from_indexes(idx).unwrap()
    }

    #[test]
    fn perfect_and_empty_predictions() {
        let gold = [1, 0, 1, 1, 0];
        let r = binary_prf(&gold, &gold).unwrap();
        assert_eq!((r.precision, r.recall, r.f1, r.support), (1.0, 1.0, 1.0, 3));
        let r = binary_prf(&gold, &[0; 5]).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn bert_row_identity() {
        // 836 of 1000 positives found, 836 of 946 predictions correct.
        let counts = BinaryCounts {
            tp: 836,
            fp: 110,
            fn_: 164,
            tn: 0,
        };
        let r = counts.report();
        assert!((r.recall - 0.836).abs() < 5e-4);
        assert!((r.precision - 0.884).abs() < 5e-4);
        assert_eq!(round_to(r.f1, 3), 0.859);
    }

    #[test]
    fn binary_errors() {
        assert!(matches!(binary_prf(&[1], &[1, 0]), Err(MetricsError::LengthMismatch { .. })));
        assert!(matches!(binary_prf(&[2], &[1]), Err(MetricsError::InvalidLabel { .. })));
    }

    #[test]
    fn binary_symmetry() {
        let gold = [1, 1, 0, 0, 1, 0, 1];
        let pred = [1, 0, 1, 0, 1, 1, 0];
        let a = binary_prf(&gold, &pred).unwrap();
        let b = binary_prf(&pred, &gold).unwrap();
        assert_eq!(a.precision, b.recall);
        assert_eq!(a.recall, b.precision);
        assert!((a.f1 - b.f1).abs() < 1e-15);
    }

    #[test]
    fn span_identical_and_absent() {
        let gold = spans([0, 50, -1, -1]);
        let s = span_score(WISH, &gold, &gold).unwrap();
        assert_eq!((s.precision, s.recall, s.f1, s.exact), (1.0, 1.0, 1.0, true));
        let s = span_score(WISH, &gold, &SpanPrediction::default()).unwrap();
        assert_eq!((s.precision, s.recall, s.f1, s.exact), (0.0, 0.0, 0.0, false));
        let none = SpanPrediction::default();
        let s = span_score(WISH, &none, &none).unwrap();
        assert_eq!((s.precision, s.recall, s.f1, s.exact), (1.0, 1.0, 1.0, true));
    }

    #[test]
    fn span_partial_overlap() {
        let s = span_score(WISH, &spans([0, 50, -1, -1]), &spans([0, 40, -1, -1])).unwrap();
        assert_eq!(s.precision, 1.0);
        assert!((s.recall - 41.0 / 51.0).abs() < 1e-12);
        assert_eq!(round_to(s.recall, 3), 0.804);
        assert_eq!(round_to(s.f1, 3), 0.891);
        assert!(!s.exact);
    }

    #[test]
    fn span_labels_matter() {
        // Same positions, swapped labels share nothing.
        let gold = SpanPrediction::new(Some(CharSpan::new(0, 9)), None);
        let pred = SpanPrediction::new(None, Some(CharSpan::new(0, 9)));
        assert_eq!(span_score(WISH, &gold, &pred).unwrap().f1, 0.0);
    }

    #[test]
    fn span_rejects_out_of_range() {
        assert!(span_score(WISH, &spans([0, 61, -1, -1]), &SpanPrediction::default()).is_err());
        assert!(span_score(WISH, &SpanPrediction::default(), &spans([0, 70, -1, -1])).is_err());
    }

    #[test]
    fn macro_report() {
        let perfect = SpanScore {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
            exact: true,
        };
        let zero = SpanScore {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            exact: false,
        };
        let r = macro_span_report(&[perfect, zero]).unwrap();
        assert_eq!(r.f1, 0.5);
        assert_eq!(r.exact_match_rate, 0.5);
        let r = macro_span_report(&[perfect; 4]).unwrap();
        assert_eq!((r.f1, r.recall, r.precision, r.exact_match_rate), (1.0, 1.0, 1.0, 1.0));
        assert_eq!(macro_span_report(&[]), Err(MetricsError::Empty));
    }

    #[test]
    fn rounding_half_away_from_zero() {
        assert_eq!(round_to(0.0005128205, 6), 0.000513);
        assert_eq!(round_to(-0.25, 1), -0.3);
        assert_eq!(round_to(0.125, 2), 0.13);
    }

    #[test]
    fn tables_render() {
        let r = BinaryCounts {
            tp: 8,
            fp: 2,
            fn_: 2,
            tn: 8,
        }
        .report();
        let table = format_binary_table(&[("baseline", r)]);
        assert!(table.contains("baseline |  0.800 |  0.800 |     0.800"), "{table}");
        assert!(binary_key_values(&r, &BinaryCounts::default()).contains("f1=0.8\n"));
    }
}
