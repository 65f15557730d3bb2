//! Accuracy, weighted F1 and weighted recall under the 1-to-1 and 1-to-3
//! evaluation methodologies.
//!
//! 1-to-1 counts a hit only against the primary label; 1-to-3 also accepts
//! either alternative label. Hits earned through an alternative label credit
//! the primary category's recall ledger, so per-category supports are the
//! same under both methodologies and weighted recall equals accuracy as a
//! structural identity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Judgment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Methodology {
    #[serde(rename = "1to1")]
    OneToOne,
    #[serde(rename = "1to3")]
    OneToThree,
}

impl std::fmt::Display for Methodology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Methodology::OneToOne => "1to1",
            Methodology::OneToThree => "1to3",
        })
    }
}

impl std::str::FromStr for Methodology {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1to1" => Ok(Methodology::OneToOne),
            "1to3" => Ok(Methodology::OneToThree),
            other => Err(format!(
                "unknown methodology {other:?} (expected 1to1 or 1to3)"
            )),
        }
    }
}

/// One scored document: gold labels plus the model's prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub judgment_id: String,
    pub gold_primary: String,
    pub gold_alts: Vec<String>,
    pub predicted: String,
}

impl PredictionRecord {
    pub fn from_judgment(judgment: &Judgment, predicted: impl Into<String>) -> Self {
        Self {
            judgment_id: judgment.id.clone(),
            gold_primary: judgment.primary_category.clone(),
            gold_alts: judgment.alt_categories.clone(),
            predicted: predicted.into(),
        }
    }

    fn hit(&self, methodology: Methodology) -> bool {
        match methodology {
            Methodology::OneToOne => self.predicted == self.gold_primary,
            Methodology::OneToThree => {
                self.predicted == self.gold_primary || self.gold_alts.contains(&self.predicted)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub category: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of documents whose primary label is this category.
    pub support: usize,
}

/// Wall-clock seconds of the pipeline stages feeding a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Timings {
    pub preprocess_secs: f64,
    pub train_secs: f64,
    pub predict_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub jurisdiction: String,
    pub methodology: Methodology,
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub weighted_recall: f64,
    pub per_category: Vec<CategoryMetrics>,
    /// Predictions outside the known label set (always misses).
    pub unknown_predictions: usize,
    pub timings: Option<Timings>,
}

/// Score a prediction set. Per-category rows are keyed by primary label
/// (plus any predicted-only labels with zero support); weighted averages use
/// primary-label supports. `known_categories`, when given, flags predictions
/// outside the jurisdiction's label set.
pub fn evaluate(
    records: &[PredictionRecord],
    methodology: Methodology,
    jurisdiction: &str,
    known_categories: Option<&[String]>,
    timings: Option<Timings>,
) -> Result<EvalReport> {
    if records.is_empty() {
        return Err(Error::EmptyPredictions);
    }

    let known: Option<std::collections::BTreeSet<&str>> =
        known_categories.map(|cats| cats.iter().map(String::as_str).collect());
    let mut unknown_predictions = 0usize;

    // category -> (support, true positives, predicted count, predicted hits)
    let mut ledger: BTreeMap<&str, (usize, usize, usize, usize)> = BTreeMap::new();
    let mut hits = 0usize;
    for record in records {
        let known_prediction = known
            .as_ref()
            .is_none_or(|k| k.contains(record.predicted.as_str()));
        if !known_prediction {
            unknown_predictions += 1;
        }
        let hit = known_prediction && record.hit(methodology);
        hits += usize::from(hit);

        let row = ledger.entry(record.gold_primary.as_str()).or_default();
        row.0 += 1;
        row.1 += usize::from(hit);

        let pred_row = ledger.entry(record.predicted.as_str()).or_default();
        pred_row.2 += 1;
        pred_row.3 += usize::from(hit);
    }

    let n = records.len();
    let accuracy = hits as f64 / n as f64;

    let mut per_category = Vec::with_capacity(ledger.len());
    let mut weighted_f1 = 0.0;
    let mut weighted_recall = 0.0;
    for (category, (support, tp, predicted, predicted_hits)) in &ledger {
        let recall = if *support > 0 {
            *tp as f64 / *support as f64
        } else {
            0.0
        };
        let precision = if *predicted > 0 {
            *predicted_hits as f64 / *predicted as f64
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let weight = *support as f64 / n as f64;
        weighted_f1 += weight * f1;
        weighted_recall += weight * recall;
        per_category.push(CategoryMetrics {
            category: (*category).to_string(),
            precision,
            recall,
            f1,
            support: *support,
        });
    }

    Ok(EvalReport {
        jurisdiction: jurisdiction.to_string(),
        methodology,
        accuracy,
        weighted_f1,
        weighted_recall,
        per_category,
        unknown_predictions,
        timings,
    })
}

impl EvalReport {
    /// Tab-separated per-category breakdown.
    pub fn per_category_tsv(&self) -> String {
        let mut out = String::from("category\tprecision\trecall\tf1\tsupport\n");
        for m in &self.per_category {
            out.push_str(&format!(
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}\n",
                m.category, m.precision, m.recall, m.f1, m.support
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(primary: &str, alts: &[&str], predicted: &str) -> PredictionRecord {
        PredictionRecord {
            judgment_id: format!("{primary}-{predicted}"),
            gold_primary: primary.into(),
            gold_alts: alts.iter().map(|s| s.to_string()).collect(),
            predicted: predicted.into(),
        }
    }

    #[test]
    fn perfect_predictions_score_one_everywhere() {
        let records = vec![
            record("a", &[], "a"),
            record("b", &["a"], "b"),
            record("a", &[], "a"),
        ];
        for methodology in [Methodology::OneToOne, Methodology::OneToThree] {
            let report = evaluate(&records, methodology, "jur", None, None).unwrap();
            assert_eq!(report.accuracy, 1.0);
            assert_eq!(report.weighted_f1, 1.0);
            assert_eq!(report.weighted_recall, 1.0);
        }
    }

    #[test]
    fn alternative_hit_counts_only_under_one_to_three() {
        let records = vec![record("a", &["b"], "b")];
        let one = evaluate(&records, Methodology::OneToOne, "jur", None, None).unwrap();
        assert_eq!(one.accuracy, 0.0);
        let three = evaluate(&records, Methodology::OneToThree, "jur", None, None).unwrap();
        assert_eq!(three.accuracy, 1.0);
        // The hit credits the primary category's recall row.
        let row_a = three
            .per_category
            .iter()
            .find(|m| m.category == "a")
            .unwrap();
        assert_eq!(row_a.recall, 1.0);
        assert_eq!(row_a.support, 1);
    }

    #[test]
    fn hand_confusion_matrix_arithmetic() {
        // 4 predictions, 3 hits, equal supports.
        let records = vec![
            record("a", &[], "a"),
            record("a", &[], "b"),
            record("b", &[], "b"),
            record("b", &[], "b"),
        ];
        let report = evaluate(&records, Methodology::OneToOne, "jur", None, None).unwrap();
        assert_eq!(report.accuracy, 0.75);
        assert_eq!(report.weighted_recall, 0.75);
        let row_a = report
            .per_category
            .iter()
            .find(|m| m.category == "a")
            .unwrap();
        assert_eq!(row_a.recall, 0.5);
        assert_eq!(row_a.precision, 1.0);
        let row_b = report
            .per_category
            .iter()
            .find(|m| m.category == "b")
            .unwrap();
        assert_eq!(row_b.recall, 1.0);
        assert!((row_b.precision - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_recall_equals_accuracy() {
        let records = vec![
            record("a", &[], "a"),
            record("a", &[], "c"),
            record("b", &["c"], "c"),
            record("c", &[], "c"),
            record("c", &[], "a"),
            record("b", &[], "b"),
        ];
        for methodology in [Methodology::OneToOne, Methodology::OneToThree] {
            let report = evaluate(&records, methodology, "jur", None, None).unwrap();
            assert!(
                (report.weighted_recall - report.accuracy).abs() < 1e-12,
                "structural identity under {methodology}"
            );
        }
    }

    #[test]
    fn one_to_three_never_below_one_to_one() {
        let records = vec![
            record("a", &["b"], "b"),
            record("a", &[], "a"),
            record("b", &["a", "c"], "c"),
            record("c", &[], "b"),
        ];
        let one = evaluate(&records, Methodology::OneToOne, "jur", None, None).unwrap();
        let three = evaluate(&records, Methodology::OneToThree, "jur", None, None).unwrap();
        assert!(three.accuracy >= one.accuracy);
    }

    #[test]
    fn unknown_prediction_is_a_flagged_miss() {
        let records = vec![record("a", &["zz"], "zz")];
        let known = vec!["a".to_string(), "b".to_string()];
        let report =
            evaluate(&records, Methodology::OneToThree, "jur", Some(&known), None).unwrap();
        assert_eq!(report.unknown_predictions, 1);
        assert_eq!(report.accuracy, 0.0, "unknown predictions never hit");
    }

    #[test]
    fn supports_sum_to_record_count() {
        let records = vec![
            record("a", &[], "b"),
            record("b", &[], "b"),
            record("c", &[], "d"),
        ];
        let report = evaluate(&records, Methodology::OneToOne, "jur", None, None).unwrap();
        let total: usize = report.per_category.iter().map(|m| m.support).sum();
        assert_eq!(total, 3);
        // Predicted-only category "d" appears with zero support.
        let row_d = report
            .per_category
            .iter()
            .find(|m| m.category == "d")
            .unwrap();
        assert_eq!(row_d.support, 0);
        assert_eq!(row_d.precision, 0.0);
    }

    #[test]
    fn empty_prediction_set_is_rejected() {
        assert!(matches!(
            evaluate(&[], Methodology::OneToOne, "jur", None, None),
            Err(Error::EmptyPredictions)
        ));
    }
}
