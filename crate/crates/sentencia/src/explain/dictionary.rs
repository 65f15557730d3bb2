//! Expert-in-the-loop questionnaire sheets and dictionaries.
//!
//! The top bag terms are exported as a tab-separated sheet with two yes/no
//! questions per term. A term enters the dictionary only when the expert
//! answers yes to both. The full audit trail is retained so per-category
//! acceptance rates stay reportable.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::CategoryBag;

pub const QUESTION_ONE: &str = "Is this term relevant in legal texts?";

/// Question #2 with the category and jurisdiction substituted.
pub fn question_two(category: &str, jurisdiction: &str) -> String {
    format!(
        "Is this term relevant to the law category {category} pertaining to the jurisdiction {jurisdiction}?"
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetRow {
    pub term: String,
    pub frequency: u64,
    pub answer1: Option<bool>,
    pub answer2: Option<bool>,
}

/// A questionnaire sheet: the top-k bag terms awaiting (or carrying) expert
/// answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSheet {
    pub jurisdiction: String,
    pub category: String,
    pub rows: Vec<SheetRow>,
}

/// Export the top `k` bag terms (all of them when the bag is smaller) as an
/// answer sheet, in descending bag-frequency order.
pub fn questionnaire(bag: &CategoryBag, k: usize) -> TermSheet {
    TermSheet {
        jurisdiction: bag.jurisdiction.clone(),
        category: bag.category.clone(),
        rows: bag
            .terms
            .iter()
            .take(k)
            .map(|(term, frequency)| SheetRow {
                term: term.clone(),
                frequency: *frequency,
                answer1: None,
                answer2: None,
            })
            .collect(),
    }
}

impl TermSheet {
    /// Tab-separated sheet with commented header lines carrying the
    /// jurisdiction, category and both question texts. Answer cells are empty
    /// until filled in with yes/no (localized "sí"/"no" accepted).
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# jurisdiction: {}\n", self.jurisdiction));
        out.push_str(&format!("# category: {}\n", self.category));
        out.push_str(&format!("# question1: {QUESTION_ONE}\n"));
        out.push_str(&format!(
            "# question2: {}\n",
            question_two(&self.category, &self.jurisdiction)
        ));
        out.push_str("# term\tfrequency\tanswer1\tanswer2\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                row.term,
                row.frequency,
                answer_str(row.answer1),
                answer_str(row.answer2),
            ));
        }
        out
    }

    pub fn parse_tsv(content: &str) -> Result<TermSheet> {
        let mut jurisdiction = None;
        let mut category = None;
        let mut rows = Vec::new();
        for (idx, line) in content.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(value) = rest.strip_prefix("jurisdiction:") {
                    jurisdiction = Some(value.trim().to_string());
                } else if let Some(value) = rest.strip_prefix("category:") {
                    category = Some(value.trim().to_string());
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 {
                return Err(Error::MalformedSheet {
                    line: line_no,
                    problem: "expected term<TAB>frequency<TAB>answer1<TAB>answer2".into(),
                });
            }
            let frequency = fields[1]
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::MalformedSheet {
                    line: line_no,
                    problem: format!("bad frequency {:?}: {e}", fields[1]),
                })?;
            let answer1 = parse_answer(fields.get(2).copied().unwrap_or(""), line_no)?;
            let answer2 = parse_answer(fields.get(3).copied().unwrap_or(""), line_no)?;
            rows.push(SheetRow {
                term: fields[0].trim().to_string(),
                frequency,
                answer1,
                answer2,
            });
        }
        Ok(TermSheet {
            jurisdiction: jurisdiction.unwrap_or_default(),
            category: category.unwrap_or_default(),
            rows,
        })
    }

    pub fn load_tsv(path: impl AsRef<Path>) -> Result<TermSheet> {
        Self::parse_tsv(&fs::read_to_string(path)?)
    }
}

fn answer_str(answer: Option<bool>) -> &'static str {
    match answer {
        Some(true) => "yes",
        Some(false) => "no",
        None => "",
    }
}

fn parse_answer(cell: &str, line: usize) -> Result<Option<bool>> {
    let cell = cell.trim().to_lowercase();
    match cell.as_str() {
        "" => Ok(None),
        "yes" | "si" | "sí" | "y" => Ok(Some(true)),
        "no" | "n" => Ok(Some(false)),
        other => Err(Error::MalformedSheet {
            line,
            problem: format!("unrecognized answer {other:?} (expected yes/no)"),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRow {
    pub term: String,
    pub question1: bool,
    pub question2: bool,
}

/// Validated expert dictionary: the accepted terms plus the full audit trail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertDictionary {
    pub jurisdiction: String,
    pub category: String,
    pub accepted: BTreeSet<String>,
    pub audit: Vec<AuditRow>,
}

impl ExpertDictionary {
    pub fn contains(&self, term: &str) -> bool {
        self.accepted.contains(term)
    }

    /// Percentage of yes answers to each question, as reported per category.
    pub fn acceptance_rates(&self) -> (f64, f64) {
        if self.audit.is_empty() {
            return (0.0, 0.0);
        }
        let n = self.audit.len() as f64;
        let q1 = self.audit.iter().filter(|r| r.question1).count() as f64;
        let q2 = self.audit.iter().filter(|r| r.question2).count() as f64;
        (100.0 * q1 / n, 100.0 * q2 / n)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Turn an answered sheet into a dictionary. Every presented term must appear
/// exactly once with both questions answered; a term is accepted only when
/// both answers are yes.
pub fn import_dictionary(sheet: &TermSheet, presented: &[String]) -> Result<ExpertDictionary> {
    let presented_set: BTreeSet<&str> = presented.iter().map(String::as_str).collect();
    for row in &sheet.rows {
        if !presented_set.contains(row.term.as_str()) {
            return Err(Error::UnknownTerm {
                term: row.term.clone(),
            });
        }
    }
    let answered: BTreeSet<&str> = sheet.rows.iter().map(|r| r.term.as_str()).collect();
    for term in &presented_set {
        if !answered.contains(term) {
            return Err(Error::SheetTermMissing {
                term: (*term).to_string(),
            });
        }
    }

    let mut accepted = BTreeSet::new();
    let mut audit = Vec::with_capacity(sheet.rows.len());
    for row in &sheet.rows {
        let (Some(question1), Some(question2)) = (row.answer1, row.answer2) else {
            return Err(Error::UnansweredRow {
                term: row.term.clone(),
            });
        };
        if question1 && question2 {
            accepted.insert(row.term.clone());
        }
        audit.push(AuditRow {
            term: row.term.clone(),
            question1,
            question2,
        });
    }
    Ok(ExpertDictionary {
        jurisdiction: sheet.jurisdiction.clone(),
        category: sheet.category.clone(),
        accepted,
        audit,
    })
}
