//! Assemble and render natural-language explanations.
//!
//! The candidate terms of an explanation are the bag terms of the predicted
//! category, restricted to expansions of relevant features actually observed
//! on this document's paths through the trees that agree with the forest
//! prediction, in bag-frequency order. The first up-to-`m_max` candidates
//! found in the expert dictionary become the relevant terms; the first
//! up-to-`p_max` candidates outside it become the "other terms".

use std::collections::BTreeSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Judgment;
use crate::error::{Error, Result};
use crate::explain::reconstruct::{reconstruct_term, Reconstruction};
use crate::explain::{relevant_features, trace_path, BagSet, ExpertDictionary};
use crate::featurize::{CountVector, FeatureKind, FeatureSpace};
use crate::trees::ForestModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Es,
    En,
}

impl FromStr for Language {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_lowercase().as_str() {
            "es" => Ok(Language::Es),
            "en" => Ok(Language::En),
            other => Err(format!("unknown language {other:?} (expected es or en)")),
        }
    }
}

/// Caps on the two term lists of an explanation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationCaps {
    pub m_max: usize,
    pub p_max: usize,
}

impl Default for ExplanationCaps {
    fn default() -> Self {
        Self {
            m_max: 16,
            p_max: 10,
        }
    }
}

/// One explained classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Explanation {
    pub judgment_id: String,
    pub jurisdiction: String,
    pub category: String,
    /// Dictionary-backed terms, bag-frequency order.
    pub dictionary_terms: Vec<String>,
    /// Remaining candidate terms, bag-frequency order, disjoint from the
    /// dictionary terms.
    pub other_terms: Vec<String>,
}

/// Explain one vectorized document. `dictionary` is optional: without one,
/// every candidate goes to the "other terms" list.
#[allow(clippy::too_many_arguments)]
pub fn explain_vector(
    forest: &ForestModel,
    space: &FeatureSpace,
    judgment_id: &str,
    jurisdiction: &str,
    vector: &CountVector,
    bags: &BagSet,
    dictionary: Option<&ExpertDictionary>,
    caps: ExplanationCaps,
) -> Result<Explanation> {
    if forest.feature_fingerprint() != space.fingerprint() {
        return Err(Error::FingerprintMismatch {
            model: forest.feature_fingerprint().to_string(),
            space: space.fingerprint(),
        });
    }
    let predicted = forest.predict(vector);
    let category = forest.categories()[predicted].clone();
    let bag = bags.get(&category).ok_or_else(|| Error::MissingBag {
        jurisdiction: jurisdiction.to_string(),
        category: category.clone(),
    })?;
    let expansion_of = bag.expansion_lookup();

    // Expansions of relevant features on this document's paths, restricted
    // to trees whose leaf agrees with the forest's decision.
    let mut document_terms: BTreeSet<String> = BTreeSet::new();
    for (tree_id, tree) in forest.trees.iter().enumerate() {
        let path = trace_path(tree, vector, tree_id);
        if path.leaf_category != predicted {
            continue;
        }
        for relevant in relevant_features(&path, tree) {
            let feature = space
                .feature(relevant.feature)
                .ok_or(Error::FeatureIndexOutOfRange {
                    index: relevant.feature,
                    size: space.len(),
                })?;
            match expansion_of.get(&(feature.kind, feature.text.as_str())) {
                Some(Some(term)) => {
                    document_terms.insert((*term).to_string());
                }
                Some(None) => {} // discarded during bag reconstruction
                None => {
                    // Feature never seen while building the bag: expand it
                    // against the bag's pool on the fly.
                    match feature.kind {
                        FeatureKind::Word => {
                            document_terms.insert(feature.text.clone());
                        }
                        FeatureKind::Char => {
                            if let Reconstruction::Term(term) =
                                reconstruct_term(&feature.text, &bag.pool)
                            {
                                document_terms.insert(term);
                            }
                        }
                    }
                }
            }
        }
    }

    let mut dictionary_terms = Vec::new();
    let mut other_terms = Vec::new();
    for (term, _) in &bag.terms {
        if !document_terms.contains(term) {
            continue;
        }
        match dictionary {
            Some(dict) if dict.contains(term) => {
                if dictionary_terms.len() < caps.m_max {
                    dictionary_terms.push(term.clone());
                }
            }
            _ => {
                if other_terms.len() < caps.p_max {
                    other_terms.push(term.clone());
                }
            }
        }
    }

    Ok(Explanation {
        judgment_id: judgment_id.to_string(),
        jurisdiction: jurisdiction.to_string(),
        category,
        dictionary_terms,
        other_terms,
    })
}

/// Explain a corpus judgment (id and jurisdiction taken from the record).
pub fn explain_judgment(
    forest: &ForestModel,
    judgment: &Judgment,
    vector: &CountVector,
    space: &FeatureSpace,
    bags: &BagSet,
    dictionary: Option<&ExpertDictionary>,
    caps: ExplanationCaps,
) -> Result<Explanation> {
    explain_vector(
        forest,
        space,
        &judgment.id,
        &judgment.jurisdiction,
        vector,
        bags,
        dictionary,
        caps,
    )
}

fn term_list(terms: &[String], empty_marker: &str) -> String {
    if terms.is_empty() {
        return empty_marker.to_string();
    }
    terms
        .iter()
        .map(|t| t.to_uppercase())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Instantiate the explanation template. Terms render uppercase; empty lists
/// render as "ninguno"/"none".
pub fn render_explanation(explanation: &Explanation, language: Language) -> String {
    let jurisdiction = explanation.jurisdiction.to_uppercase();
    let category = explanation.category.to_uppercase();
    match language {
        Language::Es => format!(
            "La clasificación de la sentencia {id} de la jurisdicción {jurisdiction} en el derecho {category} puede explicarse por los términos relevantes: {terms}. Otros términos tenidos en cuenta son {others}.",
            id = explanation.judgment_id,
            terms = term_list(&explanation.dictionary_terms, "ninguno"),
            others = term_list(&explanation.other_terms, "ninguno"),
        ),
        Language::En => format!(
            "The classification of the sentence {id} of jurisdiction {jurisdiction} in the law {category} can be explained by the relevant terms: {terms}. Other terms taken into account are: {others}.",
            id = explanation.judgment_id,
            terms = term_list(&explanation.dictionary_terms, "none"),
            others = term_list(&explanation.other_terms, "none"),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::{build_bags, import_dictionary, questionnaire};
    use crate::featurize::{fit_feature_space, FitOptions};
    use crate::trees::{train_forest, TrainingSet, TreeHyperparams};

    /// Word-only deterministic fixture: docs are shorter than the char
    /// window, the sorted-first perfect separator is "alimento", so the
    /// single tree provably routes familia documents RIGHT at the root.
    fn fixture() -> (
        ForestModel,
        FeatureSpace,
        Vec<CountVector>,
        Vec<&'static str>,
    ) {
        let docs = vec![
            "alimento custodia menor",
            "alimento custodia hijo",
            "clausula prestamo deuda",
            "clausula prestamo pago",
            "convenio salario jornada",
            "convenio salario despido",
        ];
        let labels = vec![
            "familia",
            "familia",
            "contratos",
            "contratos",
            "laboral",
            "laboral",
        ];
        let space = fit_feature_space(
            &docs,
            &FitOptions {
                char_n_min: 30,
                char_n_max: 30,
                min_df: 0.05,
                max_df: 0.50,
            },
        )
        .unwrap();
        let vectors: Vec<CountVector> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| space.vectorize(d, format!("d{i}")))
            .collect();
        let set = TrainingSet::from_space(vectors.clone(), &labels, &space).unwrap();
        let forest = train_forest(&set, &TreeHyperparams::default(), 1, false, 11).unwrap();
        (forest, space, vectors, labels)
    }

    #[test]
    fn planted_keyword_reaches_dictionary_terms() {
        let (forest, space, vectors, _) = fixture();
        let bags = build_bags(&forest, &space, &vectors, "civil", "train").unwrap();

        // Accept every presented familia term so the candidate list lands in
        // the dictionary bucket.
        let familia_bag = bags.get("familia").unwrap();
        let mut sheet = questionnaire(familia_bag, 50);
        for row in &mut sheet.rows {
            row.answer1 = Some(true);
            row.answer2 = Some(true);
        }
        let presented: Vec<String> = sheet.rows.iter().map(|r| r.term.clone()).collect();
        let dict = import_dictionary(&sheet, &presented).unwrap();

        let v = space.vectorize("alimento custodia menor", "query");
        let explanation = explain_vector(
            &forest,
            &space,
            "q-1",
            "civil",
            &v,
            &bags,
            Some(&dict),
            ExplanationCaps::default(),
        )
        .unwrap();
        assert_eq!(explanation.category, "familia");
        assert!(
            !explanation.dictionary_terms.is_empty(),
            "accepted terms should surface"
        );
        assert!(
            explanation
                .dictionary_terms
                .iter()
                .any(|t| t.contains("alimento")),
            "expected the planted keyword among {:?}",
            explanation.dictionary_terms
        );
        // Disjoint lists.
        for t in &explanation.dictionary_terms {
            assert!(!explanation.other_terms.contains(t));
        }
    }

    #[test]
    fn missing_dictionary_sends_terms_to_other() {
        let (forest, space, vectors, _) = fixture();
        let bags = build_bags(&forest, &space, &vectors, "civil", "train").unwrap();
        let v = space.vectorize("alimento custodia menor", "query");
        let explanation = explain_vector(
            &forest,
            &space,
            "q-2",
            "civil",
            &v,
            &bags,
            None,
            ExplanationCaps::default(),
        )
        .unwrap();
        assert!(explanation.dictionary_terms.is_empty());
        assert!(!explanation.other_terms.is_empty());
    }

    #[test]
    fn all_left_paths_render_empty_term_lists() {
        // laboral sits on the all-LEFT side of both splits of the fixture
        // tree, so a laboral document has no relevant features at all.
        let (forest, space, vectors, _) = fixture();
        let bags = build_bags(&forest, &space, &vectors, "civil", "train").unwrap();
        let v = space.vectorize("convenio salario jornada", "query");
        let explanation = explain_vector(
            &forest,
            &space,
            "q-empty",
            "civil",
            &v,
            &bags,
            None,
            ExplanationCaps::default(),
        )
        .unwrap();
        assert_eq!(explanation.category, "laboral");
        assert!(explanation.dictionary_terms.is_empty());
        assert!(explanation.other_terms.is_empty());
        let rendered = render_explanation(&explanation, Language::Es);
        assert!(rendered.contains("términos relevantes: ninguno."));
    }

    #[test]
    fn missing_bag_is_an_error() {
        let (forest, space, vectors, _) = fixture();
        let mut bags = build_bags(&forest, &space, &vectors, "civil", "train").unwrap();
        bags.bags.retain(|b| b.category != "familia");
        let v = space.vectorize("alimento custodia menor", "query");
        assert!(matches!(
            explain_vector(
                &forest,
                &space,
                "q-3",
                "civil",
                &v,
                &bags,
                None,
                ExplanationCaps::default(),
            ),
            Err(Error::MissingBag { .. })
        ));
    }

    #[test]
    fn caps_bound_both_lists() {
        let (forest, space, vectors, _) = fixture();
        let bags = build_bags(&forest, &space, &vectors, "civil", "train").unwrap();
        let v = space.vectorize("alimento custodia menor", "query");
        let explanation = explain_vector(
            &forest,
            &space,
            "q-4",
            "civil",
            &v,
            &bags,
            None,
            ExplanationCaps {
                m_max: 16,
                p_max: 2,
            },
        )
        .unwrap();
        assert!(explanation.other_terms.len() <= 2);
    }

    #[test]
    fn spanish_template_matches_byte_for_byte() {
        let explanation = Explanation {
            judgment_id: "90483".into(),
            jurisdiction: "administrativo".into(),
            category: "derecho administrativo".into(),
            dictionary_terms: vec!["contrato".into()],
            other_terms: vec!["ejecucion".into()],
        };
        let text = render_explanation(&explanation, Language::Es);
        assert_eq!(
            text,
            "La clasificación de la sentencia 90483 de la jurisdicción ADMINISTRATIVO en el derecho DERECHO ADMINISTRATIVO puede explicarse por los términos relevantes: CONTRATO. Otros términos tenidos en cuenta son EJECUCION."
        );
    }

    #[test]
    fn english_template_has_fixed_prefix() {
        let explanation = Explanation {
            judgment_id: "1".into(),
            jurisdiction: "civil".into(),
            category: "familia".into(),
            dictionary_terms: vec![],
            other_terms: vec![],
        };
        let text = render_explanation(&explanation, Language::En);
        assert!(text.starts_with("The classification of the sentence"));
        assert!(text.contains("none"));
    }

    #[test]
    fn empty_lists_render_ninguno() {
        let explanation = Explanation {
            judgment_id: "x".into(),
            jurisdiction: "civil".into(),
            category: "familia".into(),
            dictionary_terms: vec![],
            other_terms: vec![],
        };
        let text = render_explanation(&explanation, Language::Es);
        assert!(text.contains("términos relevantes: ninguno."));
        assert!(text.contains("en cuenta son ninguno."));
    }
}
