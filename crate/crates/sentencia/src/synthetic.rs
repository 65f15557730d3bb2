//! Seeded synthetic corpus generator.
//!
//! Real judgment corpora are proprietary, so benchmarks and demos run on
//! generated ones: each category plants a few high-frequency keywords inside
//! shared legal boilerplate, with stop words, accents and casing jitter so
//! the full normalization pipeline has something to do. Precedents and
//! decision sections are filled with decoy text (including other categories'
//! keywords) precisely because the classifier must never read them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Judgment;
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct SyntheticCategory {
    pub name: String,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub jurisdiction: String,
    pub categories: Vec<SyntheticCategory>,
    pub docs_per_category: usize,
    pub noise_vocabulary: Vec<String>,
    pub noise_tokens_per_doc: usize,
    /// Chance a document carries one stray keyword of another category.
    pub cross_talk_probability: f64,
    /// Chance of one / two alternative labels.
    pub alt_one_probability: f64,
    pub alt_two_probability: f64,
    pub seed: u64,
}

const NOISE_WORDS: &[&str] = &[
    "procedimiento",
    "resolucion",
    "tribunal",
    "juzgado",
    "articulo",
    "apartado",
    "fundamento",
    "alegacion",
    "documento",
    "escrito",
    "actora",
    "letrado",
    "procurador",
    "ponente",
    "magistrado",
    "sala",
    "seccion",
    "instancia",
    "apelacion",
    "recurso",
    "auto",
    "providencia",
    "diligencia",
    "tramite",
    "plazo",
    "termino",
    "notificacion",
    "citacion",
    "emplazamiento",
    "comparecencia",
    "vista",
    "audiencia",
    "prueba",
    "testigo",
    "perito",
    "informe",
    "dictamen",
    "acta",
    "certificacion",
    "registro",
    "expediente",
    "folio",
    "anexo",
    "copia",
    "original",
    "traslado",
    "alegato",
    "conclusion",
    "fallo",
    "pronunciamiento",
    "costas",
    "cuantia",
    "fecha",
    "numero",
    "orden",
    "letra",
    "parrafo",
    "inciso",
    "norma",
    "precepto",
    "disposicion",
    "vigente",
    "aplicable",
    "criterio",
    "doctrina",
    "jurisprudencia",
    "fundamentacion",
    "motivacion",
    "razonamiento",
    "valoracion",
    "apreciacion",
    "estimacion",
    "desestimacion",
    "admision",
    "inadmision",
    "subsanacion",
    "requerimiento",
    "apercibimiento",
    "oficio",
    "actuacion",
];

const STOP_FILLERS: &[&str] = &["de", "la", "el", "en", "que", "los", "por", "con"];

/// The accented surface form some noise words are emitted with, exercising
/// diacritic stripping end to end.
fn accented_variant(word: &str) -> Option<&'static str> {
    Some(match word {
        "resolucion" => "resolución",
        "articulo" => "artículo",
        "termino" => "término",
        "seccion" => "sección",
        "apelacion" => "apelación",
        "notificacion" => "notificación",
        "certificacion" => "certificación",
        "conclusion" => "conclusión",
        "cuantia" => "cuantía",
        "numero" => "número",
        "parrafo" => "párrafo",
        "admision" => "admisión",
        _ => return None,
    })
}

/// Five categories with three planted keywords each over a shared noise
/// vocabulary.
pub fn default_spec(seed: u64) -> SyntheticSpec {
    let category = |name: &str, keywords: [&str; 3]| SyntheticCategory {
        name: name.to_string(),
        keywords: keywords.iter().map(|k| k.to_string()).collect(),
    };
    SyntheticSpec {
        jurisdiction: "sintetica".to_string(),
        categories: vec![
            category("derecho de familia", ["divorcio", "custodia", "progenitor"]),
            category("derecho de contratos", ["hipoteca", "clausula", "prestamo"]),
            category("derecho laboral", ["despido", "salario", "convenio"]),
            category("derecho penal", ["estafa", "condena", "atenuante"]),
            category("derecho fiscal", ["impuesto", "gravamen", "liquidacion"]),
        ],
        docs_per_category: 200,
        noise_vocabulary: NOISE_WORDS.iter().map(|w| w.to_string()).collect(),
        noise_tokens_per_doc: 30,
        cross_talk_probability: 0.3,
        alt_one_probability: 0.33,
        alt_two_probability: 0.08,
        seed,
    }
}

fn jitter_token(token: &str, rng: &mut ChaCha8Rng) -> String {
    let surface = match accented_variant(token) {
        Some(accented) if rng.gen_bool(0.5) => accented,
        _ => token,
    };
    if rng.gen_bool(0.05) {
        surface.to_uppercase()
    } else if rng.gen_bool(0.1) {
        let mut chars = surface.chars();
        match chars.next() {
            Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
            None => String::new(),
        }
    } else {
        surface.to_string()
    }
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() { c } else { '-' })
        .collect()
}

/// Generate the corpus described by `spec`, deterministically for its seed.
pub fn generate(spec: &SyntheticSpec) -> Vec<Judgment> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut judgments = Vec::new();
    for (category_idx, category) in spec.categories.iter().enumerate() {
        for doc_idx in 0..spec.docs_per_category {
            let mut tokens: Vec<String> = Vec::new();
            for keyword in &category.keywords {
                let repeats = 2 + rng.gen_range(0..3);
                for _ in 0..repeats {
                    tokens.push(keyword.clone());
                }
            }
            if spec.categories.len() > 1 && rng.gen_bool(spec.cross_talk_probability) {
                let other = pick_other(&mut rng, spec.categories.len(), category_idx);
                let stray = spec.categories[other]
                    .keywords
                    .choose(&mut rng)
                    .expect("categories have keywords");
                tokens.push(stray.clone());
            }
            for _ in 0..spec.noise_tokens_per_doc {
                let word = spec
                    .noise_vocabulary
                    .choose(&mut rng)
                    .expect("noise vocabulary is non-empty");
                tokens.push(word.clone());
                if rng.gen_bool(0.2) {
                    tokens.push(STOP_FILLERS.choose(&mut rng).unwrap().to_string());
                }
            }
            tokens.shuffle(&mut rng);
            let rendered: Vec<String> = tokens.iter().map(|t| jitter_token(t, &mut rng)).collect();
            let cut = rendered.len() * 3 / 10;
            let header = rendered[..cut].join(" ");
            let fundamentals = rendered[cut..].join(" ");

            // Decoy sections: stuffed with a competing category's keywords.
            let precedents = if spec.categories.len() > 1 && rng.gen_bool(0.5) {
                let other = pick_other(&mut rng, spec.categories.len(), category_idx);
                Some(format!(
                    "antecedentes {} {}",
                    spec.categories[other].keywords.join(" "),
                    spec.categories[other].keywords.join(" "),
                ))
            } else {
                None
            };
            let decision = if rng.gen_bool(0.5) {
                Some("se estima la demanda".to_string())
            } else {
                None
            };

            let mut alt_categories = Vec::new();
            if spec.categories.len() > 1 {
                let roll: f64 = rng.gen();
                let alts = if roll < spec.alt_two_probability {
                    2
                } else if roll < spec.alt_two_probability + spec.alt_one_probability {
                    1
                } else {
                    0
                };
                while alt_categories.len() < alts.min(spec.categories.len() - 1) {
                    let other = pick_other(&mut rng, spec.categories.len(), category_idx);
                    let name = &spec.categories[other].name;
                    if !alt_categories.contains(name) {
                        alt_categories.push(name.clone());
                    }
                }
            }

            judgments.push(Judgment {
                id: format!("{}-{doc_idx:04}", slug(&category.name)),
                jurisdiction: spec.jurisdiction.clone(),
                header,
                precedents,
                fundamentals,
                decision,
                primary_category: category.name.clone(),
                alt_categories,
            });
        }
    }
    judgments
}

fn pick_other(rng: &mut ChaCha8Rng, n: usize, not: usize) -> usize {
    loop {
        let candidate = rng.gen_range(0..n);
        if candidate != not {
            return candidate;
        }
    }
}

/// Write judgments as a line-delimited corpus file.
pub fn write_jsonl(path: impl AsRef<Path>, judgments: &[Judgment]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for judgment in judgments {
        serde_json::to_writer(&mut writer, judgment)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ingest_corpus;

    #[test]
    fn generation_is_deterministic() {
        let spec = default_spec(42);
        assert_eq!(generate(&spec), generate(&spec));
        let other = default_spec(43);
        assert_ne!(generate(&spec), generate(&other));
    }

    #[test]
    fn generated_corpus_ingests_cleanly() {
        let mut spec = default_spec(7);
        spec.docs_per_category = 10;
        let judgments = generate(&spec);
        assert_eq!(judgments.len(), 50);
        let mut buffer = Vec::new();
        for j in &judgments {
            buffer.extend_from_slice(serde_json::to_string(j).unwrap().as_bytes());
            buffer.push(b'\n');
        }
        let datasets = ingest_corpus(buffer.as_slice()).unwrap();
        assert_eq!(datasets.len(), 1);
        assert_eq!(datasets[0].len(), 50);
        assert!(datasets[0].category_counts.values().all(|&c| c == 10));
    }

    #[test]
    fn keywords_land_in_classification_text_only_decoys_elsewhere() {
        let mut spec = default_spec(3);
        spec.docs_per_category = 20;
        let judgments = generate(&spec);
        for j in judgments
            .iter()
            .filter(|j| j.primary_category == "derecho de familia")
        {
            let text = j.classification_text().to_lowercase();
            assert!(
                text.contains("divorcio"),
                "planted keyword must appear in header+fundamentals"
            );
        }
        // At least one decoy precedents section carries foreign keywords.
        assert!(judgments.iter().any(|j| j
            .precedents
            .as_deref()
            .is_some_and(|p| p.contains("antecedentes"))));
    }
}
