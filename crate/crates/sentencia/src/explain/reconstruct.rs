//! Char-gram term reconstruction.
//!
//! Char-grams are hard to read, so each one is expanded to the most
//! noteworthy feature it plausibly came from: the longest word-gram in the
//! pool containing it, else the longest strictly-longer char-gram, else it
//! stands as its own term. Char-grams under four characters are discarded.

use serde::{Deserialize, Serialize};

use crate::featurize::FeatureKind;

/// Char-grams shorter than this are discarded outright.
pub const MIN_CHAR_GRAM_CHARS: usize = 4;

/// One relevant feature with its accumulated path frequency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub kind: FeatureKind,
    pub text: String,
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reconstruction {
    /// The expanded term (possibly the char-gram itself when nothing in the
    /// pool contains it).
    Term(String),
    /// Shorter than four characters.
    Discarded,
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Pick the best container among candidates: longest text, then highest
/// frequency, then lexicographically smallest text.
fn best_candidate(pool: &[PoolEntry], accept: impl Fn(&PoolEntry) -> bool) -> Option<&PoolEntry> {
    let mut best: Option<(&PoolEntry, usize)> = None;
    for entry in pool {
        if !accept(entry) {
            continue;
        }
        let len = char_len(&entry.text);
        let better = match best {
            None => true,
            Some((current, current_len)) => {
                (len, entry.frequency, std::cmp::Reverse(&entry.text))
                    > (
                        current_len,
                        current.frequency,
                        std::cmp::Reverse(&current.text),
                    )
            }
        };
        if better {
            best = Some((entry, len));
        }
    }
    best.map(|(entry, _)| entry)
}

/// Index of the reconstruction target of `pool[index]` within the pool, or
/// `None` when the char-gram stands as its own term. Caller guarantees the
/// entry is a char-gram of four or more characters.
pub(crate) fn target_in_pool(pool: &[PoolEntry], index: usize) -> Option<usize> {
    let text = &pool[index].text;
    let len = char_len(text);
    let word = best_candidate(pool, |e| {
        e.kind == FeatureKind::Word && e.text.contains(text.as_str())
    });
    let target = word.or_else(|| {
        best_candidate(pool, |e| {
            e.kind == FeatureKind::Char && char_len(&e.text) > len && e.text.contains(text.as_str())
        })
    })?;
    pool.iter()
        .position(|e| e.kind == target.kind && e.text == target.text)
}

/// Expand one char-gram against a relevant-feature pool.
///
/// Substeps, in order: (1) discard under four characters; (2) the longest
/// word-gram/biword-gram containing the char-gram; (3) the longest strictly
/// longer char-gram containing it; (4) with no container, the char-gram is
/// its own term. Length ties break toward higher frequency, then
/// lexicographic order.
pub fn reconstruct_term(char_gram: &str, pool: &[PoolEntry]) -> Reconstruction {
    let len = char_len(char_gram);
    if len < MIN_CHAR_GRAM_CHARS {
        return Reconstruction::Discarded;
    }
    let word = best_candidate(pool, |e| {
        e.kind == FeatureKind::Word && e.text.contains(char_gram)
    });
    let target = word.or_else(|| {
        best_candidate(pool, |e| {
            e.kind == FeatureKind::Char && char_len(&e.text) > len && e.text.contains(char_gram)
        })
    });
    match target {
        Some(entry) => Reconstruction::Term(entry.text.clone()),
        None => Reconstruction::Term(char_gram.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(text: &str, frequency: u64) -> PoolEntry {
        PoolEntry {
            kind: FeatureKind::Word,
            text: text.into(),
            frequency,
        }
    }

    fn chargram(text: &str, frequency: u64) -> PoolEntry {
        PoolEntry {
            kind: FeatureKind::Char,
            text: text.into(),
            frequency,
        }
    }

    #[test]
    fn hipotec_expands_to_hipotecario() {
        let pool = vec![word("hipotecario", 4), chargram("hipotec", 9)];
        assert_eq!(
            reconstruct_term("hipotec", &pool),
            Reconstruction::Term("hipotecario".into())
        );
        assert_eq!(
            reconstruct_term("ecario", &pool),
            Reconstruction::Term("hipotecario".into())
        );
    }

    #[test]
    fn short_char_grams_are_discarded() {
        let pool = vec![word("abcdef", 1)];
        assert_eq!(reconstruct_term("abc", &pool), Reconstruction::Discarded);
        assert_eq!(
            reconstruct_term("abcd", &pool),
            Reconstruction::Term("abcdef".into())
        );
    }

    #[test]
    fn falls_back_to_longer_char_gram() {
        let pool = vec![chargram("ecario ", 2), chargram("ecari", 5)];
        assert_eq!(
            reconstruct_term("ecari", &pool),
            Reconstruction::Term("ecario ".into())
        );
    }

    #[test]
    fn no_container_stands_as_own_term() {
        let pool = vec![word("nada", 1), chargram("otra", 1)];
        assert_eq!(
            reconstruct_term("juez", &pool),
            Reconstruction::Term("juez".into())
        );
    }

    #[test]
    fn word_grams_beat_char_grams_even_when_shorter() {
        // Substep 2 runs before substep 3: a containing word-gram wins over a
        // longer containing char-gram.
        let pool = vec![word("pension", 1), chargram("pensiones x", 50)];
        assert_eq!(
            reconstruct_term("pensi", &pool),
            Reconstruction::Term("pension".into())
        );
    }

    #[test]
    fn ties_break_by_length_then_frequency_then_text() {
        // Same length: higher frequency wins.
        let pool = vec![word("contrato x", 2), word("contrato y", 7)];
        assert_eq!(
            reconstruct_term("contrato", &pool),
            Reconstruction::Term("contrato y".into())
        );
        // Same length and frequency: lexicographically smaller wins.
        let pool = vec![word("contrato y", 3), word("contrato x", 3)];
        assert_eq!(
            reconstruct_term("contrato", &pool),
            Reconstruction::Term("contrato x".into())
        );
    }

    #[test]
    fn containment_is_contiguous_substring() {
        let pool = vec![word("hipoteca legal", 1)];
        assert_eq!(
            reconstruct_term("calegal", &pool),
            Reconstruction::Term("calegal".into()),
            "no contiguous match, stands alone"
        );
        assert_eq!(
            reconstruct_term("a legal", &pool),
            Reconstruction::Term("hipoteca legal".into()),
            "matches across the space"
        );
    }
}
