//! Nearest-neighbour token replacement over a word-embedding table.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use super::embeddings::EmbeddingTable;
use crate::corpus::{ClinicalNote, EntityCategory};
use crate::text::fold_str;

pub const UNK_TOKEN: &str = "⟨UNK⟩";
pub const NUM_TOKEN: &str = "⟨NUM⟩";

/// Most cosine-similar entry to `token`, never `token` itself (compared
/// case-insensitively). Ties go to the lexicographically smallest entry.
pub fn nearest_neighbor(token: &str, table: &EmbeddingTable) -> String {
    match table.lookup(token) {
        Some(row) => nearest_row(row, table)
            .map(|r| table.token(r).to_string())
            .unwrap_or_else(|| UNK_TOKEN.to_string()),
        None => UNK_TOKEN.to_string(),
    }
}

fn nearest_row(row: usize, table: &EmbeddingTable) -> Option<usize> {
    let query = table.unit(row);
    let own = table.folded_token(row);
    let mut best: Option<(f64, usize)> = None;
    for r in 0..table.len() {
        if table.folded_token(r) == own {
            continue;
        }
        let cos: f64 = query.iter().zip(table.unit(r)).map(|(a, b)| a * b).sum();
        best = match best {
            Some((c, b)) if c > cos || (c == cos && table.token(b) <= table.token(r)) => Some((c, b)),
            _ => Some((cos, r)),
        };
    }
    best.map(|(_, r)| r)
}

/// Splits `token` into (leading punctuation, core, trailing punctuation).
fn detach(token: &str) -> (&str, &str, &str) {
    let start = token.find(char::is_alphanumeric).unwrap_or(token.len());
    let end = token
        .rfind(char::is_alphanumeric)
        .map(|i| i + token[i..].chars().next().map_or(0, char::len_utf8))
        .unwrap_or(start);
    (&token[..start], &token[start..end], &token[end..])
}

fn is_numeric(core: &str) -> bool {
    core.chars().any(|c| c.is_ascii_digit() || c.is_numeric()) && !core.chars().any(char::is_alphabetic)
}

fn rewrite(text: &str, mut replace: impl FnMut(&str) -> String) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while !rest.is_empty() {
        let ws = rest.find(|c: char| !c.is_whitespace()).unwrap_or(rest.len());
        out.push_str(&rest[..ws]);
        rest = &rest[ws..];
        let tok = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let (lead, core, trail) = detach(&rest[..tok]);
        out.push_str(lead);
        if !core.is_empty() {
            if is_numeric(core) {
                out.push_str(NUM_TOKEN);
            } else {
                out.push_str(&replace(core));
            }
        }
        out.push_str(trail);
        rest = &rest[tok..];
    }
    out
}

/// Replaces every word of `text` with its nearest neighbour. Whitespace and
/// edge punctuation are kept; digit-only words become [`NUM_TOKEN`].
pub fn kneo_anonymize(text: &str, table: &EmbeddingTable) -> String {
    rewrite(text, |core| nearest_neighbor(core, table))
}

/// Shareable KNEO anonymizer that memoizes neighbour lookups.
#[derive(Debug)]
pub struct Kneo {
    table: EmbeddingTable,
    cache: Mutex<HashMap<String, String>>,
}

impl Kneo {
    pub fn new(table: EmbeddingTable) -> Self {
        Kneo {
            table,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn table(&self) -> &EmbeddingTable {
        &self.table
    }

    pub fn apply(&self, text: &str) -> String {
        rewrite(text, |core| {
            if let Some(hit) = self.cache.lock().expect("cache poisoned").get(core) {
                return hit.clone();
            }
            let nn = nearest_neighbor(core, &self.table);
            self.cache
                .lock()
                .expect("cache poisoned")
                .insert(core.to_string(), nn.clone());
            nn
        })
    }
}

/// Word groups for [`toy_embeddings`](super::toy_embeddings) drawn from a
/// corpus: one group per entity category and word position (first word vs.
/// the rest), then every remaining word.
pub fn corpus_embedding_groups(notes: &[ClinicalNote]) -> Vec<Vec<String>> {
    let mut groups: Vec<Vec<String>> = vec![Vec::new(); EntityCategory::ALL.len() * 2 + 1];
    let prose = groups.len() - 1;
    let mut seen = HashSet::new();
    let words = |text: &str| -> Vec<String> {
        text.split_whitespace()
            .map(|t| detach(t).1.to_string())
            .filter(|core| !core.is_empty() && !is_numeric(core))
            .collect()
    };
    for note in notes {
        for a in note.annotations() {
            for (i, w) in words(&a.entity_text).into_iter().enumerate() {
                let g = a.category.index() * 2 + usize::from(i > 0);
                if seen.insert(fold_str(&w)) {
                    groups[g].push(w);
                }
            }
        }
    }
    for note in notes {
        for w in words(note.text()) {
            if seen.insert(fold_str(&w)) {
                groups[prose].push(w);
            }
        }
    }
    groups.retain(|g| !g.is_empty());
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(rows: &[(&str, &[f64])]) -> EmbeddingTable {
        let dim = rows[0].1.len();
        EmbeddingTable::new(dim, rows.iter().map(|(t, v)| (t.to_string(), v.to_vec())).collect()).unwrap()
    }

    fn cat_dog_mouse() -> EmbeddingTable {
        table(&[("cat", &[1.0, 0.1]), ("dog", &[0.9, 0.2]), ("mouse", &[0.1, 1.0])])
    }

    #[test]
    fn cat_maps_to_dog() {
        let t = cat_dog_mouse();
        let cos = |a: &[f64], b: &[f64]| {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            dot / (a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt())
        };
        assert!(cos(&[1.0, 0.1], &[0.9, 0.2]) > cos(&[1.0, 0.1], &[0.1, 1.0]));
        assert_eq!(nearest_neighbor("cat", &t), "dog");
        assert_eq!(nearest_neighbor("Cat", &t), "dog");
        assert_eq!(nearest_neighbor("mouse", &t), "dog");
    }

    #[test]
    fn oov_is_unk() {
        assert_eq!(nearest_neighbor("giraffe", &cat_dog_mouse()), UNK_TOKEN);
    }

    #[test]
    fn self_is_excluded() {
        // "cat" is its own nearest point; the runner-up is returned
        let t = table(&[("cat", &[1.0, 0.0]), ("kitten", &[0.8, 0.6]), ("car", &[0.0, 1.0])]);
        assert_eq!(nearest_neighbor("cat", &t), "kitten");
    }

    #[test]
    fn ties_break_lexicographically() {
        let t = table(&[("x", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("a", &[0.0, 2.0])]);
        assert_eq!(nearest_neighbor("x", &t), "a");
    }

    #[test]
    fn punctuation_and_numbers() {
        let t = table(&[("dr", &[1.0, 0.0]), ("mr", &[0.9, 0.1]), ("reis", &[0.0, 1.0]), ("silva", &[0.1, 0.9])]);
        assert_eq!(kneo_anonymize("Dr. Reis, 2019.", &t), "mr. silva, ⟨NUM⟩.");
        assert_eq!(kneo_anonymize("  (555-1234)\n", &t), "  (⟨NUM⟩)\n");
        assert_eq!(kneo_anonymize("MRN-12 -- x@y.org", &t), "⟨UNK⟩ -- ⟨UNK⟩");
        assert_eq!(kneo_anonymize("", &t), "");
    }

    #[test]
    fn memoized_matches_plain() {
        let t = table(&[("dr", &[1.0, 0.0]), ("mr", &[0.9, 0.1]), ("reis", &[0.0, 1.0]), ("silva", &[0.1, 0.9])]);
        let k = Kneo::new(t.clone());
        let text = "Dr. Reis met Mr. Silva; Dr. Reis left.";
        assert_eq!(k.apply(text), kneo_anonymize(text, &t));
        assert_eq!(k.apply(text), kneo_anonymize(text, &t));
    }

    fn brute(token: &str, rows: &[(String, Vec<f64>)]) -> String {
        let folded = token.to_lowercase();
        let Some(q) = rows.iter().find(|(t, _)| t == token).or_else(|| rows.iter().find(|(t, _)| t.to_lowercase() == folded)) else {
            return UNK_TOKEN.to_string();
        };
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut scored: Vec<(f64, &str)> = rows
            .iter()
            .filter(|(t, _)| t.to_lowercase() != folded)
            .map(|(t, v)| {
                let c = q.1.iter().map(|x| x / norm(&q.1)).zip(v.iter().map(|x| x / norm(v))).map(|(a, b)| a * b).sum();
                (c, t.as_str())
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
        scored.first().map_or(UNK_TOKEN.to_string(), |s| s.1.to_string())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn agrees_with_exhaustive_scan(seed in any::<u64>(), n in 2usize..=1000, dim in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
            for i in 0..n {
                // small integer grid so exact ties occur
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
                if v.iter().all(|x| *x == 0.0) {
                    continue;
                }
                rows.push((format!("w{:04}", (i * 7919) % 10007), v));
            }
            prop_assume!(rows.len() >= 2);
            let t = EmbeddingTable::new(dim, rows.clone()).unwrap();
            for (tok, _) in rows.iter().take(50) {
                prop_assert_eq!(nearest_neighbor(tok, &t), brute(tok, &rows));
            }
        }

        #[test]
        fn in_vocabulary_words_never_survive(words in proptest::collection::vec("[a-e]{1,3}", 1..20)) {
            let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.9, 0.3]), ("c", &[0.0, 1.0]), ("d", &[0.2, 0.9]), ("e", &[-1.0, 0.1])]);
            let text = words.join(" ");
            let out = kneo_anonymize(&text, &t);
            let out_words: Vec<&str> = out.split(' ').collect();
            prop_assert_eq!(out_words.len(), words.len());
            for (a, b) in words.iter().zip(&out_words) {
                prop_assert_ne!(a.as_str(), *b);
            }
        }
    }
}
