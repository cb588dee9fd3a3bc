//! Levenshtein ratio, windowed similarity index and sentence alignment.

use std::collections::HashMap;

use super::distance::{dp_distance, Pattern};
use super::{LevError, SimilarityScore};
use crate::corpus::Span;
use crate::text::folded_chars;

/// `1 - distance / max(len_a, len_b)`.
#[inline]
pub(crate) fn ratio_from(distance: usize, max_len: usize) -> f64 {
    1.0 - distance as f64 / max_len as f64
}

/// Levenshtein ratio of two strings after case folding.
pub fn levenshtein_ratio(a: &str, b: &str) -> Result<SimilarityScore, LevError> {
    let (a, b) = (folded_chars(a), folded_chars(b));
    let max_len = a.len().max(b.len());
    if max_len == 0 {
        return Err(LevError::UndefinedRatio);
    }
    Ok(SimilarityScore::clamped(ratio_from(
        super::distance::distance(&a, &b),
        max_len,
    )))
}

/// Levenshtein similarity index: the best ratio between `entity` and any
/// window of `entity`'s length in `haystack`, both case-folded. A haystack
/// shorter than the entity is compared whole; an empty one scores 0.
pub fn lsi(entity: &str, haystack: &str) -> Result<SimilarityScore, LevError> {
    let entity = folded_chars(entity);
    if entity.is_empty() {
        return Err(LevError::EmptyEntity);
    }
    Ok(SimilarityScore::clamped(lsi_folded(&entity, &folded_chars(haystack))))
}

/// Reference scan: plain DP on every window, no pruning.
pub fn lsi_naive(entity: &str, haystack: &str) -> Result<SimilarityScore, LevError> {
    let entity = folded_chars(entity);
    let haystack = folded_chars(haystack);
    let e = entity.len();
    if e == 0 {
        return Err(LevError::EmptyEntity);
    }
    if haystack.is_empty() {
        return Ok(SimilarityScore::ZERO);
    }
    if haystack.len() < e {
        return Ok(SimilarityScore::clamped(ratio_from(dp_distance(&entity, &haystack), e)));
    }
    let best = haystack
        .windows(e)
        .map(|w| ratio_from(dp_distance(&entity, w), e))
        .fold(0.0, f64::max);
    Ok(SimilarityScore::clamped(best))
}

/// Character-multiset bookkeeping for the sliding window: the shared count
/// `inter` gives the lower bound `distance >= e - inter` for equal lengths.
struct BagBound {
    slot: HashMap<char, usize>,
    need: Vec<u32>,
    have: Vec<u32>,
    inter: usize,
}

impl BagBound {
    fn new(entity: &[char]) -> Self {
        let mut slot = HashMap::new();
        let mut need = Vec::new();
        for &c in entity {
            let s = *slot.entry(c).or_insert_with(|| {
                need.push(0);
                need.len() - 1
            });
            need[s] += 1;
        }
        let have = vec![0; need.len()];
        BagBound {
            slot,
            need,
            have,
            inter: 0,
        }
    }

    fn add(&mut self, c: char) {
        if let Some(&s) = self.slot.get(&c) {
            if self.have[s] < self.need[s] {
                self.inter += 1;
            }
            self.have[s] += 1;
        }
    }

    fn remove(&mut self, c: char) {
        if let Some(&s) = self.slot.get(&c) {
            self.have[s] -= 1;
            if self.have[s] < self.need[s] {
                self.inter -= 1;
            }
        }
    }
}

/// Optimized scan over already-folded input. Windows whose multiset bound
/// cannot beat the best distance so far are skipped; the scan stops at an
/// exact match. Result-identical to [`lsi_naive`].
pub(crate) fn lsi_folded(entity: &[char], haystack: &[char]) -> f64 {
    let e = entity.len();
    debug_assert!(e > 0);
    if haystack.is_empty() {
        return 0.0;
    }
    let pattern = Pattern::new(entity);
    if haystack.len() < e {
        return ratio_from(pattern.distance(haystack), e);
    }

    let mut bag = BagBound::new(entity);
    for &c in &haystack[..e] {
        bag.add(c);
    }
    let mut best = usize::MAX;
    for start in 0..=haystack.len() - e {
        if start > 0 {
            bag.remove(haystack[start - 1]);
            bag.add(haystack[start + e - 1]);
        }
        if e - bag.inter >= best {
            continue;
        }
        best = best.min(pattern.distance(&haystack[start..start + e]));
        if best == 0 {
            break;
        }
    }
    ratio_from(best, e)
}

/// Picks the span in `an_sentences` whose text is most similar (by
/// Levenshtein ratio) to `on_sentence`; ties go to the earliest span. No
/// sentences gives [`Span::EMPTY`].
pub fn align_sentence(on_sentence: &str, anonymized_text: &str, an_sentences: &[Span]) -> Span {
    let on = folded_chars(on_sentence);
    let an = folded_chars(anonymized_text);
    let candidates: Vec<Span> = an_sentences.to_vec();
    align_folded(&on, &an, &candidates)
}

/// Alignment over folded text. `candidates` may be runs of consecutive
/// sentences, each given as a single covering span.
pub(crate) fn align_folded(on: &[char], an: &[char], candidates: &[Span]) -> Span {
    let Some(&first) = candidates.first() else {
        return Span::EMPTY;
    };
    if on.is_empty() {
        return first;
    }
    let pattern = Pattern::new(on);
    let mut best_span = first;
    let mut best = f64::NEG_INFINITY;
    for &span in candidates {
        let end = span.end.min(an.len());
        let start = span.start.min(end);
        let cand = &an[start..end];
        let max_len = on.len().max(cand.len());
        // the length difference alone bounds the distance from below
        let bound = ratio_from(on.len().abs_diff(cand.len()), max_len);
        if bound <= best {
            continue;
        }
        let r = ratio_from(pattern.distance(cand), max_len);
        if r > best {
            best = r;
            best_span = span;
            if r >= 1.0 {
                break;
            }
        }
    }
    best_span
}
