use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::window::{align_folded, lsi_folded};
use super::{
    alid, check_th_s, levenshtein_recall, lrdi, lrqi, string_matching_recall, LevError, SimilarityScore,
};
use crate::corpus::sentences::split_sentence_chars;
use crate::corpus::{EntityAnnotation, EntityCategory, IdentifierClass, NotePair, Span};
use crate::text::folded_chars;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityScore {
    pub index: usize,
    pub category: EntityCategory,
    pub lsi: SimilarityScore,
}

/// Per-entity LSIs of one note, with the direct/quasi split.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LsiBreakdown {
    pub per_entity: Vec<EntityScore>,
    pub all: Vec<SimilarityScore>,
    pub direct: Vec<SimilarityScore>,
    pub quasi: Vec<SimilarityScore>,
}

/// Sensitivity metrics for one note pair. Metrics are `None` when not
/// applicable (no entities at all, or none of the relevant class).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub note_id: String,
    pub th_s: f64,
    pub smr: Option<f64>,
    pub alid: Option<f64>,
    pub lr: Option<f64>,
    pub lrdi: Option<f64>,
    pub lrqi: Option<f64>,
    pub breakdown: LsiBreakdown,
}

/// A note pair with folded text and sentence spans computed once, plus a
/// cache of sentence alignments shared by entities in the same sentence.
pub struct PreparedPair<'a> {
    pair: NotePair<'a>,
    on: Vec<char>,
    an: Vec<char>,
    on_sentences: Vec<Span>,
    an_sentences: Vec<Span>,
    alignments: HashMap<(usize, usize), Span>,
}

impl<'a> PreparedPair<'a> {
    pub fn new(pair: NotePair<'a>) -> Self {
        let on = folded_chars(pair.original.text());
        let an = folded_chars(&pair.anonymized.text);
        let on_sentences = split_sentence_chars(&on);
        let an_sentences = split_sentence_chars(&an);
        PreparedPair {
            pair,
            on,
            an,
            on_sentences,
            an_sentences,
            alignments: HashMap::new(),
        }
    }

    /// Index range of the original sentences an entity touches. Normally a
    /// single sentence: the one containing the entity's first character.
    fn sentence_run(&self, annotation: &EntityAnnotation) -> Option<(usize, usize)> {
        let first = self
            .on_sentences
            .iter()
            .position(|s| s.end > annotation.char_start)?;
        let last = self
            .on_sentences
            .iter()
            .rposition(|s| s.start < annotation.char_end)
            .unwrap_or(first)
            .max(first);
        Some((first, last))
    }

    fn aligned_span(&mut self, run: (usize, usize)) -> Span {
        if let Some(&span) = self.alignments.get(&run) {
            return span;
        }
        let (first, last) = run;
        let on_span = Span::new(self.on_sentences[first].start, self.on_sentences[last].end);
        let k = last - first + 1;
        let candidates: Vec<Span> = if self.an_sentences.is_empty() {
            Vec::new()
        } else if self.an_sentences.len() <= k {
            vec![Span::new(
                self.an_sentences[0].start,
                self.an_sentences[self.an_sentences.len() - 1].end,
            )]
        } else {
            self.an_sentences
                .windows(k)
                .map(|w| Span::new(w[0].start, w[k - 1].end))
                .collect()
        };
        let span = align_folded(&self.on[on_span.start..on_span.end], &self.an, &candidates);
        self.alignments.insert(run, span);
        span
    }

    /// LSI of one annotation of the original note.
    pub fn entity_lsi(&mut self, annotation: &EntityAnnotation) -> Result<SimilarityScore, LevError> {
        if annotation.char_start >= annotation.char_end || annotation.char_end > self.on.len() {
            return Err(LevError::AnnotationOutOfBounds {
                start: annotation.char_start,
                end: annotation.char_end,
                len: self.on.len(),
            });
        }
        let span = match self.sentence_run(annotation) {
            Some(run) => self.aligned_span(run),
            // entity lies in whitespace outside every sentence: compare it
            // against the whole anonymized text
            None => Span::new(0, self.an.len()),
        };
        let entity = &self.on[annotation.char_start..annotation.char_end];
        Ok(SimilarityScore::clamped(lsi_folded(entity, &self.an[span.start..span.end])))
    }

    pub fn evaluate(&mut self, th_s: f64) -> Result<SensitivityReport, LevError> {
        check_th_s(th_s)?;
        let original = self.pair.original;
        let mut breakdown = LsiBreakdown::default();
        for (index, annotation) in original.annotations().iter().enumerate() {
            let score = self.entity_lsi(annotation)?;
            breakdown.per_entity.push(EntityScore {
                index,
                category: annotation.category,
                lsi: score,
            });
            breakdown.all.push(score);
            match annotation.identifier_class() {
                IdentifierClass::Direct => breakdown.direct.push(score),
                IdentifierClass::Quasi => breakdown.quasi.push(score),
            }
        }
        Ok(SensitivityReport {
            note_id: original.id().to_string(),
            th_s,
            smr: string_matching_recall(original.annotations(), &self.pair.anonymized.text),
            alid: alid(&breakdown.all),
            lr: levenshtein_recall(&breakdown.all, th_s),
            lrdi: lrdi(&breakdown.direct, th_s),
            lrqi: lrqi(&breakdown.quasi, th_s),
            breakdown,
        })
    }
}

/// LSI of `annotation` against the anonymized sentence aligned with the
/// original sentence that contains it.
pub fn entity_lsi(pair: NotePair<'_>, annotation: &EntityAnnotation) -> Result<SimilarityScore, LevError> {
    PreparedPair::new(pair).entity_lsi(annotation)
}

/// Computes every sensitivity metric for one note pair.
pub fn evaluate_sensitivity(pair: NotePair<'_>, th_s: f64) -> Result<SensitivityReport, LevError> {
    PreparedPair::new(pair).evaluate(th_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnonymizedNote, ClinicalNote};

    fn note() -> ClinicalNote {
        // "Ana Reis" NAME, "MRN-4821937" ID, "Lisbon" LOCATION
        let text = "Patient Ana Reis was admitted. Record MRN-4821937 updated. She lives in Lisbon.";
        ClinicalNote::new(
            "n1",
            text,
            [
                (8, 16, EntityCategory::Name),
                (38, 49, EntityCategory::Id),
                (72, 78, EntityCategory::Location),
            ],
        )
        .unwrap()
    }

    fn report(text: &str) -> SensitivityReport {
        let on = note();
        let an = AnonymizedNote::new("n1", text, "test");
        evaluate_sensitivity(NotePair::new(&on, &an).unwrap(), 0.85).unwrap()
    }

    #[test]
    fn identity_leaks_everything() {
        let r = report(note().text());
        assert_eq!(r.smr, Some(0.0));
        assert_eq!(r.lr, Some(0.0));
        assert_eq!(r.lrdi, Some(0.0));
        assert_eq!(r.lrqi, Some(0.0));
        assert_eq!(r.alid, Some(0.0));
        assert_eq!(r.breakdown.all.len(), r.breakdown.direct.len() + r.breakdown.quasi.len());
    }

    #[test]
    fn empty_output_hides_everything() {
        let r = report("");
        assert_eq!(r.smr, Some(100.0));
        assert_eq!(r.lr, Some(100.0));
        assert_eq!(r.lrdi, Some(100.0));
        assert_eq!(r.lrqi, Some(100.0));
        assert_eq!(r.alid, Some(100.0));
    }

    #[test]
    fn redacted_entity_scores_low() {
        let on = note();
        let an = AnonymizedNote::new(
            "n1",
            "Patient [REDACTED] was admitted. Record MRN-4821937 updated. She lives in Lisbon.",
            "test",
        );
        let pair = NotePair::new(&on, &an).unwrap();
        let name = entity_lsi(pair, &on.annotations()[0]).unwrap().value();
        // best window of "ana reis" in "patient [redacted] was admitted." is
        // " [redact" or similar: at most 3 of 8 characters survive
        assert!(name < 0.85, "{name}");
        assert_eq!(name, 0.375);
        assert_eq!(entity_lsi(pair, &on.annotations()[1]).unwrap().value(), 1.0);
        let r = report(&an.text);
        assert_eq!(r.lrdi, Some(0.0));
        assert!((r.lr.unwrap() - 100.0 / 3.0).abs() < 1e-9);
        assert_eq!(r.lrqi, Some(0.0));
    }

    #[test]
    fn alignment_confines_the_search() {
        // "tim" survives only inside "time" in an unrelated sentence
        let on = ClinicalNote::new("x", "Seen by Tim. Stable.", [(8, 11, EntityCategory::Name)]).unwrap();
        let an = AnonymizedNote::new("x", "Seen by [NAME]. Stable at this time.", "t");
        let pair = NotePair::new(&on, &an).unwrap();
        assert!(entity_lsi(pair, &on.annotations()[0]).unwrap().value() < 0.85);
        // but an unaligned scan of the whole note finds it
        assert_eq!(super::super::lsi("Tim", &an.text).unwrap().value(), 1.0);
    }

    #[test]
    fn entity_spanning_sentences() {
        let on = ClinicalNote::new(
            "x",
            "Admitted to St. Mary Clinic yesterday. Fine.",
            [(12, 27, EntityCategory::Institution)],
        )
        .unwrap();
        let an = AnonymizedNote::new("x", on.text(), "identity");
        let pair = NotePair::new(&on, &an).unwrap();
        assert_eq!(entity_lsi(pair, &on.annotations()[0]).unwrap().value(), 1.0);
    }

    #[test]
    fn no_annotations_means_not_applicable() {
        let on = ClinicalNote::new("x", "Nothing sensitive.", []).unwrap();
        let an = AnonymizedNote::new("x", "Nothing sensitive.", "t");
        let r = evaluate_sensitivity(NotePair::new(&on, &an).unwrap(), 0.85).unwrap();
        assert_eq!((r.smr, r.alid, r.lr, r.lrdi, r.lrqi), (None, None, None, None, None));
    }

    #[test]
    fn out_of_bounds_annotation() {
        let on = ClinicalNote::new("x", "short", []).unwrap();
        let an = AnonymizedNote::new("x", "short", "t");
        let bogus = EntityAnnotation {
            entity_text: "zzz".into(),
            category: EntityCategory::Name,
            char_start: 3,
            char_end: 9,
        };
        let err = entity_lsi(NotePair::new(&on, &an).unwrap(), &bogus).unwrap_err();
        assert!(matches!(err, LevError::AnnotationOutOfBounds { .. }));
    }

    #[test]
    fn rejects_bad_threshold() {
        let on = note();
        let an = AnonymizedNote::new("n1", "", "t");
        assert!(evaluate_sensitivity(NotePair::new(&on, &an).unwrap(), 0.0).is_err());
    }
}
