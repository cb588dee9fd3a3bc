use serde::{Deserialize, Serialize};

use super::evaluate::NoteReport;
use crate::lev::{alid, levenshtein_recall, SimilarityScore};

/// Count of notes for which each metric was not applicable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotApplicable {
    pub smr: usize,
    pub alid: usize,
    pub lr: usize,
    pub lrdi: usize,
    pub lrqi: usize,
    pub jsc: usize,
    pub nsdcg: usize,
}

/// Entity-pooled averages, kept alongside the per-note means.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MicroAverages {
    pub entities: usize,
    pub alid: Option<f64>,
    pub lr: Option<f64>,
    pub lr_direct: Option<f64>,
    pub lr_quasi: Option<f64>,
}

/// Corpus-level summary: unweighted means over the notes where each metric
/// applies. A metric with no applicable note is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub method_tag: String,
    pub note_count: usize,
    pub skipped: usize,
    pub failed: usize,
    pub smr: Option<f64>,
    pub alid: Option<f64>,
    pub lr: Option<f64>,
    pub lrdi: Option<f64>,
    pub lrqi: Option<f64>,
    pub jsc: Option<f64>,
    pub nsdcg: Option<f64>,
    pub not_applicable: NotApplicable,
    pub micro: MicroAverages,
}

/// Mean of the present values plus the number of absent ones.
pub fn mean_applicable(values: impl IntoIterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let (mut sum, mut n, mut missing) = (0.0, 0usize, 0usize);
    for v in values {
        match v {
            Some(v) => {
                sum += v;
                n += 1;
            }
            None => missing += 1,
        }
    }
    ((n > 0).then(|| sum / n as f64), missing)
}

/// Macro-averages per-note reports. Failed notes count toward `failed` and
/// are excluded from every mean they could not produce.
pub fn aggregate(method_tag: &str, notes: &[NoteReport], th_s: f64) -> AggregateReport {
    let sens = |f: fn(&crate::lev::SensitivityReport) -> Option<f64>| {
        mean_applicable(notes.iter().map(|n| n.sensitivity.as_ref().and_then(f)))
    };
    let ret = |f: fn(&crate::retention::RetentionReport) -> f64| {
        mean_applicable(notes.iter().map(|n| n.retention.as_ref().map(f)))
    };
    let (smr, na_smr) = sens(|s| s.smr);
    let (alid_m, na_alid) = sens(|s| s.alid);
    let (lr, na_lr) = sens(|s| s.lr);
    let (lrdi, na_lrdi) = sens(|s| s.lrdi);
    let (lrqi, na_lrqi) = sens(|s| s.lrqi);
    let (jsc, na_jsc) = ret(|r| r.jsc);
    let (nsdcg, na_nsdcg) = ret(|r| r.nsdcg);

    let mut all: Vec<SimilarityScore> = Vec::new();
    let mut direct = Vec::new();
    let mut quasi = Vec::new();
    for s in notes.iter().filter_map(|n| n.sensitivity.as_ref()) {
        all.extend_from_slice(&s.breakdown.all);
        direct.extend_from_slice(&s.breakdown.direct);
        quasi.extend_from_slice(&s.breakdown.quasi);
    }

    AggregateReport {
        method_tag: method_tag.to_string(),
        note_count: notes.len(),
        skipped: 0,
        failed: notes.iter().filter(|n| !n.errors.is_empty()).count(),
        smr,
        alid: alid_m,
        lr,
        lrdi,
        lrqi,
        jsc,
        nsdcg,
        not_applicable: NotApplicable {
            smr: na_smr,
            alid: na_alid,
            lr: na_lr,
            lrdi: na_lrdi,
            lrqi: na_lrqi,
            jsc: na_jsc,
            nsdcg: na_nsdcg,
        },
        micro: MicroAverages {
            entities: all.len(),
            alid: alid(&all),
            lr: levenshtein_recall(&all, th_s),
            lr_direct: levenshtein_recall(&direct, th_s),
            lr_quasi: levenshtein_recall(&quasi, th_s),
        },
    }
}
