//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashSet;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use deideval::anonymize::{corpus_embedding_groups, toy_embeddings, Anonymizer, GoldRedactor, Identity, Kneo, MaskStyle};
use deideval::corpus::{generate_synthetic_note, load_templates, save_anonymized, save_corpus, ClinicalNote};
use deideval::lev::{dp_distance, levenshtein_distance, lsi, lsi_naive, PreparedPair};
use deideval::report::{cmd_evaluate, evaluate_corpus, EvaluationConfig, EvaluationReport, Format};
use deideval::retention::{jsc, nsdcg, ToyClassifier, DEFAULT_TH_B};
use deideval::{AnonymizedNote, LogitVector, NotePair};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, pass: impl Into<String>, fail: impl Into<String>) -> Outcome {
    if cond {
        Ok(pass.into())
    } else {
        Err(fail.into())
    }
}

fn templates_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/templates.jsonl")
}

fn synthetic_corpus(count: usize, seed: u64) -> Vec<ClinicalNote> {
    let templates = load_templates(templates_path()).expect("shipped templates");
    (0..count)
        .map(|i| generate_synthetic_note(&templates[i % templates.len()], seed + i as u64).expect("note"))
        .collect()
}

fn toy_kneo(notes: &[ClinicalNote]) -> Kneo {
    Kneo::new(toy_embeddings(&corpus_embedding_groups(notes), 32, 7).expect("toy table"))
}

fn run_method(notes: &[ClinicalNote], method: &dyn Anonymizer) -> Vec<AnonymizedNote> {
    notes.iter().map(|n| method.anonymize(n)).collect()
}

/// Every string over {a,b,c} of length <= `max_len`, shortest first, with
/// the index of its one-shorter prefix.
struct Strings {
    chars: Vec<Vec<char>>,
    parent: Vec<usize>,
}

fn strings(max_len: usize) -> Strings {
    let mut chars = vec![Vec::new()];
    let mut parent = vec![0];
    let mut level = 0..1;
    for _ in 0..max_len {
        let next_start = chars.len();
        for p in level.clone() {
            for c in ['a', 'b', 'c'] {
                let mut s = chars[p].clone();
                s.push(c);
                chars.push(s);
                parent.push(p);
            }
        }
        level = next_start..chars.len();
    }
    Strings { chars, parent }
}

fn naive_recursive(a: &[char], b: &[char]) -> usize {
    match (a.split_last(), b.split_last()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => (naive_recursive(ra, b) + 1)
            .min(naive_recursive(a, rb) + 1)
            .min(naive_recursive(ra, rb) + usize::from(x != y)),
    }
}

fn edit_distance_oracle() -> Outcome {
    let start = Instant::now();
    let s = strings(8);
    let n = s.chars.len();
    // the recursive definition, memoized over prefix indices
    let mut table = vec![0u8; n * n];
    for i in 0..n {
        let (pi, li) = (s.parent[i], s.chars[i].last());
        for j in 0..n {
            table[i * n + j] = if i == 0 {
                s.chars[j].len() as u8
            } else if j == 0 {
                s.chars[i].len() as u8
            } else {
                let pj = s.parent[j];
                let sub = table[pi * n + pj] + u8::from(li != s.chars[j].last());
                sub.min(table[pi * n + j] + 1).min(table[i * n + pj] + 1)
            };
        }
    }
    let short = strings(4).chars.len();
    for i in 0..short {
        for j in 0..short {
            if naive_recursive(&s.chars[i], &s.chars[j]) != table[i * n + j] as usize {
                return Err(format!("memo table disagrees with plain recursion at {:?}/{:?}", s.chars[i], s.chars[j]));
            }
        }
    }
    let texts: Vec<String> = s.chars.iter().map(|c| c.iter().collect()).collect();
    for i in 0..n {
        for j in 0..n {
            let want = table[i * n + j] as usize;
            if dp_distance(&s.chars[i], &s.chars[j]) != want {
                return Err(format!("dp_distance({}, {}) != {want}", texts[i], texts[j]));
            }
            if levenshtein_distance(&texts[i], &texts[j]) != want {
                return Err(format!("levenshtein_distance({}, {}) != {want}", texts[i], texts[j]));
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        elapsed <= Duration::from_secs(60),
        format!("{} pairs exact in {:.1}s", n * n, elapsed.as_secs_f64()),
        format!("exact but took {:.1}s", elapsed.as_secs_f64()),
    )
}

fn tim_time() -> Outcome {
    let v = lsi("Tim", "the time is now").map_err(|e| e.to_string())?.value();
    check(v == 1.0, "lsi = 1.0", format!("lsi = {v}"))
}

fn nsdcg_fixture() -> Outcome {
    let orig = LogitVector::new("n", vec![2.0, 0.0]).unwrap();
    let reversed = LogitVector::new("n", vec![0.0, 2.0]).unwrap();
    let v = nsdcg(&orig, &reversed, 2).map_err(|e| e.to_string())?;
    let same = nsdcg(&orig, &LogitVector::new("n", vec![5.0, 1.0]).unwrap(), 2).map_err(|e| e.to_string())?;
    check(
        (v - 26.58).abs() <= 0.01 && same == 100.0,
        format!("reversed = {v:.4}, identical ranking = {same}"),
        format!("reversed = {v}, identical ranking = {same}"),
    )
}

fn random_logits(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-8.0..8.0)).collect()
}

fn nsdcg_rank_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut max_seen = f64::MIN;
    for trial in 0..1000 {
        let o = LogitVector::new("n", random_logits(&mut rng, 30)).unwrap();
        let raw = random_logits(&mut rng, 30);
        let a = LogitVector::new("n", raw.clone()).unwrap();
        let b = LogitVector::new("n", raw.iter().map(|x| 3.0 * x + 5.0).collect()).unwrap();
        let k = rng.gen_range(1..=30);
        let (va, vb) = (nsdcg(&o, &a, k).unwrap(), nsdcg(&o, &b, k).unwrap());
        if va != vb {
            return Err(format!("trial {trial}: {va} vs {vb} after affine map"));
        }
        if va > 100.0 + 1e-9 {
            return Err(format!("trial {trial}: nsdcg {va} > 100"));
        }
        max_seen = max_seen.max(va);
    }
    Ok(format!("1000 pairs unchanged by 3x+5, max {max_seen:.6}"))
}

fn oracle_set(logits: &[f64], th: f64) -> HashSet<usize> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|x| (x - m).exp()).collect();
    let total: f64 = e.iter().sum();
    let mut set = HashSet::new();
    for (i, v) in e.iter().enumerate() {
        if v / total > th {
            set.insert(i);
        }
    }
    set
}

fn jsc_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..1000 {
        let n = rng.gen_range(2..=40);
        let a = random_logits(&mut rng, n);
        let b = random_logits(&mut rng, n);
        let (sa, sb) = (oracle_set(&a, DEFAULT_TH_B), oracle_set(&b, DEFAULT_TH_B));
        let union = sa.union(&sb).count();
        let want = if union == 0 {
            100.0
        } else {
            sa.intersection(&sb).count() as f64 / union as f64 * 100.0
        };
        let (la, lb) = (LogitVector::new("n", a).unwrap(), LogitVector::new("n", b).unwrap());
        let got = jsc(&la, &lb, DEFAULT_TH_B).unwrap();
        if got != want {
            return Err(format!("trial {trial}: jsc {got} vs oracle {want}"));
        }
        if jsc(&la, &la, DEFAULT_TH_B).unwrap() != 100.0 {
            return Err(format!("trial {trial}: jsc(x, x) != 100"));
        }
    }
    Ok("1000 random pairs match; jsc(x, x) = 100".into())
}

fn evaluate(notes: &[ClinicalNote], outputs: &[AnonymizedNote]) -> EvaluationReport {
    let toy = ToyClassifier::new(30, 0).unwrap();
    evaluate_corpus(notes, outputs, &EvaluationConfig::default(), &toy).expect("evaluation")
}

fn end_to_end() -> Outcome {
    let notes = synthetic_corpus(500, 10_000);
    if notes.iter().flat_map(|n| n.annotations()).any(|a| a.len() < 3) {
        return Err("generator produced an entity shorter than 3 chars".into());
    }
    let redact = evaluate(&notes, &run_method(&notes, &GoldRedactor { style: MaskStyle::Redacted }));
    let identity = evaluate(&notes, &run_method(&notes, &Identity));
    let kneo = evaluate(&notes, &run_method(&notes, &toy_kneo(&notes)));

    let r = &redact.aggregate;
    let lrdi_full = redact
        .notes
        .iter()
        .filter_map(|n| n.sensitivity.as_ref().and_then(|s| s.lrdi))
        .filter(|&v| v == 100.0)
        .count();
    let lrdi_notes = redact.notes.iter().filter(|n| n.sensitivity.as_ref().is_some_and(|s| s.lrdi.is_some())).count();
    let lrdi_share = lrdi_full as f64 / lrdi_notes as f64;
    let redact_ok = r.smr == Some(100.0) && r.lr == Some(100.0) && r.lrqi == Some(100.0) && lrdi_share >= 0.99;

    let i = &identity.aggregate;
    let identity_ok = i.smr == Some(0.0) && i.lr == Some(0.0) && i.jsc == Some(100.0) && i.nsdcg == Some(100.0);

    let k = &kneo.aggregate;
    let kneo_ok = k.smr.unwrap_or(0.0) >= 99.0 && k.jsc < r.jsc && k.nsdcg < r.nsdcg;

    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.2}"));
    let detail = format!(
        "redact smr/lr/lrqi {}/{}/{} lrdi=100 on {:.1}% | identity smr {} lr {} jsc {} nsdcg {} | kneo smr {} jsc {} < {} nsdcg {} < {}",
        fmt(r.smr), fmt(r.lr), fmt(r.lrqi), lrdi_share * 100.0,
        fmt(i.smr), fmt(i.lr), fmt(i.jsc), fmt(i.nsdcg),
        fmt(k.smr), fmt(k.jsc), fmt(r.jsc), fmt(k.nsdcg), fmt(r.nsdcg),
    );
    check(redact_ok && identity_ok && kneo_ok, detail.clone(), detail)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let notes = synthetic_corpus(200, 500);
    let outputs = run_method(&notes, &toy_kneo(&notes));
    let corpus = dir.path().join("corpus.jsonl");
    let anonymized = dir.path().join("kneo.jsonl");
    save_corpus(&corpus, &notes).map_err(|e| e.to_string())?;
    save_anonymized(&anonymized, &outputs).map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    for workers in [1, 8] {
        let out = dir.path().join(format!("report-{workers}.json"));
        let config = EvaluationConfig {
            workers,
            ..EvaluationConfig::default()
        };
        cmd_evaluate(&corpus, &anonymized, &config, Some(&out), Format::Json).map_err(|e| format!("{e:#}"))?;
        bytes.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    check(
        bytes[0] == bytes[1],
        format!("workers 1 and 8 give identical {}-byte reports", bytes[0].len()),
        "reports differ between worker counts",
    )
}

fn performance() -> Outcome {
    let notes = synthetic_corpus(1000, 77);
    let mean_len = notes.iter().map(|n| n.text().len()).sum::<usize>() / notes.len();
    let mean_entities = notes.iter().map(|n| n.annotations().len()).sum::<usize>() as f64 / notes.len() as f64;
    let outputs = run_method(&notes, &toy_kneo(&notes));
    let start = Instant::now();
    for (o, a) in notes.iter().zip(&outputs) {
        PreparedPair::new(NotePair::new(o, a).unwrap())
            .evaluate(0.85)
            .map_err(|e| e.to_string())?;
    }
    let elapsed = start.elapsed();

    // optimized scan against the plain scan on every entity/haystack pair of
    // strings up to length 6
    let s = strings(6);
    let texts: Vec<String> = s.chars.iter().map(|c| c.iter().collect()).collect();
    for e in &texts[1..] {
        for h in &texts {
            if lsi(e, h).unwrap() != lsi_naive(e, h).unwrap() {
                return Err(format!("lsi({e}, {h}) differs from the naive scan"));
            }
        }
    }
    let detail = format!(
        "1000 notes (~{mean_len} B, {mean_entities:.1} entities) in {:.2}s single worker; {} scan pairs identical",
        elapsed.as_secs_f64(),
        (texts.len() - 1) * texts.len()
    );
    check(elapsed <= Duration::from_secs(60), detail.clone(), detail)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("edit-distance oracle", edit_distance_oracle),
        ("Tim/time", tim_time),
        ("NSDCG hand fixture", nsdcg_fixture),
        ("NSDCG rank invariance", nsdcg_rank_invariance),
        ("JSC brute force", jsc_brute_force),
        ("end-to-end directional", end_to_end),
        ("determinism", determinism),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
