//! Seeded fake-value generator for synthetic annotated notes.
//!
//! Each category draws from its own ChaCha stream keyed by the note seed,
//! so the value of one placeholder never depends on which other categories
//! appear in the template.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ClinicalNote, CorpusError, EntityCategory, NoteTemplate, TemplateSegment};

/// Word lists backing the generator. Also used to build the reference
/// dictionary rules and toy embedding clusters.
pub struct FakeValues;

impl FakeValues {
    pub const FIRST_NAMES: &'static [&'static str] = &[
        "Adriana", "Beatriz", "Carlos", "Daniela", "Eduardo", "Fernanda", "Gustavo", "Helena",
        "Joaquim", "Leonor", "Mariana", "Nuno", "Olivia", "Pedro", "Raquel", "Sofia", "Tiago",
        "Vasco", "Amelia", "Bruno", "Camila", "Diogo", "Elisa", "Filipe", "Gabriela", "Henrique",
        "Miguel", "Rafael", "Teresa", "Vanessa", "Ricardo", "Patricia", "Rodrigo", "Catarina",
        "Francisco", "Margarida", "Lucas", "Marta", "Jorge", "Clara", "Harriet", "Winston",
        "Gertrude", "Eleanor", "Theodore", "Margaret", "Walter", "Dorothy", "Josephine", "Franklin",
    ];

    pub const LAST_NAMES: &'static [&'static str] = &[
        "Almeida", "Barbosa", "Cardoso", "Duarte", "Esteves", "Ferreira", "Goncalves", "Henriques",
        "Lacerda", "Machado", "Nogueira", "Oliveira", "Pacheco", "Quintela", "Rodrigues", "Salgado",
        "Teixeira", "Valente", "Xavier", "Zambujal", "Abernathy", "Blackwood", "Castellano",
        "Donovan", "Fairbanks", "Gallagher", "Hawthorne", "Kowalski", "Lindqvist", "Montgomery",
        "Nakamura", "Okonkwo", "Pemberton", "Rasmussen", "Sandoval", "Thornton", "Underwood",
        "Vanderberg", "Whitfield", "Yamamoto",
    ];

    pub const CITIES: &'static [&'static str] = &[
        "Lisbon", "Coimbra", "Braga", "Aveiro", "Guimaraes", "Setubal", "Funchal", "Evora",
        "Leiria", "Viseu", "Boston", "Chicago", "Denver", "Phoenix", "Seattle", "Portland",
        "Cleveland", "Pittsburgh", "Baltimore", "Nashville", "Sacramento", "Milwaukee",
        "Albuquerque", "Richmond", "Savannah",
    ];

    pub const INSTITUTIONS: &'static [&'static str] = &[
        "Hospital de Santa Maria",
        "Centro Hospitalar Lisboa Norte",
        "Mercy General Hospital",
        "Saint Anne Medical Center",
        "Riverside Community Clinic",
        "Lakeview Rehabilitation Institute",
        "Northgate Cardiology Associates",
        "Hillcrest Memorial Hospital",
        "Greenfield Oncology Center",
        "Bayside Family Practice",
        "Westbrook Regional Medical Center",
        "Oakridge Pediatric Clinic",
    ];

    pub const HOLIDAYS: &'static [&'static str] = &[
        "Christmas Day",
        "Thanksgiving",
        "New Year's Day",
        "Independence Day",
        "Easter Sunday",
        "Labor Day",
        "Memorial Day",
        "Halloween",
        "Valentine's Day",
        "Carnival",
        "Christmas Eve",
        "New Year's Eve",
    ];

    pub const MONTHS: &'static [&'static str] = &[
        "January", "February", "March", "April", "May", "June", "July", "August", "September",
        "October", "November", "December",
    ];

    pub const EMAIL_DOMAINS: &'static [&'static str] =
        &["example.org", "mailbox.net", "clinicmail.com", "healthnet.pt", "postbox.io"];
}

#[derive(Debug, Clone)]
pub struct GeneratorOptions {
    /// Shortest acceptable entity text, in scalar values.
    pub min_entity_len: usize,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions { min_entity_len: 3 }
    }
}

fn digits(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| char::from(b'0' + rng.gen_range(0..10u8))).collect()
}

fn pick<'a>(rng: &mut ChaCha8Rng, list: &'a [&'a str]) -> &'a str {
    list.choose(rng).copied().unwrap_or_default()
}

fn slug(s: &str) -> String {
    s.split_whitespace()
        .map(|w| w.to_ascii_lowercase())
        .collect::<Vec<_>>()
        .join("-")
}

fn fake_value(category: EntityCategory, rng: &mut ChaCha8Rng) -> String {
    match category {
        EntityCategory::Name => format!(
            "{} {}",
            pick(rng, FakeValues::FIRST_NAMES),
            pick(rng, FakeValues::LAST_NAMES)
        ),
        EntityCategory::ContactNumber => match rng.gen_range(0..3) {
            0 => format!("({}) {}-{}", digits(rng, 3), digits(rng, 3), digits(rng, 4)),
            1 => format!("+351 9{} {} {}", digits(rng, 2), digits(rng, 3), digits(rng, 3)),
            _ => format!("{}-{}-{}", digits(rng, 3), digits(rng, 3), digits(rng, 4)),
        },
        EntityCategory::Id => match rng.gen_range(0..3) {
            0 => format!("MRN-{}", digits(rng, 7)),
            1 => format!("PT{}", digits(rng, 8)),
            _ => format!("{}-{}-{}", digits(rng, 3), digits(rng, 2), digits(rng, 4)),
        },
        EntityCategory::Email => {
            let first = pick(rng, FakeValues::FIRST_NAMES).to_ascii_lowercase();
            let last = pick(rng, FakeValues::LAST_NAMES).to_ascii_lowercase();
            let domain = pick(rng, FakeValues::EMAIL_DOMAINS);
            match rng.gen_range(0..3) {
                0 => format!("{first}.{last}@{domain}"),
                1 => format!("{}{last}@{domain}", &first[..1]),
                _ => format!("{first}{}@{domain}", rng.gen_range(10..100)),
            }
        }
        EntityCategory::Location => pick(rng, FakeValues::CITIES).to_string(),
        EntityCategory::Date => {
            let year = rng.gen_range(1990..=2023);
            let month = rng.gen_range(1..=12usize);
            let day = rng.gen_range(1..=28);
            match rng.gen_range(0..3) {
                0 => format!("{year}-{month:02}-{day:02}"),
                1 => format!("{month:02}/{day:02}/{year}"),
                _ => format!("{} {day}, {year}", FakeValues::MONTHS[month - 1]),
            }
        }
        EntityCategory::Url => {
            let site = slug(pick(rng, FakeValues::INSTITUTIONS));
            match rng.gen_range(0..2) {
                0 => format!("https://www.{site}.org/patients/{}", digits(rng, 6)),
                _ => format!("http://portal.{site}.com/records?id={}", digits(rng, 5)),
            }
        }
        EntityCategory::AgeAbove89 => format!("{}-year-old", rng.gen_range(90..=104)),
        EntityCategory::Institution => pick(rng, FakeValues::INSTITUTIONS).to_string(),
        EntityCategory::Holiday => pick(rng, FakeValues::HOLIDAYS).to_string(),
    }
}

/// Fills every placeholder of `template` with a fake value drawn for
/// `seed`. The note id is `<template id>-<seed>`.
pub fn generate_synthetic_note(template: &NoteTemplate, seed: u64) -> Result<ClinicalNote, CorpusError> {
    generate_synthetic_note_with(template, seed, &GeneratorOptions::default())
}

pub fn generate_synthetic_note_with(
    template: &NoteTemplate,
    seed: u64,
    options: &GeneratorOptions,
) -> Result<ClinicalNote, CorpusError> {
    const MAX_DRAWS: usize = 64;
    let mut streams: Vec<Option<ChaCha8Rng>> = vec![None; EntityCategory::ALL.len()];
    let mut text = String::new();
    let mut offset = 0usize;
    let mut spans = Vec::new();

    for segment in template.segments() {
        match segment {
            TemplateSegment::Literal(s) => {
                text.push_str(s);
                offset += s.chars().count();
            }
            TemplateSegment::Placeholder(category) => {
                let rng = streams[category.index()].get_or_insert_with(|| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(category.index() as u64 + 1);
                    rng
                });
                let value = (0..MAX_DRAWS)
                    .map(|_| fake_value(*category, rng))
                    .find(|v| v.chars().count() >= options.min_entity_len)
                    .ok_or(CorpusError::EntityTooShort {
                        category: *category,
                        min_len: options.min_entity_len,
                    })?;
                let len = value.chars().count();
                spans.push((offset, offset + len, *category));
                text.push_str(&value);
                offset += len;
            }
        }
    }

    ClinicalNote::new(format!("{}-{}", template.id(), seed), text, spans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::char_slice;

    fn template() -> NoteTemplate {
        NoteTemplate::new("t", "Patient ⟦NAME⟧ seen on ⟦DATE⟧.").unwrap()
    }

    #[test]
    fn fills_placeholders_with_consistent_spans() {
        let note = generate_synthetic_note(&template(), 7).unwrap();
        let cats: Vec<_> = note.annotations().iter().map(|a| a.category).collect();
        assert_eq!(cats, [EntityCategory::Name, EntityCategory::Date]);
        for a in note.annotations() {
            assert_eq!(char_slice(note.text(), a.char_start, a.char_end), a.entity_text);
        }
        assert!(note.text().starts_with("Patient "));
        assert!(note.text().ends_with('.'));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic_note(&template(), 7).unwrap();
        let b = generate_synthetic_note(&template(), 7).unwrap();
        assert_eq!(a.text(), b.text());
        assert_eq!(a, b);
    }

    #[test]
    fn names_vary_across_seeds() {
        let t = NoteTemplate::new("t", "⟦NAME⟧").unwrap();
        let mut differing = 0;
        for seed in 0..100u64 {
            let a = generate_synthetic_note(&t, seed).unwrap();
            let b = generate_synthetic_note(&t, seed.wrapping_mul(7919) + 1_000_003).unwrap();
            if a.annotations()[0].entity_text != b.annotations()[0].entity_text {
                differing += 1;
            }
        }
        assert!(differing >= 99, "{differing}");
    }

    #[test]
    fn every_category_meets_min_length() {
        let body: String = EntityCategory::ALL.iter().map(|c| format!("⟦{c}⟧ ")).collect();
        let t = NoteTemplate::new("all", body).unwrap();
        for seed in 0..200 {
            let note = generate_synthetic_note(&t, seed).unwrap();
            assert_eq!(note.annotations().len(), 10);
            assert!(note.annotations().iter().all(|a| a.len() >= 3));
        }
    }

    #[test]
    fn impossible_min_length_errors() {
        let t = NoteTemplate::new("t", "⟦LOCATION⟧").unwrap();
        let err = generate_synthetic_note_with(&t, 1, &GeneratorOptions { min_entity_len: 500 }).unwrap_err();
        assert!(matches!(err, CorpusError::EntityTooShort { .. }));
    }

    #[test]
    fn other_categories_do_not_shift_values() {
        let a = generate_synthetic_note(&NoteTemplate::new("t", "⟦NAME⟧").unwrap(), 3).unwrap();
        let b = generate_synthetic_note(&NoteTemplate::new("t", "⟦DATE⟧ ⟦NAME⟧").unwrap(), 3).unwrap();
        assert_eq!(a.annotations()[0].entity_text, b.annotations()[1].entity_text);
    }
}
