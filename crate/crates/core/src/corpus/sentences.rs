use super::Span;

/// Abbreviations whose trailing period never ends a sentence.
pub const ABBREVIATIONS: &[&str] = &["dr.", "mr.", "mrs.", "vs.", "e.g.", "i.e."];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_abbreviation(chars: &[char], dot: usize, floor: usize) -> bool {
    let mut start = dot;
    while start > floor && !chars[start - 1].is_whitespace() {
        start -= 1;
    }
    while start < dot && !chars[start].is_alphanumeric() {
        start += 1;
    }
    let token: String = chars[start..=dot].iter().flat_map(|c| c.to_lowercase()).collect();
    ABBREVIATIONS.contains(&token.as_str())
}

/// Rule-based sentence segmentation.
///
/// A sentence ends at a newline, or at a run of `.`, `!`, `?` that is
/// followed by whitespace or the end of the text, unless the run is the
/// single period of a guarded abbreviation. Returned spans are trimmed of
/// surrounding whitespace, ordered, disjoint, and together cover every
/// non-whitespace character.
pub fn split_sentences(text: &str) -> Vec<Span> {
    let chars: Vec<char> = text.chars().collect();
    split_sentence_chars(&chars)
}

pub(crate) fn split_sentence_chars(chars: &[char]) -> Vec<Span> {
    let n = chars.len();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut last = 0;
    let mut i = 0;
    while i < n {
        let c = chars[i];
        if c == '\n' {
            if let Some(s) = start.take() {
                spans.push(Span::new(s, last + 1));
            }
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let s = *start.get_or_insert(i);
        last = i;
        if is_terminator(c) {
            let mut j = i;
            while j + 1 < n && is_terminator(chars[j + 1]) {
                j += 1;
            }
            last = j;
            let at_boundary = j + 1 == n || chars[j + 1].is_whitespace();
            if at_boundary && !(c == '.' && j == i && is_abbreviation(chars, i, s)) {
                spans.push(Span::new(s, j + 1));
                start = None;
            }
            i = j + 1;
            continue;
        }
        i += 1;
    }
    if let Some(s) = start {
        spans.push(Span::new(s, last + 1));
    }
    spans
}
