//! Small helpers for working in Unicode scalar value units.

/// Simple case fold that never changes the number of scalar values, so
/// character offsets stay valid after folding.
#[inline]
pub(crate) fn fold_char(c: char) -> char {
    if c.is_ascii() {
        return c.to_ascii_lowercase();
    }
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

pub(crate) fn folded_chars(s: &str) -> Vec<char> {
    s.chars().map(fold_char).collect()
}

pub(crate) fn fold_str(s: &str) -> String {
    s.chars().map(fold_char).collect()
}

/// Substring of `text` between scalar-value offsets `[start, end)`.
/// Offsets past the end are clamped.
pub(crate) fn char_slice(text: &str, start: usize, end: usize) -> &str {
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let from = indices.by_ref().nth(start).unwrap_or(text.len());
    if end <= start {
        return &text[from..from];
    }
    let to = indices.nth(end - start - 1).unwrap_or(text.len());
    &text[from..to]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slices_by_scalar_values() {
        let s = "açaí bowl";
        assert_eq!(char_slice(s, 0, 4), "açaí");
        assert_eq!(char_slice(s, 5, 9), "bowl");
        assert_eq!(char_slice(s, 3, 3), "");
        assert_eq!(char_slice(s, 7, 20), "wl");
    }

    #[test]
    fn fold_keeps_length() {
        for s in ["Tim", "İstanbul", "STRASSE", "ǅ"] {
            assert_eq!(folded_chars(s).len(), s.chars().count());
        }
        assert_eq!(fold_str("Ana REIS"), "ana reis");
    }
}
