use std::fmt;
use std::str::FromStr;

use crate::corpus::ClinicalNote;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskStyle {
    /// `[REDACTED]`
    #[default]
    Redacted,
    /// `[NAME]`, `[DATE]`, ...
    Category,
    /// `*`
    Star,
}

impl FromStr for MaskStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "redacted" | "[REDACTED]" => Ok(MaskStyle::Redacted),
            "category" | "[CATEGORY]" => Ok(MaskStyle::Category),
            "star" | "*" => Ok(MaskStyle::Star),
            other => Err(format!("unknown mask style {other:?} (expected redacted, category or star)")),
        }
    }
}

impl fmt::Display for MaskStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskStyle::Redacted => "redacted",
            MaskStyle::Category => "category",
            MaskStyle::Star => "star",
        })
    }
}

/// Replaces every gold span with a mask; text outside spans is untouched.
pub fn redact_gold(note: &ClinicalNote, style: MaskStyle) -> String {
    let mut chars: Vec<char> = note.text().chars().collect();
    // right to left so earlier offsets stay valid
    for a in note.annotations().iter().rev() {
        let mask = match style {
            MaskStyle::Redacted => "[REDACTED]".to_string(),
            MaskStyle::Category => format!("[{}]", a.category),
            MaskStyle::Star => "*".to_string(),
        };
        chars.splice(a.char_start..a.char_end, mask.chars());
    }
    chars.into_iter().collect()
}
