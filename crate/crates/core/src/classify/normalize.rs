use crate::error::{Error, Result};

/// Lowercased, punctuation-free form of an instruction with a byte map back
/// into the original string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    text: String,
    // (start, end) of the original char behind each normalized byte
    origin: Vec<(usize, usize)>,
    // normalized byte offsets of separators that replaced clause punctuation
    breaks: Vec<usize>,
}

impl Normalized {
    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Maps a normalized byte span `[start, end)` onto the original text.
    pub fn original_span(&self, start: usize, end: usize) -> (usize, usize) {
        debug_assert!(start < end && end <= self.text.len());
        (self.origin[start].0, self.origin[end - 1].1)
    }

    pub(crate) fn is_break(&self, separator_at: usize) -> bool {
        self.breaks.binary_search(&separator_at).is_ok()
    }
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

fn is_clause_punct(c: char) -> bool {
    matches!(c, ',' | '.' | ';' | ':' | '!' | '?' | '\u{2026}')
}

/// Lowercases, turns punctuation other than apostrophes and hyphens into
/// spaces and collapses whitespace. A `.` or `,` between two digits is kept
/// so "0.5" and "1,000" stay single tokens.
pub fn normalize_text(text: &str) -> Result<Normalized> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = String::with_capacity(text.len());
    let mut origin = Vec::with_capacity(text.len());
    let mut breaks = Vec::new();
    // pending separator: origin of its first char, whether it came from clause punctuation
    let mut pending: Option<((usize, usize), bool)> = None;

    for (k, &(pos, c)) in chars.iter().enumerate() {
        let span = (pos, pos + c.len_utf8());
        let digit_sep = matches!(c, '.' | ',')
            && k > 0
            && chars[k - 1].1.is_ascii_digit()
            && chars.get(k + 1).is_some_and(|&(_, n)| n.is_ascii_digit());
        let keep = c.is_alphanumeric() || is_apostrophe(c) || c == '-' || digit_sep;
        if !keep {
            let clause = is_clause_punct(c);
            pending = match pending {
                Some((first, b)) => Some((first, b || clause)),
                None => Some((span, clause)),
            };
            continue;
        }
        if let Some((first, clause)) = pending.take() {
            if !out.is_empty() {
                if clause {
                    breaks.push(out.len());
                }
                out.push(' ');
                origin.push(first);
            }
        }
        for lc in c.to_lowercase() {
            let before = out.len();
            out.push(lc);
            origin.extend(std::iter::repeat_n(span, out.len() - before));
        }
    }

    if out.is_empty() {
        return Err(Error::EmptyInstruction);
    }
    Ok(Normalized {
        text: out,
        origin,
        breaks,
    })
}
