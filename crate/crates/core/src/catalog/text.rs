//! Text normalization and fuzzy similarity for catalog lookup.

use unicode_normalization::UnicodeNormalization;

/// Lowercase, NFC-compose, replace punctuation and symbols with spaces and
/// collapse whitespace. Tokens are recovered by splitting on `' '`.
pub fn normalize_text(raw: &str) -> String {
    let mut current = normalize_once(raw);
    // Lowercasing can expose new composition pairs; iterate to a fixpoint.
    for _ in 0..4 {
        let next = normalize_once(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn normalize_once(raw: &str) -> String {
    let lowered: String = raw.nfc().collect::<String>().to_lowercase();
    let mapped: String = lowered
        .nfc()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits an already normalized string into tokens.
pub fn tokens(normalized: &str) -> impl Iterator<Item = &str> {
    normalized.split(' ').filter(|t| !t.is_empty())
}

fn token_sorted(normalized: &str) -> String {
    let mut toks: Vec<&str> = tokens(normalized).collect();
    toks.sort_unstable();
    toks.join(" ")
}

/// Token-sort Levenshtein ratio: `1 - lev(sorted(a), sorted(b)) / max_len`,
/// lengths counted in chars. Two empty strings are identical (1.0).
pub fn fuzzy_similarity(a: &str, b: &str) -> f64 {
    let a = token_sorted(a);
    let b = token_sorted(b);
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    let dist = strsim::levenshtein(&a, &b);
    1.0 - dist as f64 / max_len as f64
}
