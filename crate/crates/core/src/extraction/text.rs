//! Sentence splitting and text utilities shared by the extractors.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;

static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[A-Za-z0-9]+").expect("valid regex"));

/// Splits license text into sentences. Every returned slice is a trimmed
/// substring of `text`.
///
/// Paragraphs break at blank lines. A single line break is a boundary when the
/// previous line ends in terminal punctuation or the next line starts a list
/// item; otherwise it is treated as wrapping. Inside a paragraph, a sentence
/// ends at `.`, `!` or `?` followed by whitespace and an uppercase letter,
/// digit, quote or opening bracket.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let bytes = text.as_bytes();
    let mut cuts = vec![0usize];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            let prev = text[..i].trim_end_matches([' ', '\t', '\r']);
            let rest = &text[i + 1..];
            let next = rest.trim_start_matches([' ', '\t', '\r']);
            let blank = next.starts_with('\n') || next.is_empty();
            let prev_terminal = prev.ends_with(['.', '!', '?', ':', ';']);
            if blank || prev_terminal || starts_list_item(next) || prev.is_empty() {
                cuts.push(i + 1);
            }
        } else if matches!(c, b'.' | b'!' | b'?') {
            let after = &text[i + 1..];
            let trimmed = after.trim_start_matches([' ', '\t']);
            let gap = after.len() - trimmed.len();
            if gap > 0
                && !trimmed.starts_with('\n')
                && (starts_sentence(trimmed) || starts_list_item(trimmed))
            {
                cuts.push(i + 1 + gap);
            }
        }
        i += 1;
    }
    cuts.push(text.len());
    cuts.dedup();
    cuts.windows(2)
        .map(|w| text[w[0]..w[1]].trim())
        .filter(|s| !s.is_empty())
        .collect()
}

fn starts_sentence(s: &str) -> bool {
    s.chars().next().is_some_and(|c| {
        c.is_uppercase() || c.is_ascii_digit() || matches!(c, '"' | '\'' | '(' | '[' | '“')
    })
}

fn starts_list_item(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some('(') | Some('-') | Some('*') | Some('•') => true,
        Some(c) if c.is_ascii_digit() || c.is_ascii_lowercase() => {
            let rest: String = chars.take(4).collect();
            rest.starts_with(". ")
                || rest.starts_with(") ")
                || rest
                    .trim_start_matches(|c: char| c.is_ascii_digit())
                    .starts_with(". ")
        }
        _ => false,
    }
}

/// Lowercased alphanumeric tokens.
pub fn tokens(text: &str) -> Vec<String> {
    WORD.find_iter(text)
        .map(|m| m.as_str().to_ascii_lowercase())
        .collect()
}

pub fn token_set(text: &str) -> HashSet<String> {
    tokens(text).into_iter().collect()
}

/// Jaccard similarity of two token sets; 1.0 for two empty sets.
pub fn jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Finds `sentence` in `text` verbatim, or with any whitespace runs
/// matching, and returns the matching slice of `text`.
pub fn find_verbatim<'a>(text: &'a str, sentence: &str) -> Option<&'a str> {
    let sentence = sentence.trim();
    if sentence.is_empty() {
        return None;
    }
    if let Some(pos) = text.find(sentence) {
        return Some(&text[pos..pos + sentence.len()]);
    }
    let pattern = sentence
        .split_whitespace()
        .map(regex::escape)
        .collect::<Vec<_>>()
        .join(r"\s+");
    let re = Regex::new(&pattern).ok()?;
    re.find(text).map(|m| m.as_str())
}
