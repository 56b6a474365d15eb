//! Attitude rewrites of single sentences via a modal cue table.

use std::collections::BTreeMap;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use super::BenchmarkError;
use crate::model::{Attitude, Taxonomy};

#[derive(Debug, Deserialize)]
struct CueFile {
    row: Vec<CueRow>,
    actions: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueRow {
    pub can: String,
    pub cannot: String,
    pub must: String,
}

impl CueRow {
    pub fn phrase(&self, attitude: Attitude) -> &str {
        match attitude {
            Attitude::Can => &self.can,
            Attitude::Cannot => &self.cannot,
            Attitude::Must => &self.must,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewriteMethod {
    /// A modal cue inside the sentence was swapped.
    Substitution,
    /// An overriding sentence was appended after the original.
    ScopedOverride,
}

/// Cue rows plus per-term action phrases for override clauses.
#[derive(Debug, Clone)]
pub struct CueTable {
    rows: Vec<CueRow>,
    actions: BTreeMap<String, String>,
    /// Every cue phrase, longest first, with its attitude.
    matcher: Regex,
    phrases: Vec<(String, Attitude)>,
}

fn squash(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

impl CueTable {
    pub fn from_toml(text: &str, taxonomy: &Taxonomy) -> Result<Self, BenchmarkError> {
        let file: CueFile =
            toml::from_str(text).map_err(|e| BenchmarkError::Cues(e.to_string()))?;
        if file.row.is_empty() {
            return Err(BenchmarkError::Cues("no cue rows".into()));
        }
        let mut phrases: Vec<(String, Attitude)> = Vec::new();
        for (i, row) in file.row.iter().enumerate() {
            for a in Attitude::ALL {
                let p = squash(row.phrase(a));
                if p.is_empty() {
                    return Err(BenchmarkError::Cues(format!(
                        "row {}: empty {a} phrase",
                        i + 1
                    )));
                }
                match phrases.iter().find(|(q, _)| *q == p) {
                    Some((_, b)) if *b != a => {
                        return Err(BenchmarkError::Cues(format!(
                            "`{p}` listed as both {b} and {a}"
                        )))
                    }
                    Some(_) => {}
                    None => phrases.push((p, a)),
                }
            }
        }
        let mut actions = BTreeMap::new();
        for (term, action) in file.actions {
            let id = taxonomy.canonical_id(&term).ok_or_else(|| {
                BenchmarkError::Cues(format!("unknown term `{term}` in [actions]"))
            })?;
            actions.insert(id.to_string(), action);
        }
        phrases.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
        let alternation = phrases
            .iter()
            .map(|(p, _)| {
                p.split(' ')
                    .map(regex::escape)
                    .collect::<Vec<_>>()
                    .join(r"\s+")
            })
            .collect::<Vec<_>>()
            .join("|");
        let matcher = RegexBuilder::new(&format!(r"\b(?:{alternation})\b"))
            .case_insensitive(true)
            .build()
            .map_err(|e| BenchmarkError::Cues(e.to_string()))?;
        Ok(CueTable {
            rows: file.row,
            actions,
            matcher,
            phrases,
        })
    }

    pub fn bundled(taxonomy: &Taxonomy) -> Self {
        Self::from_toml(crate::bundled::REWRITE_CUES, taxonomy).expect("bundled cue table is valid")
    }

    pub fn rows(&self) -> &[CueRow] {
        &self.rows
    }

    pub fn action(&self, term: &str) -> Option<&str> {
        self.actions.get(term).map(String::as_str)
    }

    fn attitude_of(&self, phrase: &str) -> Option<Attitude> {
        let p = squash(phrase);
        self.phrases.iter().find(|(q, _)| *q == p).map(|(_, a)| *a)
    }

    fn replacement(&self, phrase: &str, from: Attitude, to: Attitude) -> Option<&str> {
        let p = squash(phrase);
        self.rows
            .iter()
            .find(|r| squash(r.phrase(from)) == p)
            .map(|r| r.phrase(to))
    }
}

fn match_case(original: &str, replacement: &str) -> String {
    let letters: Vec<char> = original.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return replacement.to_uppercase();
    }
    let mut chars = replacement.chars();
    match (original.chars().next(), chars.next()) {
        (Some(o), Some(first)) if o.is_uppercase() => first.to_uppercase().chain(chars).collect(),
        _ => replacement.to_string(),
    }
}

/// Rewrites the first `from` cue in `sentence` into the `to` phrasing.
/// Cues are matched whole-word and longest first, so the "must" of "must not"
/// never counts as a requirement cue.
pub fn rewrite_sentence(
    sentence: &str,
    term: &str,
    from: Attitude,
    to: Attitude,
    cues: &CueTable,
) -> Result<String, BenchmarkError> {
    if from == to {
        return Err(BenchmarkError::SameAttitude {
            term: term.to_string(),
            attitude: from,
        });
    }
    for m in cues.matcher.find_iter(sentence) {
        if cues.attitude_of(m.as_str()) != Some(from) {
            continue;
        }
        let replacement = cues
            .replacement(m.as_str(), from, to)
            .expect("every cue phrase belongs to a row");
        return Ok(format!(
            "{}{}{}",
            &sentence[..m.start()],
            match_case(m.as_str(), replacement),
            &sentence[m.end()..]
        ));
    }
    Err(BenchmarkError::RewriteGap {
        term: term.to_string(),
        sentence: sentence.to_string(),
    })
}

/// The clause appended by a scoped override, e.g. "Notwithstanding the
/// foregoing, you must not distribute the work or derivative works."
pub fn override_sentence(
    term: &str,
    to: Attitude,
    cues: &CueTable,
) -> Result<String, BenchmarkError> {
    let action = cues
        .action(term)
        .ok_or_else(|| BenchmarkError::Cues(format!("no action phrase for `{term}`")))?;
    Ok(format!(
        "Notwithstanding the foregoing, you {} {action}.",
        cues.rows[0].phrase(to)
    ))
}
