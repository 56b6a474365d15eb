//! Deterministic pattern extractor: term phrases attributed to nearby modal cues.

use std::collections::BTreeMap;

use regex::{Regex, RegexBuilder};
use serde::Deserialize;

use super::text::split_sentences;
use super::ExtractionError;
use crate::model::{Attitude, LicenseProfile, ProfileSource, Taxonomy, TermAssignment};

#[derive(Debug, Deserialize)]
struct PatternFile {
    modal: BTreeMap<String, Vec<String>>,
    terms: BTreeMap<String, Vec<String>>,
}

/// Compiled modal cues and per-term phrase patterns.
#[derive(Debug, Clone)]
pub struct RulePatterns {
    cues: Vec<(Attitude, Regex)>,
    terms: Vec<(String, Vec<Regex>)>,
}

fn compile(pattern: &str) -> Result<Regex, ExtractionError> {
    RegexBuilder::new(pattern)
        .case_insensitive(true)
        .build()
        .map_err(|e| ExtractionError::Patterns(format!("{pattern}: {e}")))
}

impl RulePatterns {
    /// Parses a pattern file. Term ids are resolved against `taxonomy` and
    /// kept in taxonomy order.
    pub fn from_toml(text: &str, taxonomy: &Taxonomy) -> Result<Self, ExtractionError> {
        let file: PatternFile =
            toml::from_str(text).map_err(|e| ExtractionError::Patterns(e.to_string()))?;
        let mut cues = Vec::new();
        for (name, patterns) in &file.modal {
            let attitude: Attitude = name.parse().map_err(|_| {
                ExtractionError::Patterns(format!("unknown attitude `{name}` in [modal]"))
            })?;
            for p in patterns {
                cues.push((attitude, compile(p)?));
            }
        }
        let mut terms: Vec<(usize, String, Vec<Regex>)> = Vec::new();
        for (name, patterns) in &file.terms {
            let id = taxonomy.canonical_id(name).ok_or_else(|| {
                ExtractionError::Patterns(format!("unknown term `{name}` in [terms]"))
            })?;
            let compiled = patterns
                .iter()
                .map(|p| compile(p))
                .collect::<Result<Vec<_>, _>>()?;
            let pos = taxonomy
                .position(id)
                .expect("canonical ids are in the taxonomy");
            terms.push((pos, id.to_string(), compiled));
        }
        terms.sort_by_key(|(pos, _, _)| *pos);
        Ok(RulePatterns {
            cues,
            terms: terms.into_iter().map(|(_, id, r)| (id, r)).collect(),
        })
    }

    pub fn bundled(taxonomy: &Taxonomy) -> Self {
        Self::from_toml(crate::bundled::TERM_PATTERNS, taxonomy)
            .expect("bundled patterns are valid")
    }

    /// Non-overlapping cue spans in `sentence`, longest first on overlap,
    /// returned in text order.
    fn cue_spans(&self, sentence: &str) -> Vec<(usize, usize, Attitude)> {
        let mut all: Vec<(usize, usize, Attitude)> = self
            .cues
            .iter()
            .flat_map(|(a, re)| {
                re.find_iter(sentence)
                    .map(move |m| (m.start(), m.end(), *a))
            })
            .collect();
        all.sort_by(|x, y| (y.1 - y.0).cmp(&(x.1 - x.0)).then(x.0.cmp(&y.0)));
        let mut kept: Vec<(usize, usize, Attitude)> = Vec::new();
        for span in all {
            if kept.iter().all(|k| span.1 <= k.0 || span.0 >= k.1) {
                kept.push(span);
            }
        }
        kept.sort();
        kept
    }

    /// Attitude of each term mentioned in `sentence`.
    fn sentence_hits(&self, sentence: &str) -> Vec<(&str, Attitude)> {
        let cues = self.cue_spans(sentence);
        if cues.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (term, patterns) in &self.terms {
            let mut attitude: Option<Attitude> = None;
            for re in patterns {
                for m in re.find_iter(sentence) {
                    // Skip term phrases that sit inside a cue ("may not be ..." etc.).
                    if cues.iter().any(|c| m.start() >= c.0 && m.end() <= c.1) {
                        continue;
                    }
                    let before = cues.iter().rev().find(|c| c.1 <= m.start());
                    let after = cues.iter().find(|c| c.0 >= m.start());
                    if let Some(c) = before.or(after) {
                        attitude = Some(attitude.map_or(c.2, |a| a.most_restrictive(c.2)));
                    }
                }
            }
            if let Some(a) = attitude {
                out.push((term.as_str(), a));
            }
        }
        out
    }
}

/// Extracts a partial, Declared-only profile. Conflicting hits for one term
/// resolve to the most restrictive attitude; the sentences supporting that
/// attitude become the evidence.
pub fn extract_rules(text: &str, license_id: &str, patterns: &RulePatterns) -> LicenseProfile {
    let mut hits: BTreeMap<&str, (Attitude, Vec<&str>)> = BTreeMap::new();
    for sentence in split_sentences(text) {
        for (term, attitude) in patterns.sentence_hits(sentence) {
            let entry = hits.entry(term).or_insert((attitude, Vec::new()));
            if attitude.restrictiveness() > entry.0.restrictiveness() {
                *entry = (attitude, Vec::new());
            }
            if attitude == entry.0 && !entry.1.contains(&sentence) {
                entry.1.push(sentence);
            }
        }
    }
    let order: Vec<&str> = patterns.terms.iter().map(|(t, _)| t.as_str()).collect();
    let assignments = order.into_iter().filter_map(|t| {
        hits.remove(t).map(|(attitude, evidence)| {
            TermAssignment::declared(
                t,
                attitude,
                evidence.into_iter().map(str::to_string).collect(),
            )
        })
    });
    LicenseProfile::from_assignments(license_id, ProfileSource::Extracted, assignments)
        .expect("one assignment per term")
}
