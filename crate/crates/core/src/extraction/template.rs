//! Exact license-template matching over normalized text.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::text::{jaccard, token_set};
use super::ExtractionError;
use crate::model::{NOASSERTION, NOT_FOUND};

/// Bumped whenever [`normalize`] changes behavior.
pub const NORMALIZATION_VERSION: u32 = 1;

/// Minimum token Jaccard similarity for an inexact match to count as an
/// edited template rather than an unrelated document.
pub const NOASSERTION_THRESHOLD: f64 = 0.5;

static PLACEHOLDER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"<[^<>\n]*>|\[[^\[\]\n]*\]").expect("valid regex"));
static NON_ALNUM: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[^a-z0-9]+").expect("valid regex"));

/// Case-folds, drops copyright lines and fill-in placeholders, and collapses
/// punctuation and whitespace. Idempotent.
pub fn normalize(text: &str) -> String {
    let lower = text.to_lowercase();
    let stripped = PLACEHOLDER.replace_all(&lower, " ");
    let kept: Vec<&str> = stripped
        .lines()
        .filter(|line| {
            let raw = line.trim_start();
            if raw.starts_with("(c)") || raw.starts_with('©') {
                return false;
            }
            let tokenized = NON_ALNUM.replace_all(raw, " ");
            let first = tokenized.split_whitespace().next();
            first != Some("copyright")
        })
        .collect();
    let joined = kept.join("\n");
    let spaced = NON_ALNUM.replace_all(&joined, " ");
    spaced.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone)]
struct Entry {
    normalized: String,
    tokens: HashSet<String>,
}

/// License id to normalized template text.
#[derive(Debug, Clone, Default)]
pub struct TemplateCatalog {
    entries: BTreeMap<String, Entry>,
}

impl TemplateCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bundled() -> Self {
        let mut catalog = Self::new();
        for (id, text) in crate::bundled::TEMPLATES {
            catalog
                .insert(id, text)
                .expect("bundled templates are valid");
        }
        catalog
    }

    /// One file per license; the file stem is the license id.
    pub fn load_dir(dir: &Path) -> Result<Self, ExtractionError> {
        let mut catalog = Self::new();
        let io = |source| ExtractionError::Io {
            path: dir.display().to_string(),
            source,
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        for path in paths {
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let text = std::fs::read_to_string(&path).map_err(|source| ExtractionError::Io {
                path: path.display().to_string(),
                source,
            })?;
            catalog.insert(id, &text)?;
        }
        Ok(catalog)
    }

    pub fn insert(&mut self, license_id: &str, text: &str) -> Result<(), ExtractionError> {
        let normalized = normalize(text);
        if normalized.is_empty() {
            return Err(ExtractionError::Template(format!(
                "template `{license_id}` is empty"
            )));
        }
        if self.entries.contains_key(license_id) {
            return Err(ExtractionError::Template(format!(
                "duplicate template `{license_id}`"
            )));
        }
        let tokens = token_set(&normalized);
        self.entries
            .insert(license_id.to_string(), Entry { normalized, tokens });
        Ok(())
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn normalized(&self, license_id: &str) -> Option<&str> {
        self.entries.get(license_id).map(|e| e.normalized.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TemplateMatch {
    Exact {
        license_id: String,
    },
    /// Close to a template but not identical.
    NoAssertion {
        closest: String,
        similarity: f64,
    },
    /// Not close to any template; a candidate for extraction.
    Unknown {
        closest: Option<String>,
        similarity: f64,
    },
    /// No license text at all.
    NotFound,
}

impl TemplateMatch {
    /// The license id a graph node should carry. Unknown texts are reported
    /// as NOASSERTION too, since no template applies.
    pub fn license_id(&self) -> &str {
        match self {
            TemplateMatch::Exact { license_id } => license_id,
            TemplateMatch::NoAssertion { .. } | TemplateMatch::Unknown { .. } => NOASSERTION,
            TemplateMatch::NotFound => NOT_FOUND,
        }
    }
}

pub fn match_template(text: &str, catalog: &TemplateCatalog) -> TemplateMatch {
    let normalized = normalize(text);
    if normalized.is_empty() {
        return TemplateMatch::NotFound;
    }
    if let Some((id, _)) = catalog
        .entries
        .iter()
        .find(|(_, e)| e.normalized == normalized)
    {
        return TemplateMatch::Exact {
            license_id: id.clone(),
        };
    }
    let tokens = token_set(&normalized);
    let mut best: Option<(&str, f64)> = None;
    for (id, e) in &catalog.entries {
        let s = jaccard(&tokens, &e.tokens);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((id, s));
        }
    }
    match best {
        Some((id, similarity)) if similarity >= NOASSERTION_THRESHOLD => {
            TemplateMatch::NoAssertion {
                closest: id.to_string(),
                similarity,
            }
        }
        other => TemplateMatch::Unknown {
            closest: other.map(|(id, _)| id.to_string()),
            similarity: other.map_or(0.0, |(_, s)| s),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use proptest::prelude::*;

    fn mit() -> &'static str {
        bundled::TEMPLATES
            .iter()
            .find(|(id, _)| *id == "MIT")
            .unwrap()
            .1
    }

    #[test]
    fn every_bundled_template_matches_itself() {
        let catalog = TemplateCatalog::bundled();
        assert_eq!(catalog.len(), bundled::TEMPLATES.len());
        for (id, text) in bundled::TEMPLATES {
            assert_eq!(match_template(text, &catalog).license_id(), *id);
        }
    }

    #[test]
    fn copyright_line_and_spacing_do_not_matter() {
        let catalog = TemplateCatalog::bundled();
        let edited = mit()
            .replace(
                "Copyright (c) <year> <copyright holders>",
                "Copyright (c) 2024 Jane Roe",
            )
            .replace(' ', "  ");
        let edited = format!("Copyright 2019 Someone\n\n{}", edited.to_uppercase());
        assert_eq!(
            match_template(&edited, &catalog),
            TemplateMatch::Exact {
                license_id: "MIT".into()
            }
        );
    }

    #[test]
    fn deleted_clause_is_noassertion() {
        let catalog = TemplateCatalog::bundled();
        let text = mit();
        let start = text.find("The above copyright notice").unwrap();
        let end = start + text[start..].find("\n\n").unwrap();
        let cut = format!("{}{}", &text[..start], &text[end..]);
        match match_template(&cut, &catalog) {
            TemplateMatch::NoAssertion {
                closest,
                similarity,
            } => {
                assert!(closest.starts_with("MIT"), "{closest}");
                assert!((NOASSERTION_THRESHOLD..1.0).contains(&similarity));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_is_not_found_and_prose_is_unknown() {
        let catalog = TemplateCatalog::bundled();
        assert_eq!(match_template("  \n ", &catalog), TemplateMatch::NotFound);
        assert_eq!(match_template("", &catalog).license_id(), NOT_FOUND);
        let m = match_template("Bananas are yellow and grow in bunches.", &catalog);
        assert!(matches!(m, TemplateMatch::Unknown { .. }));
        assert_eq!(m.license_id(), NOASSERTION);
    }

    #[test]
    fn duplicate_and_empty_templates_rejected() {
        let mut c = TemplateCatalog::new();
        c.insert("A", "text").unwrap();
        assert!(c.insert("A", "other").is_err());
        assert!(c.insert("B", "Copyright 2020 x").is_err());
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(text in "(?s).{0,300}") {
            let once = normalize(&text);
            prop_assert_eq!(normalize(&once), once.clone());
        }
    }
}
