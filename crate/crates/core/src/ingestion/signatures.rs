//! API signature catalog: which imports mark a file as hub-accessing, and
//! which calls carry a model identifier.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignatureError {
    #[error("signature catalog: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("signature {index} ({library}): {message}")]
    Invalid {
        index: usize,
        library: String,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Module path plus optional imported symbol, e.g. `diffusers` /
/// `StableDiffusionPipeline`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportPattern {
    pub module: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
}

/// A call that takes a model identifier. `name` is matched against the
/// trailing segments of the resolved callee (`from_pretrained` matches
/// `transformers.AutoModel.from_pretrained`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallPattern {
    pub name: String,
    #[serde(default)]
    pub position: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyword: Option<String>,
    /// Prefix removed from resolved identifiers (e.g. `hf-hub:`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip_prefix: Option<String>,
}

impl CallPattern {
    fn segments(&self) -> usize {
        self.name.split('.').count()
    }

    /// Whether the dotted `callee` ends with this pattern's segments.
    pub fn matches(&self, callee: &str) -> bool {
        callee == self.name
            || callee
                .strip_suffix(self.name.as_str())
                .is_some_and(|head| head.ends_with('.'))
    }

    /// Specificity used to prefer `PeftModel.from_pretrained` over `from_pretrained`.
    pub fn specificity(&self) -> usize {
        self.segments()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiSignature {
    pub library: String,
    #[serde(flatten)]
    pub import: ImportPattern,
    pub calls: Vec<CallPattern>,
}

#[derive(Debug, Deserialize)]
struct CatalogFile {
    signature: Vec<ApiSignature>,
}

/// Parses a TOML catalog of `[[signature]]` tables.
pub fn load_signatures(text: &str) -> Result<Vec<ApiSignature>, SignatureError> {
    let file: CatalogFile = toml::from_str(text)?;
    for (index, sig) in file.signature.iter().enumerate() {
        let invalid = |message: &str| SignatureError::Invalid {
            index,
            library: sig.library.clone(),
            message: message.to_string(),
        };
        if sig.import.module.trim().is_empty() {
            return Err(invalid("empty import module"));
        }
        for (i, c) in sig.calls.iter().enumerate() {
            if c.name.trim().is_empty() {
                return Err(invalid("empty call name"));
            }
            if sig.calls[..i].iter().any(|o| o.name == c.name) {
                return Err(invalid(&format!("duplicate call pattern `{}`", c.name)));
            }
        }
    }
    Ok(file.signature)
}

pub fn load_signatures_file(path: &Path) -> Result<Vec<ApiSignature>, SignatureError> {
    let text = std::fs::read_to_string(path).map_err(|source| SignatureError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_signatures(&text)
}

pub fn bundled_signatures() -> Vec<ApiSignature> {
    load_signatures(crate::bundled::SIGNATURES).expect("bundled signature catalog is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalog_covers_named_libraries() {
        let sigs = bundled_signatures();
        for lib in ["transformers", "spacy", "diffusers", "peft", "timm"] {
            assert!(sigs.iter().any(|s| s.library == lib), "{lib}");
        }
    }

    #[test]
    fn duplicate_call_patterns_rejected() {
        let text = r#"
            [[signature]]
            library = "x"
            module = "x"
            calls = [{ name = "load" }, { name = "load" }]
        "#;
        assert!(matches!(
            load_signatures(text),
            Err(SignatureError::Invalid { .. })
        ));
    }

    #[test]
    fn call_pattern_matches_trailing_segments() {
        let p = CallPattern {
            name: "PeftModel.from_pretrained".into(),
            position: 1,
            keyword: None,
            strip_prefix: None,
        };
        assert!(p.matches("peft.PeftModel.from_pretrained"));
        assert!(p.matches("PeftModel.from_pretrained"));
        assert!(!p.matches("XPeftModel.from_pretrained"));
        assert_eq!(p.specificity(), 2);
    }
}
