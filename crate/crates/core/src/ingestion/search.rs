//! Code-search providers locating candidate Python files for a signature.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;
use walkdir::WalkDir;

use super::scanner::match_signatures;
use super::signatures::ApiSignature;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search transport failure: {0}")]
    Transport(String),
    #[error("malformed search response: {0}")]
    Decode(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SearchHit {
    pub repository: String,
    pub path: String,
}

pub trait SearchProvider {
    fn search(&self, signature: &ApiSignature) -> Result<Vec<SearchHit>, SearchError>;
}

/// Treats each immediate subdirectory of `root` as a repository and reports
/// the Python files in it whose imports satisfy the signature.
pub struct LocalDirectoryProvider {
    root: PathBuf,
}

impl LocalDirectoryProvider {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        LocalDirectoryProvider { root: root.into() }
    }
}

/// Python files below `root`, sorted.
pub fn python_files(root: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = WalkDir::new(root)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "py"))
        .map(|e| e.into_path())
        .collect();
    files.sort();
    files
}

impl SearchProvider for LocalDirectoryProvider {
    fn search(&self, signature: &ApiSignature) -> Result<Vec<SearchHit>, SearchError> {
        let mut hits = Vec::new();
        for file in python_files(&self.root) {
            let Ok(rel) = file.strip_prefix(&self.root) else {
                continue;
            };
            let mut parts = rel.components();
            let repository = match (parts.next(), parts.clone().next()) {
                (Some(first), Some(_)) => first.as_os_str().to_string_lossy().into_owned(),
                _ => continue,
            };
            let Ok(source) = std::fs::read_to_string(&file) else {
                continue;
            };
            match match_signatures(&source, std::slice::from_ref(signature)) {
                Ok(libs) if !libs.is_empty() => hits.push(SearchHit {
                    repository,
                    path: parts.as_path().to_string_lossy().into_owned(),
                }),
                Ok(_) => {}
                Err(e) => log::debug!("{e}"),
            }
        }
        hits.sort();
        Ok(hits)
    }
}

/// Sourcegraph-style GraphQL search over public repositories.
pub struct SourcegraphProvider {
    endpoint: String,
    token: Option<String>,
    min_stars: u32,
    agent: ureq::Agent,
}

impl SourcegraphProvider {
    pub const DEFAULT_ENDPOINT: &'static str = "https://sourcegraph.com/.api/graphql";
    pub const TOKEN_ENV: &'static str = "SRC_ACCESS_TOKEN";

    pub fn new(endpoint: &str, min_stars: u32, timeout: Duration) -> Self {
        SourcegraphProvider {
            endpoint: endpoint.to_string(),
            token: std::env::var(Self::TOKEN_ENV)
                .ok()
                .filter(|t| !t.is_empty()),
            min_stars,
            agent: ureq::Agent::config_builder()
                .timeout_global(Some(timeout))
                .build()
                .into(),
        }
    }

    /// Search query for the import side of a signature.
    pub fn query(&self, signature: &ApiSignature) -> String {
        let module = regex::escape(&signature.import.module);
        let pattern = match &signature.import.symbol {
            Some(sym) => format!(
                r"^\s*from\s+{module}(\.\w+)*\s+import\s+.*\b{}\b",
                regex::escape(sym)
            ),
            None => format!(r"^\s*(import|from)\s+{module}\b"),
        };
        format!(
            "lang:python fork:no stars:>={} count:all patternType:regexp /{}/",
            self.min_stars, pattern
        )
    }
}

impl SearchProvider for SourcegraphProvider {
    fn search(&self, signature: &ApiSignature) -> Result<Vec<SearchHit>, SearchError> {
        let body = json!({
            "query": "query($q: String!) { search(query: $q, version: V3) { results { results { ... on FileMatch { repository { name } file { path } } } } } }",
            "variables": { "q": self.query(signature) },
        });
        let mut req = self.agent.post(&self.endpoint);
        if let Some(t) = &self.token {
            req = req.header("Authorization", &format!("token {t}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| SearchError::Transport(e.to_string()))?;
        let value: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| SearchError::Decode(e.to_string()))?;
        let results = value
            .pointer("/data/search/results/results")
            .and_then(Value::as_array)
            .ok_or_else(|| SearchError::Decode("missing data.search.results.results".into()))?;
        let mut hits: Vec<SearchHit> = results
            .iter()
            .filter_map(|r| {
                Some(SearchHit {
                    repository: r.pointer("/repository/name")?.as_str()?.to_string(),
                    path: r.pointer("/file/path")?.as_str()?.to_string(),
                })
            })
            .collect();
        hits.sort();
        hits.dedup();
        Ok(hits)
    }
}
