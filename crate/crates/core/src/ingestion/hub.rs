//! Model-hub metadata: normalization of raw API records, fixture and live
//! fetchers, retry and caching wrappers.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HubKind {
    Model,
    Dataset,
}

impl HubKind {
    fn api_segment(self) -> &'static str {
        match self {
            HubKind::Model => "models",
            HubKind::Dataset => "datasets",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HubMetadata {
    pub id: String,
    pub kind: HubKind,
    /// `None` when the record declares no license at all.
    pub license: Option<String>,
    pub base_models: Vec<String>,
    pub datasets: Vec<String>,
    pub owner_tags: Vec<String>,
    pub task_category: Option<String>,
    pub downloads: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchOutcome {
    Found(HubMetadata),
    NotFound,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FetchError {
    #[error("empty artifact id")]
    EmptyId,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("rate limited")]
    RateLimited { retry_after: Option<u64> },
    #[error("offline and no fixture store configured")]
    Offline,
    #[error("malformed metadata record for `{id}`: {message}")]
    Decode { id: String, message: String },
}

impl FetchError {
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            FetchError::Transport(_) | FetchError::RateLimited { .. }
        )
    }
}

pub trait MetadataFetcher: Send + Sync {
    fn fetch(&self, kind: HubKind, id: &str) -> Result<FetchOutcome, FetchError>;
}

impl<F: MetadataFetcher + ?Sized> MetadataFetcher for &F {
    fn fetch(&self, kind: HubKind, id: &str) -> Result<FetchOutcome, FetchError> {
        (**self).fetch(kind, id)
    }
}

impl<F: MetadataFetcher + ?Sized> MetadataFetcher for Box<F> {
    fn fetch(&self, kind: HubKind, id: &str) -> Result<FetchOutcome, FetchError> {
        (**self).fetch(kind, id)
    }
}

/// Fetches metadata for one artifact id.
pub fn fetch_metadata(
    fetcher: &dyn MetadataFetcher,
    kind: HubKind,
    id: &str,
) -> Result<FetchOutcome, FetchError> {
    if id.trim().is_empty() {
        return Err(FetchError::EmptyId);
    }
    fetcher.fetch(kind, id.trim())
}

/// Normalizes a raw hub API record. Card data takes precedence; `license:`,
/// `base_model:` and `dataset:` tags fill in what the card omits.
pub fn normalize_record(kind: HubKind, id: &str, raw: &Value) -> HubMetadata {
    let card = raw.get("cardData").or_else(|| raw.get("card_data"));
    let tags: Vec<&str> = raw
        .get("tags")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let tagged = |prefix: &str| -> Vec<String> {
        tags.iter()
            .filter_map(|t| t.strip_prefix(prefix))
            // `base_model:finetune:org/name` style relation qualifiers
            .map(|rest| rest.rsplit(':').next().unwrap_or(rest).to_string())
            .collect()
    };

    let license = card
        .and_then(|c| c.get("license"))
        .and_then(first_string)
        .or_else(|| tagged("license:").into_iter().next());
    let mut base_models = card
        .and_then(|c| c.get("base_model"))
        .map(strings)
        .unwrap_or_default();
    base_models.extend(tagged("base_model:"));
    let mut datasets = card
        .and_then(|c| c.get("datasets"))
        .map(strings)
        .unwrap_or_default();
    datasets.extend(tagged("dataset:"));
    let mut owner_tags = raw
        .get("author")
        .and_then(Value::as_str)
        .map(|a| vec![a.to_string()])
        .unwrap_or_default();
    owner_tags.extend(tagged("owner:"));

    HubMetadata {
        id: raw
            .get("id")
            .and_then(Value::as_str)
            .unwrap_or(id)
            .to_string(),
        kind,
        license,
        base_models: dedup(base_models),
        datasets: dedup(datasets),
        owner_tags: dedup(owner_tags),
        task_category: raw
            .get("pipeline_tag")
            .and_then(Value::as_str)
            .or_else(|| {
                card.and_then(|c| c.get("task_categories"))
                    .and_then(|v| v.get(0))
                    .and_then(Value::as_str)
            })
            .map(str::to_string),
        downloads: raw.get("downloads").and_then(Value::as_u64),
    }
}

fn first_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => items.iter().find_map(Value::as_str).map(str::to_string),
        _ => None,
    }
}

fn strings(v: &Value) -> Vec<String> {
    match v {
        Value::String(s) => vec![s.clone()],
        Value::Array(items) => items
            .iter()
            .filter_map(Value::as_str)
            .map(str::to_string)
            .collect(),
        _ => Vec::new(),
    }
}

fn dedup(items: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(items.len());
    for item in items {
        let item = item.trim().to_string();
        if !item.is_empty() && !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

/// File name used for `id` in a fixture store (`/` becomes `__`).
pub fn fixture_file_name(id: &str) -> String {
    format!("{}.json", id.replace('/', "__"))
}

/// Raw hub records held in memory, optionally loaded from a directory with
/// `models/` and `datasets/` subdirectories. Counts every fetch.
#[derive(Debug, Default)]
pub struct FixtureHub {
    records: BTreeMap<(HubKind, String), Value>,
    fetches: AtomicUsize,
    log: Mutex<Vec<(HubKind, String)>>,
}

impl FixtureHub {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load_dir(root: &Path) -> std::io::Result<Self> {
        let mut hub = FixtureHub::new();
        for kind in [HubKind::Model, HubKind::Dataset] {
            let dir = root.join(kind.api_segment());
            if !dir.is_dir() {
                continue;
            }
            for entry in std::fs::read_dir(&dir)? {
                let path = entry?.path();
                if path.extension().is_none_or(|e| e != "json") {
                    continue;
                }
                let text = std::fs::read_to_string(&path)?;
                let raw: Value = serde_json::from_str(&text).map_err(|e| {
                    std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("{}: {e}", path.display()),
                    )
                })?;
                let stem = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or_default();
                let id = raw
                    .get("id")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .unwrap_or_else(|| stem.replace("__", "/"));
                hub.records.insert((kind, id), raw);
            }
        }
        Ok(hub)
    }

    pub fn insert(&mut self, kind: HubKind, id: &str, raw: Value) {
        self.records.insert((kind, id.to_string()), raw);
    }

    pub fn fetch_count(&self) -> usize {
        self.fetches.load(Ordering::SeqCst)
    }

    pub fn fetch_log(&self) -> Vec<(HubKind, String)> {
        self.log.lock().expect("fetch log").clone()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl MetadataFetcher for FixtureHub {
    fn fetch(&self, kind: HubKind, id: &str) -> Result<FetchOutcome, FetchError> {
        self.fetches.fetch_add(1, Ordering::SeqCst);
        self.log
            .lock()
            .expect("fetch log")
            .push((kind, id.to_string()));
        Ok(match self.records.get(&(kind, id.to_string())) {
            Some(raw) => FetchOutcome::Found(normalize_record(kind, id, raw)),
            None => FetchOutcome::NotFound,
        })
    }
}

/// Fetcher used under `--offline` when no fixture store exists.
#[derive(Debug, Default, Clone, Copy)]
pub struct OfflineFetcher;

impl MetadataFetcher for OfflineFetcher {
    fn fetch(&self, _kind: HubKind, _id: &str) -> Result<FetchOutcome, FetchError> {
        Err(FetchError::Offline)
    }
}

/// HTTPS client for the hub REST API (`/api/models/<id>`, `/api/datasets/<id>`).
pub struct LiveHub {
    base_url: String,
    token: Option<String>,
    agent: ureq::Agent,
}

impl LiveHub {
    pub const DEFAULT_BASE_URL: &'static str = "https://huggingface.co";
    /// Environment variable holding an optional access token.
    pub const TOKEN_ENV: &'static str = "HF_TOKEN";

    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        LiveHub {
            base_url: base_url.trim_end_matches('/').to_string(),
            token: std::env::var(Self::TOKEN_ENV)
                .ok()
                .filter(|t| !t.is_empty()),
            agent,
        }
    }
}

impl MetadataFetcher for LiveHub {
    fn fetch(&self, kind: HubKind, id: &str) -> Result<FetchOutcome, FetchError> {
        let url = format!("{}/api/{}/{}", self.base_url, kind.api_segment(), id);
        let mut req = self.agent.get(&url);
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req
            .call()
            .map_err(|e| FetchError::Transport(e.to_string()))?;
        match resp.status().as_u16() {
            200 => {
                let raw: Value = resp
                    .body_mut()
                    .read_json()
                    .map_err(|e| FetchError::Decode {
                        id: id.to_string(),
                        message: e.to_string(),
                    })?;
                Ok(FetchOutcome::Found(normalize_record(kind, id, &raw)))
            }
            401 | 403 | 404 => Ok(FetchOutcome::NotFound),
            429 => Err(FetchError::RateLimited {
                retry_after: resp
                    .headers()
                    .get("retry-after")
                    .and_then(|v| v.to_str().ok())
                    .and_then(|v| v.parse().ok()),
            }),
            status => Err(FetchError::Transport(format!("HTTP {status} for {url}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        RetryPolicy {
            max_retries: 0,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
        }
    }

    /// Delay before retry number `attempt` (0-based), doubling each time.
    pub fn delay(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

/// Retries transport failures and rate limits with bounded exponential backoff.
pub struct RetryingFetcher<F> {
    inner: F,
    policy: RetryPolicy,
}

impl<F: MetadataFetcher> RetryingFetcher<F> {
    pub fn new(inner: F, policy: RetryPolicy) -> Self {
        RetryingFetcher { inner, policy }
    }
}

impl<F: MetadataFetcher> MetadataFetcher for RetryingFetcher<F> {
    fn fetch(&self, kind: HubKind, id: &str) -> Result<FetchOutcome, FetchError> {
        let mut attempt = 0;
        loop {
            match self.inner.fetch(kind, id) {
                Err(e) if e.is_retryable() && attempt < self.policy.max_retries => {
                    let mut delay = self.policy.delay(attempt);
                    if let FetchError::RateLimited {
                        retry_after: Some(s),
                    } = e
                    {
                        delay = delay.max(Duration::from_secs(s)).min(self.policy.max_delay);
                    }
                    log::debug!("retrying {id} after {delay:?}: {e}");
                    std::thread::sleep(delay);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

/// Memoizes successful lookups (including not-found) for the lifetime of a run.
pub struct CachedFetcher<F> {
    inner: F,
    cache: Mutex<HashMap<(HubKind, String), FetchOutcome>>,
}

impl<F: MetadataFetcher> CachedFetcher<F> {
    pub fn new(inner: F) -> Self {
        CachedFetcher {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }
}

impl<F: MetadataFetcher> MetadataFetcher for CachedFetcher<F> {
    fn fetch(&self, kind: HubKind, id: &str) -> Result<FetchOutcome, FetchError> {
        let key = (kind, id.to_string());
        if let Some(hit) = self.cache.lock().expect("cache").get(&key) {
            return Ok(hit.clone());
        }
        let outcome = self.inner.fetch(kind, id)?;
        self.cache
            .lock()
            .expect("cache")
            .insert(key, outcome.clone());
        Ok(outcome)
    }
}

/// Directory-backed fixture store path helper.
pub fn fixture_path(root: &Path, kind: HubKind, id: &str) -> PathBuf {
    root.join(kind.api_segment()).join(fixture_file_name(id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn supernova() -> Value {
        json!({
            "id": "arcee-ai/Llama-3.1-SuperNova-Lite",
            "author": "arcee-ai",
            "downloads": 12000,
            "pipeline_tag": "text-generation",
            "tags": ["transformers", "license:llama3", "base_model:meta-llama/Llama-3.1-8B-Instruct",
                     "dataset:arcee-ai/EvolKit-20k"],
            "cardData": {
                "license": "llama3",
                "base_model": "meta-llama/Llama-3.1-8B-Instruct",
                "datasets": ["arcee-ai/EvolKit-20k", "arcee-ai/EvolKit-20k"]
            }
        })
    }

    #[test]
    fn record_fields_are_normalized() {
        let m = normalize_record(HubKind::Model, "x", &supernova());
        assert_eq!(m.id, "arcee-ai/Llama-3.1-SuperNova-Lite");
        assert_eq!(m.license.as_deref(), Some("llama3"));
        assert_eq!(m.base_models, vec!["meta-llama/Llama-3.1-8B-Instruct"]);
        assert_eq!(m.datasets, vec!["arcee-ai/EvolKit-20k"]);
        assert_eq!(m.owner_tags, vec!["arcee-ai"]);
        assert_eq!(m.downloads, Some(12000));
    }

    #[test]
    fn missing_license_is_absent_and_empty_string_is_kept() {
        let none = normalize_record(HubKind::Model, "a", &json!({"id": "a"}));
        assert_eq!(none.license, None);
        let empty = normalize_record(
            HubKind::Model,
            "a",
            &json!({"id": "a", "cardData": {"license": ""}}),
        );
        assert_eq!(empty.license.as_deref(), Some(""));
    }

    #[test]
    fn qualified_base_model_tags_are_stripped() {
        let m = normalize_record(
            HubKind::Model,
            "a",
            &json!({"tags": ["base_model:finetune:org/base"]}),
        );
        assert_eq!(m.base_models, vec!["org/base"]);
    }

    #[test]
    fn empty_id_is_rejected() {
        assert_eq!(
            fetch_metadata(&FixtureHub::new(), HubKind::Model, " "),
            Err(FetchError::EmptyId)
        );
    }

    struct Flaky {
        failures: AtomicUsize,
    }

    impl MetadataFetcher for Flaky {
        fn fetch(&self, _: HubKind, _: &str) -> Result<FetchOutcome, FetchError> {
            if self.failures.fetch_sub(1, Ordering::SeqCst) > 0 {
                Err(FetchError::RateLimited { retry_after: None })
            } else {
                Ok(FetchOutcome::NotFound)
            }
        }
    }

    #[test]
    fn retries_are_bounded() {
        let ok = RetryingFetcher::new(
            Flaky {
                failures: AtomicUsize::new(2),
            },
            RetryPolicy {
                max_retries: 2,
                ..RetryPolicy::none()
            },
        );
        assert_eq!(ok.fetch(HubKind::Model, "a"), Ok(FetchOutcome::NotFound));
        let fail = RetryingFetcher::new(
            Flaky {
                failures: AtomicUsize::new(5),
            },
            RetryPolicy {
                max_retries: 2,
                ..RetryPolicy::none()
            },
        );
        assert!(matches!(
            fail.fetch(HubKind::Model, "a"),
            Err(FetchError::RateLimited { .. })
        ));
    }

    #[test]
    fn backoff_doubles_up_to_cap() {
        let p = RetryPolicy {
            max_retries: 5,
            base_delay: Duration::from_millis(100),
            max_delay: Duration::from_millis(350),
        };
        assert_eq!(p.delay(0), Duration::from_millis(100));
        assert_eq!(p.delay(1), Duration::from_millis(200));
        assert_eq!(p.delay(2), Duration::from_millis(350));
    }

    #[test]
    fn cache_prevents_refetch() {
        let mut hub = FixtureHub::new();
        hub.insert(HubKind::Model, "gpt2", json!({"id": "gpt2"}));
        let cached = CachedFetcher::new(hub);
        cached.fetch(HubKind::Model, "gpt2").unwrap();
        cached.fetch(HubKind::Model, "gpt2").unwrap();
        assert_eq!(cached.inner().fetch_count(), 1);
    }
}
