//! Scoring prediction directories against benchmark bundles.

use std::fmt::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{score_collection, Averaging, EvalMetrics, Scope};
use super::EvalError;
use crate::benchmark::read_collection;
use crate::model::{LicenseProfile, ProfileSource, Taxonomy};

/// Column order of the rendered table; other collections follow alphabetically.
pub const COLLECTION_ORDER: [&str; 4] = ["OSS", "OSS-Mut", "AI", "AI-Mut"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionEval {
    pub collection: String,
    pub licenses: usize,
    pub metrics: EvalMetrics,
    /// Licenses with no prediction file; scored as empty predictions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub approach: String,
    pub collections: Vec<CollectionEval>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scope: Scope,
    pub averaging: Averaging,
    pub rows: Vec<MetricsRow>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Collection directories (those holding a manifest) under `root`, in table order.
pub fn collection_dirs(root: &Path) -> Result<Vec<String>, EvalError> {
    let entries = std::fs::read_dir(root).map_err(|source| EvalError::Io {
        path: root.display().to_string(),
        source,
    })?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join("manifest.json").is_file())
        .filter_map(|e| e.file_name().to_str().map(str::to_string))
        .collect();
    names.sort_by_key(|n| {
        (
            COLLECTION_ORDER
                .iter()
                .position(|c| c == n)
                .unwrap_or(COLLECTION_ORDER.len()),
            n.clone(),
        )
    });
    Ok(names)
}

fn find_prediction(pred_root: &Path, collection: &str, id: &str) -> Option<std::path::PathBuf> {
    let file = format!("{id}.profile.json");
    [
        pred_root.join(collection).join(&file),
        pred_root.join(&file),
    ]
    .into_iter()
    .find(|p| p.is_file())
}

/// Scores one collection. Predictions are looked up as
/// `<pred_root>/<collection>/<id>.profile.json`, then `<pred_root>/<id>.profile.json`.
pub fn evaluate_collection(
    pred_root: &Path,
    truth_dir: &Path,
    scope: Scope,
    averaging: Averaging,
    taxonomy: &Taxonomy,
) -> Result<CollectionEval, EvalError> {
    let truth = read_collection(truth_dir)?;
    let name = truth.manifest.collection.clone();
    let mut pairs = Vec::with_capacity(truth.entries.len());
    let mut missing = Vec::new();
    for e in truth.entries {
        let predicted = match find_prediction(pred_root, &name, &e.id) {
            Some(path) => LicenseProfile::read(path)?,
            None => {
                missing.push(e.id.clone());
                LicenseProfile::new(&e.id, ProfileSource::Extracted)
            }
        };
        pairs.push((predicted, e.profile));
    }
    let licenses = pairs.len();
    let metrics = score_collection(&pairs, scope, averaging, taxonomy)?;
    Ok(CollectionEval {
        collection: name,
        licenses,
        metrics,
        missing,
    })
}

/// Scores every collection under `truth_root`.
pub fn evaluate_benchmark(
    approach: &str,
    pred_root: &Path,
    truth_root: &Path,
    scope: Scope,
    averaging: Averaging,
    taxonomy: &Taxonomy,
) -> Result<MetricsRow, EvalError> {
    let collections = collection_dirs(truth_root)?
        .into_iter()
        .map(|c| evaluate_collection(pred_root, &truth_root.join(c), scope, averaging, taxonomy))
        .collect::<Result<Vec<_>, _>>()?;
    if collections.is_empty() {
        return Err(EvalError::EmptyCollection);
    }
    Ok(MetricsRow {
        approach: approach.to_string(),
        collections,
    })
}

/// Rows are approaches; each collection contributes a P. / R. / F1 column group.
pub fn render_metrics_table(report: &MetricsReport) -> String {
    let mut collections: Vec<(String, usize)> = Vec::new();
    for row in &report.rows {
        for c in &row.collections {
            if !collections.iter().any(|(n, _)| *n == c.collection) {
                collections.push((c.collection.clone(), c.licenses));
            }
        }
    }
    let width = report
        .rows
        .iter()
        .map(|r| r.approach.len())
        .max()
        .unwrap_or(0)
        .max("Approach".len());
    let mut out = String::new();
    let _ = write!(out, "{:<width$}", "");
    for (name, n) in &collections {
        let _ = write!(out, " | {:^20}", format!("{name} ({n})"));
    }
    out.push('\n');
    let _ = write!(out, "{:<width$}", "Approach");
    for _ in &collections {
        let _ = write!(out, " | {:>6} {:>6} {:>6}", "P.", "R.", "F1");
    }
    out.push('\n');
    let _ = writeln!(out, "{}", "-".repeat(width + collections.len() * 23));
    for row in &report.rows {
        let _ = write!(out, "{:<width$}", row.approach);
        for (name, _) in &collections {
            match row.collections.iter().find(|c| &c.collection == name) {
                Some(c) => {
                    let m = c.metrics;
                    let _ = write!(
                        out,
                        " | {:>5.1}% {:>5.1}% {:>5.1}%",
                        m.precision * 100.0,
                        m.recall * 100.0,
                        m.f1 * 100.0
                    );
                }
                None => {
                    let _ = write!(out, " | {:>20}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}
