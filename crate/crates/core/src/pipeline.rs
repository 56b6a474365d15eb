//! Repository scanning and the offline end-to-end audit: scan, snowball,
//! template extraction, conflict check and report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::{match_template, TemplateCatalog, TemplateMatch};
use crate::graph::{
    build_graph, render_table, scan_conflicts, snowball_closure_from, ArtifactKind, ArtifactNode,
    ConflictReport, DependencyEdge, EdgeKind, GraphError, GraphRecord, ProfileStore, ScanError,
    ScanOptions,
};
use crate::ingestion::search::python_files;
use crate::ingestion::{
    match_signatures, scan_invocations, validate_identifiers, ApiSignature, MetadataFetcher,
    ScanFinding,
};
use crate::model::NOT_FOUND;

const LICENSE_FILES: [&str; 8] = [
    "LICENSE",
    "LICENSE.txt",
    "LICENSE.md",
    "LICENCE",
    "LICENCE.txt",
    "LICENCE.md",
    "COPYING",
    "COPYING.txt",
];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: no readable, parseable Python files")]
    NothingScannable(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Scan(#[from] ScanError),
}

/// Graph fragment and diagnostics for one repository.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepoScan {
    pub repository: String,
    pub license: TemplateMatchSummary,
    pub records: Vec<GraphRecord>,
    pub findings: Vec<ScanFinding>,
    pub files_scanned: usize,
    pub files_matched: usize,
    pub invalid_identifiers: Vec<String>,
    pub unverifiable_identifiers: Vec<String>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TemplateMatchSummary {
    pub file: Option<String>,
    pub license_id: String,
}

/// Finds the repository license file and maps it to a license id.
pub fn repository_license(root: &Path, catalog: &TemplateCatalog) -> TemplateMatchSummary {
    let Ok(entries) = std::fs::read_dir(root) else {
        return TemplateMatchSummary {
            file: None,
            license_id: NOT_FOUND.to_string(),
        };
    };
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().to_str().map(str::to_string))
        .collect();
    names.sort();
    for wanted in LICENSE_FILES {
        if let Some(name) = names.iter().find(|n| n.eq_ignore_ascii_case(wanted)) {
            let text = std::fs::read_to_string(root.join(name)).unwrap_or_default();
            let m = match_template(&text, catalog);
            if let TemplateMatch::NoAssertion {
                closest,
                similarity,
            } = &m
            {
                log::info!("{name}: deviates from {closest} template (similarity {similarity:.2})");
            }
            return TemplateMatchSummary {
                file: Some(name.clone()),
                license_id: m.license_id().to_string(),
            };
        }
    }
    TemplateMatchSummary {
        file: None,
        license_id: NOT_FOUND.to_string(),
    }
}

/// Scans every Python file below `root`, validates the model identifiers
/// found, and emits the repository node plus one model node and `UsesModel`
/// edge per valid identifier.
pub fn scan_repository(
    root: &Path,
    signatures: &[ApiSignature],
    fetcher: &dyn MetadataFetcher,
    catalog: &TemplateCatalog,
) -> Result<RepoScan, PipelineError> {
    let repository = root
        .canonicalize()
        .ok()
        .and_then(|p| p.file_name().and_then(|n| n.to_str()).map(str::to_string))
        .unwrap_or_else(|| root.display().to_string());
    let mut out = RepoScan {
        repository: repository.clone(),
        license: repository_license(root, catalog),
        ..RepoScan::default()
    };
    for path in python_files(root) {
        let rel = path
            .strip_prefix(root)
            .unwrap_or(&path)
            .display()
            .to_string();
        let source = match std::fs::read_to_string(&path) {
            Ok(s) => s,
            Err(e) => {
                out.diagnostics.push(format!("{rel}: unreadable: {e}"));
                continue;
            }
        };
        let libraries = match match_signatures(&source, signatures) {
            Ok(l) => l,
            Err(e) => {
                out.diagnostics.push(format!("{rel}: {}", e.message));
                continue;
            }
        };
        out.files_scanned += 1;
        if libraries.is_empty() {
            continue;
        }
        out.files_matched += 1;
        match scan_invocations(&rel, &source, signatures) {
            Ok(f) => out.findings.extend(f),
            Err(e) => out.diagnostics.push(e.to_string()),
        }
    }
    if out.files_scanned == 0 {
        return Err(PipelineError::NothingScannable(root.display().to_string()));
    }
    for f in out
        .findings
        .iter()
        .filter(|f| f.resolution.identifier().is_none())
    {
        out.diagnostics.push(format!(
            "{}:{}: `{}` argument not statically resolvable",
            f.file, f.line, f.callee
        ));
    }
    let candidates: Vec<String> = out
        .findings
        .iter()
        .filter_map(|f| f.resolution.identifier().map(str::to_string))
        .collect();
    let partition = validate_identifiers(&candidates, fetcher);
    if out.files_matched > 0 && partition.valid.is_empty() {
        out.diagnostics
            .push("hub libraries imported but no valid model identifier found; repository has no model edges".into());
    }
    out.records.push(GraphRecord::Artifact(ArtifactNode {
        id: repository.clone(),
        kind: ArtifactKind::OssRepo,
        license_id: out.license.license_id.clone(),
        metadata: BTreeMap::new(),
    }));
    for id in &partition.valid {
        let license = partition
            .metadata
            .get(id)
            .and_then(|m| m.license.clone())
            .filter(|l| !l.trim().is_empty())
            .unwrap_or_else(|| NOT_FOUND.to_string());
        out.records.push(GraphRecord::Artifact(ArtifactNode {
            id: id.clone(),
            kind: ArtifactKind::Llm,
            license_id: license,
            metadata: BTreeMap::new(),
        }));
        out.records.push(GraphRecord::Edge(DependencyEdge {
            from: repository.clone(),
            to: id.clone(),
            kind: EdgeKind::UsesModel,
        }));
    }
    out.invalid_identifiers = partition.invalid;
    out.unverifiable_identifiers = partition.unverifiable;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub repositories: Vec<RepoScan>,
    pub records: Vec<GraphRecord>,
    pub unresolved: Vec<(String, String)>,
    pub report: ConflictReport,
}

impl PipelineOutput {
    pub fn table(&self) -> String {
        render_table(&self.report)
    }
}

/// Runs scan → snowball → template extraction → conflict check over
/// `repositories`. Repository licenses come from template matching; model and
/// dataset licenses are resolved through `profiles`.
pub fn run_pipeline(
    repositories: &[PathBuf],
    signatures: &[ApiSignature],
    fetcher: &dyn MetadataFetcher,
    catalog: &TemplateCatalog,
    profiles: &ProfileStore,
    options: ScanOptions,
) -> Result<PipelineOutput, PipelineError> {
    let mut scans = Vec::with_capacity(repositories.len());
    let mut seed_records = Vec::new();
    for root in repositories {
        let scan = scan_repository(root, signatures, fetcher, catalog)?;
        // Model nodes are re-fetched by the snowball so their base models and
        // datasets get followed; keep only repository nodes and edges here.
        seed_records.extend(
            scan.records
                .iter()
                .filter(
                    |r| !matches!(r, GraphRecord::Artifact(n) if n.kind != ArtifactKind::OssRepo),
                )
                .cloned(),
        );
        scans.push(scan);
    }
    let closure = snowball_closure_from(&seed_records, &[], fetcher);
    let (graph, diagnostics) = build_graph(closure.records.clone())?;
    for e in &diagnostics.dangling_edges {
        log::warn!("dangling edge {} -> {}", e.from, e.to);
    }
    let report = scan_conflicts(&graph, profiles, options)?;
    Ok(PipelineOutput {
        repositories: scans,
        records: closure.records,
        unresolved: closure.unresolved,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::{bundled_signatures, FixtureHub, HubKind};
    use crate::model::Taxonomy;
    use serde_json::json;

    fn repo(files: &[(&str, &str)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for (name, body) in files {
            let p = dir.path().join(name);
            std::fs::create_dir_all(p.parent().unwrap()).unwrap();
            std::fs::write(p, body).unwrap();
        }
        dir
    }

    fn hub() -> FixtureHub {
        let mut hub = FixtureHub::new();
        hub.insert(
            HubKind::Model,
            "bert-base-uncased",
            json!({"cardData": {"license": "apache-2.0"}}),
        );
        hub
    }

    #[test]
    fn single_call_gives_two_nodes_one_edge() {
        let mit = crate::bundled::TEMPLATES
            .iter()
            .find(|(id, _)| *id == "MIT")
            .unwrap()
            .1;
        let r = repo(&[
            ("app.py", "from transformers import AutoModel\nm = AutoModel.from_pretrained(\"bert-base-uncased\")\n"),
            ("LICENSE", mit),
        ]);
        let scan = scan_repository(
            r.path(),
            &bundled_signatures(),
            &hub(),
            &TemplateCatalog::bundled(),
        )
        .unwrap();
        let nodes = scan
            .records
            .iter()
            .filter(|r| matches!(r, GraphRecord::Artifact(_)))
            .count();
        assert_eq!((nodes, scan.records.len() - nodes), (2, 1));
        assert_eq!(scan.license.license_id, "MIT");
    }

    #[test]
    fn import_only_repo_has_no_edges() {
        let r = repo(&[("app.py", "import transformers\n")]);
        let scan = scan_repository(
            r.path(),
            &bundled_signatures(),
            &hub(),
            &TemplateCatalog::bundled(),
        )
        .unwrap();
        assert_eq!(scan.records.len(), 1);
        assert_eq!(scan.license.license_id, NOT_FOUND);
        assert!(scan
            .diagnostics
            .iter()
            .any(|d| d.contains("no model edges")));
    }

    #[test]
    fn empty_directory_is_an_error() {
        let r = repo(&[]);
        assert!(matches!(
            scan_repository(
                r.path(),
                &bundled_signatures(),
                &hub(),
                &TemplateCatalog::bundled()
            ),
            Err(PipelineError::NothingScannable(_))
        ));
    }

    #[test]
    fn mit_repo_on_apache_model_conflicts() {
        let mit = crate::bundled::TEMPLATES
            .iter()
            .find(|(id, _)| *id == "MIT")
            .unwrap()
            .1;
        let r = repo(&[
            ("app.py", "from transformers import pipeline\np = pipeline('fill-mask', model='bert-base-uncased')\n"),
            ("LICENSE", mit),
        ]);
        let out = run_pipeline(
            &[r.path().to_path_buf()],
            &bundled_signatures(),
            &hub(),
            &TemplateCatalog::bundled(),
            &ProfileStore::bundled(Taxonomy::bundled()),
            ScanOptions::default(),
        )
        .unwrap();
        assert_eq!(out.report.totals.edges_conflicted, 1);
        assert_eq!(out.report.totals.chains_total, 1);
    }
}
