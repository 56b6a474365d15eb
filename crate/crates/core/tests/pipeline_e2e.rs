use std::path::{Path, PathBuf};

use lichain::extraction::TemplateCatalog;
use lichain::graph::{GraphRecord, ProfileStore, ScanOptions};
use lichain::ingestion::{bundled_signatures, CachedFetcher, FixtureHub};
use lichain::pipeline::{run_pipeline, PipelineOutput};
use lichain::Taxonomy;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e")
}

fn run() -> PipelineOutput {
    let root = fixtures();
    let mut repos: Vec<PathBuf> = std::fs::read_dir(root.join("repos"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    repos.sort();
    let hub = CachedFetcher::new(FixtureHub::load_dir(&root.join("hub")).unwrap());
    let options = ScanOptions {
        lenient: true,
        ..ScanOptions::default()
    };
    run_pipeline(
        &repos,
        &bundled_signatures(),
        &hub,
        &TemplateCatalog::bundled(),
        &ProfileStore::bundled(Taxonomy::bundled()),
        options,
    )
    .unwrap()
}

#[test]
fn thirty_artifacts_and_golden_report() {
    let out = run();
    let artifacts = out
        .records
        .iter()
        .filter(|r| matches!(r, GraphRecord::Artifact(_)))
        .count();
    assert_eq!(artifacts, 30);
    assert_eq!(out.unresolved, Vec::<(String, String)>::new());

    let golden = fixtures().join("golden_report.json");
    let json = out.report.to_json();
    if std::env::var_os("UPDATE_GOLDEN").is_some() || !golden.exists() {
        std::fs::write(&golden, &json).unwrap();
    }
    assert_eq!(json, std::fs::read_to_string(&golden).unwrap());
    assert_eq!(run().report.to_json(), json, "second run differs");
}

#[test]
fn repository_licenses_and_diagnostics() {
    let out = run();
    let license = |name: &str| {
        out.repositories
            .iter()
            .find(|r| r.repository == name)
            .map(|r| r.license.license_id.clone())
            .unwrap()
    };
    assert_eq!(license("r01-mit-bert"), "MIT");
    assert_eq!(license("r06-nolicense-bart"), "Not Found");
    assert_eq!(license("r07-custom-t5"), "NOASSERTION");
    let import_only = out
        .repositories
        .iter()
        .find(|r| r.repository == "r09-mit-importonly")
        .unwrap();
    assert_eq!(import_only.records.len(), 1);
    assert!(!import_only.diagnostics.is_empty());
    let llama = out
        .repositories
        .iter()
        .find(|r| r.repository == "r10-isc-llama")
        .unwrap();
    assert_eq!(
        llama.invalid_identifiers,
        vec!["my-org/deleted-model".to_string()]
    );
}
