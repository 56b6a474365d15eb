//! On-disk benchmark bundles: one directory per collection holding
//! `<id>.txt`, `<id>.profile.json` and `manifest.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::mutate::{generate_mutants, verify_mutant, MutationSpec};
use super::rewrite::CueTable;
use super::BenchmarkError;
use crate::bundled;
use crate::model::{LicenseProfile, Taxonomy};

#[derive(Debug, Clone, PartialEq)]
pub struct BundleEntry {
    pub id: String,
    pub text: String,
    pub profile: LicenseProfile,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub collection: String,
    pub licenses: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mutations: Vec<MutationSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collection {
    pub manifest: Manifest,
    pub entries: Vec<BundleEntry>,
}

/// The bundled base collections, `OSS` and `AI`.
pub fn bundled_collections() -> Vec<Collection> {
    let build = |name: &str, list: &[bundled::BundledLicense]| {
        let entries: Vec<BundleEntry> = list
            .iter()
            .map(|l| BundleEntry {
                id: l.id.to_string(),
                text: l.text.to_string(),
                profile: LicenseProfile::from_json(l.profile).expect("bundled profiles are valid"),
            })
            .collect();
        Collection {
            manifest: Manifest {
                collection: name.to_string(),
                licenses: entries.iter().map(|e| e.id.clone()).collect(),
                mutations: Vec::new(),
            },
            entries,
        }
    };
    vec![build("OSS", bundled::OSS), build("AI", bundled::AI)]
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> BenchmarkError + '_ {
    move |source| BenchmarkError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_collection(dir: &Path, collection: &Collection) -> Result<(), BenchmarkError> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for e in &collection.entries {
        let txt = dir.join(format!("{}.txt", e.id));
        std::fs::write(&txt, &e.text).map_err(io(&txt))?;
        e.profile
            .write(dir.join(format!("{}.profile.json", e.id)))?;
    }
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&collection.manifest).expect("manifest serializes");
    std::fs::write(&path, json + "\n").map_err(io(&path))
}

pub fn read_collection(dir: &Path) -> Result<Collection, BenchmarkError> {
    let path = dir.join("manifest.json");
    let raw = std::fs::read_to_string(&path).map_err(io(&path))?;
    let manifest: Manifest = serde_json::from_str(&raw).map_err(|e| BenchmarkError::Manifest {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut entries = Vec::with_capacity(manifest.licenses.len());
    for id in &manifest.licenses {
        let txt = dir.join(format!("{id}.txt"));
        let text = std::fs::read_to_string(&txt).map_err(io(&txt))?;
        let profile = LicenseProfile::read(dir.join(format!("{id}.profile.json")))?;
        if profile.license_id() != id {
            return Err(BenchmarkError::Manifest {
                path: dir.join(format!("{id}.profile.json")).display().to_string(),
                message: format!(
                    "profile names `{}`, manifest lists `{id}`",
                    profile.license_id()
                ),
            });
        }
        entries.push(BundleEntry {
            id: id.clone(),
            text,
            profile,
        });
    }
    Ok(Collection { manifest, entries })
}

/// Mutates every entry of `base` into a `<name>-Mut` collection. Every
/// mutant is verified before it is kept.
pub fn mutate_collection(
    base: &Collection,
    taxonomy: &Taxonomy,
    cues: &CueTable,
) -> Result<Collection, BenchmarkError> {
    let mut entries = Vec::new();
    let mut mutations = Vec::new();
    for e in &base.entries {
        for m in generate_mutants(&e.text, &e.profile, None, taxonomy, cues)? {
            if !verify_mutant(&e.profile, &e.text, &m) {
                return Err(BenchmarkError::Unverified(m.license_id));
            }
            entries.push(BundleEntry {
                id: m.license_id.clone(),
                text: m.text,
                profile: m.profile,
            });
            mutations.push(m.spec);
        }
    }
    Ok(Collection {
        manifest: Manifest {
            collection: format!("{}-Mut", base.manifest.collection),
            licenses: entries.iter().map(|e| e.id.clone()).collect(),
            mutations,
        },
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionCount {
    pub collection: String,
    pub licenses: usize,
    pub path: PathBuf,
}

/// Writes each base collection and its mutated counterpart under `out`.
pub fn write_benchmark(
    out: &Path,
    bases: &[Collection],
    taxonomy: &Taxonomy,
    cues: &CueTable,
) -> Result<Vec<CollectionCount>, BenchmarkError> {
    let mut counts = Vec::new();
    for base in bases {
        let mutated = mutate_collection(base, taxonomy, cues)?;
        for c in [base, &mutated] {
            let dir = out.join(&c.manifest.collection);
            write_collection(&dir, c)?;
            counts.push(CollectionCount {
                collection: c.manifest.collection.clone(),
                licenses: c.entries.len(),
                path: dir,
            });
        }
    }
    Ok(counts)
}
