use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{enumerate_chains, ChainLayer, DependencyEdge, EdgeKind, SupplyChainGraph};
use crate::compat::{check_pair, CompatError, MissingLicensePolicy, TermConflict};
use crate::model::{
    complete_profile, is_sentinel, sentinel_profile, LicenseProfile, ModelError, Taxonomy,
};

/// Display name used for sentinel licenses in reports.
pub const NO_LICENSE: &str = "No License";

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("unresolved license ids: {}", .0.iter().map(|(n, l)| format!("node `{n}` has `{l}`")).collect::<Vec<_>>().join("; "))]
    Unresolved(Vec<(String, String)>),
    #[error(transparent)]
    Compat(#[from] CompatError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Completed profiles keyed by license id, looked up case-insensitively.
#[derive(Debug, Clone)]
pub struct ProfileStore {
    taxonomy: Taxonomy,
    profiles: BTreeMap<String, LicenseProfile>,
}

impl ProfileStore {
    pub fn new(taxonomy: Taxonomy) -> Self {
        ProfileStore {
            taxonomy,
            profiles: BTreeMap::new(),
        }
    }

    /// Store seeded with the bundled ground-truth profiles.
    pub fn bundled(taxonomy: Taxonomy) -> Self {
        let mut store = ProfileStore::new(taxonomy);
        for lic in crate::bundled::OSS.iter().chain(crate::bundled::AI) {
            let profile = LicenseProfile::from_json(lic.profile).expect("bundled profile parses");
            store.insert(profile).expect("bundled profile completes");
        }
        store
    }

    /// Loads every `*.json` profile document in `dir`.
    pub fn load_dir(taxonomy: Taxonomy, dir: &Path) -> Result<Self, ModelError> {
        let mut store = ProfileStore::new(taxonomy);
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|source| ModelError::Io {
                path: dir.display().to_string(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for p in paths {
            store.insert(LicenseProfile::read(&p)?)?;
        }
        Ok(store)
    }

    /// Completes and stores `profile`, replacing any profile with the same id.
    pub fn insert(&mut self, profile: LicenseProfile) -> Result<(), ModelError> {
        let completed = complete_profile(&profile, &self.taxonomy)?;
        self.profiles
            .insert(completed.license_id().to_lowercase(), completed);
        Ok(())
    }

    /// Registers `alias` as another name for an already stored license.
    pub fn alias(&mut self, alias: &str, license_id: &str) -> bool {
        match self.profiles.get(&license_id.to_lowercase()).cloned() {
            Some(p) => {
                self.profiles.insert(alias.to_lowercase(), p);
                true
            }
            None => false,
        }
    }

    pub fn get(&self, license_id: &str) -> Option<&LicenseProfile> {
        self.profiles.get(&license_id.to_lowercase())
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanOptions {
    pub missing_license: MissingLicensePolicy,
    /// Skip edges whose license ids do not resolve instead of failing.
    pub lenient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFinding {
    pub edge: DependencyEdge,
    pub downstream_license: String,
    pub upstream_license: String,
    pub conflicts: Vec<TermConflict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub path: Vec<String>,
    pub layer: ChainLayer,
    pub conflicted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedEdge {
    pub edge: DependencyEdge,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub edges_checked: usize,
    pub edges_conflicted: usize,
    pub chains_total: usize,
    pub chains_conflicted: usize,
    pub conflict_rate: f64,
    pub two_layer_total: usize,
    pub two_layer_conflicted: usize,
    pub three_layer_total: usize,
    pub three_layer_conflicted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCount {
    pub downstream: String,
    pub upstream: String,
    pub count: usize,
    pub share: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConflictReport {
    pub totals: Totals,
    /// Conflicting license pairs per edge kind, most frequent first.
    pub top_pairs: BTreeMap<EdgeKind, Vec<PairCount>>,
    /// Only edges with at least one term conflict.
    pub findings: Vec<EdgeFinding>,
    pub chains: Vec<ChainSummary>,
    pub skipped: Vec<SkippedEdge>,
    pub cycles: Vec<Vec<String>>,
}

impl ConflictReport {
    pub fn has_conflicts(&self) -> bool {
        !self.findings.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

enum Resolved<'a> {
    Profile(&'a LicenseProfile),
    Sentinel,
    Unresolved,
}

/// Checks every edge of `graph` with [`check_pair`] and aggregates the
/// findings over chains and license pairs.
pub fn scan_conflicts(
    graph: &SupplyChainGraph,
    profiles: &ProfileStore,
    options: ScanOptions,
) -> Result<ConflictReport, ScanError> {
    let taxonomy = profiles.taxonomy();
    let resolve = |license: &str| {
        if is_sentinel(license) {
            Resolved::Sentinel
        } else {
            profiles
                .get(license)
                .map_or(Resolved::Unresolved, Resolved::Profile)
        }
    };

    let mut unresolved = BTreeSet::new();
    for node in graph.nodes() {
        if matches!(resolve(&node.license_id), Resolved::Unresolved) {
            unresolved.insert((node.id.clone(), node.license_id.clone()));
        }
    }
    if !unresolved.is_empty() && !options.lenient {
        return Err(ScanError::Unresolved(unresolved.into_iter().collect()));
    }

    let mut report = ConflictReport::default();
    let mut conflicted_edges: BTreeSet<(String, String)> = BTreeSet::new();
    let mut pair_counts: BTreeMap<EdgeKind, BTreeMap<(String, String), usize>> = BTreeMap::new();

    for e in graph.edges() {
        let down_node = graph.node(&e.from).expect("edge endpoints exist");
        let up_node = graph.node(&e.to).expect("edge endpoints exist");
        let mut sentinel_down = None;
        let mut sentinel_up = None;
        let mut sides = Vec::with_capacity(2);
        for (node, slot) in [(down_node, &mut sentinel_down), (up_node, &mut sentinel_up)] {
            match resolve(&node.license_id) {
                Resolved::Profile(p) => sides.push(Some(p.license_id().to_string())),
                Resolved::Sentinel => {
                    *slot = Some(sentinel_profile(&node.license_id, taxonomy));
                    sides.push(None);
                }
                Resolved::Unresolved => {
                    report.skipped.push(SkippedEdge {
                        edge: e.clone(),
                        reason: format!(
                            "node `{}` has unresolved license `{}`",
                            node.id, node.license_id
                        ),
                    });
                    sides.clear();
                    break;
                }
            }
        }
        if sides.is_empty() {
            continue;
        }
        if options.missing_license == MissingLicensePolicy::Skip
            && (sentinel_down.is_some() || sentinel_up.is_some())
        {
            let node = if sentinel_down.is_some() {
                down_node
            } else {
                up_node
            };
            report.skipped.push(SkippedEdge {
                edge: e.clone(),
                reason: format!("node `{}` has no license (`{}`)", node.id, node.license_id),
            });
            continue;
        }
        let down = match &sentinel_down {
            Some(p) => p,
            None => profiles.get(&down_node.license_id).expect("resolved above"),
        };
        let up = match &sentinel_up {
            Some(p) => p,
            None => profiles.get(&up_node.license_id).expect("resolved above"),
        };
        report.totals.edges_checked += 1;
        let conflicts = check_pair(down, up, taxonomy)?;
        if conflicts.is_empty() {
            continue;
        }
        let name = |s: &Option<String>| s.clone().unwrap_or_else(|| NO_LICENSE.to_string());
        let (down_name, up_name) = (name(&sides[0]), name(&sides[1]));
        *pair_counts
            .entry(e.kind)
            .or_default()
            .entry((down_name.clone(), up_name.clone()))
            .or_insert(0) += 1;
        conflicted_edges.insert((e.from.clone(), e.to.clone()));
        report.findings.push(EdgeFinding {
            edge: e.clone(),
            downstream_license: down_name,
            upstream_license: up_name,
            conflicts,
        });
    }
    report.totals.edges_conflicted = report.findings.len();

    let enumeration = enumerate_chains(graph);
    report.cycles = enumeration.cycles;
    for chain in enumeration.chains {
        let conflicted = chain
            .path
            .windows(2)
            .any(|w| conflicted_edges.contains(&(w[0].clone(), w[1].clone())));
        let t = &mut report.totals;
        t.chains_total += 1;
        t.chains_conflicted += usize::from(conflicted);
        match chain.layer {
            ChainLayer::TwoLayer => {
                t.two_layer_total += 1;
                t.two_layer_conflicted += usize::from(conflicted);
            }
            ChainLayer::ThreeLayer => {
                t.three_layer_total += 1;
                t.three_layer_conflicted += usize::from(conflicted);
            }
        }
        report.chains.push(ChainSummary {
            path: chain.path,
            layer: chain.layer,
            conflicted,
        });
    }
    if report.totals.chains_total > 0 {
        report.totals.conflict_rate =
            report.totals.chains_conflicted as f64 / report.totals.chains_total as f64;
    }

    for (kind, counts) in pair_counts {
        let total: usize = counts.values().sum();
        let mut ranked: Vec<PairCount> = counts
            .into_iter()
            .map(|((downstream, upstream), count)| PairCount {
                downstream,
                upstream,
                count,
                share: count as f64 / total as f64,
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.count
                .cmp(&a.count)
                .then_with(|| a.downstream.cmp(&b.downstream))
                .then_with(|| a.upstream.cmp(&b.upstream))
        });
        report.top_pairs.insert(kind, ranked);
    }
    Ok(report)
}
