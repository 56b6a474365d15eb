//! Typed supply-chain graphs: OSS repositories, models and datasets joined by
//! downstream→upstream dependency edges.

mod chains;
mod report;
mod scan;
mod snowball;

pub use chains::{enumerate_chains, find_cycles, Chain, ChainEnumeration, ChainLayer};
pub use report::render_table;
pub use scan::{
    scan_conflicts, ChainSummary, ConflictReport, EdgeFinding, PairCount, ProfileStore, ScanError,
    ScanOptions, SkippedEdge, Totals, NO_LICENSE,
};
pub use snowball::{snowball_closure, snowball_closure_from, SnowballResult};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    OssRepo,
    Llm,
    Dataset,
}

impl fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArtifactKind::OssRepo => "oss_repo",
            ArtifactKind::Llm => "llm",
            ArtifactKind::Dataset => "dataset",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    UsesModel,
    TrainedOn,
    DerivedFromBase,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 3] = [
        EdgeKind::UsesModel,
        EdgeKind::TrainedOn,
        EdgeKind::DerivedFromBase,
    ];

    /// Required (downstream, upstream) node kinds.
    pub fn endpoints(self) -> (ArtifactKind, ArtifactKind) {
        match self {
            EdgeKind::UsesModel => (ArtifactKind::OssRepo, ArtifactKind::Llm),
            EdgeKind::TrainedOn => (ArtifactKind::Llm, ArtifactKind::Dataset),
            EdgeKind::DerivedFromBase => (ArtifactKind::Llm, ArtifactKind::Llm),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EdgeKind::UsesModel => "OSS -> LLM",
            EdgeKind::TrainedOn => "LLM -> Dataset",
            EdgeKind::DerivedFromBase => "LLM -> LLM",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::UsesModel => "uses_model",
            EdgeKind::TrainedOn => "trained_on",
            EdgeKind::DerivedFromBase => "derived_from_base",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactNode {
    pub id: String,
    pub kind: ArtifactKind,
    pub license_id: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DependencyEdge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
}

/// One line of the graph interchange format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GraphRecord {
    Artifact(ArtifactNode),
    Edge(DependencyEdge),
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("record {index}: {kind} edge {from} -> {to} needs {expected_from} -> {expected_to}, found {found_from} -> {found_to}")]
    EdgeEndpoint {
        index: usize,
        kind: EdgeKind,
        from: String,
        to: String,
        expected_from: ArtifactKind,
        expected_to: ArtifactKind,
        found_from: ArtifactKind,
        found_to: ArtifactKind,
    },
    #[error("record {index}: artifact `{id}` redeclared as {second} (first seen as {first})")]
    KindClash {
        index: usize,
        id: String,
        first: ArtifactKind,
        second: ArtifactKind,
    },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildDiagnostics {
    /// Edges dropped because an endpoint was never declared.
    pub dangling_edges: Vec<DependencyEdge>,
    /// Artifacts declared more than once with differing license ids; the first wins.
    pub license_clashes: Vec<String>,
}

impl BuildDiagnostics {
    pub fn is_empty(&self) -> bool {
        self.dangling_edges.is_empty() && self.license_clashes.is_empty()
    }
}

/// Immutable graph with ordered node and edge sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupplyChainGraph {
    nodes: BTreeMap<String, ArtifactNode>,
    edges: BTreeSet<DependencyEdge>,
    upstream: BTreeMap<String, Vec<DependencyEdge>>,
}

impl SupplyChainGraph {
    pub fn node(&self, id: &str) -> Option<&ArtifactNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ArtifactNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &DependencyEdge> {
        self.edges.iter()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Outgoing (upstream-pointing) edges of `id`, ordered by target id then kind.
    pub fn upstream_of(&self, id: &str) -> &[DependencyEdge] {
        self.upstream.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Graph records: artifacts first, then edges, both in id order.
    pub fn to_records(&self) -> Vec<GraphRecord> {
        self.nodes
            .values()
            .cloned()
            .map(GraphRecord::Artifact)
            .chain(self.edges.iter().cloned().map(GraphRecord::Edge))
            .collect()
    }
}

/// Materializes a graph from interchange records. Edges whose endpoints are
/// never declared are dropped and reported; endpoint-kind violations and
/// conflicting node kinds are rejected.
pub fn build_graph(
    records: impl IntoIterator<Item = GraphRecord>,
) -> Result<(SupplyChainGraph, BuildDiagnostics), GraphError> {
    let mut nodes: BTreeMap<String, ArtifactNode> = BTreeMap::new();
    let mut pending = Vec::new();
    let mut diagnostics = BuildDiagnostics::default();
    for (index, record) in records.into_iter().enumerate() {
        match record {
            GraphRecord::Artifact(node) => match nodes.get_mut(&node.id) {
                None => {
                    nodes.insert(node.id.clone(), node);
                }
                Some(existing) => {
                    if existing.kind != node.kind {
                        return Err(GraphError::KindClash {
                            index,
                            id: node.id,
                            first: existing.kind,
                            second: node.kind,
                        });
                    }
                    if existing.license_id != node.license_id {
                        diagnostics.license_clashes.push(format!(
                            "artifact `{}` declared with license `{}` and `{}`; keeping the first",
                            node.id, existing.license_id, node.license_id
                        ));
                    }
                    for (k, v) in node.metadata {
                        existing.metadata.entry(k).or_insert(v);
                    }
                }
            },
            GraphRecord::Edge(edge) => pending.push((index, edge)),
        }
    }
    let mut edges = BTreeSet::new();
    for (index, edge) in pending {
        let (Some(from), Some(to)) = (nodes.get(&edge.from), nodes.get(&edge.to)) else {
            if !diagnostics.dangling_edges.contains(&edge) {
                diagnostics.dangling_edges.push(edge);
            }
            continue;
        };
        let (expected_from, expected_to) = edge.kind.endpoints();
        if from.kind != expected_from || to.kind != expected_to {
            return Err(GraphError::EdgeEndpoint {
                index,
                kind: edge.kind,
                from: edge.from,
                to: edge.to,
                expected_from,
                expected_to,
                found_from: from.kind,
                found_to: to.kind,
            });
        }
        edges.insert(edge);
    }
    let mut upstream: BTreeMap<String, Vec<DependencyEdge>> = BTreeMap::new();
    for e in &edges {
        upstream.entry(e.from.clone()).or_default().push(e.clone());
    }
    for list in upstream.values_mut() {
        list.sort_by(|a, b| (&a.to, a.kind).cmp(&(&b.to, b.kind)));
    }
    Ok((
        SupplyChainGraph {
            nodes,
            edges,
            upstream,
        },
        diagnostics,
    ))
}

/// Reads line-delimited graph records; blank lines are ignored.
pub fn read_records(reader: impl BufRead) -> Result<Vec<GraphRecord>, GraphError> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| GraphError::Parse {
                line: n + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

/// Writes one JSON record per line.
pub fn write_records(records: &[GraphRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn artifact(id: &str, kind: ArtifactKind, license_id: &str) -> GraphRecord {
    GraphRecord::Artifact(ArtifactNode {
        id: id.to_string(),
        kind,
        license_id: license_id.to_string(),
        metadata: BTreeMap::new(),
    })
}

pub fn edge(from: &str, to: &str, kind: EdgeKind) -> GraphRecord {
    GraphRecord::Edge(DependencyEdge {
        from: from.to_string(),
        to: to.to_string(),
        kind,
    })
}
