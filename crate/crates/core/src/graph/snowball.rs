use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{
    build_graph, find_cycles, ArtifactKind, ArtifactNode, DependencyEdge, EdgeKind, GraphRecord,
};
use crate::ingestion::hub::{FetchOutcome, HubKind, HubMetadata, MetadataFetcher};
use crate::model::NOT_FOUND;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnowballResult {
    /// Graph fragment: artifacts in id order, then edges.
    pub records: Vec<GraphRecord>,
    /// Artifacts that could not be fetched, with the reason.
    pub unresolved: Vec<(String, String)>,
    /// Base-model cycles present in the fragment.
    pub cycles: Vec<Vec<String>>,
    /// Number of metadata fetches issued.
    pub fetched: usize,
}

/// Follows base-model and dataset references from `seeds` until no fetched
/// artifact references an unfetched one.
pub fn snowball_closure(seeds: &[String], fetcher: &dyn MetadataFetcher) -> SnowballResult {
    snowball_closure_from(&[], seeds, fetcher)
}

/// Like [`snowball_closure`], treating every artifact already present in
/// `existing` as fetched. Referenced ids with no artifact record are queued.
pub fn snowball_closure_from(
    existing: &[GraphRecord],
    seeds: &[String],
    fetcher: &dyn MetadataFetcher,
) -> SnowballResult {
    let mut nodes: BTreeMap<String, ArtifactNode> = BTreeMap::new();
    let mut edges: BTreeSet<DependencyEdge> = BTreeSet::new();
    let mut queue: VecDeque<(String, HubKind)> = VecDeque::new();
    for r in existing {
        match r {
            GraphRecord::Artifact(n) => {
                nodes.insert(n.id.clone(), n.clone());
            }
            GraphRecord::Edge(e) => {
                edges.insert(e.clone());
            }
        }
    }
    let mut visited: BTreeSet<String> = nodes.keys().cloned().collect();
    for e in &edges {
        let kind = match e.kind {
            EdgeKind::TrainedOn => HubKind::Dataset,
            _ => HubKind::Model,
        };
        queue.push_back((e.to.clone(), kind));
    }
    for s in seeds {
        queue.push_back((s.clone(), HubKind::Model));
    }

    let mut result = SnowballResult::default();
    while let Some((id, kind)) = queue.pop_front() {
        if !visited.insert(id.clone()) {
            continue;
        }
        result.fetched += 1;
        let node_kind = match kind {
            HubKind::Model => ArtifactKind::Llm,
            HubKind::Dataset => ArtifactKind::Dataset,
        };
        let mut metadata = BTreeMap::new();
        let license = match fetcher.fetch(kind, &id) {
            Ok(FetchOutcome::Found(meta)) => {
                for base in &meta.base_models {
                    edges.insert(DependencyEdge {
                        from: id.clone(),
                        to: base.clone(),
                        kind: EdgeKind::DerivedFromBase,
                    });
                    queue.push_back((base.clone(), HubKind::Model));
                }
                if kind == HubKind::Model {
                    for ds in &meta.datasets {
                        edges.insert(DependencyEdge {
                            from: id.clone(),
                            to: ds.clone(),
                            kind: EdgeKind::TrainedOn,
                        });
                        queue.push_back((ds.clone(), HubKind::Dataset));
                    }
                }
                describe(&meta, &mut metadata);
                node_license(&meta)
            }
            Ok(FetchOutcome::NotFound) => {
                metadata.insert("status".into(), "not_found".into());
                result
                    .unresolved
                    .push((id.clone(), "not found on hub".into()));
                NOT_FOUND.to_string()
            }
            Err(e) => {
                log::warn!("could not fetch metadata for {id}: {e}");
                metadata.insert("status".into(), "unverifiable".into());
                result.unresolved.push((id.clone(), e.to_string()));
                NOT_FOUND.to_string()
            }
        };
        nodes.insert(
            id.clone(),
            ArtifactNode {
                id,
                kind: node_kind,
                license_id: license,
                metadata,
            },
        );
    }

    result.records = nodes
        .into_values()
        .map(GraphRecord::Artifact)
        .chain(edges.into_iter().map(GraphRecord::Edge))
        .collect();
    if let Ok((graph, _)) = build_graph(result.records.clone()) {
        result.cycles = find_cycles(&graph);
    }
    result
}

fn node_license(meta: &HubMetadata) -> String {
    match meta.license.as_deref() {
        Some(l) if !l.trim().is_empty() => l.trim().to_string(),
        _ => NOT_FOUND.to_string(),
    }
}

fn describe(meta: &HubMetadata, out: &mut BTreeMap<String, String>) {
    if let Some(task) = &meta.task_category {
        out.insert("task".into(), task.clone());
    }
    if let Some(d) = meta.downloads {
        out.insert("downloads".into(), d.to_string());
    }
    if !meta.owner_tags.is_empty() {
        out.insert("owner".into(), meta.owner_tags.join(","));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::hub::FixtureHub;
    use serde_json::json;

    fn ids(records: &[GraphRecord]) -> (usize, usize) {
        let n = records
            .iter()
            .filter(|r| matches!(r, GraphRecord::Artifact(_)))
            .count();
        (n, records.len() - n)
    }

    #[test]
    fn seed_with_base_and_dataset() {
        let mut hub = FixtureHub::new();
        hub.insert(
            HubKind::Model,
            "ft",
            json!({"cardData": {"license": "mit", "base_model": "base", "datasets": ["ds"]}}),
        );
        hub.insert(
            HubKind::Model,
            "base",
            json!({"cardData": {"license": "apache-2.0"}}),
        );
        hub.insert(
            HubKind::Dataset,
            "ds",
            json!({"cardData": {"license": "cc-by-4.0"}}),
        );
        let r = snowball_closure(&["ft".into()], &hub);
        assert_eq!(ids(&r.records), (3, 2));
        assert!(r.unresolved.is_empty());
        assert_eq!(r.fetched, 3);
    }

    #[test]
    fn seed_without_references() {
        let mut hub = FixtureHub::new();
        hub.insert(HubKind::Model, "solo", json!({}));
        let r = snowball_closure(&["solo".into()], &hub);
        assert_eq!(ids(&r.records), (1, 0));
        match &r.records[0] {
            GraphRecord::Artifact(n) => assert_eq!(n.license_id, NOT_FOUND),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mutual_base_models_terminate_with_cycle() {
        let mut hub = FixtureHub::new();
        hub.insert(
            HubKind::Model,
            "a",
            json!({"cardData": {"base_model": "b"}}),
        );
        hub.insert(
            HubKind::Model,
            "b",
            json!({"cardData": {"base_model": "a"}}),
        );
        let r = snowball_closure(&["a".into(), "b".into()], &hub);
        assert_eq!(ids(&r.records), (2, 2));
        assert_eq!(
            r.cycles,
            vec![vec!["a".to_string(), "b".into(), "a".into()]]
        );

        let before = hub.fetch_count();
        let again = snowball_closure_from(&r.records, &["a".into(), "b".into()], &hub);
        assert_eq!(again.fetched, 0);
        assert_eq!(hub.fetch_count(), before);
        assert_eq!(again.records, r.records);
    }

    #[test]
    fn transport_failure_becomes_unresolved_node() {
        let r = snowball_closure(&["x".into()], &crate::ingestion::hub::OfflineFetcher);
        assert_eq!(ids(&r.records), (1, 0));
        assert_eq!(r.unresolved.len(), 1);
    }
}
