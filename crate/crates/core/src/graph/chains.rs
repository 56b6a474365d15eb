use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ArtifactKind, EdgeKind, SupplyChainGraph};

/// Two-layer chains end at a model; three-layer chains end at a dataset.
/// Base-model hops lengthen a chain without changing its label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainLayer {
    TwoLayer,
    ThreeLayer,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Chain {
    pub path: Vec<String>,
    pub layer: ChainLayer,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEnumeration {
    pub chains: Vec<Chain>,
    /// Each cycle found while walking, listed from the revisited node back to itself.
    pub cycles: Vec<Vec<String>>,
}

/// Enumerates every maximal downstream→upstream path starting at an OSS
/// repository. A path stops at a node with no further upstream edges, or at
/// the first edge that would revisit a node already on the path; the latter
/// is recorded as a cycle. Chains are sorted by path.
pub fn enumerate_chains(graph: &SupplyChainGraph) -> ChainEnumeration {
    let mut chains = Vec::new();
    let mut cycles = BTreeSet::new();
    for root in graph.nodes().filter(|n| n.kind == ArtifactKind::OssRepo) {
        let mut path = vec![root.id.clone()];
        walk(graph, &mut path, &mut chains, &mut cycles);
    }
    chains.sort();
    ChainEnumeration {
        chains,
        cycles: cycles.into_iter().collect(),
    }
}

fn walk(
    graph: &SupplyChainGraph,
    path: &mut Vec<String>,
    chains: &mut Vec<Chain>,
    cycles: &mut BTreeSet<Vec<String>>,
) {
    let current = path.last().expect("non-empty path").clone();
    let mut extended = false;
    for edge in graph.upstream_of(&current) {
        if let Some(pos) = path.iter().position(|id| id == &edge.to) {
            let mut cycle = path[pos..].to_vec();
            cycle.push(edge.to.clone());
            cycles.insert(cycle);
            continue;
        }
        extended = true;
        path.push(edge.to.clone());
        walk(graph, path, chains, cycles);
        path.pop();
    }
    if !extended && path.len() >= 2 {
        let terminal = graph.node(&current).map(|n| n.kind);
        let layer = if terminal == Some(ArtifactKind::Dataset) {
            ChainLayer::ThreeLayer
        } else {
            ChainLayer::TwoLayer
        };
        chains.push(Chain {
            path: path.clone(),
            layer,
        });
    }
}

/// Cycles among base-model edges reachable from any node, each rotated to
/// start at its smallest id.
pub fn find_cycles(graph: &SupplyChainGraph) -> Vec<Vec<String>> {
    let mut found = BTreeSet::new();
    for start in graph.nodes() {
        let mut path = vec![start.id.clone()];
        cycle_walk(graph, &mut path, &mut found);
    }
    found.into_iter().collect()
}

fn cycle_walk(graph: &SupplyChainGraph, path: &mut Vec<String>, found: &mut BTreeSet<Vec<String>>) {
    let current = path.last().expect("non-empty").clone();
    for edge in graph.upstream_of(&current) {
        if edge.kind != EdgeKind::DerivedFromBase {
            continue;
        }
        if let Some(pos) = path.iter().position(|id| id == &edge.to) {
            let ring = &path[pos..];
            let min = ring
                .iter()
                .enumerate()
                .min_by_key(|(_, id)| *id)
                .map(|(i, _)| i)
                .unwrap_or(0);
            let mut cycle: Vec<String> = ring[min..].iter().chain(&ring[..min]).cloned().collect();
            cycle.push(cycle[0].clone());
            found.insert(cycle);
            continue;
        }
        path.push(edge.to.clone());
        cycle_walk(graph, path, found);
        path.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::super::{artifact, build_graph, edge, tests::mamba_records, GraphRecord};
    use super::*;
    use proptest::prelude::*;
    use ArtifactKind::*;
    use EdgeKind::*;

    #[test]
    fn figure_example_gives_two_three_layer_chains() {
        let (g, _) = build_graph(mamba_records()).unwrap();
        let result = enumerate_chains(&g);
        assert_eq!(result.chains.len(), 2);
        assert!(result
            .chains
            .iter()
            .all(|c| c.layer == ChainLayer::ThreeLayer && c.path.len() == 3));
        assert_eq!(
            result.chains[0].path,
            vec!["ML-Mamba", "mamba-2.8b-ultrachat", "ultrachat_200k"]
        );
    }

    #[test]
    fn model_without_upstream_is_a_two_layer_chain() {
        let (g, _) = build_graph(vec![
            artifact("r", OssRepo, "MIT"),
            artifact("m", Llm, "MIT"),
            edge("r", "m", UsesModel),
        ])
        .unwrap();
        let chains = enumerate_chains(&g).chains;
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].layer, ChainLayer::TwoLayer);
    }

    #[test]
    fn no_repositories_means_no_chains() {
        let (g, _) = build_graph(vec![artifact("m", Llm, "MIT")]).unwrap();
        assert!(enumerate_chains(&g).chains.is_empty());
    }

    #[test]
    fn base_model_hops_extend_the_chain() {
        let (g, _) = build_graph(vec![
            artifact("r", OssRepo, "MIT"),
            artifact("ft", Llm, "MIT"),
            artifact("base", Llm, "MIT"),
            artifact("d", Dataset, "MIT"),
            edge("r", "ft", UsesModel),
            edge("ft", "base", DerivedFromBase),
            edge("base", "d", TrainedOn),
        ])
        .unwrap();
        let chains = enumerate_chains(&g).chains;
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].path.len(), 4);
        assert_eq!(chains[0].layer, ChainLayer::ThreeLayer);
    }

    #[test]
    fn cycles_are_cut_and_reported() {
        let (g, _) = build_graph(vec![
            artifact("r", OssRepo, "MIT"),
            artifact("a", Llm, "MIT"),
            artifact("b", Llm, "MIT"),
            edge("r", "a", UsesModel),
            edge("a", "b", DerivedFromBase),
            edge("b", "a", DerivedFromBase),
        ])
        .unwrap();
        let result = enumerate_chains(&g);
        assert_eq!(result.chains.len(), 1);
        assert_eq!(result.chains[0].path, vec!["r", "a", "b"]);
        assert_eq!(result.cycles, vec![vec!["a", "b", "a"]]);
        assert_eq!(
            find_cycles(&g),
            vec![vec!["a".to_string(), "b".into(), "a".into()]]
        );
    }

    /// Random layered DAG: repos → models (with base-model edges only to
    /// higher-numbered models) → datasets.
    fn arb_dag() -> impl Strategy<Value = Vec<GraphRecord>> {
        (1usize..6, 1usize..25, 0usize..15).prop_flat_map(|(r, m, d)| {
            let pairs = r * m + m * m + m * d;
            proptest::collection::vec(proptest::bool::weighted(0.15), pairs).prop_map(move |bits| {
                let mut recs = Vec::new();
                for i in 0..r {
                    recs.push(artifact(&format!("r{i}"), OssRepo, "MIT"));
                }
                for i in 0..m {
                    recs.push(artifact(&format!("m{i:02}"), Llm, "MIT"));
                }
                for i in 0..d {
                    recs.push(artifact(&format!("d{i}"), Dataset, "MIT"));
                }
                let mut bit = bits.into_iter();
                for i in 0..r {
                    for j in 0..m {
                        if bit.next().unwrap() {
                            recs.push(edge(&format!("r{i}"), &format!("m{j:02}"), UsesModel));
                        }
                    }
                }
                for i in 0..m {
                    for j in 0..m {
                        if bit.next().unwrap() && j > i {
                            recs.push(edge(
                                &format!("m{i:02}"),
                                &format!("m{j:02}"),
                                DerivedFromBase,
                            ));
                        }
                    }
                }
                for i in 0..m {
                    for j in 0..d {
                        if bit.next().unwrap() {
                            recs.push(edge(&format!("m{i:02}"), &format!("d{j}"), TrainedOn));
                        }
                    }
                }
                recs
            })
        })
    }

    fn naive_paths(g: &SupplyChainGraph, id: &str) -> usize {
        let ups = g.upstream_of(id);
        if ups.is_empty() {
            return 1;
        }
        ups.iter().map(|e| naive_paths(g, &e.to)).sum()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn path_count_matches_naive_recursion(recs in arb_dag()) {
            let (g, _) = build_graph(recs).unwrap();
            let expected: usize = g
                .nodes()
                .filter(|n| n.kind == OssRepo && !g.upstream_of(&n.id).is_empty())
                .map(|n| naive_paths(&g, &n.id))
                .sum();
            let result = enumerate_chains(&g);
            prop_assert_eq!(result.chains.len(), expected);
            prop_assert!(result.cycles.is_empty());
        }
    }
}
