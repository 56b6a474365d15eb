//! License frequency tables over artifact nodes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::ArtifactNode;
use crate::graph::NO_LICENSE;
use crate::model::is_sentinel;

pub const OTHERS: &str = "Others";

/// Group used for nodes lacking the grouping metadata key.
pub const UNGROUPED: &str = "(none)";

/// Licenses reported under their own name; anything else folds into
/// [`OTHERS`]. Matching ignores ASCII case.
pub const RECOGNIZED_LICENSES: &[&str] = &[
    "0BSD",
    "AFL-3.0",
    "AGPL-3.0",
    "Apache-2.0",
    "Artistic-2.0",
    "BSD-2-Clause",
    "BSD-3-Clause",
    "BSD-3-Clause-Clear",
    "BSL-1.0",
    "CC-BY-4.0",
    "CC-BY-NC-4.0",
    "CC-BY-NC-SA-4.0",
    "CC-BY-SA-4.0",
    "CC0-1.0",
    "ECL-2.0",
    "EPL-1.0",
    "EPL-2.0",
    "EUPL-1.2",
    "GPL-2.0",
    "GPL-3.0",
    "ISC",
    "LGPL-2.1",
    "LGPL-3.0",
    "LPPL-1.3c",
    "MIT",
    "MIT-0",
    "MPL-2.0",
    "MS-PL",
    "NCSA",
    "ODbL-1.0",
    "OFL-1.1",
    "OSL-3.0",
    "PostgreSQL",
    "Unlicense",
    "UPL-1.0",
    "WTFPL",
    "Zlib",
    "bigscience-bloom-rail-1.0",
    "bigscience-openrail-m",
    "creativeml-openrail-m",
    "openrail",
    "openrail++",
    "llama2",
    "llama3",
    "llama3.1",
    "llama3.2",
    "gemma",
    "cdla-permissive-2.0",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LicenseShare {
    pub license: String,
    pub count: usize,
    pub share: f64,
}

/// Buckets a raw license id: sentinels and blanks become `No License`,
/// unrecognized ids `Others`, recognized ids their canonical spelling.
pub fn bucket(license_id: &str, recognized: &[&str]) -> String {
    let id = license_id.trim();
    if id.is_empty() || is_sentinel(id) {
        return NO_LICENSE.to_string();
    }
    recognized
        .iter()
        .find(|r| r.eq_ignore_ascii_case(id))
        .map_or_else(|| OTHERS.to_string(), |r| r.to_string())
}

/// Per-group frequency tables, each sorted by count descending then id.
/// With `group_by` unset every node lands in one group named `all`.
pub fn license_distribution(
    nodes: &[ArtifactNode],
    group_by: Option<&str>,
    recognized: &[&str],
) -> BTreeMap<String, Vec<LicenseShare>> {
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for n in nodes {
        let group = match group_by {
            None => "all".to_string(),
            Some(key) => n
                .metadata
                .get(key)
                .cloned()
                .unwrap_or_else(|| UNGROUPED.to_string()),
        };
        *counts
            .entry(group)
            .or_default()
            .entry(bucket(&n.license_id, recognized))
            .or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(group, per)| {
            let total: usize = per.values().sum();
            let mut rows: Vec<LicenseShare> = per
                .into_iter()
                .map(|(license, count)| LicenseShare {
                    license,
                    count,
                    share: count as f64 / total as f64,
                })
                .collect();
            rows.sort_by(|a, b| {
                b.count
                    .cmp(&a.count)
                    .then_with(|| a.license.cmp(&b.license))
            });
            (group, rows)
        })
        .collect()
}

/// Contingency counts (one row per group, one column per license bucket)
/// built from distribution tables, with column labels in first-seen order.
pub fn distribution_table(
    tables: &BTreeMap<String, Vec<LicenseShare>>,
) -> (Vec<String>, Vec<String>, Vec<Vec<u64>>) {
    let mut cols: Vec<String> = Vec::new();
    for rows in tables.values() {
        for r in rows {
            if !cols.contains(&r.license) {
                cols.push(r.license.clone());
            }
        }
    }
    let row_labels: Vec<String> = tables.keys().cloned().collect();
    let counts = tables
        .values()
        .map(|rows| {
            cols.iter()
                .map(|c| {
                    rows.iter()
                        .find(|r| &r.license == c)
                        .map_or(0, |r| r.count as u64)
                })
                .collect()
        })
        .collect();
    (row_labels, cols, counts)
}
