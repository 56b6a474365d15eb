//! The JSON exchange format spoken by the extraction and repair agents.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::{Attitude, Taxonomy, TermAssignment};

/// One element of an agent's answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentItem {
    pub sentence: String,
    pub term: String,
    pub attitude: String,
}

impl AgentItem {
    pub fn from_assignment(a: &TermAssignment) -> Vec<AgentItem> {
        a.evidence
            .iter()
            .map(|s| AgentItem {
                sentence: s.clone(),
                term: a.term.clone(),
                attitude: a.attitude.to_string(),
            })
            .collect()
    }
}

/// Assignments recovered from a response, one per valid element, plus the
/// reasons any elements were dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedOutput {
    pub assignments: Vec<TermAssignment>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no JSON array found in model output")]
pub struct NoArray;

/// Locates the first JSON array in `raw` (code fences and surrounding prose
/// are ignored; an object wrapping a single array field also counts).
/// Non-empty arrays holding no objects, such as `[1]` in prose, are skipped.
fn find_array(raw: &str) -> Option<Vec<Value>> {
    let plausible = |items: &[Value]| items.is_empty() || items.iter().any(Value::is_object);
    for (i, c) in raw.char_indices() {
        if c != '[' && c != '{' {
            continue;
        }
        let mut stream = serde_json::Deserializer::from_str(&raw[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Array(items))) if plausible(&items) => return Some(items),
            Some(Ok(Value::Object(map))) => {
                let arrays: Vec<&Value> = map.values().filter(|v| v.is_array()).collect();
                if let [Value::Array(items)] = arrays.as_slice() {
                    if plausible(items) {
                        return Some(items.clone());
                    }
                }
            }
            _ => {}
        }
    }
    None
}

pub fn parse_agent_output(raw: &str, taxonomy: &Taxonomy) -> Result<ParsedOutput, NoArray> {
    let items = find_array(raw).ok_or(NoArray)?;
    let mut out = ParsedOutput::default();
    for (i, item) in items.iter().enumerate() {
        let Some(obj) = item.as_object() else {
            out.diagnostics.push(format!("element {i}: not an object"));
            continue;
        };
        let field = |name: &str| {
            obj.iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(name))
                .and_then(|(_, v)| v.as_str())
        };
        let (Some(term), Some(attitude)) = (field("term"), field("attitude")) else {
            out.diagnostics
                .push(format!("element {i}: missing `term` or `attitude`"));
            continue;
        };
        let Some(term_id) = taxonomy.canonical_id(term) else {
            out.diagnostics
                .push(format!("element {i}: unknown term `{term}`"));
            continue;
        };
        let Ok(attitude) = attitude.parse::<Attitude>() else {
            out.diagnostics.push(format!(
                "element {i}: invalid attitude `{attitude}` for `{term_id}`"
            ));
            continue;
        };
        let evidence = field("sentence")
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| vec![s.to_string()])
            .unwrap_or_default();
        out.assignments
            .push(TermAssignment::declared(term_id, attitude, evidence));
    }
    Ok(out)
}

/// Serializes assignments in the agent format, one element per evidence
/// sentence. Inverse of [`parse_agent_output`] for single-sentence
/// assignments.
pub fn render_agent_output(assignments: &[TermAssignment]) -> String {
    let items: Vec<AgentItem> = assignments
        .iter()
        .flat_map(AgentItem::from_assignment)
        .collect();
    serde_json::to_string_pretty(&items).expect("agent items serialize")
}

/// Terms assigned two or more distinct attitudes, in first-seen order.
pub fn check_consistency(assignments: &[TermAssignment]) -> Vec<String> {
    let mut seen: Vec<(&str, Attitude)> = Vec::new();
    let mut clashing: Vec<String> = Vec::new();
    for a in assignments {
        match seen.iter().find(|(t, _)| *t == a.term) {
            Some((_, first)) if *first != a.attitude => {
                if !clashing.contains(&a.term) {
                    clashing.push(a.term.clone());
                }
            }
            Some(_) => {}
            None => seen.push((&a.term, a.attitude)),
        }
    }
    clashing
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXAMPLE: &str = r#"[{"sentence":"You are allowed to distribute modified works","term":"Distribute","attitude":"can"}]"#;

    #[test]
    fn parses_example_output() {
        let t = Taxonomy::bundled();
        let p = parse_agent_output(EXAMPLE, &t).unwrap();
        assert_eq!(
            p.assignments,
            vec![TermAssignment::declared(
                "Distribute",
                Attitude::Can,
                vec!["You are allowed to distribute modified works".into()]
            )]
        );
        assert!(p.diagnostics.is_empty());
    }

    #[test]
    fn fenced_and_wrapped_variants_parse_identically() {
        let t = Taxonomy::bundled();
        let plain = parse_agent_output(EXAMPLE, &t).unwrap();
        let fenced = format!("Here is the analysis:\n```json\n{EXAMPLE}\n```\nDone.");
        assert_eq!(parse_agent_output(&fenced, &t).unwrap(), plain);
        let wrapped = format!("{{\"results\": {EXAMPLE}}}");
        assert_eq!(parse_agent_output(&wrapped, &t).unwrap(), plain);
    }

    #[test]
    fn unknown_terms_and_attitudes_dropped() {
        let t = Taxonomy::bundled();
        let raw = r#"[{"sentence":"x","term":"Teleport","attitude":"can"},
                      {"sentence":"y","term":"distribute","attitude":"perhaps"},
                      {"sentence":"z","term":"commercial use","attitude":"CANNOT"}]"#;
        let p = parse_agent_output(raw, &t).unwrap();
        assert_eq!(p.assignments.len(), 1);
        assert_eq!(p.assignments[0].term, "Commercial Use");
        assert_eq!(p.diagnostics.len(), 2);
        assert!(p.diagnostics[0].contains("Teleport"));
    }

    #[test]
    fn prose_without_array_fails() {
        let t = Taxonomy::bundled();
        assert_eq!(
            parse_agent_output("I cannot help with [that", &t),
            Err(NoArray)
        );
    }

    #[test]
    fn consistency_examples() {
        let d = |a| TermAssignment::declared("Distribute", a, vec!["s".into()]);
        assert_eq!(
            check_consistency(&[d(Attitude::Can), d(Attitude::Cannot)]),
            vec!["Distribute"]
        );
        assert!(check_consistency(&[d(Attitude::Can), d(Attitude::Can)]).is_empty());
        assert!(check_consistency(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(items in prop::collection::vec(
            (0usize..23, 0usize..3, "[A-Za-z][A-Za-z ,.\"\\[\\]{}]{0,40}[A-Za-z.]"), 0..12)
        ) {
            let t = Taxonomy::bundled();
            let assignments: Vec<TermAssignment> = items
                .into_iter()
                .map(|(ti, ai, s)| TermAssignment::declared(&t.terms()[ti].id, Attitude::ALL[ai], vec![s]))
                .collect();
            let parsed = parse_agent_output(&render_agent_output(&assignments), &t).unwrap();
            prop_assert_eq!(parsed.assignments, assignments);
            prop_assert!(parsed.diagnostics.is_empty());
        }
    }
}
