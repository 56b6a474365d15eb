//! Prompt documents for the extraction and repair agents.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::agent_output::AgentItem;
use super::ExtractionError;
use crate::model::Taxonomy;

pub const EXTRACTION_INSTRUCTION: &str = "You are a legal analysis assistant specializing in license agreements. \
Your task is to analyze the given text and identify key legal terms, categorize actions, and infer rules or \
conditions for these actions. Always respond in a structured and concise format. Use JSON for output as specified. \
Ensure that the output strictly follows the format provided in the example. Analyze the following license text and \
complete the tasks below:";

pub const TERM_INSTRUCTION: &str = "The following is a list of key legal terms and their meanings. For each term, \
only consider the provided interpretation when analyzing the license text. For every sentence of the license that \
concerns one of these terms, output an object with the sentence copied verbatim, the term name exactly as listed, \
and the attitude the license takes towards it: \"can\", \"cannot\" or \"must\". Answer with a JSON array of such \
objects and nothing else.";

pub const REPAIR_INSTRUCTION: &str = "You are a legal analysis assistant specializing in license agreements. \
The extractions below assign conflicting attitudes to the same legal term. Re-read the license text, decide the \
single attitude the license takes towards each listed term, and answer with a JSON array of objects with the keys \
\"sentence\", \"term\" and \"attitude\". Use exactly one attitude per term and copy sentences verbatim from the \
license text.";

pub const REASK_INSTRUCTION: &str =
    "Your previous answer could not be parsed. Respond only with the JSON array in \
the format of the example output.";

/// A worked input/output pair shown to the extraction agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub input: String,
    pub output: Vec<AgentItem>,
}

pub fn load_few_shot(json: &str) -> Result<Vec<FewShotExample>, ExtractionError> {
    serde_json::from_str(json)
        .map_err(|e| ExtractionError::Prompt(format!("few-shot examples: {e}")))
}

pub fn bundled_few_shot() -> Vec<FewShotExample> {
    load_few_shot(crate::bundled::FEW_SHOT).expect("bundled few-shot examples are valid")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub text: String,
    /// Set when no few-shot example was available.
    pub degraded: bool,
}

/// JSON object of term descriptions, written by hand to keep taxonomy order.
fn term_descriptions(taxonomy: &Taxonomy, only: Option<&[String]>) -> String {
    let body: Vec<String> = taxonomy
        .terms()
        .iter()
        .filter(|t| only.is_none_or(|ids| ids.contains(&t.id)))
        .map(|t| {
            format!(
                "  {}: {}",
                Value::String(t.id.clone()),
                Value::String(t.description.clone())
            )
        })
        .collect();
    format!("{{\n{}\n}}", body.join(",\n"))
}

pub fn build_extraction_prompt(
    text: &str,
    taxonomy: &Taxonomy,
    few_shot: &[FewShotExample],
) -> Result<Prompt, ExtractionError> {
    if text.trim().is_empty() {
        return Err(ExtractionError::EmptyText);
    }
    let mut out = format!(
        "[Instruction]: {EXTRACTION_INSTRUCTION}\n\n[The License Content]: {text}\n\n[Instruction]: {TERM_INSTRUCTION}\n\n[Term Descriptions]: {}\n",
        term_descriptions(taxonomy, None)
    );
    for ex in few_shot {
        out.push_str(&format!(
            "\n[Example Input]: {}\n\n[Example Output]: {}\n",
            Value::String(ex.input.clone()),
            serde_json::to_string(&ex.output).expect("agent items serialize")
        ));
    }
    Ok(Prompt {
        text: out,
        degraded: few_shot.is_empty(),
    })
}

/// Prompt for the repair agent: the clashing extractions plus the full text.
pub fn build_repair_prompt(text: &str, taxonomy: &Taxonomy, clashing: &[AgentItem]) -> String {
    let mut terms: Vec<String> = Vec::new();
    for item in clashing {
        if !terms.contains(&item.term) {
            terms.push(item.term.clone());
        }
    }
    format!(
        "[Instruction]: {REPAIR_INSTRUCTION}\n\n[Conflicting Extractions]: {}\n\n[The License Content]: {text}\n\n[Term Descriptions]: {}\n",
        serde_json::to_string_pretty(clashing).expect("agent items serialize"),
        term_descriptions(taxonomy, Some(&terms))
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_appear_in_order() {
        let t = Taxonomy::bundled();
        let p = build_extraction_prompt("Some license.", &t, &bundled_few_shot()).unwrap();
        assert!(!p.degraded);
        assert!(p.text.starts_with(
            "[Instruction]: You are a legal analysis assistant specializing in license agreements"
        ));
        let order = [
            "[The License Content]: Some license.",
            "[Term Descriptions]",
            "[Example Input]",
            "[Example Output]",
        ];
        let positions: Vec<usize> = order.iter().map(|s| p.text.find(s).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn every_term_description_is_listed_in_taxonomy_order() {
        let t = Taxonomy::bundled();
        let p = build_extraction_prompt("x", &t, &[]).unwrap();
        let mut last = 0;
        for term in t.terms() {
            let pos = p.text.find(&format!("{:?}: ", term.id)).unwrap();
            assert!(pos > last);
            last = pos;
            assert!(p.text.contains(&term.description));
        }
        let start = p.text.find("[Term Descriptions]: ").unwrap() + "[Term Descriptions]: ".len();
        let json: Value = serde_json::from_str(p.text[start..].trim()).unwrap();
        assert_eq!(json.as_object().unwrap().len(), t.len());
    }

    #[test]
    fn empty_few_shot_is_degraded() {
        let t = Taxonomy::bundled();
        let p = build_extraction_prompt("x", &t, &[]).unwrap();
        assert!(p.degraded);
        assert!(!p.text.contains("[Example Input]"));
    }

    #[test]
    fn deterministic() {
        let t = Taxonomy::bundled();
        let ex = bundled_few_shot();
        let a = build_extraction_prompt("text", &t, &ex).unwrap();
        let b = build_extraction_prompt("text", &t, &ex).unwrap();
        assert_eq!(a.text.as_bytes(), b.text.as_bytes());
    }

    #[test]
    fn empty_text_rejected() {
        assert!(build_extraction_prompt("  ", &Taxonomy::bundled(), &[]).is_err());
    }
}
