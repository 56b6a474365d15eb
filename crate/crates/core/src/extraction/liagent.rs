//! Extraction agent plus repair agent, iterated until attitudes agree.

use serde::{Deserialize, Serialize};

use super::agent_output::{check_consistency, parse_agent_output, AgentItem};
use super::endpoint::{ChatEndpoint, ChatMessage, ChatRequest};
use super::prompt::{
    build_extraction_prompt, build_repair_prompt, FewShotExample, REASK_INSTRUCTION,
};
use super::text::{find_verbatim, jaccard, split_sentences, token_set};
use super::ExtractionError;
use crate::model::{
    complete_profile, Attitude, LicenseProfile, ProfileSource, Taxonomy, TermAssignment,
};

/// Upper bound on repair rounds after the initial extraction.
pub const MAX_REPAIR_ROUNDS: u8 = 3;

/// Minimum similarity for re-anchoring a paraphrased evidence sentence.
const ANCHOR_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consistency {
    Consistent,
    RepairedConsistent,
    Inconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Extract,
    Repair,
    Reask,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub round: u8,
    pub stage: Stage,
    pub request_key: String,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub profile: LicenseProfile,
    /// Every raw response, in call order.
    pub raw_model_output: String,
    pub rounds_used: u8,
    pub consistency: Consistency,
    pub model: String,
    pub temperature: f64,
    pub audit: Vec<AuditEntry>,
    pub diagnostics: Vec<String>,
}

/// Settings that shape each chat request.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSettings {
    pub model: String,
    pub temperature: f64,
}

impl AgentSettings {
    pub fn new(model: impl Into<String>) -> Self {
        AgentSettings {
            model: model.into(),
            temperature: 0.0,
        }
    }
}

pub struct LiAgent<'a> {
    pub taxonomy: &'a Taxonomy,
    pub few_shot: &'a [FewShotExample],
    pub endpoint: &'a dyn ChatEndpoint,
    pub settings: AgentSettings,
}

struct Session<'a> {
    agent: &'a LiAgent<'a>,
    audit: Vec<AuditEntry>,
    diagnostics: Vec<String>,
}

impl Session<'_> {
    fn call(
        &mut self,
        round: u8,
        stage: Stage,
        messages: Vec<ChatMessage>,
    ) -> Result<String, ExtractionError> {
        let request = ChatRequest {
            model: self.agent.settings.model.clone(),
            messages,
            temperature: self.agent.settings.temperature,
        };
        match self.agent.endpoint.complete(&request) {
            Ok(response) => {
                self.audit.push(AuditEntry {
                    round,
                    stage,
                    request_key: request.key(),
                    response: response.clone(),
                });
                Ok(response)
            }
            Err(source) => Err(ExtractionError::Transport {
                source,
                audit: std::mem::take(&mut self.audit),
            }),
        }
    }

    /// Sends `prompt`; re-asks once if the answer holds no JSON array.
    fn ask(
        &mut self,
        round: u8,
        stage: Stage,
        prompt: &str,
    ) -> Result<Vec<TermAssignment>, ExtractionError> {
        let first = vec![ChatMessage::user(prompt)];
        let raw = self.call(round, stage, first.clone())?;
        let parsed = match parse_agent_output(&raw, self.agent.taxonomy) {
            Ok(p) => p,
            Err(_) => {
                let mut messages = first;
                messages.push(ChatMessage::assistant(raw));
                messages.push(ChatMessage::user(REASK_INSTRUCTION));
                let retry = self.call(round, Stage::Reask, messages)?;
                parse_agent_output(&retry, self.agent.taxonomy).map_err(|e| {
                    ExtractionError::Parse {
                        round,
                        message: e.to_string(),
                        audit: std::mem::take(&mut self.audit),
                    }
                })?
            }
        };
        self.diagnostics.extend(
            parsed
                .diagnostics
                .into_iter()
                .map(|d| format!("round {round}: {d}")),
        );
        Ok(parsed.assignments)
    }
}

impl LiAgent<'_> {
    pub fn run(&self, text: &str, license_id: &str) -> Result<ExtractionResult, ExtractionError> {
        let prompt = build_extraction_prompt(text, self.taxonomy, self.few_shot)?;
        let mut session = Session {
            agent: self,
            audit: Vec::new(),
            diagnostics: Vec::new(),
        };
        if prompt.degraded {
            session
                .diagnostics
                .push("prompt has no few-shot example".into());
        }
        let mut current = session.ask(0, Stage::Extract, &prompt.text)?;
        let mut clashing = check_consistency(&current);
        let mut rounds = 0u8;
        while !clashing.is_empty() && rounds < MAX_REPAIR_ROUNDS {
            rounds += 1;
            let items: Vec<AgentItem> = current
                .iter()
                .filter(|a| clashing.contains(&a.term))
                .flat_map(|a| {
                    if a.evidence.is_empty() {
                        vec![AgentItem {
                            sentence: String::new(),
                            term: a.term.clone(),
                            attitude: a.attitude.to_string(),
                        }]
                    } else {
                        AgentItem::from_assignment(a)
                    }
                })
                .collect();
            let repair_prompt = build_repair_prompt(text, self.taxonomy, &items);
            let revised = session.ask(rounds, Stage::Repair, &repair_prompt)?;
            // Terms the repair answer mentions replace their earlier entries;
            // anything it leaves out stays as it was.
            current.retain(|a| !revised.iter().any(|r| r.term == a.term));
            current.extend(revised);
            clashing = check_consistency(&current);
        }
        let consistency = match (clashing.is_empty(), rounds) {
            (true, 0) => Consistency::Consistent,
            (true, _) => Consistency::RepairedConsistent,
            (false, _) => Consistency::Inconsistent,
        };
        for term in &clashing {
            session.diagnostics.push(format!(
                "`{term}` still inconsistent after {rounds} repair rounds; most restrictive kept"
            ));
        }

        let partial = resolve(
            text,
            license_id,
            self.taxonomy,
            &current,
            &mut session.diagnostics,
        );
        let profile = complete_profile(&partial, self.taxonomy)?;
        let raw_model_output = session
            .audit
            .iter()
            .map(|a| a.response.as_str())
            .collect::<Vec<_>>()
            .join("\n\n");
        Ok(ExtractionResult {
            profile,
            raw_model_output,
            rounds_used: rounds,
            consistency,
            model: self.settings.model.clone(),
            temperature: self.settings.temperature,
            audit: session.audit,
            diagnostics: session.diagnostics,
        })
    }
}

/// Runs the extraction/repair loop for one license text.
pub fn run_liagent(
    text: &str,
    license_id: &str,
    taxonomy: &Taxonomy,
    few_shot: &[FewShotExample],
    endpoint: &dyn ChatEndpoint,
    settings: AgentSettings,
) -> Result<ExtractionResult, ExtractionError> {
    LiAgent {
        taxonomy,
        few_shot,
        endpoint,
        settings,
    }
    .run(text, license_id)
}

/// Maps a model-quoted sentence onto a verbatim slice of `text`.
fn anchor<'t>(text: &'t str, sentences: &[&'t str], quoted: &str) -> Option<&'t str> {
    if let Some(hit) = find_verbatim(text, quoted) {
        return Some(hit);
    }
    let want = token_set(quoted);
    let mut best: Option<(&str, f64)> = None;
    for s in sentences {
        let sim = jaccard(&want, &token_set(s));
        if best.is_none_or(|(_, b)| sim > b) {
            best = Some((s, sim));
        }
    }
    best.filter(|(_, sim)| *sim >= ANCHOR_THRESHOLD)
        .map(|(s, _)| s)
}

/// One assignment per term: the most restrictive attitude, with evidence
/// anchored in the license text.
fn resolve(
    text: &str,
    license_id: &str,
    taxonomy: &Taxonomy,
    entries: &[TermAssignment],
    diagnostics: &mut Vec<String>,
) -> LicenseProfile {
    let sentences = split_sentences(text);
    let mut out = Vec::new();
    for term in taxonomy.terms() {
        let mine: Vec<&TermAssignment> = entries.iter().filter(|a| a.term == term.id).collect();
        let Some(attitude) = mine
            .iter()
            .map(|a| a.attitude)
            .reduce(Attitude::most_restrictive)
        else {
            continue;
        };
        let mut evidence: Vec<String> = Vec::new();
        for a in mine.iter().filter(|a| a.attitude == attitude) {
            for quoted in &a.evidence {
                match anchor(text, &sentences, quoted) {
                    Some(s) if !evidence.iter().any(|e| e == s) => evidence.push(s.to_string()),
                    Some(_) => {}
                    None => diagnostics.push(format!(
                        "`{}`: evidence not found in text: {quoted:?}",
                        term.id
                    )),
                }
            }
        }
        if evidence.is_empty() {
            diagnostics.push(format!(
                "`{}`: dropped, no evidence anchored in the text",
                term.id
            ));
            continue;
        }
        out.push(TermAssignment::declared(&term.id, attitude, evidence));
    }
    LicenseProfile::from_assignments(license_id, ProfileSource::Extracted, out)
        .expect("one assignment per term")
}
