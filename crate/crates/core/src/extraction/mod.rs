//! License text to [`LicenseProfile`](crate::model::LicenseProfile): template
//! matching, a rule-based extractor and the LLM agent loop.

pub mod agent_output;
pub mod endpoint;
pub mod liagent;
pub mod prompt;
pub mod rules;
pub mod template;
pub mod text;

use thiserror::Error;

use crate::model::ModelError;

pub use agent_output::{
    check_consistency, parse_agent_output, render_agent_output, AgentItem, ParsedOutput,
};
pub use endpoint::{
    AgentEndpointConfig, ChatEndpoint, ChatMessage, ChatRequest, EndpointError, FixtureEndpoint,
    HttpChatEndpoint, RecordingEndpoint, ScriptedEndpoint,
};
pub use liagent::{
    run_liagent, AgentSettings, AuditEntry, Consistency, ExtractionResult, LiAgent,
    MAX_REPAIR_ROUNDS,
};
pub use prompt::{
    build_extraction_prompt, build_repair_prompt, bundled_few_shot, FewShotExample, Prompt,
};
pub use rules::{extract_rules, RulePatterns};
pub use template::{match_template, normalize, TemplateCatalog, TemplateMatch};
pub use text::split_sentences;

#[derive(Debug, Error)]
pub enum ExtractionError {
    #[error("license text is empty")]
    EmptyText,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("template catalog: {0}")]
    Template(String),
    #[error("rule patterns: {0}")]
    Patterns(String),
    #[error("prompt: {0}")]
    Prompt(String),
    #[error("agent endpoint: {source}")]
    Transport {
        #[source]
        source: EndpointError,
        audit: Vec<AuditEntry>,
    },
    #[error("round {round}: model output unparsable after re-ask: {message}")]
    Parse {
        round: u8,
        message: String,
        audit: Vec<AuditEntry>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}
