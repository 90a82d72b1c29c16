//! Scripted conversations: a list of user events with the outcome each one
//! is expected to produce, run headlessly against a spec.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bt::{NodeStatus, TraceRecord, UserEvent};
use crate::dialogue::nodes;
use crate::session::{Blueprint, Conversation, ConversationError, Row, SessionStatus, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptEvent {
    Say(String),
    Choose(usize),
    Answer { question_id: String, option_index: usize },
}

impl From<ScriptEvent> for UserEvent {
    fn from(e: ScriptEvent) -> Self {
        match e {
            ScriptEvent::Say(t) => UserEvent::FreeText(t),
            ScriptEvent::Choose(i) => UserEvent::ChoiceIndex(i),
            ScriptEvent::Answer { question_id, option_index } => {
                UserEvent::QuestionnaireAnswer { question_id, option_index }
            }
        }
    }
}

/// One scripted user turn.
///
/// `expect_node` names the annotated row(s) the turn resolves, joined by
/// `,` (for example `j→k`), or the id of the node left waiting when it
/// resolves none. `expect_status` is `Success`, `Fail` or `Waiting`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptStep {
    #[serde(flatten)]
    pub event: ScriptEvent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_node: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_status: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptFile {
    pub spec_id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default)]
    pub events: Vec<ScriptStep>,
}

impl ScriptFile {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScriptError {
    #[error("script is for spec `{script}` but the spec is `{spec}`")]
    SpecMismatch { script: String, spec: String },
    #[error("script is malformed: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

pub fn parse_status(s: &str) -> Option<NodeStatus> {
    match s.to_ascii_lowercase().as_str() {
        "success" => Some(NodeStatus::Success),
        "fail" | "failure" => Some(NodeStatus::Failure),
        "waiting" => Some(NodeStatus::Waiting),
        _ => None,
    }
}

/// Problems with the script's expectations. With `strict`, every step must
/// carry both expectations.
pub fn check_script(script: &ScriptFile, blueprint: &Blueprint, strict: bool) -> Vec<String> {
    let tree = &blueprint.tree.tree;
    let known_node = |name: &str| {
        name.split(',').all(|part| {
            let part = part.trim();
            tree.find(part).is_some() || tree.iter().any(|n| n.marks.join("→") == part)
        })
    };
    let mut problems = Vec::new();
    for (i, step) in script.events.iter().enumerate() {
        let n = i + 1;
        match &step.expect_node {
            Some(node) if !known_node(node) => problems.push(format!("step {n}: unknown node `{node}`")),
            None if strict => problems.push(format!("step {n}: missing expect_node")),
            _ => {}
        }
        match &step.expect_status {
            Some(s) if parse_status(s).is_none() => problems.push(format!("step {n}: unknown status `{s}`")),
            None if strict => problems.push(format!("step {n}: missing expect_status")),
            _ => {}
        }
    }
    problems
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepOutcome {
    pub step: usize,
    pub event: UserEvent,
    pub node: String,
    pub status: NodeStatus,
    pub expected_node: Option<String>,
    pub expected_status: Option<String>,
}

impl StepOutcome {
    pub fn matches(&self) -> bool {
        let node_ok = self.expected_node.as_ref().is_none_or(|n| *n == self.node);
        let status_ok = self.expected_status.as_deref().is_none_or(|s| parse_status(s) == Some(self.status));
        node_ok && status_ok
    }
}

#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub steps: Vec<StepOutcome>,
    /// Set when the engine rejected an event; later steps did not run.
    pub error: Option<(usize, ConversationError)>,
    pub status: SessionStatus,
    pub transcript: Transcript,
    pub trace: Vec<TraceRecord>,
}

impl SimulationReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.steps.iter().all(StepOutcome::matches)
    }

    /// Annotation marks in the order their rows were resolved.
    pub fn visited_marks(&self) -> Vec<String> {
        self.transcript
            .rows()
            .flat_map(|r| r.marks.split('→').map(str::to_owned).collect::<Vec<_>>())
            .collect()
    }

    /// One line per failed expectation or engine error.
    pub fn diff(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .steps
            .iter()
            .filter(|s| !s.matches())
            .map(|s| {
                format!(
                    "step {}: expected {} {}, got {} {}",
                    s.step,
                    s.expected_node.as_deref().unwrap_or("*"),
                    s.expected_status.as_deref().unwrap_or("*"),
                    s.node,
                    s.status
                )
            })
            .collect();
        if let Some((step, e)) = &self.error {
            out.push(format!("step {step}: {e}"));
        }
        out
    }
}

fn describe(rows: &[Row], waiting: Option<&str>, status: SessionStatus) -> (String, NodeStatus) {
    if let Some(last) = rows.last() {
        let names: Vec<&str> = rows.iter().map(|r| r.marks.as_str()).collect();
        return (names.join(","), last.status);
    }
    match (waiting, status) {
        (Some(node), _) => (node.to_owned(), NodeStatus::Waiting),
        (None, SessionStatus::Completed) => (nodes::ROOT.to_owned(), NodeStatus::Success),
        (None, _) => (nodes::ROOT.to_owned(), NodeStatus::Failure),
    }
}

/// Plays `script` against a fresh conversation.
pub fn simulate(
    blueprint: Arc<Blueprint>,
    script: &ScriptFile,
    strict: bool,
) -> Result<SimulationReport, ScriptError> {
    if script.spec_id != blueprint.spec_id() {
        return Err(ScriptError::SpecMismatch {
            script: script.spec_id.clone(),
            spec: blueprint.spec_id().to_owned(),
        });
    }
    let problems = check_script(script, &blueprint, strict);
    if !problems.is_empty() {
        return Err(ScriptError::Invalid(problems));
    }

    let mut steps = Vec::new();
    let mut error = None;
    let mut conv = match Conversation::start(blueprint, "simulation") {
        Ok((conv, _)) => conv,
        Err(e) => return Err(ScriptError::Invalid(vec![format!("start: {e}")])),
    };
    for (i, step) in script.events.iter().enumerate() {
        let event = UserEvent::from(step.event.clone());
        match conv.post(event.clone()) {
            Ok(turn) => {
                let (node, status) = describe(&turn.rows, turn.waiting_node.as_deref(), turn.status);
                steps.push(StepOutcome {
                    step: i + 1,
                    event,
                    node,
                    status,
                    expected_node: step.expect_node.clone(),
                    expected_status: step.expect_status.clone(),
                });
            }
            Err(e) => {
                error = Some((i + 1, e));
                break;
            }
        }
    }
    Ok(SimulationReport {
        steps,
        error,
        status: conv.status(),
        transcript: conv.transcript().clone(),
        trace: conv.trace().to_vec(),
    })
}
