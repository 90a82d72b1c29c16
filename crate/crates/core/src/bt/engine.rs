use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::blackboard::{Blackboard, Value};
use super::node::{
    AnswerSchema, ExplainerPayload, NodeKind, NodeStatus, Outcome, QuestionPayload, Reaction, Tree, TreeNode,
};
use crate::registry::{ExplanationPayload, Params, Registry, RegistryError, Target};
use crate::text::normalize;

/// Something a tick asks the outside world to show or record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Effect {
    Utterance {
        node_id: String,
        text: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        choices: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        attachments: Vec<String>,
    },
    ExplainerInvocation {
        node_id: String,
        explainer_id: String,
        target: String,
        result: ExplanationPayload,
    },
    FeedbackRecorded {
        category: String,
        text: String,
    },
}

impl Effect {
    pub fn utterance(node_id: impl Into<String>, text: impl Into<String>) -> Self {
        Effect::Utterance {
            node_id: node_id.into(),
            text: text.into(),
            choices: Vec::new(),
            attachments: Vec::new(),
        }
    }

    pub fn text(&self) -> Option<&str> {
        match self {
            Effect::Utterance { text, .. } => Some(text),
            _ => None,
        }
    }

    pub fn node_id(&self) -> Option<&str> {
        match self {
            Effect::Utterance { node_id, .. } | Effect::ExplainerInvocation { node_id, .. } => Some(node_id),
            Effect::FeedbackRecorded { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserEvent {
    FreeText(String),
    ChoiceIndex(usize),
    QuestionnaireAnswer { question_id: String, option_index: usize },
}

impl UserEvent {
    pub fn text(s: impl Into<String>) -> Self {
        UserEvent::FreeText(s.into())
    }

    pub fn describe(&self) -> String {
        match self {
            UserEvent::FreeText(t) => t.clone(),
            UserEvent::ChoiceIndex(i) => format!("#{i}"),
            UserEvent::QuestionnaireAnswer { question_id, option_index } => {
                format!("{question_id}=#{option_index}")
            }
        }
    }
}

/// A user event prepared for delivery to the waiting node.
#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub event: UserEvent,
    /// Classified reaction, consulted by nodes that declare reaction rules.
    pub reaction: Option<Reaction>,
    /// Applied at the moment the waiting node consumes the event, before its
    /// own outcome writes.
    pub writes: Vec<super::node::FlagWrite>,
}

impl From<UserEvent> for Delivery {
    fn from(event: UserEvent) -> Self {
        Delivery { event, reaction: None, writes: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickResult {
    pub status: NodeStatus,
    pub effects: Vec<Effect>,
    pub waiting_node: Option<String>,
    pub visited: Vec<(String, NodeStatus)>,
}

impl TickResult {
    pub fn status_of(&self, id: &str) -> Option<NodeStatus> {
        self.visited.iter().find(|(n, _)| n == id).map(|(_, s)| *s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TickError {
    #[error("an event was delivered but no node is waiting")]
    DanglingEvent,
    #[error("choice {index} is out of range ({available} available)")]
    ChoiceOutOfRange { index: usize, available: usize },
    #[error("explainer `{0}` is not registered")]
    UnboundExplainer(String),
    #[error("answer for `{got}` delivered to question `{expected}`")]
    QuestionMismatch { expected: String, got: String },
    #[error("the waiting node `{0}` was not reached, event not consumed")]
    EventNotConsumed(String),
    #[error("placeholder `{0}` was never filled")]
    UnfilledPlaceholder(String),
    #[error("target `{0}` is unknown")]
    UnknownTarget(String),
    #[error(transparent)]
    Explainer(#[from] RegistryError),
}

/// Blackboard key holding the explanation target id.
pub const TARGET_KEY: &str = "target.id";

/// Set once an explainer leaf has consumed the reply to its explanation.
pub fn executed_key(node_id: &str) -> String {
    format!("exec.{node_id}")
}

pub fn calls_key(node_id: &str) -> String {
    format!("calls.{node_id}")
}

/// Reactive tick interpreter. Every tick restarts at the root.
#[derive(Clone, Copy)]
pub struct Engine<'a> {
    registry: &'a Registry,
    targets: &'a [Target],
}

impl<'a> Engine<'a> {
    pub fn new(registry: &'a Registry) -> Self {
        Engine { registry, targets: &[] }
    }

    pub fn with_targets(mut self, targets: &'a [Target]) -> Self {
        self.targets = targets;
        self
    }

    /// Ticks `tree` once. The blackboard is only updated when the tick
    /// succeeds; on error it is left untouched.
    pub fn tick(
        &self,
        tree: &Tree,
        blackboard: &mut Blackboard,
        pending: Option<Delivery>,
    ) -> Result<TickResult, TickError> {
        let awaiting = blackboard.awaiting().map(str::to_owned);
        if pending.is_some() && awaiting.is_none() {
            return Err(TickError::DanglingEvent);
        }
        let mut run = Run {
            engine: *self,
            bb: blackboard.clone(),
            awaiting,
            pending,
            effects: Vec::new(),
            visited: Vec::new(),
            waiting: None,
        };
        let status = run.eval(&tree.root)?;
        if run.pending.is_some() {
            return Err(TickError::EventNotConsumed(run.awaiting.unwrap_or_default()));
        }
        run.bb.set_awaiting(run.waiting.clone());
        *blackboard = run.bb;
        Ok(TickResult { status, effects: run.effects, waiting_node: run.waiting, visited: run.visited })
    }
}

struct Run<'a> {
    engine: Engine<'a>,
    bb: Blackboard,
    awaiting: Option<String>,
    pending: Option<Delivery>,
    effects: Vec<Effect>,
    visited: Vec<(String, NodeStatus)>,
    waiting: Option<String>,
}

impl Run<'_> {
    fn eval(&mut self, node: &TreeNode) -> Result<NodeStatus, TickError> {
        let slot = self.visited.len();
        self.visited.push((node.id.clone(), NodeStatus::Waiting));
        let status = match &node.kind {
            NodeKind::Sequence => {
                let mut status = NodeStatus::Success;
                for child in &node.children {
                    status = self.eval(child)?;
                    if status != NodeStatus::Success {
                        break;
                    }
                }
                status
            }
            NodeKind::Priority => {
                let mut status = NodeStatus::Failure;
                for child in &node.children {
                    status = self.eval(child)?;
                    if status != NodeStatus::Failure {
                        break;
                    }
                }
                status
            }
            NodeKind::Condition(c) => {
                if self.bb.get(&c.key) == c.expected {
                    NodeStatus::Success
                } else {
                    NodeStatus::Failure
                }
            }
            NodeKind::Information(info) => {
                self.effects.push(Effect::Utterance {
                    node_id: node.id.clone(),
                    text: self.bb.render(&info.text),
                    choices: Vec::new(),
                    attachments: info
                        .attachments
                        .iter()
                        .map(|a| self.bb.render(a))
                        .filter(|a| !a.is_empty())
                        .collect(),
                });
                self.bb.apply_all(&info.writes);
                NodeStatus::Success
            }
            NodeKind::QuestionAnswer(q) => match self.take_pending(&node.id) {
                Some(delivery) => self.answer(node, q, delivery)?,
                None => self.prompt(node, q),
            },
            NodeKind::Explainer(x) => match self.take_pending(&node.id) {
                Some(delivery) => {
                    let reaction = delivery.reaction.unwrap_or(Reaction::MoreOfSame);
                    self.bb.set(executed_key(&node.id), true);
                    self.bb.apply_all(&delivery.writes);
                    match x.reactions.get(&reaction) {
                        Some(outcome) => self.conclude(outcome),
                        None => match reaction {
                            Reaction::Satisfied => NodeStatus::Success,
                            _ => NodeStatus::Failure,
                        },
                    }
                }
                None => self.explain(node, x)?,
            },
            NodeKind::Placeholder(_) => return Err(TickError::UnfilledPlaceholder(node.id.clone())),
        };
        if status == NodeStatus::Waiting && self.waiting.is_none() {
            self.waiting = Some(node.id.clone());
        }
        self.visited[slot].1 = status;
        Ok(status)
    }

    fn take_pending(&mut self, id: &str) -> Option<Delivery> {
        if self.awaiting.as_deref() == Some(id) {
            self.pending.take()
        } else {
            None
        }
    }

    fn conclude(&mut self, outcome: &Outcome) -> NodeStatus {
        self.bb.apply_all(&outcome.writes);
        outcome.status.into()
    }

    fn prompt(&mut self, node: &TreeNode, q: &QuestionPayload) -> NodeStatus {
        self.effects.push(Effect::Utterance {
            node_id: node.id.clone(),
            text: self.bb.render(&q.prompt),
            choices: q.answer.choices.iter().map(|c| c.label.clone()).collect(),
            attachments: q.attachments.iter().map(|a| self.bb.render(a)).filter(|a| !a.is_empty()).collect(),
        });
        NodeStatus::Waiting
    }

    fn answer(
        &mut self,
        node: &TreeNode,
        q: &QuestionPayload,
        delivery: Delivery,
    ) -> Result<NodeStatus, TickError> {
        let schema = &q.answer;
        let choice = |index: usize| -> Result<usize, TickError> {
            if index < schema.choices.len() {
                Ok(index)
            } else {
                Err(TickError::ChoiceOutOfRange { index, available: schema.choices.len() })
            }
        };
        let picked = match &delivery.event {
            UserEvent::ChoiceIndex(i) => Picked::Choice(choice(*i)?),
            UserEvent::QuestionnaireAnswer { question_id, option_index } => {
                if let Some(expected) = &q.question_id {
                    if expected != question_id {
                        return Err(TickError::QuestionMismatch {
                            expected: expected.clone(),
                            got: question_id.clone(),
                        });
                    }
                }
                Picked::Choice(choice(*option_index)?)
            }
            UserEvent::FreeText(text) => match match_label(schema, text) {
                Some(i) => Picked::Choice(i),
                None => Picked::Text(text.clone()),
            },
        };
        self.bb.apply_all(&delivery.writes);
        let status = match picked {
            Picked::Choice(i) => {
                let c = &schema.choices[i];
                if let Some(key) = &schema.record {
                    self.bb.set(key.clone(), c.label.clone());
                }
                if let Some(key) = &schema.record_index {
                    self.bb.set(key.clone(), i);
                }
                self.conclude(&c.outcome.clone())
            }
            Picked::Text(text) => {
                let outcome = delivery
                    .reaction
                    .and_then(|r| schema.reactions.get(&r))
                    .or(schema.free_text.as_ref())
                    .cloned();
                match outcome {
                    Some(outcome) => {
                        if let Some(key) = &schema.record {
                            self.bb.set(key.clone(), text.clone());
                        }
                        if let Some(category) = &q.feedback {
                            self.effects.push(Effect::FeedbackRecorded { category: category.clone(), text });
                        }
                        self.conclude(&outcome)
                    }
                    None => self.prompt(node, q),
                }
            }
        };
        Ok(status)
    }

    fn explain(&mut self, node: &TreeNode, x: &ExplainerPayload) -> Result<NodeStatus, TickError> {
        let registry = self.engine.registry;
        if !registry.contains(&x.explainer_id) {
            return Err(TickError::UnboundExplainer(x.explainer_id.clone()));
        }
        let target_id = match x.params.get("target") {
            Some(v) => self.resolve(v),
            None => self.bb.get(TARGET_KEY),
        };
        let target_id = match target_id {
            Value::Str(s) => s,
            _ => String::new(),
        };
        let target = match self.engine.targets.iter().find(|t| t.id == target_id) {
            Some(t) => t.clone(),
            None if self.engine.targets.is_empty() => Target::bare(target_id.clone()),
            None => return Err(TickError::UnknownTarget(target_id)),
        };
        let calls_key = calls_key(&node.id);
        let calls = self.bb.get(&calls_key).as_f64().unwrap_or(0.0) as usize;
        let mut params: Params = x
            .params
            .iter()
            .filter(|(k, _)| k.as_str() != "target")
            .map(|(k, v)| (k.clone(), self.resolve(v)))
            .collect();
        params.insert("call".into(), Value::from(calls));
        let result = registry.invoke(&x.explainer_id, &target, &params)?;

        let intro = match (&x.repeat_intro, calls) {
            (Some(repeat), n) if n > 0 => repeat.as_str(),
            _ => x.intro.as_str(),
        };
        let intro = if intro.is_empty() { result.rendering.clone() } else { self.bb.render(intro) };
        let text = [intro, self.bb.render(&x.probe)]
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join("\n");
        let attachments = result.attachments.clone();
        self.effects.push(Effect::ExplainerInvocation {
            node_id: node.id.clone(),
            explainer_id: x.explainer_id.clone(),
            target: target.id.clone(),
            result,
        });
        self.effects.push(Effect::Utterance {
            node_id: node.id.clone(),
            text,
            choices: Vec::new(),
            attachments,
        });
        self.bb.set(calls_key, calls + 1);
        Ok(NodeStatus::Waiting)
    }

    fn resolve(&self, v: &Value) -> Value {
        match v {
            Value::Str(s) if s.starts_with('$') => self.bb.get(&s[1..]),
            other => other.clone(),
        }
    }
}

enum Picked {
    Choice(usize),
    Text(String),
}

fn match_label(schema: &AnswerSchema, text: &str) -> Option<usize> {
    let wanted = normalize(text);
    schema.choices.iter().position(|c| normalize(&c.label) == wanted)
}
