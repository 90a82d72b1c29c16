use std::sync::Arc;

use thiserror::Error;

use super::transcript::{Entry, Row, SessionStatus, Transcript};
use crate::bt::{
    records_for, Blackboard, Delivery, Effect, Engine, NodeKind, NodeStatus, TickError, TickResult,
    TraceRecord, TreeNode, UserEvent, Value,
};
use crate::dialogue::{
    apply_nav_rules, build_abstract_tree, context_entries, match_question, nodes, personalize, EeTree,
    MatchResult, PersonalizeError, PhraseTable, Stage,
};
use crate::registry::{Registry, Target};
use crate::text::normalize;

/// A personalized tree together with everything needed to run it.
#[derive(Debug)]
pub struct Blueprint {
    pub spec: crate::spec::XaiSpec,
    pub tree: EeTree,
    pub registry: Arc<Registry>,
    pub phrases: Arc<PhraseTable>,
    targets: Vec<Target>,
}

impl Blueprint {
    pub fn new(
        spec: crate::spec::XaiSpec,
        registry: Arc<Registry>,
        phrases: Arc<PhraseTable>,
    ) -> Result<Self, PersonalizeError> {
        let tree = personalize(&build_abstract_tree(), &spec, &registry)?;
        let targets = spec.instance.iter().cloned().collect();
        Ok(Blueprint { spec, tree, registry, phrases, targets })
    }

    pub fn spec_id(&self) -> &str {
        &self.spec.spec_id
    }

    fn engine(&self) -> Engine<'_> {
        Engine::new(&self.registry).with_targets(&self.targets)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConversationError {
    #[error("session is {}", .0.as_str())]
    Closed(SessionStatus),
    #[error("session is not waiting for input")]
    NotWaiting,
    #[error(transparent)]
    Tick(#[from] TickError),
}

/// What a single user event turned into, before it is ticked.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpretation {
    pub delivery: Delivery,
    pub stage: Option<Stage>,
    /// Free text given at need selection that matched no configured question.
    pub unmet_question: Option<String>,
}

/// Outcome of one user turn (or of session start).
#[derive(Debug, Clone, PartialEq)]
pub struct Turn {
    pub effects: Vec<Effect>,
    pub rows: Vec<Row>,
    pub status: SessionStatus,
    pub waiting_node: Option<String>,
    pub unmet_question: Option<String>,
}

const UNMET_ACK: &str = "Thank you. I cannot answer that question yet, so I have recorded it to \
                         help improve the system. Please choose one of the questions below.";

/// One running dialogue over a [`Blueprint`].
#[derive(Debug)]
pub struct Conversation {
    blueprint: Arc<Blueprint>,
    bb: Blackboard,
    transcript: Transcript,
    status: SessionStatus,
    ticks: u64,
    last_visited: Vec<(String, NodeStatus)>,
    trace: Vec<TraceRecord>,
    stages: Vec<Stage>,
}

impl Conversation {
    /// Seeds the blackboard from the spec and runs the first tick.
    pub fn start(
        blueprint: Arc<Blueprint>,
        session_id: impl Into<String>,
    ) -> Result<(Conversation, Turn), ConversationError> {
        let mut bb = Blackboard::new();
        for (k, v) in context_entries(&blueprint.spec) {
            bb.set(k, v);
        }
        let transcript = Transcript::new(session_id, blueprint.spec_id());
        let mut conv = Conversation {
            blueprint,
            bb,
            transcript,
            status: SessionStatus::Active,
            ticks: 0,
            last_visited: Vec::new(),
            trace: Vec::new(),
            stages: Vec::new(),
        };
        let mut effects = Vec::new();
        let mut rows = Vec::new();
        let result = conv.tick(None, &mut effects, &mut rows)?;
        conv.settle(result.status, &mut effects, &mut rows)?;
        let turn = conv.finish_turn(effects, rows, None);
        Ok((conv, turn))
    }

    pub fn blueprint(&self) -> &Arc<Blueprint> {
        &self.blueprint
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn blackboard(&self) -> &Blackboard {
        &self.bb
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn waiting_node(&self) -> Option<&str> {
        self.bb.awaiting()
    }

    /// Stages that held the waiting node, consecutive repeats collapsed.
    pub fn stage_log(&self) -> &[Stage] {
        &self.stages
    }

    pub fn reached(&self, stage: Stage) -> bool {
        self.stages.contains(&stage)
    }

    /// Ends an open session without further ticks.
    pub fn close(&mut self, status: SessionStatus) {
        if self.status.is_open() {
            self.status = status;
        }
    }

    /// Reads `event` against the waiting node: references to listed options
    /// become choices, and remaining free text is classified into a
    /// reaction with its navigation writes.
    pub fn interpret(&self, event: UserEvent) -> Result<Interpretation, ConversationError> {
        let waiting = self.waiting_node().ok_or(ConversationError::NotWaiting)?;
        let tree = &self.blueprint.tree.tree;
        let node = tree.find(waiting).ok_or(ConversationError::NotWaiting)?;
        let stage = Stage::of_node(tree, waiting);
        let phrases = &self.blueprint.phrases;
        let mut unmet_question = None;

        let event = match (event, &node.kind) {
            (UserEvent::FreeText(text), NodeKind::QuestionAnswer(q)) if !q.answer.choices.is_empty() => {
                let labels: Vec<&str> = q.answer.choices.iter().map(|c| c.label.as_str()).collect();
                match resolve_choice(phrases, &labels, &text) {
                    Some(i) => UserEvent::ChoiceIndex(i),
                    None if node.id == nodes::SELECT_NEED => {
                        match match_question(&UserEvent::FreeText(text.clone()), &self.blueprint.spec.needs) {
                            Ok(MatchResult::Intent { index, .. }) => UserEvent::ChoiceIndex(index),
                            _ => {
                                unmet_question = Some(text.clone());
                                UserEvent::FreeText(text)
                            }
                        }
                    }
                    None => UserEvent::FreeText(text),
                }
            }
            (other, _) => other,
        };

        let mut delivery = Delivery::from(event);
        if let UserEvent::FreeText(text) = &delivery.event {
            if declares_reactions(node) {
                delivery.reaction = phrases.classify(text);
                if let (Some(r), Some(s)) = (delivery.reaction, stage) {
                    delivery.writes = apply_nav_rules(s, r).unwrap_or_default();
                }
            }
        }
        Ok(Interpretation { delivery, stage, unmet_question })
    }

    pub fn post(&mut self, event: UserEvent) -> Result<Turn, ConversationError> {
        if !self.status.is_open() {
            return Err(ConversationError::Closed(self.status));
        }
        let node_id = self.waiting_node().ok_or(ConversationError::NotWaiting)?.to_owned();
        let interp = self.interpret(event.clone())?;

        let mut effects = Vec::new();
        let mut rows = Vec::new();
        if let Some(q) = &interp.unmet_question {
            effects.push(Effect::FeedbackRecorded { category: "unmet_need".into(), text: q.clone() });
            effects.push(Effect::utterance(nodes::SELECT_NEED, UNMET_ACK));
        }
        // Keep state intact if the delivery is rejected.
        let snapshot = (self.bb.clone(), self.ticks, self.last_visited.clone(), self.trace.len());
        let outcome = self
            .tick(Some(interp.delivery), &mut effects, &mut rows)
            .and_then(|r| self.settle(r.status, &mut effects, &mut rows));
        if let Err(e) = outcome {
            (self.bb, self.ticks, self.last_visited) = (snapshot.0, snapshot.1, snapshot.2);
            self.trace.truncate(snapshot.3);
            return Err(e);
        }

        self.transcript.entries.push(Entry::User { node_id, event, rows: rows.clone(), status: self.status });
        Ok(self.finish_turn(effects, rows, interp.unmet_question))
    }

    fn tick(
        &mut self,
        pending: Option<Delivery>,
        effects: &mut Vec<Effect>,
        rows: &mut Vec<Row>,
    ) -> Result<TickResult, ConversationError> {
        let result = self.blueprint.engine().tick(&self.blueprint.tree.tree, &mut self.bb, pending)?;
        self.ticks += 1;
        self.trace.extend(records_for(self.ticks, &result));
        rows.extend(self.rows_for(&result));
        self.last_visited = result.visited.clone();
        effects.extend(result.effects.iter().cloned());
        Ok(result)
    }

    /// A failed root gets one fresh tick, so flags written by the failing
    /// branch can route the dialogue elsewhere. A second failure aborts.
    fn settle(
        &mut self,
        status: NodeStatus,
        effects: &mut Vec<Effect>,
        rows: &mut Vec<Row>,
    ) -> Result<(), ConversationError> {
        let status = match status {
            NodeStatus::Failure => self.tick(None, effects, rows)?.status,
            s => s,
        };
        self.status = match status {
            NodeStatus::Waiting => SessionStatus::Active,
            NodeStatus::Success => SessionStatus::Completed,
            NodeStatus::Failure => SessionStatus::Aborted,
        };
        Ok(())
    }

    fn rows_for(&self, result: &TickResult) -> Vec<Row> {
        let tree = &self.blueprint.tree.tree;
        result
            .visited
            .iter()
            .filter(|(_, s)| s.is_terminal())
            .filter(|(id, _)| {
                self.last_visited.iter().any(|(prev, s)| prev == id && *s == NodeStatus::Waiting)
            })
            .filter_map(|(id, status)| {
                let node = tree.find(id)?;
                (!node.marks.is_empty()).then(|| Row {
                    marks: node.marks.join("→"),
                    node_id: id.clone(),
                    status: *status,
                })
            })
            .collect()
    }

    fn finish_turn(&mut self, effects: Vec<Effect>, rows: Vec<Row>, unmet: Option<String>) -> Turn {
        let waiting = self.waiting_node().map(str::to_owned);
        for effect in &effects {
            let node_id = effect
                .node_id()
                .map(str::to_owned)
                .or_else(|| waiting.clone())
                .unwrap_or_else(|| nodes::ROOT.to_owned());
            self.transcript.entries.push(Entry::Bot { node_id, effect: effect.clone() });
        }
        for item in &self.blueprint.spec.evaluation.questionnaire {
            if let Some(Value::Num(n)) = self.bb.lookup(&format!("answer.{}", item.question_id)) {
                self.transcript.responses.insert(item.question_id.clone(), *n as usize);
            }
        }
        if let Some(stage) = waiting.as_deref().and_then(|w| Stage::of_node(&self.blueprint.tree.tree, w)) {
            if self.stages.last() != Some(&stage) {
                self.stages.push(stage);
            }
        }
        Turn { effects, rows, status: self.status, waiting_node: waiting, unmet_question: unmet }
    }
}

/// Index of the option `text` names: its label, an ordinal reference such
/// as "question 2", or a yes/no synonym when the options are yes/no style.
fn resolve_choice(phrases: &PhraseTable, labels: &[&str], text: &str) -> Option<usize> {
    let wanted = normalize(text);
    if let Some(i) = labels.iter().position(|l| normalize(l) == wanted) {
        return Some(i);
    }
    if let Some(i) = phrases.ordinal(text).filter(|i| *i < labels.len()) {
        return Some(i);
    }
    let find = |names: &[&str]| labels.iter().position(|l| names.contains(&normalize(l).as_str()));
    match phrases.yes_no(text)? {
        true => find(&["yes"]),
        false => find(&["no", "not now"]),
    }
}

fn declares_reactions(node: &TreeNode) -> bool {
    match &node.kind {
        NodeKind::Explainer(_) => true,
        NodeKind::QuestionAnswer(q) => !q.answer.reactions.is_empty(),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phrases() -> PhraseTable {
        PhraseTable::embedded()
    }

    #[test]
    fn choice_resolution() {
        let p = phrases();
        assert_eq!(resolve_choice(&p, &["Yes", "No"], "Yes of course!"), Some(0));
        assert_eq!(resolve_choice(&p, &["Yes", "Not now"], "not now thanks"), Some(1));
        assert_eq!(resolve_choice(&p, &["Yes", "No"], "maybe"), None);
        assert_eq!(resolve_choice(&p, &["a", "b"], "Question 2 please"), Some(1));
        assert_eq!(resolve_choice(&p, &["a", "b", "c"], "question 9"), None);
        assert_eq!(resolve_choice(&p, &["Agree", "Neutral"], "neutral"), Some(1));
    }
}
