use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::blackboard::Value;

/// Outcome of ticking a node.
///
/// `Waiting` is produced only by action leaves that have prompted the user and
/// have no reply yet. Composites pass it upward untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeStatus {
    Success,
    Failure,
    Waiting,
}

impl NodeStatus {
    pub fn is_terminal(self) -> bool {
        !matches!(self, NodeStatus::Waiting)
    }
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeStatus::Success => "Success",
            NodeStatus::Failure => "Fail",
            NodeStatus::Waiting => "Waiting",
        };
        f.write_str(s)
    }
}

/// Terminal status chosen by a response rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Success,
    Failure,
}

impl From<Verdict> for NodeStatus {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Success => NodeStatus::Success,
            Verdict::Failure => NodeStatus::Failure,
        }
    }
}

/// Classified user reaction to an explanation or a follow-up question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reaction {
    Satisfied,
    Disagree,
    NewQuestion,
    MoreOfSame,
}

impl Reaction {
    pub const ALL: [Reaction; 4] =
        [Reaction::Satisfied, Reaction::Disagree, Reaction::NewQuestion, Reaction::MoreOfSame];

    pub fn as_str(self) -> &'static str {
        match self {
            Reaction::Satisfied => "satisfied",
            Reaction::Disagree => "disagree",
            Reaction::NewQuestion => "new_question",
            Reaction::MoreOfSame => "more_of_same",
        }
    }
}

/// A blackboard mutation carried by node outcomes and navigation rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlagWrite {
    Set { set: String, to: Value },
    ClearPrefix { clear_prefix: String },
}

impl FlagWrite {
    pub fn set(key: impl Into<String>, to: impl Into<Value>) -> Self {
        FlagWrite::Set { set: key.into(), to: to.into() }
    }

    pub fn clear_prefix(prefix: impl Into<String>) -> Self {
        FlagWrite::ClearPrefix { clear_prefix: prefix.into() }
    }

    /// Key written by this mutation, if it names one.
    pub fn key(&self) -> Option<&str> {
        match self {
            FlagWrite::Set { set, .. } => Some(set),
            FlagWrite::ClearPrefix { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub writes: Vec<FlagWrite>,
}

impl Outcome {
    pub fn success() -> Self {
        Outcome { status: Verdict::Success, writes: Vec::new() }
    }

    pub fn failure() -> Self {
        Outcome { status: Verdict::Failure, writes: Vec::new() }
    }

    pub fn with(mut self, write: FlagWrite) -> Self {
        self.writes.push(write);
        self
    }

    pub fn with_all(mut self, writes: impl IntoIterator<Item = FlagWrite>) -> Self {
        self.writes.extend(writes);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub label: String,
    pub outcome: Outcome,
}

/// How a question-answer leaf maps replies onto a status.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnswerSchema {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub choices: Vec<Choice>,
    /// Applied to free text that matches no choice label. `None` re-prompts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_text: Option<Outcome>,
    /// Applied to free text when the delivery carries a classified reaction.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reactions: BTreeMap<Reaction, Outcome>,
    /// Key receiving the chosen label or the free text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<String>,
    /// Key receiving the chosen option index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_index: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionPayload {
    pub key: String,
    #[serde(default = "default_expected")]
    pub expected: Value,
}

fn default_expected() -> Value {
    Value::Bool(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionPayload {
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attachments: Vec<String>,
    pub answer: AnswerSchema,
    /// Questionnaire item id; `QuestionnaireAnswer` events must name it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_id: Option<String>,
    /// Free-text replies are echoed as `FeedbackRecorded` under this category.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationPayload {
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attachments: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub writes: Vec<FlagWrite>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainerPayload {
    pub explainer_id: String,
    pub intent: String,
    /// Literal values, or `"$key"` strings resolved from the blackboard.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub intro: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat_intro: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub probe: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reactions: BTreeMap<Reaction, Outcome>,
}

impl ExplainerPayload {
    pub fn new(explainer_id: impl Into<String>, intent: impl Into<String>) -> Self {
        ExplainerPayload {
            explainer_id: explainer_id.into(),
            intent: intent.into(),
            params: BTreeMap::new(),
            intro: String::new(),
            repeat_intro: None,
            probe: String::new(),
            reactions: BTreeMap::new(),
        }
    }
}

/// An unfilled slot left in an abstract tree, declaring the keys its
/// eventual replacement reads and writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotPayload {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reads: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub writes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum NodeKind {
    Sequence,
    Priority,
    Condition(ConditionPayload),
    QuestionAnswer(QuestionPayload),
    Information(InformationPayload),
    Explainer(ExplainerPayload),
    Placeholder(SlotPayload),
}

impl NodeKind {
    pub fn is_composite(&self) -> bool {
        matches!(self, NodeKind::Sequence | NodeKind::Priority)
    }

    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::Sequence => "sequence",
            NodeKind::Priority => "priority",
            NodeKind::Condition(_) => "condition",
            NodeKind::QuestionAnswer(_) => "question_answer",
            NodeKind::Information(_) => "information",
            NodeKind::Explainer(_) => "explainer",
            NodeKind::Placeholder(_) => "placeholder",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
    /// Annotation letters used when reporting which marked nodes a
    /// conversation turn resolved (e.g. `["j", "k"]`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub marks: Vec<String>,
    #[serde(flatten)]
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    fn new(id: impl Into<String>, kind: NodeKind, children: Vec<TreeNode>) -> Self {
        TreeNode { id: id.into(), label: String::new(), marks: Vec::new(), kind, children }
    }

    pub fn sequence(id: impl Into<String>, children: Vec<TreeNode>) -> Self {
        Self::new(id, NodeKind::Sequence, children)
    }

    pub fn priority(id: impl Into<String>, children: Vec<TreeNode>) -> Self {
        Self::new(id, NodeKind::Priority, children)
    }

    pub fn condition(id: impl Into<String>, key: impl Into<String>, expected: impl Into<Value>) -> Self {
        Self::new(
            id,
            NodeKind::Condition(ConditionPayload { key: key.into(), expected: expected.into() }),
            Vec::new(),
        )
    }

    pub fn information(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self::new(
            id,
            NodeKind::Information(InformationPayload {
                text: text.into(),
                attachments: Vec::new(),
                writes: Vec::new(),
            }),
            Vec::new(),
        )
    }

    pub fn question(id: impl Into<String>, prompt: impl Into<String>, answer: AnswerSchema) -> Self {
        Self::new(
            id,
            NodeKind::QuestionAnswer(QuestionPayload {
                prompt: prompt.into(),
                attachments: Vec::new(),
                answer,
                question_id: None,
                feedback: None,
            }),
            Vec::new(),
        )
    }

    pub fn explainer(id: impl Into<String>, payload: ExplainerPayload) -> Self {
        Self::new(id, NodeKind::Explainer(payload), Vec::new())
    }

    pub fn placeholder(id: impl Into<String>, reads: Vec<String>, writes: Vec<String>) -> Self {
        Self::new(id, NodeKind::Placeholder(SlotPayload { reads, writes }), Vec::new())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_marks<S: Into<String>>(mut self, marks: impl IntoIterator<Item = S>) -> Self {
        self.marks = marks.into_iter().map(Into::into).collect();
        self
    }

    /// Adds blackboard writes to an Information leaf. No-op on other kinds.
    pub fn writing(mut self, writes: impl IntoIterator<Item = FlagWrite>) -> Self {
        if let NodeKind::Information(info) = &mut self.kind {
            info.writes.extend(writes);
        }
        self
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Pre-order iterator over this node and its descendants.
    pub fn iter(&self) -> PreOrder<'_> {
        PreOrder { stack: vec![self] }
    }

    pub fn find(&self, id: &str) -> Option<&TreeNode> {
        self.iter().find(|n| n.id == id)
    }

    pub fn find_mut(&mut self, id: &str) -> Option<&mut TreeNode> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter_mut().find_map(|c| c.find_mut(id))
    }

    /// Ids from this node down to `id`, inclusive, or `None` if absent.
    pub fn path_to(&self, id: &str) -> Option<Vec<&str>> {
        if self.id == id {
            return Some(vec![self.id.as_str()]);
        }
        for child in &self.children {
            if let Some(mut path) = child.path_to(id) {
                path.insert(0, self.id.as_str());
                return Some(path);
            }
        }
        None
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(TreeNode::depth).max().unwrap_or(0)
    }
}

pub struct PreOrder<'a> {
    stack: Vec<&'a TreeNode>,
}

impl<'a> Iterator for PreOrder<'a> {
    type Item = &'a TreeNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

/// A behaviour tree. Immutable once built; share it behind an `Arc`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tree {
    pub root: TreeNode,
}

impl Tree {
    pub fn new(root: TreeNode) -> Self {
        Tree { root }
    }

    pub fn find(&self, id: &str) -> Option<&TreeNode> {
        self.root.find(id)
    }

    pub fn iter(&self) -> PreOrder<'_> {
        self.root.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.iter().map(|n| n.id.as_str())
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn path_to(&self, id: &str) -> Option<Vec<&str>> {
        self.root.path_to(id)
    }

    /// Explainer leaves in left-to-right order.
    pub fn explainer_leaves(&self) -> Vec<(&str, &ExplainerPayload)> {
        self.iter()
            .filter_map(|n| match &n.kind {
                NodeKind::Explainer(p) => Some((n.id.as_str(), p)),
                _ => None,
            })
            .collect()
    }
}

impl From<TreeNode> for Tree {
    fn from(root: TreeNode) -> Self {
        Tree { root }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_json_shape_is_id_kind_payload_children() {
        let node = TreeNode::sequence(
            "root",
            vec![TreeNode::condition("gate", "done", true), TreeNode::information("hi", "hello")],
        );
        let json = serde_json::to_value(&node).unwrap();
        assert_eq!(json["id"], "root");
        assert_eq!(json["kind"], "sequence");
        assert_eq!(json["children"][0]["kind"], "condition");
        assert_eq!(json["children"][0]["payload"]["key"], "done");
        assert_eq!(json["children"][1]["payload"]["text"], "hello");
        let back: TreeNode = serde_json::from_value(json).unwrap();
        assert_eq!(back, node);
    }

    #[test]
    fn path_and_preorder() {
        let tree = Tree::new(TreeNode::priority(
            "r",
            vec![
                TreeNode::sequence("a", vec![TreeNode::information("a1", "x")]),
                TreeNode::information("b", "y"),
            ],
        ));
        let ids: Vec<_> = tree.ids().collect();
        assert_eq!(ids, ["r", "a", "a1", "b"]);
        assert_eq!(tree.path_to("a1").unwrap(), ["r", "a", "a1"]);
        assert!(tree.path_to("zz").is_none());
        assert_eq!(tree.root.depth(), 3);
    }
}
