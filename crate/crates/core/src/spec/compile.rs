use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::model::XaiSpec;
use crate::bt::{
    executed_key, validate_tree_with, ExplainerPayload, FlagWrite, NodeKind, Outcome, Reaction, Tree,
    TreeNode, Violation,
};
use crate::registry::Registry;

/// Blackboard key holding the intent of the selected explanation need.
pub const INTENT_KEY: &str = "intent";
/// Set when the user asked for more after an explanation; lets the strategy
/// fall through to further explainers and to branches of other intents.
pub const MORE_REQUESTED_KEY: &str = "more_requested";

#[derive(Debug, Error, Clone, PartialEq)]
#[error("strategy tree is not executable: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))]
pub struct CompileError(pub Vec<Violation>);

/// Keys a strategy tree may read without writing them itself.
pub(crate) fn external_keys() -> BTreeSet<String> {
    [INTENT_KEY, MORE_REQUESTED_KEY].into_iter().map(str::to_owned).collect()
}

/// Turns the authored strategy into an engine-ready tree.
///
/// Each top-level branch is entered when the selected intent is one it
/// serves, or when the user asked for more. Every explainer runs at most
/// once per need (guarded by its `exec.<id>` flag), and fallback explainers
/// after the first position of a `Priority` only run on request.
pub fn compile_strategy(spec: &XaiSpec, registry: &Registry) -> Result<Tree, CompileError> {
    let authored = &spec.strategy.tree;
    let violations = validate_tree_with(authored, registry, &external_keys());
    if !violations.is_empty() {
        return Err(CompileError(violations));
    }

    let root = &authored.root;
    let (root_id, branches): (String, Vec<&TreeNode>) = match root.kind {
        NodeKind::Priority => (root.id.clone(), root.children.iter().collect()),
        _ => (format!("{}.choice", root.id), vec![root]),
    };
    let children = branches.into_iter().map(gate_branch).collect();
    let mut compiled = TreeNode::priority(root_id, children);
    if matches!(root.kind, NodeKind::Priority) {
        compiled.label = root.label.clone();
        compiled.marks = root.marks.clone();
    }
    Ok(Tree::new(compiled))
}

fn gate_branch(branch: &TreeNode) -> TreeNode {
    let mut intents: Vec<&str> = Vec::new();
    for node in branch.iter() {
        if let NodeKind::Explainer(x) = &node.kind {
            if !intents.contains(&x.intent.as_str()) {
                intents.push(&x.intent);
            }
        }
    }
    let body = compile_node(branch, false);
    if intents.is_empty() {
        return body;
    }
    let mut gates: Vec<TreeNode> = intents
        .iter()
        .map(|intent| {
            TreeNode::condition(format!("{}.is_{}", branch.id, intent.replace(' ', "_")), INTENT_KEY, *intent)
        })
        .collect();
    gates.push(TreeNode::condition(format!("{}.more", branch.id), MORE_REQUESTED_KEY, true));
    TreeNode::sequence(
        format!("{}.entry", branch.id),
        vec![TreeNode::priority(format!("{}.gate", branch.id), gates), body],
    )
}

fn compile_node(node: &TreeNode, on_request: bool) -> TreeNode {
    match &node.kind {
        NodeKind::Explainer(x) => {
            let mut leaf = node.clone();
            leaf.kind = NodeKind::Explainer(with_default_reactions(x));
            let mut guard =
                vec![TreeNode::condition(format!("{}.fresh", node.id), executed_key(&node.id), false)];
            if on_request {
                guard.push(TreeNode::condition(format!("{}.wanted", node.id), MORE_REQUESTED_KEY, true));
            }
            guard.push(leaf);
            TreeNode::sequence(format!("{}.once", node.id), guard)
        }
        NodeKind::Priority | NodeKind::Sequence => {
            let fallback = matches!(node.kind, NodeKind::Priority);
            let mut out = node.clone();
            out.children = node
                .children
                .iter()
                .enumerate()
                .map(|(i, c)| compile_node(c, if i == 0 { on_request } else { fallback }))
                .collect();
            out
        }
        _ => node.clone(),
    }
}

fn with_default_reactions(x: &ExplainerPayload) -> ExplainerPayload {
    let mut x = x.clone();
    if !x.reactions.is_empty() {
        return x;
    }
    let more = |wanted: bool| FlagWrite::set(MORE_REQUESTED_KEY, wanted);
    x.reactions = BTreeMap::from([
        (Reaction::Satisfied, Outcome::success().with(more(false))),
        (Reaction::MoreOfSame, Outcome::failure().with(more(true))),
        (Reaction::Disagree, Outcome::failure().with(more(false))),
        (Reaction::NewQuestion, Outcome::failure().with(more(false))),
    ]);
    x
}
