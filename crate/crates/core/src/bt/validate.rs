use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::engine::{calls_key, executed_key};
use super::node::{NodeKind, Reaction, Tree, TreeNode};
use crate::registry::Registry;

/// A broken tree invariant. Violations are data, not errors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "violation", content = "at", rename_all = "snake_case")]
pub enum Violation {
    DuplicateId(String),
    ChildlessComposite(String),
    ChildrenOnLeaf(String),
    UnresolvedExplainer(String),
    UnwrittenFlag { node: String, key: String },
    EmptyChoices(String),
    PartialReactionRules(String),
    EmptyUtterance(String),
    UnfilledPlaceholder(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "DuplicateId({id})"),
            Violation::ChildlessComposite(id) => write!(f, "ChildlessComposite({id})"),
            Violation::ChildrenOnLeaf(id) => write!(f, "ChildrenOnLeaf({id})"),
            Violation::UnresolvedExplainer(id) => write!(f, "UnresolvedExplainer({id})"),
            Violation::UnwrittenFlag { node, key } => {
                write!(f, "UnwrittenFlag({key}) read by {node}")
            }
            Violation::EmptyChoices(id) => write!(f, "EmptyChoices({id})"),
            Violation::PartialReactionRules(id) => write!(f, "PartialReactionRules({id})"),
            Violation::EmptyUtterance(id) => write!(f, "EmptyUtterance({id})"),
            Violation::UnfilledPlaceholder(id) => write!(f, "UnfilledPlaceholder({id})"),
        }
    }
}

/// Checks every tree invariant. An empty result means the tree is executable.
pub fn validate_tree(tree: &Tree, registry: &Registry) -> Vec<Violation> {
    validate_tree_with(tree, registry, &BTreeSet::new())
}

/// Like [`validate_tree`], treating `external_keys` as written by something
/// outside the tree (the host dialogue or the session).
pub fn validate_tree_with(
    tree: &Tree,
    registry: &Registry,
    external_keys: &BTreeSet<String>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for node in tree.iter() {
        if !seen.insert(node.id.as_str()) {
            out.push(Violation::DuplicateId(node.id.clone()));
        }
        check_node(node, registry, &mut out);
    }

    let written = written_keys(tree);
    for node in tree.iter() {
        if let NodeKind::Condition(c) = &node.kind {
            if !written.contains(&c.key) && !external_keys.contains(&c.key) {
                out.push(Violation::UnwrittenFlag { node: node.id.clone(), key: c.key.clone() });
            }
        }
    }
    out
}

fn check_node(node: &TreeNode, registry: &Registry, out: &mut Vec<Violation>) {
    if node.kind.is_composite() {
        if node.children.is_empty() {
            out.push(Violation::ChildlessComposite(node.id.clone()));
        }
        return;
    }
    if !node.children.is_empty() {
        out.push(Violation::ChildrenOnLeaf(node.id.clone()));
    }
    match &node.kind {
        NodeKind::QuestionAnswer(q) => {
            if q.prompt.trim().is_empty() {
                out.push(Violation::EmptyUtterance(node.id.clone()));
            }
            let a = &q.answer;
            if a.choices.is_empty() && a.free_text.is_none() && a.reactions.is_empty() {
                out.push(Violation::EmptyChoices(node.id.clone()));
            }
            if !a.reactions.is_empty() && Reaction::ALL.iter().any(|r| !a.reactions.contains_key(r)) {
                out.push(Violation::PartialReactionRules(node.id.clone()));
            }
        }
        NodeKind::Information(i) => {
            if i.text.trim().is_empty() {
                out.push(Violation::EmptyUtterance(node.id.clone()));
            }
        }
        NodeKind::Explainer(x) => {
            if !registry.contains(&x.explainer_id) {
                out.push(Violation::UnresolvedExplainer(x.explainer_id.clone()));
            }
            if !x.reactions.is_empty() && Reaction::ALL.iter().any(|r| !x.reactions.contains_key(r)) {
                out.push(Violation::PartialReactionRules(node.id.clone()));
            }
        }
        NodeKind::Placeholder(_) => out.push(Violation::UnfilledPlaceholder(node.id.clone())),
        _ => {}
    }
}

/// Keys some node in the tree may write.
pub fn written_keys(tree: &Tree) -> BTreeSet<String> {
    let mut keys = BTreeSet::new();
    for node in tree.iter() {
        match &node.kind {
            NodeKind::Information(i) => {
                keys.extend(i.writes.iter().filter_map(|w| w.key().map(str::to_owned)));
            }
            NodeKind::QuestionAnswer(q) => {
                let a = &q.answer;
                let outcomes = a
                    .choices
                    .iter()
                    .map(|c| &c.outcome)
                    .chain(a.free_text.iter())
                    .chain(a.reactions.values());
                for o in outcomes {
                    keys.extend(o.writes.iter().filter_map(|w| w.key().map(str::to_owned)));
                }
                keys.extend(a.record.iter().cloned());
                keys.extend(a.record_index.iter().cloned());
            }
            NodeKind::Explainer(x) => {
                keys.insert(executed_key(&node.id));
                keys.insert(calls_key(&node.id));
                for o in x.reactions.values() {
                    keys.extend(o.writes.iter().filter_map(|w| w.key().map(str::to_owned)));
                }
            }
            NodeKind::Placeholder(slot) => keys.extend(slot.writes.iter().cloned()),
            _ => {}
        }
    }
    keys
}

/// Keys read by Condition nodes (plus those declared by placeholders).
pub fn read_keys(tree: &Tree) -> BTreeSet<String> {
    let mut keys = BTreeSet::new();
    for node in tree.iter() {
        match &node.kind {
            NodeKind::Condition(c) => {
                keys.insert(c.key.clone());
            }
            NodeKind::Placeholder(slot) => keys.extend(slot.reads.iter().cloned()),
            _ => {}
        }
    }
    keys
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bt::node::{AnswerSchema, ExplainerPayload, FlagWrite, Outcome};

    #[test]
    fn childless_sequence() {
        let tree = Tree::new(TreeNode::sequence("s", vec![]));
        assert_eq!(validate_tree(&tree, &Registry::new()), [Violation::ChildlessComposite("s".into())]);
    }

    #[test]
    fn explainer_missing_from_empty_registry() {
        let tree = Tree::new(TreeNode::explainer("x", ExplainerPayload::new("lime", "transparency")));
        assert_eq!(validate_tree(&tree, &Registry::new()), [Violation::UnresolvedExplainer("lime".into())]);
    }

    #[test]
    fn duplicate_ids_and_unwritten_flags() {
        let tree = Tree::new(TreeNode::priority(
            "p",
            vec![TreeNode::condition("c", "nobody_writes", true), TreeNode::information("c", "x")],
        ));
        let v = validate_tree(&tree, &Registry::new());
        assert!(v.contains(&Violation::DuplicateId("c".into())));
        assert!(v.contains(&Violation::UnwrittenFlag { node: "c".into(), key: "nobody_writes".into() }));
        let external = BTreeSet::from(["nobody_writes".to_owned()]);
        let v = validate_tree_with(&tree, &Registry::new(), &external);
        assert_eq!(v, [Violation::DuplicateId("c".into())]);
    }

    #[test]
    fn written_flags_satisfy_conditions() {
        let tree = Tree::new(TreeNode::priority(
            "p",
            vec![
                TreeNode::condition("c", "done", true),
                TreeNode::information("i", "x").writing([FlagWrite::set("done", true)]),
            ],
        ));
        assert!(validate_tree(&tree, &Registry::new()).is_empty());
    }

    #[test]
    fn question_rules_must_be_total() {
        let mut empty = TreeNode::question("q", "?", AnswerSchema::default());
        assert_eq!(
            validate_tree(&Tree::new(empty.clone()), &Registry::new()),
            [Violation::EmptyChoices("q".into())]
        );
        if let NodeKind::QuestionAnswer(q) = &mut empty.kind {
            q.answer.reactions.insert(Reaction::Satisfied, Outcome::success());
        }
        assert_eq!(
            validate_tree(&Tree::new(empty), &Registry::new()),
            [Violation::PartialReactionRules("q".into())]
        );
    }

    #[test]
    fn leaf_with_children_and_placeholder() {
        let mut leaf = TreeNode::information("i", "x");
        leaf.children.push(TreeNode::information("j", "y"));
        let tree =
            Tree::new(TreeNode::sequence("s", vec![leaf, TreeNode::placeholder("slot", vec![], vec![])]));
        let v = validate_tree(&tree, &Registry::new());
        assert!(v.contains(&Violation::ChildrenOnLeaf("i".into())));
        assert!(v.contains(&Violation::UnfilledPlaceholder("slot".into())));
    }
}
