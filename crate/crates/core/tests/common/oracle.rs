//! Exhaustive comparison of the engine's tick with a small recursive
//! reference interpreter over every tree of up to three levels, at most
//! three children per composite, and leaves with a fixed status.

use ee_dialogue::bt::{AnswerSchema, Blackboard, Engine, NodeKind, NodeStatus, Tree, TreeNode};
use ee_dialogue::registry::Registry;

/// 3 leaves, 81 trees of two levels, and 2 * (81 + 81^2 + 81^3) of three.
pub const TREE_COUNT: usize = 3 + 2 * (81 + 81 * 81 + 81 * 81 * 81);

const LEAVES: [NodeStatus; 3] = [NodeStatus::Success, NodeStatus::Failure, NodeStatus::Waiting];

pub fn leaf(status: NodeStatus, id: String) -> TreeNode {
    match status {
        NodeStatus::Success => TreeNode::condition(id, "on", true),
        NodeStatus::Failure => TreeNode::condition(id, "on", false),
        NodeStatus::Waiting => TreeNode::question(id, "?", AnswerSchema::default()),
    }
}

fn composite(sequence: bool, id: String, children: Vec<TreeNode>) -> TreeNode {
    if sequence {
        TreeNode::sequence(id, children)
    } else {
        TreeNode::priority(id, children)
    }
}

/// Index lists of length one to three over `count` options.
fn child_lists(count: usize, mut visit: impl FnMut(&[usize])) {
    for len in 1..=3u32 {
        for n in 0..count.pow(len) {
            let idx: Vec<usize> = (0..len).map(|p| n / count.pow(p) % count).collect();
            visit(&idx);
        }
    }
}

/// Every tree of at most `levels` levels rooted at `id`, passed to `visit`.
pub fn trees(levels: usize, id: &str, visit: &mut dyn FnMut(TreeNode)) {
    for s in LEAVES {
        visit(leaf(s, id.to_owned()));
    }
    if levels == 1 {
        return;
    }
    // all smaller trees for each child position, built once
    let below: Vec<Vec<TreeNode>> = (0..3)
        .map(|pos| {
            let mut v = Vec::new();
            trees(levels - 1, &format!("{id}.{pos}"), &mut |t| v.push(t));
            v
        })
        .collect();
    for sequence in [true, false] {
        child_lists(below[0].len(), |idx| {
            let children = idx.iter().enumerate().map(|(pos, i)| below[pos][*i].clone()).collect();
            visit(composite(sequence, id.to_owned(), children));
        });
    }
}

/// Reference semantics written straight from the composite definitions.
pub fn reference(
    node: &TreeNode,
    visited: &mut Vec<(String, NodeStatus)>,
    waiting: &mut Option<String>,
) -> NodeStatus {
    let at = visited.len();
    visited.push((node.id.clone(), NodeStatus::Waiting));
    let status = match &node.kind {
        NodeKind::Condition(c) => {
            if c.expected.as_bool() == Some(true) {
                NodeStatus::Success
            } else {
                NodeStatus::Failure
            }
        }
        NodeKind::QuestionAnswer(_) => {
            waiting.get_or_insert_with(|| node.id.clone());
            NodeStatus::Waiting
        }
        NodeKind::Sequence => {
            let mut result = NodeStatus::Success;
            for c in &node.children {
                let s = reference(c, visited, waiting);
                if s != NodeStatus::Success {
                    result = s;
                    break;
                }
            }
            result
        }
        NodeKind::Priority => {
            let mut result = NodeStatus::Failure;
            for c in &node.children {
                let s = reference(c, visited, waiting);
                if s != NodeStatus::Failure {
                    result = s;
                    break;
                }
            }
            result
        }
        other => panic!("unexpected node kind {}", other.name()),
    };
    visited[at].1 = status;
    status
}

/// Ticks every enumerated tree with the engine and the reference.
/// Returns (trees checked, discrepancies).
pub fn exhaustive_check() -> (usize, usize) {
    let registry = Registry::new();
    let engine = Engine::new(&registry);
    let mut seed = Blackboard::new();
    seed.set("on", true);

    let mut count = 0usize;
    let mut discrepancies = 0usize;
    trees(3, "r", &mut |root| {
        count += 1;
        let tree = Tree::new(root);
        let mut bb = seed.clone();
        let got = engine.tick(&tree, &mut bb, None).unwrap();
        let mut visited = Vec::new();
        let mut first_waiting = None;
        let want = reference(&tree.root, &mut visited, &mut first_waiting);
        if got.status != want || got.visited != visited || got.waiting_node != first_waiting {
            discrepancies += 1;
        }
    });
    (count, discrepancies)
}
