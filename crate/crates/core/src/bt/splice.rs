use std::collections::HashSet;

use thiserror::Error;

use super::node::{Tree, TreeNode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpliceError {
    #[error("no node `{0}` to replace")]
    UnknownTarget(String),
    #[error("replacement reuses id `{0}` from outside the target sub-tree")]
    IdCollision(String),
}

/// Returns a copy of `tree` with the node `target` (and its sub-tree)
/// replaced by the root of `replacement`. Every other node is untouched.
pub fn splice_subtree(tree: &Tree, target: &str, replacement: &Tree) -> Result<Tree, SpliceError> {
    let removed = tree.find(target).ok_or_else(|| SpliceError::UnknownTarget(target.to_owned()))?;
    let removed_ids: HashSet<&str> = removed.iter().map(|n| n.id.as_str()).collect();
    let kept: HashSet<&str> = tree.ids().filter(|id| !removed_ids.contains(id)).collect();
    if let Some(clash) = replacement.ids().find(|id| kept.contains(id)) {
        return Err(SpliceError::IdCollision(clash.to_owned()));
    }

    let mut out = tree.root.clone();
    replace(&mut out, target, &replacement.root);
    Ok(Tree::new(out))
}

fn replace(node: &mut TreeNode, target: &str, with: &TreeNode) -> bool {
    if node.id == target {
        *node = with.clone();
        return true;
    }
    node.children.iter_mut().any(|c| replace(c, target, with))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Tree {
        Tree::new(TreeNode::sequence(
            "root",
            vec![TreeNode::information("hello", "hi"), TreeNode::placeholder("slot", vec![], vec![])],
        ))
    }

    #[test]
    fn identity_splice() {
        let tree = sample();
        let same = Tree::new(TreeNode::information("hello", "hi"));
        assert_eq!(splice_subtree(&tree, "hello", &same).unwrap(), tree);
    }

    #[test]
    fn replaces_only_target() {
        let tree = sample();
        let sub = Tree::new(TreeNode::sequence("slot", vec![TreeNode::information("x", "x")]));
        let out = splice_subtree(&tree, "slot", &sub).unwrap();
        assert_eq!(out.root.children[0], tree.root.children[0]);
        assert_eq!(out.root.children[1], sub.root);
    }

    #[test]
    fn errors() {
        let tree = sample();
        let sub = Tree::new(TreeNode::information("hello", "again"));
        assert_eq!(splice_subtree(&tree, "nope", &sub), Err(SpliceError::UnknownTarget("nope".into())));
        assert_eq!(splice_subtree(&tree, "slot", &sub), Err(SpliceError::IdCollision("hello".into())));
    }
}
