//! Loads a spec, validates it, and prints the personalized strategy slot.
//!
//! `cargo run --example personalize_spec -- [path/to/spec.xaispec.json]`

use std::path::PathBuf;

use ee_dialogue::bt::TreeNode;
use ee_dialogue::dialogue::{build_abstract_tree, nodes, personalize};
use ee_dialogue::registry::Registry;
use ee_dialogue::spec::{load_spec, validate_spec};

fn show(node: &TreeNode, depth: usize) {
    let marks = if node.marks.is_empty() { String::new() } else { format!(" [{}]", node.marks.join("→")) };
    println!("{}{} ({}){marks}", "  ".repeat(depth), node.id, node.kind.name());
    for child in &node.children {
        show(child, depth + 1);
    }
}

fn main() {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/specs/loan_trainee.xaispec.json")
    });
    let spec = load_spec(&path).expect("spec parses");
    let registry = Registry::with_mocks();

    let violations = validate_spec(&spec, &registry);
    if !violations.is_empty() {
        for v in violations {
            eprintln!("{v}");
        }
        std::process::exit(1);
    }

    let ee = personalize(&build_abstract_tree(), &spec, &registry).expect("personalizes");
    println!("{}: {} nodes", spec.spec_id, ee.tree.len());
    show(ee.tree.find(nodes::STRATEGY_SLOT).unwrap(), 0);
}
