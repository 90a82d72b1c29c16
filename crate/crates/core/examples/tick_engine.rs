//! Builds a small tree by hand and ticks it through one question.

use ee_dialogue::bt::{
    AnswerSchema, Blackboard, Choice, Engine, FlagWrite, Outcome, Tree, TreeNode, UserEvent,
};
use ee_dialogue::registry::Registry;

fn main() {
    let ask = TreeNode::question(
        "ask",
        "Coffee or tea?",
        AnswerSchema {
            choices: ["Coffee", "Tea"]
                .map(|label| Choice {
                    label: label.into(),
                    outcome: Outcome::success().with(FlagWrite::set("ordered", true)),
                })
                .to_vec(),
            record: Some("drink".into()),
            ..AnswerSchema::default()
        },
    );
    // The gate skips the question once it has been answered.
    let tree = Tree::new(TreeNode::sequence(
        "root",
        vec![
            TreeNode::priority("order", vec![TreeNode::condition("ordered?", "ordered", true), ask]),
            TreeNode::information("serve", "Here is your {drink}."),
        ],
    ));

    let registry = Registry::new();
    let engine = Engine::new(&registry);
    let mut bb = Blackboard::new();

    let first = engine.tick(&tree, &mut bb, None).unwrap();
    println!("tick 1: {} waiting on {:?}", first.status, first.waiting_node);
    for e in &first.effects {
        println!("  bot: {}", e.text().unwrap_or_default());
    }

    let second = engine.tick(&tree, &mut bb, Some(UserEvent::text("tea").into())).unwrap();
    println!("tick 2: {}", second.status);
    for e in &second.effects {
        println!("  bot: {}", e.text().unwrap_or_default());
    }
    for (node, status) in &second.visited {
        println!("  visited {node}: {status}");
    }
}
