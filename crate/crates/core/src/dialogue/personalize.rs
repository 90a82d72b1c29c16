use std::collections::BTreeMap;

use thiserror::Error;

use super::abstract_tree::{memo, EeTree};
use super::flags::*;
use super::nodes;
use crate::bt::{
    executed_key, splice_subtree, validate_tree, AnswerSchema, Choice, FlagWrite, NodeKind, Outcome,
    Reaction, SpliceError, Tree, TreeNode, Value, Violation,
};
use crate::registry::Registry;
use crate::spec::{
    compile_strategy, validate_spec, CompileError, EvaluationStrategy, SpecViolation, XaiSpec,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PersonalizeError {
    #[error("spec is not runnable: {}", join(.0))]
    Spec(Vec<SpecViolation>),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Splice(#[from] SpliceError),
    #[error("annotation names unknown node `{0}`")]
    UnknownAnnotation(String),
    #[error("personalized tree is not executable: {}", join(.0))]
    Tree(Vec<Violation>),
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

const ACCEPTED: &str = "evaluation.accepted";

/// Fills the abstract tree from `spec`: the need question lists the spec's
/// questions, the strategy slot receives the compiled strategy and the
/// evaluation slot the questionnaire. Nothing else changes.
pub fn personalize(
    abstract_tree: &EeTree,
    spec: &XaiSpec,
    registry: &Registry,
) -> Result<EeTree, PersonalizeError> {
    let violations = validate_spec(spec, registry);
    if !violations.is_empty() {
        return Err(PersonalizeError::Spec(violations));
    }

    let mut root = abstract_tree.tree.root.clone();
    if let Some(NodeKind::QuestionAnswer(q)) = root.find_mut(nodes::SELECT_NEED).map(|n| &mut n.kind) {
        q.answer.choices = spec
            .needs
            .iter()
            .map(|need| Choice {
                label: need.question.clone(),
                outcome: Outcome::success()
                    .with(FlagWrite::set(INTENT, need.intent.as_str()))
                    .with(FlagWrite::set("need.selected", true)),
            })
            .collect();
    }
    let mut tree = Tree::new(root);

    let strategy = strategy_slot(compile_strategy(spec, registry)?);
    tree = splice_subtree(&tree, nodes::STRATEGY_SLOT, &strategy)?;
    tree = splice_subtree(&tree, nodes::EVAL_SLOT, &evaluation_slot(&spec.evaluation))?;

    for (id, marks) in &spec.annotations {
        let node = tree.root.find_mut(id).ok_or_else(|| PersonalizeError::UnknownAnnotation(id.clone()))?;
        node.marks = marks.clone();
    }

    let violations = validate_tree(&tree, registry);
    if !violations.is_empty() {
        return Err(PersonalizeError::Tree(violations));
    }
    Ok(EeTree { tree, flag_registry: abstract_tree.flag_registry.clone() })
}

/// Gates the compiled strategy: skipped once done or while a disagreement
/// is open, and finished once every explainer has run.
fn strategy_slot(compiled: Tree) -> Tree {
    let spent: Vec<TreeNode> = compiled
        .explainer_leaves()
        .iter()
        .map(|(id, _)| TreeNode::condition(format!("{id}.spent"), executed_key(id), true))
        .collect();
    Tree::new(TreeNode::priority(
        nodes::STRATEGY_SLOT,
        vec![
            TreeNode::condition("strategy_slot.gate", STRATEGY_DONE, true),
            TreeNode::condition("strategy_slot.paused", DISAGREE_ACTIVE, true),
            compiled.root,
            TreeNode::sequence("strategy_slot.exhausted", spent),
        ],
    ))
}

fn offer(id: &str, prompt: &str) -> TreeNode {
    let accept = Outcome::success().with(FlagWrite::set(ACCEPTED, true));
    TreeNode::question(
        id,
        prompt,
        AnswerSchema {
            choices: vec![
                Choice { label: "Yes".into(), outcome: accept },
                Choice { label: "Not now".into(), outcome: Outcome::failure() },
            ],
            reactions: Reaction::ALL.iter().map(|r| (*r, Outcome::failure())).collect(),
            ..AnswerSchema::default()
        },
    )
}

fn evaluation_slot(eval: &EvaluationStrategy) -> Tree {
    let offers = TreeNode::priority(
        "evaluation.offer",
        vec![
            TreeNode::sequence(
                "evaluation.offer.after_satisfied",
                vec![
                    TreeNode::condition("evaluation.offer.satisfied", SATISFIED, true),
                    offer("evaluation.ready", "would you like to take the questionnaire now?"),
                ],
            ),
            offer(
                "evaluation.more",
                "Anything else I can help with you today? Or would you like to take a few questions \
                 to evaluate your experience?",
            ),
        ],
    );
    Tree::new(TreeNode::priority(
        nodes::EVAL_SLOT,
        vec![
            TreeNode::condition("eval_slot.gate", EVAL_DONE, true),
            TreeNode::sequence(
                "eval_slot.run",
                vec![memo(ACCEPTED, offers), build_evaluation_subtree(eval).root],
            ),
        ],
    ))
}

fn number_word(n: usize) -> String {
    const WORDS: [&str; 10] = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];
    match n {
        1..=10 => WORDS[n - 1].to_owned(),
        _ => n.to_string(),
    }
}

/// One question node per questionnaire item, each asked once, followed by
/// a closing message that marks the evaluation done.
pub fn build_evaluation_subtree(eval: &EvaluationStrategy) -> Tree {
    let items = &eval.questionnaire;
    let shared_scale = items.windows(2).all(|w| w[0].scale == w[1].scale);
    let intro = match items.first() {
        Some(first) if shared_scale => format!(
            "I have {} statements, for each one please answer with a response from the following. {}",
            number_word(items.len()),
            first.scale.iter().rev().cloned().collect::<Vec<_>>().join(", ")
        ),
        _ => format!(
            "I have {} statements, for each one please answer with one of the responses offered.",
            number_word(items.len())
        ),
    };

    let mut steps = vec![memo(
        "evaluation.intro_shown",
        TreeNode::information("evaluation.intro", intro)
            .writing([FlagWrite::set("evaluation.intro_shown", true)]),
    )];
    for (i, item) in items.iter().enumerate() {
        let answered = format!("answered.{}", item.question_id);
        let outcome = Outcome::success().with(FlagWrite::set(answered.as_str(), true));
        let mut node = TreeNode::question(
            format!("evaluation.q.{}", item.question_id),
            format!("Statement {}: {}", i + 1, item.text),
            AnswerSchema {
                choices: item
                    .scale
                    .iter()
                    .map(|label| Choice { label: label.clone(), outcome: outcome.clone() })
                    .collect(),
                record_index: Some(format!("answer.{}", item.question_id)),
                ..AnswerSchema::default()
            },
        );
        if let NodeKind::QuestionAnswer(q) = &mut node.kind {
            q.question_id = Some(item.question_id.clone());
        }
        steps.push(memo(&answered, node));
    }
    steps.push(
        TreeNode::information("evaluation.thanks", "Thank you for your feedback. Have a nice day!")
            .writing([FlagWrite::set(EVAL_DONE, true)]),
    );
    Tree::new(TreeNode::sequence("evaluation.questionnaire", steps))
}

/// Blackboard entries the prompts' `{key}` templates draw on.
pub fn context_entries(spec: &XaiSpec) -> BTreeMap<String, Value> {
    let mut out = BTreeMap::from([
        ("system.name".to_owned(), Value::from(spec.system.name.as_str())),
        ("system.domain".to_owned(), Value::from(spec.system.domain.as_str())),
        ("system.accuracy_pct".to_owned(), Value::from(spec.system.assessment.percent() as usize)),
        ("persona.name".to_owned(), Value::from(spec.persona.name.as_str())),
    ]);
    if let Some(t) = &spec.instance {
        out.insert(crate::bt::TARGET_KEY.to_owned(), Value::from(t.id.as_str()));
        out.insert("target.label".to_owned(), Value::from(t.label.as_str()));
        out.insert("target.outcome".to_owned(), Value::from(t.outcome.as_str()));
        if let Some(a) = &t.attachment {
            out.insert("target.attachment".to_owned(), Value::from(a.as_str()));
        }
    }
    out
}
