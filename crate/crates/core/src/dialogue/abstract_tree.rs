use std::collections::{BTreeMap, BTreeSet};

use super::flags::*;
use super::nodes;
use crate::bt::{
    read_keys, written_keys, AnswerSchema, Choice, FlagWrite, NodeKind, Outcome, Reaction, Tree, TreeNode,
    Value,
};

/// The conversation tree plus the flags that steer it.
#[derive(Debug, Clone, PartialEq)]
pub struct EeTree {
    pub tree: Tree,
    pub flag_registry: BTreeSet<String>,
}

impl EeTree {
    /// Registry flags lacking a writer or a reader in the tree.
    pub fn unclosed_flags(&self) -> Vec<String> {
        let written = written_keys(&self.tree);
        let read = read_keys(&self.tree);
        self.flag_registry.iter().filter(|f| !written.contains(*f) || !read.contains(*f)).cloned().collect()
    }
}

fn set(key: &str, to: impl Into<Value>) -> FlagWrite {
    FlagWrite::set(key, to)
}

/// `Priority[Condition(flag), work]`: once `work` has written `flag`, only
/// the condition is evaluated.
pub(crate) fn memo(flag: &str, work: TreeNode) -> TreeNode {
    let id = work.id.clone();
    TreeNode::priority(
        format!("{id}.memo"),
        vec![TreeNode::condition(format!("{id}.done"), flag, true), work],
    )
}

/// Skip-gate for a stage: its flag short-circuits the whole stage.
fn stage(id: &str, done_flag: &str, expected: bool, steps: Vec<TreeNode>) -> TreeNode {
    TreeNode::priority(
        id,
        vec![
            TreeNode::condition(format!("{id}.gate"), done_flag, expected),
            TreeNode::sequence(format!("{id}.run"), steps),
        ],
    )
}

pub(crate) fn yes_no(yes: Outcome, no: Outcome) -> AnswerSchema {
    AnswerSchema {
        choices: vec![
            Choice { label: "Yes".into(), outcome: yes },
            Choice { label: "No".into(), outcome: no },
        ],
        ..AnswerSchema::default()
    }
}

pub(crate) fn knowledge_schema(record: &str, flag: &str) -> AnswerSchema {
    let answered = Outcome::success().with(set(flag, true));
    AnswerSchema {
        choices: crate::spec::KnowledgeLevel::ALL
            .iter()
            .map(|l| Choice { label: l.label().to_owned(), outcome: answered.clone() })
            .collect(),
        free_text: Some(answered),
        record: Some(record.into()),
        ..AnswerSchema::default()
    }
}

fn question_with(
    id: &str,
    prompt: &str,
    answer: AnswerSchema,
    attachments: Vec<String>,
    feedback: Option<&str>,
) -> TreeNode {
    let mut node = TreeNode::question(id, prompt, answer);
    if let NodeKind::QuestionAnswer(q) = &mut node.kind {
        q.attachments = attachments;
        q.feedback = feedback.map(str::to_owned);
    }
    node
}

/// Builds the six-stage conversation with its two slots unfilled.
///
/// Prompts use `{key}` templates filled from blackboard context seeded by
/// the session (`system.name`, `system.domain`, `system.accuracy_pct`,
/// `target.label`, `target.outcome`, `target.attachment`).
pub fn build_abstract_tree() -> EeTree {
    let greet = stage(
        "greet",
        GREET_DONE,
        true,
        vec![TreeNode::question(
            "greet.consent",
            "Hello! I am the EE chatbot for the {system.name}. First I need to ask few questions to \
             establish your persona. Would you like to proceed?",
            yes_no(Outcome::success().with(set(GREET_DONE, true)), Outcome::failure()),
        )],
    );

    let persona = stage(
        "persona",
        PERSONA_DONE,
        true,
        vec![
            memo(
                "persona.ai_asked",
                TreeNode::question(
                    "persona.ai",
                    "What is your level of knowledge on AI?",
                    knowledge_schema("persona.ai_knowledge", "persona.ai_asked"),
                ),
            ),
            memo(
                "persona.domain_asked",
                TreeNode::question(
                    "persona.domain",
                    "What is your level of knowledge in the domain of {system.domain}?",
                    knowledge_schema("persona.domain_knowledge", "persona.domain_asked"),
                ),
            ),
            TreeNode::information("persona.thanks", "Thank you for answering the questions.")
                .writing([set(PERSONA_DONE, true)]),
        ],
    );

    let select = TreeNode::question(
        nodes::SELECT_NEED,
        "Next I want to understand what kind of explanation you want. Please select a question \
         below if it is similar to what you would like to know, or tell me what you would like to know.",
        AnswerSchema {
            // an unrecognised question leaves no intent selected
            free_text: Some(Outcome::failure().with(set(INTENT, ""))),
            record: Some("need.question".into()),
            ..AnswerSchema::default()
        },
    );
    let confirm = question_with(
        nodes::CONFIRM_TARGET,
        "Thanks. Can you confirm this is the {target.label} for which you need an explanation? \
         and the outcome you received is {target.outcome}?",
        yes_no(Outcome::success().with(set(TARGET_CONFIRMED, true)), Outcome::failure()),
        vec!["{target.attachment}".into()],
        None,
    );
    let explanation_need = stage(
        "explanation_need",
        NEED_DONE,
        true,
        vec![
            memo("need.selected", select),
            TreeNode::priority(
                "need.target",
                vec![TreeNode::condition("need.target.done", TARGET_CONFIRMED, true), confirm],
            ),
            TreeNode::information("need.ack", "Thanks, Let me find an explanation for you.").writing([
                set(NEED_DONE, true),
                set(STRATEGY_DONE, false),
                set(SATISFIED, false),
                set(MORE_REQUESTED, false),
                set(TARGET_CONFIRMED, false),
                set("need.selected", false),
                FlagWrite::clear_prefix("exec."),
            ]),
        ],
    );

    let strategy_slot = TreeNode::placeholder(
        nodes::STRATEGY_SLOT,
        vec![INTENT.into(), STRATEGY_DONE.into(), DISAGREE_ACTIVE.into(), MORE_REQUESTED.into()],
        vec![MORE_REQUESTED.into()],
    );

    let resolved = |extra: Vec<FlagWrite>| {
        Outcome::success()
            .with(set(DISAGREE_ACTIVE, false))
            .with(set("disagreement.details_given", false))
            .with_all(extra)
    };
    let settled = resolved(vec![set(STRATEGY_DONE, true)]);
    let clarify = TreeNode::question(
        "disagreement.clarify",
        "Thank you for that information. At the moment the system is correct {system.accuracy_pct}% \
         of the time. We will use your feedback to improve the system.",
        AnswerSchema {
            free_text: Some(settled.clone()),
            reactions: BTreeMap::from([
                (Reaction::Satisfied, settled.clone()),
                (Reaction::Disagree, settled.clone()),
                (Reaction::MoreOfSame, settled),
                (
                    Reaction::NewQuestion,
                    Outcome::failure()
                        .with(set(DISAGREE_ACTIVE, false))
                        .with(set("disagreement.details_given", false)),
                ),
            ]),
            ..AnswerSchema::default()
        },
    );
    let details = question_with(
        "disagreement.details",
        "I see... can you tell me a bit more about why you think so?",
        AnswerSchema {
            free_text: Some(Outcome::success().with(set("disagreement.details_given", true))),
            record: Some("disagreement.details".into()),
            ..AnswerSchema::default()
        },
        Vec::new(),
        Some("disagreement"),
    );
    let disagreement = stage(
        "disagreement",
        DISAGREE_ACTIVE,
        false,
        vec![memo("disagreement.details_given", details), clarify],
    );

    let eval_slot = TreeNode::placeholder(
        nodes::EVAL_SLOT,
        vec![SATISFIED.into(), EVAL_DONE.into()],
        vec![EVAL_DONE.into()],
    );

    let root = TreeNode::sequence(
        nodes::ROOT,
        vec![greet, persona, explanation_need, strategy_slot, disagreement, eval_slot],
    );
    EeTree { tree: Tree::new(root), flag_registry: ALL.iter().map(|s| (*s).to_owned()).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bt::{validate_tree, Violation};
    use crate::registry::Registry;

    #[test]
    fn stage_order() {
        let ee = build_abstract_tree();
        let ids: Vec<&str> = ee.tree.root.children.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(
            ids,
            ["greet", "persona", "explanation_need", "strategy_slot", "disagreement", "eval_slot"]
        );
    }

    #[test]
    fn only_the_slots_are_unfinished() {
        let ee = build_abstract_tree();
        assert_eq!(
            validate_tree(&ee.tree, &Registry::new()),
            [
                Violation::UnfilledPlaceholder("strategy_slot".into()),
                Violation::UnfilledPlaceholder("eval_slot".into()),
            ]
        );
    }

    #[test]
    fn flags_are_closed() {
        assert!(build_abstract_tree().unclosed_flags().is_empty());
    }
}
