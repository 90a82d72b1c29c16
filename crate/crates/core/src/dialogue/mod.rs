//! The explanation-experience conversation: an abstract six-stage tree,
//! its personalization from a spec, cross-stage navigation rules, and the
//! text interpretation that turns user replies into events.

mod abstract_tree;
mod feedback;
mod matching;
mod nav;
mod personalize;

use serde::{Deserialize, Serialize};

use crate::bt::Tree;

pub use abstract_tree::{build_abstract_tree, EeTree};
pub use feedback::{FeedbackLog, UnmetNeedRecord};
pub use matching::{match_question, MatchError, MatchResult, PhraseTable};
pub use nav::{apply_nav_rules, nav_rules, NavError, NavRule};
pub use personalize::{build_evaluation_subtree, context_entries, personalize, PersonalizeError};

/// Blackboard flags steering the stages.
pub mod flags {
    pub const GREET_DONE: &str = "greet_done";
    pub const PERSONA_DONE: &str = "persona_done";
    pub const NEED_DONE: &str = "need_done";
    pub const STRATEGY_DONE: &str = "strategy_done";
    pub const DISAGREE_ACTIVE: &str = "disagree_active";
    pub const EVAL_DONE: &str = "eval_done";
    pub const INTENT: &str = crate::spec::INTENT_KEY;
    pub const TARGET_CONFIRMED: &str = "target_confirmed";
    pub const SATISFIED: &str = "satisfied";
    pub const MORE_REQUESTED: &str = crate::spec::MORE_REQUESTED_KEY;

    pub const ALL: [&str; 9] = [
        GREET_DONE,
        PERSONA_DONE,
        NEED_DONE,
        STRATEGY_DONE,
        DISAGREE_ACTIVE,
        EVAL_DONE,
        INTENT,
        TARGET_CONFIRMED,
        SATISFIED,
    ];
}

/// Ids of nodes the session treats specially.
pub mod nodes {
    pub const ROOT: &str = "ee";
    pub const STRATEGY_SLOT: &str = "strategy_slot";
    pub const EVAL_SLOT: &str = "eval_slot";
    /// The explanation-need question listing the spec's questions.
    pub const SELECT_NEED: &str = "need.select";
    pub const CONFIRM_TARGET: &str = "need.confirm";
}

/// One of the six top-level sub-trees, in root order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Greet,
    Persona,
    ExplanationNeed,
    ExplanationStrategy,
    Disagreement,
    Evaluation,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Greet,
        Stage::Persona,
        Stage::ExplanationNeed,
        Stage::ExplanationStrategy,
        Stage::Disagreement,
        Stage::Evaluation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Greet => "greet",
            Stage::Persona => "persona",
            Stage::ExplanationNeed => "explanation_need",
            Stage::ExplanationStrategy => "explanation_strategy",
            Stage::Disagreement => "disagreement",
            Stage::Evaluation => "evaluation",
        }
    }

    /// Id of the stage's sub-tree root under the tree root.
    pub fn root_id(self) -> &'static str {
        match self {
            Stage::ExplanationStrategy => nodes::STRATEGY_SLOT,
            Stage::Evaluation => nodes::EVAL_SLOT,
            other => other.name(),
        }
    }

    pub fn from_root_id(id: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.root_id() == id)
    }

    /// The stage containing `node_id`, if any.
    pub fn of_node(tree: &Tree, node_id: &str) -> Option<Stage> {
        let path = tree.path_to(node_id)?;
        path.get(1).and_then(|id| Stage::from_root_id(id))
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
