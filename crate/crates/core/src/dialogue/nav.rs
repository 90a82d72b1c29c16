use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::flags::*;
use super::Stage;
use crate::bt::{FlagWrite, Reaction};

/// A cross-stage jump expressed purely as flag changes: clearing a stage's
/// done flag makes the root sequence stall there on the next tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavRule {
    pub from: Stage,
    pub to: Stage,
    pub trigger: Reaction,
    pub action: Vec<FlagWrite>,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum NavError {
    #[error("no navigation rules are defined for the {0} stage")]
    UnknownContext(Stage),
}

fn rule(from: Stage, trigger: Reaction, to: Stage, action: Vec<FlagWrite>) -> NavRule {
    NavRule { from, to, trigger, action }
}

pub fn nav_rules() -> Vec<NavRule> {
    use Reaction::*;
    use Stage::*;
    let set = FlagWrite::set;
    vec![
        rule(ExplanationStrategy, NewQuestion, ExplanationNeed, vec![set(NEED_DONE, false)]),
        rule(Disagreement, NewQuestion, ExplanationNeed, vec![set(NEED_DONE, false)]),
        rule(
            ExplanationStrategy,
            Satisfied,
            Evaluation,
            vec![set(SATISFIED, true), set(STRATEGY_DONE, true)],
        ),
        rule(ExplanationStrategy, Disagree, Disagreement, vec![set(DISAGREE_ACTIVE, true)]),
        // Asking for more at the evaluation offer re-runs the strategy for
        // the current intent.
        rule(
            Evaluation,
            MoreOfSame,
            ExplanationStrategy,
            vec![
                set(STRATEGY_DONE, false),
                set(SATISFIED, false),
                set(MORE_REQUESTED, false),
                FlagWrite::clear_prefix("exec."),
            ],
        ),
        rule(
            Evaluation,
            NewQuestion,
            ExplanationNeed,
            vec![set(NEED_DONE, false), set(STRATEGY_DONE, false), set(SATISFIED, false)],
        ),
    ]
}

/// Flag mutations for a classified reaction given while `stage` holds the
/// waiting node. Reactions without a rule yield no mutations.
pub fn apply_nav_rules(stage: Stage, reaction: Reaction) -> Result<Vec<FlagWrite>, NavError> {
    match stage {
        Stage::ExplanationStrategy | Stage::Disagreement | Stage::Evaluation => Ok(nav_rules()
            .into_iter()
            .find(|r| r.from == stage && r.trigger == reaction)
            .map(|r| r.action)
            .unwrap_or_default()),
        other => Err(NavError::UnknownContext(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn described_rules() {
        assert_eq!(
            apply_nav_rules(Stage::ExplanationStrategy, Reaction::Satisfied).unwrap(),
            [FlagWrite::set(SATISFIED, true), FlagWrite::set(STRATEGY_DONE, true)]
        );
        assert_eq!(
            apply_nav_rules(Stage::Disagreement, Reaction::NewQuestion).unwrap(),
            [FlagWrite::set(NEED_DONE, false)]
        );
        assert_eq!(
            apply_nav_rules(Stage::ExplanationStrategy, Reaction::Disagree).unwrap(),
            [FlagWrite::set(DISAGREE_ACTIVE, true)]
        );
        assert!(apply_nav_rules(Stage::ExplanationStrategy, Reaction::MoreOfSame).unwrap().is_empty());
        assert_eq!(
            apply_nav_rules(Stage::Greet, Reaction::Satisfied),
            Err(NavError::UnknownContext(Stage::Greet))
        );
    }

    #[test]
    fn rules_are_unique_per_context() {
        let rules = nav_rules();
        for (i, a) in rules.iter().enumerate() {
            for b in &rules[i + 1..] {
                assert!(!(a.from == b.from && a.trigger == b.trigger));
            }
        }
    }
}
