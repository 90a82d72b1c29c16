//! Reactive, resumable behaviour-tree interpreter.
//!
//! A [`Tree`] is ticked from its root on every turn. `Sequence` runs children
//! left to right until one does not succeed, `Priority` until one does not
//! fail. Action leaves emit [`Effect`]s; question-answer and explainer leaves
//! suspend with [`NodeStatus::Waiting`] until a [`UserEvent`] arrives.
//! Completed work is skipped by placing a `Condition` as the left-most child
//! of a `Priority`, so only that condition is evaluated on later ticks.

mod blackboard;
mod engine;
mod node;
mod splice;
mod trace;
mod validate;

pub use blackboard::{get_flag, set_flag, Blackboard, Value};
pub use engine::{
    calls_key, executed_key, Delivery, Effect, Engine, TickError, TickResult, UserEvent, TARGET_KEY,
};
pub use node::{
    AnswerSchema, Choice, ConditionPayload, ExplainerPayload, FlagWrite, InformationPayload, NodeKind,
    NodeStatus, Outcome, PreOrder, QuestionPayload, Reaction, SlotPayload, Tree, TreeNode, Verdict,
};
pub use splice::{splice_subtree, SpliceError};
pub use trace::{read_trace, records_for, write_trace, TraceRecord};
pub use validate::{read_keys, validate_tree, validate_tree_with, written_keys, Violation};
