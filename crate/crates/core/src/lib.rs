//! Behaviour-tree dialogue engine for conversational explanation experiences.
//!
//! * [`bt`]: the tree model and its reactive interpreter.
//! * [`spec`]: explanation-experience specification files.
//! * [`registry`]: explainer adapters and deterministic mocks.
//! * [`dialogue`]: the abstract conversation tree and its personalisation.
//! * [`session`]: conversations, transcripts and evaluation verdicts.
//! * [`script`]: scripted conversations for offline simulation.
//! * [`server`]: the HTTP and NDJSON front end.

pub mod bt;
pub mod dialogue;
pub mod registry;
pub mod script;
pub mod server;
pub mod session;
pub mod spec;
pub mod text;
