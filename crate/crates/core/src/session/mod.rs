//! Running conversations: one [`Conversation`] per user episode, the
//! [`SessionService`] that hosts many of them, their transcripts, and the
//! questionnaire verdicts aggregated across sessions.

mod conversation;
mod service;
mod transcript;
mod verdict;

pub use conversation::{Blueprint, Conversation, ConversationError, Interpretation, Turn};
pub use service::{
    load_spec_dir, replay, Clock, ManualClock, Reply, ServiceConfig, ServiceError, SessionService,
    SessionSummary, SystemClock,
};
pub use transcript::{Entry, IndexRecord, Row, SessionStatus, Transcript, TranscriptStore};
pub use verdict::{aggregate, QuestionResult, ResponseSet, StrategyVerdict, VerdictError, VerdictResult};
