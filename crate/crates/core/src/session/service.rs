use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::conversation::{Blueprint, Conversation, ConversationError, Turn};
use super::transcript::{IndexRecord, SessionStatus, Transcript, TranscriptStore};
use super::verdict::{aggregate, StrategyVerdict, VerdictError};
use crate::bt::{TickError, UserEvent};
use crate::dialogue::{FeedbackLog, PersonalizeError, PhraseTable, Stage, UnmetNeedRecord};
use crate::registry::Registry;
use crate::spec::{load_spec, SpecError, XaiSpec, SPEC_EXTENSION};

/// Seconds since the Unix epoch.
pub trait Clock: Send + Sync {
    fn now(&self) -> u64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
    }
}

/// A clock that only moves when told to.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start: u64) -> Self {
        ManualClock(AtomicU64::new(start))
    }

    pub fn advance(&self, secs: u64) {
        self.0.fetch_add(secs, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ServiceError {
    #[error("unknown spec `{0}`")]
    UnknownSpec(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("session `{session_id}` is {}", .status.as_str())]
    SessionClosed { session_id: String, status: SessionStatus },
    #[error("session `{0}` is not waiting for input")]
    SessionNotWaiting(String),
    #[error("choice {index} is out of range ({available} available)")]
    ChoiceOutOfRange { index: usize, available: usize },
    #[error("engine error: {0}")]
    Engine(String),
    #[error("spec `{spec_id}` cannot run: {source}")]
    Personalize { spec_id: String, source: PersonalizeError },
    #[error("duplicate spec id `{0}`")]
    DuplicateSpec(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Verdict(#[from] VerdictError),
    #[error("i/o: {0}")]
    Io(String),
}

impl ServiceError {
    /// Stable snake_case code used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSpec(_) => "unknown_spec",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::SessionClosed { .. } => "session_closed",
            ServiceError::SessionNotWaiting(_) => "session_not_waiting",
            ServiceError::ChoiceOutOfRange { .. } => "choice_out_of_range",
            ServiceError::Engine(_) => "engine",
            ServiceError::Personalize { .. } => "invalid_spec",
            ServiceError::DuplicateSpec(_) => "duplicate_spec",
            ServiceError::Spec(_) => "invalid_spec",
            ServiceError::Verdict(VerdictError::NoEvaluations(_)) => "no_evaluations",
            ServiceError::Io(_) => "io",
        }
    }
}

fn io_err(e: std::io::Error) -> ServiceError {
    ServiceError::Io(e.to_string())
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Where transcripts and unmet-need records are written; `None` keeps
    /// everything in memory.
    pub data_dir: Option<PathBuf>,
    pub idle_timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { data_dir: None, idle_timeout: Duration::from_secs(30 * 60) }
    }
}

/// Returned by session creation and event delivery.
#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub session_id: String,
    pub turn: Turn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub spec_id: String,
    pub status: SessionStatus,
    pub created_at: u64,
    pub entries: usize,
}

struct Slot {
    conversation: Conversation,
    created_at: u64,
    last_active: u64,
}

/// Runs many conversations at once. Each session is guarded by its own
/// lock, so events for one session are handled strictly in order while
/// different sessions proceed in parallel.
pub struct SessionService {
    blueprints: BTreeMap<String, Arc<Blueprint>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
    next_id: AtomicU64,
    clock: Arc<dyn Clock>,
    store: Option<TranscriptStore>,
    feedback: Option<FeedbackLog>,
    idle_timeout: Duration,
}

impl std::fmt::Debug for SessionService {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SessionService")
            .field("specs", &self.blueprints.keys().collect::<Vec<_>>())
            .field("sessions", &self.sessions.read().len())
            .finish()
    }
}

impl SessionService {
    pub fn new(
        specs: Vec<XaiSpec>,
        registry: Arc<Registry>,
        phrases: Arc<PhraseTable>,
        config: ServiceConfig,
    ) -> Result<Self, ServiceError> {
        Self::with_clock(specs, registry, phrases, config, Arc::new(SystemClock))
    }

    pub fn with_clock(
        specs: Vec<XaiSpec>,
        registry: Arc<Registry>,
        phrases: Arc<PhraseTable>,
        config: ServiceConfig,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, ServiceError> {
        let mut blueprints = BTreeMap::new();
        for spec in specs {
            let spec_id = spec.spec_id.clone();
            if blueprints.contains_key(&spec_id) {
                return Err(ServiceError::DuplicateSpec(spec_id));
            }
            let bp = Blueprint::new(spec, registry.clone(), phrases.clone())
                .map_err(|source| ServiceError::Personalize { spec_id: spec_id.clone(), source })?;
            blueprints.insert(spec_id, Arc::new(bp));
        }
        Ok(SessionService {
            blueprints,
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            clock,
            store: config.data_dir.as_ref().map(|d| TranscriptStore::new(d.join("transcripts"))),
            feedback: config.data_dir.as_ref().map(|d| FeedbackLog::new(d.join("feedback"))),
            idle_timeout: config.idle_timeout,
        })
    }

    pub fn spec_ids(&self) -> impl Iterator<Item = &str> {
        self.blueprints.keys().map(String::as_str)
    }

    pub fn blueprint(&self, spec_id: &str) -> Option<&Arc<Blueprint>> {
        self.blueprints.get(spec_id)
    }

    pub fn store(&self) -> Option<&TranscriptStore> {
        self.store.as_ref()
    }

    pub fn feedback(&self) -> Option<&FeedbackLog> {
        self.feedback.as_ref()
    }

    pub fn create_session(&self, spec_id: &str) -> Result<Reply, ServiceError> {
        let bp = self
            .blueprints
            .get(spec_id)
            .ok_or_else(|| ServiceError::UnknownSpec(spec_id.to_owned()))?
            .clone();
        let session_id = format!("s{:06}", self.next_id.fetch_add(1, Ordering::SeqCst));
        let (conversation, turn) =
            Conversation::start(bp, session_id.clone()).map_err(|e| map_conv(&session_id, e))?;
        let now = self.clock.now();
        if let Some(store) = &self.store {
            store
                .register(&IndexRecord {
                    session_id: session_id.clone(),
                    spec_id: spec_id.to_owned(),
                    created_at: now,
                })
                .map_err(io_err)?;
            store.save(conversation.transcript()).map_err(io_err)?;
        }
        let slot = Slot { conversation, created_at: now, last_active: now };
        self.sessions.write().insert(session_id.clone(), Arc::new(Mutex::new(slot)));
        tracing::debug!(%session_id, spec_id, "session created");
        Ok(Reply { session_id, turn })
    }

    fn slot(&self, session_id: &str) -> Result<Arc<Mutex<Slot>>, ServiceError> {
        self.sessions
            .read()
            .get(session_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(session_id.to_owned()))
    }

    pub fn post_user_message(&self, session_id: &str, event: UserEvent) -> Result<Reply, ServiceError> {
        let slot = self.slot(session_id)?;
        let mut slot = slot.lock();
        let turn = slot.conversation.post(event).map_err(|e| map_conv(session_id, e))?;
        slot.last_active = self.clock.now();
        if let (Some(question), Some(log)) = (&turn.unmet_question, &self.feedback) {
            let record = UnmetNeedRecord {
                session_id: session_id.to_owned(),
                question: question.clone(),
                timestamp: slot.last_active,
            };
            log.append(slot.conversation.blueprint().spec_id(), &record).map_err(io_err)?;
        }
        if let Some(store) = &self.store {
            store.save(slot.conversation.transcript()).map_err(io_err)?;
        }
        Ok(Reply { session_id: session_id.to_owned(), turn })
    }

    pub fn get_transcript(&self, session_id: &str) -> Result<Transcript, ServiceError> {
        Ok(self.slot(session_id)?.lock().conversation.transcript().clone())
    }

    pub fn status(&self, session_id: &str) -> Result<SessionStatus, ServiceError> {
        Ok(self.slot(session_id)?.lock().conversation.status())
    }

    /// Sessions of `spec_id`, ordered by session id.
    pub fn list_sessions(&self, spec_id: &str) -> Vec<SessionSummary> {
        let slots: Vec<_> = self.sessions.read().values().cloned().collect();
        let mut out: Vec<SessionSummary> = slots
            .iter()
            .filter_map(|s| {
                let s = s.lock();
                let t = s.conversation.transcript();
                (t.spec_id == spec_id).then(|| SessionSummary {
                    session_id: t.session_id.clone(),
                    spec_id: t.spec_id.clone(),
                    status: s.conversation.status(),
                    created_at: s.created_at,
                    entries: t.entries.len(),
                })
            })
            .collect();
        out.sort_by(|a, b| a.session_id.cmp(&b.session_id));
        out
    }

    /// Closes sessions idle for longer than the configured limit. A session
    /// that was offered the questionnaire is recorded as unevaluated, any
    /// other as aborted. Returns the ids closed.
    pub fn expire_idle(&self) -> Vec<String> {
        let now = self.clock.now();
        let limit = self.idle_timeout.as_secs();
        let slots: Vec<_> = self.sessions.read().iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let mut closed = Vec::new();
        for (id, slot) in slots {
            let mut slot = slot.lock();
            if !slot.conversation.status().is_open() || now.saturating_sub(slot.last_active) <= limit {
                continue;
            }
            let status = if slot.conversation.reached(Stage::Evaluation) {
                SessionStatus::Unevaluated
            } else {
                SessionStatus::Aborted
            };
            slot.conversation.close(status);
            if let Some(store) = &self.store {
                if let Err(e) = store.save(slot.conversation.transcript()) {
                    tracing::warn!(session_id = %id, error = %e, "could not save expired transcript");
                }
            }
            closed.push(id);
        }
        closed.sort();
        closed
    }

    /// Questionnaire responses of every session of `spec_id`, including
    /// stored ones from earlier runs.
    pub fn responses(&self, spec_id: &str) -> Result<Vec<BTreeMap<String, usize>>, ServiceError> {
        let mut by_session: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        if let Some(store) = &self.store {
            for t in store.load_spec(spec_id).map_err(io_err)? {
                by_session.insert(t.session_id, t.responses);
            }
        }
        let slots: Vec<_> = self.sessions.read().values().cloned().collect();
        for slot in slots {
            let slot = slot.lock();
            let t = slot.conversation.transcript();
            if t.spec_id == spec_id {
                by_session.insert(t.session_id.clone(), t.responses.clone());
            }
        }
        Ok(by_session.into_values().collect())
    }

    pub fn aggregate_evaluations(&self, spec_id: &str) -> Result<StrategyVerdict, ServiceError> {
        let bp = self.blueprints.get(spec_id).ok_or_else(|| ServiceError::UnknownSpec(spec_id.to_owned()))?;
        let responses = self.responses(spec_id)?;
        Ok(aggregate(spec_id, &bp.spec.evaluation, &responses)?)
    }
}

fn map_conv(session_id: &str, e: ConversationError) -> ServiceError {
    match e {
        ConversationError::Closed(status) => {
            ServiceError::SessionClosed { session_id: session_id.to_owned(), status }
        }
        ConversationError::NotWaiting => ServiceError::SessionNotWaiting(session_id.to_owned()),
        ConversationError::Tick(TickError::ChoiceOutOfRange { index, available }) => {
            ServiceError::ChoiceOutOfRange { index, available }
        }
        ConversationError::Tick(other) => ServiceError::Engine(other.to_string()),
    }
}

/// Every `*.xaispec.json` file in `dir`, sorted by file name.
pub fn load_spec_dir(dir: &Path) -> Result<Vec<XaiSpec>, ServiceError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_str().is_some_and(|s| s.ends_with(SPEC_EXTENSION)))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_spec(p).map_err(ServiceError::from)).collect()
}

/// Re-runs the user side of `transcript` in a fresh conversation.
pub fn replay(blueprint: Arc<Blueprint>, transcript: &Transcript) -> Result<Transcript, ConversationError> {
    let (mut conv, _) = Conversation::start(blueprint, transcript.session_id.clone())?;
    for event in transcript.user_events() {
        conv.post(event.clone())?;
    }
    Ok(conv.transcript().clone())
}
