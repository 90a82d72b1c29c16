#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use ee_dialogue::bt::UserEvent;
use ee_dialogue::dialogue::PhraseTable;
use ee_dialogue::registry::Registry;
use ee_dialogue::script::ScriptFile;
use ee_dialogue::session::{Blueprint, ResponseSet, ServiceConfig, SessionService, Transcript};
use ee_dialogue::spec::{load_spec, XaiSpec};

/// The core crate's fixture directory, also when these helpers are
/// compiled into another crate's tests.
pub fn fixtures() -> PathBuf {
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let own = here.join("fixtures");
    if own.is_dir() {
        own
    } else {
        here.join("../core/fixtures")
    }
}

pub fn spec(name: &str) -> XaiSpec {
    load_spec(&fixtures().join("specs").join(format!("{name}.xaispec.json"))).unwrap()
}

pub fn blueprint(name: &str) -> Arc<Blueprint> {
    Arc::new(
        Blueprint::new(spec(name), Arc::new(Registry::with_mocks()), Arc::new(PhraseTable::embedded()))
            .unwrap(),
    )
}

pub const CLINICIAN: [&str; 15] = [
    "Yes of course!",
    "I have no understanding of AI technology.",
    "I have been a practising clinician for 12 years. So I would say I am very knowledgeable",
    "Question 2 sounds like what I need to know about this specific Radiograph.",
    "yes this is correct!",
    "Okay. I see why the system thinks this is a fracture. What else can you tell me about this Radiograph?",
    "I'm not sure I agree",
    "well if you look closely, there is also a hairline fracture at the bottom left corner the system missed",
    "Okay!",
    "Can I see two more similar Radiographs?",
    "Okay. Thanks!",
    "Sure",
    "Agree",
    "Neutral",
    "Neutral",
];

/// Events of a script fixture, without expectations.
pub fn script_events(name: &str) -> Vec<UserEvent> {
    let path = fixtures().join("scripts").join(format!("{name}.script.json"));
    let script = ScriptFile::parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    script.events.into_iter().map(|s| s.event.into()).collect()
}

/// Three scripted sessions used by the isolation checks.
pub fn isolation_workload() -> Vec<(&'static str, Vec<UserEvent>)> {
    vec![
        ("radiograph", CLINICIAN.iter().map(|t| UserEvent::text(*t)).collect()),
        ("radiograph", script_events("disagreement_detour")),
        ("loan", CLINICIAN.iter().map(|t| UserEvent::text(*t)).collect()),
    ]
}

pub fn isolation_service() -> SessionService {
    let specs = ["radiograph", "loan"].map(spec).to_vec();
    SessionService::new(
        specs,
        Arc::new(Registry::with_mocks()),
        Arc::new(PhraseTable::embedded()),
        ServiceConfig::default(),
    )
    .unwrap()
}

fn outcome(svc: &SessionService, id: &str, event: UserEvent) -> String {
    match svc.post_user_message(id, event) {
        Ok(reply) => format!("{:?} {:?}", reply.turn.status, reply.turn.waiting_node),
        Err(e) => e.code().to_owned(),
    }
}

/// Runs each session to the end before starting the next.
pub fn run_serial(work: &[(&str, Vec<UserEvent>)]) -> Vec<(Transcript, Vec<String>)> {
    let svc = isolation_service();
    work.iter()
        .map(|(spec_id, events)| {
            let id = svc.create_session(spec_id).unwrap().session_id;
            let outcomes = events.iter().map(|e| outcome(&svc, &id, e.clone())).collect();
            (svc.get_transcript(&id).unwrap(), outcomes)
        })
        .collect()
}

/// Creates every session up front, then posts events in an order drawn
/// from `seed`.
pub fn run_interleaved(work: &[(&str, Vec<UserEvent>)], seed: u64) -> Vec<(Transcript, Vec<String>)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let svc = isolation_service();
    let ids: Vec<String> = work.iter().map(|(s, _)| svc.create_session(s).unwrap().session_id).collect();
    let mut next = vec![0; work.len()];
    let mut outcomes = vec![Vec::new(); work.len()];
    loop {
        let open: Vec<usize> = (0..work.len()).filter(|i| next[*i] < work[*i].1.len()).collect();
        if open.is_empty() {
            break;
        }
        let i = open[rng.random_range(0..open.len())];
        outcomes[i].push(outcome(&svc, &ids[i], work[i].1[next[i]].clone()));
        next[i] += 1;
    }
    ids.iter().zip(outcomes).map(|(id, o)| (svc.get_transcript(id).unwrap(), o)).collect()
}

/// Posts each session's events from its own thread.
pub fn run_threaded(work: &[(&str, Vec<UserEvent>)]) -> Vec<(Transcript, Vec<String>)> {
    let svc = isolation_service();
    let ids: Vec<String> = work.iter().map(|(s, _)| svc.create_session(s).unwrap().session_id).collect();
    let outcomes: Vec<Vec<String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ids
            .iter()
            .zip(work)
            .map(|(id, (_, events))| {
                let svc = &svc;
                scope.spawn(move || events.iter().map(|e| outcome(svc, id, e.clone())).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    ids.iter().zip(outcomes).map(|(id, o)| (svc.get_transcript(id).unwrap(), o)).collect()
}

pub fn responses(name: &str) -> ResponseSet {
    let path = fixtures().join("responses").join(format!("{name}.responses.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Positive shares and positive-question count recomputed from the scale
/// labels, independently of the library.
pub fn verdict_oracle(name: &str) -> (Vec<f64>, usize) {
    let spec = spec(name);
    let set = responses(name);
    let rows: Vec<&BTreeMap<String, usize>> =
        set.responses.iter().filter(|r| r.len() == spec.evaluation.questionnaire.len()).collect();
    let mut fractions = Vec::new();
    for q in &spec.evaluation.questionnaire {
        let positive: Vec<&str> = match q.scale.len() {
            5 => vec!["Agree", "Strongly Agree"],
            3 => vec!["Agree"],
            _ => vec!["Yes"],
        };
        let hits = rows.iter().filter(|r| positive.contains(&q.scale[r[&q.question_id]].as_str())).count();
        fractions.push(hits as f64 / rows.len() as f64);
    }
    let positives = fractions.iter().filter(|f| **f >= 0.5).count();
    (fractions, positives)
}
