mod common;

use std::time::Instant;

use ee_dialogue::bt::{NodeStatus, UserEvent};
use ee_dialogue::dialogue::Stage;
use ee_dialogue::script::{simulate, ScriptFile};
use ee_dialogue::session::{Conversation, SessionStatus};

const TABLE_ROWS: [(&str, NodeStatus); 9] = [
    ("a", NodeStatus::Success),
    ("b", NodeStatus::Success),
    ("c", NodeStatus::Success),
    ("j→k", NodeStatus::Failure),
    ("g→h", NodeStatus::Failure),
    ("e", NodeStatus::Success),
    ("f", NodeStatus::Failure),
    ("j→k", NodeStatus::Success),
    ("f", NodeStatus::Success),
];

fn script(name: &str) -> ScriptFile {
    let path = common::fixtures().join("scripts").join(format!("{name}.script.json"));
    ScriptFile::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn clinician_rows_follow_the_annotated_tree() {
    let started = Instant::now();
    let (mut conv, _) = Conversation::start(common::blueprint("radiograph"), "s1").unwrap();
    for text in common::CLINICIAN {
        conv.post(UserEvent::text(text)).unwrap();
    }
    let rows: Vec<(&str, NodeStatus)> =
        conv.transcript().rows().map(|r| (r.marks.as_str(), r.status)).collect();
    assert_eq!(rows, TABLE_ROWS);
    assert_eq!(conv.status(), SessionStatus::Completed);
    assert!(started.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn clinician_hears_the_expected_prompts() {
    let (mut conv, first) = Conversation::start(common::blueprint("radiograph"), "s1").unwrap();
    let mut said: Vec<String> = first.effects.iter().filter_map(|e| e.text().map(str::to_owned)).collect();
    for text in common::CLINICIAN {
        let turn = conv.post(UserEvent::text(text)).unwrap();
        said.extend(turn.effects.iter().filter_map(|e| e.text().map(str::to_owned)));
    }
    for expected in [
        "What is your level of knowledge on AI?",
        "What is your level of knowledge in the domain of fracture detection?",
        "Thank you for answering the questions.",
        "Thanks, Let me find an explanation for you.",
        "I see... can you tell me a bit more about why you think so?",
        "Thank you for that information. At the moment the system is correct 83% of the time. We will use your feedback to improve the system.",
        "would you like to take the questionnaire now?",
        "Thank you for your feedback. Have a nice day!",
    ] {
        assert!(said.iter().any(|s| s == expected), "missing {expected:?}");
    }
    assert_eq!(conv.transcript().responses.values().copied().collect::<Vec<_>>(), [3, 2, 2]);
}

#[test]
fn clinician_script_simulates_cleanly() {
    let report = simulate(common::blueprint("radiograph"), &script("clinician"), true).unwrap();
    assert!(report.passed(), "{:?}", report.diff());
    assert_eq!(report.visited_marks(), ["a", "b", "c", "j", "k", "g", "h", "e", "f", "j", "k", "f"]);
}

#[test]
fn wrong_expectation_is_reported() {
    let mut s = script("clinician");
    s.events[5].expect_status = Some("Success".into());
    let report = simulate(common::blueprint("radiograph"), &s, true).unwrap();
    assert!(!report.passed());
    assert_eq!(report.diff(), ["step 6: expected j→k Success, got j→k Fail"]);
}

#[test]
fn empty_script_only_greets() {
    let s = ScriptFile { spec_id: "radiograph".into(), description: String::new(), events: vec![] };
    let report = simulate(common::blueprint("radiograph"), &s, true).unwrap();
    assert!(report.passed());
    assert_eq!(report.transcript.entries.len(), 1);
    assert_eq!(report.transcript.entries[0].node_id(), "greet.consent");
}

/// The detour through disagreement, two further needs and the evaluation
/// activates the stages in this order once the disagreement begins.
#[test]
fn disagreement_detour_activation_order() {
    let report = simulate(common::blueprint("radiograph"), &script("disagreement_detour"), false).unwrap();
    assert!(report.passed(), "{:?}", report.diff());
    assert_eq!(report.status, SessionStatus::Completed);

    let (mut conv, _) = Conversation::start(common::blueprint("radiograph"), "s").unwrap();
    for step in &script("disagreement_detour").events {
        conv.post(step.event.clone().into()).unwrap();
    }
    let log = conv.stage_log();
    let from = log.iter().position(|s| *s == Stage::Disagreement).unwrap();
    assert_eq!(
        &log[from..],
        [
            Stage::Disagreement,
            Stage::ExplanationNeed,
            Stage::ExplanationStrategy,
            Stage::ExplanationNeed,
            Stage::ExplanationStrategy,
            Stage::Evaluation,
        ]
    );
}
