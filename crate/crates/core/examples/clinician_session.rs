//! Plays the clinician conversation against the radiograph spec and prints
//! the dialogue with the annotated rows each reply resolved.

use std::sync::Arc;

use ee_dialogue::bt::UserEvent;
use ee_dialogue::dialogue::PhraseTable;
use ee_dialogue::registry::Registry;
use ee_dialogue::session::{Blueprint, Conversation};
use ee_dialogue::spec::load_spec;

const REPLIES: [&str; 15] = [
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

fn main() {
    let path =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/specs/radiograph.xaispec.json");
    let spec = load_spec(&path).unwrap();
    let blueprint =
        Blueprint::new(spec, Arc::new(Registry::with_mocks()), Arc::new(PhraseTable::embedded())).unwrap();

    let (mut conv, first) = Conversation::start(Arc::new(blueprint), "demo").unwrap();
    for e in &first.effects {
        if let Some(t) = e.text() {
            println!("bot:  {t}");
        }
    }
    for reply in REPLIES {
        println!("user: {reply}");
        let turn = conv.post(UserEvent::text(reply)).unwrap();
        for row in &turn.rows {
            println!("      [{} {}]", row.marks, row.status);
        }
        for e in &turn.effects {
            if let Some(t) = e.text() {
                println!("bot:  {t}");
            }
        }
    }
    println!("status: {}", conv.status().as_str());
    println!("stages: {:?}", conv.stage_log());
}
