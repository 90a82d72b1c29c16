//! Aggregates questionnaire responses into a verdict for each spec that
//! ships a response fixture.

use std::path::Path;

use ee_dialogue::session::{aggregate, ResponseSet};
use ee_dialogue::spec::load_spec;

fn main() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for name in ["loan", "recidivism"] {
        let spec = load_spec(&fixtures.join(format!("specs/{name}.xaispec.json"))).unwrap();
        let text =
            std::fs::read_to_string(fixtures.join(format!("responses/{name}.responses.json"))).unwrap();
        let set: ResponseSet = serde_json::from_str(&text).unwrap();

        let verdict = aggregate(name, &spec.evaluation, &set.responses).unwrap();
        println!("{name}: {verdict}");
        for q in &verdict.questions {
            println!("  {} positive share {:.2}", q.question_id, q.positive_fraction);
        }
        println!("  {} respondents, {} partial", verdict.respondents, verdict.partial);
    }
}
