//! Serves every shipped spec over HTTP on 127.0.0.1:8080.
//!
//! ```text
//! curl -s localhost:8080/sessions -d '{"spec_id":"radiograph"}' -H 'content-type: application/json'
//! curl -s localhost:8080/sessions/s000001/events -H 'content-type: application/json' \
//!      -d '{"type":"user_event","event":{"free_text":"Yes"}}'
//! ```

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use ee_dialogue::dialogue::PhraseTable;
use ee_dialogue::registry::Registry;
use ee_dialogue::server::serve;
use ee_dialogue::session::{load_spec_dir, ServiceConfig, SessionService};

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let specs = load_spec_dir(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/specs")).unwrap();
    let service = SessionService::new(
        specs,
        Arc::new(Registry::with_mocks()),
        Arc::new(PhraseTable::embedded()),
        ServiceConfig::default(),
    )
    .unwrap();
    println!("listening on http://127.0.0.1:8080");
    serve(Arc::new(service), ([127, 0, 0, 1], 8080).into(), Duration::from_secs(60)).await
}
