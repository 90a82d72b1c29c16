use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn ee(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ee")).args(args).output().unwrap()
}

fn fx(rel: &str) -> String {
    fixtures().join(rel).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_exit_codes() {
    let ok = ee(&["validate", &fx("specs")]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    for name in ["radiograph", "loan", "recidivism"] {
        assert_eq!(ee(&["validate", &fx(&format!("specs/{name}.xaispec.json"))]).status.code(), Some(0));
    }
    let bad = ee(&["validate", &fx("invalid/childless_composite.xaispec.json")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("ChildlessComposite(empty_branch)"));
    assert_eq!(ee(&["validate", "does/not/exist.xaispec.json"]).status.code(), Some(2));
}

#[test]
fn simulate_clinician_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let args = [
        "simulate",
        &fx("specs/radiograph.xaispec.json"),
        &fx("scripts/clinician.script.json"),
        "--strict",
        "--trace-out",
        trace.to_str().unwrap(),
    ];
    let out = ee(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("visited: a,b,c,j,k,g,h,e,f,j,k,f\n"));
    let lines = std::fs::read_to_string(&trace).unwrap();
    assert!(lines.lines().count() > 100);
    assert!(lines.lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
    assert_eq!(ee(&args).stdout, out.stdout);
}

#[test]
fn simulate_reports_mismatches_and_empty_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let mut script: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fx("scripts/clinician.script.json")).unwrap()).unwrap();
    script["events"][5]["expect_status"] = "Success".into();
    let wrong = dir.path().join("wrong.json");
    std::fs::write(&wrong, script.to_string()).unwrap();
    let out = ee(&["simulate", &fx("specs/radiograph.xaispec.json"), wrong.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("step 6: expected j→k Success, got j→k Fail"));

    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, r#"{"spec_id": "radiograph", "events": []}"#).unwrap();
    let out = ee(&["simulate", &fx("specs/radiograph.xaispec.json"), empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("status: active"));

    let missing = ee(&["simulate", &fx("specs/radiograph.xaispec.json"), "nope.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn report_prints_verdicts() {
    let specs = fx("specs");
    let out =
        ee(&["report", "loan", "--specs-dir", &specs, "--responses", &fx("responses/loan.responses.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("pass (2/3 positive)\n"), "{}", stdout(&out));
    let out = ee(&[
        "report",
        "recidivism",
        "--specs-dir",
        &specs,
        "--responses",
        &fx("responses/recidivism.responses.json"),
    ]);
    assert!(stdout(&out).ends_with("needs_modification (2/3 positive)\n"));

    let dir = tempfile::tempdir().unwrap();
    let out = ee(&["report", "loan", "--specs-dir", &specs, "--data-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("no fully evaluated sessions"));
}

fn get(addr: &str, path: &str) -> Option<String> {
    let mut s = TcpStream::connect(addr).ok()?;
    write!(s, "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").ok()?;
    let mut body = String::new();
    s.read_to_string(&mut body).ok()?;
    Some(body)
}

#[test]
fn serve_answers_health_checks() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let addr = format!("127.0.0.1:{port}");
    let mut child = Command::new(env!("CARGO_BIN_EXE_ee"))
        .args(["serve", "--specs-dir", &fx("specs"), "--listen", &addr])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(10);
    let reply = loop {
        if let Some(r) = get(&addr, "/health") {
            break r;
        }
        assert!(Instant::now() < deadline, "server did not come up");
        std::thread::sleep(Duration::from_millis(50));
    };
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.ends_with("ok"));
}
