#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;

use logos::corpus::{load_labels, CorpusCase};
use logos::{BackendChoice, Settings};
use serde_json::Value;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn labels() -> Vec<CorpusCase> {
    load_labels(&corpus_dir().join("labels.json")).expect("labels")
}

pub fn source(case: &CorpusCase) -> String {
    std::fs::read_to_string(corpus_dir().join(&case.path)).expect("corpus file")
}

pub fn case(id: &str) -> CorpusCase {
    labels().into_iter().find(|c| c.id == id).unwrap_or_else(|| panic!("no case {}", id))
}

/// Settings for one backend with the case's pinned overrides.
pub fn settings(case: &CorpusCase, backend: BackendChoice) -> Settings {
    let base = Settings { backend, ..Settings::default() };
    match &case.overrides {
        Some(o) => o.apply(&base),
        None => base,
    }
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_logos")
}

/// A one-thread HTTP server that answers each POST with `respond(body)`
/// and records the request bodies it saw.
pub struct StubServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Value>>>,
}

impl StubServer {
    pub fn start(respond: impl Fn(&Value) -> (u16, String) + Send + 'static) -> StubServer {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
        let url = format!("http://{}/revise", listener.local_addr().expect("addr"));
        let requests = Arc::new(Mutex::new(Vec::new()));
        let seen = Arc::clone(&requests);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let mut reader = BufReader::new(stream.try_clone().expect("clone"));
                let mut length = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 {
                        break;
                    }
                    let line = line.trim_end();
                    if line.is_empty() {
                        break;
                    }
                    if let Some((k, v)) = line.split_once(':') {
                        if k.eq_ignore_ascii_case("content-length") {
                            length = v.trim().parse().unwrap_or(0);
                        }
                    }
                }
                let mut body = vec![0; length];
                if reader.read_exact(&mut body).is_err() {
                    continue;
                }
                let request: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
                let (status, reply) = respond(&request);
                seen.lock().expect("lock").push(request);
                let head = format!(
                    "HTTP/1.1 {} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                    status,
                    reply.len()
                );
                let _ = stream.write_all(head.as_bytes());
                let _ = stream.write_all(reply.as_bytes());
            }
        });
        StubServer { url, requests }
    }

    pub fn attempts(&self) -> Vec<u64> {
        self.requests.lock().expect("lock").iter().filter_map(|r| r["attempt"].as_u64()).collect()
    }
}

/// The reviser reply carrying `program`.
pub fn reply(program: &str) -> (u16, String) {
    (200, serde_json::json!({ "program": program }).to_string())
}

fn quoted(text: &str) -> Option<&str> {
    let start = text.find('`')? + 1;
    let len = text[start..].find('`')?;
    Some(&text[start..start + len])
}

/// A reviser that applies the first diagnostic's "did you mean" hint by
/// renaming the offending symbol; anything else comes back unchanged.
pub fn apply_hint(request: &Value) -> (u16, String) {
    let program = request["program"].as_str().unwrap_or_default();
    let first = &request["diagnostics"][0];
    let fixed = match (first["message"].as_str().and_then(quoted), first["hint"].as_str().and_then(quoted)) {
        (Some(bad), Some(good)) => program.replace(bad, good),
        _ => program.to_string(),
    };
    reply(&fixed)
}

/// Trace 1 with one misspelled function name in its verification.
pub fn misspelled_trace() -> String {
    let text = source(&case("trace1_sotomayor"));
    let broken = text.replace("\"jump_height(javier_sotomayor) >=", "\"jump_heigth(javier_sotomayor) >=");
    assert_ne!(broken, text);
    broken
}
