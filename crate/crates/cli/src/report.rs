//! Report envelopes, error objects and input digests.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "meandim/1";

/// A failure that ends the run with exit code 1.
#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub path: Option<String>,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { kind: "usage".into(), message: message.into(), path: None }
    }

    pub fn not_found(path: &str) -> Self {
        CliError { kind: "not_found".into(), message: "file not found".into(), path: Some(path.into()) }
    }

    pub fn io(path: &str, e: std::io::Error) -> Self {
        CliError { kind: "io".into(), message: e.to_string(), path: Some(path.into()) }
    }

    pub fn parse(path: &str, message: impl Into<String>) -> Self {
        CliError { kind: "malformed_json".into(), message: message.into(), path: Some(path.into()) }
    }

    pub fn config(path: &str, message: impl Into<String>) -> Self {
        CliError { kind: "config".into(), message: message.into(), path: Some(path.into()) }
    }

    pub fn in_file(mut self, path: &str) -> Self {
        self.path.get_or_insert_with(|| path.to_string());
        self
    }

    pub fn to_json(&self, command: &str) -> Value {
        let mut err = json!({"kind": self.kind, "message": self.message});
        if let Some(p) = &self.path {
            err["path"] = json!(p);
        }
        json!({"schema": SCHEMA, "command": command, "error": err})
    }
}

impl From<meandim::Error> for CliError {
    fn from(e: meandim::Error) -> Self {
        CliError { kind: e.kind().into(), message: e.detail().into(), path: None }
    }
}

/// What a command produced: a result object and named checks.
#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Value,
    pub assertions: Vec<(String, bool)>,
    pub seed: Option<u64>,
}

impl Outcome {
    pub fn new(result: Value) -> Self {
        Outcome { result, ..Default::default() }
    }

    pub fn check(mut self, name: &str, ok: bool) -> Self {
        self.assertions.push((name.to_string(), ok));
        self
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|(_, ok)| *ok)
    }
}

pub fn hex_digest(chunks: &[Vec<u8>]) -> String {
    let mut h = Sha256::new();
    for c in chunks {
        h.update((c.len() as u64).to_le_bytes());
        h.update(c);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn envelope(command: &str, digest: &str, out: &Outcome, elapsed: Option<f64>) -> Value {
    let mut v = Map::new();
    v.insert("schema".into(), json!(SCHEMA));
    v.insert("command".into(), json!(command));
    v.insert("inputs_digest".into(), json!(digest));
    if let Some(s) = out.seed {
        v.insert("seed".into(), json!(s));
    }
    v.insert("result".into(), out.result.clone());
    let checks: Vec<Value> = out
        .assertions
        .iter()
        .map(|(n, ok)| json!({"name": n, "passed": ok}))
        .collect();
    v.insert("assertions".into(), Value::Array(checks));
    v.insert("status".into(), json!(if out.passed() { "ok" } else { "assertion_failed" }));
    if let Some(t) = elapsed {
        v.insert("elapsed_s".into(), json!(t));
    }
    Value::Object(v)
}
