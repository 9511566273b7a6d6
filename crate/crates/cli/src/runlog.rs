//! One JSON object per line, appended for every invocation.

use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use crate::commands::Record;

pub const LOG_ENV: &str = "SANDCAST_LOG";
pub const DEFAULT_LOG: &str = "sandcast-run.log";

pub fn log_path() -> PathBuf {
    std::env::var_os(LOG_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_LOG))
}

fn hash_or_missing(path: &std::path::Path) -> Value {
    match sandcast_core::synth::sha256_file(path) {
        Ok(h) => json!(h),
        Err(_) => Value::Null,
    }
}

pub fn append(command: &str, argv: &[String], record: Option<&Record>, exit_code: i32, error: Option<&str>) {
    let mut line = Map::new();
    let ts = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    line.insert("timestamp_unix_s".into(), json!(ts));
    line.insert("command".into(), json!(command));
    line.insert("argv".into(), json!(argv));
    line.insert("exit_code".into(), json!(exit_code));
    if let Some(r) = record {
        line.insert("seed".into(), json!(r.seed));
        let inputs: Map<String, Value> = r
            .inputs
            .iter()
            .map(|p| (p.display().to_string(), hash_or_missing(p)))
            .collect();
        line.insert("inputs".into(), Value::Object(inputs));
        let outputs: Map<String, Value> = r
            .outputs
            .iter()
            .map(|p| (p.display().to_string(), hash_or_missing(p)))
            .collect();
        line.insert("outputs".into(), Value::Object(outputs));
        line.insert("metrics".into(), Value::Object(r.metrics.clone()));
    }
    if let Some(e) = error {
        line.insert("error".into(), json!(e));
    }
    let path = log_path();
    let written = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .and_then(|mut f| writeln!(f, "{}", Value::Object(line)));
    if let Err(e) = written {
        log::warn!("could not append to run log {}: {e}", path.display());
    }
}
