#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

use serde_json::Value;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn sqif(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_sqif")).args(args).output().expect("binary runs");
    Output {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// The document text with the wall-clock field zeroed.
pub fn without_wall_time(doc: &str) -> String {
    let mut v: Value = serde_json::from_str(doc).unwrap();
    if let Some(r) = v.get_mut("report").and_then(Value::as_object_mut) {
        r.insert("wall_time_secs".into(), 0.0.into());
    }
    serde_json::to_string_pretty(&v).unwrap()
}
