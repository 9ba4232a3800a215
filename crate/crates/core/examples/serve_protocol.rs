//! Speak the line-delimited JSON protocol against a model in memory.
//!
//! The same exchange happens over a child's stdin/stdout when a backend
//! runs as `discourse-probe serve ...` or as any external program.

use std::io::Cursor;

use discourse_probe::backend::{serve, UniformModel};

fn main() {
    let requests = [
        r#"{"type":"info"}"#,
        r#"{"type":"score","id":"1/original","text":"I finally decided to tag along."}"#,
        r#"{"type":"score","id":"2/original","text":""}"#,
        r#"{"type":"rank"}"#,
    ]
    .join("\n");
    let mut responses = Vec::new();
    serve(&UniformModel::new(8), Cursor::new(requests), &mut responses).unwrap();
    for line in String::from_utf8(responses).unwrap().lines() {
        println!("{line}");
    }
}
