//! The JSON result envelope and encodings of library values.

use serde_json::{json, Value};

use crate::equivalence::{EquivVerdict, RewriteProof};
use crate::error::CoreError;
use crate::rational::{to_wire, Rational};
use crate::semantics::interval::Interval;

pub const SCHEMA: &str = "probstrat/result/v1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn envelope(command: &str, config: Value, payload: Value, millis: u128) -> Value {
    json!({
        "schema": SCHEMA,
        "command": command,
        "config": config,
        "payload": payload,
        "timing_ms": millis,
        "version": VERSION,
    })
}

pub fn rat(r: &Rational) -> Value {
    Value::String(to_wire(r))
}

/// Exact values as `"a/b"`, anything else as `{lo, hi}`.
pub fn interval(v: &Interval) -> Value {
    match v.value() {
        Some(x) => rat(x),
        None => json!({ "lo": to_wire(&v.lo), "hi": to_wire(&v.hi) }),
    }
}

pub fn proof(p: &RewriteProof) -> Value {
    json!({
        "lhs": p.lhs.to_dsl(),
        "rhs": p.rhs.to_dsl(),
        "steps": p.to_json(),
        "replayed": p.replay().is_ok(),
    })
}

pub fn verdict(v: &EquivVerdict) -> Value {
    match v {
        EquivVerdict::Distinguished { play, left, right } => json!({
            "verdict": "Distinguished",
            "play": play.to_string(),
            "left": interval(left),
            "right": interval(right),
        }),
        EquivVerdict::EquivalentUpTo { depth, eps } => json!({
            "verdict": "EquivalentUpTo",
            "depth": depth,
            "eps": rat(eps),
        }),
        EquivVerdict::ProvedEquivalent(p) => json!({
            "verdict": "ProvedEquivalent",
            "proof": proof(p),
        }),
    }
}

/// Written to standard error.
pub fn diagnostic(e: &CoreError) -> Value {
    let mut v = json!({ "error": e.code(), "message": e.to_string() });
    if let CoreError::Syntax { line, col, .. } = e {
        v["line"] = json!(line);
        v["col"] = json!(col);
    }
    v
}
