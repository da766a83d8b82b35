//! Machine-readable report records.
//!
//! Every command emits one JSON object per line. Field order is fixed by the record
//! structs, floats use the shortest round-trip representation, and big integers are
//! decimal strings, so identical inputs produce byte-identical output.

use std::io::Write;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};

use crate::error::Result;

pub fn ser_big<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn ser_big_opt<S: Serializer>(
    x: &Option<BigInt>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

pub fn ser_big_vec<S: Serializer>(x: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|v| v.to_string()))
}

/// `u128` counts as decimal strings (JSON numbers lose precision above 2^53).
pub fn ser_u128<S: Serializer>(x: &u128, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// A tagged line: `{"record": <kind>, ...fields}`.
#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    record: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub fn to_line<T: Serialize>(kind: &str, body: &T) -> Result<String> {
    Ok(serde_json::to_string(&Tagged { record: kind, body })?)
}

/// Collects report lines and writes them to a sink.
#[derive(Default)]
pub struct RecordWriter {
    lines: Vec<String>,
}

impl RecordWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push<T: Serialize>(&mut self, kind: &str, body: &T) -> Result<()> {
        self.lines.push(to_line(kind, body)?);
        Ok(())
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        for l in &self.lines {
            writeln!(out, "{l}")?;
        }
        Ok(())
    }
}
