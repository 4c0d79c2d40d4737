//! The structured run report and its JSON encoding.

use std::io;

use rmean_core::curvature::ConstantMode;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::config::{Command, RunConfig};

/// One step of a run and what it found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub verdict: String,
    pub summary: String,
    pub detail: Value,
}

impl Stage {
    pub fn new(name: &str, verdict: impl Into<String>, summary: impl Into<String>, detail: impl Serialize) -> Self {
        Self {
            name: name.into(),
            verdict: verdict.into(),
            summary: summary.into(),
            detail: serde_json::to_value(detail).expect("report values serialize"),
        }
    }
}

/// Final gate outcome; the geometric statement appears only when the gate
/// passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConclusionRecord {
    pub stage: String,
    pub verdict: String,
    pub statement: Option<String>,
    pub evidence: Vec<String>,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Synthetic,
    Geometric,
    Sampled,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub constant_mode: ConstantMode,
    pub data: DataKind,
    pub seed: Option<u64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub command: Command,
    pub config: RunConfig,
    pub provenance: Provenance,
    pub stages: Vec<Stage>,
    pub conclusion: Option<ConclusionRecord>,
    pub outputs: Vec<String>,
}

impl RunReport {
    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Pretty JSON with every float written to 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory JSON write");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}
