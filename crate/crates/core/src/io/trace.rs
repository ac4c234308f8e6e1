//! Trace persistence and replay.
//!
//! Line-delimited self-describing records: one JSON header line carrying
//! the scenario and its fingerprint, then one JSON record per step. The
//! format is append-only and streamable; a reader never needs more than
//! one record of lookahead.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SafetyParams;
use crate::geometry::{Point3, Vector3};
use crate::metrics::{self, TrialStats};
use crate::monitor::{EventKind, Monitor, PoseSample, Zone};
use crate::sim::{Scenario, Trace, TraceStep};

pub const TRACE_FORMAT: &str = "hpf-trace";
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub version: u32,
    pub fingerprint: String,
    pub label: String,
    pub dt: f64,
    pub scenario: Scenario,
}

/// One stored step. Positions/velocities as [x, y, z] triples; events as
/// the kinds fired at this timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub tcp: [f64; 3],
    pub tcp_v: [f64; 3],
    pub hand: [f64; 3],
    pub hand_v: [f64; 3],
    pub d: f64,
    pub d_ha: f64,
    pub zone: Zone,
    pub events: Vec<EventKind>,
}

impl StepRecord {
    fn from_step(step: &TraceStep) -> Self {
        let s = &step.sample;
        StepRecord {
            t: s.t,
            tcp: [s.tcp.x, s.tcp.y, s.tcp.z],
            tcp_v: [s.tcp_v.x, s.tcp_v.y, s.tcp_v.z],
            hand: [s.hand.x, s.hand.y, s.hand.z],
            hand_v: [s.hand_v.x, s.hand_v.y, s.hand_v.z],
            d: step.eval.d,
            d_ha: step.eval.d_ha,
            zone: step.zone,
            events: step.events.iter().map(|e| e.kind).collect(),
        }
    }

    pub fn sample(&self) -> PoseSample {
        PoseSample {
            t: self.t,
            tcp: Point3::new(self.tcp[0], self.tcp[1], self.tcp[2]),
            tcp_v: Vector3::new(self.tcp_v[0], self.tcp_v[1], self.tcp_v[2]),
            hand: Point3::new(self.hand[0], self.hand[1], self.hand[2]),
            hand_v: Vector3::new(self.hand_v[0], self.hand_v[1], self.hand_v[2]),
        }
    }
}

/// A trace as read back from disk.
#[derive(Debug, Clone)]
pub struct StoredTrace {
    pub header: TraceHeader,
    pub records: Vec<StepRecord>,
}

pub fn write_trace(trace: &Trace, mut w: impl Write) -> Result<()> {
    let header = TraceHeader {
        format: TRACE_FORMAT.into(),
        version: TRACE_VERSION,
        fingerprint: trace.fingerprint.clone(),
        label: trace.scenario.label.clone(),
        dt: trace.scenario.dt,
        scenario: trace.scenario.clone(),
    };
    serde_json::to_writer(&mut w, &header).map_err(|e| Error::Parse(e.to_string()))?;
    w.write_all(b"\n")?;
    for step in &trace.steps {
        serde_json::to_writer(&mut w, &StepRecord::from_step(step))
            .map_err(|e| Error::Parse(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_trace_file(trace: &Trace, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_trace(trace, std::io::BufWriter::new(file))
}

pub fn read_trace(r: impl BufRead) -> Result<StoredTrace> {
    let mut lines = r.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Stream { index: 0, reason: "empty trace file".into() })??;
    let header: TraceHeader = serde_json::from_str(&header_line).map_err(|e| Error::Stream {
        index: 0,
        reason: format!("bad header: {e}"),
    })?;
    if header.format != TRACE_FORMAT {
        return Err(Error::Stream {
            index: 0,
            reason: format!("not a {TRACE_FORMAT} file (format = {})", header.format),
        });
    }
    if header.version != TRACE_VERSION {
        return Err(Error::Stream {
            index: 0,
            reason: format!("unsupported version {}", header.version),
        });
    }
    if header.fingerprint != header.scenario.fingerprint() {
        return Err(Error::Stream {
            index: 0,
            reason: "header fingerprint does not match its scenario".into(),
        });
    }

    let mut records = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    for (i, line) in lines.enumerate() {
        let index = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: StepRecord = serde_json::from_str(&line).map_err(|e| Error::Stream {
            index,
            reason: format!("bad record: {e}"),
        })?;
        if record.t <= last_t {
            return Err(Error::Stream {
                index,
                reason: format!("records not strictly time-ordered: {} after {last_t}", record.t),
            });
        }
        last_t = record.t;
        records.push(record);
    }
    Ok(StoredTrace { header, records })
}

pub fn read_trace_file(path: impl AsRef<Path>) -> Result<StoredTrace> {
    let file = std::fs::File::open(path)?;
    read_trace(std::io::BufReader::new(file))
}

/// Outcome of re-scoring a stored trace through the monitor.
#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    /// Recomputed trace (zones/events from the fresh monitor pass).
    pub trace: Trace,
    pub stats: TrialStats,
    /// Record indices where the recomputed zone or events differ from the
    /// stored ones. Empty for self-produced traces replayed with their own
    /// parameters.
    pub mismatches: Vec<usize>,
}

/// Feed the stored pose samples back through the monitor, optionally with
/// different safety parameters, and recompute zones, events, and stats.
pub fn replay(stored: &StoredTrace, params: Option<SafetyParams>) -> Result<ReplayOutcome> {
    let mut scenario = stored.header.scenario.clone();
    if let Some(p) = params {
        p.validate()?;
        scenario.params = p;
    }
    let mut monitor = Monitor::new(scenario.params)?;
    let mut steps = Vec::with_capacity(stored.records.len());
    let mut mismatches = Vec::new();
    for (i, record) in stored.records.iter().enumerate() {
        let sample = record.sample();
        let out = monitor.step(&sample).map_err(|e| match e {
            Error::Stream { reason, .. } => Error::Stream { index: i + 1, reason },
            other => other,
        })?;
        let kinds: Vec<EventKind> = out.events.iter().map(|e| e.kind).collect();
        if out.zone != record.zone || kinds != record.events {
            mismatches.push(i + 1);
        }
        steps.push(TraceStep { sample, zone: out.zone, eval: out.eval, events: out.events });
    }
    let trace = Trace { fingerprint: scenario.fingerprint(), scenario, steps };
    let stats = metrics::trial_stats(&trace)?;
    Ok(ReplayOutcome { trace, stats, mismatches })
}
