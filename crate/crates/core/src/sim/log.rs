//! Time-series log of a simulation run.
//!
//! CSV column order: `t, x, y, psi, u, v, r, u1, u2, u3, u4, fx, fy, mz,
//! dx, dy, dmz, l`. Commands `u1..u4` are the clamped per-thruster forces
//! actually applied; `fx, fy, mz` is the total generalized force including
//! the disturbance `dx, dy, dmz`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const CSV_HEADER: [&str; 18] = [
    "t", "x", "y", "psi", "u", "v", "r", "u1", "u2", "u3", "u4", "fx", "fy", "mz", "dx", "dy",
    "dmz", "l",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSample {
    pub t: f64,
    pub q: [f64; 6],
    pub u: [f64; 4],
    pub force: [f64; 3],
    pub disturbance: [f64; 3],
    pub expansion: f64,
}

impl LogSample {
    fn row(&self) -> [f64; 18] {
        let mut r = [0.0; 18];
        r[0] = self.t;
        r[1..7].copy_from_slice(&self.q);
        r[7..11].copy_from_slice(&self.u);
        r[11..14].copy_from_slice(&self.force);
        r[14..17].copy_from_slice(&self.disturbance);
        r[17] = self.expansion;
        r
    }

    fn from_row(r: &[f64]) -> Self {
        let mut s = LogSample {
            t: r[0],
            q: [0.0; 6],
            u: [0.0; 4],
            force: [0.0; 3],
            disturbance: [0.0; 3],
            expansion: r[17],
        };
        s.q.copy_from_slice(&r[1..7]);
        s.u.copy_from_slice(&r[7..11]);
        s.force.copy_from_slice(&r[11..14]);
        s.disturbance.copy_from_slice(&r[14..17]);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// A command exceeded the thrust bound and was clamped.
    Clamp,
    /// Expansion target changed or the rate limiter engaged.
    Expansion,
    Capture,
    CaptureTimeout,
    /// Tracking error fell below the controller thresholds.
    Converged,
    /// NMPC hit its iteration cap; the best iterate was applied.
    SolverDegraded,
    /// Controller failed; the previous command is held.
    ControllerError,
    /// Per-cycle NMPC diagnostics.
    Solver,
    Phase,
    Abort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub t: f64,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimLog {
    pub dt: f64,
    pub samples: Vec<LogSample>,
    pub events: Vec<SimEvent>,
    pub metadata: BTreeMap<String, String>,
}

/// JSON side of a log: everything except the samples.
#[derive(Serialize)]
struct LogSummary<'a> {
    dt: f64,
    samples: usize,
    t_start: Option<f64>,
    t_end: Option<f64>,
    metadata: &'a BTreeMap<String, String>,
    events: &'a [SimEvent],
}

impl SimLog {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn push(&mut self, sample: LogSample) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(sample.t > last.t) {
                return Err(Error::Log(format!(
                    "time {} does not increase past {}",
                    sample.t, last.t
                )));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn event(&mut self, t: f64, kind: EventKind, detail: impl Into<String>) {
        self.events.push(SimEvent {
            t,
            kind,
            detail: detail.into(),
        });
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &SimEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn has_event(&self, kind: EventKind) -> bool {
        self.events_of(kind).next().is_some()
    }

    pub fn first_event(&self, kind: EventKind) -> Option<&SimEvent> {
        self.events_of(kind).next()
    }

    pub fn last(&self) -> Option<&LogSample> {
        self.samples.last()
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Checks strictly increasing time at the nominal spacing. The last
    /// interval may be shorter when a run stops between steps.
    pub fn validate(&self) -> Result<()> {
        let n = self.samples.len();
        for (i, w) in self.samples.windows(2).enumerate() {
            let gap = w[1].t - w[0].t;
            let tol = 1e-9 * (1.0 + w[1].t.abs());
            let last = i + 2 == n;
            if !(gap > 0.0) || gap > self.dt + tol || (!last && (gap - self.dt).abs() > tol) {
                return Err(Error::Log(format!(
                    "sample {} at t = {} breaks the {} s spacing",
                    i + 1,
                    w[1].t,
                    self.dt
                )));
            }
        }
        Ok(())
    }

    /// Appends `other`. When its first sample repeats our last timestamp
    /// (a terminal sample followed by the next run), the incoming sample
    /// replaces ours since it carries the command actually applied next.
    pub fn extend(&mut self, other: SimLog) -> Result<()> {
        if self.dt == 0.0 {
            self.dt = other.dt;
        }
        if let (Some(last), Some(first)) = (self.samples.last(), other.samples.first()) {
            if (first.t - last.t).abs() <= 1e-12 {
                self.samples.pop();
            }
        }
        for s in other.samples {
            self.push(s)?;
        }
        self.events.extend(other.events);
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Log(e.to_string());
        w.write_record(CSV_HEADER).map_err(err)?;
        for s in &self.samples {
            w.write_record(s.row().iter().map(|v| format!("{v:?}")))
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Log(e.to_string()))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Log(e.to_string()))
    }

    /// Reads samples from CSV; events and metadata are not part of the CSV.
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| Error::Log(e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Log(format!("unexpected header {:?}", header)));
        }
        let mut log = SimLog::default();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Log(e.to_string()))?;
            let row = rec
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Log(format!("row {}: {e}", i + 1)))?;
            if row.len() != CSV_HEADER.len() {
                return Err(Error::Log(format!(
                    "row {} has {} fields",
                    i + 1,
                    row.len()
                )));
            }
            log.push(LogSample::from_row(&row))?;
        }
        if log.samples.len() >= 2 {
            log.dt = log.samples[1].t - log.samples[0].t;
        }
        Ok(log)
    }

    pub fn to_json(&self) -> Result<String> {
        let summary = LogSummary {
            dt: self.dt,
            samples: self.samples.len(),
            t_start: self.samples.first().map(|s| s.t),
            t_end: self.samples.last().map(|s| s.t),
            metadata: &self.metadata,
            events: &self.events,
        };
        serde_json::to_string_pretty(&summary).map_err(|e| Error::Log(e.to_string()))
    }

    pub fn save(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        let file = std::fs::File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
        self.write_csv(std::io::BufWriter::new(file))?;
        std::fs::write(json_path, self.to_json()?).map_err(|e| Error::io(json_path, e))
    }
}
