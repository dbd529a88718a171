//! Maneuver logs: uniformly sampled state and thrust sequences at one
//! expansion length.
//!
//! CSV columns: `t, x, y, psi, u, v, r, f1, f2, f3, f4, l`. Velocity cells may
//! be left empty, in which case body velocities are reconstructed from the
//! pose by central differences.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::vessel::wrap_angle;
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 12] = [
    "t", "x", "y", "psi", "u", "v", "r", "f1", "f2", "f3", "f4", "l",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManeuverKind {
    Straight,
    Circle,
    Spin,
}

impl ManeuverKind {
    pub const ALL: [ManeuverKind; 3] = [
        ManeuverKind::Straight,
        ManeuverKind::Circle,
        ManeuverKind::Spin,
    ];
}

impl std::fmt::Display for ManeuverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ManeuverKind::Straight => "straight",
            ManeuverKind::Circle => "circle",
            ManeuverKind::Spin => "spin",
        })
    }
}

impl FromStr for ManeuverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "straight" => Ok(ManeuverKind::Straight),
            "circle" => Ok(ManeuverKind::Circle),
            "spin" => Ok(ManeuverKind::Spin),
            other => Err(Error::config("kind", format!("unknown maneuver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManeuverLog {
    pub kind: ManeuverKind,
    pub expansion: f64,
    pub dt: f64,
    pub t: Vec<f64>,
    pub q: Vec<[f64; 6]>,
    /// Thrust held over `[t_k, t_k + dt)`.
    pub u: Vec<[f64; 4]>,
}

impl ManeuverLog {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if n < 2 {
            return Err(Error::Log("maneuver log needs at least two samples".into()));
        }
        if self.q.len() != n || self.u.len() != n {
            return Err(Error::Log(format!(
                "column lengths differ: t {n}, q {}, u {}",
                self.q.len(),
                self.u.len()
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Log("sampling period must be positive".into()));
        }
        for (k, w) in self.t.windows(2).enumerate() {
            if ((w[1] - w[0]) - self.dt).abs() > 1e-9 * (1.0 + w[1].abs()) {
                return Err(Error::Log(format!("non-uniform sampling at row {}", k + 1)));
            }
        }
        Ok(())
    }

    /// Logged body velocities `(u, v, r)`.
    pub fn velocities(&self) -> Vec<[f64; 3]> {
        self.q.iter().map(|q| [q[3], q[4], q[5]]).collect()
    }

    /// Replaces the velocity columns by central differences of the pose
    /// rotated into the body frame (one-sided at the ends).
    pub fn with_differenced_velocities(mut self) -> Self {
        let n = self.q.len();
        if n < 2 {
            return self;
        }
        let poses: Vec<[f64; 3]> = self.q.iter().map(|q| [q[0], q[1], q[2]]).collect();
        for k in 0..n {
            let (a, b) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            let h = (b - a) as f64 * self.dt;
            let dx = (poses[b][0] - poses[a][0]) / h;
            let dy = (poses[b][1] - poses[a][1]) / h;
            let r = wrap_angle(poses[b][2] - poses[a][2]) / h;
            let (s, c) = poses[k][2].sin_cos();
            self.q[k][3] = c * dx + s * dy;
            self.q[k][4] = -s * dx + c * dy;
            self.q[k][5] = r;
        }
        self
    }

    /// Splits into two contiguous logs sharing the sample at `at`.
    pub fn split_at(&self, at: usize) -> (ManeuverLog, ManeuverLog) {
        let head = ManeuverLog {
            t: self.t[..=at].to_vec(),
            q: self.q[..=at].to_vec(),
            u: self.u[..=at].to_vec(),
            ..self.clone()
        };
        let tail = ManeuverLog {
            t: self.t[at..].to_vec(),
            q: self.q[at..].to_vec(),
            u: self.u[at..].to_vec(),
            ..self.clone()
        };
        (head, tail)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Log(e.to_string());
        w.write_record(CSV_HEADER).map_err(err)?;
        for k in 0..self.len() {
            let mut row = vec![self.t[k]];
            row.extend_from_slice(&self.q[k]);
            row.extend_from_slice(&self.u[k]);
            row.push(self.expansion);
            w.write_record(row.iter().map(|v| format!("{v:?}")))
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Log(e.to_string()))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: std::io::Read>(input: R, kind: ManeuverKind) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| Error::Log(e.to_string()))?.clone();
        let names: Vec<&str> = header.iter().map(str::trim).collect();
        if names != CSV_HEADER {
            return Err(Error::Log(format!(
                "expected header {:?}, got {:?}",
                CSV_HEADER, names
            )));
        }
        let mut log = ManeuverLog {
            kind,
            expansion: 0.0,
            dt: 0.0,
            t: Vec::new(),
            q: Vec::new(),
            u: Vec::new(),
        };
        let mut missing_velocity = false;
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Log(e.to_string()))?;
            if rec.len() != CSV_HEADER.len() {
                return Err(Error::Log(format!(
                    "row {} has {} fields",
                    i + 1,
                    rec.len()
                )));
            }
            let mut row = [0.0; 12];
            for (j, field) in rec.iter().enumerate() {
                let field = field.trim();
                if field.is_empty() && (4..7).contains(&j) {
                    missing_velocity = true;
                    continue;
                }
                row[j] = field.parse().map_err(|e| {
                    Error::Log(format!("row {}, column {}: {e}", i + 1, CSV_HEADER[j]))
                })?;
            }
            if i == 0 {
                log.expansion = row[11];
            } else if row[11] != log.expansion {
                return Err(Error::Log(format!(
                    "row {}: expansion changes within one log",
                    i + 1
                )));
            }
            log.t.push(row[0]);
            log.q.push([row[1], row[2], row[3], row[4], row[5], row[6]]);
            log.u.push([row[7], row[8], row[9], row[10]]);
        }
        if log.t.len() >= 2 {
            log.dt = log.t[1] - log.t[0];
        }
        log.validate()?;
        Ok(if missing_velocity {
            log.with_differenced_velocities()
        } else {
            log
        })
    }

    pub fn load_csv(path: &Path, kind: ManeuverKind) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc_log() -> ManeuverLog {
        // Uniform circular motion: surge 0.3 m/s, yaw rate 0.2 rad/s.
        let dt = 0.02;
        let n = 200;
        let (speed, rate) = (0.3, 0.2);
        let radius = speed / rate;
        let t: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let q = t
            .iter()
            .map(|&t| {
                let psi = rate * t;
                [
                    radius * psi.sin(),
                    radius * (1.0 - psi.cos()),
                    wrap_angle(psi),
                    speed,
                    0.0,
                    rate,
                ]
            })
            .collect();
        ManeuverLog {
            kind: ManeuverKind::Circle,
            expansion: 0.2,
            dt,
            t,
            q,
            u: vec![[0.0, 1.0, 0.0, 2.0]; n],
        }
    }

    #[test]
    fn csv_round_trip() {
        let log = arc_log();
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let back = ManeuverLog::read_csv(buf.as_slice(), ManeuverKind::Circle).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn differenced_velocities_match_exact_ones() {
        let log = arc_log();
        let diff = log.clone().with_differenced_velocities();
        for k in 1..log.len() - 1 {
            for j in 3..6 {
                assert!((diff.q[k][j] - log.q[k][j]).abs() < 1e-4, "{k} {j}");
            }
        }
    }

    #[test]
    fn blank_velocity_cells_are_reconstructed() {
        let log = arc_log();
        let mut text = String::from("t,x,y,psi,u,v,r,f1,f2,f3,f4,l\n");
        for k in 0..log.len() {
            let q = log.q[k];
            text.push_str(&format!(
                "{},{},{},{},,,,0,1,0,2,0.2\n",
                log.t[k], q[0], q[1], q[2]
            ));
        }
        let back = ManeuverLog::read_csv(text.as_bytes(), ManeuverKind::Circle).unwrap();
        assert!((back.q[50][3] - 0.3).abs() < 1e-4);
        assert!((back.q[50][5] - 0.2).abs() < 1e-4);
    }

    #[test]
    fn malformed_logs_rejected() {
        let bad_header = "t,x,y\n0,0,0\n";
        assert!(ManeuverLog::read_csv(bad_header.as_bytes(), ManeuverKind::Spin).is_err());
        let mut log = arc_log();
        log.t[10] += 0.001;
        assert!(log.validate().is_err());
    }
}
