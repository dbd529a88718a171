//! Run configuration: one TOML file with a section per command.
//!
//! Precedence is flags, then file, then built-in defaults. The merged
//! result is what gets echoed into the run manifest.
//!
//! ```toml
//! seed = 3
//!
//! [vessel.thrusters]
//! f_max = 6.0
//!
//! [identify]
//! lengths = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
//! logs = [{ path = "runs/straight_l0.csv", kind = "straight" }]
//!
//! [identify.maneuver]
//! noise = 0.01
//!
//! [track]
//! shapes = ["square"]
//! controllers = ["nmpc", "pid"]
//! forms = ["contracted", "expanded"]
//! trials = 3
//!
//! [dock]
//! forms = ["contracted", "expanded"]
//! water = "turbulent"
//! repetitions = 20
//!
//! [bridge.site]
//! blocks = 6
//! ```

use std::path::{Path, PathBuf};

use morphboat_core::config::{load_toml, VesselConfig};
use morphboat_core::control::reference::Shape;
use morphboat_core::mission::{DriverOptions, MissionOptions, SiteGeometry};
use morphboat_core::sim::maneuver::ManeuverOptions;
use morphboat_core::sim::scenario::ScenarioConfig;
use morphboat_core::sim::trials::{ControllerKind, DockingOptions, Form, Water};
use morphboat_core::sysid::{ManeuverKind, DEFAULT_LENGTHS};
use morphboat_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub vessel: VesselConfig,
    pub simulate: SimulateSection,
    pub identify: IdentifySection,
    pub track: TrackSection,
    pub dock: DockSection,
    pub bridge: BridgeSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    /// Full scenario; without one, a single NMPC square lap is run.
    pub scenario: Option<ScenarioConfig>,
    /// Replaces the scenario's wave field with a preset seeded by `seed`.
    pub water: Option<Water>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogSource {
    pub path: PathBuf,
    pub kind: ManeuverKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentifySection {
    pub lengths: Vec<f64>,
    /// Maneuver length, s.
    pub duration: f64,
    pub maneuver: ManeuverOptions,
    /// Imported logs; when non-empty they replace the synthetic sweep and
    /// `lengths` selects which expansion lengths to keep.
    pub logs: Vec<LogSource>,
}

impl Default for IdentifySection {
    fn default() -> Self {
        Self {
            lengths: DEFAULT_LENGTHS.to_vec(),
            duration: 20.0,
            maneuver: ManeuverOptions::default(),
            logs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackSection {
    pub shapes: Vec<Shape>,
    pub controllers: Vec<ControllerKind>,
    pub forms: Vec<Form>,
    pub trials: usize,
}

impl Default for TrackSection {
    fn default() -> Self {
        Self {
            shapes: vec![Shape::Circle, Shape::Square, Shape::Hourglass],
            controllers: vec![ControllerKind::Nmpc, ControllerKind::Pid],
            forms: Form::ALL.to_vec(),
            trials: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DockSection {
    pub forms: Vec<Form>,
    pub water: Water,
    pub repetitions: usize,
    pub options: DockingOptions,
}

impl Default for DockSection {
    fn default() -> Self {
        Self {
            forms: Form::ALL.to_vec(),
            water: Water::Calm,
            repetitions: 20,
            options: DockingOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BridgeSection {
    pub water: Water,
    pub site: SiteGeometry,
    pub mission: MissionOptions,
    pub driver: DriverOptions,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub form: Option<Form>,
    pub controller: Option<ControllerKind>,
    pub shape: Option<Shape>,
    pub water: Option<Water>,
    pub repetitions: Option<usize>,
    pub blocks: Option<usize>,
    pub lengths: Option<Vec<f64>>,
}

impl RunConfig {
    /// Merges the files in order (later files win per top-level section)
    /// and then applies the overrides.
    pub fn resolve(paths: &[PathBuf], overrides: &Overrides) -> Result<Self> {
        let mut table = toml::Table::new();
        for path in paths {
            let file: toml::Table = load_toml(path).map_err(|e| at_path(path, e))?;
            merge(&mut table, file);
        }
        let mut cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("<config>", e.message().to_string()))?;
        cfg.apply(overrides);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(form) = o.form {
            self.track.forms = vec![form];
            self.dock.forms = vec![form];
        }
        if let Some(c) = o.controller {
            self.track.controllers = vec![c];
        }
        if let Some(s) = o.shape {
            self.track.shapes = vec![s];
        }
        if let Some(w) = o.water {
            self.simulate.water = Some(w);
            self.dock.water = w;
            self.bridge.water = w;
        }
        if let Some(n) = o.repetitions {
            self.dock.repetitions = n;
        }
        if let Some(n) = o.blocks {
            self.bridge.site.blocks = n;
        }
        if let Some(l) = &o.lengths {
            self.identify.lengths = l.clone();
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<config>", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let id = &self.identify;
        if id.lengths.iter().any(|l| !(0.0..=0.5).contains(l)) {
            return Err(Error::config(
                "identify.lengths",
                "every length must lie in [0, 0.5]",
            ));
        }
        if !(id.duration > 0.0) {
            return Err(Error::config("identify.duration", "must be positive"));
        }
        if !(0.0..1.0).contains(&id.maneuver.noise) {
            return Err(Error::config(
                "identify.maneuver.noise",
                "must lie in [0, 1)",
            ));
        }
        for s in &self.track.shapes {
            if !matches!(s, Shape::Circle | Shape::Square | Shape::Hourglass) {
                return Err(Error::config(
                    "track.shapes",
                    format!("`{s}` is not a tracking shape"),
                ));
            }
        }
        if self.track.trials == 0 {
            return Err(Error::config("track.trials", "need at least one trial"));
        }
        Ok(())
    }
}

fn at_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Config { key, message } => {
            Error::config(format!("{}: {key}", path.display()), message)
        }
        other => other,
    }
}

/// Recursive table merge; scalars and arrays from `src` replace those in `dst`.
fn merge(dst: &mut toml::Table, src: toml::Table) {
    for (k, v) in src {
        match (dst.get_mut(&k), v) {
            (Some(toml::Value::Table(d)), toml::Value::Table(s)) => merge(d, s),
            (_, v) => {
                dst.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn flags_beat_files_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "a.toml",
            "seed = 4\n[dock]\nrepetitions = 7\nwater = \"turbulent\"\n",
        );
        let b = write(dir.path(), "b.toml", "[dock]\nrepetitions = 9\n");
        let o = Overrides {
            seed: Some(11),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&[a, b], &o).unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.dock.repetitions, 9);
        assert_eq!(cfg.dock.water, Water::Turbulent);
        assert_eq!(cfg.track.trials, 3);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.toml", "[dock]\nreps = 7\n");
        assert!(matches!(
            RunConfig::resolve(&[a], &Overrides::default()),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn effective_config_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.apply(&Overrides {
            form: Some(Form::Expanded),
            lengths: Some(vec![0.0, 0.25, 0.5]),
            ..Default::default()
        });
        let back: RunConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
