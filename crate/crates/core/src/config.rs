//! Key-value (TOML) configuration files.
//!
//! Every section and key is optional; omitted values fall back to the
//! built-in defaults. Unknown keys are rejected. Validation reports the
//! first violated constraint together with its dotted key path.
//!
//! Vessel schema:
//!
//! ```toml
//! [mechanism]
//! rod_lengths = [0.19, 0.19, 0.19, 0.19]   # l1..l4, m
//! y_p0 = 0.0                               # m
//! y_p4 = 0.0                               # m
//! theta_min_deg = 0.0
//! theta_max_deg = 70.0
//!
//! [params]                                 # c2 l² + c1 l + c0
//! m12 = [0.11317070, 8.13430784, 22.82839307]
//! m3  = [0.13027175, 1.88878483, 7.57931479]
//! xuv = [-1.01327442, 9.75583033, 19.79519544]
//! nr  = [0.21534853, 1.19699306, 2.27478185]
//!
//! [thrusters]
//! arm_offset = 0.4435                      # L = l + arm_offset
//! f_max = 6.0                              # N per thruster
//!
//! [propulsion]
//! knots = [[0.061, -6.0], ...]             # (duty, N); default: synthetic table
//!
//! [sim]
//! dt = 0.02                                # s
//! max_expansion_rate = 0.05                # m/s
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::vessel::mechanism::GeometrySpec;
use crate::vessel::{
    MechanismGeometry, ParamPolynomials, PropulsionTable, Quadratic, ThrusterLayout, VesselModel,
};
use crate::{Error, Result};

/// Reads and parses a TOML file into `T`.
pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_toml(&text)
}

pub fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let key = e
            .span()
            .map(|s| format!("line {}", text[..s.start].lines().count().max(1)))
            .unwrap_or_else(|| "<root>".into());
        Error::config(key, message)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MechanismSection {
    pub rod_lengths: [f64; 4],
    pub y_p0: f64,
    pub y_p4: f64,
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
}

impl Default for MechanismSection {
    fn default() -> Self {
        let g = GeometrySpec::default();
        Self {
            rod_lengths: g.rod_lengths,
            y_p0: g.y_p0,
            y_p4: g.y_p4,
            theta_min_deg: g.theta_min.to_degrees(),
            theta_max_deg: g.theta_max.to_degrees(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub m12: [f64; 3],
    pub m3: [f64; 3],
    pub xuv: [f64; 3],
    pub nr: [f64; 3],
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self::from(&ParamPolynomials::default())
    }
}

impl From<&ParamPolynomials> for ParamsSection {
    fn from(p: &ParamPolynomials) -> Self {
        Self {
            m12: p.m12.coefficients(),
            m3: p.m3.coefficients(),
            xuv: p.xuv.coefficients(),
            nr: p.nr.coefficients(),
        }
    }
}

impl ParamsSection {
    pub fn polynomials(&self) -> ParamPolynomials {
        let q = |c: [f64; 3]| Quadratic::new(c[0], c[1], c[2]);
        ParamPolynomials {
            m12: q(self.m12),
            m3: q(self.m3),
            xuv: q(self.xuv),
            nr: q(self.nr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PropulsionSection {
    pub knots: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub max_expansion_rate: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: 0.02,
            max_expansion_rate: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct VesselConfig {
    pub mechanism: MechanismSection,
    pub params: ParamsSection,
    pub thrusters: ThrusterLayout,
    pub propulsion: PropulsionSection,
    pub sim: SimSection,
}

impl VesselConfig {
    pub fn load(path: &Path) -> Result<Self> {
        load_toml(path)
    }

    /// Validates every invariant and assembles the vessel model.
    pub fn build(&self) -> Result<VesselModel> {
        let m = &self.mechanism;
        for (i, l) in m.rod_lengths.iter().enumerate() {
            if !(l.is_finite() && *l > 0.0) {
                return Err(Error::config(
                    format!("mechanism.rod_lengths[{i}]"),
                    format!("rod length must be positive, got {l}"),
                ));
            }
        }
        if !(0.0 <= m.theta_min_deg && m.theta_min_deg < m.theta_max_deg && m.theta_max_deg < 90.0)
        {
            return Err(Error::config(
                "mechanism.theta_max_deg",
                "need 0 <= theta_min_deg < theta_max_deg < 90",
            ));
        }
        let geometry = MechanismGeometry::new(GeometrySpec {
            rod_lengths: m.rod_lengths,
            y_p0: m.y_p0,
            y_p4: m.y_p4,
            theta_min: m.theta_min_deg.to_radians(),
            theta_max: m.theta_max_deg.to_radians(),
        })
        .map_err(|e| Error::config("mechanism", e.to_string()))?;

        let polynomials = self.params.polynomials();
        for (name, q) in ["m12", "m3", "xuv", "nr"]
            .iter()
            .zip(polynomials.families())
        {
            for i in 0..=100 {
                let l = 0.5 * i as f64 / 100.0;
                let value = q.eval(l);
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::config(
                        format!("params.{name}"),
                        format!("evaluates to {value} at l = {l}; must stay positive on [0, 0.5]"),
                    ));
                }
            }
        }

        let t = self.thrusters;
        if !(t.f_max.is_finite() && t.f_max > 0.0) {
            return Err(Error::config("thrusters.f_max", "must be positive"));
        }
        if !(t.arm_offset.is_finite() && t.arm_offset > 0.0) {
            return Err(Error::config("thrusters.arm_offset", "must be positive"));
        }

        let propulsion = match &self.propulsion.knots {
            Some(knots) => {
                let table = PropulsionTable::new(knots.clone())?;
                let last = knots[knots.len() - 1].1;
                if knots[0].1 > -t.f_max || last < t.f_max {
                    return Err(Error::config(
                        "propulsion.knots",
                        format!("table must cover [-{0}, {0}] N", t.f_max),
                    ));
                }
                table
            }
            None => PropulsionTable::synthetic(t.f_max),
        };

        let s = &self.sim;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            return Err(Error::config("sim.dt", "must be positive"));
        }
        if !(s.max_expansion_rate.is_finite() && s.max_expansion_rate > 0.0) {
            return Err(Error::config("sim.max_expansion_rate", "must be positive"));
        }

        Ok(VesselModel {
            geometry,
            polynomials,
            thrusters: t,
            propulsion,
            dt: s.dt,
            max_expansion_rate: s.max_expansion_rate,
        })
    }
}
