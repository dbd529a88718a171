use serde::{Deserialize, Serialize};

use crate::sim::dock::DockPort;
use crate::vessel::Pose;
use crate::{Error, Result};

/// Site description for a straight floating bridge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SiteGeometry {
    /// Center of the first block, m.
    pub bridge_origin: [f64; 2],
    /// Direction in which the bridge grows, rad.
    pub bridge_axis: f64,
    pub blocks: usize,
    pub block_width: f64,
    pub block_mass: f64,
    /// Pickup port: position and the heading held when docked there.
    pub pickup: [f64; 3],
    /// Heading held when docked at an assembly slot, rad.
    pub assembly_facing: f64,
    pub preparation_offset: f64,
    /// Usable water `[x_min, x_max, y_min, y_max]`, m.
    pub water: [f64; 4],
    pub start: [f64; 3],
}

impl Default for SiteGeometry {
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_2;
        Self {
            bridge_origin: [2.0, 0.0],
            bridge_axis: 0.0,
            blocks: 6,
            block_width: 0.4,
            block_mass: 2.0,
            pickup: [0.5, 2.5, FRAC_PI_2],
            assembly_facing: -FRAC_PI_2,
            preparation_offset: 0.4,
            water: [-1.0, 6.0, -1.0, 4.0],
            start: [0.5, 1.0, FRAC_PI_2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionPlan {
    pub start: Pose,
    pub pickup: DockPort,
    pub targets: Vec<DockPort>,
    pub preparation_offset: f64,
    pub block_width: f64,
    pub block_mass: f64,
}

/// Pose `offset` metres in front of a port, facing it.
pub fn preparation_pose(port: &DockPort, offset: f64) -> Pose {
    let (s, c) = port.facing.sin_cos();
    Pose::new(
        port.position[0] - c * offset,
        port.position[1] - s * offset,
        port.facing,
    )
}

impl MissionPlan {
    pub fn validate(&self, water: Option<[f64; 4]>) -> Result<()> {
        if !(self.block_width > 0.0) {
            return Err(Error::Planning("block width must be positive".into()));
        }
        if !(self.preparation_offset > 0.0) {
            return Err(Error::Planning(
                "preparation offset must be positive".into(),
            ));
        }
        if !(self.block_mass >= 0.0) {
            return Err(Error::Planning("block mass must be nonnegative".into()));
        }
        for i in 0..self.targets.len() {
            for j in 0..i {
                let a = self.targets[i].position;
                let b = self.targets[j].position;
                let d = (a[0] - b[0]).hypot(a[1] - b[1]);
                if d < self.block_width - 1e-9 {
                    return Err(Error::Planning(format!(
                        "slots {j} and {i} overlap: centers {d:.3} m apart, blocks are {} m wide",
                        self.block_width
                    )));
                }
            }
        }
        if let Some([x0, x1, y0, y1]) = water {
            let inside = |p: [f64; 2]| p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1;
            let mut points = vec![self.pickup.position, [self.start.x, self.start.y]];
            let prep = preparation_pose(&self.pickup, self.preparation_offset);
            points.push([prep.x, prep.y]);
            for t in &self.targets {
                let prep = preparation_pose(t, self.preparation_offset);
                points.push(t.position);
                points.push([prep.x, prep.y]);
            }
            if let Some(p) = points.into_iter().find(|p| !inside(*p)) {
                return Err(Error::Planning(format!(
                    "point ({:.2}, {:.2}) lies outside the water area",
                    p[0], p[1]
                )));
            }
        }
        Ok(())
    }
}

/// Slots placed end to end along the bridge axis, one block width apart.
pub fn plan_bridge(site: &SiteGeometry) -> Result<MissionPlan> {
    if !(site.block_width > 0.0) {
        return Err(Error::Planning("block width must be positive".into()));
    }
    let (s, c) = site.bridge_axis.sin_cos();
    let targets = (0..site.blocks)
        .map(|i| {
            let d = i as f64 * site.block_width;
            DockPort::at(
                site.bridge_origin[0] + c * d,
                site.bridge_origin[1] + s * d,
                site.assembly_facing,
            )
        })
        .collect();
    let plan = MissionPlan {
        start: Pose::new(site.start[0], site.start[1], site.start[2]),
        pickup: DockPort::at(site.pickup[0], site.pickup[1], site.pickup[2]),
        targets,
        preparation_offset: site.preparation_offset,
        block_width: site.block_width,
        block_mass: site.block_mass,
    };
    plan.validate(Some(site.water))?;
    Ok(plan)
}
