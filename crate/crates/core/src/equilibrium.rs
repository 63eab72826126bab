//! Tether drag and the pitch angle of static forward flight.
//!
//! In unaccelerated flight the horizontal thrust component balances drone
//! and tether drag while the vertical component carries drone and tether:
//! `F_drone(v, θ) + F_tether(v) = (m_d + m_t)·g·tan θ`.

use serde::{Deserialize, Serialize};

use crate::drag::{self, DragModelParams};
use crate::scalar::bisect;
use crate::tether::TetherSpec;
use crate::{Error, Result, STANDARD_GRAVITY};

/// Upper end of the pitch bracket, rad.
pub const MAX_EQUILIBRIUM_PITCH: f64 = 80.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetherDragSpec {
    /// Drag coefficient of a single insulated conductor as a cylinder.
    pub cylinder_drag_coeff: f64,
    /// Reduction of the projected area for the randomly twisted pair.
    pub rotation_factor: f64,
    pub conductor_count: u32,
}

impl Default for TetherDragSpec {
    fn default() -> Self {
        Self {
            cylinder_drag_coeff: 1.0,
            rotation_factor: 0.75,
            conductor_count: 2,
        }
    }
}

impl TetherDragSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cylinder_drag_coeff > 0.0
            && self.rotation_factor > 0.0
            && self.rotation_factor <= 1.0
            && self.conductor_count > 0)
        {
            return Err(Error::Validation(
                "tether drag: coefficient and conductor count must be positive, rotation factor in (0, 1]"
                    .into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumResult {
    /// rad
    pub pitch: f64,
    /// N
    pub drone_drag: f64,
    /// N
    pub tether_drag: f64,
    /// Force imbalance at `pitch`, N.
    pub residual: f64,
}

/// Drag on the whole tether at speed `v`, all of it applied to the drone.
pub fn tether_drag(spec: &TetherSpec, drag: &TetherDragSpec, air_density: f64, v: f64) -> f64 {
    let diameter = spec.outer_diameter() * 1e-3;
    let area = drag.rotation_factor * f64::from(drag.conductor_count) * diameter * spec.length;
    0.5 * air_density * drag.cylinder_drag_coeff * area * v * v.abs()
}

/// Force imbalance `F_drone + F_tether − M·g·tan θ` at `pitch`.
pub fn force_residual(
    drone_drag: &DragModelParams,
    tether_force: f64,
    total_mass: f64,
    v: f64,
    pitch: f64,
) -> f64 {
    drag::drag_force(drone_drag, v, pitch, None) + tether_force
        - total_mass * STANDARD_GRAVITY * pitch.tan()
}

/// Solves for the forward-flight pitch at ground speed `v` in still air.
pub fn solve_equilibrium_pitch(
    drone_drag: &DragModelParams,
    tether: &TetherSpec,
    drag: &TetherDragSpec,
    drone_mass: f64,
    v: f64,
) -> Result<EquilibriumResult> {
    if !(v >= 0.0) {
        return Err(Error::Domain(format!(
            "speed must be non-negative, got {v}"
        )));
    }
    if !(drone_mass > 0.0) {
        return Err(Error::Domain(format!(
            "drone mass must be positive, got {drone_mass}"
        )));
    }
    if v == 0.0 {
        return Ok(EquilibriumResult {
            pitch: 0.0,
            drone_drag: 0.0,
            tether_drag: 0.0,
            residual: 0.0,
        });
    }
    let still = drone_drag.final_model();
    let tether_force = tether_drag(tether, drag, still.air_density, v);
    let total_mass = drone_mass + tether.mass();
    let residual = |pitch: f64| force_residual(&still, tether_force, total_mass, v, pitch);

    let root = bisect(residual, 0.0, MAX_EQUILIBRIUM_PITCH, 1e-12, 1e-10).ok_or_else(|| {
        Error::NoEquilibrium {
            speed: v,
            reason: "drag exceeds what any tilt up to 80° can balance".into(),
        }
    })?;
    Ok(EquilibriumResult {
        pitch: root.x,
        drone_drag: drag::drag_force(&still, v, root.x, None),
        tether_drag: tether_force,
        residual: root.value,
    })
}
