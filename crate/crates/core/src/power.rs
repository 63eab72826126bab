//! Thrust and power balance of a tethered drone.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::motor::MotorCurve;
use crate::tether::TetherSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneConfig {
    /// Drone mass in kg, without the tether.
    pub drone_mass: f64,
    pub motor_count: u32,
    /// Step-down converter efficiency in (0, 1].
    pub dc_dc_efficiency: f64,
    /// Flight controller and payload power in W.
    pub additional_power: f64,
    pub motor_curve: MotorCurve,
}

impl DroneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.drone_mass > 0.0) {
            return Err(Error::Validation("drone mass must be positive".into()));
        }
        if self.motor_count == 0 {
            return Err(Error::Validation("motor count must be at least 1".into()));
        }
        if !(self.dc_dc_efficiency > 0.0 && self.dc_dc_efficiency <= 1.0) {
            return Err(Error::Validation(
                "converter efficiency must lie in (0, 1]".into(),
            ));
        }
        if !(self.additional_power >= 0.0) {
            return Err(Error::Validation(
                "additional power must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn with_motor(&self, motor_curve: MotorCurve) -> Self {
        Self {
            motor_curve,
            ..self.clone()
        }
    }
}

/// Thrust per motor available from the tether's maximum power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvailableThrust {
    /// kgf per motor.
    pub thrust: f64,
    /// Power per motor that was fed into the motor curve, W.
    pub motor_power: f64,
    /// The motor curve clamped at its maximum thrust.
    pub saturated: bool,
}

pub fn available_thrust(drone: &DroneConfig, tether: &TetherSpec) -> AvailableThrust {
    let available = tether.available_power().power;
    let surplus = available - drone.additional_power;
    if !(surplus > 0.0) {
        return AvailableThrust {
            thrust: 0.0,
            motor_power: 0.0,
            saturated: false,
        };
    }
    let motor_power = drone.dc_dc_efficiency * surplus / f64::from(drone.motor_count);
    let at = drone
        .motor_curve
        .thrust_at(motor_power)
        .expect("positive motor power is always in domain");
    AvailableThrust {
        thrust: at.thrust,
        motor_power,
        saturated: at.saturated,
    }
}

/// Thrust per motor in kgf needed to carry drone and tether at `pitch`
/// radians, with zero roll.
pub fn necessary_thrust(drone: &DroneConfig, tether_mass: f64, pitch: f64) -> Result<f64> {
    if !(pitch.abs() < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "pitch {pitch} rad must be strictly within ±π/2"
        )));
    }
    Ok((drone.drone_mass + tether_mass) / (pitch.cos() * f64::from(drone.motor_count)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBreakdown {
    /// Drone-side demand referred to the tether, W.
    pub p_uav: f64,
    /// Resistive tether loss, W. Infinite when infeasible.
    pub p_loss: f64,
    /// Ground-side supply power, W. Infinite when infeasible.
    pub p_total: f64,
    /// A. Infinite when infeasible.
    pub tether_current: f64,
    pub feasible: bool,
}

/// Solves `R·I² − U·I + P_uav = 0` for the smaller current root.
///
/// Uses `P_total = 2·U·P_uav / (U + √(U² − 4·R·P_uav))`, which stays well
/// conditioned as `R → 0`.
pub fn supply_power(p_uav: f64, supply_voltage: f64, resistance: f64) -> PowerBreakdown {
    let u = supply_voltage;
    let disc = u * u - 4.0 * resistance * p_uav;
    if disc < 0.0 {
        return PowerBreakdown {
            p_uav,
            p_loss: f64::INFINITY,
            p_total: f64::INFINITY,
            tether_current: f64::INFINITY,
            feasible: false,
        };
    }
    let p_total = 2.0 * u * p_uav / (u + disc.sqrt());
    let current = p_total / u;
    PowerBreakdown {
        p_uav,
        p_loss: current * current * resistance,
        p_total,
        tether_current: current,
        feasible: true,
    }
}

/// Drone-side demand in W for carrying the tether at `pitch`, including
/// the converter loss and the additional load.
pub fn uav_power(drone: &DroneConfig, tether: &TetherSpec, pitch: f64) -> Result<f64> {
    let thrust = necessary_thrust(drone, tether.mass(), pitch)?;
    let per_motor = drone.motor_curve.power_for_thrust(thrust)?;
    Ok(
        (f64::from(drone.motor_count) * per_motor + drone.additional_power)
            / drone.dc_dc_efficiency,
    )
}

pub fn total_power(drone: &DroneConfig, tether: &TetherSpec, pitch: f64) -> Result<PowerBreakdown> {
    let p_uav = uav_power(drone, tether, pitch)?;
    Ok(supply_power(
        p_uav,
        tether.supply_voltage,
        tether.resistance(),
    ))
}
