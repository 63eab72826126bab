//! Conductor cross-section selection.
//!
//! Two candidate areas are located numerically on a log-spaced scan that is
//! refined locally:
//!
//! - the headroom area, where the thrust available from the tether's
//!   maximum power first reaches twice the hover thrust, and
//! - the min-power area, which minimises ground-side supply power (in hover,
//!   or in forward flight at the cruise speed with the pitch re-solved for
//!   every candidate tether).
//!
//! The larger of the two is the recommended conductor.

use serde::Serialize;

use crate::drag::DragModelParams;
use crate::equilibrium::{solve_equilibrium_pitch, TetherDragSpec};
use crate::motor::MotorCurve;
use crate::power::{available_thrust, necessary_thrust, total_power, DroneConfig, PowerBreakdown};
use crate::scalar::{bisect, golden_section, log_space};
use crate::tether::TetherSpec;
use crate::{Error, Result};

/// Required ratio of available to hover thrust.
pub const HEADROOM_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBounds {
    /// mm²
    pub min_area: f64,
    /// mm²
    pub max_area: f64,
    pub scan_points: usize,
    /// Refinement tolerance on the area, mm².
    pub tolerance: f64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self {
            min_area: 0.05,
            max_area: 20.0,
            scan_points: 256,
            tolerance: 1e-4,
        }
    }
}

impl SearchBounds {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_area > 0.0 && self.max_area > self.min_area) {
            return Err(Error::Validation(
                "search bounds must satisfy 0 < min_area < max_area".into(),
            ));
        }
        if self.scan_points < 3 {
            return Err(Error::Validation("scan needs at least 3 points".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Validation(
                "search tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        log_space(self.min_area, self.max_area, self.scan_points)
    }
}

/// Forward-flight condition for the min-power search.
#[derive(Debug, Clone, PartialEq)]
pub struct CruiseCondition {
    /// m/s
    pub speed: f64,
    pub drag_model: DragModelParams,
    pub tether_drag: TetherDragSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OptimizeOptions {
    pub bounds: SearchBounds,
    /// Accept the min-power area even below the headroom area.
    pub allow_below_headroom: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeadroomPoint {
    pub area: Option<f64>,
    /// Headroom already holds at the lower search bound; `area` is that bound.
    pub always_satisfied: bool,
    /// More than one upward crossing was found; `area` is the largest.
    pub non_monotone: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinPowerPoint {
    pub area: Option<f64>,
    /// Supply power at `area`, W.
    pub power: Option<f64>,
    /// The objective did not vary over the scan.
    pub flat: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    Headroom,
    MinPower,
}

/// Available thrust minus the headroom requirement, kgf per motor.
pub fn headroom_margin(drone: &DroneConfig, tether: &TetherSpec, pitch: f64) -> Result<f64> {
    let available = available_thrust(drone, tether).thrust;
    let needed = necessary_thrust(drone, tether.mass(), pitch)?;
    Ok(available - HEADROOM_FACTOR * needed)
}

/// Pitch used for the power objective: level for hover, the equilibrium
/// pitch for forward flight.
pub fn flight_pitch(
    drone: &DroneConfig,
    tether: &TetherSpec,
    cruise: Option<&CruiseCondition>,
) -> Result<f64> {
    match cruise {
        None => Ok(0.0),
        Some(c) => solve_equilibrium_pitch(
            &c.drag_model,
            tether,
            &c.tether_drag,
            drone.drone_mass,
            c.speed,
        )
        .map(|r| r.pitch),
    }
}

/// Supply power in W for a tether, infinite when the configuration cannot
/// fly (thrust or power transfer out of reach, no equilibrium).
pub fn power_objective(
    drone: &DroneConfig,
    tether: &TetherSpec,
    cruise: Option<&CruiseCondition>,
) -> f64 {
    let Ok(pitch) = flight_pitch(drone, tether, cruise) else {
        return f64::INFINITY;
    };
    match total_power(drone, tether, pitch) {
        Ok(b) if b.feasible => b.p_total,
        _ => f64::INFINITY,
    }
}

pub fn find_headroom_area(
    drone: &DroneConfig,
    tether_template: &TetherSpec,
    pitch: f64,
    bounds: &SearchBounds,
) -> Result<HeadroomPoint> {
    bounds.validate()?;
    let margin = |area: f64| headroom_margin(drone, &tether_template.with_area(area), pitch);
    let grid = bounds.grid();
    let values = grid
        .iter()
        .map(|&a| margin(a))
        .collect::<Result<Vec<f64>>>()?;

    let upward: Vec<usize> = (0..grid.len() - 1)
        .filter(|&i| values[i] < 0.0 && values[i + 1] >= 0.0)
        .collect();
    if let Some(&i) = upward.last() {
        let root = bisect(
            |a| margin(a).unwrap_or(f64::NAN),
            grid[i],
            grid[i + 1],
            bounds.tolerance,
            0.0,
        )
        .expect("scan bracket has a sign change");
        return Ok(HeadroomPoint {
            area: Some(root.x),
            always_satisfied: false,
            non_monotone: upward.len() > 1,
        });
    }
    if values[0] >= 0.0 {
        return Ok(HeadroomPoint {
            area: Some(bounds.min_area),
            always_satisfied: true,
            non_monotone: false,
        });
    }
    Ok(HeadroomPoint {
        area: None,
        always_satisfied: false,
        non_monotone: false,
    })
}

pub fn find_min_power_area(
    drone: &DroneConfig,
    tether_template: &TetherSpec,
    cruise: Option<&CruiseCondition>,
    bounds: &SearchBounds,
) -> Result<MinPowerPoint> {
    bounds.validate()?;
    let objective = |area: f64| power_objective(drone, &tether_template.with_area(area), cruise);
    let grid = bounds.grid();
    let values: Vec<f64> = grid.iter().map(|&a| objective(a)).collect();

    let Some((best, &best_value)) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
    else {
        return Ok(MinPowerPoint {
            area: None,
            power: None,
            flat: false,
        });
    };

    let finite = values.iter().filter(|v| v.is_finite());
    let max_value = finite.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    if max_value - best_value <= 1e-12 * best_value.abs().max(1e-300) {
        return Ok(MinPowerPoint {
            area: Some(grid[best]),
            power: Some(best_value),
            flat: true,
        });
    }

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (area, power) = golden_section(objective, lo, hi, bounds.tolerance);
    let (area, power) = if power <= best_value {
        (area, power)
    } else {
        (grid[best], best_value)
    };
    Ok(MinPowerPoint {
        area: Some(area),
        power: Some(power),
        flat: false,
    })
}

/// Thrust and power state of a tether at one flight condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    /// m/s
    pub speed: f64,
    /// rad
    pub pitch: f64,
    /// kgf per motor
    pub t_available: f64,
    pub t_available_saturated: bool,
    /// kgf per motor; absent fields never occur, infeasible thrust is
    /// reported through `feasible`.
    pub t_necessary: f64,
    pub power: Option<PowerBreakdown>,
    pub feasible: bool,
    /// N
    pub drone_drag: f64,
    /// N
    pub tether_drag: f64,
}

/// One sample of the area sweep used for plotting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub area_mm2: f64,
    pub t_available_kgf: f64,
    /// Hover thrust per motor.
    pub t_necessary_kgf: f64,
    /// Thrust per motor in forward flight at the cruise speed.
    pub t_necessary_cruise_kgf: Option<f64>,
    /// Supply power objective (cruise when configured, else hover).
    pub p_total_w: f64,
    pub p_total_hover_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CableReport {
    pub optimal_area: Option<f64>,
    pub headroom_area: Option<f64>,
    pub headroom_always_satisfied: bool,
    pub headroom_non_monotone: bool,
    pub min_power_area: Option<f64>,
    pub min_power_flat: bool,
    pub chosen_rule: Option<SelectionRule>,
    /// kg
    pub tether_mass: Option<f64>,
    /// Drone plus tether, kg.
    pub system_mass: Option<f64>,
    /// Supply power in hover at the chosen area, W.
    pub hover_power: Option<f64>,
    /// Supply power at cruise speed at the chosen area, W.
    pub cruise_power: Option<f64>,
    pub cruise_speed: f64,
    pub hover: Option<OperatingPoint>,
    pub cruise: Option<OperatingPoint>,
    pub feasible: bool,
    pub diagnostics: Vec<String>,
    pub curves: Vec<CurveSample>,
}

pub fn operating_point(
    drone: &DroneConfig,
    tether: &TetherSpec,
    cruise: Option<&CruiseCondition>,
) -> Result<OperatingPoint> {
    let (speed, pitch, drone_drag, tether_drag) = match cruise {
        None => (0.0, 0.0, 0.0, 0.0),
        Some(c) => {
            let eq = solve_equilibrium_pitch(
                &c.drag_model,
                tether,
                &c.tether_drag,
                drone.drone_mass,
                c.speed,
            )?;
            (c.speed, eq.pitch, eq.drone_drag, eq.tether_drag)
        }
    };
    let available = available_thrust(drone, tether);
    let t_necessary = necessary_thrust(drone, tether.mass(), pitch)?;
    let power = match total_power(drone, tether, pitch) {
        Ok(b) => Some(b),
        Err(Error::InfeasibleThrust { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(OperatingPoint {
        speed,
        pitch,
        t_available: available.thrust,
        t_available_saturated: available.saturated,
        t_necessary,
        feasible: power.is_some_and(|p| p.feasible),
        power,
        drone_drag,
        tether_drag,
    })
}

pub fn sample_curves(
    drone: &DroneConfig,
    tether_template: &TetherSpec,
    cruise: Option<&CruiseCondition>,
    bounds: &SearchBounds,
) -> Result<Vec<CurveSample>> {
    bounds
        .grid()
        .into_iter()
        .map(|area| {
            let tether = tether_template.with_area(area);
            let hover_power = power_objective(drone, &tether, None);
            let cruise_thrust = match cruise {
                None => None,
                Some(_) => match flight_pitch(drone, &tether, cruise) {
                    Ok(p) => Some(necessary_thrust(drone, tether.mass(), p)?),
                    Err(_) => None,
                },
            };
            Ok(CurveSample {
                area_mm2: area,
                t_available_kgf: available_thrust(drone, &tether).thrust,
                t_necessary_kgf: necessary_thrust(drone, tether.mass(), 0.0)?,
                t_necessary_cruise_kgf: cruise_thrust,
                p_total_w: match cruise {
                    None => hover_power,
                    Some(_) => power_objective(drone, &tether, cruise),
                },
                p_total_hover_w: hover_power,
            })
        })
        .collect()
}

/// Picks the larger candidate, or the min-power one when operating below
/// the headroom bound is allowed.
pub fn select_area(
    headroom: Option<f64>,
    min_power: Option<f64>,
    allow_below_headroom: bool,
) -> Option<(f64, SelectionRule)> {
    match (headroom, min_power) {
        (Some(h), Some(m)) if allow_below_headroom || m >= h => Some((m, SelectionRule::MinPower)),
        (Some(h), Some(_)) => Some((h, SelectionRule::Headroom)),
        (Some(h), None) => Some((h, SelectionRule::Headroom)),
        (None, Some(m)) => Some((m, SelectionRule::MinPower)),
        (None, None) => None,
    }
}

pub fn optimize_cable(
    drone: &DroneConfig,
    tether_template: &TetherSpec,
    cruise: Option<&CruiseCondition>,
    options: &OptimizeOptions,
) -> Result<CableReport> {
    drone.validate()?;
    tether_template.validate()?;
    let bounds = &options.bounds;
    let headroom = find_headroom_area(drone, tether_template, 0.0, bounds)?;
    let min_power = find_min_power_area(drone, tether_template, cruise, bounds)?;
    let curves = sample_curves(drone, tether_template, cruise, bounds)?;

    let mut diagnostics = Vec::new();
    if headroom.area.is_none() {
        diagnostics.push(format!(
            "available thrust never reaches {HEADROOM_FACTOR}x hover thrust in [{}, {}] mm²",
            bounds.min_area, bounds.max_area
        ));
    }
    if headroom.always_satisfied {
        diagnostics.push("thrust headroom already holds at the lower search bound".into());
    }
    if headroom.non_monotone {
        diagnostics.push("headroom margin crosses zero upward more than once".into());
    }
    if min_power.area.is_none() {
        diagnostics.push("no cross-section in the search interval can power the drone".into());
    }
    if min_power.flat {
        diagnostics.push("supply power does not depend on the cross-section".into());
    }

    let selected = select_area(headroom.area, min_power.area, options.allow_below_headroom);
    let cruise_speed = cruise.map_or(0.0, |c| c.speed);
    let Some((area, rule)) = selected else {
        return Ok(CableReport {
            optimal_area: None,
            headroom_area: None,
            headroom_always_satisfied: false,
            headroom_non_monotone: false,
            min_power_area: None,
            min_power_flat: false,
            chosen_rule: None,
            tether_mass: None,
            system_mass: None,
            hover_power: None,
            cruise_power: None,
            cruise_speed,
            hover: None,
            cruise: None,
            feasible: false,
            diagnostics,
            curves,
        });
    };

    let tether = tether_template.with_area(area);
    let hover = operating_point(drone, &tether, None)?;
    let cruise_point = match cruise {
        Some(c) => match operating_point(drone, &tether, Some(c)) {
            Ok(p) => Some(p),
            Err(Error::NoEquilibrium { .. }) => {
                diagnostics.push(format!("no forward-flight equilibrium at {} m/s", c.speed));
                None
            }
            Err(e) => return Err(e),
        },
        None => None,
    };
    let power_of = |p: &OperatingPoint| p.power.filter(|b| b.feasible).map(|b| b.p_total);
    let headroom_ok = headroom.area.is_some() || options.allow_below_headroom;
    let feasible = headroom_ok
        && hover.feasible
        && match cruise {
            Some(_) => cruise_point.is_some_and(|p| p.feasible),
            None => true,
        };
    if !hover.feasible {
        diagnostics.push("the selected tether cannot sustain hover".into());
    }

    Ok(CableReport {
        optimal_area: Some(area),
        headroom_area: headroom.area,
        headroom_always_satisfied: headroom.always_satisfied,
        headroom_non_monotone: headroom.non_monotone,
        min_power_area: min_power.area,
        min_power_flat: min_power.flat,
        chosen_rule: Some(rule),
        tether_mass: Some(tether.mass()),
        system_mass: Some(drone.drone_mass + tether.mass()),
        hover_power: power_of(&hover),
        cruise_power: cruise_point.as_ref().and_then(power_of),
        cruise_speed,
        hover: Some(hover),
        cruise: cruise_point,
        feasible,
        diagnostics,
        curves,
    })
}

/// Thrust/power marker on a motor curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThrustMarker {
    /// kgf per motor
    pub thrust: f64,
    /// W per motor, absent when beyond the motor's maximum thrust.
    pub power: Option<f64>,
}

impl ThrustMarker {
    fn on(curve: &MotorCurve, thrust: f64) -> Self {
        Self {
            thrust,
            power: curve.power_for_thrust(thrust).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotorEntry {
    pub motor: String,
    pub report: Option<CableReport>,
    pub error: Option<String>,
    pub feasible: bool,
    /// Hover thrust at the chosen tether.
    pub hover_marker: Option<ThrustMarker>,
    /// Twice the hover thrust.
    pub headroom_marker: Option<ThrustMarker>,
    /// Thrust at the min-power tether in the objective's flight condition.
    pub min_power_marker: Option<ThrustMarker>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotorComparison {
    pub entries: Vec<MotorEntry>,
}

/// Runs the optimizer for each motor on a shared frame. Motors that failed
/// to load are carried through as error entries.
pub fn compare_motors(
    motors: Vec<(String, Result<MotorCurve>)>,
    drone_template: &DroneConfig,
    tether_template: &TetherSpec,
    cruise: Option<&CruiseCondition>,
    options: &OptimizeOptions,
) -> MotorComparison {
    let entries = motors
        .into_iter()
        .map(|(name, curve)| {
            let failed = |error: String| MotorEntry {
                motor: name.clone(),
                report: None,
                error: Some(error),
                feasible: false,
                hover_marker: None,
                headroom_marker: None,
                min_power_marker: None,
            };
            let curve = match curve {
                Ok(c) => c,
                Err(e) => return failed(e.to_string()),
            };
            let drone = drone_template.with_motor(curve.clone());
            let report = match optimize_cable(&drone, tether_template, cruise, options) {
                Ok(r) => r,
                Err(e) => return failed(e.to_string()),
            };
            let hover_marker = report
                .hover
                .map(|h| ThrustMarker::on(&curve, h.t_necessary));
            let headroom_marker =
                hover_marker.map(|h| ThrustMarker::on(&curve, HEADROOM_FACTOR * h.thrust));
            let min_power_marker = report.min_power_area.and_then(|area| {
                let tether = tether_template.with_area(area);
                let pitch = flight_pitch(&drone, &tether, cruise).ok()?;
                let thrust = necessary_thrust(&drone, tether.mass(), pitch).ok()?;
                Some(ThrustMarker::on(&curve, thrust))
            });
            MotorEntry {
                motor: name,
                feasible: report.feasible,
                report: Some(report),
                error: None,
                hover_marker,
                headroom_marker,
                min_power_marker,
            }
        })
        .collect();
    MotorComparison { entries }
}
