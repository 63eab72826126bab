//! Browser bindings for the interactive demo page in `www/`.
//!
//! Every export takes and returns JSON strings so the page needs no
//! generated type glue. The logic lives in plain functions that are tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

// Validation is written as `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use tetherkit::drag::{drag_force, DragModelParams};
use tetherkit::equilibrium::TetherDragSpec;
use tetherkit::optimizer::{operating_point, optimize_cable, CruiseCondition, OptimizeOptions};
use tetherkit::power::DroneConfig;
use tetherkit::presets;
use tetherkit::report::to_json;
use tetherkit::tether::{ConductorMaterial, InsulationSpec, TetherSpec};

/// System parameters adjustable from the page. Missing fields take the
/// reference system's values.
#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct SystemParams {
    pub drone_mass_kg: f64,
    pub motor: String,
    pub material: String,
    pub length_m: f64,
    pub supply_voltage_v: f64,
    pub min_converter_voltage_v: f64,
    pub cruise_speed_ms: f64,
    pub allow_below_headroom: bool,
}

impl Default for SystemParams {
    fn default() -> Self {
        let drone = presets::reference_drone();
        let tether = presets::reference_tether(1.0);
        Self {
            drone_mass_kg: drone.drone_mass,
            motor: drone.motor_curve.name().to_string(),
            material: tether.material.name.clone(),
            length_m: tether.length,
            supply_voltage_v: tether.supply_voltage,
            min_converter_voltage_v: tether.min_converter_voltage,
            cruise_speed_ms: presets::REFERENCE_CRUISE_SPEED,
            allow_below_headroom: false,
        }
    }
}

impl SystemParams {
    fn parse(json: &str) -> Result<Self, String> {
        if json.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_json::from_str(json).map_err(|e| format!("invalid parameters: {e}"))
    }

    fn build(&self) -> Result<(DroneConfig, TetherSpec), String> {
        let curve = presets::motor_curve(&self.motor)
            .ok_or_else(|| format!("unknown motor `{}`", self.motor))?;
        let material = ConductorMaterial::builtin(&self.material)
            .ok_or_else(|| format!("unknown material `{}`", self.material))?;
        let drone = DroneConfig {
            drone_mass: self.drone_mass_kg,
            ..presets::reference_drone().with_motor(curve)
        };
        drone.validate().map_err(|e| e.to_string())?;
        let tether = TetherSpec::new(
            material,
            1.0,
            InsulationSpec::default(),
            self.length_m,
            self.supply_voltage_v,
            self.min_converter_voltage_v,
        )
        .map_err(|e| e.to_string())?;
        Ok((drone, tether))
    }

    fn cruise(&self) -> Option<CruiseCondition> {
        (self.cruise_speed_ms > 0.0).then(|| CruiseCondition {
            speed: self.cruise_speed_ms,
            drag_model: DragModelParams::published(),
            tether_drag: TetherDragSpec::default(),
        })
    }
}

/// Names of the bundled motor curves.
pub fn motor_names() -> String {
    serde_json::to_string(&presets::MOTOR_NAMES).expect("string list serializes")
}

/// Full cable report, including the area sweep, for the given parameters.
pub fn cable_report(params_json: &str) -> Result<String, String> {
    let params = SystemParams::parse(params_json)?;
    let (drone, tether) = params.build()?;
    let options = OptimizeOptions {
        allow_below_headroom: params.allow_below_headroom,
        ..OptimizeOptions::default()
    };
    let report = optimize_cable(&drone, &tether, params.cruise().as_ref(), &options)
        .map_err(|e| e.to_string())?;
    to_json(&report).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
struct DragCurves {
    speed_ms: Vec<f64>,
    force_n: Vec<f64>,
    quadratic_only_n: Vec<f64>,
}

/// Drag force over `[-v_max, v_max]` at a fixed pitch, with and without the
/// linear airspeed term.
pub fn drag_curves(
    front_area_m2: f64,
    top_area_m2: f64,
    linear_term_ms: f64,
    pitch_deg: f64,
    v_max: f64,
    points: usize,
) -> Result<String, String> {
    if !(v_max > 0.0) || points < 2 {
        return Err("need v_max > 0 and at least two points".into());
    }
    let model = DragModelParams::new(
        front_area_m2,
        top_area_m2,
        linear_term_ms,
        tetherkit::SEA_LEVEL_AIR_DENSITY,
    );
    model.validate().map_err(|e| e.to_string())?;
    let quadratic = DragModelParams {
        linear_term: 0.0,
        ..model.clone()
    };
    let pitch = pitch_deg.to_radians();
    let speed_ms: Vec<f64> = (0..points)
        .map(|i| -v_max + 2.0 * v_max * i as f64 / (points - 1) as f64)
        .collect();
    let curves = DragCurves {
        force_n: speed_ms
            .iter()
            .map(|&v| drag_force(&model, v, pitch, None))
            .collect(),
        quadratic_only_n: speed_ms
            .iter()
            .map(|&v| drag_force(&quadratic, v, pitch, None))
            .collect(),
        speed_ms,
    };
    to_json(&curves).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
struct SpeedSweep {
    conductor_area_mm2: f64,
    speed_ms: Vec<f64>,
    pitch_deg: Vec<Option<f64>>,
    p_total_w: Vec<Option<f64>>,
}

/// Equilibrium pitch and supply power against speed for one conductor
/// area, using the published drag model.
pub fn speed_sweep(
    params_json: &str,
    area_mm2: f64,
    v_max: f64,
    points: usize,
) -> Result<String, String> {
    if !(area_mm2 > 0.0 && v_max > 0.0) || points < 2 {
        return Err("need area > 0, v_max > 0 and at least two points".into());
    }
    let params = SystemParams::parse(params_json)?;
    let (drone, tether) = params.build()?;
    let tether = tether.with_area(area_mm2);
    let speed_ms: Vec<f64> = (0..points)
        .map(|i| v_max * i as f64 / (points - 1) as f64)
        .collect();
    let mut pitch_deg = Vec::with_capacity(points);
    let mut p_total_w = Vec::with_capacity(points);
    for &v in &speed_ms {
        let cruise = CruiseCondition {
            speed: v,
            drag_model: DragModelParams::published(),
            tether_drag: TetherDragSpec::default(),
        };
        match operating_point(&drone, &tether, Some(&cruise)) {
            Ok(p) => {
                pitch_deg.push(Some(p.pitch.to_degrees()));
                p_total_w.push(p.power.filter(|b| b.feasible).map(|b| b.p_total));
            }
            Err(_) => {
                pitch_deg.push(None);
                p_total_w.push(None);
            }
        }
    }
    to_json(&SpeedSweep {
        conductor_area_mm2: area_mm2,
        speed_ms,
        pitch_deg,
        p_total_w,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = motorNames)]
pub fn motor_names_js() -> String {
    motor_names()
}

#[wasm_bindgen(js_name = cableReport)]
pub fn cable_report_js(params_json: &str) -> Result<String, JsError> {
    cable_report(params_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = dragCurves)]
pub fn drag_curves_js(
    front_area_m2: f64,
    top_area_m2: f64,
    linear_term_ms: f64,
    pitch_deg: f64,
    v_max: f64,
    points: usize,
) -> Result<String, JsError> {
    drag_curves(
        front_area_m2,
        top_area_m2,
        linear_term_ms,
        pitch_deg,
        v_max,
        points,
    )
    .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = speedSweep)]
pub fn speed_sweep_js(
    params_json: &str,
    area_mm2: f64,
    v_max: f64,
    points: usize,
) -> Result<String, JsError> {
    speed_sweep(params_json, area_mm2, v_max, points).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn default_parameters_reproduce_reference_report() {
        let report: Value = serde_json::from_str(&cable_report("").unwrap()).unwrap();
        let area = report["optimal_area"].as_f64().unwrap();
        assert!((area - 1.09).abs() / 1.09 < 0.15);
        assert_eq!(report["curves"].as_array().unwrap().len(), 256);
    }

    #[test]
    fn partial_parameters_override_defaults() {
        let light: Value =
            serde_json::from_str(&cable_report(r#"{"drone_mass_kg": 1.2}"#).unwrap()).unwrap();
        let heavy: Value =
            serde_json::from_str(&cable_report(r#"{"drone_mass_kg": 2.2}"#).unwrap()).unwrap();
        assert!(light["optimal_area"].as_f64() < heavy["optimal_area"].as_f64());
    }

    #[test]
    fn bad_parameters_are_reported() {
        assert!(cable_report(r#"{"motor": "nope"}"#)
            .unwrap_err()
            .contains("unknown motor"));
        assert!(cable_report(r#"{"supply_voltage_v": 20}"#).is_err());
        assert!(cable_report("{not json").is_err());
    }

    #[test]
    fn drag_curves_are_odd_and_linear_term_adds_force() {
        let c: Value =
            serde_json::from_str(&drag_curves(1.492e-2, 1.368e-2, 19.43, 10.0, 12.0, 25).unwrap())
                .unwrap();
        let f = c["force_n"].as_array().unwrap();
        let q = c["quadratic_only_n"].as_array().unwrap();
        assert_eq!(f.len(), 25);
        assert_eq!(f[12].as_f64().unwrap(), 0.0);
        assert!((f[0].as_f64().unwrap() + f[24].as_f64().unwrap()).abs() < 1e-12);
        assert!(f[24].as_f64().unwrap() > q[24].as_f64().unwrap());
        assert!(drag_curves(-1.0, 1.0, 0.0, 0.0, 1.0, 5).is_err());
    }

    #[test]
    fn speed_sweep_pitch_grows_with_speed() {
        let s: Value = serde_json::from_str(&speed_sweep("", 1.09, 20.0, 21).unwrap()).unwrap();
        let pitch: Vec<f64> = s["pitch_deg"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert_eq!(pitch[0], 0.0);
        assert!(pitch.windows(2).all(|w| w[1] > w[0]));
        assert!(speed_sweep("", 0.0, 20.0, 21).is_err());
    }

    #[test]
    fn motor_list_matches_presets() {
        let names: Vec<String> = serde_json::from_str(&motor_names()).unwrap();
        assert_eq!(names.len(), presets::MOTOR_NAMES.len());
    }
}
