//! JSON system configuration.
//!
//! One file describes one system: drone, tether template, aerodynamics,
//! cruise speed and search bounds. Relative paths resolve against the
//! directory holding the config file; `builtin:<name>` selects a bundled
//! motor curve or drag model.
//!
//! ```json
//! {
//!   "drone": { "mass_kg": 1.71, "motor_count": 4, "dc_dc_efficiency": 0.9,
//!              "additional_power_w": 10, "motor_curve": "motors/x.csv" },
//!   "tether": { "material": "aluminum", "insulation_thickness_mm": 0.75,
//!               "insulation_density_g_cm3": 1.4, "length_m": 30,
//!               "supply_voltage_v": 75, "min_converter_voltage_v": 30 },
//!   "aero": { "air_density_kg_m3": 1.225, "cylinder_drag_coeff": 1.0,
//!             "rotation_factor": 0.75, "drag_model": "builtin:published" },
//!   "cruise_speed_ms": 8.333
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::drag::DragModelParams;
use crate::equilibrium::TetherDragSpec;
use crate::motor::MotorCurve;
use crate::optimizer::{CruiseCondition, OptimizeOptions, SearchBounds};
use crate::power::DroneConfig;
use crate::presets;
use crate::report::DragModelFile;
use crate::tether::{ConductorMaterial, InsulationSpec, TetherSpec};
use crate::{Error, Result, SEA_LEVEL_AIR_DENSITY};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub drone: DroneSection,
    pub tether: TetherSection,
    #[serde(default)]
    pub materials: Vec<MaterialSection>,
    #[serde(default)]
    pub aero: AeroSection,
    #[serde(default)]
    pub cruise_speed_ms: f64,
    #[serde(default)]
    pub search: SearchSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneSection {
    pub mass_kg: f64,
    pub motor_count: u32,
    pub dc_dc_efficiency: f64,
    #[serde(default)]
    pub additional_power_w: f64,
    pub motor_curve: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub name: String,
    pub specific_resistance_ohm_mm2_per_m: f64,
    pub density_g_cm3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialRef {
    Name(String),
    Custom(MaterialSection),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TetherSection {
    pub material: MaterialRef,
    #[serde(default = "default_thickness")]
    pub insulation_thickness_mm: f64,
    #[serde(default = "default_insulation_density")]
    pub insulation_density_g_cm3: f64,
    pub length_m: f64,
    pub supply_voltage_v: f64,
    pub min_converter_voltage_v: f64,
    /// Fixed cross-section for single-point evaluations; ignored by the
    /// optimizer.
    #[serde(default)]
    pub conductor_area_mm2: Option<f64>,
}

fn default_thickness() -> f64 {
    InsulationSpec::DEFAULT_THICKNESS
}

fn default_insulation_density() -> f64 {
    InsulationSpec::PVC_DENSITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DragModelRef {
    Path(String),
    Inline(DragModelFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AeroSection {
    #[serde(default = "default_air_density")]
    pub air_density_kg_m3: f64,
    #[serde(default = "default_cylinder_cd")]
    pub cylinder_drag_coeff: f64,
    #[serde(default = "default_rotation_factor")]
    pub rotation_factor: f64,
    #[serde(default)]
    pub drag_model: Option<DragModelRef>,
}

fn default_air_density() -> f64 {
    SEA_LEVEL_AIR_DENSITY
}

fn default_cylinder_cd() -> f64 {
    TetherDragSpec::default().cylinder_drag_coeff
}

fn default_rotation_factor() -> f64 {
    TetherDragSpec::default().rotation_factor
}

impl Default for AeroSection {
    fn default() -> Self {
        Self {
            air_density_kg_m3: default_air_density(),
            cylinder_drag_coeff: default_cylinder_cd(),
            rotation_factor: default_rotation_factor(),
            drag_model: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSection {
    pub min_area_mm2: f64,
    pub max_area_mm2: f64,
    pub scan_points: usize,
    pub tolerance_mm2: f64,
}

impl Default for SearchSection {
    fn default() -> Self {
        let b = SearchBounds::default();
        Self {
            min_area_mm2: b.min_area,
            max_area_mm2: b.max_area,
            scan_points: b.scan_points,
            tolerance_mm2: b.tolerance,
        }
    }
}

/// A configuration with files loaded and every invariant checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSystem {
    pub drone: DroneConfig,
    /// Tether template; its area is `conductor_area` or 1 mm².
    pub tether: TetherSpec,
    pub conductor_area: Option<f64>,
    pub air_density: f64,
    pub tether_drag: TetherDragSpec,
    pub drag_model: Option<DragModelParams>,
    pub cruise_speed: f64,
    pub options: OptimizeOptions,
}

impl ResolvedSystem {
    /// Forward-flight condition, present when the cruise speed is positive.
    pub fn cruise(&self) -> Option<CruiseCondition> {
        let drag_model = self.drag_model.clone()?;
        (self.cruise_speed > 0.0).then_some(CruiseCondition {
            speed: self.cruise_speed,
            drag_model,
            tether_drag: self.tether_drag,
        })
    }

    pub fn cruise_at(&self, speed: f64, drag_model: DragModelParams) -> CruiseCondition {
        CruiseCondition {
            speed,
            drag_model: DragModelParams {
                air_density: self.air_density,
                ..drag_model
            },
            tether_drag: self.tether_drag,
        }
    }
}

impl SystemConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::config("<config>", e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ResolvedSystem> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = Self::from_json(&text).map_err(|e| match e {
            Error::Config { message, .. } => Error::config(path.display().to_string(), message),
            other => other,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.resolve(&base)
    }

    fn material(&self) -> Result<ConductorMaterial> {
        let custom = |m: &MaterialSection, field: &str| {
            ConductorMaterial::new(
                m.name.clone(),
                m.specific_resistance_ohm_mm2_per_m,
                m.density_g_cm3,
            )
            .map_err(|e| Error::config(field, e.to_string()))
        };
        match &self.tether.material {
            MaterialRef::Custom(m) => custom(m, "tether.material"),
            MaterialRef::Name(name) => {
                if let Some((i, m)) = self
                    .materials
                    .iter()
                    .enumerate()
                    .find(|(_, m)| m.name.eq_ignore_ascii_case(name))
                {
                    return custom(m, &format!("materials[{i}]"));
                }
                ConductorMaterial::builtin(name).ok_or_else(|| {
                    Error::config("tether.material", format!("unknown material `{name}`"))
                })
            }
        }
    }

    /// Loads referenced files relative to `base` and validates everything.
    pub fn resolve(&self, base: &Path) -> Result<ResolvedSystem> {
        let d = &self.drone;
        if !(d.mass_kg > 0.0) {
            return Err(Error::config("drone.mass_kg", "must be positive"));
        }
        if d.motor_count == 0 {
            return Err(Error::config("drone.motor_count", "must be at least 1"));
        }
        if !(d.dc_dc_efficiency > 0.0 && d.dc_dc_efficiency <= 1.0) {
            return Err(Error::config(
                "drone.dc_dc_efficiency",
                "must lie in (0, 1]",
            ));
        }
        if !(d.additional_power_w >= 0.0) {
            return Err(Error::config(
                "drone.additional_power_w",
                "must be non-negative",
            ));
        }
        let motor_curve = load_motor_ref(&d.motor_curve, base)
            .map_err(|e| Error::config("drone.motor_curve", e.to_string()))?;

        let t = &self.tether;
        if !(t.insulation_thickness_mm >= 0.0) {
            return Err(Error::config(
                "tether.insulation_thickness_mm",
                "must be non-negative",
            ));
        }
        if !(t.insulation_density_g_cm3 > 0.0) {
            return Err(Error::config(
                "tether.insulation_density_g_cm3",
                "must be positive",
            ));
        }
        if !(t.length_m > 0.0) {
            return Err(Error::config("tether.length_m", "must be positive"));
        }
        if !(t.supply_voltage_v > 0.0) {
            return Err(Error::config("tether.supply_voltage_v", "must be positive"));
        }
        if !(t.min_converter_voltage_v > 0.0 && t.min_converter_voltage_v < t.supply_voltage_v) {
            return Err(Error::config(
                "tether.min_converter_voltage_v",
                "must be positive and below tether.supply_voltage_v",
            ));
        }
        if let Some(a) = t.conductor_area_mm2 {
            if !(a > 0.0) {
                return Err(Error::config(
                    "tether.conductor_area_mm2",
                    "must be positive",
                ));
            }
        }
        let tether = TetherSpec::new(
            self.material()?,
            t.conductor_area_mm2.unwrap_or(1.0),
            InsulationSpec {
                density: t.insulation_density_g_cm3,
                thickness: t.insulation_thickness_mm,
            },
            t.length_m,
            t.supply_voltage_v,
            t.min_converter_voltage_v,
        )
        .map_err(|e| Error::config("tether", e.to_string()))?;

        let a = &self.aero;
        if !(a.air_density_kg_m3 > 0.0) {
            return Err(Error::config("aero.air_density_kg_m3", "must be positive"));
        }
        let tether_drag = TetherDragSpec {
            cylinder_drag_coeff: a.cylinder_drag_coeff,
            rotation_factor: a.rotation_factor,
            conductor_count: 2,
        };
        tether_drag
            .validate()
            .map_err(|e| Error::config("aero", e.to_string()))?;
        let drag_model = match &a.drag_model {
            None => None,
            Some(r) => {
                let file = match r {
                    DragModelRef::Inline(f) => f.clone(),
                    DragModelRef::Path(p) => load_drag_ref(p, base)
                        .map_err(|e| Error::config("aero.drag_model", e.to_string()))?,
                };
                let mut params = file.to_params();
                params.air_density = a.air_density_kg_m3;
                params
                    .validate()
                    .map_err(|e| Error::config("aero.drag_model", e.to_string()))?;
                Some(params)
            }
        };

        if !(self.cruise_speed_ms >= 0.0) {
            return Err(Error::config("cruise_speed_ms", "must be non-negative"));
        }
        if self.cruise_speed_ms > 0.0 && drag_model.is_none() {
            return Err(Error::config(
                "aero.drag_model",
                "required when cruise_speed_ms is positive",
            ));
        }

        let s = &self.search;
        let bounds = SearchBounds {
            min_area: s.min_area_mm2,
            max_area: s.max_area_mm2,
            scan_points: s.scan_points,
            tolerance: s.tolerance_mm2,
        };
        bounds
            .validate()
            .map_err(|e| Error::config("search", e.to_string()))?;

        Ok(ResolvedSystem {
            drone: DroneConfig {
                drone_mass: d.mass_kg,
                motor_count: d.motor_count,
                dc_dc_efficiency: d.dc_dc_efficiency,
                additional_power: d.additional_power_w,
                motor_curve,
            },
            tether,
            conductor_area: t.conductor_area_mm2,
            air_density: a.air_density_kg_m3,
            tether_drag,
            drag_model,
            cruise_speed: self.cruise_speed_ms,
            options: OptimizeOptions {
                bounds,
                allow_below_headroom: false,
            },
        })
    }
}

fn resolve_path(reference: &str, base: &Path) -> PathBuf {
    let p = Path::new(reference);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn load_motor_ref(reference: &str, base: &Path) -> Result<MotorCurve> {
    match reference.strip_prefix("builtin:") {
        Some(name) => presets::motor_curve(name)
            .ok_or_else(|| Error::Validation(format!("no built-in motor curve `{name}`"))),
        None => MotorCurve::load(resolve_path(reference, base)),
    }
}

fn load_drag_ref(reference: &str, base: &Path) -> Result<DragModelFile> {
    match reference.strip_prefix("builtin:") {
        Some("published") => Ok(DragModelFile::from_params(
            &DragModelParams::published(),
            None,
        )),
        Some(name) => Err(Error::Validation(format!(
            "no built-in drag model `{name}`"
        ))),
        None => DragModelFile::load(resolve_path(reference, base)),
    }
}
