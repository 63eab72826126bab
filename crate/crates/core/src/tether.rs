//! Electrical and mass model of a two-conductor DC tether.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConductorMaterial {
    pub name: String,
    /// Specific resistance in Ω·mm²/m.
    pub specific_resistance: f64,
    /// Density in g/cm³.
    pub density: f64,
}

impl ConductorMaterial {
    pub fn new(name: impl Into<String>, specific_resistance: f64, density: f64) -> Result<Self> {
        if !(specific_resistance > 0.0 && density > 0.0) {
            return Err(Error::Validation(
                "conductor resistivity and density must be positive".to_string(),
            ));
        }
        Ok(Self {
            name: name.into(),
            specific_resistance,
            density,
        })
    }

    pub fn copper() -> Self {
        Self {
            name: "copper".to_string(),
            specific_resistance: 0.0178,
            density: 8.9,
        }
    }

    pub fn aluminum() -> Self {
        Self {
            name: "aluminum".to_string(),
            specific_resistance: 0.0278,
            density: 2.7,
        }
    }

    /// Resistance-mass product in Ω·g/m², lower is a better tether material.
    pub fn combined_constant(&self) -> f64 {
        self.specific_resistance * self.density
    }

    /// Looks up a built-in material (case-insensitive; `aluminium` accepted).
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "copper" | "cu" => Some(Self::copper()),
            "aluminum" | "aluminium" | "al" => Some(Self::aluminum()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InsulationSpec {
    /// g/cm³
    pub density: f64,
    /// Radial thickness in mm.
    pub thickness: f64,
}

impl InsulationSpec {
    pub const PVC_DENSITY: f64 = 1.4;
    pub const DEFAULT_THICKNESS: f64 = 0.75;

    pub fn pvc(thickness: f64) -> Self {
        Self {
            density: Self::PVC_DENSITY,
            thickness,
        }
    }
}

impl Default for InsulationSpec {
    fn default() -> Self {
        Self::pvc(Self::DEFAULT_THICKNESS)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetherSpec {
    pub material: ConductorMaterial,
    /// Cross-section of one conductor in mm².
    pub conductor_area: f64,
    pub insulation: InsulationSpec,
    /// Tether length in m, equal to the flight height.
    pub length: f64,
    /// Ground-side supply voltage in V.
    pub supply_voltage: f64,
    /// Minimum input voltage of the onboard step-down converter in V.
    pub min_converter_voltage: f64,
}

/// Maximum power deliverable to the drone and the drone-side voltage at
/// which it is reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvailablePower {
    pub power: f64,
    pub u_min: f64,
}

impl TetherSpec {
    pub fn new(
        material: ConductorMaterial,
        conductor_area: f64,
        insulation: InsulationSpec,
        length: f64,
        supply_voltage: f64,
        min_converter_voltage: f64,
    ) -> Result<Self> {
        let spec = Self {
            material,
            conductor_area,
            insulation,
            length,
            supply_voltage,
            min_converter_voltage,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Validation(msg.to_string()));
        if !(self.material.specific_resistance > 0.0 && self.material.density > 0.0) {
            return fail("conductor resistivity and density must be positive");
        }
        if !(self.conductor_area > 0.0) {
            return fail("conductor area must be positive");
        }
        if !(self.insulation.density > 0.0 && self.insulation.thickness >= 0.0) {
            return fail("insulation density must be positive and thickness non-negative");
        }
        if !(self.length > 0.0) {
            return fail("tether length must be positive");
        }
        if !(self.min_converter_voltage > 0.0 && self.min_converter_voltage < self.supply_voltage) {
            return fail("converter minimum voltage must lie in (0, supply voltage)");
        }
        Ok(())
    }

    /// Same tether with a different conductor cross-section.
    pub fn with_area(&self, conductor_area: f64) -> Self {
        Self {
            conductor_area,
            ..self.clone()
        }
    }

    /// Loop resistance of both conductors in series, in Ω.
    pub fn resistance(&self) -> f64 {
        2.0 * self.length * self.material.specific_resistance / self.conductor_area
    }

    /// Conductor radius in mm, treating the conductor as a solid circle.
    pub fn conductor_radius(&self) -> f64 {
        (self.conductor_area / PI).sqrt()
    }

    /// Outer diameter of one insulated conductor in mm.
    pub fn outer_diameter(&self) -> f64 {
        2.0 * (self.conductor_radius() + self.insulation.thickness)
    }

    /// Insulation annulus cross-section of one conductor in mm².
    pub fn insulation_area(&self) -> f64 {
        let r = self.conductor_radius();
        let outer = r + self.insulation.thickness;
        PI * (outer * outer - r * r)
    }

    /// Tether mass in kg. g/cm³ · mm² · m is numerically grams.
    pub fn mass(&self) -> f64 {
        let per_conductor = self.material.density * self.conductor_area
            + self.insulation.density * self.insulation_area();
        2.0 * self.length * per_conductor * 1e-3
    }

    pub fn available_power(&self) -> AvailablePower {
        let u = self.supply_voltage;
        let u_min = self.min_converter_voltage.max(u / 2.0);
        AvailablePower {
            power: u_min * (u - u_min) / self.resistance(),
            u_min,
        }
    }

    /// Power delivered to the drone when its input sits at `u_uav` volts.
    pub fn power_at_uav_voltage(&self, u_uav: f64) -> Result<f64> {
        let u = self.supply_voltage;
        if !(u_uav > 0.0 && u_uav <= u) {
            return Err(Error::Domain(format!(
                "drone voltage {u_uav} V outside (0, {u}] V"
            )));
        }
        Ok(u_uav * (u - u_uav) / self.resistance())
    }
}
