//! Bundled data: approximate motor curves and the reference X500-class
//! system.
//!
//! The motor tables are smooth approximations of datasheet curves, not
//! manufacturer data.

use crate::motor::MotorCurve;
use crate::power::DroneConfig;
use crate::tether::{ConductorMaterial, InsulationSpec, TetherSpec};

pub const HOLYBRO_2216_CSV: &str = include_str!("../data/motors/holybro_2216_920kv_approx.csv");
pub const EFFICIENT_SMALL_CSV: &str =
    include_str!("../data/motors/efficient_small_prop_approx.csv");
pub const STRONG_LARGE_CSV: &str = include_str!("../data/motors/strong_large_kv_approx.csv");

/// Reference system config; its motor path resolves inside `data/`.
pub const REFERENCE_SYSTEM_CONFIG: &str = include_str!("../data/reference_system.json");

pub const MOTOR_NAMES: [&str; 3] = [
    "holybro_2216_920kv_approx",
    "efficient_small_prop_approx",
    "strong_large_kv_approx",
];

pub fn motor_curve(name: &str) -> Option<MotorCurve> {
    let csv = match name {
        "holybro_2216_920kv_approx" => HOLYBRO_2216_CSV,
        "efficient_small_prop_approx" => EFFICIENT_SMALL_CSV,
        "strong_large_kv_approx" => STRONG_LARGE_CSV,
        _ => return None,
    };
    Some(MotorCurve::from_csv_str(name, csv).expect("bundled motor curve is valid"))
}

pub fn holybro_2216_curve() -> MotorCurve {
    motor_curve(MOTOR_NAMES[0]).expect("bundled")
}

/// X500-class quadrotor in tethered configuration, without the cable.
pub fn reference_drone() -> DroneConfig {
    DroneConfig {
        drone_mass: 1.71,
        motor_count: 4,
        dc_dc_efficiency: 0.9,
        additional_power: 10.0,
        motor_curve: holybro_2216_curve(),
    }
}

/// 30 m aluminum tether on a 75 V supply, PVC insulated, with the given
/// conductor cross-section in mm².
pub fn reference_tether(conductor_area: f64) -> TetherSpec {
    TetherSpec {
        material: ConductorMaterial::aluminum(),
        conductor_area,
        insulation: InsulationSpec::default(),
        length: 30.0,
        supply_voltage: 75.0,
        min_converter_voltage: 30.0,
    }
}

/// 30 km/h in m/s.
pub const REFERENCE_CRUISE_SPEED: f64 = 30.0 / 3.6;
