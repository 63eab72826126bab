use std::path::Path;

use tetherkit::config::SystemConfig;
use tetherkit::drag::{self, DragModelParams, FitOptions};
use tetherkit::flightlog::{compute_drag_samples, pitch_offset, read_flight, write_flight};
use tetherkit::motor::{MotorCurve, MotorCurvePoint};
use tetherkit::optimizer::{
    compare_motors, find_headroom_area, find_min_power_area, optimize_cable, sample_curves,
    OptimizeOptions, SearchBounds, SelectionRule,
};
use tetherkit::power::{available_thrust, necessary_thrust, total_power, DroneConfig};
use tetherkit::presets;
use tetherkit::report::{to_json, DragModelFile};
use tetherkit::synth::{self, FlightProfile};
use tetherkit::tether::{ConductorMaterial, InsulationSpec, TetherSpec};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn reference_system() -> tetherkit::config::ResolvedSystem {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    SystemConfig::load(data.join("reference_system.json")).unwrap()
}

/// Motor whose thrust is proportional to power, up to `max_power`.
fn proportional_motor(kg_per_w: f64, max_power: f64) -> MotorCurve {
    MotorCurve::new(
        "proportional",
        vec![
            MotorCurvePoint::new(max_power / 2.0, kg_per_w * max_power / 2.0),
            MotorCurvePoint::new(max_power, kg_per_w * max_power),
        ],
    )
    .unwrap()
}

#[test]
fn headroom_matches_closed_form() {
    // With bare conductors and a proportional motor, both thrust curves are
    // affine in A and the headroom equation has a closed-form root.
    let (g, eta, p_add) = (0.008, 0.9, 12.0);
    let drone = DroneConfig {
        drone_mass: 1.5,
        motor_count: 4,
        dc_dc_efficiency: eta,
        additional_power: p_add,
        motor_curve: proportional_motor(g, 5000.0),
    };
    let material = ConductorMaterial::aluminum();
    let insulation = InsulationSpec {
        density: 1.4,
        thickness: 0.0,
    };
    let (h, u) = (40.0, 100.0);
    let tether = TetherSpec::new(material.clone(), 1.0, insulation, h, u, 20.0).unwrap();

    // g·η·(U²A/(8hρ) − P_add)/n = 2·(m_d + 2h·ρ_m·A·1e-3)/n
    let rho = material.specific_resistance;
    let rho_m = material.density;
    let analytic = (2.0 * drone.drone_mass + g * eta * p_add)
        / (g * eta * u * u / (8.0 * h * rho) - 4.0 * h * rho_m * 1e-3);

    let found = find_headroom_area(&drone, &tether, 0.0, &SearchBounds::default()).unwrap();
    let area = found.area.unwrap();
    assert!(!found.always_satisfied && !found.non_monotone);
    assert!((area - analytic).abs() < 1e-4, "{area} vs {analytic}");
}

#[test]
fn resistance_dominated_minimum_matches_brute_force() {
    // Constant-efficiency motor: heavier cable always costs thrust power,
    // thicker cable always cuts loss, so the minimum is interior.
    let drone = DroneConfig {
        drone_mass: 2.0,
        motor_count: 4,
        dc_dc_efficiency: 0.92,
        additional_power: 15.0,
        motor_curve: proportional_motor(0.006, 2000.0),
    };
    let tether = TetherSpec::new(
        ConductorMaterial::copper(),
        1.0,
        InsulationSpec::pvc(0.5),
        60.0,
        60.0,
        25.0,
    )
    .unwrap();
    let bounds = SearchBounds {
        tolerance: 1e-7,
        ..SearchBounds::default()
    };
    let found = find_min_power_area(&drone, &tether, None, &bounds).unwrap();
    let area = found.area.unwrap();

    let grid = tetherkit::scalar::log_space(bounds.min_area, bounds.max_area, 100_000);
    let objective = |a: f64| {
        total_power(&drone, &tether.with_area(a), 0.0)
            .ok()
            .filter(|b| b.feasible)
            .map_or(f64::INFINITY, |b| b.p_total)
    };
    let (best_i, best_p) = grid
        .iter()
        .map(|&a| objective(a))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!(
        best_i > 0 && best_i < grid.len() - 1,
        "minimum must be interior"
    );
    assert!(
        area >= grid[best_i - 1] && area <= grid[best_i + 1],
        "{area} vs {}",
        grid[best_i]
    );
    assert!(found.power.unwrap() <= best_p * (1.0 + 1e-12));
}

#[test]
fn reference_system_report_is_consistent() {
    let system = reference_system();
    let cruise = system.cruise().unwrap();
    let report = optimize_cable(
        &system.drone,
        &system.tether,
        Some(&cruise),
        &system.options,
    )
    .unwrap();
    assert!(report.feasible);

    let area = report.optimal_area.unwrap();
    assert!(area >= report.headroom_area.unwrap() && area >= report.min_power_area.unwrap());
    assert_eq!(report.chosen_rule, Some(SelectionRule::Headroom));

    // Recompute the stored values from the raw modules.
    let tether = system.tether.with_area(area);
    let hover = report.hover.unwrap();
    assert!(
        rel(
            hover.t_available,
            available_thrust(&system.drone, &tether).thrust
        ) < 1e-9
    );
    assert!(
        rel(
            hover.t_necessary,
            necessary_thrust(&system.drone, tether.mass(), 0.0).unwrap()
        ) < 1e-9
    );
    let p = total_power(&system.drone, &tether, 0.0).unwrap().p_total;
    assert!(rel(report.hover_power.unwrap(), p) < 1e-9);
    let cruise_point = report.cruise.unwrap();
    let p = total_power(&system.drone, &tether, cruise_point.pitch)
        .unwrap()
        .p_total;
    assert!(rel(report.cruise_power.unwrap(), p) < 1e-9);

    // Tether and system mass near the reference values.
    assert!(rel(report.tether_mass.unwrap(), 0.55) < 0.03);
    assert!(rel(report.system_mass.unwrap(), 2.26) < 0.03);
}

#[test]
fn allowing_below_headroom_picks_min_power() {
    let system = reference_system();
    let options = OptimizeOptions {
        allow_below_headroom: true,
        ..system.options
    };
    let report = optimize_cable(
        &system.drone,
        &system.tether,
        system.cruise().as_ref(),
        &options,
    )
    .unwrap();
    assert_eq!(report.chosen_rule, Some(SelectionRule::MinPower));
    assert_eq!(report.optimal_area, report.min_power_area);
    assert!(report.optimal_area.unwrap() < report.headroom_area.unwrap());
}

#[test]
fn curves_cover_the_search_grid() {
    let system = reference_system();
    let curves =
        sample_curves(&system.drone, &system.tether, None, &system.options.bounds).unwrap();
    assert_eq!(curves.len(), system.options.bounds.scan_points);
    assert_eq!(curves[0].area_mm2, 0.05);
    // Available thrust grows with area; necessary thrust grows with mass.
    assert!(curves
        .windows(2)
        .all(|w| w[1].t_necessary_kgf > w[0].t_necessary_kgf));
    assert!(curves.last().unwrap().t_available_kgf > curves[0].t_available_kgf);
}

#[test]
fn report_json_is_deterministic() {
    let system = reference_system();
    let run = || {
        let r = optimize_cable(
            &system.drone,
            &system.tether,
            system.cruise().as_ref(),
            &system.options,
        )
        .unwrap();
        to_json(&r).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn strong_motor_beats_efficient_weak_one() {
    let system = reference_system();
    let motors = ["efficient_small_prop_approx", "strong_large_kv_approx"]
        .into_iter()
        .map(|name| (name.to_string(), Ok(presets::motor_curve(name).unwrap())))
        .collect();
    let cmp = compare_motors(
        motors,
        &system.drone,
        &system.tether,
        system.cruise().as_ref(),
        &system.options,
    );
    let [weak, strong] = &cmp.entries[..] else {
        panic!("two entries expected")
    };
    // The weak motor is more efficient at hover thrust...
    let hover = strong.hover_marker.unwrap().thrust;
    let weak_curve = presets::motor_curve("efficient_small_prop_approx").unwrap();
    let strong_curve = presets::motor_curve("strong_large_kv_approx").unwrap();
    assert!(
        weak_curve.power_for_thrust(hover).unwrap() < strong_curve.power_for_thrust(hover).unwrap()
    );
    // ...but saturates below twice the hover thrust, so it is not feasible.
    assert!(weak_curve.max_thrust() < 2.0 * hover);
    assert!(!weak.feasible);
    assert!(strong.feasible);
    assert!(strong.headroom_marker.unwrap().power.is_some());
}

#[test]
fn synthetic_logs_recover_drag_model() {
    let winds = [-1.196, 0.8];
    let truth = synth::published_with_winds(&winds);
    let bias = 0.0087;
    let profile = FlightProfile {
        pitch_bias: bias,
        ..FlightProfile::default()
    };
    let hover = synth::simulate_hover(500, 0.02, bias, 0.005, 7);
    let offset = pitch_offset(&hover).unwrap();
    assert!((offset - bias).abs() < 5e-4);

    let flights: Vec<_> = (0..winds.len())
        .map(|k| {
            let log = synth::simulate_flight(&truth, k, &profile);
            // Round-trip through the CSV format to cover the ingestion path.
            let mut buf = Vec::new();
            write_flight(&mut buf, &log).unwrap();
            let log = read_flight("synthetic", buf.as_slice()).unwrap();
            compute_drag_samples(&log, profile.mass, offset).unwrap()
        })
        .collect();
    let report = drag::fit(&flights, truth.air_density, None, &FitOptions::default()).unwrap();
    let p = &report.params;
    // Finite differencing of a 50 Hz log costs a little accuracy.
    assert!(rel(p.front_area, truth.front_area) < 0.05, "{p:?}");
    assert!(rel(p.top_area, truth.top_area) < 0.05, "{p:?}");
    assert!(rel(p.linear_term, truth.linear_term) < 0.05, "{p:?}");
    for (w, truth) in p.wind_offsets.iter().zip(winds) {
        assert!((w - truth).abs() < 0.05, "{w} vs {truth}");
    }

    let file = DragModelFile::from_fit(&report);
    assert_eq!(file.wind_offsets_ms.len(), 2);
    assert_eq!(file.final_model.unwrap().wind_offsets_ms, vec![0.0, 0.0]);
}

#[test]
fn steady_forward_flight_drag_sign() {
    // Flying forward at constant speed with the nose down: the air pushes
    // the drone backward, so the extracted force is negative and the model's
    // retarding force is positive.
    let truth = DragModelParams::published();
    let profile = FlightProfile {
        max_pitch: 0.0,
        ..FlightProfile::default()
    };
    let v = 8.0;
    let pitch = tetherkit::equilibrium::solve_equilibrium_pitch(
        &truth,
        &presets::reference_tether(1.0),
        &tetherkit::equilibrium::TetherDragSpec {
            cylinder_drag_coeff: 0.0,
            ..Default::default()
        },
        profile.mass - presets::reference_tether(1.0).mass(),
        v,
    )
    .unwrap()
    .pitch;
    let log: Vec<_> = (0..200)
        .map(|i| tetherkit::flightlog::FlightSample {
            time: i as f64 * 0.02,
            pitch,
            roll: 0.0,
            yaw: 0.3,
            v_north: v * 0.3f64.cos(),
            v_east: v * 0.3f64.sin(),
            v_down: 0.0,
        })
        .collect();
    let samples = compute_drag_samples(&log, profile.mass, 0.0).unwrap();
    assert_eq!(samples.len(), 198);
    for s in &samples {
        assert!(s.drag_force < 0.0);
        assert!((-s.drag_force - drag::drag_force(&truth, v, pitch, None)).abs() < 1e-9);
    }
}
