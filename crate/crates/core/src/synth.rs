//! Synthetic data generated from a known drag model, for tests, demos and
//! self-checks of the identification pipeline.

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use crate::drag::{drag_force, DragModelParams};
use crate::flightlog::{
    expected_forward_acceleration, to_world_frame, FlightSample, ProcessedSample,
    StabilizedVelocity,
};

/// Published aerodynamic parameters with the given per-flight winds.
pub fn published_with_winds(winds: &[f64]) -> DragModelParams {
    DragModelParams {
        wind_offsets: winds.to_vec(),
        ..DragModelParams::published()
    }
}

/// Drag-force samples scattered uniformly over v ∈ [−12, 12] m/s and
/// pitch ∈ [−20°, 20°], one flight per wind offset in `truth`, with
/// Gaussian force noise of `noise_sigma` N.
pub fn sweep_flights(
    truth: &DragModelParams,
    samples_per_flight: usize,
    noise_sigma: f64,
    seed: u64,
) -> Vec<Vec<ProcessedSample>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sigma.max(0.0)).expect("finite sigma");
    let max_pitch = 20f64.to_radians();
    (0..truth.wind_offsets.len().max(1))
        .map(|k| {
            (0..samples_per_flight)
                .map(|i| {
                    let v = rng.gen_range(-12.0..=12.0);
                    let pitch = rng.gen_range(-max_pitch..=max_pitch);
                    let eps = if noise_sigma > 0.0 {
                        noise.sample(&mut rng)
                    } else {
                        0.0
                    };
                    let force = -drag_force(truth, v, pitch, Some(k)) + eps;
                    ProcessedSample {
                        time: i as f64 * 0.1,
                        pitch,
                        roll: 0.0,
                        v_forward: v,
                        v_down: 0.0,
                        a_forward: 0.0,
                        a_down: 0.0,
                        expected_a_forward: 0.0,
                        drag_force: force,
                    }
                })
                .collect()
        })
        .collect()
}

/// Parameters of a simulated drag-identification flight.
#[derive(Debug, Clone, Copy)]
pub struct FlightProfile {
    pub mass: f64,
    pub duration: f64,
    /// Log sample interval, s.
    pub dt: f64,
    /// Peak pitch, rad.
    pub max_pitch: f64,
    /// Constant bias added to the logged pitch, rad.
    pub pitch_bias: f64,
    /// Heading rate, rad/s.
    pub yaw_rate: f64,
}

impl Default for FlightProfile {
    fn default() -> Self {
        Self {
            mass: 1.55,
            duration: 120.0,
            dt: 0.02,
            max_pitch: 20f64.to_radians(),
            pitch_bias: 0.0,
            yaw_rate: 0.05,
        }
    }
}

/// Pitch command: two incommensurate sines so forward/backward flight is
/// visited at many angle-speed combinations.
fn pitch_command(t: f64, max_pitch: f64) -> f64 {
    max_pitch * (0.65 * (2.0 * PI * t / 17.0).sin() + 0.35 * (2.0 * PI * t / 5.3).sin())
}

/// Simulates level flight with the given drag model (wind of flight
/// `flight_index`) and returns the logged samples. Dynamics are integrated
/// with RK4 at a tenth of the log interval.
pub fn simulate_flight(
    truth: &DragModelParams,
    flight_index: usize,
    profile: &FlightProfile,
) -> Vec<FlightSample> {
    let accel = |t: f64, v: f64| {
        let pitch = pitch_command(t, profile.max_pitch);
        expected_forward_acceleration(pitch, 0.0, 0.0)
            - drag_force(truth, v, pitch, Some(flight_index)) / profile.mass
    };
    let substeps = 10;
    let h = profile.dt / substeps as f64;
    let count = (profile.duration / profile.dt).round() as usize + 1;
    let mut v = 0.0;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 * profile.dt;
        let yaw = (profile.yaw_rate * t).rem_euclid(2.0 * PI);
        let (vn, ve, vd) = to_world_frame(
            yaw,
            StabilizedVelocity {
                forward: v,
                left: 0.0,
                down: 0.0,
            },
        );
        out.push(FlightSample {
            time: t,
            pitch: pitch_command(t, profile.max_pitch) + profile.pitch_bias,
            roll: 0.0,
            yaw,
            v_north: vn,
            v_east: ve,
            v_down: vd,
        });
        for s in 0..substeps {
            let ts = t + s as f64 * h;
            let k1 = accel(ts, v);
            let k2 = accel(ts + 0.5 * h, v + 0.5 * h * k1);
            let k3 = accel(ts + 0.5 * h, v + 0.5 * h * k2);
            let k4 = accel(ts + h, v + h * k3);
            v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    out
}

/// Hover at a slowly turning heading with a pitch bias and Gaussian pitch
/// noise.
pub fn simulate_hover(
    samples: usize,
    dt: f64,
    pitch_bias: f64,
    noise_sigma: f64,
    seed: u64,
) -> Vec<FlightSample> {
    let mut rng = StdRng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sigma.max(0.0)).expect("finite sigma");
    (0..samples)
        .map(|i| {
            let t = i as f64 * dt;
            let eps = if noise_sigma > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            FlightSample {
                time: t,
                pitch: pitch_bias + eps,
                roll: 0.0,
                yaw: (0.1 * t).rem_euclid(2.0 * PI),
                v_north: 0.0,
                v_east: 0.0,
                v_down: 0.0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flightlog::compute_drag_samples;

    #[test]
    fn simulated_flight_visits_both_directions() {
        let truth = published_with_winds(&[0.0]);
        let log = simulate_flight(&truth, 0, &FlightProfile::default());
        let samples = compute_drag_samples(&log, 1.55, 0.0).unwrap();
        assert!(samples.iter().any(|s| s.v_forward > 5.0));
        assert!(samples.iter().any(|s| s.v_forward < -5.0));
    }
}
