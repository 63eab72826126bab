//! Flight-log ingestion and drag-force extraction.
//!
//! Logs are CSV exports of the flight controller's state estimate with the
//! columns `time_s,pitch_rad,roll_rad,yaw_rad,vn_ms,ve_ms,vd_ms`. Yaw is
//! measured from north, clockwise positive; `vd` is positive downward.
//! Positive pitch means nose down, i.e. accelerating forward.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, STANDARD_GRAVITY};

pub const FLIGHT_COLUMNS: [&str; 7] = [
    "time_s",
    "pitch_rad",
    "roll_rad",
    "yaw_rad",
    "vn_ms",
    "ve_ms",
    "vd_ms",
];

/// Minimum number of samples for pitch-offset calibration.
pub const MIN_CALIBRATION_SAMPLES: usize = 100;

/// Default limit on |v_down| for samples used in drag fitting, m/s.
pub const DEFAULT_MAX_VERTICAL_SPEED: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightSample {
    pub time: f64,
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
    pub v_north: f64,
    pub v_east: f64,
    pub v_down: f64,
}

/// Velocity in the yaw-aligned frame whose forward and left axes stay
/// parallel to the ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizedVelocity {
    pub forward: f64,
    pub left: f64,
    pub down: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessedSample {
    pub time: f64,
    /// Offset-corrected pitch, rad.
    pub pitch: f64,
    pub roll: f64,
    pub v_forward: f64,
    pub v_down: f64,
    pub a_forward: f64,
    pub a_down: f64,
    /// Forward acceleration explained by tilting the thrust vector.
    pub expected_a_forward: f64,
    /// `mass · (a_forward − expected_a_forward)`, N. Negative when the air
    /// pushes the drone backward.
    pub drag_force: f64,
}

pub fn load_flight(path: impl AsRef<Path>) -> Result<Vec<FlightSample>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_flight(&path.display().to_string(), file)
}

pub fn read_flight(source: &str, reader: impl Read) -> Result<Vec<FlightSample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            path: source.to_string(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut cols = [0usize; 7];
    for (slot, name) in cols.iter_mut().zip(FLIGHT_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema {
                path: source.to_string(),
                column: name.to_string(),
            })?;
    }

    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            path: source.to_string(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let mut values = [0.0f64; 7];
        for ((value, &col), name) in values.iter_mut().zip(&cols).zip(FLIGHT_COLUMNS) {
            let raw = record.get(col).unwrap_or("");
            *value = raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    path: source.to_string(),
                    line,
                    message: format!("invalid {name} `{raw}`"),
                })?;
        }
        let [time, pitch, roll, yaw, v_north, v_east, v_down] = values;
        samples.push(FlightSample {
            time,
            pitch,
            roll,
            yaw,
            v_north,
            v_east,
            v_down,
        });
    }

    samples.sort_by(|a, b| a.time.total_cmp(&b.time));
    if let Some(w) = samples.windows(2).find(|w| w[0].time == w[1].time) {
        return Err(Error::Validation(format!(
            "{source}: duplicate timestamp {} s",
            w[0].time
        )));
    }
    Ok(samples)
}

pub fn write_flight<W: std::io::Write>(writer: W, samples: &[FlightSample]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Validation(format!("csv write failed: {e}"));
    wtr.write_record(FLIGHT_COLUMNS).map_err(io)?;
    for s in samples {
        wtr.write_record(
            [
                s.time, s.pitch, s.roll, s.yaw, s.v_north, s.v_east, s.v_down,
            ]
            .map(|v| v.to_string()),
        )
        .map_err(io)?;
    }
    wtr.flush().map_err(|e| Error::io("<flight csv>", e))?;
    Ok(())
}

/// Mean pitch over a hover flight, to be subtracted from later flights.
pub fn pitch_offset(hover_flight: &[FlightSample]) -> Result<f64> {
    if hover_flight.len() < MIN_CALIBRATION_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_CALIBRATION_SAMPLES,
            got: hover_flight.len(),
        });
    }
    Ok(hover_flight.iter().map(|s| s.pitch).sum::<f64>() / hover_flight.len() as f64)
}

pub fn to_stabilized_frame(sample: &FlightSample) -> StabilizedVelocity {
    let (sin, cos) = sample.yaw.sin_cos();
    StabilizedVelocity {
        forward: cos * sample.v_north + sin * sample.v_east,
        left: sin * sample.v_north - cos * sample.v_east,
        down: sample.v_down,
    }
}

/// Inverse of [`to_stabilized_frame`]: world-frame (north, east, down).
pub fn to_world_frame(yaw: f64, v: StabilizedVelocity) -> (f64, f64, f64) {
    let (sin, cos) = yaw.sin_cos();
    (
        cos * v.forward + sin * v.left,
        sin * v.forward - cos * v.left,
        v.down,
    )
}

/// Three-point finite differences: central (nonuniform spacing) on the
/// interior, second-order one-sided at both ends. Exact for quadratics.
pub fn differentiate(series: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let n = series.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    if let Some(w) = series.windows(2).find(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Validation(format!(
            "time must be strictly increasing, found {} after {}",
            w[1].0, w[0].0
        )));
    }
    // Derivative at the node `at` of the parabola through three points.
    let three_point = |p: [(f64, f64); 3], at: usize| -> f64 {
        let [(x0, y0), (x1, y1), (x2, y2)] = p;
        let x = p[at].0;
        y0 * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + y1 * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + y2 * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
    };
    let mut out = Vec::with_capacity(n);
    out.push((
        series[0].0,
        three_point([series[0], series[1], series[2]], 0),
    ));
    for i in 1..n - 1 {
        let window = [series[i - 1], series[i], series[i + 1]];
        out.push((series[i].0, three_point(window, 1)));
    }
    out.push((
        series[n - 1].0,
        three_point([series[n - 3], series[n - 2], series[n - 1]], 2),
    ));
    Ok(out)
}

/// Forward acceleration produced by tilting a thrust vector that holds
/// altitude against gravity plus the observed vertical acceleration.
pub fn expected_forward_acceleration(pitch: f64, roll: f64, a_down: f64) -> f64 {
    (STANDARD_GRAVITY + a_down) * pitch.tan() / roll.cos()
}

/// Converts a flight into drag-force samples. End samples are dropped since
/// their derivatives are one-sided.
pub fn compute_drag_samples(
    flight: &[FlightSample],
    mass: f64,
    pitch_offset: f64,
) -> Result<Vec<ProcessedSample>> {
    if !(mass > 0.0) {
        return Err(Error::Domain(format!("mass must be positive, got {mass}")));
    }
    let frames: Vec<StabilizedVelocity> = flight.iter().map(to_stabilized_frame).collect();
    let forward: Vec<(f64, f64)> = flight
        .iter()
        .zip(&frames)
        .map(|(s, v)| (s.time, v.forward))
        .collect();
    let down: Vec<(f64, f64)> = flight
        .iter()
        .zip(&frames)
        .map(|(s, v)| (s.time, v.down))
        .collect();
    let a_forward = differentiate(&forward)?;
    let a_down = differentiate(&down)?;

    let n = flight.len();
    Ok((1..n - 1)
        .map(|i| {
            let s = &flight[i];
            let pitch = s.pitch - pitch_offset;
            let a_of = a_forward[i].1;
            let a_od = a_down[i].1;
            let a_ef = expected_forward_acceleration(pitch, s.roll, a_od);
            ProcessedSample {
                time: s.time,
                pitch,
                roll: s.roll,
                v_forward: frames[i].forward,
                v_down: frames[i].down,
                a_forward: a_of,
                a_down: a_od,
                expected_a_forward: a_ef,
                drag_force: mass * (a_of - a_ef),
            }
        })
        .collect())
}
