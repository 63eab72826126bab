//! Motor power/thrust curves.
//!
//! A curve is a table of (input power, thrust) pairs per motor, as found on
//! manufacturer datasheets. Between tabulated points the curve is linear.
//! Below the first point the first point's thrust/power ratio is held
//! constant, which is conservative since real motors get more efficient at
//! low throttle. Above the last point the thrust is clamped and flagged.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorCurvePoint {
    /// Throttle fraction, informational only.
    pub throttle: Option<f64>,
    /// Electrical input power per motor in W.
    pub input_power: f64,
    /// Thrust per motor in kgf.
    pub thrust: f64,
}

impl MotorCurvePoint {
    pub fn new(input_power: f64, thrust: f64) -> Self {
        Self {
            throttle: None,
            input_power,
            thrust,
        }
    }
}

/// Thrust produced at a given input power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustAt {
    pub thrust: f64,
    /// Requested power exceeded the table; `thrust` is the clamped maximum.
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorCurve {
    name: String,
    points: Vec<MotorCurvePoint>,
}

impl MotorCurve {
    /// Builds a curve from unsorted points, validating the monotonicity
    /// invariants after sorting by input power.
    pub fn new(name: impl Into<String>, mut points: Vec<MotorCurvePoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Validation(format!(
                "motor curve needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.input_power.is_finite() && p.thrust.is_finite()) {
                return Err(Error::Validation(format!("point {i}: non-finite value")));
            }
            if p.input_power < 0.0 || p.thrust < 0.0 {
                return Err(Error::Validation(format!(
                    "point {i}: power and thrust must be non-negative"
                )));
            }
        }
        points.sort_by(|a, b| a.input_power.total_cmp(&b.input_power));

        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b.input_power <= a.input_power {
                return Err(Error::Validation(format!(
                    "duplicate input power {} W",
                    a.input_power
                )));
            }
            if b.thrust < a.thrust {
                return Err(Error::Validation(format!(
                    "thrust decreases from {} kgf at {} W to {} kgf at {} W",
                    a.thrust, a.input_power, b.thrust, b.input_power
                )));
            }
        }
        let first = points[0];
        if first.input_power == 0.0 && first.thrust > 0.0 {
            return Err(Error::Validation(
                "first point has thrust at zero power".to_string(),
            ));
        }

        Ok(Self {
            name: name.into(),
            points,
        })
    }

    /// Loads a `throttle,power_w,thrust_kg` CSV. The curve is named after the
    /// file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "motor".to_string());
        Self::from_reader(name, &path.display().to_string(), file)
    }

    pub fn from_csv_str(name: impl Into<String>, csv: &str) -> Result<Self> {
        let name = name.into();
        let source = format!("<{name}>");
        Self::from_reader(name, &source, csv.as_bytes())
    }

    fn from_reader(name: String, source: &str, reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| parse_error(source, 1, e.to_string()))?
            .clone();
        let column = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema {
                    path: source.to_string(),
                    column: name.to_string(),
                })
        };
        let throttle_col = column("throttle")?;
        let power_col = column("power_w")?;
        let thrust_col = column("thrust_kg")?;

        let mut points = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                parse_error(source, line, e.to_string())
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let field = |col: usize, what: &str| -> Result<f64> {
                let raw = record.get(col).unwrap_or("");
                raw.parse::<f64>()
                    .map_err(|_| parse_error(source, line, format!("invalid {what} `{raw}`")))
            };
            let throttle = match record.get(throttle_col).unwrap_or("") {
                "" => None,
                _ => Some(field(throttle_col, "throttle")?),
            };
            points.push(MotorCurvePoint {
                throttle,
                input_power: field(power_col, "power_w")?,
                thrust: field(thrust_col, "thrust_kg")?,
            });
        }
        Self::new(name, points).map_err(|e| match e {
            Error::Validation(msg) => Error::Validation(format!("{source}: {msg}")),
            other => other,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[MotorCurvePoint] {
        &self.points
    }

    pub fn max_power(&self) -> f64 {
        self.points[self.points.len() - 1].input_power
    }

    pub fn max_thrust(&self) -> f64 {
        self.points[self.points.len() - 1].thrust
    }

    /// Thrust per watt of the first tabulated point, used below the table.
    fn low_end_efficiency(&self) -> f64 {
        let first = self.points[0];
        if first.input_power == 0.0 {
            0.0
        } else {
            first.thrust / first.input_power
        }
    }

    /// Thrust produced at `power` watts per motor.
    pub fn thrust_at(&self, power: f64) -> Result<ThrustAt> {
        if !(power >= 0.0) {
            return Err(Error::Domain(format!(
                "motor input power must be non-negative, got {power}"
            )));
        }
        let first = self.points[0];
        if power <= first.input_power {
            return Ok(ThrustAt {
                thrust: power * self.low_end_efficiency(),
                saturated: false,
            });
        }
        if power >= self.max_power() {
            return Ok(ThrustAt {
                thrust: self.max_thrust(),
                saturated: power > self.max_power(),
            });
        }
        // First index whose power is >= `power`; always in 1..len.
        let hi = self.points.partition_point(|p| p.input_power < power);
        let (a, b) = (self.points[hi - 1], self.points[hi]);
        let t = (power - a.input_power) / (b.input_power - a.input_power);
        Ok(ThrustAt {
            thrust: a.thrust + t * (b.thrust - a.thrust),
            saturated: false,
        })
    }

    /// Thrust in kgf at `power`, clamped at the table maximum.
    pub fn thrust(&self, power: f64) -> Result<f64> {
        self.thrust_at(power).map(|t| t.thrust)
    }

    /// Smallest input power producing `thrust` kgf.
    pub fn power_for_thrust(&self, thrust: f64) -> Result<f64> {
        if !(thrust >= 0.0) {
            return Err(Error::Domain(format!(
                "thrust must be non-negative, got {thrust}"
            )));
        }
        if thrust > self.max_thrust() {
            return Err(Error::InfeasibleThrust {
                requested: thrust,
                max: self.max_thrust(),
            });
        }
        let first = self.points[0];
        if thrust <= first.thrust {
            let eff = self.low_end_efficiency();
            // Zero-efficiency low end only happens for a (0 W, 0 kgf) first point.
            return Ok(if eff > 0.0 { thrust / eff } else { 0.0 });
        }
        let hi = self.points.partition_point(|p| p.thrust < thrust);
        let (a, b) = (self.points[hi - 1], self.points[hi]);
        let t = (thrust - a.thrust) / (b.thrust - a.thrust);
        Ok(a.input_power + t * (b.input_power - a.input_power))
    }
}

fn parse_error(source: &str, line: u64, message: String) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        message,
    }
}
