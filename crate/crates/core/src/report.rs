//! Output formats: deterministic JSON, curve CSVs and the drag-model file.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::drag::{DragModelParams, FitReport};
use crate::optimizer::CurveSample;
use crate::{Error, Result, SEA_LEVEL_AIR_DENSITY};

/// Significant digits of every float written by this crate.
pub const SIGNIFICANT_DIGITS: usize = 9;

pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

fn round_value(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().expect("f64 number"));
            *value = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with sorted keys, floats rounded to nine significant digits
/// and non-finite numbers written as `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        round_significant(x).to_string()
    }
}

pub const CURVE_COLUMNS: [&str; 4] = [
    "area_mm2",
    "t_available_kgf",
    "t_necessary_kgf",
    "p_total_w",
];

pub fn write_curves_csv<W: Write>(mut out: W, curves: &[CurveSample]) -> Result<()> {
    let io = |e| Error::io("<curve csv>", e);
    writeln!(out, "{}", CURVE_COLUMNS.join(",")).map_err(io)?;
    for c in curves {
        writeln!(
            out,
            "{},{},{},{}",
            format_float(c.area_mm2),
            format_float(c.t_available_kgf),
            format_float(c.t_necessary_kgf),
            format_float(c.p_total_w)
        )
        .map_err(io)?;
    }
    Ok(())
}

/// Still-air model block of a drag-model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalDragModel {
    pub front_area_m2: f64,
    pub top_area_m2: f64,
    pub linear_term_ms: f64,
    pub wind_offsets_ms: Vec<f64>,
    pub air_density: f64,
}

/// On-disk drag model, as written by `fit-drag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DragModelFile {
    pub front_area_m2: f64,
    pub top_area_m2: f64,
    pub linear_term_ms: f64,
    #[serde(default)]
    pub wind_offsets_ms: Vec<f64>,
    #[serde(default = "default_air_density")]
    pub air_density: f64,
    /// 1σ relative standard errors.
    #[serde(default)]
    pub rel_std_errors: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_rms_n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_model: Option<FinalDragModel>,
}

fn default_air_density() -> f64 {
    SEA_LEVEL_AIR_DENSITY
}

impl DragModelFile {
    pub fn from_params(params: &DragModelParams, residual_rms: Option<f64>) -> Self {
        let still = params.final_model();
        Self {
            front_area_m2: params.front_area,
            top_area_m2: params.top_area,
            linear_term_ms: params.linear_term,
            wind_offsets_ms: params.wind_offsets.clone(),
            air_density: params.air_density,
            rel_std_errors: params.relative_std_errors.clone(),
            residual_rms_n: residual_rms,
            sample_count: None,
            converged: None,
            final_model: Some(FinalDragModel {
                front_area_m2: still.front_area,
                top_area_m2: still.top_area,
                linear_term_ms: still.linear_term,
                wind_offsets_ms: still.wind_offsets,
                air_density: still.air_density,
            }),
        }
    }

    pub fn from_fit(report: &FitReport) -> Self {
        Self {
            sample_count: Some(report.sample_count),
            converged: Some(report.converged),
            ..Self::from_params(&report.params, Some(report.residual_rms))
        }
    }

    pub fn to_params(&self) -> DragModelParams {
        DragModelParams {
            front_area: self.front_area_m2,
            top_area: self.top_area_m2,
            linear_term: self.linear_term_ms,
            wind_offsets: self.wind_offsets_ms.clone(),
            air_density: self.air_density,
            relative_std_errors: self.rel_std_errors.clone(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line() as u64,
            message: e.to_string(),
        })
    }
}

/// Relative error as `±x.xx%`.
pub fn percent(rel: f64) -> String {
    format!("±{:.2}%", 100.0 * rel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_to_nine_digits() {
        assert_eq!(round_significant(1.0 / 3.0), 0.333333333);
        assert_eq!(round_significant(1.09), 1.09);
        assert_eq!(round_significant(-123456789.87), -123456790.0);
        assert_eq!(round_significant(0.0), 0.0);
    }

    #[test]
    fn json_is_sorted_and_rounded() {
        let mut m = BTreeMap::new();
        m.insert("b", f64::INFINITY);
        m.insert("a", 2.0 / 3.0);
        let s = to_json(&m).unwrap();
        assert_eq!(s, "{\n  \"a\": 0.666666667,\n  \"b\": null\n}\n");
    }

    #[test]
    fn drag_file_final_model_has_zero_wind() {
        let mut p = DragModelParams::published();
        p.wind_offsets = vec![-1.2, 0.8];
        let f = DragModelFile::from_params(&p, Some(0.2));
        assert_eq!(f.wind_offsets_ms, vec![-1.2, 0.8]);
        assert_eq!(f.final_model.unwrap().wind_offsets_ms, vec![0.0, 0.0]);
    }

    #[test]
    fn curve_csv_header() {
        let mut buf = Vec::new();
        write_curves_csv(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "area_mm2,t_available_kgf,t_necessary_kgf,p_total_w\n"
        );
    }
}
