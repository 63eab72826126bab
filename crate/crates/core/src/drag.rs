//! Drag model of the drone and its identification from flight data.
//!
//! The retarding force along the forward axis is
//!
//! ```text
//! F(v, θ) = ½ ρ A(θ) (u·|u| + j·u),   u = v − w,
//! A(θ)    = A_front·cos|θ| + A_top·sin|θ|
//! ```
//!
//! with effective areas that absorb the drag coefficient, a linear airspeed
//! term `j` and a per-flight wind offset `w`. Positive `F` opposes positive
//! airspeed. The quadratic term carries the sign of `u`.
//!
//! Fitting minimises the squared difference between this model and the
//! retarding force measured from flight logs (the negated
//! [`ProcessedSample::drag_force`]) with a Levenberg-Marquardt iteration over
//! `(A_front, A_top, j, w_1..w_K)`, sharing the aerodynamic parameters across
//! flights.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::flightlog::{ProcessedSample, DEFAULT_MAX_VERTICAL_SPEED};
use crate::{Error, Result, SEA_LEVEL_AIR_DENSITY};

/// Minimum usable samples per flight.
pub const MIN_FLIGHT_SAMPLES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DragModelParams {
    /// Effective front area in m².
    pub front_area: f64,
    /// Effective top area in m².
    pub top_area: f64,
    /// Linear airspeed term in m/s.
    pub linear_term: f64,
    /// One wind offset per flight, m/s.
    pub wind_offsets: Vec<f64>,
    /// kg/m³
    pub air_density: f64,
    /// 1σ relative standard errors keyed by parameter name.
    pub relative_std_errors: BTreeMap<String, f64>,
}

impl DragModelParams {
    pub fn new(front_area: f64, top_area: f64, linear_term: f64, air_density: f64) -> Self {
        Self {
            front_area,
            top_area,
            linear_term,
            wind_offsets: Vec::new(),
            air_density,
            relative_std_errors: BTreeMap::new(),
        }
    }

    /// The published model of an X500-class quadrotor.
    pub fn published() -> Self {
        Self::new(1.492e-2, 1.368e-2, 19.43, SEA_LEVEL_AIR_DENSITY)
    }

    /// Default starting point for fitting `flights` flights.
    pub fn initial_guess(flights: usize, air_density: f64) -> Self {
        Self {
            wind_offsets: vec![0.0; flights],
            ..Self::new(1e-2, 1e-2, 10.0, air_density)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.front_area > 0.0 && self.top_area > 0.0 && self.air_density > 0.0) {
            return Err(Error::Validation(
                "drag model areas and air density must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Copy with all wind offsets set to zero, describing still air.
    pub fn final_model(&self) -> Self {
        Self {
            wind_offsets: vec![0.0; self.wind_offsets.len()],
            ..self.clone()
        }
    }

    fn wind(&self, flight_index: Option<usize>) -> f64 {
        flight_index
            .and_then(|i| self.wind_offsets.get(i).copied())
            .unwrap_or(0.0)
    }
}

pub fn effective_area(params: &DragModelParams, pitch: f64) -> f64 {
    let p = pitch.abs();
    params.front_area * p.cos() + params.top_area * p.sin()
}

/// Retarding force in N at ground speed `v` and `pitch`, using the wind
/// offset of `flight_index` (still air for `None`).
pub fn drag_force(
    params: &DragModelParams,
    v: f64,
    pitch: f64,
    flight_index: Option<usize>,
) -> f64 {
    let u = v - params.wind(flight_index);
    0.5 * params.air_density
        * effective_area(params, pitch)
        * (u * u.abs() + params.linear_term * u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative change of the objective below which the fit has converged.
    pub objective_tolerance: f64,
    /// Gradient norm, in column-scaled parameters, below which the fit has
    /// converged.
    pub gradient_tolerance: f64,
    /// Pin the linear term at zero (quadratic-only model).
    pub fix_linear_term: bool,
    /// Samples with |v_down| above this are dropped. `None` keeps all.
    pub max_vertical_speed: Option<f64>,
    /// Drop samples where velocity and pitch have opposite signs, i.e. the
    /// drone decelerates into its own wake.
    pub exclude_propwash: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            objective_tolerance: 1e-10,
            gradient_tolerance: 1e-8,
            fix_linear_term: false,
            max_vertical_speed: Some(DEFAULT_MAX_VERTICAL_SPEED),
            exclude_propwash: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub params: DragModelParams,
    /// RMS of force residuals, N.
    pub residual_rms: f64,
    pub sample_count: usize,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

/// One observation: airspeed inputs and the measured retarding force.
#[derive(Debug, Clone, Copy)]
struct Observation {
    flight: usize,
    v: f64,
    pitch: f64,
    force: f64,
}

/// Parameter layout: `[A_front, A_top, j?, w_0..w_K]`.
struct Layout {
    flights: usize,
    fix_linear: bool,
}

impl Layout {
    fn len(&self) -> usize {
        self.wind_start() + self.flights
    }

    fn wind_start(&self) -> usize {
        if self.fix_linear {
            2
        } else {
            3
        }
    }

    fn pack(&self, p: &DragModelParams) -> DVector<f64> {
        let mut x = DVector::zeros(self.len());
        x[0] = p.front_area;
        x[1] = p.top_area;
        if !self.fix_linear {
            x[2] = p.linear_term;
        }
        for k in 0..self.flights {
            x[self.wind_start() + k] = p.wind_offsets.get(k).copied().unwrap_or(0.0);
        }
        x
    }

    fn unpack(&self, x: &DVector<f64>, air_density: f64) -> DragModelParams {
        DragModelParams {
            front_area: x[0],
            top_area: x[1],
            linear_term: if self.fix_linear { 0.0 } else { x[2] },
            wind_offsets: (0..self.flights)
                .map(|k| x[self.wind_start() + k])
                .collect(),
            air_density,
            relative_std_errors: BTreeMap::new(),
        }
    }

    fn names(&self) -> Vec<String> {
        let mut names = vec!["front_area".to_string(), "top_area".to_string()];
        if !self.fix_linear {
            names.push("linear_term".to_string());
        }
        names.extend((0..self.flights).map(|k| format!("wind_offset_{k}")));
        names
    }
}

struct Problem<'a> {
    obs: &'a [Observation],
    layout: Layout,
    air_density: f64,
}

impl Problem<'_> {
    /// Residuals `model − measured`.
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let p = self.layout.unpack(x, self.air_density);
        DVector::from_iterator(
            self.obs.len(),
            self.obs
                .iter()
                .map(|o| drag_force(&p, o.v, o.pitch, Some(o.flight)) - o.force),
        )
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let p = self.layout.unpack(x, self.air_density);
        let half_rho = 0.5 * self.air_density;
        let ws = self.layout.wind_start();
        let mut jac = DMatrix::zeros(self.obs.len(), self.layout.len());
        for (row, o) in self.obs.iter().enumerate() {
            let u = o.v - p.wind_offsets[o.flight];
            let (s, c) = o.pitch.abs().sin_cos();
            let area = p.front_area * c + p.top_area * s;
            let shape = u * u.abs() + p.linear_term * u;
            jac[(row, 0)] = half_rho * c * shape;
            jac[(row, 1)] = half_rho * s * shape;
            if !self.layout.fix_linear {
                jac[(row, 2)] = half_rho * area * u;
            }
            jac[(row, ws + o.flight)] = -half_rho * area * (2.0 * u.abs() + p.linear_term);
        }
        jac
    }
}

/// Fits the drag model to drag-force samples from one or more flights.
pub fn fit(
    flights: &[Vec<ProcessedSample>],
    air_density: f64,
    initial_guess: Option<&DragModelParams>,
    options: &FitOptions,
) -> Result<FitReport> {
    if flights.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if !(air_density > 0.0) {
        return Err(Error::Domain(format!(
            "air density must be positive, got {air_density}"
        )));
    }
    let mut obs = Vec::new();
    for (k, flight) in flights.iter().enumerate() {
        let usable: Vec<&ProcessedSample> = flight
            .iter()
            .filter(|s| {
                options
                    .max_vertical_speed
                    .is_none_or(|limit| s.v_down.abs() <= limit)
            })
            .filter(|s| !(options.exclude_propwash && s.v_forward * s.pitch < 0.0))
            .collect();
        if usable.len() < MIN_FLIGHT_SAMPLES {
            return Err(Error::InsufficientData {
                needed: MIN_FLIGHT_SAMPLES,
                got: usable.len(),
            });
        }
        let forward = usable.iter().any(|s| s.v_forward > 0.0);
        let backward = usable.iter().any(|s| s.v_forward < 0.0);
        if !(forward && backward) {
            return Err(Error::Identifiability(format!(
                "flight {k} does not cover both flight directions"
            )));
        }
        obs.extend(usable.iter().map(|s| Observation {
            flight: k,
            v: s.v_forward,
            pitch: s.pitch,
            force: -s.drag_force,
        }));
    }

    let layout = Layout {
        flights: flights.len(),
        fix_linear: options.fix_linear_term,
    };
    let start = match initial_guess {
        Some(g) => g.clone(),
        None => DragModelParams::initial_guess(flights.len(), air_density),
    };
    let problem = Problem {
        obs: &obs,
        layout,
        air_density,
    };
    levenberg_marquardt(&problem, problem.layout.pack(&start), options)
}

/// Column norms of `jac`, with zeros replaced by one.
fn column_scales(jac: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(
        jac.ncols(),
        jac.column_iter().map(|c| {
            let n = c.norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        }),
    )
}

/// Rejects Jacobians whose column-normalised condition number is hopeless.
fn check_identifiable(jac: &DMatrix<f64>, names: &[String]) -> Result<()> {
    for (name, col) in names.iter().zip(jac.column_iter()) {
        if col.norm() == 0.0 {
            return Err(Error::Identifiability(format!(
                "parameter {name} has no influence on the data (add pitch or speed diversity)"
            )));
        }
    }
    let scales = column_scales(jac);
    let mut normalized = jac.clone();
    for (j, mut col) in normalized.column_iter_mut().enumerate() {
        col /= scales[j];
    }
    let sv = normalized.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(min > 1e-10 * max) {
        return Err(Error::Identifiability(
            "rank-deficient Jacobian (data lacks pitch-angle or flight-direction diversity)".into(),
        ));
    }
    Ok(())
}

fn levenberg_marquardt(
    problem: &Problem,
    mut x: DVector<f64>,
    options: &FitOptions,
) -> Result<FitReport> {
    let names = problem.layout.names();
    let n_obs = problem.obs.len();
    let n_par = x.len();

    let mut r = problem.residuals(&x);
    let mut cost = r.norm_squared();
    let mut jac = problem.jacobian(&x);
    check_identifiable(&jac, &names)?;

    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let mut grad_norm = f64::INFINITY;

    while iterations < options.max_iterations {
        let scales = column_scales(&jac);
        let gradient = jac.transpose() * &r;
        grad_norm = gradient.component_div(&scales).norm();
        if grad_norm < options.gradient_tolerance || cost == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;

        let jtj = jac.transpose() * &jac;
        let mut accepted = false;
        // Raise damping until a step reduces the objective.
        while lambda < 1e16 {
            let mut damped = jtj.clone();
            for i in 0..n_par {
                damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&gradient));
            let candidate = &x + &step;
            let r_new = problem.residuals(&candidate);
            let cost_new = r_new.norm_squared();
            if cost_new.is_finite() && cost_new <= cost {
                let rel_change = (cost - cost_new) / cost.max(f64::MIN_POSITIVE);
                let rel_step = step.norm() / (x.norm() + 1e-12);
                x = candidate;
                r = r_new;
                cost = cost_new;
                jac = problem.jacobian(&x);
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel_change < options.objective_tolerance || rel_step < 1e-14 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No descent direction left at machine precision.
            converged = true;
        }
        if converged {
            let scales = column_scales(&jac);
            grad_norm = (jac.transpose() * &r).component_div(&scales).norm();
            break;
        }
    }

    check_identifiable(&jac, &names)?;
    let mut params = problem.layout.unpack(&x, problem.air_density);
    let dof = n_obs.saturating_sub(n_par).max(1) as f64;
    let sigma2 = cost / dof;
    if let Some(inv) = (jac.transpose() * &jac).try_inverse() {
        for (i, name) in names.iter().enumerate() {
            let se = (sigma2 * inv[(i, i)]).max(0.0).sqrt();
            params
                .relative_std_errors
                .insert(name.clone(), se / x[i].abs().max(f64::MIN_POSITIVE));
        }
    }

    Ok(FitReport {
        params,
        residual_rms: (cost / n_obs as f64).sqrt(),
        sample_count: n_obs,
        iterations,
        converged,
        gradient_norm: grad_norm,
    })
}
