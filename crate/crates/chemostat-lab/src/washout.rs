//! The washout solution: the unique positive omega-periodic solution y*(t)
//! of the species-free nutrient balance y' = d(t)(S0(t) - y).
//!
//! Everything is built from one cumulative integral,
//! W(t) = int_0^t d(s) e^{int_0^s d} S0(s) ds, computed once on the grid:
//!
//! ```text
//! y*(0) = W(omega) / (e^{D(omega)} - 1),   D(omega) = int_0^omega d
//! y*(t) = e^{-int_0^t d} (y*(0) + W(t))
//! ```
//!
//! Using the same quadrature value W(omega) in both places makes
//! y*(omega) = y*(0) an algebraic identity, so periodicity of the stored
//! grid is exact by construction, independent of quadrature error.

use crate::model::ChemostatModel;
use crate::periodic::PeriodicFn;
use crate::quad::{self, prefix_integral};
use crate::{Error, Result};

/// The periodic washout solution with its extrema.
#[derive(Debug, Clone)]
pub struct WashoutSolution {
    pub y_star: PeriodicFn,
    /// y*(0).
    pub y0: f64,
    /// Minimum of y* over one period.
    pub min: f64,
    /// Maximum of y* over one period.
    pub max: f64,
    /// Raw node values y*(k omega / M), k = 0..M.
    grid_values: Vec<f64>,
}

fn require_positive_forcing(model: &ChemostatModel) -> Result<()> {
    let (d_lo, _) = model.d_bounds();
    if d_lo <= 0.0 {
        return Err(Error::InvalidModel(format!(
            "washout rate must stay positive; min d(t) = {d_lo}"
        )));
    }
    let (s0_lo, _) = model.s0_bounds();
    if s0_lo <= 0.0 {
        return Err(Error::InvalidModel(format!(
            "input concentration must stay positive; min S0(t) = {s0_lo}"
        )));
    }
    Ok(())
}

/// y*(0), the periodic initial value.
pub fn washout_initial(model: &ChemostatModel) -> Result<f64> {
    require_positive_forcing(model)?;
    Ok(build(model, crate::defaults::GRID_POINTS).0)
}

/// The washout solution at the default grid resolution.
pub fn washout_solution(model: &ChemostatModel) -> Result<WashoutSolution> {
    washout_solution_with(model, crate::defaults::GRID_POINTS)
}

/// The washout solution materialized on an M-point grid.
pub fn washout_solution_with(model: &ChemostatModel, points: usize) -> Result<WashoutSolution> {
    require_positive_forcing(model)?;
    if points < 8 {
        return Err(Error::InvalidArgument(format!(
            "washout grid needs at least 8 points, got {points}"
        )));
    }
    let (y0, grid_values) = build(model, points);
    let y_star = PeriodicFn::from_samples(model.omega, grid_values[..points].to_vec())?;
    let samples = crate::defaults::VALIDATION_SAMPLES;
    let (_, min) = quad::min_over_period(|t| y_star.eval(t), model.omega, samples);
    let (_, max) = quad::max_over_period(|t| y_star.eval(t), model.omega, samples);
    Ok(WashoutSolution {
        y_star,
        y0,
        min,
        max,
        grid_values,
    })
}

/// Effective resolution floor for the cumulative integral W. The growing
/// factor e^{int d} makes W the accuracy bottleneck; oversampling it is a
/// one-time cost that buys roughly two extra digits at the default grid.
const W_RESOLUTION: usize = 2048;

/// Shared kernel: y*(0) and the M+1 node values over [0, omega].
fn build(model: &ChemostatModel, points: usize) -> (f64, Vec<f64>) {
    let omega = model.omega;
    let h = omega / points as f64;
    let refine = W_RESOLUTION.div_ceil(points).max(1);
    let fine = points * refine;
    // Integrand of W: d(s) e^{int_0^s d} S0(s), defined for all real s.
    let g = |s: f64| model.d.eval(s) * model.d.integral(0.0, s).exp() * model.s0.eval(s);
    let w = prefix_integral(g, 0.0, omega, fine);
    let denom = model.d_period_integral().exp_m1();
    let y0 = w[fine] / denom;
    let values = (0..=points)
        .map(|k| {
            let t = k as f64 * h;
            (-model.d.integral(0.0, t)).exp() * (y0 + w[k * refine])
        })
        .collect();
    (y0, values)
}

impl WashoutSolution {
    pub fn eval(&self, t: f64) -> f64 {
        self.y_star.eval(t)
    }

    /// Number of grid intervals per period.
    pub fn points(&self) -> usize {
        self.grid_values.len() - 1
    }

    /// Node values y*(k omega / M) for k = 0..=M (last equals first).
    pub fn grid_values(&self) -> &[f64] {
        &self.grid_values
    }

    /// Defect of y* in y' = d(t)(S0(t) - y) at each stored node, with the
    /// derivative from 4th-order centered differences so differencing error
    /// stays far below the quadrature budget. Returns (t, y*, residual).
    pub fn ode_residual_series(&self, model: &ChemostatModel) -> Vec<(f64, f64, f64)> {
        let m = self.points();
        let h = model.omega / m as f64;
        let deriv = quad::derivative_periodic(&self.grid_values[..m], model.omega);
        (0..m)
            .map(|k| {
                let t = k as f64 * h;
                let y = self.grid_values[k];
                let res = (deriv[k] - model.d.eval(t) * (model.s0.eval(t) - y)).abs();
                (t, y, res)
            })
            .collect()
    }

    pub fn ode_residual_max(&self, model: &ChemostatModel) -> f64 {
        self.ode_residual_series(model)
            .into_iter()
            .map(|(_, _, r)| r)
            .fold(0.0, f64::max)
    }
}
