//! Parameter sweeps over the (uptake rate, delay) plane.
//!
//! Every grid point shares the forcing functions, so the washout solution
//! is computed once and reused. Points are independent pure computations
//! evaluated in a work pool; the returned rows are in grid order (rate
//! outer, delay inner) no matter how the pool schedules them.

use rayon::prelude::*;

use crate::conditions::{check_existence_with, check_extinction_with};
use crate::model::{ChemostatModel, Species};
use crate::report::{ConditionId, ConditionReport, Verdict};
use crate::response::ResponseFn;
use crate::washout::washout_solution;
use crate::{Error, Result};

/// Inclusive uniformly spaced axis.
#[derive(Debug, Clone, Copy)]
pub struct SweepAxis {
    lo: f64,
    hi: f64,
    steps: usize,
}

impl SweepAxis {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument(format!(
                "axis bounds [{lo}, {hi}] must be finite and ordered"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidArgument(format!(
                "axis needs at least 2 steps, got {steps}"
            )));
        }
        Ok(SweepAxis { lo, hi, steps })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn value(&self, k: usize) -> f64 {
        self.lo + (self.hi - self.lo) * k as f64 / (self.steps - 1) as f64
    }

    /// Grid spacing, the "one cell" unit for boundary localization.
    pub fn cell(&self) -> f64 {
        (self.hi - self.lo) / (self.steps - 1) as f64
    }
}

/// One grid point: the swept parameters plus the full condition battery
/// (extinction and existence families) for the single-species model.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub b: f64,
    pub tau: f64,
    pub report: ConditionReport,
}

/// Evaluate the condition battery on a rate/delay grid. The forcing
/// (omega, d, s0) comes from `base`; each point gets one Michaelis-Menten
/// species with rate `b`, the given `saturation`, and delay `tau`.
pub fn sweep_rate_delay(
    base: &ChemostatModel,
    b_axis: SweepAxis,
    tau_axis: SweepAxis,
    saturation: f64,
    grid_points: usize,
) -> Result<Vec<SweepPoint>> {
    if b_axis.lo <= 0.0 {
        return Err(Error::InvalidArgument(
            "uptake rates along the sweep axis must be positive".into(),
        ));
    }
    if tau_axis.lo < 0.0 {
        return Err(Error::InvalidArgument(
            "delays along the sweep axis must be nonnegative".into(),
        ));
    }
    let forcing_only =
        ChemostatModel::new(base.omega, base.d.clone(), base.s0.clone(), Vec::new())?;
    let washout = washout_solution(&forcing_only)?;

    let mut cells = Vec::with_capacity(b_axis.steps * tau_axis.steps);
    for i in 0..b_axis.steps {
        for j in 0..tau_axis.steps {
            cells.push((b_axis.value(i), tau_axis.value(j)));
        }
    }

    cells
        .into_par_iter()
        .map(|(b, tau)| {
            let species = Species::new(ResponseFn::michaelis_menten(b, saturation)?, tau)?;
            let model = ChemostatModel::new(
                base.omega,
                base.d.clone(),
                base.s0.clone(),
                vec![species],
            )?;
            let mut report = check_extinction_with(&model, &washout, grid_points);
            report.merge(check_existence_with(&model, &washout, grid_points));
            Ok(SweepPoint { b, tau, report })
        })
        .collect()
}

/// For each rate column, the first delay at which `id` stops holding, or
/// `None` when the verdict never flips inside the swept range. Rows must
/// come from `sweep_rate_delay` (grid order).
pub fn flip_delays(points: &[SweepPoint], tau_steps: usize, id: ConditionId) -> Vec<(f64, Option<f64>)> {
    points
        .chunks(tau_steps)
        .map(|column| {
            let b = column[0].b;
            let flip = column.iter().find_map(|pt| {
                let entry = pt.report.get(id, Some(1))?;
                (entry.verdict != Verdict::Holds).then_some(pt.tau)
            });
            (b, flip)
        })
        .collect()
}
