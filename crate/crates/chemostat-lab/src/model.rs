//! Full problem instances: washout rate, nutrient input, and the species
//! roster with uptake responses and delays.

use crate::periodic::PeriodicFn;
use crate::report::{ConditionEntry, ConditionId, ConditionReport};
use crate::response::ResponseFn;
use crate::{Error, Result};

/// Relative slack when checking that d and S0 declare the same period.
const PERIOD_MATCH_TOL: f64 = 1e-12;

/// One species: uptake response and its delay.
#[derive(Debug, Clone)]
pub struct Species {
    pub response: ResponseFn,
    pub tau: f64,
}

impl Species {
    pub fn new(response: ResponseFn, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "species delay must be finite and nonnegative, got {tau}"
            )));
        }
        Ok(Species { response, tau })
    }
}

/// The n-species chemostat instance with periodic washout rate d and input
/// nutrient concentration S0. An empty species list is allowed so the
/// substrate-only diagnostics stay expressible.
#[derive(Debug, Clone)]
pub struct ChemostatModel {
    pub omega: f64,
    pub d: PeriodicFn,
    pub s0: PeriodicFn,
    pub species: Vec<Species>,
    d_bounds: (f64, f64),
    s0_bounds: (f64, f64),
}

impl ChemostatModel {
    pub fn new(omega: f64, d: PeriodicFn, s0: PeriodicFn, species: Vec<Species>) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidModel(format!(
                "period must be positive, got {omega}"
            )));
        }
        for (name, f) in [("washout rate", &d), ("input concentration", &s0)] {
            if ((f.period() - omega) / omega).abs() > PERIOD_MATCH_TOL {
                return Err(Error::InvalidModel(format!(
                    "{name} declares period {} but the model period is {omega}",
                    f.period()
                )));
            }
        }
        let d_bounds = d.min_max();
        let s0_bounds = s0.min_max();
        Ok(ChemostatModel {
            omega,
            d,
            s0,
            species,
            d_bounds,
            s0_bounds,
        })
    }

    pub fn n(&self) -> usize {
        self.species.len()
    }

    /// Largest delay (0 when there are no species).
    pub fn tau_max(&self) -> f64 {
        self.species.iter().map(|s| s.tau).fold(0.0, f64::max)
    }

    /// Smallest delay (0 when there are no species).
    pub fn tau_min(&self) -> f64 {
        if self.species.is_empty() {
            return 0.0;
        }
        self.species
            .iter()
            .map(|s| s.tau)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest pairwise delay difference, max_{i,j} (tau_i - tau_j) >= 0.
    pub fn tau_spread(&self) -> f64 {
        if self.species.is_empty() {
            0.0
        } else {
            self.tau_max() - self.tau_min()
        }
    }

    /// (d_lower, d_upper) over one period.
    pub fn d_bounds(&self) -> (f64, f64) {
        self.d_bounds
    }

    /// (S0_lower, S0_upper) over one period.
    pub fn s0_bounds(&self) -> (f64, f64) {
        self.s0_bounds
    }

    /// D(omega), the washout-rate integral over one period.
    pub fn d_period_integral(&self) -> f64 {
        self.d.period_integral()
    }

    /// exp(int_{t0}^{t1} d), signed exponent; used by every condition.
    pub fn exp_int_d(&self, t0: f64, t1: f64) -> f64 {
        self.d.integral(t0, t1).exp()
    }

    /// Integral of d over [t0, t1] with the ordering precondition enforced.
    pub fn integrate_d(&self, t0: f64, t1: f64) -> Result<f64> {
        if t0 > t1 {
            return Err(Error::InvalidArgument(format!(
                "integration bounds out of order: {t0} > {t1}"
            )));
        }
        Ok(self.d.integral(t0, t1))
    }
}

/// Extrema of a periodic function over one period (min, max).
pub fn periodic_min_max(f: &PeriodicFn) -> (f64, f64) {
    f.min_max()
}

/// Check the standing hypotheses: positivity of the forcings on a dense
/// grid, p_i(0) = 0, monotone non-decreasing responses with positive values
/// for positive arguments. Violations become report entries, not errors.
pub fn validate_model(model: &ChemostatModel) -> ConditionReport {
    let mut report = ConditionReport::new();

    for (label, f) in [("d", &model.d), ("S0", &model.s0)] {
        let (t_min, min) = f.argmin();
        report.push(
            ConditionEntry::from_margin(ConditionId::H1, min)
                .witness(t_min)
                .note(format!("{label} positivity: min {label}(t) over the period")),
        );
    }

    // Response sampling range: everything the dynamics can feed a response,
    // the dissipative bound max S0 * e^{d_upper tau} with a floor of 1 for
    // degenerate inputs.
    let (_, d_hi) = model.d_bounds();
    let (_, s0_hi) = model.s0_bounds();
    let hi = (s0_hi * (d_hi * model.tau_max()).exp()).max(1.0);
    let m = crate::defaults::MONOTONE_SAMPLES;
    let h = hi / m as f64;

    for (idx, sp) in model.species.iter().enumerate() {
        let p = &sp.response;
        let at_zero = p.eval(0.0);
        if at_zero != 0.0 {
            report.push(
                ConditionEntry::from_margin(ConditionId::H2, -at_zero.abs())
                    .species(idx + 1)
                    .witness(0.0)
                    .note("response must vanish at zero substrate"),
            );
            continue;
        }
        // Margin: worst of (positivity at the first positive sample) and
        // (smallest sampled increment). A flat segment gives margin 0,
        // which lands in the inconclusive band, as it should: sampling
        // cannot certify "non-decreasing and positive" at a plateau edge.
        let mut margin = p.eval(h);
        let mut witness = h;
        let mut prev = p.eval(h);
        for k in 2..=m {
            let x = k as f64 * h;
            let v = p.eval(x);
            let diff = v - prev;
            if diff < margin {
                margin = diff;
                witness = x;
            }
            prev = v;
        }
        report.push(
            ConditionEntry::from_margin(ConditionId::H2, margin)
                .species(idx + 1)
                .witness(witness)
                .note(format!(
                    "monotone uptake on [0, {hi:.3}]; witness is the substrate argument"
                )),
        );
    }

    report
}
