//! Periodic scalar functions of time: the washout rate d(t), the nutrient
//! input S0(t), and the computed washout solution all live here.
//!
//! Closed forms (constant, sinusoid) carry exact antiderivatives so the
//! exponentials e^{int d} that enter every threshold condition are free of
//! quadrature error. Sampled and generic forms fall back to 4th-order
//! quadrature built once at construction.

use std::fmt;
use std::sync::Arc;

use crate::quad::{self, PeriodicPrefix};
use crate::{Error, Result};

/// How tightly a sinusoid's frequency must match a whole number of cycles
/// per period.
const FREQ_MATCH_TOL: f64 = 1e-9;

#[derive(Clone)]
enum Repr {
    Constant(f64),
    /// offset + sin_coef * sin(freq t) + cos_coef * cos(freq t), with
    /// freq * period a whole multiple of 2 pi.
    Sinusoid {
        offset: f64,
        sin_coef: f64,
        cos_coef: f64,
        freq: f64,
    },
    /// Uniform samples at t_k = k omega / M, cubic interpolation between.
    Grid(Arc<Vec<f64>>),
    /// Arbitrary expression, argument-reduced to [0, omega) before calling.
    Expr(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// An omega-periodic scalar function with evaluation, exact-where-possible
/// integration, and extrema queries.
#[derive(Clone)]
pub struct PeriodicFn {
    period: f64,
    repr: Repr,
    /// Cumulative integral for forms without a symbolic antiderivative.
    prefix: Option<PeriodicPrefix>,
}

impl fmt::Debug for PeriodicFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Constant(c) => write!(f, "PeriodicFn::constant({c})"),
            Repr::Sinusoid {
                offset,
                sin_coef,
                cos_coef,
                freq,
            } => write!(
                f,
                "PeriodicFn::sinusoid({offset} + {sin_coef} sin({freq} t) + {cos_coef} cos({freq} t))"
            ),
            Repr::Grid(v) => write!(f, "PeriodicFn::grid({} samples)", v.len()),
            Repr::Expr(_) => write!(f, "PeriodicFn::expr(period = {})", self.period),
        }
    }
}

impl PeriodicFn {
    pub fn constant(period: f64, value: f64) -> Result<Self> {
        check_period(period)?;
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "constant function value must be finite, got {value}"
            )));
        }
        Ok(PeriodicFn {
            period,
            repr: Repr::Constant(value),
            prefix: None,
        })
    }

    /// `offset + sin_coef sin(freq t) + cos_coef cos(freq t)`. The frequency
    /// must complete a whole number of cycles per period so the function is
    /// genuinely omega-periodic.
    pub fn sinusoid(period: f64, offset: f64, sin_coef: f64, cos_coef: f64, freq: f64) -> Result<Self> {
        check_period(period)?;
        if !(offset.is_finite() && sin_coef.is_finite() && cos_coef.is_finite()) {
            return Err(Error::InvalidArgument(
                "sinusoid coefficients must be finite".into(),
            ));
        }
        if !(freq.is_finite() && freq > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sinusoid frequency must be positive, got {freq}"
            )));
        }
        let cycles = freq * period / std::f64::consts::TAU;
        if (cycles - cycles.round()).abs() > FREQ_MATCH_TOL * cycles.max(1.0) || cycles.round() < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "frequency {freq} does not fit the period {period}: {cycles} cycles per period"
            )));
        }
        Ok(PeriodicFn {
            period,
            repr: Repr::Sinusoid {
                offset,
                sin_coef,
                cos_coef,
                freq,
            },
            prefix: None,
        })
    }

    /// Sinusoid at the base harmonic, freq = 2 pi / omega.
    pub fn base_sinusoid(period: f64, offset: f64, sin_coef: f64, cos_coef: f64) -> Result<Self> {
        let freq = std::f64::consts::TAU / period;
        Self::sinusoid(period, offset, sin_coef, cos_coef, freq)
    }

    /// Uniform samples over [0, omega), cubic interpolation between nodes.
    pub fn from_samples(period: f64, samples: Vec<f64>) -> Result<Self> {
        check_period(period)?;
        if samples.len() < 4 {
            return Err(Error::InvalidArgument(format!(
                "sampled periodic function needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sampled periodic function contains a non-finite value {bad}"
            )));
        }
        let samples = Arc::new(samples);
        let m = samples.len().max(crate::defaults::GRID_POINTS);
        let eval_samples = samples.clone();
        let period_c = period;
        let prefix = PeriodicPrefix::new(
            move |t| quad::interp_periodic(&eval_samples, period_c, t),
            period,
            m,
        );
        Ok(PeriodicFn {
            period,
            repr: Repr::Grid(samples),
            prefix: Some(prefix),
        })
    }

    /// Arbitrary closure, made periodic by argument reduction to [0, omega).
    pub fn from_fn(period: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        check_period(period)?;
        let f = Arc::new(f);
        let g = f.clone();
        let prefix = PeriodicPrefix::new(
            move |t| g(t.rem_euclid(period)),
            period,
            crate::defaults::GRID_POINTS,
        );
        Ok(PeriodicFn {
            period,
            repr: Repr::Expr(f),
            prefix: Some(prefix),
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Constant(c) => *c,
            Repr::Sinusoid {
                offset,
                sin_coef,
                cos_coef,
                freq,
            } => {
                // Reduce first so eval(t) and eval(t + omega) agree to
                // rounding even for large |t|.
                let s = t.rem_euclid(self.period);
                offset + sin_coef * (freq * s).sin() + cos_coef * (freq * s).cos()
            }
            Repr::Grid(v) => quad::interp_periodic(v, self.period, t),
            Repr::Expr(f) => f(t.rem_euclid(self.period)),
        }
    }

    /// Signed integral over [t0, t1]; exact for constant and sinusoid forms.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        match &self.repr {
            Repr::Constant(c) => c * (t1 - t0),
            Repr::Sinusoid {
                offset,
                sin_coef,
                cos_coef,
                freq,
            } => {
                let anti = |t: f64| {
                    offset * t - sin_coef / freq * (freq * t).cos()
                        + cos_coef / freq * (freq * t).sin()
                };
                anti(t1) - anti(t0)
            }
            _ => {
                let prefix = self.prefix.as_ref().expect("sampled forms carry a prefix");
                prefix.integral(t0, t1)
            }
        }
    }

    /// Integral over one full period.
    pub fn period_integral(&self) -> f64 {
        match &self.repr {
            Repr::Constant(c) => c * self.period,
            Repr::Sinusoid { offset, .. } => offset * self.period,
            _ => self.prefix.as_ref().expect("sampled forms carry a prefix").total(),
        }
    }

    /// Extrema over one period: exact for closed forms, dense scan with
    /// local refinement otherwise. Returns (min, max).
    pub fn min_max(&self) -> (f64, f64) {
        match &self.repr {
            Repr::Constant(c) => (*c, *c),
            Repr::Sinusoid {
                offset,
                sin_coef,
                cos_coef,
                ..
            } => {
                let amp = sin_coef.hypot(*cos_coef);
                (offset - amp, offset + amp)
            }
            _ => {
                let samples = crate::defaults::VALIDATION_SAMPLES;
                let (_, lo) = quad::min_over_period(|t| self.eval(t), self.period, samples);
                let (_, hi) = quad::max_over_period(|t| self.eval(t), self.period, samples);
                (lo, hi)
            }
        }
    }

    /// Minimum over one period together with where it is attained.
    pub fn argmin(&self) -> (f64, f64) {
        quad::min_over_period(
            |t| self.eval(t),
            self.period,
            crate::defaults::VALIDATION_SAMPLES,
        )
    }

    /// Values at the m uniform nodes t_k = k omega / m.
    pub fn sample_uniform(&self, m: usize) -> Vec<f64> {
        let h = self.period / m as f64;
        (0..m).map(|k| self.eval(k as f64 * h)).collect()
    }

    /// True when the representation has an exact antiderivative.
    pub fn is_closed_form(&self) -> bool {
        matches!(self.repr, Repr::Constant(_) | Repr::Sinusoid { .. })
    }

    /// The constant value, if this function is one. A sinusoid with zero
    /// oscillating coefficients also counts.
    pub fn as_constant(&self) -> Option<f64> {
        match self.repr {
            Repr::Constant(c) => Some(c),
            Repr::Sinusoid {
                offset,
                sin_coef,
                cos_coef,
                ..
            } if sin_coef == 0.0 && cos_coef == 0.0 => Some(offset),
            _ => None,
        }
    }

    /// `(offset, sin_coef, cos_coef, freq)` when the function is a single
    /// sinusoid; constants are reported with zero coefficients and the base
    /// frequency `2 pi / period`.
    pub fn as_sinusoid(&self) -> Option<(f64, f64, f64, f64)> {
        match self.repr {
            Repr::Constant(c) => Some((c, 0.0, 0.0, std::f64::consts::TAU / self.period)),
            Repr::Sinusoid {
                offset,
                sin_coef,
                cos_coef,
                freq,
            } => Some((offset, sin_coef, cos_coef, freq)),
            _ => None,
        }
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match &self.repr {
            Repr::Constant(c) => format!("constant {c}"),
            Repr::Sinusoid {
                offset,
                sin_coef,
                cos_coef,
                freq,
            } => {
                let mut s = format!("{offset}");
                if *sin_coef != 0.0 {
                    s += &format!(" + {sin_coef} sin({freq} t)");
                }
                if *cos_coef != 0.0 {
                    s += &format!(" + {cos_coef} cos({freq} t)");
                }
                s
            }
            Repr::Grid(v) => format!("grid with {} samples", v.len()),
            Repr::Expr(_) => "generic expression".into(),
        }
    }
}

fn check_period(period: f64) -> Result<()> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "period must be positive and finite, got {period}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_validate_inputs() {
        assert!(PeriodicFn::constant(0.0, 1.0).is_err());
        assert!(PeriodicFn::constant(1.0, f64::NAN).is_err());
        // 0.5 cycles per period is not periodic.
        assert!(PeriodicFn::sinusoid(std::f64::consts::TAU, 1.0, 0.5, 0.0, 0.5).is_err());
        assert!(PeriodicFn::sinusoid(std::f64::consts::TAU, 1.0, 0.5, 0.0, 2.0).is_ok());
        assert!(PeriodicFn::from_samples(1.0, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn closed_forms_are_periodic_to_rounding() {
        let omega = std::f64::consts::TAU;
        let f = PeriodicFn::base_sinusoid(omega, 2.0, 1.0, 0.0).unwrap();
        for t in [-7.25, 0.0, 0.33, 3.0, 123.456] {
            let a = f.eval(t);
            let b = f.eval(t + omega);
            assert!((a - b).abs() < 1e-12, "eval({t}) = {a} vs eval(t+w) = {b}");
        }
    }

    #[test]
    fn sinusoid_integral_matches_antiderivative() {
        let omega = std::f64::consts::TAU;
        // 1 + 0.5 sin t over [0, pi]: pi + 1.
        let d = PeriodicFn::base_sinusoid(omega, 1.0, 0.5, 0.0).unwrap();
        let v = d.integral(0.0, std::f64::consts::PI);
        assert!((v - (std::f64::consts::PI + 1.0)).abs() < 1e-14);
        // Whole periods contribute offset * omega each.
        assert!((d.integral(0.0, 2.0 * omega) - 2.0 * omega).abs() < 1e-12);
        assert!((d.period_integral() - omega).abs() < 1e-14);
    }

    #[test]
    fn sampled_form_integrates_to_quadrature_accuracy() {
        let omega = std::f64::consts::TAU;
        let exact = PeriodicFn::base_sinusoid(omega, 2.0, 1.0, 0.0).unwrap();
        let sampled =
            PeriodicFn::from_samples(omega, exact.sample_uniform(256)).unwrap();
        for (t0, t1) in [(0.0, 1.0), (-2.0, 5.0), (0.3, 0.3 + omega)] {
            let want = exact.integral(t0, t1);
            let got = sampled.integral(t0, t1);
            assert!((want - got).abs() < 1e-8, "[{t0},{t1}]: {got} vs {want}");
        }
    }

    #[test]
    fn expr_form_reduces_arguments() {
        let omega = 2.0;
        // Smooth across the period seam: sin^2(pi t) repeats with period 1.
        let f =
            PeriodicFn::from_fn(omega, |t| 1.0 + (std::f64::consts::PI * t).sin().powi(2)).unwrap();
        assert!((f.eval(0.5) - f.eval(0.5 + 3.0 * omega)).abs() < 1e-15);
        // int_0^2 (1 + sin^2(pi t)) dt = 2 + 1.
        assert!((f.period_integral() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn min_max_exact_for_mixed_sinusoid() {
        let omega = std::f64::consts::TAU;
        // 2 + (1/2)(sin t - cos t): extrema 2 -/+ 1/sqrt(2).
        let f = PeriodicFn::base_sinusoid(omega, 2.0, 0.5, -0.5).unwrap();
        let (lo, hi) = f.min_max();
        assert!((lo - (2.0 - 1.0 / 2.0f64.sqrt())).abs() < 1e-15);
        assert!((hi - (2.0 + 1.0 / 2.0f64.sqrt())).abs() < 1e-15);
        assert!((lo - 1.292_893_218_813_452_5).abs() < 1e-15);
        assert!((hi - 2.707_106_781_186_547_6).abs() < 1e-15);
    }

    #[test]
    fn min_max_scan_matches_closed_form() {
        let omega = std::f64::consts::TAU;
        let f = PeriodicFn::from_fn(omega, |t| 2.0 + 0.5 * (t.sin() - t.cos())).unwrap();
        let (lo, hi) = f.min_max();
        assert!((lo - (2.0 - 1.0 / 2.0f64.sqrt())).abs() < 1e-10);
        assert!((hi - (2.0 + 1.0 / 2.0f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn integral_is_additive_and_window_invariant() {
        let omega = std::f64::consts::TAU;
        let f = PeriodicFn::from_fn(omega, |t| 1.5 + 0.4 * (2.0 * t).cos()).unwrap();
        let (a, b, c) = (0.2, 1.7, 9.1);
        let add = f.integral(a, b) + f.integral(b, c) - f.integral(a, c);
        assert!(add.abs() < 1e-12);
        for t in [-1.0, 0.0, 2.5] {
            assert!((f.integral(t, t + omega) - f.period_integral()).abs() < 1e-10);
        }
    }
}
