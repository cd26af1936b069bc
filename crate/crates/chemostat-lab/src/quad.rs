//! Quadrature and interpolation primitives on uniform grids.
//!
//! Everything downstream (washout solution, condition margins, the periodic
//! fixed-point operator) reduces to three kernels:
//! * composite full-period quadrature (trapezoid or Simpson),
//! * cumulative integrals built from a 4-point interpolatory rule per
//!   interval (globally 4th order),
//! * 4-point Lagrange interpolation and 5-point centered differentiation on
//!   periodic uniform grids (both 4th order).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadRule {
    Trapezoid,
    Simpson,
}

/// Resolution and rule for full-period integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub points_per_period: usize,
    pub rule: QuadRule,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid {
            points_per_period: crate::defaults::GRID_POINTS,
            rule: QuadRule::Simpson,
        }
    }
}

impl QuadratureGrid {
    pub fn new(points_per_period: usize, rule: QuadRule) -> Result<Self> {
        if points_per_period < 4 {
            return Err(Error::InvalidArgument(format!(
                "quadrature grid needs at least 4 points per period, got {points_per_period}"
            )));
        }
        if rule == QuadRule::Simpson && !points_per_period.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "Simpson rule needs an even point count, got {points_per_period}"
            )));
        }
        Ok(QuadratureGrid {
            points_per_period,
            rule,
        })
    }

    pub fn m(&self) -> usize {
        self.points_per_period
    }

    /// Integrate `f` over `[a, b]` with the configured composite rule.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let m = self.points_per_period;
        let h = (b - a) / m as f64;
        match self.rule {
            QuadRule::Trapezoid => {
                let mut acc = 0.5 * (f(a) + f(b));
                for k in 1..m {
                    acc += f(a + k as f64 * h);
                }
                acc * h
            }
            QuadRule::Simpson => {
                let mut acc = f(a) + f(b);
                for k in 1..m {
                    let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                    acc += w * f(a + k as f64 * h);
                }
                acc * h / 3.0
            }
        }
    }
}

/// Cumulative integral of uniformly sampled data.
///
/// `samples[k]` holds `f(a + k h)` for `k = 0..=m`; `left` and `right` are
/// the ghost values `f(a - h)` and `f(a + (m+1) h)`. Each interval is
/// integrated by the cubic through its four surrounding nodes,
/// `h/24 (-f_{k-1} + 13 f_k + 13 f_{k+1} - f_{k+2})`, which is 4th-order
/// accurate globally. Returns the `m + 1` prefix values starting at 0.
pub fn prefix_from_samples(samples: &[f64], h: f64, left: f64, right: f64) -> Vec<f64> {
    let m = samples.len() - 1;
    assert!(m >= 3, "prefix integration needs at least 4 samples");
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for k in 0..m {
        let fm1 = if k == 0 { left } else { samples[k - 1] };
        let fp2 = if k + 2 > m { right } else { samples[k + 2] };
        acc += h / 24.0 * (-fm1 + 13.0 * samples[k] + 13.0 * samples[k + 1] - fp2);
        prefix.push(acc);
    }
    prefix
}

/// Cumulative integral `t -> int_a^t f` of a closure on `[a, b]`, sampled at
/// `m + 1` uniform nodes. The closure is evaluated at one ghost node on each
/// side, so it must be defined slightly beyond `[a, b]`.
pub fn prefix_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> Vec<f64> {
    let h = (b - a) / m as f64;
    let samples: Vec<f64> = (0..=m).map(|k| f(a + k as f64 * h)).collect();
    prefix_from_samples(&samples, h, f(a - h), f(b + h))
}

/// Cumulative integral of an omega-periodic integrand, evaluable at any real
/// argument: `eval(t + omega) = eval(t) + total`.
#[derive(Debug, Clone)]
pub struct PeriodicPrefix {
    omega: f64,
    total: f64,
    /// Periodic part q(t) = prefix(t) - t/omega * total at the grid nodes.
    q: Vec<f64>,
}

impl PeriodicPrefix {
    /// Build from a closure that is omega-periodic (it is trusted to be; the
    /// constructor samples it directly, including ghost nodes outside
    /// `[0, omega]`).
    pub fn new(f: impl Fn(f64) -> f64, omega: f64, m: usize) -> Self {
        let prefix = prefix_integral(&f, 0.0, omega, m);
        let total = prefix[m];
        let q = (0..m)
            .map(|k| prefix[k] - k as f64 / m as f64 * total)
            .collect();
        PeriodicPrefix { omega, total, q }
    }

    /// Integral over one full period.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// `int_0^t f` for any real `t` (negative allowed).
    pub fn eval(&self, t: f64) -> f64 {
        let cycles = (t / self.omega).floor();
        let s = t - cycles * self.omega;
        let periodic_part = interp_periodic(&self.q, self.omega, s);
        cycles * self.total + s / self.omega * self.total + periodic_part
    }

    /// `int_{t0}^{t1} f` (signed).
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        self.eval(t1) - self.eval(t0)
    }
}

/// Cumulative integral of an exponentially weighted periodic integrand,
/// `P(t) = int_0^t e^{int_0^s d} g(s) ds` with `g` omega-periodic and
/// `D = int_0^omega d`. Such integrands are not periodic, but they scale by
/// `e^D` per period, so `P` extends from one stored period to any real `t`:
///
/// ```text
/// P(k omega + s) = P(omega) (e^{kD} - 1)/(e^D - 1) + e^{kD} P(s)
/// ```
#[derive(Debug, Clone)]
pub struct GrowingPrefix {
    omega: f64,
    cap_d: f64,
    /// expm1(D), kept separately for precision near D = 0.
    denom: f64,
    total: f64,
    nodes: Vec<f64>,
    h: f64,
}

impl GrowingPrefix {
    /// `integrand` must equal `e^{int_0^s d} g(s)` for an omega-periodic
    /// `g`, evaluable at any real argument (midpoints of the grid cells are
    /// read directly).
    ///
    /// Each cell is integrated by Simpson's rule with its midpoint. The
    /// weights are positive, so a nonnegative integrand yields a monotone
    /// prefix; combined with the exact per-period scaling this makes the
    /// cone bound of the period-map operator hold at the grid nodes for
    /// arbitrary nonnegative data, not just smooth ones. Stencils with
    /// negative weights lose that: near a spike the prefix wiggles and the
    /// bound, which a concentrated integrand attains with equality, breaks
    /// at finite resolution.
    pub fn new(integrand: impl Fn(f64) -> f64, omega: f64, cap_d: f64, m: usize) -> Self {
        let h = omega / m as f64;
        let mut nodes = Vec::with_capacity(m + 1);
        nodes.push(0.0);
        let mut acc = 0.0;
        let mut left = integrand(0.0);
        for k in 0..m {
            let mid = integrand((k as f64 + 0.5) * h);
            let right = integrand((k + 1) as f64 * h);
            acc += h / 6.0 * (left + 4.0 * mid + right);
            nodes.push(acc);
            left = right;
        }
        let total = nodes[m];
        GrowingPrefix {
            omega,
            cap_d,
            denom: cap_d.exp_m1(),
            total,
            nodes,
            h,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = (t / self.omega).floor();
        let s = t - k * self.omega;
        let scale = (k * self.cap_d).exp();
        let base = if k == 0.0 {
            0.0
        } else {
            self.total * (k * self.cap_d).exp_m1() / self.denom
        };
        base + scale * interp_clamped(&self.nodes, 0.0, self.h, s)
    }

    /// `int_t^{t+omega}` of the integrand.
    pub fn window(&self, t: f64) -> f64 {
        self.eval(t + self.omega) - self.eval(t)
    }

    /// `P(omega)`, the first-period total.
    pub fn total(&self) -> f64 {
        self.total
    }
}

/// 4-point Lagrange interpolation of periodic uniform samples over `[0,
/// omega)`. `values[k]` sits at `t_k = k omega / M`; indices wrap.
pub fn interp_periodic(values: &[f64], omega: f64, t: f64) -> f64 {
    let m = values.len();
    debug_assert!(m >= 4);
    let x = (t / omega).rem_euclid(1.0) * m as f64;
    let i = (x.floor() as usize).min(m - 1);
    let theta = x - i as f64;
    let w = cubic_weights(theta);
    let idx = |off: isize| values[(i as isize + off).rem_euclid(m as isize) as usize];
    w[0] * idx(-1) + w[1] * idx(0) + w[2] * idx(1) + w[3] * idx(2)
}

/// Lagrange weights for nodes at relative positions -1, 0, 1, 2 evaluated at
/// `theta` in [0, 1].
pub fn cubic_weights(theta: f64) -> [f64; 4] {
    let t = theta;
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// 4-point Lagrange interpolation on a non-periodic uniform grid; the stencil
/// is clamped at the ends. `values[k]` sits at `a + k h`.
pub fn interp_clamped(values: &[f64], a: f64, h: f64, t: f64) -> f64 {
    let m = values.len() - 1;
    if m == 0 {
        return values[0];
    }
    let x = ((t - a) / h).clamp(0.0, m as f64);
    if m < 3 {
        // Too few points for a cubic: fall back to linear.
        let i = (x.floor() as usize).min(m - 1);
        let theta = x - i as f64;
        return values[i] * (1.0 - theta) + values[i + 1] * theta;
    }
    let i = (x.floor() as usize).min(m - 1);
    // Shift the 4-point stencil inside the data at the boundaries.
    let base = i.saturating_sub(1).min(m - 3);
    let theta = x - (base + 1) as f64;
    let w = cubic_weights(theta);
    w[0] * values[base] + w[1] * values[base + 1] + w[2] * values[base + 2] + w[3] * values[base + 3]
}

/// 5-point centered derivative of periodic uniform samples (4th order).
pub fn derivative_periodic(values: &[f64], omega: f64) -> Vec<f64> {
    let m = values.len();
    let h = omega / m as f64;
    let idx = |k: isize| values[k.rem_euclid(m as isize) as usize];
    (0..m as isize)
        .map(|k| (-idx(k + 2) + 8.0 * idx(k + 1) - 8.0 * idx(k - 1) + idx(k - 2)) / (12.0 * h))
        .collect()
}

/// Centered differences at interior nodes, one-sided 2nd-order stencils at
/// the ends, on a non-periodic uniform grid.
pub fn derivative_uniform(values: &[f64], h: f64) -> Vec<f64> {
    let m = values.len();
    assert!(m >= 3);
    let mut out = Vec::with_capacity(m);
    out.push((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h));
    for k in 1..m - 1 {
        out.push((values[k + 1] - values[k - 1]) / (2.0 * h));
    }
    out.push((3.0 * values[m - 1] - 4.0 * values[m - 2] + values[m - 3]) / (2.0 * h));
    out
}

/// Minimum of a continuous omega-periodic function: dense scan plus
/// golden-section refinement around the best sample. Returns `(argmin, min)`.
pub fn min_over_period(f: impl Fn(f64) -> f64, omega: f64, samples: usize) -> (f64, f64) {
    let n = samples.max(8);
    let h = omega / n as f64;
    let mut best_k = 0usize;
    let mut best = f64::INFINITY;
    for k in 0..n {
        let v = f(k as f64 * h);
        if v < best {
            best = v;
            best_k = k;
        }
    }
    // Refine inside the bracket spanning one sample on each side. The
    // periodic closure is evaluable at negative arguments, so no wrapping is
    // needed.
    let a = (best_k as f64 - 1.0) * h;
    let b = (best_k as f64 + 1.0) * h;
    let (t, v) = golden_min(&f, a, b, 1e-12 * omega.max(1.0));
    if v < best {
        ((t / omega).rem_euclid(1.0) * omega, v)
    } else {
        (best_k as f64 * h, best)
    }
}

/// Maximum via the negated minimum scan. Returns `(argmax, max)`.
pub fn max_over_period(f: impl Fn(f64) -> f64, omega: f64, samples: usize) -> (f64, f64) {
    let (t, neg) = min_over_period(|t| -f(t), omega, samples);
    (t, -neg)
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}
