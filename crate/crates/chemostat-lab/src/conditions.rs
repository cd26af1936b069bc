//! Sufficient-condition checkers with numeric margins.
//!
//! Each inequality is evaluated as a margin, the minimum over a period grid
//! (refined near the worst point) of favorable side minus unfavorable side.
//! A clearly positive margin certifies the condition, a clearly negative one
//! certifies its failure, and anything within `EQUALITY_BAND` of zero is
//! reported inconclusive instead of being rounded to a verdict.

use crate::defaults::{EQUALITY_BAND, GRID_POINTS, ROOT_SCAN_SAMPLES, ROOT_TOL};
use crate::model::ChemostatModel;
use crate::periodic::PeriodicFn;
use crate::quad::{self, GrowingPrefix};
use crate::report::{ConditionEntry, ConditionId, ConditionReport, PersistenceEstimate, Verdict};
use crate::solver::{self, PeriodicCandidate};
use crate::washout::WashoutSolution;
use crate::{Error, Result};

/// Samples of h(s) retained in a `PersistenceEstimate` for plotting.
const H_SAMPLE_POINTS: usize = 256;

/// Extinction conditions per species: the pointwise threshold, the stability
/// inequality, its strict-somewhere strengthening, and the averaged growth
/// exponent r_i with its sign-constancy certificate.
pub fn check_extinction(model: &ChemostatModel, washout: &WashoutSolution) -> ConditionReport {
    check_extinction_with(model, washout, GRID_POINTS)
}

pub fn check_extinction_with(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    samples: usize,
) -> ConditionReport {
    let samples = samples.max(8);
    let omega = model.omega;
    let mut report = ConditionReport::new();
    for (idx, sp) in model.species.iter().enumerate() {
        let num = idx + 1;
        let tau = sp.tau;
        let uptake = |t: f64| sp.response.eval(washout.eval(t));

        // Pointwise threshold: p_i(y*(t)) < d(t+tau) e^{int_t^{t+tau} d}.
        let pointwise = |t: f64| model.d.eval(t + tau) * model.exp_int_d(t, t + tau) - uptake(t);
        let (t_pt, m_pt) = quad::min_over_period(pointwise, omega, samples);
        report.push(
            ConditionEntry::from_margin(ConditionId::ExtI, m_pt)
                .species(num)
                .witness(t_pt),
        );

        // Stability inequality: p_i(y*(t)) <= d(t) e^{int_t^{t+tau} d}.
        let stab = |t: f64| model.d.eval(t) * model.exp_int_d(t, t + tau) - uptake(t);
        let (t_stab, m_stab) = quad::min_over_period(stab, omega, samples);
        report.push(
            ConditionEntry::from_margin(ConditionId::ExtStab, m_stab)
                .species(num)
                .witness(t_stab),
        );

        // Attraction needs the stability inequality plus strictness at some
        // point, so the margin is the weaker of the two requirements.
        let (t_strict, strict) = quad::max_over_period(stab, omega, samples);
        let (t_gas, m_gas) = if m_stab <= strict {
            (t_stab, m_stab)
        } else {
            (t_strict, strict)
        };
        report.push(
            ConditionEntry::from_margin(ConditionId::ExtGas, m_gas)
                .species(num)
                .witness(t_gas),
        );

        // Averaged growth exponent r_i and the sign-constancy of its
        // integrand, without which the sign of r_i decides nothing.
        let integrand = |t: f64| model.exp_int_d(t + tau, t) * uptake(t) - model.d.eval(t);
        let r_i = quad::prefix_integral(integrand, 0.0, omega, samples)[samples];
        let (_, hi) = quad::max_over_period(integrand, omega, samples);
        let (_, lo) = quad::min_over_period(integrand, omega, samples);
        let dominant = if hi.abs() >= lo.abs() { 1.0 } else { -1.0 };
        let (t_sign, m_sign) =
            quad::min_over_period(|t| dominant * integrand(t), omega, samples);
        let mut entry = ConditionEntry::from_margin(ConditionId::RiSign, m_sign)
            .species(num)
            .witness(t_sign);
        entry = if m_sign > EQUALITY_BAND {
            entry.note(format!("r_i = {r_i:.6e}, integrand keeps one sign"))
        } else {
            entry.note(format!(
                "r_i = {r_i:.6e}, but the integrand changes sign, so the r_i threshold is not decisive"
            ))
        };
        report.push(entry);
    }
    report
}

/// Existence conditions per species: the windowed-integral criterion, its
/// three pointwise/averaged strengthenings, and the constant-input variants
/// when the input concentration is constant.
pub fn check_existence(model: &ChemostatModel, washout: &WashoutSolution) -> ConditionReport {
    check_existence_with(model, washout, GRID_POINTS)
}

pub fn check_existence_with(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    samples: usize,
) -> ConditionReport {
    let samples = samples.max(8);
    let omega = model.omega;
    let cap_d = model.d_period_integral();
    let denom = cap_d.exp_m1();
    let mut report = ConditionReport::new();

    // e^{int_0^s d}, the growth weight shared by the windowed integrals.
    let weight = |s: f64| model.exp_int_d(0.0, s);
    let s0_const = model.s0.as_constant();
    let weight_prefix = s0_const
        .is_some()
        .then(|| GrowingPrefix::new(weight, omega, cap_d, samples));

    for (idx, sp) in model.species.iter().enumerate() {
        let num = idx + 1;
        let tau = sp.tau;
        let uptake = |t: f64| sp.response.eval(washout.eval(t));
        let gain = |t: f64| model.exp_int_d(t, t + tau);

        // Windowed criterion: min_t int_t^{t+omega} e^{int_{t+tau}^s d}
        // p_i(y*(s)) ds > e^D - 1. The integrand splits into the shared
        // growth weight and a periodic factor, so one growing prefix gives
        // the window at every t.
        let prefix = GrowingPrefix::new(|s| weight(s) * uptake(s), omega, cap_d, samples);
        let windowed = |t: f64| prefix.window(t) * model.exp_int_d(t + tau, 0.0);
        let (t_h3, w_min) = quad::min_over_period(windowed, omega, samples);
        // Mean-value diagnostic: average uptake against average loss. A
        // conjectured but unproven criterion, so it never becomes a verdict.
        let mean_uptake = quad::prefix_integral(uptake, 0.0, omega, samples)[samples] / omega;
        let loss = |t: f64| model.d.eval(t + tau) * gain(t);
        let mean_loss = quad::prefix_integral(loss, 0.0, omega, samples)[samples] / omega;
        report.push(
            ConditionEntry::from_margin(ConditionId::H3, w_min - denom)
                .species(num)
                .witness(t_h3)
                .note(format!(
                    "mean uptake minus mean loss = {:+.6e} (diagnostic only)",
                    mean_uptake - mean_loss
                )),
        );

        // Pointwise strengthening: p_i(y*(t)) > d(t+tau) e^{int_t^{t+tau} d}.
        let (t_a, m_a) = quad::min_over_period(|t| uptake(t) - loss(t), omega, samples);
        report.push(
            ConditionEntry::from_margin(ConditionId::H3A, m_a)
                .species(num)
                .witness(t_a),
        );

        // Averaged strengthening: int_0^omega p_i(y*) >= (e^D - 1) max_t gain.
        let period_uptake = omega * mean_uptake;
        let (t_gain, gain_max) = quad::max_over_period(gain, omega, samples);
        report.push(
            ConditionEntry::from_margin(ConditionId::H3B, period_uptake - denom * gain_max)
                .species(num)
                .witness(t_gain),
        );

        // Ratio strengthening: min_t p_i(y*(t))/d(t) > max_t gain.
        let (t_c, ratio_min) =
            quad::min_over_period(|t| uptake(t) / model.d.eval(t), omega, samples);
        report.push(
            ConditionEntry::from_margin(ConditionId::H3C, ratio_min - gain_max)
                .species(num)
                .witness(t_c),
        );

        // Constant-input variants compare p_i(S0) against pure dilution.
        if let (Some(s0), Some(wp)) = (s0_const, weight_prefix.as_ref()) {
            let p_s0 = sp.response.eval(s0);
            let dilution_window =
                |t: f64| wp.window(t - tau) * model.exp_int_d(t, 0.0);
            let (t_h4, b_min) = quad::min_over_period(dilution_window, omega, samples);
            report.push(
                ConditionEntry::from_margin(ConditionId::H4, p_s0 * b_min - denom)
                    .species(num)
                    .witness(t_h4),
            );
            let trailing = |t: f64| model.d.eval(t) * model.exp_int_d(t - tau, t);
            let (t_40, trail_max) = quad::max_over_period(trailing, omega, samples);
            report.push(
                ConditionEntry::from_margin(ConditionId::H40, p_s0 - trail_max)
                    .species(num)
                    .witness(t_40),
            );
            report.push(
                ConditionEntry::from_margin(ConditionId::H41, p_s0 - denom * gain_max / omega)
                    .species(num)
                    .witness(t_gain),
            );
        }
    }
    report
}

/// Substrate persistence floor m0 plus per-species verdicts. The floor comes
/// from the leftmost root of h(s) = d * min S0 with
/// h(s) = d s + (max S0 - s) sum_i p_i(s) e^{-d tau_i}, a construction that
/// assumes constant d; a nonconstant washout rate is handled by substituting
/// its lower bound and flagging every verdict conservative.
pub fn estimate_persistence(
    model: &ChemostatModel,
    washout: &WashoutSolution,
) -> (PersistenceEstimate, ConditionReport) {
    estimate_persistence_with(model, washout, GRID_POINTS)
}

pub fn estimate_persistence_with(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    samples: usize,
) -> (PersistenceEstimate, ConditionReport) {
    let samples = samples.max(8);
    let omega = model.omega;
    let d_const = model.d.as_constant();
    let conservative = d_const.is_none();
    let d_eff = d_const.unwrap_or(model.d_bounds().0);
    let (s0_lo, s0_hi) = model.s0_bounds();

    // Total uptake at substrate level s, with each species discounted by the
    // dilution it suffers over its own delay.
    let consumption = |s: f64| -> f64 {
        model
            .species
            .iter()
            .map(|sp| sp.response.eval(s) * (-d_eff * sp.tau).exp())
            .sum()
    };
    let h = |s: f64| d_eff * s + (s0_hi - s) * consumption(s);
    let (m0, root_found) = leftmost_root(|s| h(s) - d_eff * s0_lo, s0_hi);

    let h_samples: Vec<(f64, f64)> = (0..=H_SAMPLE_POINTS)
        .map(|k| {
            let s = s0_hi * k as f64 / H_SAMPLE_POINTS as f64;
            (s, h(s))
        })
        .collect();

    // Closed-form floor, defined for constant d and sinusoidal (or constant)
    // input. The printed form uses the offset q = d amp / (d^2 + f^2); the
    // variant with d amp / sqrt(d^2 + f^2) matches the washout extrema the
    // derivation actually bounds against, and the two disagree, so both are
    // kept. The band root re-solves h with the washout extrema in place of
    // the input extrema.
    let b_bound = (!conservative).then(|| {
        model
            .species
            .iter()
            .map(|sp| sp.response.initial_slope() * (-d_eff * sp.tau).exp())
            .sum::<f64>()
            / d_eff
    });
    let closed = |q: f64, big_b: f64, a: f64| (a - q) / (1.0 + big_b * (a + q));
    let sinusoid = if conservative { None } else { model.s0.as_sinusoid() };
    let m0_closed = sinusoid.zip(b_bound).map(|((a, sc, cc, f), big_b)| {
        let amp = sc.hypot(cc);
        closed(d_eff * amp / (d_eff * d_eff + f * f), big_b, a)
    });
    let m0_closed_sqrt = sinusoid.zip(b_bound).map(|((a, sc, cc, f), big_b)| {
        let amp = sc.hypot(cc);
        closed(d_eff * amp / (d_eff * d_eff + f * f).sqrt(), big_b, a)
    });
    let h_band = |s: f64| d_eff * s + (washout.max - s) * consumption(s);
    let (m0_band, band_found) =
        leftmost_root(|s| h_band(s) - d_eff * washout.min, washout.max);
    let m0_band = band_found.then_some(m0_band);

    let estimate = PersistenceEstimate {
        m0,
        h_samples,
        b_bound,
        m0_closed,
        m0_closed_sqrt,
        m0_band,
        conservative,
        root_found,
    };

    let mut report = ConditionReport::new();
    for (idx, sp) in model.species.iter().enumerate() {
        let tau = sp.tau;
        let trailing = |t: f64| model.d.eval(t) * model.exp_int_d(t - tau, t);
        let (t_w, trail_max) = quad::max_over_period(trailing, omega, samples);
        let margin = sp.response.eval(m0) - trail_max;
        let mut entry = ConditionEntry::from_margin(ConditionId::Pers, margin)
            .species(idx + 1)
            .witness(t_w);
        // A floor estimate can certify persistence but never refute it, so
        // the verdict floor is inconclusive.
        let mut notes = Vec::new();
        if conservative {
            entry = entry.verdict(Verdict::Inconclusive);
            notes.push(format!(
                "nonconstant washout rate: floor m0 = {m0:.6} uses the lower bound d = {d_eff:.6} and is conservative"
            ));
        } else if margin > EQUALITY_BAND {
            notes.push(format!("substrate floor m0 = {m0:.6}"));
        } else {
            entry = entry.verdict(Verdict::Inconclusive);
            notes.push(format!(
                "floor m0 = {m0:.6} does not clear the dilution threshold; persistence undecided"
            ));
        }
        if let Some(mc) = m0_closed {
            if mc > m0 + 1e-9 {
                notes.push(format!(
                    "closed-form floor {mc:.6} exceeds the h-root and is not used"
                ));
            }
        }
        if !root_found {
            notes.push("h(s) never met the threshold, m0 fell back to max S0".into());
        }
        report.push(entry.note(notes.join("; ")));
    }
    (estimate, report)
}

/// Leftmost root of `phi` on [0, hi]: sign scan then bisection. Returns the
/// endpoint with `false` when `phi` stays negative throughout.
fn leftmost_root(phi: impl Fn(f64) -> f64, hi: f64) -> (f64, bool) {
    if phi(0.0) >= 0.0 {
        return (0.0, true);
    }
    let n = ROOT_SCAN_SAMPLES;
    for k in 1..=n {
        let s = hi * k as f64 / n as f64;
        if phi(s) >= 0.0 {
            let (mut a, mut b) = (hi * (k - 1) as f64 / n as f64, s);
            while b - a > ROOT_TOL {
                let mid = 0.5 * (a + b);
                if phi(mid) >= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return (0.5 * (a + b), true);
        }
    }
    (hi, false)
}

/// Competitive exclusion in favor of `survivor` (1-based): the survivor must
/// out-eat dilution everywhere while every other species loses to it
/// everywhere. The margin is the worst margin across both families.
pub fn check_exclusion(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    survivor: usize,
) -> Result<ConditionReport> {
    check_exclusion_with(model, washout, survivor, GRID_POINTS)
}

pub fn check_exclusion_with(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    survivor: usize,
    samples: usize,
) -> Result<ConditionReport> {
    let samples = samples.max(8);
    if survivor == 0 || survivor > model.n() {
        return Err(Error::InvalidArgument(format!(
            "survivor index {survivor} out of range 1..={}",
            model.n()
        )));
    }
    let omega = model.omega;
    let mut worst = f64::INFINITY;
    let mut worst_t = 0.0;
    let mut worst_species = survivor;
    for (idx, sp) in model.species.iter().enumerate() {
        let num = idx + 1;
        let tau = sp.tau;
        let uptake = |t: f64| sp.response.eval(washout.eval(t));
        let loss = |t: f64| model.d.eval(t + tau) * model.exp_int_d(t, t + tau);
        let gap = |t: f64| {
            if num == survivor {
                uptake(t) - loss(t)
            } else {
                loss(t) - uptake(t)
            }
        };
        let (t_w, m) = quad::min_over_period(gap, omega, samples);
        if m < worst {
            worst = m;
            worst_t = t_w;
            worst_species = num;
        }
    }
    let mut note = format!("binding species {worst_species}");
    let mut entry = ConditionEntry::from_margin(ConditionId::Excl1, worst)
        .species(survivor)
        .witness(worst_t);
    // The cascade argument needs the survivor's response strictly increasing
    // over the substrate range it will actually see.
    if !model.species[survivor - 1]
        .response
        .is_strictly_increasing(washout.max)
    {
        note.push_str(&format!(
            "; survivor response is not strictly increasing on [0, {:.6}], margins not conclusive",
            washout.max
        ));
        entry = entry.verdict(Verdict::Inconclusive);
    }
    let mut report = ConditionReport::new();
    report.push(entry.note(note));
    Ok(report)
}

/// One completed stage of the coexistence cascade: the species solved at
/// this stage, its periodic solution, and the nutrient ceiling left over for
/// the remaining species.
#[derive(Debug, Clone)]
pub struct CascadeStage {
    pub species: usize,
    pub orbit: PeriodicCandidate,
    pub remaining: PeriodicFn,
}

/// Coexistence cascade over `order`, a 1-based permutation of the species.
/// Stage k checks the pointwise inequality for its species against the
/// current nutrient ceiling, solves the scalar stage equation when it holds,
/// and subtracts the solved uptake from the ceiling. Stops at the first
/// failing or unsolvable stage. Average-variant margins are reported for
/// every stage after the first.
pub fn coexistence_cascade(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    order: &[usize],
) -> Result<(ConditionReport, Vec<CascadeStage>)> {
    coexistence_cascade_with(model, washout, order, GRID_POINTS)
}

pub fn coexistence_cascade_with(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    order: &[usize],
    samples: usize,
) -> Result<(ConditionReport, Vec<CascadeStage>)> {
    let samples = samples.max(8);
    let n = model.n();
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::InvalidArgument(format!(
            "order has {} entries for {n} species",
            order.len()
        )));
    }
    for &num in order {
        if num == 0 || num > n || std::mem::replace(&mut seen[num - 1], true) {
            return Err(Error::InvalidArgument(format!(
                "order is not a permutation of 1..={n}: offending entry {num}"
            )));
        }
    }

    let omega = model.omega;
    let denom = model.d_period_integral().exp_m1();
    let mut report = ConditionReport::new();
    let mut stages = Vec::new();
    let mut ceiling = washout.y_star.clone();

    for (k, &num) in order.iter().enumerate() {
        let sp = &model.species[num - 1];
        let tau = sp.tau;
        let uptake = |t: f64| sp.response.eval(ceiling.eval(t));
        let loss = |t: f64| model.d.eval(t + tau) * model.exp_int_d(t, t + tau);
        let (t_w, margin) = quad::min_over_period(|t| uptake(t) - loss(t), omega, samples);
        let entry = ConditionEntry::from_margin(ConditionId::Coex, margin)
            .species(num)
            .witness(t_w);

        if k > 0 {
            let period_uptake = quad::prefix_integral(uptake, 0.0, omega, samples)[samples];
            let (t_g, gain_max) =
                quad::max_over_period(|t| model.exp_int_d(t, t + tau), omega, samples);
            report.push(
                ConditionEntry::from_margin(ConditionId::CoexAvg, period_uptake - denom * gain_max)
                    .species(num)
                    .witness(t_g),
            );
        }

        if margin <= EQUALITY_BAND {
            report.push(entry.note(format!("cascade stops at stage {}", k + 1)));
            break;
        }
        match solver::single_species_solve(model, &ceiling, num) {
            Ok(orbit) => {
                // Remove this stage's uptake from the ceiling:
                // y_k(t) = y_{k-1}(t) - e^{int_t^{t+tau} d} x(t+tau).
                let values: Vec<f64> = (0..samples)
                    .map(|j| {
                        let t = omega * j as f64 / samples as f64;
                        ceiling.eval(t)
                            - model.exp_int_d(t, t + tau) * orbit.x_star.eval(0, t + tau)
                    })
                    .collect();
                let floor = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let remaining = PeriodicFn::from_samples(omega, values)?;
                report.push(entry.note(format!(
                    "stage orbit residual {:.2e}",
                    orbit.phi_residual
                )));
                stages.push(CascadeStage {
                    species: num,
                    orbit: orbit.x_star,
                    remaining: remaining.clone(),
                });
                if floor <= 0.0 {
                    // Nothing left for later stages; their uptake of a
                    // nonpositive ceiling is zero by extension, so stop.
                    break;
                }
                ceiling = remaining;
            }
            Err(err) => {
                report.push(
                    entry
                        .verdict(Verdict::Inconclusive)
                        .note(format!("stage {} solve failed: {err}", k + 1)),
                );
                break;
            }
        }
    }
    Ok((report, stages))
}
