//! Acceptance gate: eleven end-to-end criteria, one test and one printed
//! pass/fail line each. Every tolerance is pinned here as part of the
//! contract; none is derived from observed behavior.
//!
//! The worked forcing throughout is d = 1, S0(t) = 2 + sin t on a 2 pi
//! period, where the washout level is 2 + (sin t - cos t)/2 in closed form,
//! the slow instance (b = 1, tau = 1) is in the extinction regime and the
//! fast one (b = 10, tau = 0.1) in the existence regime.

use std::time::Instant;

use chemostat_lab::conditions::{check_exclusion, check_extinction};
use chemostat_lab::simulate::{conservation_series, simulate, History};
use chemostat_lab::solver::{cone_params, find_fixed_point, phi_apply, poincare_shoot};
use chemostat_lab::sweep::{flip_delays, sweep_rate_delay, SweepAxis};
use chemostat_lab::washout::washout_solution;
use chemostat_lab::{
    ChemostatModel, ConditionId, PeriodicCandidate, PeriodicFn, ResponseFn, SolveOptions, Species,
    Verdict, WashoutSolution,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OMEGA: f64 = std::f64::consts::TAU;
/// ln((11 - sqrt 2)/17): offset of the existence/extinction flip delay
/// tau = ln b + offset for Michaelis-Menten uptake with k = 1 under the
/// worked forcing (30-digit reference arithmetic).
const FLIP_OFFSET: f64 = -0.5729319221370597;

fn criterion(number: usize, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("AC{number:02} {name}: {verdict} ({detail})");
    assert!(pass, "AC{number:02} {name}: FAIL ({detail})");
}

/// d = 1, S0 = 2 + sin t, one Michaelis-Menten species per (b, k, tau).
fn worked_model(species: &[(f64, f64, f64)]) -> ChemostatModel {
    let d = PeriodicFn::constant(OMEGA, 1.0).unwrap();
    let s0 = PeriodicFn::base_sinusoid(OMEGA, 2.0, 1.0, 0.0).unwrap();
    let species = species
        .iter()
        .map(|&(b, k, tau)| Species::new(ResponseFn::michaelis_menten(b, k).unwrap(), tau).unwrap())
        .collect();
    ChemostatModel::new(OMEGA, d, s0, species).unwrap()
}

fn persistence_model() -> ChemostatModel {
    worked_model(&[(10.0, 1.0, 0.1)])
}

/// Test-side method-of-steps integrator for one scalar DDE
/// u'(t) = rhs(t, u(t), u(t - tau)), independent of the library simulator:
/// classical fourth-order steps with cubic Hermite dense output for the
/// delayed reads. Requires dt <= tau so stage lookups stay in completed
/// history.
fn integrate_scalar_dde(
    history: &dyn Fn(f64) -> f64,
    rhs: &dyn Fn(f64, f64, f64) -> f64,
    tau: f64,
    t_end: f64,
    dt: f64,
) -> (Vec<f64>, f64) {
    assert!(dt <= tau && dt > 0.0);
    let steps = (t_end / dt).ceil() as usize;
    let mut values = Vec::with_capacity(steps + 1);
    let mut derivs = Vec::with_capacity(steps + 1);
    values.push(history(0.0));

    let lookup = |values: &[f64], derivs: &[f64], t: f64| -> f64 {
        if t <= 0.0 {
            return history(t);
        }
        let pos = t / dt;
        let k = (pos.floor() as usize).min(derivs.len().saturating_sub(2));
        let theta = pos - k as f64;
        let (y0, y1) = (values[k], values[k + 1]);
        let (f0, f1) = (derivs[k], derivs[k + 1]);
        let h00 = (1.0 + 2.0 * theta) * (1.0 - theta) * (1.0 - theta);
        let h10 = theta * (1.0 - theta) * (1.0 - theta);
        let h01 = theta * theta * (3.0 - 2.0 * theta);
        let h11 = theta * theta * (theta - 1.0);
        h00 * y0 + h10 * dt * f0 + h01 * y1 + h11 * dt * f1
    };

    derivs.push(rhs(0.0, values[0], history(-tau)));
    for k in 0..steps {
        let t = k as f64 * dt;
        let u = values[k];
        let delayed = |tt: f64| lookup(&values, &derivs, tt - tau);
        let k1 = rhs(t, u, delayed(t));
        let k2 = rhs(t + 0.5 * dt, u + 0.5 * dt * k1, delayed(t + 0.5 * dt));
        let k3 = rhs(t + 0.5 * dt, u + 0.5 * dt * k2, delayed(t + 0.5 * dt));
        let k4 = rhs(t + dt, u + dt * k3, delayed(t + dt));
        let next = (u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).max(0.0);
        values.push(next);
        let t_next = (k + 1) as f64 * dt;
        let f_next = rhs(t_next, next, lookup(&values, &derivs, t_next - tau));
        derivs.push(f_next);
    }
    (values, dt)
}

/// Smooth random periodic profile around `peak`, guaranteed inside the
/// retention cone with a wide margin.
fn fourier_cone_nodes(rng: &mut ChaCha8Rng, m: usize, peak: f64) -> Vec<f64> {
    let modes: Vec<(f64, f64, f64)> = (1..=3)
        .map(|h| (h as f64, rng.gen_range(0.0..0.1), rng.gen_range(0.0..OMEGA)))
        .collect();
    (0..m)
        .map(|k| {
            let t = OMEGA * k as f64 / m as f64;
            let wobble: f64 = modes.iter().map(|&(h, amp, ph)| amp * (h * t + ph).sin()).sum();
            peak * (1.0 + wobble)
        })
        .collect()
}

fn solved_orbit(model: &ChemostatModel, washout: &WashoutSolution) -> chemostat_lab::PeriodicOrbit {
    find_fixed_point(model, washout, &SolveOptions::default()).expect("existence-regime solve")
}

#[test]
fn ac01_washout_matches_the_closed_form() {
    let clock = Instant::now();
    let model = worked_model(&[]);
    let washout = washout_solution(&model).unwrap();

    let closed = |t: f64| 2.0 + 0.5 * (t.sin() - t.cos());
    let mut node_err = 0.0f64;
    for k in 0..512 {
        let t = OMEGA * k as f64 / 512.0;
        node_err = node_err.max((washout.eval(t) - closed(t)).abs());
    }
    let hi = 2.0 + std::f64::consts::FRAC_1_SQRT_2;
    let lo = 2.0 - std::f64::consts::FRAC_1_SQRT_2;
    let extrema_err = (washout.max - hi).abs().max((washout.min - lo).abs());
    let elapsed = clock.elapsed().as_secs_f64();

    criterion(
        1,
        "washout matches the closed form",
        node_err < 1e-8 && extrema_err < 1e-8 && elapsed < 1.0,
        &format!("max node error {node_err:.3e}, extrema error {extrema_err:.3e}, {elapsed:.3} s"),
    );
}

#[test]
fn ac02_conserved_total_obeys_the_scalar_law() {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let species = [
        (rng.gen_range(1.0..8.0), rng.gen_range(0.5..2.0), rng.gen_range(0.2..1.0)),
        (rng.gen_range(1.0..8.0), rng.gen_range(0.5..2.0), rng.gen_range(0.2..1.0)),
    ];
    let model = worked_model(&species);
    let washout = washout_solution(&model).unwrap();
    let init = History::constant(vec![
        rng.gen_range(0.5..2.5),
        rng.gen_range(0.1..1.5),
        rng.gen_range(0.1..1.5),
    ]);

    let traj = simulate(&model, &init, 50.0, 1e-3).unwrap();
    let series = conservation_series(&model, &traj).unwrap();
    let worst = series.iter().fold(0.0f64, |acc, &(_, _, r)| acc.max(r));
    let &(t_last, y_last, _) = series.last().unwrap();
    let tail_gap = (y_last - washout.eval(t_last)).abs();
    let elapsed = clock.elapsed().as_secs_f64();

    criterion(
        2,
        "conserved total obeys the scalar law",
        worst < 1e-4 && tail_gap < 1e-6 && elapsed < 10.0,
        &format!(
            "max residual {worst:.3e} on [0, {t_last:.2}], |y - y*| = {tail_gap:.3e} at the end, {elapsed:.2} s"
        ),
    );
}

#[test]
fn ac03_slow_uptake_goes_extinct() {
    let clock = Instant::now();
    let model = worked_model(&[(1.0, 1.0, 1.0)]);
    let washout = washout_solution(&model).unwrap();
    let report = check_extinction(&model, &washout);
    let stab = report.get(ConditionId::ExtStab, Some(1)).unwrap();
    let gas = report.get(ConditionId::ExtGas, Some(1)).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst_tail = 0.0f64;
    for _ in 0..5 {
        let init = History::constant(vec![rng.gen_range(0.2..3.0), rng.gen_range(0.1..2.0)]);
        let traj = simulate(&model, &init, 200.0, OMEGA / 2048.0).unwrap();
        let summary = traj.asymptotic_summary(OMEGA).unwrap();
        worst_tail = worst_tail.max(summary[1].1);
    }
    let elapsed = clock.elapsed().as_secs_f64();

    criterion(
        3,
        "slow uptake goes extinct",
        stab.margin > 0.0 && gas.verdict == Verdict::Holds && worst_tail < 1e-6 && elapsed < 30.0,
        &format!(
            "stability margin {:.3e}, attraction {}, worst last-period sup {worst_tail:.3e}, {elapsed:.2} s",
            stab.margin, gas.verdict
        ),
    );
}

#[test]
fn ac04_fast_uptake_has_a_positive_periodic_orbit() {
    let clock = Instant::now();
    let model = persistence_model();
    let washout = washout_solution(&model).unwrap();
    let orbit = solved_orbit(&model, &washout);

    let sigma = (-OMEGA).exp();
    let cone_ok = orbit.x_star.component_min(0) >= sigma * orbit.x_star.component_max(0) - 1e-10;
    let mut band_ok = true;
    for k in 0..orbit.x_star.nodes() {
        let t = OMEGA * k as f64 / orbit.x_star.nodes() as f64;
        let s = orbit.s_star.eval(t);
        if !(s > 0.0 && s < washout.eval(t)) {
            band_ok = false;
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();

    criterion(
        4,
        "fast uptake has a positive periodic orbit",
        orbit.phi_residual < 1e-8
            && orbit.fde_residual < 1e-5
            && orbit.positivity[0] > 0.0
            && cone_ok
            && band_ok
            && elapsed < 60.0,
        &format!(
            "operator residual {:.3e}, defect {:.3e}, min component {:.4e}, cone and band {}, {elapsed:.2} s",
            orbit.phi_residual,
            orbit.fde_residual,
            orbit.positivity[0],
            cone_ok && band_ok
        ),
    );
}

#[test]
fn ac05_shooting_reproduces_the_operator_orbit() {
    let model = persistence_model();
    let washout = washout_solution(&model).unwrap();
    let fixed = solved_orbit(&model, &washout);

    let init = History::constant(vec![1.5, 0.5]);
    let shot = poincare_shoot(&model, &init, 300, 1e-8).expect("shooting convergence");

    let mut gap = 0.0f64;
    for k in 0..512 {
        let t = OMEGA * k as f64 / 512.0;
        gap = gap.max((shot.x_star.eval(0, t) - fixed.x_star.eval(0, t)).abs());
    }

    criterion(
        5,
        "shooting reproduces the operator orbit",
        gap < 1e-4,
        &format!("sup distance between the two orbits {gap:.3e}"),
    );
}

#[test]
fn ac06_fast_species_excludes_the_slow_one() {
    let model = worked_model(&[(10.0, 1.0, 0.1), (1.0, 1.0, 1.0)]);
    let washout = washout_solution(&model).unwrap();
    let report = check_exclusion(&model, &washout, 1).unwrap();
    let survives = report.all_hold();

    let single = persistence_model();
    let single_washout = washout_solution(&single).unwrap();
    let orbit = solved_orbit(&single, &single_washout);

    let init = History::constant(vec![1.5, 0.4, 0.4]);
    let t_end = 300.0;
    let traj = simulate(&model, &init, t_end, OMEGA / 2048.0).unwrap();
    let loser_tail = traj.asymptotic_summary(OMEGA).unwrap()[2].1;
    let mut survivor_gap = 0.0f64;
    for k in 0..=512 {
        let t = t_end - OMEGA + OMEGA * k as f64 / 512.0;
        survivor_gap = survivor_gap.max((traj.eval(t, 1) - orbit.x_star.eval(0, t)).abs());
    }

    criterion(
        6,
        "fast species excludes the slow one",
        survives && loser_tail < 1e-6 && survivor_gap < 1e-3,
        &format!(
            "exclusion predicate {survives}, loser last-period sup {loser_tail:.3e}, survivor gap to the single-species orbit {survivor_gap:.3e}"
        ),
    );
}

#[test]
fn ac07_species_stay_under_the_linear_majorant() {
    let model = worked_model(&[(10.0, 1.0, 0.1), (1.0, 1.0, 1.0)]);
    let washout = washout_solution(&model).unwrap();
    let t_end = 3.0 * OMEGA;

    // Histories keep the nutrient below the washout floor so the majorant's
    // coefficient dominates the true uptake from t = 0 on, not just
    // asymptotically.
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..10 {
        let s0 = rng.gen_range(0.05..1.25);
        let x0 = [rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)];
        let init = History::constant(vec![s0, x0[0], x0[1]]);
        let traj = simulate(&model, &init, t_end, OMEGA / 2048.0).unwrap();

        for (i, sp) in [(0usize, 0.1f64), (1usize, 1.0f64)] {
            let tau = sp;
            let level = x0[i];
            let washout_ref = &washout;
            let model_ref = &model;
            let rhs = move |t: f64, u: f64, u_delayed: f64| -> f64 {
                let coeff = model_ref.exp_int_d(t, t - tau)
                    * model_ref.species[i].response.eval(washout_ref.eval(t - tau));
                -model_ref.d.eval(t) * u + coeff * u_delayed
            };
            let history = move |_t: f64| level;
            let dt = tau / 64.0;
            let (values, dt) = integrate_scalar_dde(&history, &rhs, tau, t_end, dt);
            for (k, majorant) in values.iter().enumerate() {
                let t = k as f64 * dt;
                if t > t_end {
                    break;
                }
                let excess = traj.eval(t, 1 + i) - majorant;
                worst_excess = worst_excess.max(excess);
            }
        }
    }

    criterion(
        7,
        "species stay under the linear majorant",
        worst_excess <= 1e-6,
        &format!("worst excess over the majorant {worst_excess:.3e}"),
    );
}

#[test]
fn ac08_the_orbit_caps_an_invariant_box() {
    let model = persistence_model();
    let washout = washout_solution(&model).unwrap();
    let orbit = solved_orbit(&model, &washout);
    let tau = 0.1;
    let t_end = 10.0 * OMEGA;

    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..10 {
        let frac = rng.gen_range(0.05..1.0);
        let freq = rng.gen_range(0.5..3.0);
        let phase = rng.gen_range(0.0..OMEGA);
        let x_star = orbit.x_star.clone();
        let shape = move |t: f64| {
            frac * (0.2 + 0.8 * (freq * t + phase).sin().abs()) * x_star.eval(0, t)
        };

        let washout_ref = &washout;
        let model_ref = &model;
        let rhs = move |t: f64, u: f64, u_delayed: f64| -> f64 {
            let grow = model_ref.exp_int_d(t - tau, t);
            let arg = washout_ref.eval(t - tau) - grow * u;
            -model_ref.d.eval(t) * u
                + model_ref.exp_int_d(t, t - tau)
                    * model_ref.species[0].response.eval(arg)
                    * u_delayed
        };
        let (values, dt) = integrate_scalar_dde(&shape, &rhs, tau, t_end, tau / 64.0);
        for (k, value) in values.iter().enumerate() {
            let t = k as f64 * dt;
            if t > t_end {
                break;
            }
            worst_excess = worst_excess.max(value - orbit.x_star.eval(0, t));
        }
    }

    criterion(
        8,
        "the orbit caps an invariant box",
        worst_excess <= 1e-6,
        &format!("worst excess over the orbit across 10 periods {worst_excess:.3e}"),
    );
}

#[test]
fn ac09_operator_geometry_holds() {
    let model = persistence_model();
    let washout = washout_solution(&model).unwrap();
    let cone = cone_params(&model).unwrap();

    let zero = PeriodicCandidate::constant(OMEGA, 1, 512, 0.0).unwrap();
    let zero_image = phi_apply(&model, &washout, &zero);
    let zero_fixed = zero_image.component(0).iter().all(|v| *v == 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let mut retained = true;
    for _ in 0..20 {
        let peak = rng.gen_range(0.05..2.5);
        let x =
            PeriodicCandidate::new(OMEGA, vec![fourier_cone_nodes(&mut rng, 128, peak)]).unwrap();
        assert!(x.in_cone(cone.sigma, 0.0));
        if !phi_apply(&model, &washout, &x).in_cone(cone.sigma, 1e-12) {
            retained = false;
        }
    }

    let mut nodes = fourier_cone_nodes(&mut rng, 128, 1.0);
    let top = nodes.iter().fold(0.0f64, |acc, v| acc.max(*v));
    for v in &mut nodes {
        *v *= cone.big_r / top;
    }
    let saturated = PeriodicCandidate::new(OMEGA, vec![nodes]).unwrap();
    let annihilated = phi_apply(&model, &washout, &saturated)
        .component(0)
        .iter()
        .all(|v| *v == 0.0);

    criterion(
        9,
        "operator geometry holds",
        zero_fixed && retained && annihilated,
        &format!(
            "zero fixed exactly {zero_fixed}, 20 cone maps retained {retained}, saturation annihilated {annihilated}"
        ),
    );
}

#[test]
fn ac10_sweep_recovers_the_flip_boundary() {
    let clock = Instant::now();
    let base = worked_model(&[]);
    let b_axis = SweepAxis::new(1.0, 20.0, 40).unwrap();
    let tau_axis = SweepAxis::new(0.0, 3.0, 40).unwrap();
    let cell = tau_axis.cell();
    let points = sweep_rate_delay(&base, b_axis, tau_axis, 1.0, 512).unwrap();
    let flips = flip_delays(&points, 40, ConditionId::H3A);

    let mut checked = 0usize;
    let mut worst = 0.0f64;
    let mut ok = true;
    for &(b, flip) in &flips {
        let predicted = b.ln() + FLIP_OFFSET;
        if predicted < cell || predicted > 3.0 - cell {
            continue;
        }
        checked += 1;
        match flip {
            Some(tau) => {
                let gap = (tau - predicted).abs();
                worst = worst.max(gap);
                if gap > cell + 1e-12 {
                    ok = false;
                }
            }
            None => ok = false,
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();

    criterion(
        10,
        "sweep recovers the flip boundary",
        ok && checked > 0 && elapsed < 300.0,
        &format!(
            "{checked} columns checked, worst flip deviation {worst:.4} vs cell {cell:.4}, {elapsed:.2} s"
        ),
    );
}

#[test]
fn ac11_simulator_converges_at_fourth_order() {
    let d = PeriodicFn::base_sinusoid(OMEGA, 1.0, 0.0, 0.2).unwrap();
    let s0 = PeriodicFn::base_sinusoid(OMEGA, 2.0, 1.0, 0.0).unwrap();
    let species =
        vec![Species::new(ResponseFn::michaelis_menten(5.0, 1.0).unwrap(), 0.5).unwrap()];
    let model = ChemostatModel::new(OMEGA, d, s0, species).unwrap();
    let init = History::constant(vec![1.5, 0.5]);
    let t_end = 4.0;

    let err = |dt: f64| {
        let coarse = simulate(&model, &init, t_end, dt).unwrap();
        let fine = simulate(&model, &init, t_end, dt / 8.0).unwrap();
        let mut worst = 0.0f64;
        for j in 0..=40 {
            let t = j as f64 * t_end / 40.0;
            for c in 0..2 {
                worst = worst.max((coarse.eval(t, c) - fine.eval(t, c)).abs());
            }
        }
        worst
    };
    let e1 = err(0.02);
    let e2 = err(0.01);
    let ratio = e1 / e2;

    criterion(
        11,
        "simulator converges at fourth order",
        (11.2..20.8).contains(&ratio),
        &format!("error {e1:.3e} -> {e2:.3e}, ratio {ratio:.2} (expect about 16)"),
    );
}
