//! Periodic-orbit construction. The centerpiece is the integral operator
//!
//! ```text
//! (Phi_i x)(t) = (e^D - 1)^{-1} int_t^{t+omega} e^{int_t^s d} f_i(s, x_s) ds
//! ```
//!
//! whose fixed points in the nonnegative periodic cone are exactly the
//! omega-periodic solutions of the biomass system. A damped iteration with
//! residual mixing hunts for nontrivial fixed points; a scalar variant
//! solves the per-stage equation used by the coexistence cascade; and a
//! Poincare-style shooting run on the full delay system provides an
//! independent cross-check.

use std::collections::VecDeque;

use serde::Serialize;

use crate::defaults::{
    ANDERSON_DEPTH, DAMPING, GRID_POINTS, MAX_ITERS, SOLVER_TOL, STEPS_PER_PERIOD,
    TRIVIAL_REL_THRESHOLD,
};
use crate::model::ChemostatModel;
use crate::periodic::PeriodicFn;
use crate::quad::{self, GrowingPrefix};
use crate::report::ConditionId;
use crate::simulate::{simulate, History};
use crate::washout::{washout_solution, WashoutSolution};
use crate::{Error, Result};

/// Discretized nonnegative omega-periodic candidate: one uniform grid row
/// per component, values at t_k = k omega / m, cubic wrap-around
/// interpolation between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCandidate {
    omega: f64,
    components: Vec<Vec<f64>>,
}

impl PeriodicCandidate {
    pub fn new(omega: f64, components: Vec<Vec<f64>>) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "candidate period {omega} must be positive"
            )));
        }
        let Some(first) = components.first() else {
            return Err(Error::InvalidArgument(
                "candidate needs at least one component".into(),
            ));
        };
        let m = first.len();
        if m < 4 {
            return Err(Error::InvalidArgument(format!(
                "candidate grid has {m} nodes, need at least 4"
            )));
        }
        for (i, row) in components.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidArgument(format!(
                    "component {} has {} nodes, expected {m}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "component {} contains inadmissible value {v}",
                    i + 1
                )));
            }
        }
        Ok(PeriodicCandidate { omega, components })
    }

    /// Constant candidate at `value` in all `n` components.
    pub fn constant(omega: f64, n: usize, m: usize, value: f64) -> Result<Self> {
        Self::new(omega, vec![vec![value; m]; n])
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn components(&self) -> usize {
        self.components.len()
    }

    pub fn nodes(&self) -> usize {
        self.components[0].len()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }

    pub fn eval(&self, component: usize, t: f64) -> f64 {
        quad::interp_periodic(&self.components[component], self.omega, t)
    }

    /// Sup norm: values are nonnegative, so the largest node value.
    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0f64, |a, v| a.max(*v))
    }

    pub fn component_min(&self, i: usize) -> f64 {
        self.components[i].iter().fold(f64::INFINITY, |a, v| a.min(*v))
    }

    pub fn component_max(&self, i: usize) -> f64 {
        self.components[i].iter().fold(0.0f64, |a, v| a.max(*v))
    }

    /// Cone membership: each component's minimum stays above sigma times its
    /// maximum, up to `slack` for roundoff.
    pub fn in_cone(&self, sigma: f64, slack: f64) -> bool {
        (0..self.components())
            .all(|i| self.component_min(i) >= sigma * self.component_max(i) - slack)
    }

    pub fn to_periodic_fn(&self, component: usize) -> Result<PeriodicFn> {
        PeriodicFn::from_samples(self.omega, self.components[component].clone())
    }

    /// Largest node-wise distance to another candidate of the same shape.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .flatten()
            .zip(other.components.iter().flatten())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
    }
}

/// Knobs for the fixed-point iteration.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Damping theta in (0, 1]: x <- (1 - theta) x + theta Phi x.
    pub damping: f64,
    /// How many previous iterates the residual-mixing acceleration may
    /// combine; 0 disables mixing.
    pub mixing_depth: usize,
    pub residual_tol: f64,
    pub grid_points: usize,
    /// Starting candidate; when absent, a ladder of constant candidates
    /// scaled to the washout solution is tried.
    pub init: Option<PeriodicCandidate>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: MAX_ITERS,
            damping: DAMPING,
            mixing_depth: ANDERSON_DEPTH,
            residual_tol: SOLVER_TOL,
            grid_points: GRID_POINTS,
            init: None,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "residual tolerance {} must be positive",
                self.residual_tol
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "damping {} must lie in (0, 1]",
                self.damping
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// A converged periodic solution: biomass candidate, reconstructed
/// substrate, and the residuals certifying it.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    pub x_star: PeriodicCandidate,
    pub s_star: PeriodicFn,
    /// Sup distance between the candidate and one application of the
    /// integral operator.
    pub phi_residual: f64,
    /// Max defect of the differential system at the grid nodes.
    pub fde_residual: f64,
    /// Per-component minimum over the grid.
    pub positivity: Vec<f64>,
}

/// The response argument of species i at time s: the ambient level
/// y*(s - tau_i) minus every component's dilution-amplified contribution.
fn full_rhs(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    x: &PeriodicCandidate,
    i: usize,
    s: f64,
) -> f64 {
    let sp = &model.species[i];
    let tau_i = sp.tau;
    let delayed = x.eval(i, s - tau_i);
    let mut arg = washout.eval(s - tau_i);
    for (j, spj) in model.species.iter().enumerate() {
        let shift = s + spj.tau - tau_i;
        arg -= model.exp_int_d(s - tau_i, shift) * x.eval(j, shift);
    }
    model.exp_int_d(s, s - tau_i) * sp.response.eval(arg) * delayed
}

/// The scalar stage equation's right side: species i alone against a fixed
/// nutrient ceiling, with the current (undelayed) value inside the response.
fn stage_rhs(
    model: &ChemostatModel,
    ceiling: &PeriodicFn,
    i: usize,
    x: &PeriodicCandidate,
    s: f64,
) -> f64 {
    let sp = &model.species[i];
    let tau = sp.tau;
    let arg = ceiling.eval(s - tau) - model.exp_int_d(s - tau, s) * x.eval(0, s);
    model.exp_int_d(s, s - tau) * sp.response.eval(arg) * x.eval(0, s - tau)
}

/// One component of the integral operator: the windowed integral of
/// e^{int_0^s d} f(s) evaluated through a growing prefix, rescaled at each
/// grid node. Tiny negative quadrature noise is clamped so outputs stay in
/// the nonnegative cone.
fn phi_component(model: &ChemostatModel, m: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let omega = model.omega;
    let cap_d = model.d_period_integral();
    let denom = cap_d.exp_m1();
    let prefix = GrowingPrefix::new(|s| model.exp_int_d(0.0, s) * f(s), omega, cap_d, m);
    (0..m)
        .map(|k| {
            let t = omega * k as f64 / m as f64;
            (prefix.window(t) * model.exp_int_d(t, 0.0) / denom).max(0.0)
        })
        .collect()
}

/// Apply the integral operator to a full-system candidate. `x` must carry
/// one component per species.
pub fn phi_apply(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    x: &PeriodicCandidate,
) -> PeriodicCandidate {
    assert_eq!(
        x.components(),
        model.n(),
        "candidate has {} components for {} species",
        x.components(),
        model.n()
    );
    let m = x.nodes();
    let components = (0..model.n())
        .map(|i| phi_component(model, m, |s| full_rhs(model, washout, x, i, s)))
        .collect();
    PeriodicCandidate {
        omega: model.omega,
        components,
    }
}

/// Max defect |x_i'(t) + d(t) x_i(t) - f_i(t, x_t)| over grid nodes and
/// components, with a high-order periodic finite-difference derivative.
/// This is a legitimate residual for the mixed-type system because the
/// candidate is globally defined and periodic.
pub fn fde_residual(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    x: &PeriodicCandidate,
) -> f64 {
    assert_eq!(x.components(), model.n());
    let omega = model.omega;
    let m = x.nodes();
    let mut worst = 0.0f64;
    for i in 0..x.components() {
        let deriv = quad::derivative_periodic(x.component(i), omega);
        for (k, dv) in deriv.iter().enumerate() {
            let t = omega * k as f64 / m as f64;
            let defect =
                dv + model.d.eval(t) * x.component(i)[k] - full_rhs(model, washout, x, i, t);
            worst = worst.max(defect.abs());
        }
    }
    worst
}

/// Substrate reconstruction S*(t) = y*(t) - sum_i e^{int_t^{t+tau_i} d}
/// x_i(t + tau_i), sampled on the candidate grid. Returns the node indices
/// where the reconstruction leaves the physical band 0 < S* < y*(t); for
/// the zero candidate every node is flagged since S* = y* exactly.
pub fn reconstruct_s(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    x: &PeriodicCandidate,
) -> (PeriodicFn, Vec<usize>) {
    assert_eq!(x.components(), model.n());
    let omega = model.omega;
    let m = x.nodes();
    let mut flagged = Vec::new();
    let mut values = Vec::with_capacity(m);
    for k in 0..m {
        let t = omega * k as f64 / m as f64;
        let mut s = washout.eval(t);
        for (j, sp) in model.species.iter().enumerate() {
            s -= model.exp_int_d(t, t + sp.tau) * x.eval(j, t + sp.tau);
        }
        if s <= 0.0 || s >= washout.eval(t) {
            flagged.push(k);
        }
        values.push(s);
    }
    let s_star = PeriodicFn::from_samples(omega, values)
        .expect("candidate grids have at least 4 finite nodes");
    (s_star, flagged)
}

enum RunOutcome {
    Orbit { x: PeriodicCandidate, phi_residual: f64 },
    Washout { iters: usize },
    Stalled { iters: usize, last: f64, history: Vec<f64> },
}

fn flatten(x: &PeriodicCandidate) -> Vec<f64> {
    x.components.concat()
}

fn unflatten(flat: Vec<f64>, like: &PeriodicCandidate) -> PeriodicCandidate {
    let m = like.nodes();
    let components = flat.chunks(m).map(<[f64]>::to_vec).collect();
    PeriodicCandidate {
        omega: like.omega,
        components,
    }
}

/// One damped step in flattened coordinates.
fn damped_step(x: &[f64], g: &[f64], theta: f64) -> Vec<f64> {
    x.iter().zip(g).map(|(x, g)| x + theta * g).collect()
}

/// Residual-mixing acceleration over the stored (iterate, residual) pairs:
/// least-squares combination of recent residual differences, applied to the
/// damped iterates. Falls back to `None` when the small normal system is
/// singular.
#[allow(clippy::needless_range_loop)] // index math over paired arrays reads better here
fn mixing_step(pairs: &VecDeque<(Vec<f64>, Vec<f64>)>, theta: f64) -> Option<Vec<f64>> {
    let k = pairs.len() - 1;
    let (xk, gk) = &pairs[k];
    let n = xk.len();
    let dg = |j: usize, idx: usize| pairs[j + 1].1[idx] - pairs[j].1[idx];
    let mut mat = vec![vec![0.0f64; k]; k];
    let mut rhs = vec![0.0f64; k];
    for a in 0..k {
        for b in a..k {
            let mut s = 0.0;
            for i in 0..n {
                s += dg(a, i) * dg(b, i);
            }
            mat[a][b] = s;
            mat[b][a] = s;
        }
        let mut s = 0.0;
        for i in 0..n {
            s += dg(a, i) * gk[i];
        }
        rhs[a] = s;
    }
    let trace: f64 = (0..k).map(|a| mat[a][a]).sum();
    if !(trace.is_finite() && trace > 0.0) {
        return None;
    }
    // Tiny ridge keeps nearly collinear residual differences solvable.
    for (a, row) in mat.iter_mut().enumerate() {
        row[a] += 1e-12 * trace;
    }
    let gamma = solve_dense(mat, rhs)?;
    let mut next: Vec<f64> = (0..n).map(|i| xk[i] + theta * gk[i]).collect();
    for (j, gj) in gamma.iter().enumerate() {
        if *gj == 0.0 {
            continue;
        }
        for i in 0..n {
            let stepped_hi = pairs[j + 1].0[i] + theta * pairs[j + 1].1[i];
            let stepped_lo = pairs[j].0[i] + theta * pairs[j].1[i];
            next[i] -= gj * (stepped_hi - stepped_lo);
        }
    }
    Some(next)
}

/// Gaussian elimination with partial pivoting for the tiny mixing systems.
#[allow(clippy::needless_range_loop)] // row/column elimination is clearest with indices
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let k = rhs.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in (col + 1)..k {
            let f = m[row][col] / m[col][col];
            for c in col..k {
                m[row][c] -= f * m[col][c];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut out = vec![0.0; k];
    for col in (0..k).rev() {
        let mut s = rhs[col];
        for c in (col + 1)..k {
            s -= m[col][c] * out[c];
        }
        out[col] = s / m[col][col];
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Core iteration: damped Picard with optional residual mixing, adaptive
/// damping reduction, trivial / nontrivial classification at convergence,
/// and a stagnation cutoff.
///
/// Steep responses make the operator overcompensate: raising the biomass
/// depresses the substrate enough that growth collapses, which shows up as
/// a strongly negative eigenvalue of the linearization and turns fixed
/// damping into a stable two-cycle around the orbit. Whenever the residual
/// stops improving the damping is halved (down to a floor), which moves
/// the dominant multiplier back inside the unit circle.
fn iterate(
    apply: impl Fn(&PeriodicCandidate) -> PeriodicCandidate,
    init: PeriodicCandidate,
    opts: &SolveOptions,
    trivial: f64,
) -> RunOutcome {
    let mut theta = opts.damping;
    let theta_floor = (opts.damping / 64.0).max(1e-3).min(opts.damping);
    let mut x = init;
    let mut history = Vec::new();
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();
    // Residual at the last accepted improvement; progress means beating it
    // by at least 1%.
    let mut anchor = f64::INFINITY;
    let mut last_improve = 0usize;
    let mut iter = 0usize;
    while iter < opts.max_iters {
        iter += 1;
        let fx = apply(&x);
        let x_flat = flatten(&x);
        let g: Vec<f64> = flatten(&fx)
            .iter()
            .zip(&x_flat)
            .map(|(f, x)| f - x)
            .collect();
        let res = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        history.push(res);
        if res < 0.99 * anchor {
            anchor = res;
            last_improve = iter;
        }

        if res < opts.residual_tol {
            if x.norm() <= trivial {
                return RunOutcome::Washout { iters: iter };
            }
            if x.norm() <= 1e3 * trivial {
                // A norm just above the trivial threshold could be a slowly
                // decaying tail rather than an orbit: push through the
                // ambiguous band with undamped applications. Near the
                // washout the operator is close to linear, so the walk
                // either decays below the threshold or escapes upward.
                let mut x_fin = fx;
                let mut extra = 0;
                while x_fin.norm() > trivial && x_fin.norm() <= 1e3 * trivial && extra < 500 {
                    x_fin = apply(&x_fin);
                    extra += 1;
                }
                if x_fin.norm() <= trivial {
                    return RunOutcome::Washout { iters: iter };
                }
                // Escaped the band; resume damping from where the walk
                // left off.
                x = x_fin;
                pairs.clear();
                continue;
            }
            // The current iterate already certifies itself: its operator
            // image sits within the tolerance. Returning the iterate (not
            // the image) keeps the reported residual honest, since one more
            // application would amplify roundoff by the local Lipschitz
            // factor of the operator.
            return RunOutcome::Orbit {
                x,
                phi_residual: res,
            };
        }

        if iter - last_improve >= 25 {
            if theta > theta_floor {
                // Cycling or oscillating: damp harder and give the new
                // setting a fresh window.
                theta = (theta / 2.0).max(theta_floor);
                pairs.clear();
                anchor = res;
                last_improve = iter;
            } else if iter - last_improve >= 200 {
                return RunOutcome::Stalled {
                    iters: iter,
                    last: res,
                    history,
                };
            }
        }

        pairs.push_back((x_flat.clone(), g.clone()));
        while pairs.len() > opts.mixing_depth + 1 {
            pairs.pop_front();
        }
        let damped = damped_step(&x_flat, &g, theta);
        // In the final stretch the acceleration only stirs roundoff noise
        // around the fixed point; let plain damping finish the job.
        let allow_mixing =
            opts.mixing_depth > 0 && pairs.len() >= 2 && res > 100.0 * opts.residual_tol;
        let mut next = if !allow_mixing {
            damped
        } else {
            match mixing_step(&pairs, theta) {
                // Accept the accelerated step only if it stays within a few
                // residuals of the current iterate; wild extrapolations of a
                // non-contractive map can crash the iterate into the clamp.
                Some(cand) => {
                    let dev = cand
                        .iter()
                        .zip(&x_flat)
                        .fold(0.0f64, |a, (c, x)| a.max((c - x).abs()));
                    if cand.iter().all(|v| v.is_finite()) && dev <= 5.0 * res {
                        cand
                    } else {
                        damped
                    }
                }
                None => damped,
            }
        };
        for v in &mut next {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        x = unflatten(next, &x);
    }
    RunOutcome::Stalled {
        iters: opts.max_iters,
        last: *history.last().unwrap_or(&f64::NAN),
        history,
    }
}

/// Drive `iterate` over a ladder of starts, keeping the spec priority:
/// a nontrivial orbit wins, then converged-to-washout, then the closest
/// stalled run.
fn multi_start(
    apply: impl Fn(&PeriodicCandidate) -> PeriodicCandidate,
    inits: Vec<PeriodicCandidate>,
    opts: &SolveOptions,
    trivial: f64,
) -> Result<(PeriodicCandidate, f64)> {
    let mut washed: Option<usize> = None;
    let mut best_stall: Option<(usize, f64, Vec<f64>)> = None;
    for init in inits {
        match iterate(&apply, init, opts, trivial) {
            RunOutcome::Orbit { x, phi_residual } => return Ok((x, phi_residual)),
            RunOutcome::Washout { iters } => {
                washed.get_or_insert(iters);
            }
            RunOutcome::Stalled {
                iters,
                last,
                history,
            } => {
                if best_stall.as_ref().is_none_or(|(_, l, _)| last < *l) {
                    best_stall = Some((iters, last, history));
                }
            }
        }
    }
    if let Some(iters) = washed {
        return Err(Error::ConvergedToWashout { iters });
    }
    let (iters, last, residual_history) = best_stall.expect("at least one start attempted");
    Err(Error::NotConverged {
        iters,
        last,
        residual_history,
    })
}

/// Find a nontrivial nonnegative periodic solution of the full biomass
/// system as a fixed point of the integral operator.
pub fn find_fixed_point(
    model: &ChemostatModel,
    washout: &WashoutSolution,
    opts: &SolveOptions,
) -> Result<PeriodicOrbit> {
    opts.validate()?;
    let n = model.n();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "model has no species to solve for".into(),
        ));
    }
    let m = opts.grid_points.max(8);
    let trivial = TRIVIAL_REL_THRESHOLD * model.s0_bounds().1;
    let apply = |x: &PeriodicCandidate| phi_apply(model, washout, x);

    let mut inits = Vec::new();
    if let Some(init) = &opts.init {
        inits.push(init.clone());
    }
    let scale = 0.5 * (washout.min + washout.max);
    for frac in [0.5, 0.1, 0.9, 0.02] {
        inits.push(PeriodicCandidate::constant(model.omega, n, m, frac * scale)?);
    }

    let (x, phi_residual) = multi_start(apply, inits, opts, trivial)?;
    let sigma = (-model.d_period_integral()).exp();
    if !x.in_cone(sigma, 1e-9 * x.norm().max(1.0)) {
        return Err(Error::IntegrationFault {
            t: 0.0,
            what: "converged iterate escaped the retention cone".into(),
        });
    }
    let (s_star, _out_of_band) = reconstruct_s(model, washout, &x);
    let fde = fde_residual(model, washout, &x);
    let positivity = (0..x.components()).map(|i| x.component_min(i)).collect();
    Ok(PeriodicOrbit {
        x_star: x,
        s_star,
        phi_residual,
        fde_residual: fde,
        positivity,
    })
}

/// Solve the scalar stage equation for `species` (1-based) against a fixed
/// nutrient ceiling. Stage 1 of a cascade with the washout ceiling is
/// exactly the n = 1 restriction of the full operator.
pub fn single_species_solve(
    model: &ChemostatModel,
    ceiling: &PeriodicFn,
    species: usize,
) -> Result<PeriodicOrbit> {
    single_species_solve_with(model, ceiling, species, &SolveOptions::default())
}

pub fn single_species_solve_with(
    model: &ChemostatModel,
    ceiling: &PeriodicFn,
    species: usize,
    opts: &SolveOptions,
) -> Result<PeriodicOrbit> {
    opts.validate()?;
    if species == 0 || species > model.n() {
        return Err(Error::InvalidArgument(format!(
            "species index {species} out of range 1..={}",
            model.n()
        )));
    }
    let omega = model.omega;
    if ((ceiling.period() - omega) / omega).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "stage ceiling period {} does not match the model period {omega}",
            ceiling.period()
        )));
    }
    let i = species - 1;
    let m = opts.grid_points.max(8);
    let trivial = TRIVIAL_REL_THRESHOLD * model.s0_bounds().1;
    let apply = |x: &PeriodicCandidate| PeriodicCandidate {
        omega,
        components: vec![phi_component(model, x.nodes(), |s| {
            stage_rhs(model, ceiling, i, x, s)
        })],
    };

    let mut inits = Vec::new();
    if let Some(init) = &opts.init {
        inits.push(init.clone());
    }
    let (_, ceil_hi) = ceiling.min_max();
    for frac in [0.5, 0.1, 0.9, 0.02] {
        inits.push(PeriodicCandidate::constant(
            omega,
            1,
            m,
            frac * ceil_hi.max(0.0),
        )?);
    }

    let (x, phi_residual) = multi_start(apply, inits, opts, trivial)?;
    let sigma = (-model.d_period_integral()).exp();
    if !x.in_cone(sigma, 1e-9 * x.norm().max(1.0)) {
        return Err(Error::IntegrationFault {
            t: 0.0,
            what: "converged stage iterate escaped the retention cone".into(),
        });
    }
    let tau = model.species[i].tau;
    let values: Vec<f64> = (0..x.nodes())
        .map(|k| {
            let t = omega * k as f64 / x.nodes() as f64;
            ceiling.eval(t) - model.exp_int_d(t, t + tau) * x.eval(0, t + tau)
        })
        .collect();
    let s_star = PeriodicFn::from_samples(omega, values)?;
    let fde = stage_fde_residual(model, ceiling, i, &x);
    let positivity = vec![x.component_min(0)];
    Ok(PeriodicOrbit {
        x_star: x,
        s_star,
        phi_residual,
        fde_residual: fde,
        positivity,
    })
}

fn stage_fde_residual(
    model: &ChemostatModel,
    ceiling: &PeriodicFn,
    i: usize,
    x: &PeriodicCandidate,
) -> f64 {
    let omega = model.omega;
    let m = x.nodes();
    let deriv = quad::derivative_periodic(x.component(0), omega);
    let mut worst = 0.0f64;
    for (k, dv) in deriv.iter().enumerate() {
        let t = omega * k as f64 / m as f64;
        let defect =
            dv + model.d.eval(t) * x.component(0)[k] - stage_rhs(model, ceiling, i, x, t);
        worst = worst.max(defect.abs());
    }
    worst
}

/// Shooting fallback: simulate the full delay system and declare success
/// when two consecutive period segments of the state agree in sup norm.
/// The extracted orbit carries honest cross-metrics: its operator residual
/// and differential defect are computed on the extraction grid.
pub fn poincare_shoot(
    model: &ChemostatModel,
    init: &History,
    n_periods: usize,
    tol: f64,
) -> Result<PeriodicOrbit> {
    if n_periods < 2 {
        return Err(Error::InvalidArgument(
            "need at least two periods to compare segments".into(),
        ));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "segment tolerance {tol} must be positive"
        )));
    }
    let omega = model.omega;
    let mut dt = omega / STEPS_PER_PERIOD as f64;
    let tau_floor = model
        .species
        .iter()
        .map(|s| s.tau)
        .filter(|t| *t > 0.0)
        .fold(f64::INFINITY, f64::min);
    if tau_floor.is_finite() {
        while dt >= tau_floor / 4.0 {
            dt *= 0.5;
        }
    }
    let traj = simulate(model, init, n_periods as f64 * omega, dt)?;

    let m = GRID_POINTS;
    let dim = 1 + model.n();
    let mut distances = Vec::new();
    for k in 1..n_periods {
        let base = (k - 1) as f64 * omega;
        let mut dist = 0.0f64;
        for j in 0..m {
            let s = base + omega * j as f64 / m as f64;
            for c in 0..dim {
                dist = dist.max((traj.eval(s + omega, c) - traj.eval(s, c)).abs());
            }
        }
        distances.push(dist);
        if dist < tol {
            let start = k as f64 * omega;
            let components: Vec<Vec<f64>> = (0..model.n())
                .map(|i| {
                    (0..m)
                        .map(|j| {
                            traj.eval(start + omega * j as f64 / m as f64, 1 + i).max(0.0)
                        })
                        .collect()
                })
                .collect();
            let x = PeriodicCandidate { omega, components };
            let s_values: Vec<f64> = (0..m)
                .map(|j| traj.eval(start + omega * j as f64 / m as f64, 0))
                .collect();
            let s_star = PeriodicFn::from_samples(omega, s_values)?;
            let washout = washout_solution(model)?;
            let fde = fde_residual(model, &washout, &x);
            let phi_residual = phi_apply(model, &washout, &x).sup_distance(&x);
            let positivity = (0..x.components()).map(|i| x.component_min(i)).collect();
            return Ok(PeriodicOrbit {
                x_star: x,
                s_star,
                phi_residual,
                fde_residual: fde,
                positivity,
            });
        }
    }
    let last = *distances.last().expect("n_periods >= 2 compares at least once");
    Err(Error::NoPeriodicOrbit {
        periods: n_periods,
        last,
        distances,
    })
}

/// Cone geometry for the fixed-point argument.
#[derive(Debug, Clone, Serialize)]
pub struct ConeParams {
    /// Cone aperture sigma = e^{-D}.
    pub sigma: f64,
    /// Inner radius from the strict-growth margin; `None` when the windowed
    /// existence margin is nonpositive (no inner radius is justified).
    pub r: Option<f64>,
    /// Outer (saturation) radius: candidates this large push every response
    /// argument below zero.
    pub big_r: f64,
}

impl ConeParams {
    /// A usable bracket needs r < R with r defined.
    pub fn is_degenerate(&self) -> bool {
        self.r.is_none_or(|r| r >= self.big_r)
    }
}

/// Compute (sigma, r, R). The outer radius saturates the operator; the
/// inner radius follows the existence proof: a delta carved from the
/// windowed margin, an epsilon from the sampled continuity modulus of the
/// responses, then r = epsilon e^{-d_hi tau_max} / n.
pub fn cone_params(model: &ChemostatModel) -> Result<ConeParams> {
    let washout = washout_solution(model)?;
    let cap_d = model.d_period_integral();
    let sigma = (-cap_d).exp();
    let (d_lo, d_hi) = model.d_bounds();
    let (s0_lo, s0_hi) = model.s0_bounds();
    let big_r = s0_hi * (-d_lo * model.tau_min()).exp() / sigma;

    let r = if model.n() == 0 {
        None
    } else {
        let report = crate::conditions::check_existence(model, &washout);
        let margin = (1..=model.n())
            .filter_map(|i| report.get(ConditionId::H3, Some(i)))
            .map(|e| e.margin)
            .fold(f64::INFINITY, f64::min);
        if !(margin.is_finite() && margin > 0.0) {
            None
        } else {
            let delta = 0.5 * margin * d_hi / (d_hi * model.omega).exp_m1();
            let eps = continuity_eps(model, s0_lo, s0_hi, delta);
            (eps > 0.0).then(|| eps * (-d_hi * model.tau_max()).exp() / model.n() as f64)
        }
    };
    Ok(ConeParams { sigma, r, big_r })
}

/// Largest epsilon with p_i(x) - p_i(x - eps) < delta across the forcing
/// band, found by bisection on the sampled modulus (which grows with eps).
fn continuity_eps(model: &ChemostatModel, lo: f64, hi: f64, delta: f64) -> f64 {
    let samples = 1024;
    let modulus = |eps: f64| -> f64 {
        let mut worst = 0.0f64;
        for sp in &model.species {
            for k in 0..=samples {
                let x = lo + (hi - lo) * k as f64 / samples as f64;
                worst = worst.max(sp.response.eval(x) - sp.response.eval(x - eps));
            }
        }
        worst
    };
    if modulus(hi) < delta {
        return hi;
    }
    let (mut a, mut b) = (0.0f64, hi);
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        if modulus(mid) < delta {
            a = mid;
        } else {
            b = mid;
        }
    }
    a
}
