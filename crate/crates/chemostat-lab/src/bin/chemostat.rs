//! File-driven front end: validate a configured model, emit washout and
//! trajectory CSVs, run the condition batteries, construct periodic orbits,
//! and sweep the rate/delay plane.
//!
//! Artifacts are CSV with `#`-prefixed comment lines echoing the config and
//! the numeric defaults, so a rerun with the same inputs is byte-identical
//! and diffs cleanly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use chemostat_lab::conditions::{
    check_exclusion, check_existence_with, check_extinction_with, estimate_persistence_with,
};
use chemostat_lab::config::load_model;
use chemostat_lab::defaults::{GRID_POINTS, SOLVER_TOL, STEPS_PER_PERIOD};
use chemostat_lab::model::{validate_model, ChemostatModel};
use chemostat_lab::report::ConditionReport;
use chemostat_lab::simulate::{conservation_series, simulate, History};
use chemostat_lab::solver::{
    cone_params, find_fixed_point, poincare_shoot, single_species_solve, SolveOptions,
};
use chemostat_lab::sweep::{flip_delays, sweep_rate_delay, SweepAxis};
use chemostat_lab::washout::{washout_solution_with, WashoutSolution};
use chemostat_lab::{ConditionId, Error};

#[derive(Parser)]
#[command(
    name = "chemostat",
    version,
    about = "Numerical laboratory for periodically forced chemostat models with delays"
)]
struct Cli {
    /// Directory for output artifacts. Falls back to $CHEMOSTAT_OUT_DIR,
    /// then the working directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Model config file (TOML).
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check the standing hypotheses (positivity, periodicity, monotone
    /// responses) and print the report.
    Validate(ConfigArg),
    /// Emit one period of the washout solution y*(t) as CSV.
    Washout {
        #[command(flatten)]
        config: ConfigArg,
        /// Grid nodes per period.
        #[arg(long, default_value_t = GRID_POINTS)]
        points: usize,
        /// Output file name (relative names land in the output directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the delay system from a constant history and emit the
    /// trajectory as CSV.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Final time.
        #[arg(long, default_value_t = 50.0)]
        t_end: f64,
        /// Step size; defaults to omega / 2048.
        #[arg(long)]
        dt: Option<f64>,
        /// Constant initial history "S,x1,...,xn"; defaults to the washout
        /// level with 0.1 biomass in every species.
        #[arg(long, value_parser = parse_state_list)]
        init: Option<Vec<f64>>,
        /// Number of output rows (uniform in time).
        #[arg(long, default_value_t = 2048)]
        rows: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every condition battery and print a condition-by-condition summary.
    Check {
        #[command(flatten)]
        config: ConfigArg,
        /// Grid nodes per period for the condition quadratures.
        #[arg(long, default_value_t = GRID_POINTS)]
        points: usize,
    },
    /// Construct a nontrivial periodic orbit as a fixed point of the
    /// integral operator and emit it as CSV.
    FindPeriodic {
        #[command(flatten)]
        config: ConfigArg,
        /// Convergence tolerance on the operator residual.
        #[arg(long, default_value_t = SOLVER_TOL)]
        tol: f64,
        /// Grid nodes per period.
        #[arg(long, default_value_t = GRID_POINTS)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// End-to-end competitive-exclusion run: condition check, long
    /// simulation, shooting cross-check, and agreement report.
    ExclusionDemo {
        #[command(flatten)]
        config: ConfigArg,
        /// Index (1-based) of the designated surviving species.
        #[arg(long, default_value_t = 1)]
        survivor: usize,
        /// Final simulation time.
        #[arg(long, default_value_t = 300.0)]
        t_end: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the condition battery over a (rate, delay) grid and emit
    /// one row per point.
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 1.0)]
        b_lo: f64,
        #[arg(long, default_value_t = 20.0)]
        b_hi: f64,
        #[arg(long, default_value_t = 40)]
        b_steps: usize,
        #[arg(long, default_value_t = 0.0)]
        tau_lo: f64,
        #[arg(long, default_value_t = 3.0)]
        tau_hi: f64,
        #[arg(long, default_value_t = 40)]
        tau_steps: usize,
        /// Michaelis-Menten saturation constant shared by all grid points.
        #[arg(long, default_value_t = 1.0)]
        saturation: f64,
        /// Grid nodes per period for the condition quadratures.
        #[arg(long, default_value_t = GRID_POINTS)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_state_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad component {part:?}: {e}"))
        })
        .collect()
}

fn out_path(cli_dir: &Option<PathBuf>, name: Option<PathBuf>, default: &str) -> PathBuf {
    let dir = cli_dir
        .clone()
        .or_else(|| std::env::var_os("CHEMOSTAT_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    dir.join(name.unwrap_or_else(|| PathBuf::from(default)))
}

fn describe_model(model: &ChemostatModel) -> String {
    let mut line = format!(
        "n = {}, omega = {}, d(t) = {}, S0(t) = {}",
        model.n(),
        model.omega,
        model.d.describe(),
        model.s0.describe()
    );
    for (i, sp) in model.species.iter().enumerate() {
        write!(line, ", species {} = {} with tau = {}", i + 1, sp.response.describe(), sp.tau)
            .unwrap();
    }
    line
}

fn print_report(title: &str, report: &ConditionReport) {
    println!("{title}:");
    if report.entries.is_empty() {
        println!("  (no entries)");
        return;
    }
    for e in &report.entries {
        let species = e
            .species
            .map(|i| format!("species {i}"))
            .unwrap_or_else(|| "model".into());
        let mut line = format!(
            "  {:<8} {:<9} {:<12} margin {:+.6e}",
            e.id.to_string(),
            species,
            e.verdict.to_string(),
            e.margin
        );
        if let Some(t) = e.witness_t {
            write!(line, "  at t = {t:.6}").unwrap();
        }
        if let Some(note) = &e.note {
            write!(line, "  [{note}]").unwrap();
        }
        println!("{line}");
    }
}

/// Assemble a CSV artifact: `#` comment lines, a header row, data rows.
fn write_csv(
    path: &Path,
    comments: &[String],
    header: &str,
    rows: impl IntoIterator<Item = String>,
) -> anyhow::Result<()> {
    let mut text = String::new();
    for c in comments {
        writeln!(text, "# {c}").unwrap();
    }
    writeln!(text, "{header}").unwrap();
    for row in rows {
        writeln!(text, "{row}").unwrap();
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("creating output directory {}", dir.display()))?;
        }
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn load(config: &ConfigArg) -> anyhow::Result<ChemostatModel> {
    Ok(load_model(&config.config)?)
}

fn washout_of(model: &ChemostatModel, points: usize) -> anyhow::Result<WashoutSolution> {
    Ok(washout_solution_with(model, points)?)
}

fn default_history(model: &ChemostatModel, washout: &WashoutSolution) -> Vec<f64> {
    let mut state = vec![washout.eval(0.0)];
    state.extend(std::iter::repeat_n(0.1, model.n()));
    state
}

fn run_validate(config: &ConfigArg) -> anyhow::Result<()> {
    let model = load(config)?;
    println!("model {}: {}", config.config.display(), describe_model(&model));
    let report = validate_model(&model);
    print_report("hypotheses", &report);
    println!(
        "summary: {}",
        if report.all_hold() {
            "all hypotheses hold"
        } else {
            "some hypotheses fail, see report"
        }
    );
    Ok(())
}

fn run_washout(
    out_dir: &Option<PathBuf>,
    config: &ConfigArg,
    points: usize,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    if points < 4 {
        bail!("--points must be at least 4");
    }
    let model = load(config)?;
    let washout = washout_of(&model, points)?;
    let residual = washout.ode_residual_max(&model);
    println!(
        "washout: y* in [{:.9}, {:.9}], y*(0) = {:.9}, ode residual {:.3e}",
        washout.min, washout.max, washout.y0, residual
    );
    let comments = vec![
        format!("config {} ({})", config.config.display(), describe_model(&model)),
        format!("points = {points} (default {GRID_POINTS})"),
        format!("y0 = {}", washout.y0),
        format!("band = [{}, {}]", washout.min, washout.max),
        format!("ode_residual_max = {residual:e}"),
    ];
    let omega = model.omega;
    let rows = (0..points).map(|k| {
        let t = omega * k as f64 / points as f64;
        format!("{t},{}", washout.eval(t))
    });
    write_csv(
        &out_path(out_dir, out, "washout.csv"),
        &comments,
        "t,y_star",
        rows,
    )
}

fn run_simulate(
    out_dir: &Option<PathBuf>,
    config: &ConfigArg,
    t_end: f64,
    dt: Option<f64>,
    init: Option<Vec<f64>>,
    rows: usize,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let model = load(config)?;
    let dt = dt.unwrap_or(model.omega / STEPS_PER_PERIOD as f64);
    if !(dt > 0.0 && t_end > 0.0) {
        bail!("--dt and --t-end must be positive");
    }
    if rows < 2 {
        bail!("--rows must be at least 2");
    }
    let washout = washout_of(&model, GRID_POINTS)?;
    let state = init.unwrap_or_else(|| default_history(&model, &washout));
    if state.len() != model.n() + 1 {
        bail!(
            "--init needs {} components (S and {} species), got {}",
            model.n() + 1,
            model.n(),
            state.len()
        );
    }
    let history = History::constant(state.clone());
    let traj = simulate(&model, &history, t_end, dt)?;

    let conservation = conservation_series(&model, &traj)?;
    let worst_defect = conservation
        .iter()
        .fold(0.0f64, |a, (_, _, d)| a.max(*d));
    println!(
        "simulated to t = {t_end} at dt = {dt:.6e}; conservation defect {:.3e}",
        worst_defect
    );

    let mut comments = vec![
        format!("config {} ({})", config.config.display(), describe_model(&model)),
        format!(
            "t_end = {t_end}, dt = {dt} (default omega/{STEPS_PER_PERIOD}), init = {state:?}"
        ),
        format!("conservation_defect_max = {worst_defect:e}"),
    ];
    if let Ok(summary) = traj.asymptotic_summary(model.omega) {
        let mut line = String::from("last-period bands:");
        for (c, (lo, hi)) in summary.iter().enumerate() {
            let name = if c == 0 {
                "S".to_string()
            } else {
                format!("x{c}")
            };
            write!(line, " {name} in [{lo:.6e}, {hi:.6e}]").unwrap();
        }
        comments.push(line);
    }

    let mut header = String::from("t,S");
    for i in 1..=model.n() {
        write!(header, ",x{i}").unwrap();
    }
    let data = (0..rows).map(|k| {
        let t = t_end * k as f64 / (rows - 1) as f64;
        let state = traj.eval_all(t);
        let mut row = format!("{t}");
        for v in state {
            write!(row, ",{v}").unwrap();
        }
        row
    });
    write_csv(
        &out_path(out_dir, out, "trajectory.csv"),
        &comments,
        &header,
        data,
    )
}

fn run_check(config: &ConfigArg, points: usize) -> anyhow::Result<()> {
    if points < 4 {
        bail!("--points must be at least 4");
    }
    let model = load(config)?;
    println!("model {}: {}", config.config.display(), describe_model(&model));
    println!("defaults: points = {points}, equality band = 1e-12");

    print_report("hypotheses", &validate_model(&model));

    let washout = washout_of(&model, points)?;
    println!(
        "washout: y* in [{:.9}, {:.9}], ode residual {:.3e}",
        washout.min,
        washout.max,
        washout.ode_residual_max(&model)
    );

    print_report(
        "extinction",
        &check_extinction_with(&model, &washout, points),
    );
    print_report(
        "existence",
        &check_existence_with(&model, &washout, points),
    );

    let (estimate, persistence) = estimate_persistence_with(&model, &washout, points);
    print_report("persistence", &persistence);
    println!(
        "  substrate floor m0 = {:.9} (root found: {}, conservative: {})",
        estimate.m0, estimate.root_found, estimate.conservative
    );
    if let Some(mc) = estimate.m0_closed {
        println!("  closed-form floor (printed form) = {mc:.9}");
    }
    if let Some(mc) = estimate.m0_closed_sqrt {
        println!("  closed-form floor (sqrt variant) = {mc:.9}");
    }
    if let Some(mb) = estimate.m0_band {
        println!("  washout-band floor = {mb:.9}");
    }

    if model.n() >= 1 {
        for survivor in 1..=model.n() {
            let report = check_exclusion(&model, &washout, survivor)?;
            print_report(&format!("exclusion (survivor {survivor})"), &report);
        }
    }

    let cone = cone_params(&model)?;
    match cone.r {
        Some(r) => println!(
            "cone: sigma = {:.6e}, inner radius r = {:.6e}, saturation radius R = {:.6e}{}",
            cone.sigma,
            r,
            cone.big_r,
            if cone.is_degenerate() {
                " (degenerate bracket)"
            } else {
                ""
            }
        ),
        None => println!(
            "cone: sigma = {:.6e}, saturation radius R = {:.6e}, no inner radius (growth margin not positive)",
            cone.sigma, cone.big_r
        ),
    }
    Ok(())
}

fn run_find_periodic(
    out_dir: &Option<PathBuf>,
    config: &ConfigArg,
    tol: f64,
    points: usize,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    if tol.is_nan() || tol <= 0.0 {
        bail!("--tol must be positive");
    }
    if points < 8 {
        bail!("--points must be at least 8");
    }
    let model = load(config)?;
    if model.n() == 0 {
        bail!("the model has no species; nothing to solve for");
    }
    let washout = washout_of(&model, points)?;
    let opts = SolveOptions {
        residual_tol: tol,
        grid_points: points,
        ..SolveOptions::default()
    };
    let orbit = match find_fixed_point(&model, &washout, &opts) {
        Ok(orbit) => orbit,
        Err(Error::ConvergedToWashout { iters }) => {
            println!(
                "iteration converged to the washout solution after {iters} iterations; \
                 no nontrivial periodic orbit found from the standard starts"
            );
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };

    println!(
        "orbit found: operator residual {:.3e} (tol {tol:.1e}), differential defect {:.3e}",
        orbit.phi_residual, orbit.fde_residual
    );
    for (i, lo) in orbit.positivity.iter().enumerate() {
        let hi = orbit.x_star.component_max(i);
        println!(
            "  species {}: x* in [{lo:.6e}, {hi:.6e}], cone ratio {:.6e}",
            i + 1,
            lo / hi
        );
    }

    let comments = vec![
        format!("config {} ({})", config.config.display(), describe_model(&model)),
        format!("points = {points} (default {GRID_POINTS}), tol = {tol:e} (default {SOLVER_TOL:e})"),
        format!(
            "phi_residual = {:e}, fde_residual = {:e}",
            orbit.phi_residual, orbit.fde_residual
        ),
    ];
    let mut header = String::from("t");
    for i in 1..=model.n() {
        write!(header, ",x{i}").unwrap();
    }
    header.push_str(",S_star,y_star");
    let omega = model.omega;
    let m = orbit.x_star.nodes();
    let rows = (0..m).map(|k| {
        let t = omega * k as f64 / m as f64;
        let mut row = format!("{t}");
        for i in 0..model.n() {
            write!(row, ",{}", orbit.x_star.component(i)[k]).unwrap();
        }
        write!(row, ",{},{}", orbit.s_star.eval(t), washout.eval(t)).unwrap();
        row
    });
    write_csv(
        &out_path(out_dir, out, "orbit.csv"),
        &comments,
        &header,
        rows,
    )
}

fn run_exclusion_demo(
    out_dir: &Option<PathBuf>,
    config: &ConfigArg,
    survivor: usize,
    t_end: f64,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let model = load(config)?;
    if model.n() == 0 {
        bail!("the model has no species");
    }
    if t_end.is_nan() || t_end <= 0.0 {
        bail!("--t-end must be positive");
    }
    let omega = model.omega;
    if t_end < 3.0 * omega {
        bail!("--t-end must cover at least three periods (omega = {omega})");
    }
    println!("model {}: {}", config.config.display(), describe_model(&model));
    let washout = washout_of(&model, GRID_POINTS)?;

    // Step 1: the sufficient condition.
    let report = check_exclusion(&model, &washout, survivor)?;
    print_report(&format!("exclusion condition (survivor {survivor})"), &report);

    // Step 2: the designated survivor's own periodic orbit.
    let stage = single_species_solve(&model, &washout.y_star, survivor)?;
    println!(
        "survivor orbit: x* in [{:.6e}, {:.6e}], operator residual {:.3e}",
        stage.positivity[0],
        stage.x_star.component_max(0),
        stage.phi_residual
    );

    // Step 3: long simulation of the full community.
    let state = default_history(&model, &washout);
    let history = History::constant(state.clone());
    let dt = omega / STEPS_PER_PERIOD as f64;
    let traj = simulate(&model, &history, t_end, dt)?;

    let samples = 512;
    let mut loser_sup = vec![0.0f64; model.n()];
    let mut survivor_gap = 0.0f64;
    for k in 0..samples {
        let t = t_end - omega + omega * k as f64 / samples as f64;
        for (i, sup) in loser_sup.iter_mut().enumerate() {
            let v = traj.eval(t, i + 1);
            if i + 1 == survivor {
                survivor_gap = survivor_gap.max((v - stage.x_star.eval(0, t)).abs());
            } else {
                *sup = sup.max(v);
            }
        }
    }
    println!("simulation to t = {t_end} (dt = {dt:.6e}):");
    for (i, sup) in loser_sup.iter().enumerate() {
        if i + 1 != survivor {
            println!("  species {} last-period sup = {sup:.3e}", i + 1);
        }
    }
    println!(
        "  survivor {survivor} last period vs its orbit: sup distance {survivor_gap:.3e}"
    );

    // Step 4: shooting cross-check on the full system.
    let periods = (t_end / omega).floor() as usize;
    match poincare_shoot(&model, &history, periods.max(2), 1e-6) {
        Ok(shot) => {
            let mut gap = 0.0f64;
            for k in 0..samples {
                let t = omega * k as f64 / samples as f64;
                gap = gap.max(
                    (shot.x_star.eval(survivor - 1, t) - stage.x_star.eval(0, t)).abs(),
                );
            }
            println!(
                "shooting: converged (segment distance < 1e-6); survivor component vs orbit sup {gap:.3e}"
            );
        }
        Err(Error::NoPeriodicOrbit { periods, last, .. }) => {
            println!(
                "shooting: no convergence within {periods} periods (last segment distance {last:.3e})"
            );
        }
        Err(e) => return Err(e.into()),
    }

    let comments = vec![
        format!("config {} ({})", config.config.display(), describe_model(&model)),
        format!("survivor = {survivor}, t_end = {t_end}, dt = {dt}, init = {state:?}"),
        format!("survivor_orbit_gap = {survivor_gap:e}"),
    ];
    let mut header = String::from("t,S");
    for i in 1..=model.n() {
        write!(header, ",x{i}").unwrap();
    }
    write!(header, ",x{survivor}_orbit").unwrap();
    let rows = (0..samples).map(|k| {
        let t = t_end - omega + omega * k as f64 / samples as f64;
        let mut row = format!("{t}");
        write!(row, ",{}", traj.eval(t, 0)).unwrap();
        for i in 0..model.n() {
            write!(row, ",{}", traj.eval(t, i + 1)).unwrap();
        }
        write!(row, ",{}", stage.x_star.eval(0, t)).unwrap();
        row
    });
    write_csv(
        &out_path(out_dir, out, "exclusion.csv"),
        &comments,
        &header,
        rows,
    )
}

#[allow(clippy::too_many_arguments)]
fn run_sweep(
    out_dir: &Option<PathBuf>,
    config: &ConfigArg,
    b_axis: SweepAxis,
    tau_axis: SweepAxis,
    saturation: f64,
    points: usize,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    if saturation.is_nan() || saturation <= 0.0 {
        bail!("--saturation must be positive");
    }
    if points < 4 {
        bail!("--points must be at least 4");
    }
    let model = load(config)?;
    let rows = sweep_rate_delay(&model, b_axis, tau_axis, saturation, points)?;

    let battery = [
        ConditionId::ExtI,
        ConditionId::ExtStab,
        ConditionId::ExtGas,
        ConditionId::RiSign,
        ConditionId::H3,
        ConditionId::H3A,
        ConditionId::H3B,
        ConditionId::H3C,
    ];
    let mut comments = vec![
        format!("config {} ({})", config.config.display(), describe_model(&model)),
        format!(
            "b in [{}, {}] x {} steps, tau in [{}, {}] x {} steps, saturation = {saturation}, points = {points}",
            b_axis.value(0),
            b_axis.value(b_axis.steps() - 1),
            b_axis.steps(),
            tau_axis.value(0),
            tau_axis.value(tau_axis.steps() - 1),
            tau_axis.steps()
        ),
    ];
    let mut flips_line = String::from("H3A flip delays per rate column:");
    for (b, flip) in flip_delays(&rows, tau_axis.steps(), ConditionId::H3A) {
        match flip {
            Some(tau) => write!(flips_line, " b={b:.4}:tau={tau:.4}").unwrap(),
            None => write!(flips_line, " b={b:.4}:none").unwrap(),
        }
    }
    comments.push(flips_line);

    let mut header = String::from("b,tau");
    for id in battery {
        let name = id.as_str().to_lowercase();
        write!(header, ",{name}_margin,{name}_verdict").unwrap();
    }
    let data = rows.iter().map(|pt| {
        let mut row = format!("{},{}", pt.b, pt.tau);
        for id in battery {
            match pt.report.get(id, Some(1)) {
                Some(e) => write!(row, ",{},{}", e.margin, e.verdict).unwrap(),
                None => row.push_str(",,"),
            }
        }
        row
    });
    println!(
        "swept {} points ({} x {})",
        rows.len(),
        b_axis.steps(),
        tau_axis.steps()
    );
    write_csv(
        &out_path(out_dir, out, "sweep.csv"),
        &comments,
        &header,
        data,
    )
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate(ref config) => run_validate(config),
        Command::Washout {
            ref config,
            points,
            ref out,
        } => run_washout(&cli.out_dir, config, points, out.clone()),
        Command::Simulate {
            ref config,
            t_end,
            dt,
            ref init,
            rows,
            ref out,
        } => run_simulate(
            &cli.out_dir,
            config,
            t_end,
            dt,
            init.clone(),
            rows,
            out.clone(),
        ),
        Command::Check { ref config, points } => run_check(config, points),
        Command::FindPeriodic {
            ref config,
            tol,
            points,
            ref out,
        } => run_find_periodic(&cli.out_dir, config, tol, points, out.clone()),
        Command::ExclusionDemo {
            ref config,
            survivor,
            t_end,
            ref out,
        } => run_exclusion_demo(&cli.out_dir, config, survivor, t_end, out.clone()),
        Command::Sweep {
            ref config,
            b_lo,
            b_hi,
            b_steps,
            tau_lo,
            tau_hi,
            tau_steps,
            saturation,
            points,
            ref out,
        } => {
            let b_axis = SweepAxis::new(b_lo, b_hi, b_steps)?;
            let tau_axis = SweepAxis::new(tau_lo, tau_hi, tau_steps)?;
            run_sweep(
                &cli.out_dir,
                config,
                b_axis,
                tau_axis,
                saturation,
                points,
                out.clone(),
            )
        }
    }
}
