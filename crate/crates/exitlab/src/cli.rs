//! Command-line interface.
//!
//! States are 1-based on every external surface (flags, CSV, JSON); the
//! library uses 0-based indices internally. All commands are deterministic
//! for a fixed seed: identical invocations produce byte-identical output.

use crate::action::{
    default_lambda_grid, quasipotential_with, BoundaryMinOptions, GmamOptions,
};
use crate::chain::{sample_sigma_mc, sigma_law, SigmaLaw};
use crate::error::{Error, Result};
use crate::harness::{
    emit_plot_data, ks_distance, predict, run_against_prediction, StudyOptions,
};
use crate::model::{
    check_attraction_time, check_equilibrium_confinement, check_inward_drift,
    CoefficientRegistry, DomainConfig, DomainDescriptor, ModelConfig, ModelSpec,
};
use crate::sde::{observe_ensemble, sample_exits_full, SimConfig};
use crate::trap::{solve_trap, GammaArcs, TrapProblem};
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "exitlab", version, about = "Exit problems of slowly modulated diffusions")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the drift assumptions of a model by sampling
    Check(CheckArgs),
    /// Quasipotential at a point by minimum-action descent
    Quasipotential(QuasipotentialArgs),
    /// Roots of M(lambda) = lambda and boundary minimizers per state
    Mk(MkArgs),
    /// Exact law of the staircase stopping time
    SigmaLaw(SigmaLawArgs),
    /// Monte Carlo exit samples of the modulated diffusion
    Simulate(SimulateArgs),
    /// Full prediction: deadlines, exit points, stopping-time law
    Predict(PredictArgs),
    /// End-to-end convergence study across an epsilon grid
    Study(StudyArgs),
    /// Harmonic boundary problem on an annular region
    Trap(TrapArgs),
}

#[derive(Args)]
struct ModelArg {
    /// Path to a model configuration (JSON)
    #[arg(long)]
    model: PathBuf,
}

impl ModelArg {
    fn load(&self) -> Result<ModelSpec> {
        let cfg = ModelConfig::from_path(&self.model)?;
        CoefficientRegistry::default().build(&cfg)
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Boundary sample count
    #[arg(long, default_value_t = 200)]
    boundary_samples: usize,
    /// Lambda sample count
    #[arg(long, default_value_t = 50)]
    lambda_samples: usize,
}

#[derive(Args)]
struct QuasipotentialArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Target point, comma-separated coordinates
    #[arg(long, value_parser = parse_point)]
    x: Vec<f64>,
    #[arg(long)]
    lambda: f64,
    /// Chain state (1-based)
    #[arg(long, default_value_t = 1)]
    state: usize,
    /// Path discretization points
    #[arg(long, default_value_t = 64)]
    points: usize,
}

#[derive(Args)]
struct MkArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Lambda grid size for bracketing
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// Write the (lambda, M) profile of --state to a CSV file
    #[arg(long)]
    profile: Option<PathBuf>,
    /// State whose profile is written (1-based)
    #[arg(long, default_value_t = 1)]
    state: usize,
}

#[derive(Args)]
struct SigmaLawArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Per-state deadlines; computed from the model when omitted
    #[arg(long, value_parser = parse_point)]
    mk: Option<Vec<f64>>,
    /// Add a Monte Carlo cross-check with this sample count
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Euler step in process time
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Start point; defaults to the equilibrium
    #[arg(long, value_parser = parse_point)]
    x0: Option<Vec<f64>>,
    /// Record positions at these lambda values into observations.csv
    #[arg(long, value_parser = parse_point)]
    observe: Option<Vec<f64>>,
    /// Radius for the near-O observation flag
    #[arg(long, default_value_t = 0.2)]
    eta: f64,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    model: ModelArg,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Descending epsilon grid, comma-separated
    #[arg(long, value_parser = parse_point)]
    eps: Vec<f64>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    eta: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
}

#[derive(Args)]
struct TrapArgs {
    /// Geometry JSON with "inner" and "outer" domain descriptions
    #[arg(long)]
    geometry: PathBuf,
    /// Gamma arcs as flat angle pairs: a1,b1,a2,b2,...
    #[arg(long, value_parser = parse_point)]
    gamma: Vec<f64>,
    /// Distinguished inner-boundary point
    #[arg(long, value_parser = parse_point)]
    xstar: Vec<f64>,
    #[arg(long, default_value_t = 256)]
    res: usize,
    /// Output CSV path for the grid values
    #[arg(long)]
    out: PathBuf,
}

fn parse_point(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number '{}': {}", t, e)))
        .collect()
}

fn state_index(one_based: usize, n_states: usize) -> Result<usize> {
    if one_based == 0 || one_based > n_states {
        return Err(Error::InvalidInput(format!(
            "state {} out of range 1..={}",
            one_based, n_states
        )));
    }
    Ok(one_based - 1)
}

/// Entry point; returns the process exit code.
pub fn run() -> Result<i32> {
    if let Ok(value) = std::env::var("EXITLAB_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Quasipotential(args) => cmd_quasipotential(args),
        Command::Mk(args) => cmd_mk(args),
        Command::SigmaLaw(args) => cmd_sigma_law(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Study(args) => cmd_study(args),
        Command::Trap(args) => cmd_trap(args),
    }
}

fn cmd_check(args: CheckArgs) -> Result<i32> {
    let model = args.model.load()?;
    let inward = check_inward_drift(&model, args.boundary_samples, args.lambda_samples)?;
    let confinement = check_equilibrium_confinement(&model, args.boundary_samples)?;
    let lambda_grid: Vec<f64> = (0..5).map(|i| model.horizon * i as f64 / 4.0).collect();
    let attraction = check_attraction_time(&model, 25, &lambda_grid)?;
    let all_pass = inward.pass && confinement.pass && attraction.pass;
    let out = json!({
        "inward_drift": inward,
        "equilibrium_confinement": confinement,
        "attraction_time": attraction,
        "all_pass": all_pass,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if all_pass { 0 } else { 1 })
}

fn cmd_quasipotential(args: QuasipotentialArgs) -> Result<i32> {
    let model = args.model.load()?;
    let state = state_index(args.state, model.n_states)?;
    let x = DVector::from_vec(args.x.clone());
    let opts = GmamOptions { n_points: args.points, ..GmamOptions::default() };
    let r = quasipotential_with(&model, &x, args.lambda, state, &opts)?;
    let out = json!({
        "value": r.value,
        "minimizer": r.path.points.iter().map(|p| p.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>(),
        "diagnostics": {
            "iterations": r.iterations,
            "grad_norm": r.grad_norm,
            "converged": r.converged,
            "left_inflated_box": r.left_inflated_box,
        },
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn cmd_mk(args: MkArgs) -> Result<i32> {
    let model = args.model.load()?;
    let grid = default_lambda_grid(model.horizon, args.grid.max(2));
    let opts = BoundaryMinOptions::default();
    let mut states = Vec::new();
    let mut profile_csv: Option<String> = None;
    for state in 0..model.n_states {
        let root = crate::action::solve_m_with(&model, state, &grid, &opts)?;
        if args.profile.is_some() && state + 1 == args.state {
            let mut csv = String::from("lambda,M,param,x1,x2\n");
            for p in &root.profile {
                let _ = writeln!(csv, "{},{},{},{},{}", p.lambda, p.m_value, p.param, p.point[0], p.point[1]);
            }
            profile_csv = Some(csv);
        }
        states.push(json!({
            "state": state + 1,
            "m": root.root,
            "x": root.minimizer,
            "param": root.minimizer_param,
            "ambiguous_at_root": root.ambiguous_at_root,
        }));
    }
    if let (Some(path), Some(csv)) = (&args.profile, profile_csv) {
        std::fs::write(path, csv)?;
    }
    println!("{}", serde_json::to_string_pretty(&json!({ "states": states }))?);
    Ok(0)
}

fn law_json(law: &SigmaLaw) -> serde_json::Value {
    json!({
        "atoms": law.atoms.iter().map(|a| json!({
            "location": a.location,
            "mass": a.mass,
            "states": a.per_state.iter().map(|(k, m)| json!({"state": k + 1, "mass": m})).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "cdf_grid": law.cdf_overlay(),
        "exit_state_probs": law.exit_state_probs,
        "support": law.support,
        "total_mass": law.total_mass,
    })
}

fn cmd_sigma_law(args: SigmaLawArgs) -> Result<i32> {
    let model = args.model.load()?;
    let deadlines = match &args.mk {
        Some(mk) => mk.clone(),
        None => predict(&model)?.deadlines(),
    };
    let law = sigma_law(&model.chain, &deadlines)?;
    let mut out = law_json(&law);
    if let Some(n) = args.mc {
        let horizon = model.horizon.max(deadlines.iter().cloned().fold(0.0, f64::max) + 1e-6);
        let samples = sample_sigma_mc(&model.chain, &deadlines, horizon, n, args.seed)?;
        let sigmas: Vec<f64> = samples.iter().map(|s| s.sigma).collect();
        let ks = ks_distance(&sigmas, &law)?;
        let mut exit_counts = vec![0usize; model.n_states];
        for s in &samples {
            exit_counts[s.exit_state] += 1;
        }
        out["mc"] = json!({
            "n": n,
            "seed": args.seed,
            "ks": ks,
            "exit_state_fractions": exit_counts.iter().map(|&c| c as f64 / n as f64).collect::<Vec<_>>(),
        });
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let model = args.model.load()?;
    let x0 = args.x0.clone().unwrap_or_else(|| model.equilibrium.iter().copied().collect());
    let mut cfg = SimConfig::new(args.eps, args.step, x0, model.horizon, args.seed);
    cfg.eta = args.eta;
    if let Some(obs) = &args.observe {
        cfg.observe = obs.clone();
    }

    let mut csv = String::from("idx,seed,censored,tau,lambda_hat,exit_x1,exit_x2,exit_state\n");
    if cfg.observe.is_empty() {
        let samples = sample_exits_full(&model, &cfg, args.n)?;
        for s in &samples {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                s.index, s.seed, u8::from(s.censored), s.tau, s.lambda_hat,
                s.exit_point[0], s.exit_point[1], s.exit_state + 1
            );
        }
        std::fs::write(&args.out, csv)?;
    } else {
        let runs = observe_ensemble(&model, &cfg, args.n)?;
        let mut obs_csv = String::from("idx,lambda_obs,x1,x2,near_O,exited\n");
        for (s, observations) in &runs {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                s.index, s.seed, u8::from(s.censored), s.tau, s.lambda_hat,
                s.exit_point[0], s.exit_point[1], s.exit_state + 1
            );
            for o in observations {
                let _ = writeln!(
                    obs_csv,
                    "{},{},{},{},{},{}",
                    s.index, o.lambda_obs, o.position[0], o.position[1],
                    u8::from(o.near_o), u8::from(o.exited)
                );
            }
        }
        std::fs::write(&args.out, csv)?;
        let obs_path = args.out.with_file_name("observations.csv");
        std::fs::write(obs_path, obs_csv)?;
    }
    Ok(0)
}

fn cmd_predict(args: PredictArgs) -> Result<i32> {
    let model = args.model.load()?;
    let p = predict(&model)?;
    let out = json!({
        "states": p.roots.iter().zip(&p.exit_points).map(|(r, xp)| json!({
            "state": r.state + 1,
            "m": r.root,
            "exit_point": xp.point,
            "exit_param": xp.param,
            "exit_probability": p.law.exit_state_probs[r.state],
        })).collect::<Vec<_>>(),
        "law": law_json(&p.law),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn cmd_study(args: StudyArgs) -> Result<i32> {
    let model = args.model.load()?;
    let mut opts = StudyOptions::new(args.eps.clone(), args.n, args.eta, args.seed);
    opts.replications = args.reps;
    opts.step = args.step;
    let prediction = predict(&model)?;
    let report = run_against_prediction(&model, &prediction, &opts)?;

    std::fs::create_dir_all(&args.out)?;
    emit_plot_data(&report, &prediction.law, &args.out)?;

    let mut exit_csv = String::from(
        "eps,rep,idx,censored,lambda_hat,exit_x1,exit_x2,exit_state,nearest_state,hit\n",
    );
    for row in &report.exit_rows {
        let _ = writeln!(
            exit_csv,
            "{},{},{},{},{},{},{},{},{},{}",
            row.epsilon, row.replication, row.index, u8::from(row.censored), row.lambda_hat,
            row.exit_point[0], row.exit_point[1], row.exit_state + 1, row.nearest_state + 1,
            u8::from(row.hit)
        );
    }
    std::fs::write(args.out.join("exit_points.csv"), exit_csv)?;

    let summary = json!({
        "eta": report.eta,
        "n": report.n,
        "seed": report.seed,
        "prediction": {
            "m": prediction.deadlines(),
            "exit_points": prediction.exit_points.iter().map(|xp| xp.point.clone()).collect::<Vec<_>>(),
            "exit_state_probs": prediction.law.exit_state_probs,
        },
        "eps": report.eps.iter().map(|e| json!({
            "epsilon": e.epsilon,
            "ks_median": e.ks_median,
            "hit_median": e.hit_median,
            "censored_total": e.censored_total,
            "budget_exhausted": e.budget_exhausted,
            "replications": e.replications,
        })).collect::<Vec<_>>(),
        "verdicts": {
            "ks_trend": report.ks_trend,
            "hit_trend": report.hit_trend,
            "all_pass": report.all_pass,
        },
    });
    std::fs::write(args.out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(if report.all_pass { 0 } else { 3 })
}

#[derive(serde::Deserialize)]
struct TrapGeometry {
    inner: DomainConfig,
    outer: DomainConfig,
}

fn cmd_trap(args: TrapArgs) -> Result<i32> {
    if args.gamma.len() % 2 != 0 || args.gamma.is_empty() {
        return Err(Error::InvalidInput("--gamma needs angle pairs a1,b1[,a2,b2,...]".into()));
    }
    let text = std::fs::read_to_string(&args.geometry)?;
    let geometry: TrapGeometry = serde_json::from_str(&text)?;
    let inner = DomainDescriptor::from_config(&geometry.inner)?;
    let outer = DomainDescriptor::from_config(&geometry.outer)?;
    let arcs: Vec<(f64, f64)> =
        args.gamma.chunks(2).map(|pair| (pair[0], pair[1])).collect();
    let problem = TrapProblem::new(inner, outer, GammaArcs::new(arcs), args.xstar.clone())?;
    let solution = solve_trap(&problem, args.res)?;

    let mut csv = String::from("x,y,u\n");
    for (value, &(i, j)) in solution.u.iter().zip(&solution.grid.unknowns) {
        let p = solution.grid.node(i, j);
        let _ = writeln!(csv, "{},{},{}", p[0], p[1], value);
    }
    std::fs::write(&args.out, csv)?;

    let summary = json!({
        "c": solution.c,
        "residual": solution.v0_stats.residual_inf.max(solution.v1_stats.residual_inf),
        "normal_derivative_at_xstar": solution.normal_derivative_at_x_star,
        "resolution": solution.resolution,
        "unknowns": solution.grid.n_unknowns(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(0)
}
