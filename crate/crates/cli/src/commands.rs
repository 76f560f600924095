//! Command implementations. Every output file is byte-deterministic under a
//! fixed seed and config; progress prints go to stderr only.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use agcas_core::agent::{
    deterministic_action, evaluate_policy, train as train_agent, SacConfig,
};
use agcas_core::dynamics::AircraftState;
use agcas_core::env::Observation;
use agcas_core::hyperopt::run_study;
use agcas_core::icg::{generate_initial_conditions, read_ic_csv, write_ic_csv, InitialCondition};
use agcas_core::nn::{load_params, save_params};
use agcas_core::sensing::{lidar_scan, render_pgm, LidarConfig};
use agcas_core::terrain::{generate_terrain, load_ascii_grid, save_ascii_grid, TerrainGrid, TerrainKind};

use crate::config::RunConfig;

fn read_text(path: &Path, what: &str) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {what} '{}'", path.display()))
}

fn write_text(path: &Path, text: &str, what: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .with_context(|| format!("cannot create directory '{}'", dir.display()))?;
        }
    }
    fs::write(path, text).with_context(|| format!("cannot write {what} '{}'", path.display()))
}

fn load_terrain(path: &Path) -> Result<TerrainGrid<f64>> {
    let text = read_text(path, "terrain grid")?;
    load_ascii_grid(&text).context("terrain grid is malformed")
}

fn load_ics(path: &Path) -> Result<Vec<InitialCondition<f64>>> {
    let text = read_text(path, "initial-condition file")?;
    let ics = read_ic_csv(&text).context("initial-condition file is malformed")?;
    Ok(ics)
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::parse(&read_text(p, "run config")?),
        None => Ok(RunConfig { version: crate::config::RUN_CONFIG_VERSION, ..RunConfig::default() }),
    }
}

#[derive(Args)]
pub struct TerrainGenArgs {
    /// flat | ridge | valley | fractal
    #[arg(long)]
    pub kind: TerrainKind,
    /// Nodes per side.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    /// Node spacing in meters.
    #[arg(long, default_value_t = 30.0)]
    pub cell: f64,
    /// Peak-to-floor height scale in meters.
    #[arg(long, default_value_t = 500.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn terrain_gen(args: &TerrainGenArgs) -> Result<()> {
    let grid = generate_terrain(args.kind, args.size, args.cell, args.amplitude, args.seed)
        .context("terrain generation failed")?;
    write_text(&args.out, &save_ascii_grid(&grid), "terrain grid")?;
    eprintln!("wrote {}x{} grid to {}", grid.ncols(), grid.nrows(), args.out.display());
    Ok(())
}

#[derive(Args)]
pub struct IcGenArgs {
    #[arg(long)]
    pub terrain: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional run config providing the icg section.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Attitude sweep step in degrees.
    #[arg(long)]
    pub attitude_step: Option<f64>,
    /// Heading sweep step in degrees.
    #[arg(long)]
    pub heading_step: Option<f64>,
    #[arg(long)]
    pub collision_min: Option<f64>,
    #[arg(long)]
    pub collision_max: Option<f64>,
    #[arg(long)]
    pub airspeed: Option<f64>,
    /// Start height-above-terrain candidates in meters (repeatable).
    #[arg(long = "hat")]
    pub hats: Vec<f64>,
}

pub fn ic_gen(args: &IcGenArgs) -> Result<()> {
    let grid = load_terrain(&args.terrain)?;
    let run_cfg = load_config(args.config.as_ref())?;
    let mut cfg = run_cfg.icg.to_config(&grid);
    if let Some(v) = args.attitude_step {
        cfg.attitude_step = v;
    }
    if let Some(v) = args.heading_step {
        cfg.heading_step = v;
    }
    if let Some(v) = args.collision_min {
        cfg.collision_min = v;
    }
    if let Some(v) = args.collision_max {
        cfg.collision_max = v;
    }
    if let Some(v) = args.airspeed {
        cfg.airspeed = v;
    }
    if !args.hats.is_empty() {
        cfg.start_hat_candidates = args.hats.clone();
    }
    let result = generate_initial_conditions(&grid, &cfg)?;
    write_text(&args.out, &write_ic_csv(&result.conditions), "initial-condition file")?;
    eprintln!(
        "kept {} of {} candidate poses -> {}",
        result.conditions.len(),
        result.candidates,
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
pub struct LidarRenderArgs {
    #[arg(long)]
    pub terrain: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub y: f64,
    /// Altitude above the grid datum in meters.
    #[arg(long)]
    pub alt: f64,
    /// Roll in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub roll: f64,
    /// Pitch in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub pitch: f64,
    /// Heading in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub heading: f64,
    /// Airspeed in m/s (sets the detection range).
    #[arg(long, default_value_t = 200.0)]
    pub speed: f64,
    /// Fan size (k x k rays).
    #[arg(long, default_value_t = 16)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn lidar_render(args: &LidarRenderArgs) -> Result<()> {
    let grid = load_terrain(&args.terrain)?;
    let ground = grid.elevation_at(args.x, args.y).context("pose is outside the grid")?;
    if args.alt <= ground {
        bail!("pose altitude {} is at or below the terrain surface ({ground:.3})", args.alt);
    }
    let mut state =
        AircraftState::level([args.x, args.y, args.alt], args.heading.to_radians(), args.speed);
    state.roll = args.roll.to_radians();
    state.pitch = args.pitch.to_radians();
    let scan = lidar_scan(&grid, &state, &LidarConfig::square(args.k))?;
    write_text(&args.out, &render_pgm(&scan), "depth image")?;
    eprintln!(
        "rendered {}x{} scan (min distance {:.1} m) -> {}",
        scan.rows,
        scan.cols,
        scan.min_distance,
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub terrain: PathBuf,
    #[arg(long)]
    pub ics: PathBuf,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let run_cfg = load_config(args.config.as_ref())?;
    let grid = load_terrain(&args.terrain)?;
    let ics = load_ics(&args.ics)?;
    let env_cfg = run_cfg.env_config();
    let sac_cfg = run_cfg.sac.to_config(args.seed);
    let feature = run_cfg.sac.feature_net()?;
    let (sac, log) = train_agent(&grid, &env_cfg, feature, &sac_cfg, &ics, args.steps)?;
    write_text(
        &args.out_dir.join("policy.json"),
        &save_params(&sac.actor_spec, sac.actor_params()),
        "policy",
    )?;
    write_text(&args.out_dir.join("train_log.csv"), &log.to_csv(), "training log")?;
    eprintln!(
        "trained {} steps over {} episodes -> {}",
        args.steps,
        log.rows.len(),
        args.out_dir.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalReportDoc {
    collision_rate: f64,
    negg_rate: f64,
    mean_return: f64,
    mean_min_hat: f64,
    episodes: usize,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub policy: PathBuf,
    #[arg(long)]
    pub terrain: PathBuf,
    #[arg(long)]
    pub ics: PathBuf,
    #[arg(long)]
    pub episodes: usize,
    /// Report JSON destination.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-episode trace CSVs are written here when given.
    #[arg(long)]
    pub traces_dir: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let run_cfg = load_config(args.config.as_ref())?;
    let grid = load_terrain(&args.terrain)?;
    let ics = load_ics(&args.ics)?;
    let (spec, params) =
        load_params::<f64>(&read_text(&args.policy, "policy")?).context("cannot load policy")?;

    let mut env_cfg = run_cfg.env_config();
    // The fan must match the policy's input image.
    let [_, rows, cols] = spec.image_shape;
    env_cfg.lidar.rows = rows;
    env_cfg.lidar.cols = cols;

    let with_traces = args.traces_dir.is_some();
    let (report, traces) =
        evaluate_policy(&grid, &env_cfg, &ics, args.episodes, with_traces, |obs: &Observation<f64>| {
            deterministic_action(&spec, &params, obs).expect("policy matches observation shape")
        })?;

    if let Some(dir) = &args.traces_dir {
        for (i, trace) in traces.iter().enumerate() {
            write_text(&dir.join(format!("episode_{i:04}.csv")), trace, "trace")?;
        }
    }
    let doc = EvalReportDoc {
        collision_rate: report.collision_rate,
        negg_rate: report.negg_rate,
        mean_return: report.mean_return,
        mean_min_hat: report.mean_min_hat,
        episodes: args.episodes,
    };
    let json = serde_json::to_string_pretty(&doc).expect("report serializes");
    write_text(&args.out, &json, "evaluation report")?;
    eprintln!(
        "evaluated {} episodes: collision rate {:.2}, mean return {:.1}",
        args.episodes, report.collision_rate, report.mean_return
    );
    Ok(())
}

#[derive(Args)]
pub struct HyperoptArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub budget: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn hyperopt(args: &HyperoptArgs) -> Result<()> {
    let run_cfg = load_config(Some(&args.config))?;
    let grid = run_cfg.terrain.generate()?;
    let icg_cfg = run_cfg.icg.to_config(&grid);
    let ics = generate_initial_conditions(&grid, &icg_cfg)?.conditions;
    if ics.is_empty() {
        bail!("the icg section produced no initial conditions");
    }
    let env_cfg = run_cfg.env_config();
    let feature = run_cfg.sac.feature_net()?;
    let space = run_cfg.hyperopt.search_space();
    let checkpoints = run_cfg.hyperopt.checkpoints();
    let eval_episodes = run_cfg.hyperopt.eval_episodes();
    let seed = run_cfg.hyperopt.seed();

    // Objective: train from scratch for `step` env steps with the sampled
    // hyperparameters, then score the deterministic policy's mean return.
    let objective = |sample: &[f64], step: usize| -> f64 {
        let sac_cfg = SacConfig {
            lr: sample[0],
            gamma: sample[1],
            tau: sample[2],
            batch_size: sample[3] as usize,
            seed,
            ..run_cfg.sac.to_config(seed)
        };
        let (sac, _) = train_agent(&grid, &env_cfg, feature, &sac_cfg, &ics, step)
            .expect("trial training failed");
        let (report, _) =
            agcas_core::agent::evaluate(&sac, &grid, &env_cfg, &ics, eval_episodes, false)
                .expect("trial evaluation failed");
        report.mean_return
    };
    let result = run_study(&space, args.budget, &checkpoints, seed, objective)?;
    write_text(&args.out, &result.to_csv(&space), "study log")?;
    let best = result.best_trial();
    eprintln!(
        "best trial {} with objective {:.3} -> {}",
        best.id,
        best.final_objective.unwrap_or(f64::NAN),
        args.out.display()
    );
    Ok(())
}
