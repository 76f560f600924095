//! Episode loops: replay-fed training over a shuffled pool of initial
//! conditions, and deterministic-policy evaluation with optional trace CSVs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::replay::{ReplayBuffer, StoredObs, StoredTransition};
use super::sac::{select_action, update_step, FeatureNet, Losses, SacConfig, SacState};
use super::AgentError;
use crate::dynamics::ControlAction;
use crate::env::{trace_row, EnvConfig, Environment, Termination, TRACE_HEADER};
use crate::icg::InitialCondition;
use crate::terrain::TerrainGrid;

pub const TRAIN_LOG_HEADER: &str =
    "env_step,episode,return,collision,negg,loss_c1,loss_c2,loss_actor,alpha";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainRow {
    pub env_step: usize,
    pub episode: usize,
    pub episode_return: f64,
    pub collision: bool,
    pub negg: bool,
    pub loss_c1: f64,
    pub loss_c2: f64,
    pub loss_actor: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub rows: Vec<TrainRow>,
}

impl TrainingLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRAIN_LOG_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6},{},{},{:.6},{:.6},{:.6},{:.6}\n",
                r.env_step,
                r.episode,
                r.episode_return,
                r.collision as u8,
                r.negg as u8,
                r.loss_c1,
                r.loss_c2,
                r.loss_actor,
                r.alpha,
            ));
        }
        out
    }
}

/// Initial conditions drawn round-robin from a seeded shuffle, reshuffled
/// each full pass.
struct IcPool<'a> {
    ics: &'a [InitialCondition<f64>],
    order: Vec<usize>,
    cursor: usize,
}

impl<'a> IcPool<'a> {
    fn new(ics: &'a [InitialCondition<f64>], rng: &mut ChaCha8Rng) -> Self {
        let mut order: Vec<usize> = (0..ics.len()).collect();
        order.shuffle(rng);
        IcPool { ics, order, cursor: 0 }
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> &'a InitialCondition<f64> {
        if self.cursor >= self.order.len() {
            self.order.shuffle(rng);
            self.cursor = 0;
        }
        let ic = &self.ics[self.order[self.cursor]];
        self.cursor += 1;
        ic
    }
}

/// Off-policy training: warmup with uniform actions, then one (or more)
/// SAC updates per environment step. Fully deterministic under the config
/// seed.
pub fn train(
    grid: &TerrainGrid<f64>,
    env_cfg: &EnvConfig<f64>,
    feature: FeatureNet,
    sac_cfg: &SacConfig,
    ics: &[InitialCondition<f64>],
    total_steps: usize,
) -> Result<(SacState, TrainingLog), AgentError> {
    if ics.is_empty() {
        return Err(AgentError::NoInitialConditions);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sac_cfg.seed);
    let rows = env_cfg.lidar.rows;
    let cols = env_cfg.lidar.cols;
    let mut sac = SacState::new(rows, cols, feature, sac_cfg, &mut rng);
    let mut buffer = ReplayBuffer::new(sac_cfg.buffer_capacity);
    let mut log = TrainingLog::default();
    if total_steps == 0 {
        return Ok((sac, log));
    }

    let mut pool = IcPool::new(ics, &mut rng);
    let mut env = Environment::new(grid, env_cfg.clone());
    let mut obs = StoredObs::from_observation(&env.reset(pool.next(&mut rng))?);
    let mut episode = 0usize;
    let mut episode_return = 0.0;
    let mut last_losses = Losses { critic1: 0.0, critic2: 0.0, actor: 0.0, alpha: 0.0 };

    for env_step in 1..=total_steps {
        let action = if env_step <= sac_cfg.warmup_steps {
            [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)]
        } else {
            let o = crate::env::Observation {
                rows,
                cols,
                image: obs.image.clone(),
                scalars: obs.scalars,
            };
            select_action(&sac, &o, false, &mut rng)
        };
        let tr = env.step(ControlAction::new(action[0], action[1]))?;
        let next_obs = StoredObs::from_observation(&tr.observation);
        // Timeout truncation is not an environment terminal; keep
        // bootstrapping through it.
        let done_flag = matches!(tr.termination, Termination::Collision | Termination::NegativeG);
        buffer.push(StoredTransition {
            obs: obs.clone(),
            action,
            reward: tr.reward.total,
            next_obs: next_obs.clone(),
            done: done_flag,
        });
        obs = next_obs;
        episode_return += tr.reward.total;

        if env_step > sac_cfg.warmup_steps && buffer.len() >= sac_cfg.batch_size {
            for _ in 0..sac_cfg.updates_per_env_step {
                last_losses = update_step(&mut sac, &buffer, sac_cfg, &mut rng)?;
            }
        }

        if tr.done {
            log.rows.push(TrainRow {
                env_step,
                episode,
                episode_return,
                collision: tr.termination == Termination::Collision,
                negg: tr.termination == Termination::NegativeG,
                loss_c1: last_losses.critic1,
                loss_c2: last_losses.critic2,
                loss_actor: last_losses.actor,
                alpha: sac.alpha(),
            });
            episode += 1;
            episode_return = 0.0;
            obs = StoredObs::from_observation(&env.reset(pool.next(&mut rng))?);
        }
    }
    Ok((sac, log))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub collision_rate: f64,
    pub negg_rate: f64,
    pub mean_return: f64,
    pub mean_min_hat: f64,
}

/// Runs `episodes` episodes under an arbitrary policy, cycling the IC list
/// in order. Returns the report and one trace CSV per episode when asked.
pub fn evaluate_policy<F>(
    grid: &TerrainGrid<f64>,
    env_cfg: &EnvConfig<f64>,
    ics: &[InitialCondition<f64>],
    episodes: usize,
    with_traces: bool,
    mut policy: F,
) -> Result<(EvalReport, Vec<String>), AgentError>
where
    F: FnMut(&crate::env::Observation<f64>) -> [f64; 2],
{
    if ics.is_empty() {
        return Err(AgentError::NoInitialConditions);
    }
    let mut env = Environment::new(grid, env_cfg.clone());
    let dt = env_cfg.dynamics.dt;
    let mut collisions = 0usize;
    let mut neggs = 0usize;
    let mut return_sum = 0.0;
    let mut min_hat_sum = 0.0;
    let mut traces = Vec::new();

    for ep in 0..episodes {
        let ic = &ics[ep % ics.len()];
        let mut obs = env.reset(ic)?;
        let mut min_hat = env.height_above_terrain();
        let mut ep_return = 0.0;
        let mut trace = String::new();
        if with_traces {
            trace.push_str(TRACE_HEADER);
            trace.push('\n');
        }
        loop {
            let a = policy(&obs);
            let tr = env.step(ControlAction::new(a[0], a[1]))?;
            let hat = env.height_above_terrain();
            min_hat = min_hat.min(hat);
            ep_return += tr.reward.total;
            if with_traces {
                trace.push_str(&trace_row(
                    env.step_count(),
                    dt,
                    env.state(),
                    hat,
                    ControlAction::new(a[0], a[1]),
                    &tr.reward,
                    tr.done,
                ));
                trace.push('\n');
            }
            if tr.done {
                match tr.termination {
                    Termination::Collision => collisions += 1,
                    Termination::NegativeG => neggs += 1,
                    _ => {}
                }
                break;
            }
            obs = tr.observation;
        }
        return_sum += ep_return;
        min_hat_sum += min_hat;
        if with_traces {
            traces.push(trace);
        }
    }
    let n = episodes as f64;
    Ok((
        EvalReport {
            collision_rate: collisions as f64 / n,
            negg_rate: neggs as f64 / n,
            mean_return: return_sum / n,
            mean_min_hat: min_hat_sum / n,
        },
        traces,
    ))
}

/// Deterministic-policy evaluation of a trained agent.
pub fn evaluate(
    sac: &SacState,
    grid: &TerrainGrid<f64>,
    env_cfg: &EnvConfig<f64>,
    ics: &[InitialCondition<f64>],
    episodes: usize,
    with_traces: bool,
) -> Result<(EvalReport, Vec<String>), AgentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    evaluate_policy(grid, env_cfg, ics, episodes, with_traces, |obs| {
        select_action(sac, obs, true, &mut rng)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::RewardConfig;
    use crate::sensing::LidarConfig;
    use crate::terrain::{generate_terrain, TerrainKind};

    fn flat(size: usize) -> TerrainGrid<f64> {
        generate_terrain(TerrainKind::Flat, size, 30.0, 0.0, 0).unwrap()
    }

    fn small_env_cfg() -> EnvConfig<f64> {
        EnvConfig { lidar: LidarConfig::square(4), ..EnvConfig::default() }
    }

    fn dive_ic(grid: &TerrainGrid<f64>, hat: f64, pitch_deg: f64) -> InitialCondition<f64> {
        let (cx, cy) = grid.center();
        InitialCondition {
            position: [cx, cy, hat],
            roll_deg: 0.0,
            pitch_deg,
            heading_deg: 0.0,
            airspeed: 200.0,
            predicted_impact: 0.0,
        }
    }

    fn tiny_sac_cfg(seed: u64) -> SacConfig {
        SacConfig {
            batch_size: 8,
            buffer_capacity: 4096,
            warmup_steps: 32,
            seed,
            ..SacConfig::default()
        }
    }

    #[test]
    fn zero_steps_returns_empty_log() {
        let grid = flat(64);
        let ics = [dive_ic(&grid, 1000.0, -20.0)];
        let (_, log) = train(
            &grid,
            &small_env_cfg(),
            FeatureNet::Dense { hidden: 8 },
            &tiny_sac_cfg(0),
            &ics,
            0,
        )
        .unwrap();
        assert!(log.rows.is_empty());
    }

    #[test]
    fn training_log_deterministic_under_seed() {
        let grid = flat(256);
        let mut cfg = small_env_cfg();
        cfg.reward = RewardConfig { episode_max_steps: 60, ..RewardConfig::default() };
        let ics = [dive_ic(&grid, 800.0, -25.0), dive_ic(&grid, 1200.0, -35.0)];
        let run = || {
            train(
                &grid,
                &cfg,
                FeatureNet::Dense { hidden: 8 },
                &tiny_sac_cfg(42),
                &ics,
                300,
            )
            .unwrap()
            .1
        };
        let a = run();
        let b = run();
        assert!(!a.rows.is_empty());
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn full_up_elevator_avoids_shallow_dive() {
        let grid = flat(512);
        let ics = [dive_ic(&grid, 3000.0, -10.0)];
        let (report, _) =
            evaluate_policy(&grid, &small_env_cfg(), &ics, 3, false, |_| [0.0, 1.0]).unwrap();
        assert_eq!(report.collision_rate, 0.0);
    }

    #[test]
    fn zero_action_steep_dive_always_collides() {
        let grid = flat(512);
        let ics = [
            dive_ic(&grid, 600.0, -45.0),
            dive_ic(&grid, 800.0, -60.0),
            dive_ic(&grid, 400.0, -30.0),
        ];
        let (report, traces) =
            evaluate_policy(&grid, &small_env_cfg(), &ics, 3, true, |_| [0.0, 0.0]).unwrap();
        assert_eq!(report.collision_rate, 1.0);
        assert_eq!(report.negg_rate, 0.0);
        assert!(report.mean_min_hat <= 0.0);
        assert_eq!(traces.len(), 3);
        for t in &traces {
            assert!(t.starts_with(TRACE_HEADER));
        }
    }

    #[test]
    fn eval_mean_return_matches_trace_sums() {
        let grid = flat(512);
        let ics = [dive_ic(&grid, 2000.0, -15.0)];
        let mut cfg = small_env_cfg();
        cfg.reward = RewardConfig { episode_max_steps: 80, ..RewardConfig::default() };
        let (report, traces) =
            evaluate_policy(&grid, &cfg, &ics, 2, true, |_| [0.0, 0.4]).unwrap();
        let mut sum = 0.0;
        for t in &traces {
            for line in t.lines().skip(1) {
                let total: f64 = line.split(',').nth(15).unwrap().parse().unwrap();
                sum += total;
            }
        }
        assert!((report.mean_return - sum / 2.0).abs() < 2e-5, "report {report:?} vs {sum}");
    }

    #[test]
    fn eval_rates_bounded() {
        let grid = flat(256);
        let mut cfg = small_env_cfg();
        cfg.reward = RewardConfig { episode_max_steps: 40, ..RewardConfig::default() };
        let ics = [dive_ic(&grid, 1500.0, -20.0)];
        let (report, _) = evaluate_policy(&grid, &cfg, &ics, 5, false, |_| [0.2, -0.1]).unwrap();
        for rate in [report.collision_rate, report.negg_rate] {
            assert!((0.0..=1.0).contains(&rate));
        }
    }
}
