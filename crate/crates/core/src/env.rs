//! The RL environment: observation assembly, the sequential gated reward
//! (collision avoidance suppresses level-flight reward whenever the fan
//! detects a threat), termination logic and the episode loop.

use thiserror::Error;

use crate::dynamics::{self, AircraftState, ControlAction, DynamicsConfig, DynamicsError};
use crate::icg::InitialCondition;
use crate::scalar::{real, Real};
use crate::sensing::{lidar_scan, radalt_scan, threat_detected, LidarConfig, LidarScan, SensingError};
use crate::terrain::TerrainGrid;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("initial condition is at or below the terrain surface")]
    InitialConditionBelowTerrain,
    #[error("episode already finished; call reset")]
    EpisodeFinished,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Sensing(#[from] SensingError),
}

pub const N_SCALARS: usize = 12;

/// Depth image plus 12 normalized scalars:
/// [roll/pi, pitch/(pi/2), p/p_max, q/q_max, r, V/V0, HaT/1000 clamped to
/// [0,5], radalt 1-3 / max_range, prev aileron, prev elevator].
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T: Real> {
    pub rows: usize,
    pub cols: usize,
    pub image: Vec<T>,
    pub scalars: [T; N_SCALARS],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig<T: Real> {
    pub collision_penalty: T,
    pub negg_penalty: T,
    pub negg_floor: T,
    pub total_positive_budget: T,
    pub episode_max_steps: usize,
    pub smoothness_weight: T,
    pub avoidance_scale: T,
}

impl<T: Real> Default for RewardConfig<T> {
    fn default() -> Self {
        RewardConfig {
            collision_penalty: real(-250.0),
            negg_penalty: real(-250.0),
            negg_floor: real(-2.0),
            total_positive_budget: real(250.0),
            episode_max_steps: 600,
            smoothness_weight: real(0.05),
            avoidance_scale: real(50.0),
        }
    }
}

impl<T: Real> RewardConfig<T> {
    /// Per-step cap of the level-flight term.
    pub fn level_max(&self) -> T {
        self.total_positive_budget / real(self.episode_max_steps as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardBreakdown<T: Real> {
    pub level: T,
    pub avoidance: T,
    pub smoothness: T,
    pub sparse: T,
    pub gated: bool,
    pub total: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    None,
    Collision,
    NegativeG,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T: Real> {
    pub observation: Observation<T>,
    pub reward: RewardBreakdown<T>,
    pub done: bool,
    pub termination: Termination,
}

/// Threat severity of a scan: 1 at zero distance, 0 at the detection
/// horizon or when the fan is clear.
pub fn severity<T: Real>(scan: &LidarScan<T>) -> T {
    if scan.any_hit {
        T::one() - scan.min_distance / scan.max_range
    } else {
        T::zero()
    }
}

/// Dense components of the sequential reward. Sparse penalties are added by
/// the environment from the termination flags.
pub fn compute_reward<T: Real>(
    prev_scan: &LidarScan<T>,
    scan: &LidarScan<T>,
    state: &AircraftState<T>,
    action: ControlAction<T>,
    prev_action: ControlAction<T>,
    cfg: &RewardConfig<T>,
    collided: bool,
    negg: bool,
) -> RewardBreakdown<T> {
    let s_prev = severity(prev_scan);
    let s_now = severity(scan);
    let avoidance = cfg.avoidance_scale * (s_prev * s_prev - s_now * s_now);

    let gated = threat_detected(scan);
    let level = if gated {
        T::zero()
    } else {
        let half = real::<T>(0.5);
        let phi_ref = T::FRAC_PI_2();
        let theta_ref = T::FRAC_PI_4();
        let a = (T::one() - state.roll.abs() / phi_ref).max(T::zero());
        let b = (T::one() - state.pitch.abs() / theta_ref).max(T::zero());
        cfg.level_max() * half * (a * a + b * b)
    };

    let smoothness = -cfg.smoothness_weight
        * ((action.aileron - prev_action.aileron).abs()
            + (action.elevator - prev_action.elevator).abs());

    let mut sparse = T::zero();
    if collided {
        sparse = sparse + cfg.collision_penalty;
    }
    if negg {
        sparse = sparse + cfg.negg_penalty;
    }

    RewardBreakdown {
        level,
        avoidance,
        smoothness,
        sparse,
        gated,
        total: level + avoidance + smoothness + sparse,
    }
}

/// Priority: collision > negative g > timeout.
pub fn check_termination<T: Real>(
    hat: T,
    load_factor: T,
    step: usize,
    cfg: &RewardConfig<T>,
) -> Termination {
    if hat <= T::zero() {
        Termination::Collision
    } else if load_factor < cfg.negg_floor {
        Termination::NegativeG
    } else if step >= cfg.episode_max_steps {
        Termination::Timeout
    } else {
        Termination::None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig<T: Real> {
    pub dynamics: DynamicsConfig<T>,
    pub lidar: LidarConfig<T>,
    pub reward: RewardConfig<T>,
    /// Forces aileron to zero; used by the constrained pitch-only scenario.
    pub pitch_only: bool,
}

impl<T: Real> Default for EnvConfig<T> {
    fn default() -> Self {
        EnvConfig {
            dynamics: DynamicsConfig::default(),
            lidar: LidarConfig::default(),
            reward: RewardConfig::default(),
            pitch_only: false,
        }
    }
}

pub struct Environment<'a, T: Real> {
    grid: &'a TerrainGrid<T>,
    pub cfg: EnvConfig<T>,
    state: AircraftState<T>,
    prev_action: ControlAction<T>,
    prev_scan: Option<LidarScan<T>>,
    step_count: usize,
    done: bool,
}

impl<'a, T: Real> Environment<'a, T> {
    pub fn new(grid: &'a TerrainGrid<T>, cfg: EnvConfig<T>) -> Self {
        Environment {
            grid,
            cfg,
            state: AircraftState::level([T::zero(); 3], T::zero(), T::one()),
            prev_action: ControlAction::default(),
            prev_scan: None,
            step_count: 0,
            done: true,
        }
    }

    pub fn state(&self) -> &AircraftState<T> {
        &self.state
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn height_above_terrain(&self) -> T {
        let p = self.state.position;
        p[2] - self.grid.elevation_at(p[0], p[1]).unwrap_or(T::zero())
    }

    pub fn reset(&mut self, ic: &InitialCondition<T>) -> Result<Observation<T>, EnvError> {
        let mut state = AircraftState::level(ic.position, ic.heading_deg.to_radians(), ic.airspeed);
        state.roll = ic.roll_deg.to_radians();
        state.pitch = ic.pitch_deg.to_radians();
        state.load_factor = dynamics::load_factor(&state, &self.cfg.dynamics);
        let hat = state.position[2]
            - self
                .grid
                .elevation_at(state.position[0], state.position[1])
                .map_err(SensingError::from)?;
        if hat <= T::zero() {
            return Err(EnvError::InitialConditionBelowTerrain);
        }
        self.state = state;
        self.prev_action = ControlAction::default();
        self.step_count = 0;
        self.done = false;
        let scan = lidar_scan(self.grid, &self.state, &self.cfg.lidar)?;
        let obs = self.observe(&scan, hat)?;
        self.prev_scan = Some(scan);
        Ok(obs)
    }

    pub fn step(&mut self, action: ControlAction<T>) -> Result<Transition<T>, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }
        let mut action = action.clamped();
        if self.cfg.pitch_only {
            action.aileron = T::zero();
        }
        let mut state = dynamics::step(&self.state, action, &self.cfg.dynamics)?;
        self.clamp_into_extent(&mut state.position);
        self.state = state;
        self.step_count += 1;

        let hat = self
            .state
            .position[2]
            - self
                .grid
                .elevation_at(self.state.position[0], self.state.position[1])
                .map_err(SensingError::from)?;

        // Below the surface the lidar pose is invalid; reuse the last scan
        // for the terminal reward instead of raising OriginBelowTerrain.
        let prev_scan = self.prev_scan.take().expect("prev_scan set by reset");
        let scan = if hat > T::zero() {
            lidar_scan(self.grid, &self.state, &self.cfg.lidar)?
        } else {
            prev_scan.clone()
        };

        let termination =
            check_termination(hat, self.state.load_factor, self.step_count, &self.cfg.reward);
        let collided = hat <= T::zero();
        let negg = self.state.load_factor < self.cfg.reward.negg_floor;
        let reward = compute_reward(
            &prev_scan,
            &scan,
            &self.state,
            action,
            self.prev_action,
            &self.cfg.reward,
            collided,
            negg,
        );

        let obs = self.observe(&scan, hat)?;
        self.prev_scan = Some(scan);
        self.prev_action = action;
        self.done = termination != Termination::None;
        Ok(Transition { observation: obs, reward, done: self.done, termination })
    }

    fn observe(&self, scan: &LidarScan<T>, hat: T) -> Result<Observation<T>, EnvError> {
        let radalt = if hat > T::zero() {
            radalt_scan(self.grid, &self.state, scan.max_range)?.distances
        } else {
            [T::zero(); 3]
        };
        let d = &self.cfg.dynamics;
        let s = &self.state;
        let five = real::<T>(5.0);
        let scalars = [
            s.roll / T::PI(),
            s.pitch / T::FRAC_PI_2(),
            s.p / d.p_max,
            s.q / d.q_max,
            s.r,
            s.airspeed / d.v0,
            (hat / real::<T>(1000.0)).max(T::zero()).min(five),
            radalt[0] / scan.max_range,
            radalt[1] / scan.max_range,
            radalt[2] / scan.max_range,
            self.prev_action.aileron,
            self.prev_action.elevator,
        ];
        Ok(Observation {
            rows: scan.rows,
            cols: scan.cols,
            image: scan.image.clone(),
            scalars,
        })
    }

    // Sensing queries must stay inside the grid extent; the aircraft slides
    // along the boundary if an episode reaches it.
    fn clamp_into_extent(&self, position: &mut [T; 3]) {
        let (x0, y0, x1, y1) = self.grid.extent();
        let margin = self.grid.cell_size() * real::<T>(1e-3);
        position[0] = position[0].max(x0 + margin).min(x1 - margin);
        position[1] = position[1].max(y0 + margin).min(y1 - margin);
    }
}

pub const TRACE_HEADER: &str = "step,t,x,y,alt,hat,phi,theta,psi,p,q,r,n,aileron,elevator,reward_total,reward_level,reward_avoid,reward_smooth,gated,done";

/// One per-step row of the episode trace CSV.
pub fn trace_row<T: Real>(
    step: usize,
    dt: T,
    state: &AircraftState<T>,
    hat: T,
    action: ControlAction<T>,
    reward: &RewardBreakdown<T>,
    done: bool,
) -> String {
    let f = |v: T| format!("{:.6}", v.to_f64().unwrap());
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        step,
        f(dt * real(step as f64)),
        f(state.position[0]),
        f(state.position[1]),
        f(state.position[2]),
        f(hat),
        f(state.roll),
        f(state.pitch),
        f(state.heading),
        f(state.p),
        f(state.q),
        f(state.r),
        f(state.load_factor),
        f(action.aileron),
        f(action.elevator),
        f(reward.total),
        f(reward.level),
        f(reward.avoidance),
        f(reward.smoothness),
        if reward.gated { 1 } else { 0 },
        if done { 1 } else { 0 },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::{generate_terrain, TerrainKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat(size: usize) -> TerrainGrid<f64> {
        generate_terrain(TerrainKind::Flat, size, 30.0, 0.0, 0).unwrap()
    }

    fn small_lidar() -> LidarConfig<f64> {
        LidarConfig::square(4)
    }

    fn ic(grid: &TerrainGrid<f64>, hat: f64, pitch_deg: f64) -> InitialCondition<f64> {
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

    fn synthetic_scan(min_distance: f64, any_hit: bool, max_range: f64) -> LidarScan<f64> {
        let d = if any_hit { min_distance } else { max_range };
        LidarScan {
            rows: 1,
            cols: 1,
            distances: vec![d],
            image: vec![d / max_range],
            min_distance: d,
            any_hit,
            max_range,
        }
    }

    #[test]
    fn reset_level_high_observation() {
        let grid = flat(64);
        let mut env = Environment::new(
            &grid,
            EnvConfig { lidar: LidarConfig::square(16), ..EnvConfig::default() },
        );
        let obs = env.reset(&ic(&grid, 3000.0, 0.0)).unwrap();
        assert!(obs.image.iter().all(|&p| p == 1.0));
        let expect = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 3.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        for (i, (&got, &want)) in obs.scalars.iter().zip(&expect).enumerate() {
            assert!((got - want).abs() < 1e-9, "scalar {i}: {got} vs {want}");
        }
    }

    #[test]
    fn reset_dive_detects_threat() {
        let grid = flat(256);
        let mut env =
            Environment::new(&grid, EnvConfig { lidar: small_lidar(), ..EnvConfig::default() });
        let obs = env.reset(&ic(&grid, 900.0, -30.0)).unwrap();
        assert!(obs.image.iter().any(|&p| p < 1.0));
    }

    #[test]
    fn reset_below_terrain_rejected() {
        let grid = flat(64);
        let mut env = Environment::new(&grid, EnvConfig::default());
        assert!(matches!(
            env.reset(&ic(&grid, -5.0, 0.0)),
            Err(EnvError::InitialConditionBelowTerrain)
        ));
    }

    #[test]
    fn nominal_step() {
        let grid = flat(64);
        let mut env =
            Environment::new(&grid, EnvConfig { lidar: small_lidar(), ..EnvConfig::default() });
        env.reset(&ic(&grid, 5000.0, 0.0)).unwrap();
        let t = env.step(ControlAction::default()).unwrap();
        assert!(!t.done);
        assert_eq!(t.termination, Termination::None);
        assert_eq!(t.reward.sparse, 0.0);
        assert!(t.reward.level > 0.0);
    }

    #[test]
    fn collision_terminates_with_single_penalty() {
        let grid = flat(256);
        let mut env =
            Environment::new(&grid, EnvConfig { lidar: small_lidar(), ..EnvConfig::default() });
        env.reset(&ic(&grid, 100.0, -45.0)).unwrap();
        let mut penalties = 0.0;
        let mut terminal = Termination::None;
        for _ in 0..200 {
            let t = env.step(ControlAction::default()).unwrap();
            penalties += t.reward.sparse;
            if t.done {
                terminal = t.termination;
                break;
            }
        }
        assert_eq!(terminal, Termination::Collision);
        assert_eq!(penalties, -250.0);
        assert!(matches!(env.step(ControlAction::default()), Err(EnvError::EpisodeFinished)));
    }

    #[test]
    fn negative_g_terminates() {
        let grid = flat(64);
        let mut env =
            Environment::new(&grid, EnvConfig { lidar: small_lidar(), ..EnvConfig::default() });
        env.reset(&ic(&grid, 8000.0, 0.0)).unwrap();
        let mut terminal = Termination::None;
        let mut sparse_sum = 0.0;
        for _ in 0..100 {
            let t = env.step(ControlAction::new(0.0, -1.0)).unwrap();
            sparse_sum += t.reward.sparse;
            if t.done {
                terminal = t.termination;
                break;
            }
        }
        assert_eq!(terminal, Termination::NegativeG);
        assert_eq!(sparse_sum, -250.0);
    }

    #[test]
    fn perfect_episode_budget() {
        let grid = flat(512);
        let (cx, _) = grid.center();
        let mut env =
            Environment::new(&grid, EnvConfig { lidar: small_lidar(), ..EnvConfig::default() });
        let start = InitialCondition {
            position: [cx, 2000.0, 5000.0],
            roll_deg: 0.0,
            pitch_deg: 0.0,
            heading_deg: 0.0,
            airspeed: 200.0,
            predicted_impact: 0.0,
        };
        env.reset(&start).unwrap();
        let mut total = 0.0;
        let mut steps = 0;
        loop {
            let t = env.step(ControlAction::default()).unwrap();
            total += t.reward.total;
            steps += 1;
            if t.done {
                assert_eq!(t.termination, Termination::Timeout);
                break;
            }
        }
        assert_eq!(steps, 600);
        assert!((total - 250.0).abs() <= 0.5, "total = {total}");
    }

    #[test]
    fn level_term_maxima() {
        let cfg = RewardConfig::<f64>::default();
        let scan = synthetic_scan(0.0, false, 2000.0);
        let state = AircraftState::level([0.0, 0.0, 5000.0], 0.0, 200.0);
        let r = compute_reward(
            &scan,
            &scan,
            &state,
            ControlAction::default(),
            ControlAction::default(),
            &cfg,
            false,
            false,
        );
        assert!((r.level - cfg.level_max()).abs() < 1e-12);
        assert_eq!(r.avoidance, 0.0);
        assert_eq!(r.smoothness, 0.0);
        assert!(!r.gated);
    }

    #[test]
    fn shrinking_distance_negative_avoidance_and_gating() {
        let cfg = RewardConfig::<f64>::default();
        let prev = synthetic_scan(800.0, true, 2000.0);
        let now = synthetic_scan(500.0, true, 2000.0);
        let state = AircraftState::level([0.0, 0.0, 500.0], 0.0, 200.0);
        let r = compute_reward(
            &prev,
            &now,
            &state,
            ControlAction::default(),
            ControlAction::default(),
            &cfg,
            false,
            false,
        );
        assert!(r.gated);
        assert_eq!(r.level, 0.0);
        assert!(r.avoidance < 0.0);
    }

    #[test]
    fn avoidance_telescopes_over_threat_interval() {
        let cfg = RewardConfig::<f64>::default();
        let state = AircraftState::level([0.0, 0.0, 500.0], 0.0, 200.0);
        // Enter at severity a, wander, exit at severity b.
        let seq = [0.0, 0.3, 0.7, 0.55, 0.2, 0.0];
        let mut sum = 0.0;
        for w in seq.windows(2) {
            let prev = synthetic_scan(2000.0 * (1.0 - w[0]), w[0] > 0.0, 2000.0);
            let now = synthetic_scan(2000.0 * (1.0 - w[1]), w[1] > 0.0, 2000.0);
            let r = compute_reward(
                &prev,
                &now,
                &state,
                ControlAction::default(),
                ControlAction::default(),
                &cfg,
                false,
                false,
            );
            sum += r.avoidance;
        }
        let expected = cfg.avoidance_scale * (0.0f64.powi(2) - 0.0f64.powi(2));
        assert!((sum - expected).abs() < 1e-9, "telescoped sum {sum}");
    }

    #[test]
    fn gating_property_randomized() {
        let cfg = RewardConfig::<f64>::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let max_range = rng.gen_range(500.0..4000.0);
            let hit_prev = rng.gen_bool(0.5);
            let hit_now = rng.gen_bool(0.5);
            let prev = synthetic_scan(rng.gen_range(0.0..max_range), hit_prev, max_range);
            let now = synthetic_scan(rng.gen_range(0.0..max_range), hit_now, max_range);
            let mut state = AircraftState::level([0.0, 0.0, 500.0], 0.0, 200.0);
            state.roll = rng.gen_range(-3.0..3.0);
            state.pitch = rng.gen_range(-1.5..1.5);
            let a = ControlAction::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let pa = ControlAction::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let r = compute_reward(&prev, &now, &state, a, pa, &cfg, false, false);
            if r.gated {
                assert_eq!(r.level, 0.0);
            }
            if !hit_prev && !hit_now {
                assert_eq!(r.avoidance, 0.0);
            }
            assert!(r.smoothness <= 0.0);
            assert_eq!(r.total, r.level + r.avoidance + r.smoothness + r.sparse);
        }
    }

    #[test]
    fn termination_priority() {
        let cfg = RewardConfig::<f64>::default();
        assert_eq!(check_termination(-0.1, 1.0, 10, &cfg), Termination::Collision);
        assert_eq!(check_termination(-0.1, -3.0, 10, &cfg), Termination::Collision);
        assert_eq!(check_termination(100.0, -2.5, 10, &cfg), Termination::NegativeG);
        assert_eq!(check_termination(100.0, 1.0, 600, &cfg), Termination::Timeout);
        assert_eq!(check_termination(100.0, 1.0, 10, &cfg), Termination::None);
    }

    #[test]
    fn observation_scalars_stay_normalized() {
        let grid = flat(128);
        let mut env =
            Environment::new(&grid, EnvConfig { lidar: small_lidar(), ..EnvConfig::default() });
        env.reset(&ic(&grid, 1500.0, -10.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let a = ControlAction::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let t = match env.step(a) {
                Ok(t) => t,
                Err(EnvError::EpisodeFinished) => break,
                Err(e) => panic!("{e}"),
            };
            let s = t.observation.scalars;
            assert!(s[0].abs() <= 1.0 && s[1].abs() <= 1.0);
            assert!(s[2].abs() <= 1.0 + 1e-9 && s[3].abs() <= 1.0 + 1e-9);
            assert!(s[6] >= 0.0 && s[6] <= 5.0);
            for v in &s[7..10] {
                assert!(*v >= 0.0 && *v <= 1.0 + 1e-9);
            }
            assert!(s.iter().all(|v| v.is_finite()));
            if t.done {
                break;
            }
        }
    }

    #[test]
    fn trace_row_schema() {
        let state = AircraftState::<f64>::level([1.0, 2.0, 3.0], 0.0, 200.0);
        let reward = RewardBreakdown {
            level: 0.1,
            avoidance: 0.0,
            smoothness: 0.0,
            sparse: 0.0,
            gated: false,
            total: 0.1,
        };
        let row = trace_row(3, 0.05, &state, 100.0, ControlAction::default(), &reward, false);
        assert_eq!(row.split(',').count(), TRACE_HEADER.split(',').count());
    }
}
