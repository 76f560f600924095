//! Run-configuration file: one JSON document with optional per-module
//! sections. Unknown keys are rejected so typos fail loudly instead of
//! silently falling back to defaults.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use agcas_core::agent::{FeatureNet, SacConfig};
use agcas_core::env::{EnvConfig, RewardConfig};
use agcas_core::hyperopt::{Dimension, SearchSpace};
use agcas_core::icg::IcgConfig;
use agcas_core::sensing::LidarConfig;
use agcas_core::terrain::{generate_terrain, TerrainGrid, TerrainKind};
use agcas_core::DynamicsConfig;

pub const RUN_CONFIG_VERSION: u64 = 1;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u64,
    #[serde(default)]
    pub terrain: TerrainSection,
    #[serde(default)]
    pub lidar: LidarSection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub reward: RewardSection,
    #[serde(default)]
    pub icg: IcgSection,
    #[serde(default)]
    pub sac: SacSection,
    #[serde(default)]
    pub hyperopt: HyperoptSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("invalid run config")?;
        if cfg.version != RUN_CONFIG_VERSION {
            bail!("unsupported run config version {}", cfg.version);
        }
        Ok(cfg)
    }

    pub fn env_config(&self) -> EnvConfig<f64> {
        EnvConfig {
            dynamics: self.dynamics.to_config(),
            lidar: self.lidar.to_config(),
            reward: self.reward.to_config(),
            pitch_only: self.sac.pitch_only.unwrap_or(false),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainSection {
    pub kind: Option<String>,
    pub size: Option<usize>,
    pub cell: Option<f64>,
    pub amplitude: Option<f64>,
    pub seed: Option<u64>,
}

impl TerrainSection {
    pub fn generate(&self) -> Result<TerrainGrid<f64>> {
        let kind: TerrainKind = self
            .kind
            .as_deref()
            .unwrap_or("ridge")
            .parse()
            .map_err(|e: String| anyhow::anyhow!(e))?;
        generate_terrain(
            kind,
            self.size.unwrap_or(64),
            self.cell.unwrap_or(30.0),
            self.amplitude.unwrap_or(500.0),
            self.seed.unwrap_or(0),
        )
        .context("terrain generation failed")
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LidarSection {
    pub k: Option<usize>,
    pub detection_period: Option<f64>,
    pub min_range: Option<f64>,
    pub max_range_cap: Option<f64>,
}

impl LidarSection {
    pub fn to_config(&self) -> LidarConfig<f64> {
        let mut cfg = LidarConfig::square(self.k.unwrap_or(16));
        if let Some(v) = self.detection_period {
            cfg.detection_period = v;
        }
        if let Some(v) = self.min_range {
            cfg.min_range = v;
        }
        if let Some(v) = self.max_range_cap {
            cfg.max_range_cap = v;
        }
        cfg
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub dt: Option<f64>,
    pub v0: Option<f64>,
    pub p_max: Option<f64>,
    pub q_max: Option<f64>,
    pub tau_p: Option<f64>,
    pub tau_q: Option<f64>,
}

impl DynamicsSection {
    pub fn to_config(&self) -> DynamicsConfig {
        let mut cfg = DynamicsConfig::default();
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.v0 {
            cfg.v0 = v;
        }
        if let Some(v) = self.p_max {
            cfg.p_max = v;
        }
        if let Some(v) = self.q_max {
            cfg.q_max = v;
        }
        if let Some(v) = self.tau_p {
            cfg.tau_p = v;
        }
        if let Some(v) = self.tau_q {
            cfg.tau_q = v;
        }
        cfg
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSection {
    pub episode_max_steps: Option<usize>,
    pub collision_penalty: Option<f64>,
    pub negg_penalty: Option<f64>,
    pub negg_floor: Option<f64>,
    pub total_positive_budget: Option<f64>,
    pub smoothness_weight: Option<f64>,
    pub avoidance_scale: Option<f64>,
}

impl RewardSection {
    pub fn to_config(&self) -> RewardConfig<f64> {
        let mut cfg = RewardConfig::default();
        if let Some(v) = self.episode_max_steps {
            cfg.episode_max_steps = v;
        }
        if let Some(v) = self.collision_penalty {
            cfg.collision_penalty = v;
        }
        if let Some(v) = self.negg_penalty {
            cfg.negg_penalty = v;
        }
        if let Some(v) = self.negg_floor {
            cfg.negg_floor = v;
        }
        if let Some(v) = self.total_positive_budget {
            cfg.total_positive_budget = v;
        }
        if let Some(v) = self.smoothness_weight {
            cfg.smoothness_weight = v;
        }
        if let Some(v) = self.avoidance_scale {
            cfg.avoidance_scale = v;
        }
        cfg
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcgSection {
    pub attitude_step: Option<f64>,
    pub heading_step: Option<f64>,
    pub collision_min: Option<f64>,
    pub collision_max: Option<f64>,
    pub airspeed: Option<f64>,
    pub start_hats: Option<Vec<f64>>,
    pub roll_min: Option<f64>,
    pub pitch_min: Option<f64>,
}

impl IcgSection {
    pub fn to_config(&self, grid: &TerrainGrid<f64>) -> IcgConfig<f64> {
        let mut cfg = IcgConfig::for_grid(grid);
        if let Some(v) = self.attitude_step {
            cfg.attitude_step = v;
        }
        if let Some(v) = self.heading_step {
            cfg.heading_step = v;
        }
        if let Some(v) = self.collision_min {
            cfg.collision_min = v;
        }
        if let Some(v) = self.collision_max {
            cfg.collision_max = v;
        }
        if let Some(v) = self.airspeed {
            cfg.airspeed = v;
        }
        if let Some(v) = &self.start_hats {
            cfg.start_hat_candidates = v.clone();
        }
        if let Some(v) = self.roll_min {
            cfg.roll_min = v;
        }
        if let Some(v) = self.pitch_min {
            cfg.pitch_min = v;
        }
        cfg
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SacSection {
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    pub lr: Option<f64>,
    pub batch_size: Option<usize>,
    pub buffer_capacity: Option<usize>,
    pub warmup_steps: Option<usize>,
    pub target_entropy: Option<f64>,
    pub updates_per_env_step: Option<usize>,
    /// "cnn" (default) or "dense".
    pub feature: Option<String>,
    pub hidden: Option<usize>,
    pub pitch_only: Option<bool>,
}

impl SacSection {
    pub fn to_config(&self, seed: u64) -> SacConfig {
        let mut cfg = SacConfig { seed, ..SacConfig::default() };
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.lr {
            cfg.lr = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.buffer_capacity {
            cfg.buffer_capacity = v;
        }
        if let Some(v) = self.warmup_steps {
            cfg.warmup_steps = v;
        }
        if let Some(v) = self.target_entropy {
            cfg.target_entropy = v;
        }
        if let Some(v) = self.updates_per_env_step {
            cfg.updates_per_env_step = v;
        }
        cfg
    }

    pub fn feature_net(&self) -> Result<FeatureNet> {
        match self.feature.as_deref().unwrap_or("cnn") {
            "cnn" => Ok(FeatureNet::Cnn),
            "dense" => Ok(FeatureNet::Dense { hidden: self.hidden.unwrap_or(64) }),
            other => bail!("unknown feature net '{other}' (expected cnn or dense)"),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperoptSection {
    pub seed: Option<u64>,
    /// Evaluation checkpoints in env steps; the last is the trial length.
    pub checkpoints: Option<Vec<usize>>,
    pub eval_episodes: Option<usize>,
    /// Overrides of the default search space, each as [lo, hi].
    pub lr_range: Option<[f64; 2]>,
    pub gamma_range: Option<[f64; 2]>,
    pub tau_range: Option<[f64; 2]>,
    pub batch_choices: Option<Vec<f64>>,
}

impl HyperoptSection {
    pub fn search_space(&self) -> SearchSpace {
        let [lr_lo, lr_hi] = self.lr_range.unwrap_or([1e-5, 1e-3]);
        let [g_lo, g_hi] = self.gamma_range.unwrap_or([0.95, 0.999]);
        let [t_lo, t_hi] = self.tau_range.unwrap_or([1e-3, 5e-2]);
        let batch = self.batch_choices.clone().unwrap_or(vec![64.0, 128.0, 256.0]);
        SearchSpace {
            dims: vec![
                ("lr".into(), Dimension::LogUniform { lo: lr_lo, hi: lr_hi }),
                ("gamma".into(), Dimension::Uniform { lo: g_lo, hi: g_hi }),
                ("tau".into(), Dimension::LogUniform { lo: t_lo, hi: t_hi }),
                ("batch".into(), Dimension::Categorical(batch)),
            ],
        }
    }

    pub fn checkpoints(&self) -> Vec<usize> {
        self.checkpoints.clone().unwrap_or(vec![1000, 2000])
    }

    pub fn eval_episodes(&self) -> usize {
        self.eval_episodes.unwrap_or(10)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = RunConfig::parse(r#"{"version": 1}"#).unwrap();
        let env = cfg.env_config();
        assert_eq!(env.lidar.rows, 16);
        assert_eq!(env.reward.episode_max_steps, 600);
        assert!(!env.pitch_only);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse(r#"{"version": 1, "terain": {}}"#).is_err());
        assert!(RunConfig::parse(r#"{"version": 1, "sac": {"learning_rate": 0.1}}"#).is_err());
    }

    #[test]
    fn version_required() {
        assert!(RunConfig::parse(r#"{}"#).is_err());
        assert!(RunConfig::parse(r#"{"version": 2}"#).is_err());
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::parse(
            r#"{"version": 1,
                "lidar": {"k": 4},
                "sac": {"feature": "dense", "hidden": 32, "pitch_only": true},
                "reward": {"episode_max_steps": 100}}"#,
        )
        .unwrap();
        let env = cfg.env_config();
        assert_eq!(env.lidar.rows, 4);
        assert!(env.pitch_only);
        assert_eq!(env.reward.episode_max_steps, 100);
        assert_eq!(cfg.sac.feature_net().unwrap(), FeatureNet::Dense { hidden: 32 });
    }
}
