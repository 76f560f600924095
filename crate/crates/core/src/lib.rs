//! Desk-scale ground collision avoidance stack: terrain server with
//! line-of-sight queries, pseudo-LiDAR/RADALT sensing, a kinematic
//! fixed-wing model, a gated sequential reward, an initial-condition
//! generator and a CNN soft actor-critic agent.
//!
//! The geometry and network math is generic over the scalar type via
//! [`scalar::Real`]; the aliases below fix the default `f64` stack.

pub mod agent;
pub mod dynamics;
pub mod env;
pub mod hyperopt;
pub mod icg;
pub mod nn;
pub mod scalar;
pub mod sensing;
pub mod terrain;

pub use scalar::Real;

pub type TerrainGrid = terrain::TerrainGrid<f64>;
pub type LosResult = terrain::LosResult<f64>;
pub type LidarConfig = sensing::LidarConfig<f64>;
pub type LidarScan = sensing::LidarScan<f64>;
pub type RadaltReading = sensing::RadaltReading<f64>;
pub type AircraftState = dynamics::AircraftState<f64>;
pub type ControlAction = dynamics::ControlAction<f64>;
pub type DynamicsConfig = dynamics::DynamicsConfig<f64>;
pub type RewardConfig = env::RewardConfig<f64>;
pub type RewardBreakdown = env::RewardBreakdown<f64>;
pub type Observation = env::Observation<f64>;
pub type EnvConfig = env::EnvConfig<f64>;
pub type Environment<'a> = env::Environment<'a, f64>;
pub type IcgConfig = icg::IcgConfig<f64>;
pub type InitialCondition = icg::InitialCondition<f64>;
