//! Pseudo-LiDAR ray-fan construction against the terrain server, grayscale
//! depth-image encoding (near = black, far = white), RADALT downward probes
//! and the detection-horizon threat test.
//!
//! The fan's detection range scales with airspeed: range = V * detection
//! period, clamped to [min_range, max_range_cap].

use thiserror::Error;

use crate::dynamics::AircraftState;
use crate::scalar::{real, Real};
use crate::terrain::{TerrainError, TerrainGrid};

#[derive(Debug, Error, PartialEq)]
pub enum SensingError {
    #[error("ray index ({0}, {1}) outside the configured fan")]
    IndexOutOfRange(usize, usize),
    #[error(transparent)]
    Terrain(#[from] TerrainError),
}

/// Fan geometry and detection horizon. `rows`/`cols` may differ (the legacy
/// 3x5 configuration); square fans use [`LidarConfig::square`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarConfig<T: Real> {
    pub rows: usize,
    pub cols: usize,
    /// Angular gap between fan rows, degrees.
    pub vertical_spacing: T,
    /// Angular gap between fan columns, degrees.
    pub horizontal_spacing: T,
    /// Depression of the top row below the body x-axis, degrees.
    pub boresight_depression: T,
    /// Detection horizon, seconds of flight at current airspeed.
    pub detection_period: T,
    pub min_range: T,
    pub max_range_cap: T,
}

impl<T: Real> Default for LidarConfig<T> {
    fn default() -> Self {
        LidarConfig::square(16)
    }
}

impl<T: Real> LidarConfig<T> {
    pub fn square(k: usize) -> Self {
        LidarConfig {
            rows: k,
            cols: k,
            vertical_spacing: real(1.5),
            horizontal_spacing: real(3.0),
            boresight_depression: real(0.0),
            detection_period: real(10.0),
            min_range: real(50.0),
            max_range_cap: real(6000.0),
        }
    }

    pub fn max_range(&self, airspeed: T) -> T {
        (airspeed * self.detection_period).max(self.min_range).min(self.max_range_cap)
    }
}

/// One fan sweep: slant distances (max_range where no hit) and the
/// normalized depth image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan<T: Real> {
    pub rows: usize,
    pub cols: usize,
    pub distances: Vec<T>,
    pub image: Vec<T>,
    pub min_distance: T,
    pub any_hit: bool,
    pub max_range: T,
}

impl<T: Real> LidarScan<T> {
    pub fn pixel(&self, row: usize, col: usize) -> T {
        self.image[row * self.cols + col]
    }

    pub fn distance(&self, row: usize, col: usize) -> T {
        self.distances[row * self.cols + col]
    }
}

/// Fore-slant, nadir and aft-slant probes beneath the aircraft.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadaltReading<T: Real> {
    /// Slant distances; no-hit encoded as `max_range`.
    pub distances: [T; 3],
    /// Fixed probe elevations in body frame, degrees.
    pub elevations: [T; 3],
}

pub const RADALT_ELEVATIONS_DEG: [f64; 3] = [-75.0, -90.0, -105.0];

/// Body-frame unit direction for fan element (`row`, `col`). Row 0 is the
/// highest row; rows arc downward by the constant vertical spacing.
pub fn build_ray_direction<T: Real>(
    cfg: &LidarConfig<T>,
    row: usize,
    col: usize,
) -> Result<[T; 3], SensingError> {
    if row >= cfg.rows || col >= cfg.cols {
        return Err(SensingError::IndexOutOfRange(row, col));
    }
    let azimuth = (real::<T>(col as f64) - real::<T>((cfg.cols - 1) as f64 / 2.0))
        * cfg.horizontal_spacing.to_radians();
    let elevation =
        -(cfg.boresight_depression + real::<T>(row as f64) * cfg.vertical_spacing).to_radians();
    Ok(body_direction(elevation, azimuth))
}

/// Body-frame (x forward, y right, z down) unit vector at the given
/// elevation (positive up) and azimuth (positive right).
fn body_direction<T: Real>(elevation: T, azimuth: T) -> [T; 3] {
    [elevation.cos() * azimuth.cos(), elevation.cos() * azimuth.sin(), -elevation.sin()]
}

/// Sweeps the fan against the terrain from the aircraft's pose.
pub fn lidar_scan<T: Real>(
    grid: &TerrainGrid<T>,
    state: &AircraftState<T>,
    cfg: &LidarConfig<T>,
) -> Result<LidarScan<T>, SensingError> {
    let max_range = cfg.max_range(state.airspeed);
    let step = grid.cell_size() * real::<T>(0.5);
    let n = cfg.rows * cfg.cols;
    let mut distances = Vec::with_capacity(n);
    let mut image = Vec::with_capacity(n);
    let mut min_distance = max_range;
    let mut any_hit = false;
    for row in 0..cfg.rows {
        for col in 0..cfg.cols {
            let body = build_ray_direction(cfg, row, col)?;
            let world = state.body_to_world(body);
            let los = grid.line_of_sight(state.position, world, max_range, step)?;
            let d = if los.hit { los.distance } else { max_range };
            if los.hit {
                any_hit = true;
                if d < min_distance {
                    min_distance = d;
                }
            }
            distances.push(d);
            image.push(d.min(max_range) / max_range);
        }
    }
    Ok(LidarScan { rows: cfg.rows, cols: cfg.cols, distances, image, min_distance, any_hit, max_range })
}

/// Three slant probes in the body x-z plane at -75/-90/-105 degrees.
pub fn radalt_scan<T: Real>(
    grid: &TerrainGrid<T>,
    state: &AircraftState<T>,
    max_range: T,
) -> Result<RadaltReading<T>, SensingError> {
    let step = grid.cell_size() * real::<T>(0.5);
    let mut distances = [T::zero(); 3];
    let mut elevations = [T::zero(); 3];
    for (i, deg) in RADALT_ELEVATIONS_DEG.iter().enumerate() {
        let e = real::<T>(*deg);
        elevations[i] = e;
        let body = body_direction(e.to_radians(), T::zero());
        let world = state.body_to_world(body);
        let los = grid.line_of_sight(state.position, world, max_range, step)?;
        distances[i] = if los.hit { los.distance } else { max_range };
    }
    Ok(RadaltReading { distances, elevations })
}

/// A hit anywhere in the fan means terrain inside the detection horizon.
pub fn threat_detected<T: Real>(scan: &LidarScan<T>) -> bool {
    scan.any_hit
}

/// Renders the depth image as an ASCII PGM (P2, maxval 255).
pub fn render_pgm<T: Real>(scan: &LidarScan<T>) -> String {
    let mut out = format!("P2\n{} {}\n255\n", scan.cols, scan.rows);
    for row in 0..scan.rows {
        let line: Vec<String> = (0..scan.cols)
            .map(|col| {
                let v = (scan.pixel(row, col).to_f64().unwrap() * 255.0).round() as i64;
                v.clamp(0, 255).to_string()
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
