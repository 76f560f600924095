//! Initial-condition generator: sweeps heading and attitude over a search
//! area and keeps poses whose straight-line predicted impact distance falls
//! inside the training band.

use thiserror::Error;

use crate::scalar::{real, Real};
use crate::terrain::{TerrainError, TerrainGrid};

#[derive(Debug, Error, PartialEq)]
pub enum IcgError {
    #[error("search area lies outside the terrain extent")]
    AreaOutOfBounds,
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error("malformed initial-condition file: {0}")]
    MalformedFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T: Real> {
    pub x0: T,
    pub y0: T,
    pub x1: T,
    pub y1: T,
}

impl<T: Real> Rect<T> {
    pub fn center(&self) -> (T, T) {
        let half = real::<T>(0.5);
        ((self.x0 + self.x1) * half, (self.y0 + self.y1) * half)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcgConfig<T: Real> {
    pub area: Rect<T>,
    /// Roll sweep from `roll_max` down to `roll_min`, degrees.
    pub roll_max: T,
    pub roll_min: T,
    pub pitch_max: T,
    pub pitch_min: T,
    pub attitude_step: T,
    pub heading_step: T,
    pub collision_min: T,
    pub collision_max: T,
    pub start_hat_candidates: Vec<T>,
    pub airspeed: T,
}

impl<T: Real> IcgConfig<T> {
    /// Defaults with the search area centered on the grid.
    pub fn for_grid(grid: &TerrainGrid<T>) -> Self {
        let (cx, cy) = grid.center();
        let half = grid.cell_size();
        IcgConfig {
            area: Rect { x0: cx - half, y0: cy - half, x1: cx + half, y1: cy + half },
            roll_max: T::zero(),
            roll_min: real(-90.0),
            pitch_max: T::zero(),
            pitch_min: real(-90.0),
            attitude_step: real(6.0),
            heading_step: real(1.0),
            collision_min: real(750.0),
            collision_max: real(2000.0),
            start_hat_candidates: vec![real(300.0), real(600.0), real(900.0), real(1200.0)],
            airspeed: real(200.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCondition<T: Real> {
    pub position: [T; 3],
    pub roll_deg: T,
    pub pitch_deg: T,
    pub heading_deg: T,
    pub airspeed: T,
    pub predicted_impact: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcgResult<T: Real> {
    pub conditions: Vec<InitialCondition<T>>,
    /// Number of candidate poses examined by the sweep.
    pub candidates: usize,
}

/// Straight-line impact distance along the velocity ray implied by
/// (pitch, heading); roll does not alter the instantaneous velocity.
pub fn predict_collision_distance<T: Real>(
    grid: &TerrainGrid<T>,
    position: [T; 3],
    pitch_deg: T,
    heading_deg: T,
    max_range: T,
) -> Result<Option<T>, TerrainError> {
    let pitch = pitch_deg.to_radians();
    let heading = heading_deg.to_radians();
    let dir = [pitch.cos() * heading.sin(), pitch.cos() * heading.cos(), pitch.sin()];
    let step = grid.cell_size() * real::<T>(0.5);
    let los = grid.line_of_sight(position, dir, max_range, step)?;
    Ok(if los.hit { Some(los.distance) } else { None })
}

fn sweep_down<T: Real>(hi: T, lo: T, step: T) -> Vec<T> {
    let mut values = Vec::new();
    let eps = real::<T>(1e-9);
    let mut v = hi;
    while v >= lo - eps {
        values.push(v);
        v = v - step;
    }
    values
}

/// Nested sweep (heading-major, then pitch, then roll, then start HaT) at
/// the area center, keeping poses whose predicted impact lies in the band.
pub fn generate_initial_conditions<T: Real>(
    grid: &TerrainGrid<T>,
    cfg: &IcgConfig<T>,
) -> Result<IcgResult<T>, IcgError> {
    let (cx, cy) = cfg.area.center();
    if !grid.contains(cfg.area.x0, cfg.area.y0) || !grid.contains(cfg.area.x1, cfg.area.y1) {
        return Err(IcgError::AreaOutOfBounds);
    }
    let ground = grid.elevation_at(cx, cy)?;

    let rolls = sweep_down(cfg.roll_max, cfg.roll_min, cfg.attitude_step);
    let pitches = sweep_down(cfg.pitch_max, cfg.pitch_min, cfg.attitude_step);
    let mut headings = Vec::new();
    let mut h = T::zero();
    while h < real::<T>(360.0) - real::<T>(1e-9) {
        headings.push(h);
        h = h + cfg.heading_step;
    }
    let hats = &cfg.start_hat_candidates;
    let candidates = headings.len() * pitches.len() * rolls.len() * hats.len();

    let mut conditions = Vec::new();
    for &heading in &headings {
        for &pitch in &pitches {
            // The prediction ignores roll, so compute it once per start HaT.
            let mut impacts = Vec::with_capacity(hats.len());
            for &hat in hats {
                let position = [cx, cy, ground + hat];
                impacts.push(predict_collision_distance(
                    grid,
                    position,
                    pitch,
                    heading,
                    cfg.collision_max,
                )?);
            }
            for &roll in &rolls {
                for (hat_idx, &hat) in hats.iter().enumerate() {
                    if let Some(d) = impacts[hat_idx] {
                        if d >= cfg.collision_min && d <= cfg.collision_max {
                            conditions.push(InitialCondition {
                                position: [cx, cy, ground + hat],
                                roll_deg: roll,
                                pitch_deg: pitch,
                                heading_deg: heading,
                                airspeed: cfg.airspeed,
                                predicted_impact: d,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(IcgResult { conditions, candidates })
}

pub const IC_CSV_HEADER: &str = "x,y,alt,roll_deg,pitch_deg,heading_deg,airspeed,predicted_impact_m";

pub fn write_ic_csv<T: Real>(conditions: &[InitialCondition<T>]) -> String {
    let mut out = String::from(IC_CSV_HEADER);
    out.push('\n');
    for ic in conditions {
        out.push_str(&format!(
            "{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}\n",
            ic.position[0].to_f64().unwrap(),
            ic.position[1].to_f64().unwrap(),
            ic.position[2].to_f64().unwrap(),
            ic.roll_deg.to_f64().unwrap(),
            ic.pitch_deg.to_f64().unwrap(),
            ic.heading_deg.to_f64().unwrap(),
            ic.airspeed.to_f64().unwrap(),
            ic.predicted_impact.to_f64().unwrap(),
        ));
    }
    out
}

pub fn read_ic_csv<T: Real>(text: &str) -> Result<Vec<InitialCondition<T>>, IcgError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == IC_CSV_HEADER => {}
        other => {
            return Err(IcgError::MalformedFile(format!(
                "bad header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| IcgError::MalformedFile(format!("line {}: {e}", i + 2)))?;
        if fields.len() != 8 {
            return Err(IcgError::MalformedFile(format!(
                "line {}: expected 8 fields, got {}",
                i + 2,
                fields.len()
            )));
        }
        out.push(InitialCondition {
            position: [real(fields[0]), real(fields[1]), real(fields[2])],
            roll_deg: real(fields[3]),
            pitch_deg: real(fields[4]),
            heading_deg: real(fields[5]),
            airspeed: real(fields[6]),
            predicted_impact: real(fields[7]),
        });
    }
    Ok(out)
}
