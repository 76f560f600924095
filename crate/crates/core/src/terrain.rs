//! Elevation grid storage, ASCII-grid ingestion, synthetic terrain
//! generators, bilinear sampling and ray-marched line-of-sight queries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::{real, Real};

#[derive(Debug, Error, PartialEq)]
pub enum TerrainError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("row {row} has {got} values, expected {expected}")]
    RowLengthMismatch { row: usize, got: usize, expected: usize },
    #[error("non-finite elevation in row {0}")]
    NonFiniteElevation(usize),
    #[error("NODATA cell present at row {0}")]
    NoDataPresent(usize),
    #[error("grid size must be at least 2x2 with positive cell size")]
    InvalidSize,
    #[error("query point ({0}, {1}) outside grid extent")]
    OutOfBounds(f64, f64),
    #[error("ray origin is at or below the terrain surface")]
    OriginBelowTerrain,
    #[error("ray direction is not unit length")]
    NonUnitDirection,
}

/// Regular elevation heightfield. Row 0 is the northernmost row; nodes sit
/// on corners spaced `cell_size` apart with the lower-left node at
/// (`origin_x`, `origin_y`).
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainGrid<T: Real> {
    ncols: usize,
    nrows: usize,
    cell_size: T,
    origin_x: T,
    origin_y: T,
    elevations: Vec<T>,
}

/// Result of a line-of-sight query. `distance`, `point` and `hot` are only
/// meaningful when `hit` is true.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosResult<T: Real> {
    pub hit: bool,
    pub distance: T,
    pub point: [T; 3],
    /// Terrain elevation at the hit point (height-on-terrain).
    pub hot: T,
}

impl<T: Real> LosResult<T> {
    pub fn miss() -> Self {
        LosResult { hit: false, distance: T::zero(), point: [T::zero(); 3], hot: T::zero() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerrainKind {
    Flat,
    Ridge,
    Valley,
    Fractal,
}

impl std::str::FromStr for TerrainKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flat" => Ok(TerrainKind::Flat),
            "ridge" => Ok(TerrainKind::Ridge),
            "valley" => Ok(TerrainKind::Valley),
            "fractal" => Ok(TerrainKind::Fractal),
            other => Err(format!("unknown terrain kind '{other}'")),
        }
    }
}

impl<T: Real> TerrainGrid<T> {
    pub fn new(
        ncols: usize,
        nrows: usize,
        cell_size: T,
        origin_x: T,
        origin_y: T,
        elevations: Vec<T>,
    ) -> Result<Self, TerrainError> {
        if ncols < 2 || nrows < 2 || cell_size <= T::zero() {
            return Err(TerrainError::InvalidSize);
        }
        if elevations.len() != ncols * nrows {
            return Err(TerrainError::RowLengthMismatch {
                row: 0,
                got: elevations.len(),
                expected: ncols * nrows,
            });
        }
        if let Some(row) = elevations.iter().position(|e| !e.is_finite()) {
            return Err(TerrainError::NonFiniteElevation(row / ncols));
        }
        Ok(TerrainGrid { ncols, nrows, cell_size, origin_x, origin_y, elevations })
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn cell_size(&self) -> T {
        self.cell_size
    }

    pub fn origin(&self) -> (T, T) {
        (self.origin_x, self.origin_y)
    }

    pub fn elevations(&self) -> &[T] {
        &self.elevations
    }

    /// Elevation stored at node (`col`, `row`), row 0 northernmost.
    pub fn node(&self, col: usize, row: usize) -> T {
        self.elevations[row * self.ncols + col]
    }

    /// Planar extent covered by the node lattice: (x_min, y_min, x_max, y_max).
    pub fn extent(&self) -> (T, T, T, T) {
        let w = self.cell_size * real::<T>((self.ncols - 1) as f64);
        let h = self.cell_size * real::<T>((self.nrows - 1) as f64);
        (self.origin_x, self.origin_y, self.origin_x + w, self.origin_y + h)
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        let (x0, y0, x1, y1) = self.extent();
        x >= x0 && x <= x1 && y >= y0 && y <= y1
    }

    /// Center of the grid extent.
    pub fn center(&self) -> (T, T) {
        let (x0, y0, x1, y1) = self.extent();
        let half = real::<T>(0.5);
        ((x0 + x1) * half, (y0 + y1) * half)
    }

    /// Bilinear interpolation of the four node elevations surrounding (x, y).
    pub fn elevation_at(&self, x: T, y: T) -> Result<T, TerrainError> {
        if !self.contains(x, y) {
            return Err(TerrainError::OutOfBounds(
                x.to_f64().unwrap_or(f64::NAN),
                y.to_f64().unwrap_or(f64::NAN),
            ));
        }
        let fx = (x - self.origin_x) / self.cell_size;
        let fy = (y - self.origin_y) / self.cell_size;
        // Cell indices counted from the south-west corner; clamp so queries
        // exactly on the north/east boundary stay in the last cell.
        let ci = (fx.to_f64().unwrap().floor() as usize).min(self.ncols - 2);
        let sj = (fy.to_f64().unwrap().floor() as usize).min(self.nrows - 2);
        let tx = fx - real::<T>(ci as f64);
        let ty = fy - real::<T>(sj as f64);
        // Storage rows run north to south.
        let r_south = self.nrows - 1 - sj;
        let r_north = r_south - 1;
        let z00 = self.node(ci, r_south);
        let z10 = self.node(ci + 1, r_south);
        let z01 = self.node(ci, r_north);
        let z11 = self.node(ci + 1, r_north);
        let one = T::one();
        let south = z00 * (one - tx) + z10 * tx;
        let north = z01 * (one - tx) + z11 * tx;
        Ok(south * (one - ty) + north * ty)
    }

    /// Altitude above the interpolated terrain surface; negative means the
    /// position is underground.
    pub fn height_above_terrain(&self, position: [T; 3]) -> Result<T, TerrainError> {
        Ok(position[2] - self.elevation_at(position[0], position[1])?)
    }

    /// Marches the ray in `step` increments and refines the first crossing by
    /// bisection to 0.01*step. Rays that leave the grid extent report no hit.
    pub fn line_of_sight(
        &self,
        origin: [T; 3],
        direction: [T; 3],
        max_range: T,
        step: T,
    ) -> Result<LosResult<T>, TerrainError> {
        let norm = (direction[0] * direction[0]
            + direction[1] * direction[1]
            + direction[2] * direction[2])
            .sqrt();
        if (norm - T::one()).abs() > real::<T>(1e-9) {
            return Err(TerrainError::NonUnitDirection);
        }
        let start_elev = self.elevation_at(origin[0], origin[1])?;
        if origin[2] <= start_elev {
            return Err(TerrainError::OriginBelowTerrain);
        }

        let clearance = |t: T| -> Option<T> {
            let x = origin[0] + direction[0] * t;
            let y = origin[1] + direction[1] * t;
            let alt = origin[2] + direction[2] * t;
            self.elevation_at(x, y).ok().map(|e| alt - e)
        };

        let steps = (max_range / step).to_f64().unwrap().ceil() as usize;
        let mut t_prev = T::zero();
        for i in 1..=steps {
            let t = (step * real::<T>(i as f64)).min(max_range);
            let c = match clearance(t) {
                Some(c) => c,
                None => return Ok(LosResult::miss()),
            };
            if c <= T::zero() {
                // Bisect the crossing between the last clear sample and t.
                let tol = step * real::<T>(0.01);
                let mut lo = t_prev;
                let mut hi = t;
                while hi - lo > tol {
                    let mid = (lo + hi) * real::<T>(0.5);
                    match clearance(mid) {
                        Some(cm) if cm > T::zero() => lo = mid,
                        _ => hi = mid,
                    }
                }
                let d = hi;
                let point = [
                    origin[0] + direction[0] * d,
                    origin[1] + direction[1] * d,
                    origin[2] + direction[2] * d,
                ];
                let hot = self.elevation_at(point[0], point[1])?;
                return Ok(LosResult { hit: true, distance: d, point, hot });
            }
            t_prev = t;
        }
        Ok(LosResult::miss())
    }
}

/// Deterministic synthetic terrain. `ridge` is a Gaussian-profile east-west
/// ridge across the grid midline, `valley` its complement, `fractal` is
/// midpoint-displacement noise.
pub fn generate_terrain<T: Real>(
    kind: TerrainKind,
    size: usize,
    cell_size: T,
    amplitude: T,
    seed: u64,
) -> Result<TerrainGrid<T>, TerrainError> {
    if size < 2 || cell_size <= T::zero() {
        return Err(TerrainError::InvalidSize);
    }
    let n = size * size;
    let elevations: Vec<T> = match kind {
        TerrainKind::Flat => vec![T::zero(); n],
        TerrainKind::Ridge | TerrainKind::Valley => {
            let mid = (size - 1) as f64 / 2.0;
            let sigma = size as f64 * cell_size.to_f64().unwrap() / 8.0;
            let cell = cell_size.to_f64().unwrap();
            let mut out = Vec::with_capacity(n);
            for row in 0..size {
                let dy = (row as f64 - mid) * cell;
                let bump = (-dy * dy / (2.0 * sigma * sigma)).exp();
                let z = match kind {
                    TerrainKind::Ridge => bump,
                    _ => 1.0 - bump,
                };
                let z = amplitude * real::<T>(z);
                for _ in 0..size {
                    out.push(z);
                }
            }
            out
        }
        TerrainKind::Fractal => fractal_elevations(size, amplitude, seed),
    };
    TerrainGrid::new(size, size, cell_size, T::zero(), T::zero(), elevations)
}

/// Diamond-square on the smallest 2^k+1 lattice covering `size`, then
/// cropped. Displacement amplitude halves per refinement level.
fn fractal_elevations<T: Real>(size: usize, amplitude: T, seed: u64) -> Vec<T> {
    let mut n = 2usize;
    while n + 1 < size {
        n *= 2;
    }
    let dim = n + 1;
    let amp = amplitude.to_f64().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = vec![0.0f64; dim * dim];
    for corner in [0, n, n * dim, n * dim + n] {
        grid[corner] = rng.gen_range(0.0..=amp);
    }
    let mut scale = amp / 2.0;
    let mut step = n;
    while step > 1 {
        let half = step / 2;
        // Diamond pass.
        for r in (half..dim).step_by(step) {
            for c in (half..dim).step_by(step) {
                let avg = (grid[(r - half) * dim + (c - half)]
                    + grid[(r - half) * dim + (c + half)]
                    + grid[(r + half) * dim + (c - half)]
                    + grid[(r + half) * dim + (c + half)])
                    / 4.0;
                grid[r * dim + c] = avg + rng.gen_range(-scale..=scale);
            }
        }
        // Square pass.
        for r in (0..dim).step_by(half) {
            let c_start = if (r / half) % 2 == 0 { half } else { 0 };
            for c in (c_start..dim).step_by(step) {
                let mut sum = 0.0;
                let mut count = 0.0;
                if r >= half {
                    sum += grid[(r - half) * dim + c];
                    count += 1.0;
                }
                if r + half < dim {
                    sum += grid[(r + half) * dim + c];
                    count += 1.0;
                }
                if c >= half {
                    sum += grid[r * dim + (c - half)];
                    count += 1.0;
                }
                if c + half < dim {
                    sum += grid[r * dim + (c + half)];
                    count += 1.0;
                }
                grid[r * dim + c] = sum / count + rng.gen_range(-scale..=scale);
            }
        }
        scale /= 2.0;
        step = half;
    }
    let mut out = Vec::with_capacity(size * size);
    for r in 0..size {
        for c in 0..size {
            out.push(real::<T>(grid[r * dim + c].max(0.0)));
        }
    }
    out
}

/// Prints with up to 3 decimals, trailing zeros trimmed ("30", "12.5").
fn trim3(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Serializes to the ASCII-grid text format; elevations carry 3 decimals.
pub fn save_ascii_grid<T: Real>(grid: &TerrainGrid<T>) -> String {
    let mut out = String::new();
    out.push_str(&format!("ncols {}\n", grid.ncols));
    out.push_str(&format!("nrows {}\n", grid.nrows));
    out.push_str(&format!("xllcorner {}\n", trim3(grid.origin_x.to_f64().unwrap())));
    out.push_str(&format!("yllcorner {}\n", trim3(grid.origin_y.to_f64().unwrap())));
    out.push_str(&format!("cellsize {}\n", trim3(grid.cell_size.to_f64().unwrap())));
    for row in 0..grid.nrows {
        let line: Vec<String> = (0..grid.ncols)
            .map(|col| format!("{:.3}", grid.node(col, row).to_f64().unwrap()))
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn load_ascii_grid<T: Real>(text: &str) -> Result<TerrainGrid<T>, TerrainError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    let mut ncols: Option<usize> = None;
    let mut nrows: Option<usize> = None;
    let mut xll: Option<f64> = None;
    let mut yll: Option<f64> = None;
    let mut cellsize: Option<f64> = None;
    let mut nodata: Option<f64> = None;

    while let Some(line) = lines.peek() {
        let mut it = line.split_whitespace();
        let key = match it.next() {
            Some(k) => k.to_ascii_lowercase(),
            None => break,
        };
        if key.parse::<f64>().is_ok() || key == "nan" {
            break; // data section
        }
        let value = it
            .next()
            .ok_or_else(|| TerrainError::MalformedHeader(format!("missing value for '{key}'")))?;
        if it.next().is_some() {
            return Err(TerrainError::MalformedHeader(format!("trailing tokens after '{key}'")));
        }
        let dup = |prev: bool| {
            if prev {
                Err(TerrainError::MalformedHeader(format!("duplicate key '{key}'")))
            } else {
                Ok(())
            }
        };
        match key.as_str() {
            "ncols" => {
                dup(ncols.is_some())?;
                ncols = Some(value.parse().map_err(|_| {
                    TerrainError::MalformedHeader(format!("bad ncols '{value}'"))
                })?);
            }
            "nrows" => {
                dup(nrows.is_some())?;
                nrows = Some(value.parse().map_err(|_| {
                    TerrainError::MalformedHeader(format!("bad nrows '{value}'"))
                })?);
            }
            "xllcorner" => {
                dup(xll.is_some())?;
                xll = Some(value.parse().map_err(|_| {
                    TerrainError::MalformedHeader(format!("bad xllcorner '{value}'"))
                })?);
            }
            "yllcorner" => {
                dup(yll.is_some())?;
                yll = Some(value.parse().map_err(|_| {
                    TerrainError::MalformedHeader(format!("bad yllcorner '{value}'"))
                })?);
            }
            "cellsize" => {
                dup(cellsize.is_some())?;
                cellsize = Some(value.parse().map_err(|_| {
                    TerrainError::MalformedHeader(format!("bad cellsize '{value}'"))
                })?);
            }
            "nodata_value" => {
                dup(nodata.is_some())?;
                nodata = Some(value.parse().map_err(|_| {
                    TerrainError::MalformedHeader(format!("bad NODATA_value '{value}'"))
                })?);
            }
            other => {
                return Err(TerrainError::MalformedHeader(format!("unknown key '{other}'")));
            }
        }
        lines.next();
    }

    let ncols = ncols.ok_or_else(|| TerrainError::MalformedHeader("missing ncols".into()))?;
    let nrows = nrows.ok_or_else(|| TerrainError::MalformedHeader("missing nrows".into()))?;
    let xll = xll.ok_or_else(|| TerrainError::MalformedHeader("missing xllcorner".into()))?;
    let yll = yll.ok_or_else(|| TerrainError::MalformedHeader("missing yllcorner".into()))?;
    let cellsize =
        cellsize.ok_or_else(|| TerrainError::MalformedHeader("missing cellsize".into()))?;

    let mut elevations: Vec<T> = Vec::with_capacity(ncols * nrows);
    let mut row = 0usize;
    for line in lines {
        let values: Vec<&str> = line.split_whitespace().collect();
        if values.len() != ncols {
            return Err(TerrainError::RowLengthMismatch {
                row,
                got: values.len(),
                expected: ncols,
            });
        }
        for v in values {
            let e: f64 = v
                .parse()
                .map_err(|_| TerrainError::NonFiniteElevation(row))?;
            if !e.is_finite() {
                return Err(TerrainError::NonFiniteElevation(row));
            }
            if nodata.is_some_and(|nd| e == nd) {
                return Err(TerrainError::NoDataPresent(row));
            }
            elevations.push(real::<T>(e));
        }
        row += 1;
    }
    if row != nrows {
        return Err(TerrainError::RowLengthMismatch { row, got: row, expected: nrows });
    }
    TerrainGrid::new(ncols, nrows, real::<T>(cellsize), real::<T>(xll), real::<T>(yll), elevations)
}
