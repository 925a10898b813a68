//! Dense voxel occupancy map with log-odds evidence.
//!
//! Every cell stores an `f32` log-odds value; cells that were never touched hold
//! `NaN` and classify as [`CellState::Unknown`]. A cached per-cell state array and
//! per-brick counters back the query paths used by the planners.

mod clearance;
mod nearest;
mod raycast;
mod snapshot;

pub use nearest::NearbyObstacles;
pub use raycast::{RayHit, RaycastResult};
pub use snapshot::{parse_snapshot, Snapshot, SnapshotError};

use crate::geometry::{Aabb, Vec3};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

/// Edge length of the cubic bricks used to skip empty regions in neighbourhood scans.
pub(crate) const BRICK: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("map extents must be at least one voxel per axis, got {0:?}")]
    InvalidExtents([usize; 3]),
    #[error("invalid log-odds parameters: {0}")]
    InvalidParams(String),
    #[error("sensor origin {0:?} lies outside the map")]
    OriginOutsideMap([f64; 3]),
    #[error("scan contains a non-finite point at index {0}")]
    NonFinitePoint(usize),
}

/// Log-odds update and classification parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogOddsParams {
    pub hit: f32,
    pub miss: f32,
    pub clamp_min: f32,
    pub clamp_max: f32,
    pub occupied_threshold: f32,
    pub free_threshold: f32,
}

impl Default for LogOddsParams {
    fn default() -> Self {
        Self {
            hit: 0.85,
            miss: -0.40,
            clamp_min: -2.0,
            clamp_max: 3.5,
            occupied_threshold: 0.0,
            free_threshold: -0.4,
        }
    }
}

impl LogOddsParams {
    pub fn validate(&self) -> Result<(), MapError> {
        let all = [
            self.hit,
            self.miss,
            self.clamp_min,
            self.clamp_max,
            self.occupied_threshold,
            self.free_threshold,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(MapError::InvalidParams("all values must be finite".into()));
        }
        if self.hit <= 0.0 || self.miss >= 0.0 {
            return Err(MapError::InvalidParams(
                "hit increment must be positive and miss increment negative".into(),
            ));
        }
        if !(self.clamp_min <= self.free_threshold
            && self.free_threshold < self.occupied_threshold
            && self.occupied_threshold <= self.clamp_max)
        {
            return Err(MapError::InvalidParams(
                "expected clamp_min <= free_threshold < occupied_threshold <= clamp_max".into(),
            ));
        }
        Ok(())
    }

    /// Pure classification of a log-odds value. `NaN` means never observed.
    pub fn classify(&self, log_odds: f32) -> CellState {
        if log_odds.is_nan() {
            CellState::Unknown
        } else if log_odds >= self.occupied_threshold {
            CellState::Occupied
        } else if log_odds <= self.free_threshold {
            CellState::Free
        } else {
            CellState::Unknown
        }
    }

    /// One clamped update step starting from `current` (`NaN` counts as 0).
    pub fn apply(&self, current: f32, delta: f32) -> f32 {
        let base = if current.is_nan() { 0.0 } else { current };
        (base + delta).clamp(self.clamp_min, self.clamp_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

impl CellState {
    /// Occupied and unknown cells both block rays and count as obstacles.
    pub fn is_blocking(self) -> bool {
        !matches!(self, CellState::Free)
    }
}

/// Counters returned by [`VoxelMap::integrate_scan`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanStats {
    pub hits_inserted: usize,
    pub points_skipped: usize,
    pub voxels_hit: usize,
    pub voxels_cleared: usize,
}

#[derive(Debug, Clone)]
pub struct VoxelMap {
    origin: Vec3,
    resolution: f64,
    dims: [usize; 3],
    params: LogOddsParams,
    log_odds: Vec<f32>,
    states: Vec<CellState>,
    brick_dims: [usize; 3],
    brick_blocking: Vec<u32>,
    clearance: OnceLock<Vec<u8>>,
}

impl VoxelMap {
    /// Creates a map with every cell unknown.
    pub fn new(origin: Vec3, resolution: f64, dims: [usize; 3], params: LogOddsParams) -> Result<Self, MapError> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(MapError::InvalidResolution(resolution));
        }
        if dims.contains(&0) {
            return Err(MapError::InvalidExtents(dims));
        }
        params.validate()?;
        let n = dims[0] * dims[1] * dims[2];
        let brick_dims = [
            dims[0].div_ceil(BRICK),
            dims[1].div_ceil(BRICK),
            dims[2].div_ceil(BRICK),
        ];
        let mut brick_blocking = vec![0u32; brick_dims[0] * brick_dims[1] * brick_dims[2]];
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    let b = (x / BRICK) + brick_dims[0] * ((y / BRICK) + brick_dims[1] * (z / BRICK));
                    brick_blocking[b] += 1;
                }
            }
        }
        Ok(Self {
            origin,
            resolution,
            dims,
            params,
            log_odds: vec![f32::NAN; n],
            states: vec![CellState::Unknown; n],
            brick_dims,
            brick_blocking,
            clearance: OnceLock::new(),
        })
    }

    /// Map covering `bounds` (rounded up to whole voxels).
    pub fn from_bounds(bounds: &Aabb, resolution: f64, params: LogOddsParams) -> Result<Self, MapError> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(MapError::InvalidResolution(resolution));
        }
        let ext = bounds.extents();
        let dims = [0, 1, 2].map(|i| ((ext[i] / resolution) - 1e-9).ceil().max(1.0) as usize);
        Self::new(bounds.min, resolution, dims, params)
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn params(&self) -> &LogOddsParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.log_odds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_odds.is_empty()
    }

    pub fn bounds(&self) -> Aabb {
        let max = self.origin
            + Vec3::new(
                self.dims[0] as f64 * self.resolution,
                self.dims[1] as f64 * self.resolution,
                self.dims[2] as f64 * self.resolution,
            );
        Aabb::new(self.origin, max)
    }

    #[inline]
    pub fn linear(&self, idx: [usize; 3]) -> usize {
        idx[0] + self.dims[0] * (idx[1] + self.dims[1] * idx[2])
    }

    #[inline]
    pub fn unlinear(&self, i: usize) -> [usize; 3] {
        let x = i % self.dims[0];
        let yz = i / self.dims[0];
        [x, yz % self.dims[1], yz / self.dims[1]]
    }

    /// Voxel containing `p`, or `None` outside the map.
    pub fn index_of(&self, p: &Vec3) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for i in 0..3 {
            let f = ((p[i] - self.origin[i]) / self.resolution).floor();
            if !(f >= 0.0 && f < self.dims[i] as f64) {
                return None;
            }
            out[i] = f as usize;
        }
        Some(out)
    }

    /// Like [`Self::index_of`] but clamps to the nearest voxel; used for points
    /// that sit on the boundary up to rounding.
    pub(crate) fn clamped_index(&self, p: &Vec3) -> [usize; 3] {
        [0, 1, 2].map(|i| {
            let f = ((p[i] - self.origin[i]) / self.resolution).floor();
            f.clamp(0.0, (self.dims[i] - 1) as f64) as usize
        })
    }

    pub fn voxel_center(&self, idx: [usize; 3]) -> Vec3 {
        self.origin
            + Vec3::new(
                (idx[0] as f64 + 0.5) * self.resolution,
                (idx[1] as f64 + 0.5) * self.resolution,
                (idx[2] as f64 + 0.5) * self.resolution,
            )
    }

    pub fn voxel_aabb(&self, idx: [usize; 3]) -> Aabb {
        let min = self.origin
            + Vec3::new(
                idx[0] as f64 * self.resolution,
                idx[1] as f64 * self.resolution,
                idx[2] as f64 * self.resolution,
            );
        Aabb::new(min, min + Vec3::repeat(self.resolution))
    }

    pub fn state(&self, idx: [usize; 3]) -> CellState {
        self.states[self.linear(idx)]
    }

    #[inline]
    pub(crate) fn state_linear(&self, i: usize) -> CellState {
        self.states[i]
    }

    /// State at a world position; outside the map counts as unknown.
    pub fn state_at(&self, p: &Vec3) -> CellState {
        self.index_of(p).map_or(CellState::Unknown, |i| self.state(i))
    }

    /// Raw log-odds (`NaN` if never observed).
    pub fn log_odds(&self, idx: [usize; 3]) -> f32 {
        self.log_odds[self.linear(idx)]
    }

    /// Iterator over `(index, state)` for all cells.
    pub fn cells(&self) -> impl Iterator<Item = ([usize; 3], CellState)> + '_ {
        self.states.iter().enumerate().map(move |(i, s)| (self.unlinear(i), *s))
    }

    pub fn count(&self, state: CellState) -> usize {
        self.states.iter().filter(|s| **s == state).count()
    }

    fn brick_of(&self, idx: [usize; 3]) -> usize {
        (idx[0] / BRICK) + self.brick_dims[0] * ((idx[1] / BRICK) + self.brick_dims[1] * (idx[2] / BRICK))
    }

    pub(crate) fn brick_has_blocking(&self, b: [usize; 3]) -> bool {
        self.brick_blocking[b[0] + self.brick_dims[0] * (b[1] + self.brick_dims[1] * b[2])] > 0
    }

    fn write(&mut self, i: usize, value: f32) {
        let new_state = self.params.classify(value);
        let old_state = self.states[i];
        self.log_odds[i] = value;
        if new_state != old_state {
            self.states[i] = new_state;
            let b = self.brick_of(self.unlinear(i));
            match (old_state.is_blocking(), new_state.is_blocking()) {
                (true, false) => self.brick_blocking[b] -= 1,
                (false, true) => self.brick_blocking[b] += 1,
                _ => {}
            }
            self.clearance = OnceLock::new();
        }
    }

    /// Applies one clamped log-odds update to a cell.
    pub fn update_cell(&mut self, idx: [usize; 3], delta: f32) {
        let i = self.linear(idx);
        let v = self.params.apply(self.log_odds[i], delta);
        self.write(i, v);
    }

    /// Forces a cell into a state by writing the matching clamp bound
    /// (`NaN` for unknown). Intended for fixtures.
    pub fn set_state(&mut self, idx: [usize; 3], state: CellState) {
        let v = match state {
            CellState::Free => self.params.clamp_min,
            CellState::Occupied => self.params.clamp_max,
            CellState::Unknown => f32::NAN,
        };
        let i = self.linear(idx);
        self.write(i, v);
    }

    /// Sets every cell to `state`.
    pub fn fill(&mut self, state: CellState) {
        for i in 0..self.len() {
            let idx = self.unlinear(i);
            self.set_state(idx, state);
        }
    }

    /// Sets every voxel whose centre lies in `region` to `state`.
    pub fn fill_region(&mut self, region: &Aabb, state: CellState) {
        for i in 0..self.len() {
            let idx = self.unlinear(i);
            if region.contains(&self.voxel_center(idx)) {
                self.set_state(idx, state);
            }
        }
    }

    /// Integrates one scan of hit points observed from `sensor_origin`.
    ///
    /// Each voxel receives at most one update per scan: voxels containing a hit get
    /// the hit increment, the remaining voxels traversed by any ray get the miss
    /// increment. Points outside the map are skipped and counted.
    pub fn integrate_scan(&mut self, sensor_origin: &Vec3, points: &[Vec3]) -> Result<ScanStats, MapError> {
        self.integrate_scan_with_free_rays(sensor_origin, points, &[])
    }

    /// As [`Self::integrate_scan`], additionally clearing voxels along rays that
    /// reached `free_endpoints` without hitting anything (max-range returns).
    pub fn integrate_scan_with_free_rays(
        &mut self,
        sensor_origin: &Vec3,
        points: &[Vec3],
        free_endpoints: &[Vec3],
    ) -> Result<ScanStats, MapError> {
        if let Some(i) = points
            .iter()
            .chain(free_endpoints)
            .position(|p| !(p[0].is_finite() && p[1].is_finite() && p[2].is_finite()))
        {
            return Err(MapError::NonFinitePoint(i));
        }
        if self.index_of(sensor_origin).is_none() {
            return Err(MapError::OriginOutsideMap([
                sensor_origin[0],
                sensor_origin[1],
                sensor_origin[2],
            ]));
        }
        let mut stats = ScanStats::default();
        let mut hits: Vec<usize> = Vec::with_capacity(points.len());
        let mut free: Vec<usize> = Vec::new();
        for p in points {
            let Some(hit_idx) = self.index_of(p) else {
                stats.points_skipped += 1;
                continue;
            };
            stats.hits_inserted += 1;
            let hit_lin = self.linear(hit_idx);
            hits.push(hit_lin);
            self.collect_traversed(sensor_origin, p, &mut free);
            // The endpoint voxel itself is a hit, never a miss for this ray.
            if free.last() == Some(&hit_lin) {
                free.pop();
            }
        }
        for p in free_endpoints {
            self.collect_traversed(sensor_origin, p, &mut free);
        }
        hits.sort_unstable();
        hits.dedup();
        free.sort_unstable();
        free.dedup();
        let (hit_delta, miss_delta) = (self.params.hit, self.params.miss);
        for &i in &hits {
            let v = self.params.apply(self.log_odds[i], hit_delta);
            self.write(i, v);
        }
        stats.voxels_hit = hits.len();
        for &i in &free {
            if hits.binary_search(&i).is_ok() {
                continue;
            }
            let v = self.params.apply(self.log_odds[i], miss_delta);
            self.write(i, v);
            stats.voxels_cleared += 1;
        }
        Ok(stats)
    }

    /// Miss update for every voxel whose whole cube lies within `radius` of
    /// `center`. Used to clear the vehicle's own footprint.
    pub fn clear_sphere(&mut self, center: &Vec3, radius: f64) -> usize {
        let half_diag = self.resolution * 3f64.sqrt() / 2.0;
        let inner = radius - half_diag;
        if inner < 0.0 {
            return 0;
        }
        let lo = self.clamped_index(&(center - Vec3::repeat(radius)));
        let hi = self.clamped_index(&(center + Vec3::repeat(radius)));
        let mut n = 0;
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    let idx = [x, y, z];
                    if (self.voxel_center(idx) - center).norm() <= inner {
                        self.update_cell(idx, self.params.miss);
                        n += 1;
                    }
                }
            }
        }
        n
    }

    /// Appends the linear indices of voxels traversed from `from` to `to`,
    /// clipped to the map.
    fn collect_traversed(&self, from: &Vec3, to: &Vec3, out: &mut Vec<usize>) {
        let delta = to - from;
        let len = delta.norm();
        if len == 0.0 {
            if let Some(idx) = self.index_of(from) {
                out.push(self.linear(idx));
            }
            return;
        }
        let dir = delta / len;
        let Some((t0, t1)) = self.bounds().clip_ray(from, &dir, 0.0, len) else {
            return;
        };
        self.walk(from, &dir, t0, t1, |lin, _| {
            out.push(lin);
            true
        });
    }

    /// True when both maps hold bit-identical log-odds values.
    pub fn bit_identical(&self, other: &VoxelMap) -> bool {
        self.dims == other.dims
            && self.origin == other.origin
            && self.resolution == other.resolution
            && self
                .log_odds
                .iter()
                .zip(&other.log_odds)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Chebyshev clearance per cell, computed lazily after each change.
    pub(crate) fn clearance(&self) -> &[u8] {
        self.clearance.get_or_init(|| clearance::chebyshev_clearance(self))
    }

    /// Builds the acceleration index now so later queries do not pay for it.
    pub fn warm_query_index(&self) {
        let _ = self.clearance();
    }
}
