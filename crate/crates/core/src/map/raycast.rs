use super::{CellState, VoxelMap};
use crate::geometry::Vec3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RayHit {
    Occupied,
    Unknown,
    Miss,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaycastResult {
    pub hit: RayHit,
    /// Distance to the entry point of the hit voxel, or the cast length on a miss.
    pub distance: f64,
    pub voxel: Option<[usize; 3]>,
}

impl RaycastResult {
    fn miss(max_len: f64) -> Self {
        Self {
            hit: RayHit::Miss,
            distance: max_len,
            voxel: None,
        }
    }
}

impl VoxelMap {
    /// Amanatides-Woo traversal over the voxels intersected by
    /// `origin + t * dir`, `t ∈ [t_start, t_end]`. The interval must already be
    /// clipped to the map bounds. `visit` receives the linear index and the entry
    /// parameter of each voxel and returns `false` to stop.
    pub(crate) fn walk(
        &self,
        origin: &Vec3,
        dir: &Vec3,
        t_start: f64,
        t_end: f64,
        mut visit: impl FnMut(usize, f64) -> bool,
    ) {
        let mut idx = self.clamped_index(&(origin + dir * t_start)).map(|v| v as i64);
        let (step, mut t_max) = self.dda_setup(origin, dir, idx);
        let mut t_entry = t_start;
        loop {
            let lin = self.linear(idx.map(|v| v as usize));
            if !visit(lin, t_entry) {
                return;
            }
            let axis = argmin3(&t_max);
            if t_max[axis] > t_end {
                return;
            }
            idx[axis] += step[axis];
            if idx[axis] < 0 || idx[axis] >= self.dims[axis] as i64 {
                return;
            }
            t_entry = t_max[axis];
            t_max[axis] = self.boundary_t(origin, dir, idx, step, axis);
        }
    }

    fn dda_setup(&self, origin: &Vec3, dir: &Vec3, idx: [i64; 3]) -> ([i64; 3], [f64; 3]) {
        let mut step = [0i64; 3];
        let mut t_max = [f64::INFINITY; 3];
        for a in 0..3 {
            if dir[a] > 0.0 {
                step[a] = 1;
            } else if dir[a] < 0.0 {
                step[a] = -1;
            } else {
                continue;
            }
            t_max[a] = self.boundary_t(origin, dir, idx, step, a);
        }
        (step, t_max)
    }

    /// Ray parameter at which the ray leaves voxel `idx` through the face on
    /// axis `a` in the stepping direction.
    #[inline]
    fn boundary_t(&self, origin: &Vec3, dir: &Vec3, idx: [i64; 3], step: [i64; 3], a: usize) -> f64 {
        if step[a] == 0 {
            return f64::INFINITY;
        }
        let face = idx[a] + i64::from(step[a] > 0);
        (self.origin[a] + face as f64 * self.resolution - origin[a]) / dir[a]
    }

    /// Ray parameter at which the ray enters voxel `idx`, never below `t_start`.
    fn entry_t(&self, origin: &Vec3, dir: &Vec3, idx: [usize; 3], t_start: f64) -> f64 {
        let b = self.voxel_aabb(idx);
        let mut t = t_start;
        for a in 0..3 {
            if dir[a] != 0.0 {
                let t0 = (b.min[a] - origin[a]) / dir[a];
                let t1 = (b.max[a] - origin[a]) / dir[a];
                t = t.max(t0.min(t1));
            }
        }
        t
    }

    fn hit_result(&self, origin: &Vec3, dir: &Vec3, lin: usize, t_start: f64, max_len: f64) -> RaycastResult {
        let idx = self.unlinear(lin);
        let hit = match self.state_linear(lin) {
            CellState::Occupied => RayHit::Occupied,
            _ => RayHit::Unknown,
        };
        RaycastResult {
            hit,
            distance: self.entry_t(origin, dir, idx, t_start).min(max_len),
            voxel: Some(idx),
        }
    }

    /// Casts a ray and reports the first occupied or unknown voxel within
    /// `max_len`. Every intersected voxel is visited in order. A ray starting
    /// outside the map begins at the map boundary.
    pub fn raycast(&self, origin: &Vec3, direction: &Vec3, max_len: f64) -> RaycastResult {
        self.raycast_until(origin, direction, max_len, CellState::is_blocking)
    }

    /// As [`Self::raycast`], stopping at the first voxel for which `solid` holds.
    pub fn raycast_until(
        &self,
        origin: &Vec3,
        direction: &Vec3,
        max_len: f64,
        solid: fn(CellState) -> bool,
    ) -> RaycastResult {
        debug_assert!(
            (direction.norm() - 1.0).abs() <= 1e-9,
            "direction must be a unit vector"
        );
        debug_assert!(max_len > 0.0);
        let Some((t0, t1)) = self.bounds().clip_ray(origin, direction, 0.0, max_len) else {
            return RaycastResult::miss(max_len);
        };
        let mut found = None;
        self.walk(origin, direction, t0, t1, |lin, _| {
            if solid(self.state_linear(lin)) {
                found = Some(lin);
                false
            } else {
                true
            }
        });
        match found {
            Some(lin) => self.hit_result(origin, direction, lin, t0, max_len),
            None => RaycastResult::miss(max_len),
        }
    }

    /// Same result as [`Self::raycast`], but jumps across known-free space using
    /// the Chebyshev clearance index. Used on the planner's hot path.
    pub fn raycast_fast(&self, origin: &Vec3, direction: &Vec3, max_len: f64) -> RaycastResult {
        debug_assert!(
            (direction.norm() - 1.0).abs() <= 1e-9,
            "direction must be a unit vector"
        );
        let Some((t0, t1)) = self.bounds().clip_ray(origin, direction, 0.0, max_len) else {
            return RaycastResult::miss(max_len);
        };
        let clear = self.clearance();
        let res = self.resolution;
        let mut t = t0;
        let mut idx = self.clamped_index(&(origin + direction * t)).map(|v| v as i64);
        'outer: loop {
            let lin = self.linear(idx.map(|v| v as usize));
            let k = clear[lin];
            if k == 0 {
                return self.hit_result(origin, direction, lin, t0, max_len);
            }
            if k >= 2 {
                // Every point within (k - 1) voxels (Chebyshev) of this cell is free.
                t += f64::from(k - 1) * res - 1e-9;
                if t > t1 {
                    return RaycastResult::miss(max_len);
                }
                idx = self.clamped_index(&(origin + direction * t)).map(|v| v as i64);
                continue;
            }
            let (step, mut t_max) = self.dda_setup(origin, direction, idx);
            loop {
                let axis = argmin3(&t_max);
                if t_max[axis] > t1 {
                    return RaycastResult::miss(max_len);
                }
                idx[axis] += step[axis];
                if idx[axis] < 0 || idx[axis] >= self.dims[axis] as i64 {
                    return RaycastResult::miss(max_len);
                }
                t = t_max[axis];
                t_max[axis] = self.boundary_t(origin, direction, idx, step, axis);
                let lin = self.linear(idx.map(|v| v as usize));
                let k = clear[lin];
                if k == 0 {
                    return self.hit_result(origin, direction, lin, t0, max_len);
                }
                if k >= 3 {
                    continue 'outer;
                }
            }
        }
    }
}

#[inline]
fn argmin3(v: &[f64; 3]) -> usize {
    if v[0] <= v[1] && v[0] <= v[2] {
        0
    } else if v[1] <= v[2] {
        1
    } else {
        2
    }
}
