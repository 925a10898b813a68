use super::UnknownPolicy;
use crate::geometry::{point_segment_distance, Vec3};
use crate::map::{CellState, NearbyObstacles, RayHit, VoxelMap, BRICK};

/// Edge check with occupied and unknown voxels as obstacles.
///
/// With `safety == 0` this is a line-of-sight test. Otherwise the segment is
/// clear when no obstacle voxel centre lies within `safety` of it (a capsule).
pub fn segment_clear(map: &VoxelMap, a: &Vec3, b: &Vec3, safety: f64) -> bool {
    segment_clear_with(map, a, b, safety, UnknownPolicy::Obstacle)
}

pub fn segment_clear_with(map: &VoxelMap, a: &Vec3, b: &Vec3, safety: f64, unknown: UnknownPolicy) -> bool {
    let solid = unknown.solid();
    if safety <= 0.0 {
        return line_of_sight(map, a, b, solid);
    }
    !any_centre_near_segment(map, a, b, safety, solid)
}

/// Point version of the edge check: the containing voxel for `safety == 0`,
/// otherwise a sphere of radius `safety`.
pub fn point_clear(map: &VoxelMap, p: &Vec3, safety: f64, unknown: UnknownPolicy) -> bool {
    let solid = unknown.solid();
    if safety <= 0.0 {
        return map.index_of(p).is_none_or(|i| !solid(map.state(i)));
    }
    !any_centre_near_segment(map, p, p, safety, solid)
}

fn line_of_sight(map: &VoxelMap, a: &Vec3, b: &Vec3, solid: fn(CellState) -> bool) -> bool {
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return map.index_of(a).is_none_or(|i| !solid(map.state(i)));
    }
    map.raycast_until(a, &(d / len), len, solid).hit == RayHit::Miss
}

/// Exhaustive scan of the capsule's bounding box, skipping empty bricks.
fn any_centre_near_segment(map: &VoxelMap, a: &Vec3, b: &Vec3, r: f64, solid: fn(CellState) -> bool) -> bool {
    let lo = Vec3::new(a[0].min(b[0]), a[1].min(b[1]), a[2].min(b[2])) - Vec3::repeat(r);
    let hi = Vec3::new(a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])) + Vec3::repeat(r);
    let bounds = map.bounds();
    if (0..3).any(|i| hi[i] < bounds.min[i] || lo[i] > bounds.max[i]) {
        return false;
    }
    let ilo = map.clamped_index(&lo);
    let ihi = map.clamped_index(&hi);
    for bz in ilo[2] / BRICK..=ihi[2] / BRICK {
        for by in ilo[1] / BRICK..=ihi[1] / BRICK {
            for bx in ilo[0] / BRICK..=ihi[0] / BRICK {
                if !map.brick_has_blocking([bx, by, bz]) {
                    continue;
                }
                for z in (bz * BRICK).max(ilo[2])..=((bz + 1) * BRICK - 1).min(ihi[2]) {
                    for y in (by * BRICK).max(ilo[1])..=((by + 1) * BRICK - 1).min(ihi[1]) {
                        for x in (bx * BRICK).max(ilo[0])..=((bx + 1) * BRICK - 1).min(ihi[0]) {
                            let idx = [x, y, z];
                            if solid(map.state(idx)) && point_segment_distance(&map.voxel_center(idx), a, b) <= r {
                                return true;
                            }
                        }
                    }
                }
            }
        }
    }
    false
}

/// Reusable edge checker for many queries against one map snapshot.
///
/// Keeps only surface voxels of the obstacle set in a bucket grid. A segment
/// that passes through no obstacle voxel is closest to a surface voxel, so the
/// capsule test against surface voxels plus a line-of-sight test is exact
/// whenever `safety` is at least half a voxel diagonal; smaller radii fall back
/// to the exhaustive scan.
pub struct SegmentChecker<'a> {
    map: &'a VoxelMap,
    solid: fn(CellState) -> bool,
    unknown: UnknownPolicy,
    surface: NearbyObstacles,
}

impl<'a> SegmentChecker<'a> {
    pub fn new(map: &'a VoxelMap, unknown: UnknownPolicy) -> Self {
        let bounds = map.bounds();
        let reach = bounds.extents().norm() / 2.0 + map.resolution();
        let solid = unknown.solid();
        Self {
            map,
            solid,
            unknown,
            surface: NearbyObstacles::collect_where(map, &bounds.center(), reach, solid),
        }
    }

    pub fn segment_clear(&self, a: &Vec3, b: &Vec3, safety: f64) -> bool {
        if safety <= 0.0 {
            return line_of_sight(self.map, a, b, self.solid);
        }
        if safety < self.map.resolution() * 3f64.sqrt() / 2.0 {
            return segment_clear_with(self.map, a, b, safety, self.unknown);
        }
        if !self.surface.any_near_segment(a, b, safety) {
            // No surface voxel nearby: the segment could still lie wholly inside
            // a solid region.
            return line_of_sight(self.map, a, b, self.solid);
        }
        false
    }

    pub fn point_clear(&self, p: &Vec3, safety: f64) -> bool {
        self.segment_clear(p, p, safety)
    }
}
