use super::{CellState, VoxelMap, BRICK};
use crate::geometry::point_segment_distance;
use crate::geometry::Vec3;

impl VoxelMap {
    /// Distance from a point inside the map to the nearest voxel centre of the
    /// unknown layer just beyond its faces; `0` for a point outside the map.
    pub fn outside_distance(&self, point: &Vec3) -> f64 {
        let Some(idx) = self.index_of(point) else {
            return 0.0;
        };
        let b = self.bounds();
        let off = point - self.voxel_center(idx);
        let h = self.resolution / 2.0;
        (0..3)
            .map(|a| {
                let normal = (point[a] - b.min[a]).min(b.max[a] - point[a]) + h;
                let lateral2 = off.norm_squared() - off[a] * off[a];
                (normal * normal + lateral2).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `point` to the centre of the nearest occupied or unknown
    /// voxel within `radius` (inclusive). Space outside the map counts as
    /// unknown. A point inside such a voxel, or outside the map, gives `0`.
    pub fn nearest_occupied_distance(&self, point: &Vec3, radius: f64) -> Option<f64> {
        debug_assert!(radius > 0.0);
        let edge = self.outside_distance(point);
        let Some(idx) = self.index_of(point) else {
            return Some(0.0);
        };
        if self.state(idx).is_blocking() {
            return Some(0.0);
        }
        let inner = self.nearest_inside(point, radius.min(edge));
        match inner {
            Some(d) => Some(d),
            None => (edge <= radius).then_some(edge),
        }
    }

    fn nearest_inside(&self, point: &Vec3, radius: f64) -> Option<f64> {
        if let Some(idx) = self.index_of(point) {
            // Lower bound from the clearance index: blocking centres are at least
            // (k - 1/2) voxels away along some axis.
            let k = self.clearance()[self.linear(idx)];
            if (f64::from(k) - 0.5) * self.resolution > radius {
                return None;
            }
        }
        let lo = self.clamped_index(&(point - Vec3::repeat(radius)));
        let hi = self.clamped_index(&(point + Vec3::repeat(radius)));
        let bounds = self.bounds();
        if (0..3).any(|a| point[a] + radius < bounds.min[a] || point[a] - radius > bounds.max[a]) {
            return None;
        }
        let mut best2 = radius * radius;
        let mut found = false;
        for bz in lo[2] / BRICK..=hi[2] / BRICK {
            for by in lo[1] / BRICK..=hi[1] / BRICK {
                for bx in lo[0] / BRICK..=hi[0] / BRICK {
                    if !self.brick_has_blocking([bx, by, bz]) {
                        continue;
                    }
                    let z0 = (bz * BRICK).max(lo[2]);
                    let z1 = ((bz + 1) * BRICK - 1).min(hi[2]);
                    let y0 = (by * BRICK).max(lo[1]);
                    let y1 = ((by + 1) * BRICK - 1).min(hi[1]);
                    let x0 = (bx * BRICK).max(lo[0]);
                    let x1 = ((bx + 1) * BRICK - 1).min(hi[0]);
                    for z in z0..=z1 {
                        for y in y0..=y1 {
                            for x in x0..=x1 {
                                if !self.state_linear(self.linear([x, y, z])).is_blocking() {
                                    continue;
                                }
                                let d2 = (self.voxel_center([x, y, z]) - point).norm_squared();
                                if d2 <= best2 {
                                    best2 = d2;
                                    found = true;
                                }
                            }
                        }
                    }
                }
            }
        }
        found.then(|| best2.sqrt())
    }

    /// True when `idx` satisfies `solid` and at least one face neighbour does
    /// not (or lies outside the map).
    pub(crate) fn is_surface(&self, idx: [usize; 3], solid: fn(CellState) -> bool) -> bool {
        if !solid(self.state(idx)) {
            return false;
        }
        for a in 0..3 {
            for s in [-1i64, 1] {
                let v = idx[a] as i64 + s;
                if v < 0 || v >= self.dims[a] as i64 {
                    return true;
                }
                let mut n = idx;
                n[a] = v as usize;
                if !solid(self.state(n)) {
                    return true;
                }
            }
        }
        false
    }
}

/// Blocking voxel centres around a point, bucketed for repeated nearest queries
/// within one planning cycle.
///
/// Only voxels on the surface of blocking regions are kept: for a query point
/// outside every blocking voxel, an interior voxel always has a face neighbour
/// that is closer, so the nearest centre is a surface voxel.
#[derive(Debug, Clone)]
pub struct NearbyObstacles {
    solid: fn(CellState) -> bool,
    center: Vec3,
    reach: f64,
    bucket: f64,
    lo: Vec3,
    dims: [usize; 3],
    starts: Vec<u32>,
    points: Vec<Vec3>,
}

impl NearbyObstacles {
    /// Collects surface voxels whose centres lie within `reach` of `center`.
    /// Queries are exact for any point `q` and radius `r` with
    /// `|q - center| + r <= reach`.
    pub fn collect(map: &VoxelMap, center: &Vec3, reach: f64) -> Self {
        Self::collect_where(map, center, reach, CellState::is_blocking)
    }

    /// As [`Self::collect`], with `solid` deciding which cells are obstacles.
    pub fn collect_where(map: &VoxelMap, center: &Vec3, reach: f64, solid: fn(CellState) -> bool) -> Self {
        let bucket = (map.resolution() * 2.5).max(0.05);
        let lo = center - Vec3::repeat(reach);
        let side = ((2.0 * reach / bucket).ceil() as usize).max(1);
        let dims = [side, side, side];
        let mut raw: Vec<(usize, Vec3)> = Vec::new();
        let ilo = map.clamped_index(&(center - Vec3::repeat(reach)));
        let ihi = map.clamped_index(&(center + Vec3::repeat(reach)));
        let bounds = map.bounds();
        let overlaps = (0..3).all(|a| center[a] + reach >= bounds.min[a] && center[a] - reach <= bounds.max[a]);
        let reach2 = reach * reach;
        if overlaps {
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
                                    if !map.is_surface(idx, solid) {
                                        continue;
                                    }
                                    let c = map.voxel_center(idx);
                                    if (c - center).norm_squared() > reach2 {
                                        continue;
                                    }
                                    let b = bucket_index(&c, &lo, bucket, &dims);
                                    raw.push((b, c));
                                }
                            }
                        }
                    }
                }
            }
        }
        raw.sort_by_key(|(b, _)| *b);
        let nb = dims[0] * dims[1] * dims[2];
        let mut starts = vec![0u32; nb + 1];
        for (b, _) in &raw {
            starts[b + 1] += 1;
        }
        for i in 0..nb {
            starts[i + 1] += starts[i];
        }
        Self {
            solid,
            center: *center,
            reach,
            bucket,
            lo,
            dims,
            starts,
            points: raw.into_iter().map(|(_, p)| p).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same contract as [`VoxelMap::nearest_occupied_distance`] for queries inside
    /// the collected reach.
    pub fn nearest(&self, map: &VoxelMap, q: &Vec3, radius: f64) -> Option<f64> {
        debug_assert!(
            (q - self.center).norm() + radius <= self.reach + 1e-9,
            "query outside the collected reach"
        );
        let edge = if (self.solid)(CellState::Unknown) {
            map.outside_distance(q)
        } else {
            f64::INFINITY
        };
        match map.index_of(q) {
            Some(idx) if (self.solid)(map.state(idx)) => return Some(0.0),
            None if edge == 0.0 => return Some(0.0),
            _ => {}
        }
        let limit = radius;
        let radius = radius.min(edge);
        let mut best2 = radius * radius;
        let mut found = false;
        let (b0, b1) = self.bucket_range(q, q, radius);
        for bz in b0[2]..=b1[2] {
            for by in b0[1]..=b1[1] {
                for p in self.row(b0, b1, by, bz) {
                    let d2 = (p - q).norm_squared();
                    if d2 <= best2 {
                        best2 = d2;
                        found = true;
                    }
                }
            }
        }
        found.then(|| best2.sqrt()).or((edge <= limit).then_some(edge))
    }

    /// True when some collected centre lies within `radius` (inclusive) of the
    /// segment `a`-`b`. Only surface cells are stored, so callers must check
    /// separately that the segment does not pass through a solid cell.
    pub fn any_near_segment(&self, a: &Vec3, b: &Vec3, radius: f64) -> bool {
        let (b0, b1) = self.bucket_range(a, b, radius);
        for bz in b0[2]..=b1[2] {
            for by in b0[1]..=b1[1] {
                if self
                    .row(b0, b1, by, bz)
                    .iter()
                    .any(|p| point_segment_distance(p, a, b) <= radius)
                {
                    return true;
                }
            }
        }
        false
    }

    fn row(&self, b0: [usize; 3], b1: [usize; 3], by: usize, bz: usize) -> &[Vec3] {
        let row = self.dims[0] * (by + self.dims[1] * bz);
        let s = self.starts[row + b0[0]] as usize;
        let e = self.starts[row + b1[0] + 1] as usize;
        &self.points[s..e]
    }

    fn bucket_range(&self, a: &Vec3, b: &Vec3, radius: f64) -> ([usize; 3], [usize; 3]) {
        let b0 = [0, 1, 2].map(|i| {
            let v = ((a[i].min(b[i]) - radius - self.lo[i]) / self.bucket).floor();
            (v.max(0.0) as usize).min(self.dims[i] - 1)
        });
        let b1 = [0, 1, 2].map(|i| {
            let v = ((a[i].max(b[i]) + radius - self.lo[i]) / self.bucket).floor();
            (v.max(0.0) as usize).min(self.dims[i] - 1)
        });
        (b0, b1)
    }
}

fn bucket_index(p: &Vec3, lo: &Vec3, bucket: f64, dims: &[usize; 3]) -> usize {
    let b = [0, 1, 2].map(|a| (((p[a] - lo[a]) / bucket).floor().max(0.0) as usize).min(dims[a] - 1));
    b[0] + dims[0] * (b[1] + dims[1] * b[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{CellState, LogOddsParams};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Blocking cells plus a one-voxel shell of unknown cells around the map.
    fn brute(map: &VoxelMap, p: &Vec3, r: f64) -> Option<f64> {
        match map.index_of(p) {
            None => return Some(0.0),
            Some(i) if map.state(i).is_blocking() => return Some(0.0),
            _ => {}
        }
        let dims = map.dims();
        let res = map.resolution();
        let origin = map.bounds().min;
        let mut best: Option<f64> = None;
        for z in -1..=dims[2] as i64 {
            for y in -1..=dims[1] as i64 {
                for x in -1..=dims[0] as i64 {
                    let v = [x, y, z];
                    let inside = (0..3).all(|a| v[a] >= 0 && v[a] < dims[a] as i64);
                    if inside && !map.state([x as usize, y as usize, z as usize]).is_blocking() {
                        continue;
                    }
                    let c = origin + Vec3::new(x as f64 + 0.5, y as f64 + 0.5, z as f64 + 0.5) * res;
                    let d = (c - p).norm();
                    if d <= r && best.is_none_or(|b| d < b) {
                        best = Some(d);
                    }
                }
            }
        }
        best
    }

    fn assert_close(got: Option<f64>, want: Option<f64>) {
        match (got, want) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9, "{a} vs {b}"),
            _ => assert_eq!(got, want),
        }
    }

    fn random_map(rng: &mut ChaCha8Rng, n: usize, blobs: usize) -> VoxelMap {
        let mut m = VoxelMap::new(Vec3::zeros(), 0.1, [n, n, n], LogOddsParams::default()).unwrap();
        m.fill(CellState::Free);
        for _ in 0..blobs {
            let c = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
            let s = rng.gen_range(0..3);
            let st = if rng.gen_bool(0.5) {
                CellState::Occupied
            } else {
                CellState::Unknown
            };
            for z in c[2].saturating_sub(s)..(c[2] + s + 1).min(n) {
                for y in c[1].saturating_sub(s)..(c[1] + s + 1).min(n) {
                    for x in c[0].saturating_sub(s)..(c[0] + s + 1).min(n) {
                        m.set_state([x, y, z], st);
                    }
                }
            }
        }
        m
    }

    #[test]
    fn open_space_is_absent() {
        let mut m = VoxelMap::new(Vec3::zeros(), 0.1, [30, 30, 30], LogOddsParams::default()).unwrap();
        m.fill(CellState::Free);
        assert_eq!(m.nearest_occupied_distance(&Vec3::new(1.5, 1.5, 1.5), 1.0), None);
    }

    #[test]
    fn single_voxel_at_fifty_five_centimetres() {
        let mut m = VoxelMap::new(Vec3::zeros(), 0.1, [30, 30, 30], LogOddsParams::default()).unwrap();
        m.fill(CellState::Free);
        m.set_state([20, 15, 15], CellState::Occupied);
        let d = m.nearest_occupied_distance(&Vec3::new(1.5, 1.55, 1.55), 1.0).unwrap();
        assert_relative_eq!(d, 0.55, epsilon = 1e-6);
    }

    #[test]
    fn inside_blocking_voxel_is_zero() {
        let mut m = VoxelMap::new(Vec3::zeros(), 0.1, [5, 5, 5], LogOddsParams::default()).unwrap();
        m.fill(CellState::Free);
        m.set_state([2, 2, 2], CellState::Occupied);
        assert_eq!(
            m.nearest_occupied_distance(&Vec3::new(0.21, 0.29, 0.25), 0.5),
            Some(0.0)
        );
    }

    #[test]
    fn map_query_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_map(&mut rng, 20, 5);
            for _ in 0..50 {
                let p = Vec3::new(
                    rng.gen_range(-0.3..2.3),
                    rng.gen_range(-0.3..2.3),
                    rng.gen_range(-0.3..2.3),
                );
                let r = rng.gen_range(0.05..1.2);
                assert_close(m.nearest_occupied_distance(&p, r), brute(&m, &p, r));
            }
        }
    }

    #[test]
    fn bucketed_query_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let m = random_map(&mut rng, 20, 6);
            let c = Vec3::new(
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.0..2.0),
            );
            let near = NearbyObstacles::collect(&m, &c, 1.2);
            for _ in 0..50 {
                let off = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                let off = off.normalize() * rng.gen_range(0.0..0.6);
                let q = c + off;
                let r = rng.gen_range(0.05..(1.2 - off.norm()));
                assert_close(near.nearest(&m, &q, r), brute(&m, &q, r));
            }
        }
    }
}
