//! Builds a voxel map from simulated LiDAR scans of the wall scenario, then
//! queries it with raycasts and nearest-obstacle lookups.

use dwa3d::dwa::DroneState;
use dwa3d::geometry::Vec3;
use dwa3d::map::{CellState, LogOddsParams, VoxelMap};
use dwa3d::scenario::builtin;
use dwa3d::sim::{lidar_scan, SensorModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = builtin("wall")?;
    let scene = spec.scene().at(0.0);
    let mut map = VoxelMap::from_bounds(&spec.bounds, 0.1, LogOddsParams::default())?;
    println!("map dims {:?}, {} voxels, all unknown", map.dims(), map.len());

    // Three scans from the start pose: hits accumulate +0.85 each, misses -0.4.
    let drone = DroneState::hover(spec.start.position(), spec.start.yaw);
    let scan = lidar_scan(&scene, &drone, &SensorModel::default());
    for i in 1..=3 {
        let stats = map.integrate_scan_with_free_rays(&scan.origin, &scan.points, &scan.max_range_endpoints)?;
        println!(
            "scan {i}: {} hits, {} voxels hit, {} cleared; occupied {} free {} unknown {}",
            stats.hits_inserted,
            stats.voxels_hit,
            stats.voxels_cleared,
            map.count(CellState::Occupied),
            map.count(CellState::Free),
            map.count(CellState::Unknown)
        );
    }

    let origin = drone.position();
    let forward = Vec3::new(1.0, 0.0, 0.0);
    let hit = map.raycast(&origin, &forward, 5.0);
    println!(
        "ray towards the goal: {:?} at {:.2} m, voxel {:?} (wall face at {:.2} m)",
        hit.hit,
        hit.distance,
        hit.voxel,
        3.0 - 0.15 - origin[0]
    );
    for d in [1.0, 1.5, 1.7] {
        let p = origin + forward * d;
        let near = map.nearest_occupied_distance(&p, 2.0);
        println!("nearest blocking voxel from x = {:.1}: {near:?}", p[0]);
    }

    let snapshot = map.export_snapshot();
    println!(
        "snapshot: {} bytes, first line `{}`",
        snapshot.len(),
        snapshot.lines().next().unwrap_or("")
    );
    Ok(())
}
