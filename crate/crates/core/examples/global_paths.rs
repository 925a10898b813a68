//! Compares the three global path variants on a mapped wall: the straight
//! line, line-of-sight RRT* and RRT* that keeps the vehicle radius clear.

use dwa3d::geometry::{point_segment_distance, Aabb, Vec3};
use dwa3d::global::{plan_naive, plan_rrt_star, GlobalPlannerConfig, PathVariant};
use dwa3d::map::{CellState, LogOddsParams, VoxelMap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bounds = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(6.0, 6.0, 2.0));
    let mut map = VoxelMap::from_bounds(&bounds, 0.1, LogOddsParams::default())?;
    map.fill(CellState::Free);
    let wall = Aabb::new(Vec3::new(2.85, 2.25, 0.0), Vec3::new(3.15, 3.75, 1.0));
    map.fill_region(&wall, CellState::Occupied);

    let start = Vec3::new(1.0, 3.0, 0.7);
    let goal = Vec3::new(5.0, 3.0, 0.7);
    let cfg = GlobalPlannerConfig::default();
    let edge = Vec3::new(3.0, 3.75, 0.7);

    let naive = plan_naive(&start, &goal, &cfg)?;
    println!("naive: {} waypoints, cost {:.2}", naive.len(), naive.cost);
    for variant in [PathVariant::NotSizeAware, PathVariant::SizeAware] {
        let (path, report) = plan_rrt_star(&map, &start, &goal, &bounds, variant, &cfg)?;
        let closest = path
            .waypoints
            .windows(2)
            .map(|w| point_segment_distance(&edge, &w[0], &w[1]))
            .fold(f64::INFINITY, f64::min);
        println!(
            "{variant:?}: {} waypoints, length {:.2} m, cost {:.2} (raw {:.2}), {} iterations, \
             closest to the wall edge {:.2} m (safety {:.2} m)",
            path.len(),
            path.length(),
            path.cost,
            report.raw_cost,
            report.iterations,
            closest,
            cfg.safety_for(variant)
        );
    }
    Ok(())
}
