//! One local planner iteration in front of a wall, printing the chosen
//! command and the best-scoring candidates.

use dwa3d::dwa::{plan, DroneState, PlanMode, PlannerConfig};
use dwa3d::geometry::{Aabb, Vec3};
use dwa3d::map::{CellState, LogOddsParams, VoxelMap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bounds = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(4.0, 4.0, 2.0));
    let mut map = VoxelMap::from_bounds(&bounds, 0.1, LogOddsParams::default())?;
    map.fill(CellState::Free);
    // A 1.5 m wide, 1 m high wall 1.2 m ahead of the drone.
    let wall = Aabb::new(Vec3::new(2.0, 1.25, 0.0), Vec3::new(2.3, 2.75, 1.0));
    map.fill_region(&wall, CellState::Occupied);

    let mut state = DroneState::hover(Vec3::new(0.8, 2.0, 0.7), 0.0);
    state.vx = 0.3;
    let goal = Vec3::new(3.5, 2.0, 0.7);

    for mode in [PlanMode::Pruned, PlanMode::Full] {
        let cfg = PlannerConfig {
            mode,
            ..PlannerConfig::default()
        };
        let out = plan(&state, &goal, &map, &cfg)?;
        let c = out.command;
        println!(
            "{mode:?}: vx {:.2} m/s, vz {:+.2} m/s, wz {:+.1} deg/s; {} candidates, {} admissible, {} scored",
            c.vx,
            c.vz,
            c.wz.to_degrees(),
            out.candidates,
            out.admissible,
            out.evaluated
        );
        if mode == PlanMode::Full {
            let mut scored: Vec<_> = out.scores.iter().filter(|s| s.g.is_some()).collect();
            scored.sort_by(|a, b| b.g.unwrap().total_cmp(&a.g.unwrap()));
            for s in scored.iter().take(5) {
                println!(
                    "  G {:.4}  head_psi {:.3} head_z {:.3} dist {:.3} vel {:.3}  ({:.2}, {:+.2}, {:+.1})",
                    s.g.unwrap(),
                    s.head_psi,
                    s.head_z.unwrap_or(0.0),
                    s.dist.unwrap_or(0.0),
                    s.vel,
                    s.command.vx,
                    s.command.vz,
                    s.command.wz.to_degrees()
                );
            }
        }
    }
    Ok(())
}
