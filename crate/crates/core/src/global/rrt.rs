use super::{path_cost, GlobalError, GlobalPlannerConfig, Path, PathVariant, SegmentChecker};
use crate::geometry::{Aabb, Vec3};
use crate::map::VoxelMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Search statistics returned alongside the path.
#[derive(Debug, Clone, PartialEq)]
pub struct RrtReport {
    pub iterations: usize,
    pub nodes: usize,
    /// `(iteration, best cost)` every time the best goal connection improved.
    pub cost_history: Vec<(usize, f64)>,
    /// Cost before shortcutting.
    pub raw_cost: f64,
}

struct Node {
    pos: Vec3,
    parent: Option<usize>,
    /// Cost-to-come: weighted length plus the height term of every node on the
    /// path except this one.
    cost: f64,
    children: Vec<usize>,
}

struct Tree {
    nodes: Vec<Node>,
    goal: Vec3,
    k_length: f64,
    k_height: f64,
}

impl Tree {
    fn edge(&self, from: usize, to: &Vec3) -> f64 {
        let p = &self.nodes[from].pos;
        self.k_length * (to - p).norm() + self.k_height * (self.goal[2] - p[2]).abs()
    }

    fn nearest(&self, p: &Vec3) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, n) in self.nodes.iter().enumerate() {
            let d = (n.pos - p).norm_squared();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn near(&self, p: &Vec3, radius: f64) -> Vec<usize> {
        let r2 = radius * radius;
        (0..self.nodes.len())
            .filter(|&i| (self.nodes[i].pos - p).norm_squared() <= r2)
            .collect()
    }

    fn reparent(&mut self, child: usize, parent: usize, cost: f64) {
        if let Some(old) = self.nodes[child].parent {
            self.nodes[old].children.retain(|&c| c != child);
        }
        self.nodes[child].parent = Some(parent);
        self.nodes[parent].children.push(child);
        let delta = cost - self.nodes[child].cost;
        let mut stack = vec![child];
        while let Some(n) = stack.pop() {
            self.nodes[n].cost += delta;
            stack.extend(self.nodes[n].children.iter().copied());
        }
    }

    fn waypoints_to(&self, last: usize) -> Vec<Vec3> {
        let mut out = vec![self.nodes[last].pos];
        let mut cur = last;
        while let Some(p) = self.nodes[cur].parent {
            out.push(self.nodes[p].pos);
            cur = p;
        }
        out.reverse();
        out
    }
}

fn steer(from: &Vec3, to: &Vec3, step: f64) -> Vec3 {
    let d = to - from;
    let n = d.norm();
    if n <= step {
        *to
    } else {
        from + d * (step / n)
    }
}

/// RRT* over `bounds` followed by greedy shortcutting. Edges are validated with
/// the variant's safety distance; the result is deterministic for a given seed.
pub fn plan_rrt_star(
    map: &VoxelMap,
    start: &Vec3,
    goal: &Vec3,
    bounds: &Aabb,
    variant: PathVariant,
    cfg: &GlobalPlannerConfig,
) -> Result<(Path, RrtReport), GlobalError> {
    cfg.validate()?;
    if variant == PathVariant::Naive {
        return Err(GlobalError::InvalidConfig(
            "RRT* needs a collision-checked variant".into(),
        ));
    }
    if start == goal {
        return Err(GlobalError::Degenerate("start equals goal".into()));
    }
    let safety = cfg.safety_for(variant);
    let checker = SegmentChecker::new(map, cfg.unknown);
    if !checker.point_clear(start, safety) {
        return Err(GlobalError::Blocked("start"));
    }
    if !checker.point_clear(goal, safety) {
        return Err(GlobalError::Blocked("goal"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut tree = Tree {
        nodes: vec![Node {
            pos: *start,
            parent: None,
            cost: 0.0,
            children: Vec::new(),
        }],
        goal: *goal,
        k_length: cfg.k_length,
        k_height: cfg.k_height,
    };
    // Nodes with a clear edge to the goal.
    let mut goal_links: Vec<usize> = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    let mut history = Vec::new();
    let try_link = |tree: &Tree, i: usize, links: &mut Vec<usize>| {
        let p = tree.nodes[i].pos;
        if p != *goal && (goal - p).norm() <= cfg.steer_step && checker.segment_clear(&p, goal, safety) {
            links.push(i);
        }
    };
    try_link(&tree, 0, &mut goal_links);

    for it in 0..cfg.max_iterations {
        let sample = if rng.gen::<f64>() < cfg.goal_bias {
            *goal
        } else {
            Vec3::new(
                rng.gen_range(bounds.min[0]..=bounds.max[0]),
                rng.gen_range(bounds.min[1]..=bounds.max[1]),
                rng.gen_range(bounds.min[2]..=bounds.max[2]),
            )
        };
        let nearest = tree.nearest(&sample);
        let new = steer(&tree.nodes[nearest].pos, &sample, cfg.steer_step);
        if new == tree.nodes[nearest].pos || new == *goal {
            record_best(&tree, &goal_links, &mut best, &mut history, it);
            continue;
        }
        if !checker.segment_clear(&tree.nodes[nearest].pos, &new, safety) {
            record_best(&tree, &goal_links, &mut best, &mut history, it);
            continue;
        }
        let near = tree.near(&new, cfg.rewire_radius);
        // Cheapest clear parent among the neighbours.
        let mut options: Vec<(f64, usize)> = near
            .iter()
            .map(|&j| (tree.nodes[j].cost + tree.edge(j, &new), j))
            .collect();
        options.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut parent = (tree.nodes[nearest].cost + tree.edge(nearest, &new), nearest);
        for &(c, j) in &options {
            if c >= parent.0 {
                break;
            }
            if checker.segment_clear(&tree.nodes[j].pos, &new, safety) {
                parent = (c, j);
                break;
            }
        }
        let id = tree.nodes.len();
        tree.nodes.push(Node {
            pos: new,
            parent: Some(parent.1),
            cost: parent.0,
            children: Vec::new(),
        });
        tree.nodes[parent.1].children.push(id);
        // Rewire neighbours through the new node when cheaper.
        for &j in &near {
            if j == parent.1 || tree.nodes[j].parent.is_none() {
                continue;
            }
            let through = tree.nodes[id].cost + tree.edge(id, &tree.nodes[j].pos.clone());
            if through < tree.nodes[j].cost && checker.segment_clear(&new, &tree.nodes[j].pos, safety) {
                tree.reparent(j, id, through);
            }
        }
        try_link(&tree, id, &mut goal_links);
        record_best(&tree, &goal_links, &mut best, &mut history, it);
    }

    let Some((last, raw_cost)) = best else {
        return Err(GlobalError::NoPath {
            iterations: cfg.max_iterations,
        });
    };
    let mut waypoints = tree.waypoints_to(last);
    waypoints.push(*goal);
    shortcut(&mut waypoints, |a, b| checker.segment_clear(a, b, safety));
    let cost = path_cost(&waypoints, cfg);
    let report = RrtReport {
        iterations: cfg.max_iterations,
        nodes: tree.nodes.len(),
        cost_history: history,
        raw_cost,
    };
    Ok((
        Path {
            waypoints,
            variant,
            cost,
        },
        report,
    ))
}

fn record_best(
    tree: &Tree,
    links: &[usize],
    best: &mut Option<(usize, f64)>,
    history: &mut Vec<(usize, f64)>,
    it: usize,
) {
    let current = links
        .iter()
        .map(|&i| (i, tree.nodes[i].cost + tree.edge(i, &tree.goal)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    if let Some((i, c)) = current {
        if best.is_none_or(|(_, b)| c < b) {
            history.push((it, c));
        }
        *best = Some((i, c));
    }
}

/// Removes waypoint `i` whenever its neighbours see each other.
fn shortcut(waypoints: &mut Vec<Vec3>, clear: impl Fn(&Vec3, &Vec3) -> bool) {
    let mut i = 1;
    while i + 1 < waypoints.len() {
        if clear(&waypoints[i - 1], &waypoints[i + 1]) {
            waypoints.remove(i);
        } else {
            i += 1;
        }
    }
}
