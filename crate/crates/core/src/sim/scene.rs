use crate::geometry::{Aabb, Vec3};
use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Number of boxes used to approximate a ring.
pub const RING_SEGMENTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// `size` is the extent along the local x, y and z axes.
    Box { size: Vec3 },
    /// Vertical cylinder.
    Cylinder { radius: f64, height: f64 },
    /// Vertical ring whose opening faces the local x axis.
    Ring { major_radius: f64, tube_radius: f64 },
}

/// Constant-velocity motion starting at `start_time`, optionally halting after
/// `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Motion {
    pub velocity: Vec3,
    #[serde(default)]
    pub start_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
}

impl Motion {
    pub fn displacement(&self, t: f64) -> Vec3 {
        let active = (t - self.start_time).max(0.0);
        let active = self.duration.map_or(active, |d| active.min(d));
        self.velocity * active
    }

    pub fn is_moving(&self, t: f64) -> bool {
        t >= self.start_time && self.duration.is_none_or(|d| t < self.start_time + d)
    }
}

/// Ground-truth obstacle.
///
/// `position` is the centre of the base for boxes and cylinders and the centre
/// of the ring for rings. `yaw` rotates the shape about the vertical axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub shape: Shape,
    pub position: Vec3,
    #[serde(default)]
    pub yaw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<Motion>,
}

impl Primitive {
    pub fn new(shape: Shape, position: Vec3) -> Self {
        Self {
            label: None,
            shape,
            position,
            yaw: 0.0,
            motion: None,
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_yaw(mut self, yaw: f64) -> Self {
        self.yaw = yaw;
        self
    }

    pub fn with_motion(mut self, motion: Motion) -> Self {
        self.motion = Some(motion);
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        let dims: Vec<f64> = match self.shape {
            Shape::Box { size } => size.iter().copied().collect(),
            Shape::Cylinder { radius, height } => vec![radius, height],
            Shape::Ring {
                major_radius,
                tube_radius,
            } => {
                if tube_radius >= major_radius {
                    return Err("ring tube_radius must be smaller than major_radius".into());
                }
                vec![major_radius, tube_radius]
            }
        };
        if !dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err("dimensions must be positive".into());
        }
        if !(self.position.iter().all(|v| v.is_finite()) && self.yaw.is_finite()) {
            return Err("pose must be finite".into());
        }
        Ok(())
    }

    pub fn position_at(&self, t: f64) -> Vec3 {
        self.position + self.motion.map_or(Vec3::zeros(), |m| m.displacement(t))
    }

    pub fn is_moving(&self) -> bool {
        self.motion.is_some()
    }

    /// Solid parts making up the primitive at time `t`.
    pub fn parts_at(&self, t: f64, out: &mut Vec<Solid>) {
        let p = self.position_at(t);
        let yaw = Rotation3::from_axis_angle(&Vec3::z_axis(), self.yaw);
        match self.shape {
            Shape::Box { size } => out.push(Solid::Box {
                center: p + Vec3::new(0.0, 0.0, size[2] / 2.0),
                rotation: yaw,
                half: size / 2.0,
            }),
            Shape::Cylinder { radius, height } => out.push(Solid::Cylinder {
                base: p,
                radius,
                height,
            }),
            Shape::Ring {
                major_radius,
                tube_radius,
            } => {
                let step = 2.0 * PI / RING_SEGMENTS as f64;
                // Tangential half-length closing the loop at the outer radius.
                let half_len = (major_radius + tube_radius) * (step / 2.0).tan();
                for k in 0..RING_SEGMENTS {
                    let phi = k as f64 * step;
                    let tilt = Rotation3::from_axis_angle(&Vec3::x_axis(), phi);
                    let rotation = yaw * tilt;
                    out.push(Solid::Box {
                        center: p + rotation * Vec3::new(0.0, major_radius, 0.0),
                        rotation,
                        half: Vec3::new(tube_radius, tube_radius, half_len),
                    });
                }
            }
        }
    }
}

/// Convex building block used for ray intersection and distance queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solid {
    /// Oriented box: `rotation` maps the box frame into the world.
    Box {
        center: Vec3,
        rotation: Rotation3<f64>,
        half: Vec3,
    },
    /// Vertical cylinder standing on `base`.
    Cylinder { base: Vec3, radius: f64, height: f64 },
}

impl Solid {
    /// First surface crossing along `origin + t·dir` with `0 < t <= max`.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3, max: f64) -> Option<f64> {
        match *self {
            Solid::Box { center, rotation, half } => {
                let o = rotation.inverse_transform_vector(&(origin - center));
                let d = rotation.inverse_transform_vector(dir);
                let (t0, t1) = Aabb::new(-half, half).clip_ray(&o, &d, 0.0, max)?;
                if t0 > 0.0 {
                    Some(t0)
                } else if t1 > 0.0 && t1 < max {
                    Some(t1)
                } else {
                    None
                }
            }
            Solid::Cylinder { base, radius, height } => {
                let o = origin - base;
                let mut best: Option<f64> = None;
                let mut consider = |t: f64| {
                    if t > 0.0 && t <= max && best.is_none_or(|b| t < b) {
                        best = Some(t);
                    }
                };
                let a = dir[0] * dir[0] + dir[1] * dir[1];
                if a > 0.0 {
                    let b = 2.0 * (o[0] * dir[0] + o[1] * dir[1]);
                    let c = o[0] * o[0] + o[1] * o[1] - radius * radius;
                    let disc = b * b - 4.0 * a * c;
                    if disc >= 0.0 {
                        let sq = disc.sqrt();
                        for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                            let z = o[2] + t * dir[2];
                            if (0.0..=height).contains(&z) {
                                consider(t);
                            }
                        }
                    }
                }
                if dir[2] != 0.0 {
                    for cap in [0.0, height] {
                        let t = (cap - o[2]) / dir[2];
                        let x = o[0] + t * dir[0];
                        let y = o[1] + t * dir[1];
                        if x * x + y * y <= radius * radius {
                            consider(t);
                        }
                    }
                }
                best
            }
        }
    }

    /// Signed distance: positive outside, negative inside.
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        match *self {
            Solid::Box { center, rotation, half } => {
                let q = rotation.inverse_transform_vector(&(p - center)).abs() - half;
                let outside = q.map(|v| v.max(0.0)).norm();
                outside + q.max().min(0.0)
            }
            Solid::Cylinder { base, radius, height } => {
                let o = p - base;
                let dr = o[0].hypot(o[1]) - radius;
                let dz = (o[2] - height / 2.0).abs() - height / 2.0;
                dr.max(dz).min(0.0) + dr.max(0.0).hypot(dz.max(0.0))
            }
        }
    }
}

/// Ground-truth scene: a list of primitives evaluated at a point in time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene {
    pub primitives: Vec<Primitive>,
}

/// All solids of a scene frozen at one instant, tagged with their primitive.
#[derive(Debug, Clone, Default)]
pub struct SceneSnapshot {
    pub solids: Vec<Solid>,
    pub owner: Vec<usize>,
}

impl Scene {
    pub fn new(primitives: Vec<Primitive>) -> Self {
        Self { primitives }
    }

    pub fn at(&self, t: f64) -> SceneSnapshot {
        let mut snap = SceneSnapshot::default();
        for (i, p) in self.primitives.iter().enumerate() {
            let before = snap.solids.len();
            p.parts_at(t, &mut snap.solids);
            snap.owner.extend(std::iter::repeat_n(i, snap.solids.len() - before));
        }
        snap
    }
}

impl SceneSnapshot {
    /// Nearest surface hit within `max` along a unit direction.
    pub fn raycast(&self, origin: &Vec3, dir: &Vec3, max: f64) -> Option<f64> {
        let mut best = max;
        let mut hit = false;
        for s in &self.solids {
            if let Some(t) = s.intersect(origin, dir, best) {
                if t <= best {
                    best = t;
                    hit = true;
                }
            }
        }
        hit.then_some(best)
    }

    /// Signed distance from `p` to the nearest solid (infinite for an empty scene).
    pub fn clearance(&self, p: &Vec3) -> f64 {
        self.solids
            .iter()
            .map(|s| s.signed_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Clearance restricted to solids of the primitives selected by `keep`.
    pub fn clearance_where(&self, p: &Vec3, keep: impl Fn(usize) -> bool) -> f64 {
        self.solids
            .iter()
            .zip(&self.owner)
            .filter(|(_, o)| keep(**o))
            .map(|(s, _)| s.signed_distance(p))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_box_at(x: f64) -> Primitive {
        Primitive::new(
            Shape::Box {
                size: Vec3::repeat(1.0),
            },
            Vec3::new(x, 0.0, -0.5),
        )
    }

    #[test]
    fn box_face_two_metres_ahead() {
        let scene = Scene::new(vec![unit_box_at(2.5)]).at(0.0);
        let t = scene.raycast(&Vec3::zeros(), &Vec3::x(), 10.0).unwrap();
        assert_relative_eq!(t, 2.0, epsilon = 1e-6);
        assert!(scene.raycast(&Vec3::zeros(), &-Vec3::x(), 10.0).is_none());
        assert!(scene.raycast(&Vec3::zeros(), &Vec3::x(), 1.5).is_none());
    }

    #[test]
    fn rotated_box_distance() {
        let p = Primitive::new(
            Shape::Box {
                size: Vec3::new(0.2, 2.0, 1.0),
            },
            Vec3::zeros(),
        )
        .with_yaw(PI / 2.0);
        let snap = Scene::new(vec![p]).at(0.0);
        // Rotated by 90°, the long side now runs along x.
        assert_relative_eq!(snap.clearance(&Vec3::new(0.0, 1.1, 0.5)), 1.0, epsilon = 1e-12);
        assert_relative_eq!(snap.clearance(&Vec3::new(1.5, 0.0, 0.5)), 0.5, epsilon = 1e-12);
        assert!(snap.clearance(&Vec3::new(0.0, 0.0, 0.5)) < 0.0);
    }

    #[test]
    fn cylinder_side_and_cap() {
        let c = Solid::Cylinder {
            base: Vec3::new(3.0, 0.0, 0.0),
            radius: 0.5,
            height: 2.0,
        };
        assert_relative_eq!(
            c.intersect(&Vec3::new(0.0, 0.0, 1.0), &Vec3::x(), 10.0).unwrap(),
            2.5,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            c.intersect(&Vec3::new(3.0, 0.2, 5.0), &-Vec3::z(), 10.0).unwrap(),
            3.0,
            epsilon = 1e-12
        );
        assert!(c.intersect(&Vec3::new(0.0, 0.6, 1.0), &Vec3::x(), 10.0).is_none());
        assert_relative_eq!(c.signed_distance(&Vec3::new(3.0, 1.5, 1.0)), 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.signed_distance(&Vec3::new(3.0, 0.0, 3.0)), 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.signed_distance(&Vec3::new(3.0, 0.0, 1.0)), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn ring_inner_face_from_centre() {
        let (major, tube) = (0.8, 0.1);
        let ring = Primitive::new(
            Shape::Ring {
                major_radius: major,
                tube_radius: tube,
            },
            Vec3::new(0.0, 0.0, 2.0),
        );
        let snap = Scene::new(vec![ring]).at(0.0);
        assert_eq!(snap.solids.len(), RING_SEGMENTS);
        let step = 2.0 * PI / RING_SEGMENTS as f64;
        for k in 0..RING_SEGMENTS {
            let phi = k as f64 * step;
            let dir = Vec3::new(0.0, phi.cos(), phi.sin());
            let t = snap.raycast(&Vec3::new(0.0, 0.0, 2.0), &dir, 5.0).unwrap();
            assert_relative_eq!(t, major - tube, epsilon = 1e-9);
        }
        // Between segments the chord sits slightly further in.
        let dir = Vec3::new(0.0, (step / 2.0).cos(), (step / 2.0).sin());
        let t = snap.raycast(&Vec3::new(0.0, 0.0, 2.0), &dir, 5.0).unwrap();
        assert!(t > major - tube && t < major - tube + 0.03);
        // The opening along x is clear.
        assert!(snap.raycast(&Vec3::new(-2.0, 0.0, 2.0), &Vec3::x(), 5.0).is_none());
    }

    #[test]
    fn motion_moves_and_stops() {
        let m = Motion {
            velocity: Vec3::new(0.0, 0.3, 0.0),
            start_time: 3.0,
            duration: Some(10.0),
        };
        let p = unit_box_at(0.0).with_motion(m);
        assert_eq!(p.position_at(1.0), p.position);
        assert_relative_eq!(p.position_at(5.0)[1], 0.6, epsilon = 1e-12);
        assert_relative_eq!(p.position_at(100.0)[1], 3.0, epsilon = 1e-12);
        assert!(m.is_moving(4.0));
        assert!(!m.is_moving(14.0));
    }

    #[test]
    fn ray_hits_lie_on_surfaces() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let scene = Scene::new(vec![
            unit_box_at(2.0).with_yaw(0.4),
            Primitive::new(
                Shape::Cylinder {
                    radius: 0.3,
                    height: 1.0,
                },
                Vec3::new(-1.5, 1.0, -0.5),
            ),
            Primitive::new(
                Shape::Ring {
                    major_radius: 0.8,
                    tube_radius: 0.1,
                },
                Vec3::new(0.0, -2.0, 0.0),
            )
            .with_yaw(0.7),
        ])
        .at(0.0);
        let mut hits = 0;
        for _ in 0..2000 {
            let d = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if d.norm() < 1e-3 {
                continue;
            }
            let d = d.normalize();
            if let Some(t) = scene.raycast(&Vec3::zeros(), &d, 10.0) {
                hits += 1;
                assert!(scene.clearance(&(d * t)).abs() < 1e-9);
            }
        }
        assert!(hits > 50);
    }
}
