use super::scene::SceneSnapshot;
use crate::dwa::DroneState;
use crate::geometry::{direction_from_angles, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Spinning multi-beam LiDAR: `azimuth_rays` evenly spaced over 360° on each
/// of `elevation_planes` planes spread over the vertical field of view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorModel {
    pub azimuth_rays: usize,
    pub elevation_planes: usize,
    pub vertical_fov_deg: f64,
    pub max_range: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            azimuth_rays: 64,
            elevation_planes: 16,
            vertical_fov_deg: 90.0,
            max_range: 10.0,
        }
    }
}

impl SensorModel {
    /// Full-resolution 32-plane, 1024-point configuration.
    pub fn full() -> Self {
        Self {
            azimuth_rays: 1024,
            elevation_planes: 32,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.azimuth_rays == 0 || self.elevation_planes == 0 {
            return Err("sensor ray counts must be at least 1".into());
        }
        if !(self.vertical_fov_deg > 0.0 && self.vertical_fov_deg <= 90.0) {
            return Err("vertical_fov_deg must lie in (0, 90]".into());
        }
        if !(self.max_range.is_finite() && self.max_range > 0.0) {
            return Err("max_range must be positive".into());
        }
        Ok(())
    }

    pub fn elevations(&self) -> Vec<f64> {
        let n = self.elevation_planes;
        if n == 1 {
            return vec![0.0];
        }
        let half = self.vertical_fov_deg.to_radians() / 2.0;
        (0..n).map(|j| -half + 2.0 * half * j as f64 / (n - 1) as f64).collect()
    }

    /// Unit ray directions in the world frame for a sensor with heading `yaw`.
    pub fn directions(&self, yaw: f64) -> Vec<Vec3> {
        let elevations = self.elevations();
        let mut out = Vec::with_capacity(self.azimuth_rays * elevations.len());
        for &el in &elevations {
            for i in 0..self.azimuth_rays {
                let az = yaw + 2.0 * PI * i as f64 / self.azimuth_rays as f64;
                out.push(direction_from_angles(az, el));
            }
        }
        out
    }
}

/// One sweep: surface returns and the endpoints of rays that found nothing
/// within range.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scan {
    pub origin: Vec3,
    pub points: Vec<Vec3>,
    pub max_range_endpoints: Vec<Vec3>,
}

/// Noise-free scan of the scene from the drone's position.
pub fn lidar_scan(scene: &SceneSnapshot, s: &DroneState, sensor: &SensorModel) -> Scan {
    let origin = s.position();
    let mut scan = Scan {
        origin,
        ..Scan::default()
    };
    for d in sensor.directions(s.yaw) {
        match scene.raycast(&origin, &d, sensor.max_range) {
            Some(t) => scan.points.push(origin + d * t),
            None => scan.max_range_endpoints.push(origin + d * sensor.max_range),
        }
    }
    scan
}
