use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::scene::Scene;
use super::texture::Texture;
use super::SimError;
use crate::imgcore::GrayImage;
use crate::nav::RobotPose;

/// Ultrasonic span (cm).
pub const RANGE_MIN_CM: f64 = 2.0;
pub const RANGE_MAX_CM: f64 = 400.0;

/// Forward-looking pinhole camera with zero tilt, mounted on the chassis front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraModel {
    pub width: usize,
    pub height: usize,
    /// Horizontal field of view (rad).
    pub hfov: f64,
    /// Lens height above the floor (m).
    pub mount_height: f64,
    /// Lens position ahead of the pose centre (m). The range sensor sits here too.
    pub mount_forward: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            hfov: 1.05,
            mount_height: 0.10,
            mount_forward: 0.1065,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.hfov > 0.0 && self.hfov < PI) {
            return Err(SimError::InvalidCamera(format!("hfov must be in (0, pi), got {}", self.hfov)));
        }
        if self.width < 8 || self.height < 8 {
            return Err(SimError::InvalidCamera("image must be at least 8x8".into()));
        }
        if !(self.mount_height > 0.0) {
            return Err(SimError::InvalidCamera("mount height must be > 0".into()));
        }
        Ok(())
    }

    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        self.width as f64 / 2.0 / (self.hfov / 2.0).tan()
    }

    /// Lens position on the floor plane.
    pub fn lens(&self, pose: &RobotPose) -> [f64; 2] {
        let (s, c) = pose.heading.sin_cos();
        [pose.x + self.mount_forward * c, pose.y + self.mount_forward * s]
    }
}

/// Rasterizes the view from `pose`: textured floor, pillar faces and the
/// distant backdrop, nearest surface first. Intensities are in `[0, 255]`.
pub fn render(scene: &Scene, pose: &RobotPose, camera: &CameraModel) -> Result<GrayImage<f64>, SimError> {
    camera.validate()?;
    if !pose.is_finite() || !scene.arena.contains(pose.x, pose.y) {
        return Err(SimError::OutOfBounds {
            x: pose.x,
            y: pose.y,
        });
    }
    let (w, h) = (camera.width, camera.height);
    let f = camera.focal();
    let cam_h = camera.mount_height;
    let o = camera.lens(pose);
    let (sh, ch) = pose.heading.sin_cos();
    let floor = Texture::floor(scene.floor_seed);
    let backdrop = Texture::backdrop(scene.backdrop_seed);
    let faces: Vec<Texture> = scene
        .obstacles
        .iter()
        .map(|ob| Texture::obstacle(ob.texture_seed))
        .collect();
    // backdrop coordinates: metres on a unit-radius cylinder, seamless in azimuth
    let backdrop_period = 2.0 * PI;

    let mut data = vec![0.0; w * h];
    let mut hits = Vec::with_capacity(scene.obstacles.len());
    for u in 0..w {
        let r = (u as f64 + 0.5 - w as f64 / 2.0) / f;
        // forward component 1, rightward component r
        let d = [ch + r * sh, sh - r * ch];
        let dlen = d[0].hypot(d[1]);
        hits.clear();
        for (i, ob) in scene.obstacles.iter().enumerate() {
            if let Some(hit) = ob.intersect(o, d) {
                hits.push((i, hit));
            }
        }
        hits.sort_by(|a, b| a.1.t.total_cmp(&b.1.t));
        let azimuth = (pose.heading - r.atan()).rem_euclid(2.0 * PI);

        for v in 0..h {
            let up = (h as f64 / 2.0 - v as f64 - 0.5) / f;
            let t_floor = if up < 0.0 { cam_h / -up } else { f64::INFINITY };
            let mut value = None;
            for &(i, hit) in &hits {
                if hit.t >= t_floor {
                    break;
                }
                let z = cam_h + hit.t * up;
                if z <= scene.obstacles[i].height {
                    let footprint = hit.t / f / hit.cos_incidence.max(0.15);
                    value = Some(faces[i].sample(hit.s, z, footprint));
                    break;
                }
            }
            let value = value.unwrap_or_else(|| {
                if t_floor.is_finite() {
                    let px = o[0] + t_floor * d[0];
                    let py = o[1] + t_floor * d[1];
                    let range = t_floor * (dlen * dlen + up * up).sqrt();
                    let footprint = t_floor / f * (range / cam_h).min(20.0);
                    floor.sample(px, py, footprint)
                } else {
                    let elevation = (up / dlen).atan();
                    backdrop.sample_with_period(azimuth, elevation, 1.0 / f, Some(backdrop_period))
                }
            });
            data[v * w + u] = 255.0 * value;
        }
    }
    Ok(GrayImage::new(w, h, data).expect("buffer sized from the camera"))
}

/// Simulated ultrasonic reading (cm) along the heading from the sensor on the
/// chassis front, clamped to the sensor span; no echo reads as the maximum.
pub fn range_sensor(scene: &Scene, pose: &RobotPose, camera: &CameraModel) -> f64 {
    let o = camera.lens(pose);
    let d = [pose.heading.cos(), pose.heading.sin()];
    match scene.cast(o, d) {
        Some((_, hit)) => (hit.t * 100.0).clamp(RANGE_MIN_CM, RANGE_MAX_CM),
        None => RANGE_MAX_CM,
    }
}
