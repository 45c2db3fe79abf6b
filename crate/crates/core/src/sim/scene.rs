use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::nav::RobotPose;

/// Square-footprint pillar; each side face is a textured vertical rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    /// Footprint centre (m).
    pub x: f64,
    pub y: f64,
    /// Side length of the footprint (m).
    pub width: f64,
    pub height: f64,
    pub texture_seed: u64,
}

impl Obstacle {
    pub fn new(x: f64, y: f64, width: f64, height: f64, texture_seed: u64) -> Self {
        Self {
            x,
            y,
            width,
            height,
            texture_seed,
        }
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let h = self.width / 2.0;
        ([self.x - h, self.y - h], [self.x + h, self.y + h])
    }

    /// Distance from a point to the footprint (0 inside).
    pub fn distance_to(&self, px: f64, py: f64) -> f64 {
        let (lo, hi) = self.bounds();
        let dx = (lo[0] - px).max(0.0).max(px - hi[0]);
        let dy = (lo[1] - py).max(0.0).max(py - hi[1]);
        dx.hypot(dy)
    }

    /// First face crossed by the ray `o + t d` with `t > 0`.
    pub(crate) fn intersect(&self, o: [f64; 2], d: [f64; 2]) -> Option<FaceHit> {
        let (lo, hi) = self.bounds();
        let mut t_enter = f64::NEG_INFINITY;
        let mut t_exit = f64::INFINITY;
        let mut enter_axis = 0;
        for a in 0..2 {
            if d[a].abs() < 1e-15 {
                if o[a] < lo[a] || o[a] > hi[a] {
                    return None;
                }
                continue;
            }
            let t1 = (lo[a] - o[a]) / d[a];
            let t2 = (hi[a] - o[a]) / d[a];
            let (near, far) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            if near > t_enter {
                t_enter = near;
                enter_axis = a;
            }
            t_exit = t_exit.min(far);
        }
        if !(t_enter <= t_exit) || t_enter <= 0.0 {
            return None;
        }
        let p = [o[0] + t_enter * d[0], o[1] + t_enter * d[1]];
        let other = 1 - enter_axis;
        let positive_side = d[enter_axis] < 0.0;
        let face = 2 * enter_axis + usize::from(positive_side);
        let dnorm = d[0].hypot(d[1]);
        Some(FaceHit {
            t: t_enter,
            s: p[other] - lo[other] + face as f64 * self.width,
            cos_incidence: d[enter_axis].abs() / dnorm,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FaceHit {
    pub t: f64,
    /// Horizontal coordinate along the face (m), distinct per face.
    pub s: f64,
    pub cos_incidence: f64,
}

/// Rectangular region the robot may occupy (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arena {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Arena {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub obstacles: Vec<Obstacle>,
    pub floor_seed: u64,
    /// Seed of the distant panorama above the horizon.
    pub backdrop_seed: u64,
    pub arena: Arena,
}

impl Scene {
    pub fn new(obstacles: Vec<Obstacle>, floor_seed: u64, backdrop_seed: u64, arena: Arena) -> Result<Self, SimError> {
        let s = Self {
            obstacles,
            floor_seed,
            backdrop_seed,
            arena,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn empty(arena: Arena) -> Self {
        Self {
            obstacles: Vec::new(),
            floor_seed: 1,
            backdrop_seed: 2,
            arena,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let a = &self.arena;
        if !(a.min_x < a.max_x && a.min_y < a.max_y) {
            return Err(SimError::InvalidScene("arena has no area".into()));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.width > 0.0 && o.height > 0.0) || !o.x.is_finite() || !o.y.is_finite() {
                return Err(SimError::InvalidScene(format!(
                    "obstacle {i}: width and height must be > 0"
                )));
            }
            let h = o.width / 2.0;
            if !(a.contains(o.x - h, o.y - h) && a.contains(o.x + h, o.y + h)) {
                return Err(SimError::InvalidScene(format!("obstacle {i} lies outside the arena")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String, SimError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }

    /// Nearest face hit along a horizontal ray, with the obstacle index.
    pub(crate) fn cast(&self, o: [f64; 2], d: [f64; 2]) -> Option<(usize, FaceHit)> {
        self.obstacles
            .iter()
            .enumerate()
            .filter_map(|(i, ob)| ob.intersect(o, d).map(|h| (i, h)))
            .min_by(|a, b| a.1.t.total_cmp(&b.1.t))
    }

    /// Whether a disc of `radius` at the pose touches any obstacle.
    pub fn collides(&self, pose: &RobotPose, radius: f64) -> bool {
        self.obstacles
            .iter()
            .any(|o| o.distance_to(pose.x, pose.y) < radius)
    }

    /// Four obstacles on the corners of a square of side `side`, centred at the
    /// origin, with textures shifted `rotation` places around the circuit.
    pub fn square_circuit(side: f64, rotation: usize) -> Self {
        let h = side / 2.0;
        let corners = [(h, -h), (h, h), (-h, h), (-h, -h)];
        let sizes = [(0.30, 0.50), (0.26, 0.45), (0.34, 0.55), (0.28, 0.40)];
        let obstacles = corners
            .iter()
            .enumerate()
            .map(|(slot, &(x, y))| {
                let k = (slot + 4 - rotation % 4) % 4;
                let (w, ht) = sizes[k];
                Obstacle::new(x, y, w, ht, 100 + k as u64)
            })
            .collect();
        let m = h + 1.0;
        Self {
            obstacles,
            floor_seed: 7,
            backdrop_seed: 8,
            arena: Arena {
                min_x: -m,
                min_y: -m,
                max_x: m,
                max_y: m,
            },
        }
    }

    /// Three obstacles in a zigzag: the start pose faces the first, and each
    /// evade turns toward the next. Textures are unseen in [`Scene::square_circuit`].
    pub fn staggered_circuit() -> Self {
        let obstacles = vec![
            Obstacle::new(1.2, 0.08, 0.34, 0.5, 201),
            Obstacle::new(2.0, -0.90, 0.34, 0.5, 202),
            Obstacle::new(2.9, 0.15, 0.34, 0.5, 203),
        ];
        Self {
            obstacles,
            floor_seed: 17,
            backdrop_seed: 18,
            arena: Arena {
                min_x: -0.5,
                min_y: -2.5,
                max_x: 5.0,
                max_y: 2.5,
            },
        }
    }

    /// Start pose used with [`Scene::staggered_circuit`].
    pub fn staggered_start() -> RobotPose {
        RobotPose::new(0.0, 0.0, 0.0)
    }
}
