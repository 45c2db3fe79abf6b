use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::render::{range_sensor, render, CameraModel};
use super::scene::Scene;
use super::SimError;
use crate::features::{flow_to_feature, Dataset, LabeledSample};
use crate::flow::Pyramid;
use crate::nav::{apply_command, drive_kinematics, DriveConfig, RobotPose, VelocityCommand};
use crate::pipeline::FeatureExtractor;

/// Radius of the disc used for collision checks: half the 21.3 x 15.3 cm chassis diagonal.
pub const COLLISION_RADIUS: f64 = 0.131;

/// Supplies one motion command per tick; `None` ends the recording.
pub trait Pilot {
    fn command(&mut self, scene: &Scene, pose: &RobotPose, range_cm: f64) -> Option<VelocityCommand>;
}

/// Cruises straight ahead for a fixed number of ticks.
#[derive(Debug, Clone)]
pub struct StraightPilot {
    pub ticks: usize,
}

impl Pilot for StraightPilot {
    fn command(&mut self, _: &Scene, _: &RobotPose, _: f64) -> Option<VelocityCommand> {
        if self.ticks == 0 {
            return None;
        }
        self.ticks -= 1;
        Some(VelocityCommand::CRUISE)
    }
}

/// A leg that runs parallel to `dir` through `line`, beside the obstacle at `centre`.
#[derive(Debug, Clone, Copy)]
struct PassBy {
    centre: [f64; 2],
    line: [f64; 2],
    dir: [f64; 2],
}

impl PassBy {
    fn progress(&self, pose: &RobotPose, from: [f64; 2]) -> f64 {
        (pose.x - from[0]) * self.dir[0] + (pose.y - from[1]) * self.dir[1]
    }

    /// Pure-pursuit point half a metre ahead on the line.
    fn carrot(&self, pose: &RobotPose) -> [f64; 2] {
        let t = self.progress(pose, self.line) + 0.5;
        [self.line[0] + self.dir[0] * t, self.line[1] + self.dir[1] * t]
    }
}

/// Drives obstacle to obstacle like a remote operator: pivot with evade
/// commands until facing the next target, cruise until the range reading
/// drops below a per-approach stop distance, then move on. Some legs instead
/// pass beside the obstacle with clearance and end once it is behind.
#[derive(Debug, Clone)]
pub struct CircuitPilot {
    order: Vec<usize>,
    legs_left: usize,
    next: usize,
    target: Option<[f64; 2]>,
    stop_cm: f64,
    passing: Option<PassBy>,
    turning: bool,
    rng: ChaCha8Rng,
    script: RecordingScript,
}

impl CircuitPilot {
    pub fn new(order: Vec<usize>, script: &RecordingScript, seed: u64) -> Self {
        Self {
            legs_left: order.len() * script.laps,
            order,
            next: 0,
            target: None,
            stop_cm: 0.0,
            passing: None,
            turning: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
            script: *script,
        }
    }

    fn pick_target(&mut self, scene: &Scene, pose: &RobotPose) -> [f64; 2] {
        let ob = &scene.obstacles[self.order[self.next]];
        let (dx, dy) = (ob.x - pose.x, ob.y - pose.y);
        let len = dx.hypot(dy).max(1e-9);
        let dir = [dx / len, dy / len];
        let (lo, hi) = self.script.stop_range_cm;
        self.stop_cm = self.rng.gen_range(lo..=hi);
        if self.rng.gen_bool(self.script.pass_by_fraction) {
            // pass on the side away from the obstacle just visited
            let k = self.order.len();
            let prev = &scene.obstacles[self.order[(self.next + k - 1) % k]];
            let cross = dir[0] * (prev.y - pose.y) - dir[1] * (prev.x - pose.x);
            let side = if cross > 0.0 { -1.0 } else { 1.0 };
            let offset = side * (ob.width / 2.0 + self.script.pass_clearance);
            let line = [ob.x - dir[1] * offset, ob.y + dir[0] * offset];
            self.passing = Some(PassBy { centre: [ob.x, ob.y], line, dir });
            line
        } else {
            self.passing = None;
            let offset = self.rng.gen_range(-1.0..=1.0) * self.script.lateral_offset * ob.width / 2.0;
            [ob.x - dir[1] * offset, ob.y + dir[0] * offset]
        }
    }
}

impl Pilot for CircuitPilot {
    fn command(&mut self, scene: &Scene, pose: &RobotPose, range_cm: f64) -> Option<VelocityCommand> {
        if self.legs_left == 0 || self.order.is_empty() {
            return None;
        }
        let target = match self.target {
            Some(t) => t,
            None => {
                let t = self.pick_target(scene, pose);
                self.target = Some(t);
                self.turning = true;
                t
            }
        };
        let passed = self
            .passing
            .is_some_and(|p| p.progress(pose, p.centre) > self.script.pass_clearance);
        if passed || (!self.turning && range_cm < self.stop_cm) {
            self.legs_left -= 1;
            self.next = (self.next + 1) % self.order.len();
            self.target = None;
            return self.command(scene, pose, range_cm);
        }
        let target = self.passing.map_or(target, |p| p.carrot(pose));
        let bearing = (target[1] - pose.y).atan2(target[0] - pose.x);
        let err = crate::nav::wrap_angle(bearing - pose.heading);
        let tol = self.script.aim_tolerance;
        if err.abs() > if self.turning { tol } else { 3.0 * tol } {
            self.turning = true;
            return Some(if err > 0.0 {
                VelocityCommand::EVADE_LEFT
            } else {
                VelocityCommand::EVADE_RIGHT
            });
        }
        self.turning = false;
        Some(VelocityCommand::CRUISE)
    }
}

/// Parameters of the scripted dataset capture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecordingScript {
    /// Square circuit side (m).
    pub side: f64,
    pub laps: usize,
    /// Four texture rotations, then the same four driven in the opposite sense.
    pub recordings: usize,
    /// Keep one frame pair out of every `stride` ticks.
    pub stride: usize,
    /// Each approach ends at a range drawn uniformly from this interval (cm).
    pub stop_range_cm: (f64, f64),
    /// Aim point spread across the obstacle face, as a fraction of its half width.
    pub lateral_offset: f64,
    /// Share of legs that pass beside the obstacle instead of approaching it.
    pub pass_by_fraction: f64,
    /// Gap between the obstacle side and the aim point of a pass-by leg (m).
    pub pass_clearance: f64,
    /// Heading error accepted before cruising (rad).
    pub aim_tolerance: f64,
    /// Control tick (s).
    pub dt: f64,
    /// Safety cap on ticks per recording.
    pub max_ticks: usize,
}

impl Default for RecordingScript {
    fn default() -> Self {
        Self {
            side: 3.0,
            laps: 2,
            recordings: 8,
            stride: 3,
            stop_range_cm: (15.0, 25.0),
            lateral_offset: 0.6,
            pass_by_fraction: 0.2,
            pass_clearance: 0.35,
            aim_tolerance: 0.06,
            dt: 0.1,
            max_ticks: 6_000,
        }
    }
}

impl RecordingScript {
    pub fn validate(&self) -> Result<(), SimError> {
        let (lo, hi) = self.stop_range_cm;
        if self.laps == 0 || self.recordings == 0 || self.stride == 0 {
            return Err(SimError::InvalidScript("laps, recordings and stride must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.pass_by_fraction) || !(self.pass_clearance >= COLLISION_RADIUS) {
            return Err(SimError::InvalidScript(
                "pass_by_fraction must be in [0, 1] and pass_clearance at least the robot radius".into(),
            ));
        }
        if !(self.side > 1.0) || !(lo > 0.0 && lo <= hi) || !(self.dt > 0.0) || !(self.aim_tolerance > 0.0) {
            return Err(SimError::InvalidScript("non-positive geometry or timing".into()));
        }
        Ok(())
    }

    /// Scene, start pose and obstacle visiting order for recording `r` on the
    /// default square circuit.
    pub fn layout(&self, r: usize) -> (Scene, RobotPose, Vec<usize>) {
        self.layout_from(&Scene::square_circuit(self.side, 0), r)
    }

    /// Layout for recording `r` around `base`: obstacle appearances (size and
    /// texture) shift `r` places around the visiting order, and recordings in
    /// odd blocks of `n` drive the circuit in the opposite sense.
    pub fn layout_from(&self, base: &Scene, r: usize) -> (Scene, RobotPose, Vec<usize>) {
        let n = base.obstacles.len();
        let mut scene = base.clone();
        if n == 0 {
            return (scene, RobotPose::new(0.0, 0.0, 0.0), Vec::new());
        }
        for (slot, ob) in scene.obstacles.iter_mut().enumerate() {
            let src = &base.obstacles[(slot + n - r % n) % n];
            ob.width = src.width;
            ob.height = src.height;
            ob.texture_seed = src.texture_seed;
        }
        let reversed = (r / n) % 2 == 1;
        let order: Vec<usize> = if reversed {
            std::iter::once(0).chain((1..n).rev()).collect()
        } else {
            (0..n).collect()
        };
        // start halfway along the edge leading into the first obstacle
        let first = &scene.obstacles[order[0]];
        let prev = &scene.obstacles[order[n - 1]];
        let (sx, sy) = ((first.x + prev.x) / 2.0, (first.y + prev.y) / 2.0);
        let heading = (first.y - sy).atan2(first.x - sx);
        (scene, RobotPose::new(sx, sy, heading), order)
    }
}

/// Drives `pilot` from `start`, appending one labelled flow sample every
/// `stride` ticks to `out` under `recording`. Returns the final pose.
#[allow(clippy::too_many_arguments)]
pub fn record_with_pilot(
    scene: &Scene,
    start: RobotPose,
    camera: &CameraModel,
    extractor: &FeatureExtractor,
    pilot: &mut dyn Pilot,
    stride: usize,
    dt: f64,
    max_ticks: usize,
    recording: u32,
    out: &mut Dataset,
) -> Result<RobotPose, SimError> {
    let drive = DriveConfig::default();
    let stride = stride.max(1);
    let mut pose = start;
    let mut prev: Option<Pyramid<f64>> = None;
    for tick in 0..=max_ticks {
        let keep = tick % stride == 0;
        let needed_next = (tick + 1) % stride == 0;
        let range = range_sensor(scene, &pose, camera);
        if keep || needed_next {
            let frame = render(scene, &pose, camera).map_err(|e| SimError::at(tick, e))?;
            let pyr = extractor.prepare(&frame);
            if keep {
                if let Some(p) = &prev {
                    let flow = extractor.flow(p, &pyr).map_err(|e| SimError::at(tick, e.into()))?;
                    out.push(LabeledSample::from_range(flow_to_feature(&flow), range), recording);
                }
            }
            prev = needed_next.then_some(pyr);
        } else {
            prev = None;
        }
        let Some(cmd) = pilot.command(scene, &pose, range) else {
            return Ok(pose);
        };
        pose = drive_kinematics(apply_command(cmd), pose, dt, &drive);
        if scene.collides(&pose, COLLISION_RADIUS) {
            return Err(SimError::at(tick, SimError::Collision));
        }
        if !scene.arena.contains(pose.x, pose.y) {
            return Err(SimError::at(tick, SimError::OutOfBounds { x: pose.x, y: pose.y }));
        }
    }
    Ok(pose)
}

/// Captures the scripted multi-recording dataset on the default square circuit.
pub fn record_dataset(
    script: &RecordingScript,
    camera: &CameraModel,
    extractor: &FeatureExtractor,
    seed: u64,
) -> Result<Dataset, SimError> {
    record_dataset_in(&Scene::square_circuit(script.side, 0), script, camera, extractor, seed)
}

/// [`record_dataset`] around a caller-supplied circuit. `script.side` is unused.
pub fn record_dataset_in(
    base: &Scene,
    script: &RecordingScript,
    camera: &CameraModel,
    extractor: &FeatureExtractor,
    seed: u64,
) -> Result<Dataset, SimError> {
    script.validate()?;
    base.validate()?;
    if base.obstacles.len() < 2 {
        return Err(SimError::InvalidScene("a recording circuit needs at least two obstacles".into()));
    }
    let mut data = Dataset::default();
    for r in 0..script.recordings {
        let (scene, start, order) = script.layout_from(base, r);
        let mut pilot = CircuitPilot::new(order, script, seed.wrapping_mul(1000).wrapping_add(r as u64));
        record_with_pilot(
            &scene,
            start,
            camera,
            extractor,
            &mut pilot,
            script.stride,
            script.dt,
            script.max_ticks,
            r as u32 + 1,
            &mut data,
        )
        .map_err(|e| SimError::Recording {
            recording: r + 1,
            source: Box::new(e),
        })?;
    }
    Ok(data)
}
