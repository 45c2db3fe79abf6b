use std::io::Write;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::record::COLLISION_RADIUS;
use super::render::{range_sensor, render, CameraModel};
use super::scene::Scene;
use super::SimError;
use crate::features::Label;
use crate::flow::{FlowField, Pyramid};
use crate::imgcore::pnm::write_pgm;
use crate::nav::{
    apply_command, decide_from_means, drive_kinematics, half_means, DecisionRecord, DriveConfig, HalfMeans,
    RobotPose, SteerDecision, VelocityCommand,
};
use crate::pipeline::{FeatureExtractor, TrainedModel};

/// Anything that flags an obstacle from a flow field.
pub trait ObstacleClassifier {
    fn classify(&self, flow: &FlowField<f64>) -> Result<Label, SimError>;
}

impl ObstacleClassifier for TrainedModel {
    fn classify(&self, flow: &FlowField<f64>) -> Result<Label, SimError> {
        Ok(self.classify_flow(flow)?)
    }
}

/// Answers the same label every tick.
#[derive(Debug, Clone, Copy)]
pub struct ConstantClassifier(pub Label);

impl ObstacleClassifier for ConstantClassifier {
    fn classify(&self, _: &FlowField<f64>) -> Result<Label, SimError> {
        Ok(self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClosedLoopConfig {
    pub camera: CameraModel,
    pub drive: DriveConfig,
    pub max_steps: usize,
    /// Control tick for straight motion (s).
    pub dt: f64,
    /// Multiplier on every command magnitude; 0 keeps the robot still.
    pub duty_scale: f64,
    pub collision_radius: f64,
    /// Write every rendered frame as `frame_NNNNN.pgm` here.
    pub frame_dir: Option<PathBuf>,
}

impl Default for ClosedLoopConfig {
    fn default() -> Self {
        Self {
            camera: CameraModel::default(),
            drive: DriveConfig::default(),
            max_steps: 800,
            dt: 0.1,
            duty_scale: 1.0,
            collision_radius: COLLISION_RADIUS,
            frame_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxSteps,
    ArenaExit,
    Collision,
}

/// One row of the trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub range_cm: f64,
    /// Classifier output, empty on reference-capture steps.
    pub prediction: Option<i8>,
    pub decision: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedLoopOutcome {
    pub trajectory: Vec<TrajectoryRecord>,
    pub decisions: Vec<DecisionRecord>,
    pub evades: Vec<(usize, SteerDecision)>,
    pub collisions: usize,
    pub termination: Termination,
    pub final_pose: RobotPose,
}

/// Default gap (steps) separating two evade episodes.
pub const EPISODE_GAP: usize = 10;

/// A run of evades close together in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EvadeEpisode {
    pub first_step: usize,
    pub last_step: usize,
    pub left: usize,
    pub right: usize,
    first_right: bool,
}

impl EvadeEpisode {
    pub fn direction(&self) -> Side {
        if self.right > self.left || (self.right == self.left && self.first_right) {
            Side::Right
        } else {
            Side::Left
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl ClosedLoopOutcome {
    /// Groups evades into manoeuvres. Evades less than `gap` steps apart belong
    /// to the same episode, whichever way they turn; the episode direction is
    /// the side that received more evades (the first evade breaks a tie).
    pub fn evade_episodes(&self, gap: usize) -> Vec<EvadeEpisode> {
        let mut out: Vec<EvadeEpisode> = Vec::new();
        for &(step, d) in &self.evades {
            let right = matches!(d, SteerDecision::EvadeRight { .. });
            match out.last_mut() {
                Some(e) if step - e.last_step < gap => {
                    e.last_step = step;
                    if right {
                        e.right += 1;
                    } else {
                        e.left += 1;
                    }
                }
                _ => out.push(EvadeEpisode {
                    first_step: step,
                    last_step: step,
                    left: usize::from(!right),
                    right: usize::from(right),
                    first_right: right,
                }),
            }
        }
        out
    }

    /// Episode directions with repeats of the same side collapsed, i.e. the
    /// sequence of sides the robot swerved away from.
    pub fn swerve_sequence(&self, gap: usize) -> Vec<Side> {
        let mut out: Vec<Side> = Vec::new();
        for e in self.evade_episodes(gap) {
            if out.last() != Some(&e.direction()) {
                out.push(e.direction());
            }
        }
        out
    }

    /// Columns: step, x, y, heading, range_cm, prediction, decision.
    pub fn write_trajectory_csv<W: Write>(&self, writer: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.trajectory {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Columns: tick, obstacle, left_mean, right_mean, decision, left_duty, right_duty.
    pub fn write_decision_csv<W: Write>(&self, writer: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.decisions {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn scaled(cmd: VelocityCommand, k: f64) -> VelocityCommand {
    VelocityCommand {
        magnitude_pct: (cmd.magnitude_pct * k).clamp(0.0, 100.0),
        ..cmd
    }
}

/// Largest start offset drawn by [`perturbed_start`], across the heading (m).
pub const START_JITTER_M: f64 = 0.03;
/// Largest heading offset drawn by [`perturbed_start`] (rad).
pub const START_JITTER_RAD: f64 = 0.03;

/// `start` shifted sideways and rotated by small uniform offsets drawn from `seed`.
pub fn perturbed_start(start: RobotPose, seed: u64) -> RobotPose {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = rng.gen_range(-START_JITTER_M..START_JITTER_M);
    let turn = rng.gen_range(-START_JITTER_RAD..START_JITTER_RAD);
    let (s, c) = start.heading.sin_cos();
    RobotPose::new(start.x - s * side, start.y + c * side, start.heading + turn)
}

/// Autonomous run: render, flow against the previous frame, classify,
/// decide, drive. After an evade the next step only captures a fresh
/// reference frame while cruising, since flow across a turn is not comparable.
pub fn run_closed_loop(
    scene: &Scene,
    start: RobotPose,
    classifier: &dyn ObstacleClassifier,
    extractor: &FeatureExtractor,
    cfg: &ClosedLoopConfig,
) -> Result<ClosedLoopOutcome, SimError> {
    let cam = &cfg.camera;
    if extractor.dims() != (cam.width, cam.height) {
        return Err(SimError::InvalidCamera(format!(
            "extractor expects {:?}, camera renders {}x{}",
            extractor.dims(),
            cam.width,
            cam.height
        )));
    }
    if let Some(dir) = &cfg.frame_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut pose = start;
    let mut prev: Option<Pyramid<f64>> = None;
    let mut trajectory = Vec::new();
    let mut decisions = Vec::new();
    let mut evades = Vec::new();
    let mut termination = Termination::MaxSteps;
    let mut collisions = 0;

    for step in 0..cfg.max_steps {
        if !scene.arena.contains(pose.x, pose.y) {
            termination = Termination::ArenaExit;
            break;
        }
        let range = range_sensor(scene, &pose, cam);
        let frame = render(scene, &pose, cam).map_err(|e| SimError::at(step, e))?;
        if let Some(dir) = &cfg.frame_dir {
            write_pgm(dir.join(format!("frame_{step:05}.pgm")), &frame)?;
        }
        let pyr = extractor.prepare(&frame);

        let (prediction, means, decision) = match &prev {
            Some(p) => {
                let flow = extractor.flow(p, &pyr).map_err(|e| SimError::at(step, e.into()))?;
                let label = classifier.classify(&flow).map_err(|e| SimError::at(step, e))?;
                let means = half_means(&flow, cam.width);
                (Some(label), means, decide_from_means(means, label))
            }
            None => (None, HalfMeans::default(), SteerDecision::Straight),
        };
        let wheels = apply_command(scaled(decision.command(), cfg.duty_scale));
        trajectory.push(TrajectoryRecord {
            step,
            x: pose.x,
            y: pose.y,
            heading: pose.heading,
            range_cm: range,
            prediction: prediction.map(Label::as_i8),
            decision: decision.name().to_string(),
        });
        if let Some(label) = prediction {
            decisions.push(DecisionRecord {
                tick: step,
                obstacle: label.as_i8(),
                left_mean: means.left,
                right_mean: means.right,
                decision: decision.name(),
                left_duty: wheels.left_duty,
                right_duty: wheels.right_duty,
            });
        }
        if decision.is_evade() {
            evades.push((step, decision));
        }

        let duration = decision
            .duration_ms()
            .map(|ms| ms as f64 / 1000.0)
            .unwrap_or(cfg.dt);
        // integrate in short slices so contact is caught mid-manoeuvre
        let slices = (duration / 0.02).ceil().max(1.0) as usize;
        let mut hit = false;
        for _ in 0..slices {
            pose = drive_kinematics(wheels, pose, duration / slices as f64, &cfg.drive);
            if scene.collides(&pose, cfg.collision_radius) {
                hit = true;
                break;
            }
        }
        prev = (!decision.is_evade()).then_some(pyr);
        if hit {
            collisions += 1;
            termination = Termination::Collision;
            trajectory.push(TrajectoryRecord {
                step: step + 1,
                x: pose.x,
                y: pose.y,
                heading: pose.heading,
                range_cm: range_sensor(scene, &pose, cam),
                prediction: None,
                decision: "collision".to_string(),
            });
            break;
        }
    }
    Ok(ClosedLoopOutcome {
        trajectory,
        decisions,
        evades,
        collisions,
        termination,
        final_pose: pose,
    })
}
