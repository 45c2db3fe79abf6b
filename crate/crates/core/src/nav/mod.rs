//! Steering from classifier output and flow, and the differential-drive model.

mod drive;

pub use drive::{
    apply_command, drive_kinematics, velocity_components, wrap_angle, DriveConfig, RobotPose, WheelDir, WheelState,
};

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::features::Label;
use crate::flow::FlowField;
use crate::scalar::Scalar;

/// Default evade manoeuvre length.
pub const EVADE_MS: u32 = 200;
/// PWM carrier frequency of the motor driver. It has no effect on the kinematic model.
pub const PWM_HZ: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SteerDecision {
    Straight,
    EvadeLeft { duration_ms: u32 },
    EvadeRight { duration_ms: u32 },
}

impl SteerDecision {
    pub fn is_evade(&self) -> bool {
        !matches!(self, SteerDecision::Straight)
    }

    pub fn duration_ms(&self) -> Option<u32> {
        match *self {
            SteerDecision::Straight => None,
            SteerDecision::EvadeLeft { duration_ms } | SteerDecision::EvadeRight { duration_ms } => {
                Some(duration_ms)
            }
        }
    }

    /// Cruise at 50 % straight ahead, or turn in place at 60 %.
    pub fn command(&self) -> VelocityCommand {
        match self {
            SteerDecision::Straight => VelocityCommand::CRUISE,
            SteerDecision::EvadeRight { .. } => VelocityCommand::EVADE_RIGHT,
            SteerDecision::EvadeLeft { .. } => VelocityCommand::EVADE_LEFT,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SteerDecision::Straight => "straight",
            SteerDecision::EvadeLeft { .. } => "evade_left",
            SteerDecision::EvadeRight { .. } => "evade_right",
        }
    }
}

impl fmt::Display for SteerDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Polar motion command: duty-cycle magnitude and direction.
/// `theta = pi/2` turns right, `3 pi/2` turns left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub magnitude_pct: f64,
    pub theta: f64,
}

impl VelocityCommand {
    pub const CRUISE: Self = Self {
        magnitude_pct: 50.0,
        theta: 0.0,
    };
    pub const EVADE_RIGHT: Self = Self {
        magnitude_pct: 60.0,
        theta: FRAC_PI_2,
    };
    pub const EVADE_LEFT: Self = Self {
        magnitude_pct: 60.0,
        theta: 3.0 * FRAC_PI_2,
    };
    pub const STOP: Self = Self {
        magnitude_pct: 0.0,
        theta: 0.0,
    };

    pub fn new(magnitude_pct: f64, theta: f64) -> Option<Self> {
        ((0.0..=100.0).contains(&magnitude_pct) && theta.is_finite()).then_some(Self {
            magnitude_pct,
            theta,
        })
    }
}

/// Mean tracked displacement magnitude left and right of the split column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HalfMeans {
    pub left: f64,
    pub right: f64,
}

/// Points exactly on `x = width / 2` count for neither half; an empty half has mean 0.
pub fn half_means<T: Scalar>(flow: &FlowField<T>, image_width: usize) -> HalfMeans {
    let split = image_width as f64 / 2.0;
    let (mut ls, mut ln, mut rs, mut rn) = (0.0, 0usize, 0.0, 0usize);
    for (p, d) in flow.tracked() {
        let x = p[0].as_f64();
        let m = d[0].as_f64().hypot(d[1].as_f64());
        if x < split {
            ls += m;
            ln += 1;
        } else if x > split {
            rs += m;
            rn += 1;
        }
    }
    let mean = |s: f64, n: usize| if n > 0 { s / n as f64 } else { 0.0 };
    HalfMeans {
        left: mean(ls, ln),
        right: mean(rs, rn),
    }
}

/// Straight when no obstacle; otherwise evade toward the half with less
/// apparent motion, preferring the right on an exact tie.
pub fn decide<T: Scalar>(flow: &FlowField<T>, obstacle: Label, image_width: usize) -> SteerDecision {
    decide_from_means(half_means(flow, image_width), obstacle)
}

pub fn decide_from_means(means: HalfMeans, obstacle: Label) -> SteerDecision {
    match obstacle {
        Label::Negative => SteerDecision::Straight,
        Label::Positive if means.left < means.right => SteerDecision::EvadeLeft {
            duration_ms: EVADE_MS,
        },
        Label::Positive => SteerDecision::EvadeRight {
            duration_ms: EVADE_MS,
        },
    }
}

/// One row of the per-tick decision log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub tick: usize,
    pub obstacle: i8,
    pub left_mean: f64,
    pub right_mean: f64,
    pub decision: &'static str,
    pub left_duty: f64,
    pub right_duty: f64,
}
