use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::VelocityCommand;

/// Linear and angular duty components `(|V|cos t, |V|sin t)`.
pub fn velocity_components(cmd: VelocityCommand) -> (f64, f64) {
    let (s, c) = cmd.theta.sin_cos();
    (cmd.magnitude_pct * snap(c), cmd.magnitude_pct * snap(s))
}

// cos(pi/2) and friends are ~1e-16 in floating point, not 0
fn snap(v: f64) -> f64 {
    if v.abs() < 1e-9 {
        0.0
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WheelDir {
    Forward,
    Reverse,
}

impl WheelDir {
    fn sign(self) -> f64 {
        match self {
            WheelDir::Forward => 1.0,
            WheelDir::Reverse => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WheelState {
    pub left_duty: f64,
    pub right_duty: f64,
    pub left_dir: WheelDir,
    pub right_dir: WheelDir,
}

impl WheelState {
    pub const STOPPED: Self = Self {
        left_duty: 0.0,
        right_duty: 0.0,
        left_dir: WheelDir::Forward,
        right_dir: WheelDir::Forward,
    };
}

/// Duty cycles for a command. The angular part goes to the outer wheel as a
/// duty difference; the linear part is added to both wheels and shrunk if the
/// outer wheel would exceed 100 %. Both wheels reverse when `cos theta < 0`.
pub fn apply_command(cmd: VelocityCommand) -> WheelState {
    let cmd = VelocityCommand {
        magnitude_pct: cmd.magnitude_pct.clamp(0.0, 100.0),
        ..cmd
    };
    let (v_l, v_a) = velocity_components(cmd);
    let dir = if v_l < 0.0 {
        WheelDir::Reverse
    } else {
        WheelDir::Forward
    };
    let diff = v_a.abs();
    let common = v_l.abs().min(100.0 - diff);
    let (outer, inner) = (common + diff, common);
    // a right turn (sin > 0) drives the left wheel harder
    let (left_duty, right_duty) = if v_a > 0.0 {
        (outer, inner)
    } else if v_a < 0.0 {
        (inner, outer)
    } else {
        (common, common)
    };
    WheelState {
        left_duty,
        right_duty,
        left_dir: dir,
        right_dir: dir,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotPose {
    /// Metres.
    pub x: f64,
    pub y: f64,
    /// Radians counter-clockwise from +x, kept in `[-pi, pi)`.
    pub heading: f64,
}

impl RobotPose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: wrap_angle(heading),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.heading.is_finite()
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Chassis calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveConfig {
    /// Wheel ground speed per duty percent (m/s). 0.002 gives 0.1 m/s at 50 %.
    pub kappa: f64,
    /// Distance between wheel contact lines (m).
    pub track_width: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self {
            kappa: 0.002,
            track_width: 0.153,
        }
    }
}

/// Integrates the unicycle model over `dt` seconds along the exact arc.
pub fn drive_kinematics(state: WheelState, pose: RobotPose, dt: f64, cfg: &DriveConfig) -> RobotPose {
    if !(dt > 0.0) {
        return pose;
    }
    let vl = cfg.kappa * state.left_duty * state.left_dir.sign();
    let vr = cfg.kappa * state.right_duty * state.right_dir.sign();
    let v = 0.5 * (vl + vr);
    let w = (vr - vl) / cfg.track_width;
    let h = pose.heading;
    if w.abs() < 1e-12 {
        return RobotPose {
            x: pose.x + v * dt * h.cos(),
            y: pose.y + v * dt * h.sin(),
            heading: h,
        };
    }
    let h1 = h + w * dt;
    let r = v / w;
    RobotPose {
        x: pose.x + r * (h1.sin() - h.sin()),
        y: pose.y - r * (h1.cos() - h.cos()),
        heading: wrap_angle(h1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn components() {
        assert_eq!(velocity_components(VelocityCommand { magnitude_pct: 100.0, theta: 0.0 }), (100.0, 0.0));
        assert_eq!(
            velocity_components(VelocityCommand { magnitude_pct: 100.0, theta: FRAC_PI_2 }),
            (0.0, 100.0)
        );
        assert_eq!(velocity_components(VelocityCommand::EVADE_RIGHT), (0.0, 60.0));
        assert_eq!(velocity_components(VelocityCommand::EVADE_LEFT), (0.0, -60.0));
    }

    #[test]
    fn reference_wheel_states() {
        let cruise = apply_command(VelocityCommand::CRUISE);
        assert_eq!(
            cruise,
            WheelState {
                left_duty: 50.0,
                right_duty: 50.0,
                left_dir: WheelDir::Forward,
                right_dir: WheelDir::Forward
            }
        );
        let right = apply_command(VelocityCommand::EVADE_RIGHT);
        assert_eq!((right.left_duty, right.right_duty), (60.0, 0.0));
        assert_eq!(right.left_dir, WheelDir::Forward);
        let left = apply_command(VelocityCommand::EVADE_LEFT);
        assert_eq!((left.left_duty, left.right_duty), (0.0, 60.0));
        let back = apply_command(VelocityCommand { magnitude_pct: 100.0, theta: PI });
        assert_eq!(back.left_dir, WheelDir::Reverse);
        assert_eq!(back.right_dir, WheelDir::Reverse);
        assert_eq!(back.left_duty, back.right_duty);
        assert!(back.left_duty <= 100.0);
    }

    #[test]
    fn saturation_keeps_the_differential() {
        let s = apply_command(VelocityCommand { magnitude_pct: 100.0, theta: PI / 4.0 });
        assert_abs_diff_eq!(s.left_duty, 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.left_duty - s.right_duty, 100.0 * (PI / 4.0).sin(), epsilon = 1e-12);
    }

    #[test]
    fn kinematics() {
        let cfg = DriveConfig::default();
        let p0 = RobotPose::new(1.0, 2.0, 0.3);
        let cruise = apply_command(VelocityCommand::CRUISE);
        let p1 = drive_kinematics(cruise, p0, 1.0, &cfg);
        assert_eq!(p1.heading, p0.heading);
        assert_abs_diff_eq!((p1.x - p0.x).hypot(p1.y - p0.y), 0.1, epsilon = 1e-12);

        let spin = WheelState {
            left_duty: 40.0,
            right_duty: 40.0,
            left_dir: WheelDir::Reverse,
            right_dir: WheelDir::Forward,
        };
        let p2 = drive_kinematics(spin, p0, 0.5, &cfg);
        assert_abs_diff_eq!(p2.x, p0.x, epsilon = 1e-12);
        assert_abs_diff_eq!(p2.y, p0.y, epsilon = 1e-12);
        assert!(p2.heading > p0.heading);

        assert_eq!(drive_kinematics(WheelState::STOPPED, p0, 3.0, &cfg), p0);
    }

    #[test]
    fn evades_turn_opposite_ways_equally() {
        let cfg = DriveConfig::default();
        let p0 = RobotPose::new(0.0, 0.0, 0.0);
        let r = drive_kinematics(apply_command(VelocityCommand::EVADE_RIGHT), p0, 0.2, &cfg);
        let l = drive_kinematics(apply_command(VelocityCommand::EVADE_LEFT), p0, 0.2, &cfg);
        assert!(r.heading < 0.0 && l.heading > 0.0);
        assert_abs_diff_eq!(r.heading, -l.heading, epsilon = 1e-15);
        assert_abs_diff_eq!(r.y, -l.y, epsilon = 1e-15);
    }

    #[test]
    fn arc_matches_fine_euler() {
        let cfg = DriveConfig::default();
        let s = WheelState {
            left_duty: 30.0,
            right_duty: 70.0,
            left_dir: WheelDir::Forward,
            right_dir: WheelDir::Forward,
        };
        let exact = drive_kinematics(s, RobotPose::new(0.0, 0.0, 1.0), 1.0, &cfg);
        let (mut x, mut y, mut h) = (0.0f64, 0.0f64, 1.0f64);
        let n = 100_000;
        let dt = 1.0 / n as f64;
        let (v, w) = (0.1, 0.08 / 0.153);
        for _ in 0..n {
            x += v * dt * (h + 0.5 * w * dt).cos();
            y += v * dt * (h + 0.5 * w * dt).sin();
            h += w * dt;
        }
        assert_abs_diff_eq!(exact.x, x, epsilon = 1e-9);
        assert_abs_diff_eq!(exact.y, y, epsilon = 1e-9);
        assert_abs_diff_eq!(exact.heading, h, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn command_invariants(mag in 0.0f64..=100.0, theta in -10.0f64..10.0) {
            let cmd = VelocityCommand { magnitude_pct: mag, theta };
            let (vl, va) = velocity_components(cmd);
            let (s, c) = theta.sin_cos();
            if c.abs() >= 1e-9 && s.abs() >= 1e-9 {
                prop_assert!((vl * vl + va * va - mag * mag).abs() <= 1e-9 * mag * mag.max(1.0));
            }
            let w = apply_command(cmd);
            for d in [w.left_duty, w.right_duty] {
                prop_assert!((0.0..=100.0 + 1e-12).contains(&d));
            }
            prop_assert_eq!(w.left_dir, w.right_dir);
        }

        #[test]
        fn straight_commands_are_symmetric(mag in 0.0f64..=100.0, reverse in any::<bool>()) {
            let theta = if reverse { PI } else { 0.0 };
            let w = apply_command(VelocityCommand { magnitude_pct: mag, theta });
            prop_assert_eq!(w.left_duty, w.right_duty);
            prop_assert_eq!(w.left_dir, w.right_dir);
        }
    }
}
