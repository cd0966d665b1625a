//! Steering command generation: the increment-based PID over the fuzzy
//! cross-track error, and the geometric pure-pursuit baseline.
//!
//! The PID output is recomputed each step from three error terms:
//!   p = cte[n] - cte[n-1]
//!   i = cte[n]
//!   d = cte[n] - 2*cte[n-1] + cte[n-2]
//!   steering = -(Kp*p + Ki*i + Kd*d)
//! A positive command is a left turn (counterclockwise yaw), which is why a
//! persistently positive cross-track error (path to the right) steers right
//! through the leading minus.

use crate::track::{Pose, Track};
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ControlError {
    /// Open track exhausted: no centerline point remains ahead of the
    /// vehicle to aim at.
    #[error("no pure-pursuit goal point ahead on the open track")]
    NoGoalPoint,
}

pub const DEFAULT_MAX_STEER_DEG: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

/// Last two cross-track errors; both zero before the first step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PidState {
    pub cte_n1: f64,
    pub cte_n2: f64,
}

/// Front-wheel steering command in degrees, clamped to the actuator limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringCommand {
    pub angle_deg: f64,
}

#[derive(Debug, Clone)]
pub struct Pid {
    pub gains: PidGains,
    pub max_steer_deg: f64,
    state: PidState,
}

impl Pid {
    pub fn new(gains: PidGains, max_steer_deg: f64) -> Self {
        Self {
            gains,
            max_steer_deg,
            state: PidState::default(),
        }
    }

    pub fn state(&self) -> PidState {
        self.state
    }

    /// One controller step: returns the pre-clamp steering value and shifts
    /// the error history.
    pub fn step_unclamped(&mut self, cte: f64) -> f64 {
        let p_error = cte - self.state.cte_n1;
        let i_error = cte;
        let d_error = cte - 2.0 * self.state.cte_n1 + self.state.cte_n2;
        self.state.cte_n2 = self.state.cte_n1;
        self.state.cte_n1 = cte;
        -(self.gains.kp * p_error + self.gains.ki * i_error + self.gains.kd * d_error)
    }

    /// One controller step with the actuator clamp applied.
    pub fn step(&mut self, cte: f64) -> SteeringCommand {
        let raw = self.step_unclamped(cte);
        SteeringCommand {
            angle_deg: raw.clamp(-self.max_steer_deg, self.max_steer_deg),
        }
    }

    /// Zero the error history.
    pub fn reset(&mut self) {
        self.state = PidState::default();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurePursuitConfig {
    /// Look-ahead arc length along the path, meters.
    pub lookahead_m: f64,
    pub wheelbase_m: f64,
    pub max_steer_deg: f64,
}

/// Geometric pure pursuit: aim at the centerline point one look-ahead arc
/// length past the nearest point (wrapping on closed tracks, clamping to the
/// end on open ones), then steer for the circle through that goal:
/// kappa = 2 sin(alpha) / L_d, steering = atan(wheelbase * kappa).
/// The bearing alpha is positive when the goal lies to the vehicle's left,
/// matching the positive-command-turns-left convention.
pub fn pure_pursuit_step(
    cfg: &PurePursuitConfig,
    pose: &Pose,
    track: &Track,
) -> Result<SteeringCommand, ControlError> {
    let near = track.nearest(pose.x, pose.y);
    let total = track.total_length();
    let s_goal = if track.is_closed() {
        (near.s + cfg.lookahead_m).rem_euclid(total)
    } else {
        if near.s >= total - 1e-9 {
            return Err(ControlError::NoGoalPoint);
        }
        (near.s + cfg.lookahead_m).min(total)
    };
    let goal = track.point_at(s_goal);
    let gx = goal.x - pose.x;
    let gy = goal.y - pose.y;
    let (fx, fy) = pose.direction();
    let (rx, ry) = pose.right_normal();
    let forward = gx * fx + gy * fy;
    let left = -(gx * rx + gy * ry);
    let alpha = left.atan2(forward);
    let kappa = 2.0 * alpha.sin() / cfg.lookahead_m;
    let steer_deg = (cfg.wheelbase_m * kappa).atan().to_degrees();
    Ok(SteeringCommand {
        angle_deg: steer_deg.clamp(-cfg.max_steer_deg, cfg.max_steer_deg),
    })
}

/// Steering angle for a goal at a known bearing, exposed for the geometric
/// unit checks.
pub fn pure_pursuit_from_bearing(cfg: &PurePursuitConfig, alpha_rad: f64) -> SteeringCommand {
    let kappa = 2.0 * alpha_rad.sin() / cfg.lookahead_m;
    let steer_deg = (cfg.wheelbase_m * kappa).atan().to_degrees();
    SteeringCommand {
        angle_deg: steer_deg.clamp(-cfg.max_steer_deg, cfg.max_steer_deg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::TrackSegment;
    use proptest::prelude::*;

    fn paper_gains() -> PidGains {
        PidGains {
            kp: 10.0,
            ki: 10.0,
            kd: 4.0,
        }
    }

    #[test]
    fn zero_cte_sequence_outputs_zero() {
        let mut pid = Pid::new(paper_gains(), DEFAULT_MAX_STEER_DEG);
        for _ in 0..10 {
            assert_eq!(pid.step(0.0).angle_deg, 0.0);
        }
    }

    #[test]
    fn first_and_second_step_worked_values() {
        let mut pid = Pid::new(paper_gains(), DEFAULT_MAX_STEER_DEG);
        // First step, cte = 1: p = i = d = 1, output -(10 + 10 + 4) = -24.
        assert_eq!(pid.step(1.0).angle_deg, -24.0);
        // Second step, cte = 1 again: p = 0, i = 1, d = -1 -> -6.
        assert_eq!(pid.step(1.0).angle_deg, -6.0);
    }

    #[test]
    fn reset_restores_first_step_behavior() {
        let mut pid = Pid::new(paper_gains(), DEFAULT_MAX_STEER_DEG);
        pid.step(3.0);
        pid.step(-2.0);
        pid.reset();
        assert_eq!(pid.state(), PidState::default());
        assert_eq!(pid.step(1.0).angle_deg, -24.0);
        pid.reset();
        pid.reset();
        assert_eq!(pid.state(), PidState::default());
    }

    #[test]
    fn clamp_applies_after_output() {
        let mut pid = Pid::new(paper_gains(), DEFAULT_MAX_STEER_DEG);
        assert_eq!(pid.step(6.0).angle_deg, -30.0);
    }

    #[test]
    fn persistent_positive_cte_gives_negative_steering() {
        let mut pid = Pid::new(paper_gains(), DEFAULT_MAX_STEER_DEG);
        for _ in 0..50 {
            assert!(pid.step(0.8).angle_deg < 0.0);
        }
    }

    #[test]
    fn pure_pursuit_bearing_cases() {
        let cfg = PurePursuitConfig {
            lookahead_m: 8.0,
            wheelbase_m: 2.0,
            max_steer_deg: 30.0,
        };
        assert_eq!(pure_pursuit_from_bearing(&cfg, 0.0).angle_deg, 0.0);
        // alpha = 30 deg: kappa = 2*0.5/8 = 0.125, atan(2*0.125) = 14.036 deg.
        let c = pure_pursuit_from_bearing(&cfg, 30.0_f64.to_radians());
        assert!((c.angle_deg - 14.036243467926479).abs() < 1e-9);
        // Mirrored bearing negates the command.
        let m = pure_pursuit_from_bearing(&cfg, -30.0_f64.to_radians());
        assert!((c.angle_deg + m.angle_deg).abs() < 1e-12);
        // Short look-ahead at 90 degrees clamps.
        let tight = PurePursuitConfig {
            lookahead_m: 1.0,
            ..cfg
        };
        assert_eq!(
            pure_pursuit_from_bearing(&tight, 90.0_f64.to_radians()).angle_deg,
            30.0
        );
    }

    #[test]
    fn pure_pursuit_tracks_goal_side() {
        let cfg = PurePursuitConfig {
            lookahead_m: 8.0,
            wheelbase_m: 2.0,
            max_steer_deg: 30.0,
        };
        let track = Track::new(&[TrackSegment::Straight { length: 100.0 }]).unwrap();
        // Vehicle right of the path, heading along it: goal is ahead-left,
        // command must be a left (positive) turn.
        let pose = Pose {
            x: 1.0,
            y: 10.0,
            heading: 0.0,
        };
        let cmd = pure_pursuit_step(&cfg, &pose, &track).unwrap();
        assert!(cmd.angle_deg > 0.0);
        // Statelessness: identical pose gives the identical command.
        let again = pure_pursuit_step(&cfg, &pose, &track).unwrap();
        assert_eq!(cmd, again);
    }

    #[test]
    fn pure_pursuit_open_track_exhausted() {
        let cfg = PurePursuitConfig {
            lookahead_m: 8.0,
            wheelbase_m: 2.0,
            max_steer_deg: 30.0,
        };
        let track = Track::new(&[TrackSegment::Straight { length: 20.0 }]).unwrap();
        let at_end = Pose {
            x: 0.0,
            y: 25.0,
            heading: 0.0,
        };
        assert_eq!(
            pure_pursuit_step(&cfg, &at_end, &track),
            Err(ControlError::NoGoalPoint)
        );
        // Near but not past the end: goal clamps to the endpoint.
        let before_end = Pose {
            x: 0.0,
            y: 15.0,
            heading: 0.0,
        };
        assert!(pure_pursuit_step(&cfg, &before_end, &track).is_ok());
    }

    proptest! {
        /// Pre-clamp output is linear in the CTE history: doubling every
        /// input doubles every output, checked against an independent
        /// transcription of the difference equations.
        #[test]
        fn pid_linearity_and_reference(ctes in proptest::collection::vec(-8.0f64..8.0, 1..40)) {
            let gains = paper_gains();
            let mut pid = Pid::new(gains, DEFAULT_MAX_STEER_DEG);
            let mut pid2 = Pid::new(gains, DEFAULT_MAX_STEER_DEG);
            let mut n1 = 0.0;
            let mut n2 = 0.0;
            for &cte in &ctes {
                let got = pid.step_unclamped(cte);
                let doubled = pid2.step_unclamped(2.0 * cte);
                let expected = -(gains.kp * (cte - n1)
                    + gains.ki * cte
                    + gains.kd * (cte - 2.0 * n1 + n2));
                n2 = n1;
                n1 = cte;
                prop_assert!((got - expected).abs() < 1e-12);
                prop_assert!((doubled - 2.0 * got).abs() < 1e-12);
            }
        }
    }
}
