//! Closed-loop simulation: kinematic bicycle vehicle, the render-detect-
//! fuzzify-PID feedback loop (or ground-truth pure pursuit), ground-truth
//! lateral-error metrics, and per-frame tracing.
//!
//! Kinematics: with heading psi measured from +y toward +x and a steering
//! command whose positive sense is a left turn, the bicycle model is
//!   x' = v sin(psi),  y' = v cos(psi),  psi' = -(v / wheelbase) tan(steer).
//! The sign on psi' is what makes a positive command rotate the heading
//! counterclockwise (toward -x); with it, the controller's negative-on-
//! positive-error output closes the loop as negative feedback.

use crate::camera::CameraModel;
use crate::control::{
    pure_pursuit_step, Pid, PidGains, PurePursuitConfig, SteeringCommand, DEFAULT_MAX_STEER_DEG,
};
use crate::detect::{detect, DetectorConfig, DetectorState};
use crate::fuzzy::FuzzyController;
use crate::scene::{render_frame_cached, GroundMap, SceneConditions};
use crate::track::{Pose, Track};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("inconsistent scenario: {0}")]
    ConfigError(String),
    #[error("empty trace")]
    EmptyTrace,
}

/// Maximum RK4 sub-step, seconds.
const MAX_SUBSTEP_S: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// Rear-axle position, world frame.
    pub x: f64,
    pub y: f64,
    /// Radians from +y toward +x.
    pub heading: f64,
    /// Meters per second, constant per scenario.
    pub speed: f64,
    /// Current front-wheel angle, radians, positive left.
    pub steer: f64,
    pub wheelbase: f64,
}

impl VehicleState {
    pub fn pose(&self) -> Pose {
        Pose {
            x: self.x,
            y: self.y,
            heading: self.heading,
        }
    }
}

/// Advance the bicycle model by `dt` under a fixed steering command, using
/// RK4 with sub-steps no longer than 5 ms. The command applies immediately
/// (no actuator lag).
pub fn bicycle_step(state: &VehicleState, cmd: SteeringCommand, dt: f64) -> VehicleState {
    assert!(dt > 0.0);
    let steer = cmd.angle_deg.to_radians();
    let yaw_rate = -(state.speed / state.wheelbase) * steer.tan();
    let v = state.speed;

    let n = (dt / MAX_SUBSTEP_S).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let mut x = state.x;
    let mut y = state.y;
    let mut psi = state.heading;
    // Derivatives depend only on psi; psi itself integrates linearly.
    for _ in 0..n {
        let f = |p: f64| (v * p.sin(), v * p.cos());
        let (k1x, k1y) = f(psi);
        let (k2x, k2y) = f(psi + 0.5 * h * yaw_rate);
        let (k3x, k3y) = (k2x, k2y);
        let (k4x, k4y) = f(psi + h * yaw_rate);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        psi += h * yaw_rate;
    }
    VehicleState {
        x,
        y,
        heading: psi,
        speed: state.speed,
        steer,
        wheelbase: state.wheelbase,
    }
}

/// Signed perpendicular distance from the rear axle to the nearest
/// centerline point; positive when the vehicle is right of the path
/// direction.
pub fn lateral_error(state: &VehicleState, track: &Track) -> f64 {
    track.nearest(state.x, state.y).signed_lateral
}

/// Which steering source drives the loop.
#[derive(Debug, Clone, PartialEq)]
pub enum ControllerKind {
    /// Detection errors fused by the fuzzy stage, then incremental PID.
    FuzzyPid { gains: PidGains },
    /// Detection errors combined linearly (eod/40 px + eoa/10 deg), then
    /// the same PID; the ablation baseline.
    RawPid { gains: PidGains },
    /// Ground-truth-pose pure pursuit; perception is bypassed.
    PurePursuit { lookahead_m: f64 },
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub track: Track,
    pub camera: CameraModel,
    pub detector: DetectorConfig,
    pub fuzzy: FuzzyController,
    pub controller: ControllerKind,
    pub conditions: SceneConditions,
    pub speed_mps: f64,
    pub duration_s: f64,
    pub control_rate_hz: f64,
    pub wheelbase_m: f64,
    pub max_steer_deg: f64,
}

impl Scenario {
    pub fn new(track: Track, controller: ControllerKind) -> Self {
        Self {
            track,
            camera: CameraModel::default_experiment(),
            detector: DetectorConfig::default(),
            fuzzy: FuzzyController::default(),
            controller,
            conditions: SceneConditions::day(42),
            speed_mps: 10.0 / 3.6,
            duration_s: 30.0,
            control_rate_hz: 20.0,
            wheelbase_m: 2.0,
            max_steer_deg: DEFAULT_MAX_STEER_DEG,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.speed_mps.is_nan() || self.speed_mps <= 0.0 {
            return Err(SimError::ConfigError("speed must be positive".into()));
        }
        if self.duration_s.is_nan() || self.duration_s <= 0.0 {
            return Err(SimError::ConfigError("duration must be positive".into()));
        }
        if self.control_rate_hz.is_nan() || self.control_rate_hz <= 0.0 {
            return Err(SimError::ConfigError("control rate must be positive".into()));
        }
        if self.wheelbase_m.is_nan() || self.wheelbase_m <= 0.0 {
            return Err(SimError::ConfigError("wheelbase must be positive".into()));
        }
        if let ControllerKind::PurePursuit { lookahead_m } = self.controller {
            if lookahead_m.is_nan() || lookahead_m <= 0.0 {
                return Err(SimError::ConfigError("lookahead must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One row of the per-frame closed-loop log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub frame: u64,
    pub t_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub heading_rad: f64,
    pub speed_mps: f64,
    pub eod_px: f64,
    pub eoa_deg: f64,
    pub cte: f64,
    pub steer_deg: f64,
    pub lat_err_m: f64,
    /// Perception + control wall time for this frame, milliseconds.
    pub proc_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub max_lat_err_m: f64,
    pub mean_abs_lat_err_m: f64,
    pub steering_variance_deg2: f64,
    pub mean_proc_ms: f64,
    /// Stayed within the lane and, on open tracks, reached the end.
    pub completed: bool,
}

/// Statistics over a trace. `within_lane` and `reached_end` come from the
/// loop that produced the trace.
pub fn summarize(
    trace: &[TraceRecord],
    within_lane: bool,
    reached_end: bool,
) -> Result<RunSummary, SimError> {
    if trace.is_empty() {
        return Err(SimError::EmptyTrace);
    }
    let n = trace.len() as f64;
    let max_lat = trace
        .iter()
        .map(|r| r.lat_err_m.abs())
        .fold(0.0f64, f64::max);
    let mean_abs = trace.iter().map(|r| r.lat_err_m.abs()).sum::<f64>() / n;
    let steer_mean = trace.iter().map(|r| r.steer_deg).sum::<f64>() / n;
    let steering_variance = if trace.len() < 2 {
        0.0
    } else {
        trace
            .iter()
            .map(|r| (r.steer_deg - steer_mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    };
    let mean_proc = trace.iter().map(|r| r.proc_ms).sum::<f64>() / n;
    Ok(RunSummary {
        max_lat_err_m: max_lat,
        mean_abs_lat_err_m: mean_abs,
        steering_variance_deg2: steering_variance,
        mean_proc_ms: mean_proc,
        completed: within_lane && reached_end,
    })
}

/// Run the scenario at the configured control rate until the duration
/// elapses, the vehicle reaches an open track's end, or it leaves the lane.
/// Invalid detections hold the previous steering command.
pub fn run_closed_loop(scenario: &Scenario) -> Result<(Vec<TraceRecord>, RunSummary), SimError> {
    scenario.validate()?;
    let dt = 1.0 / scenario.control_rate_hz;
    let n_frames = (scenario.duration_s / dt).round() as u64;
    let track = &scenario.track;
    let lane_half = track.lane_half_width;

    let start = track.point_at(0.0);
    let mut vehicle = VehicleState {
        x: start.x,
        y: start.y,
        heading: start.heading,
        speed: scenario.speed_mps,
        steer: 0.0,
        wheelbase: scenario.wheelbase_m,
    };

    let mut pid = match &scenario.controller {
        ControllerKind::FuzzyPid { gains } | ControllerKind::RawPid { gains } => {
            Some(Pid::new(*gains, scenario.max_steer_deg))
        }
        ControllerKind::PurePursuit { .. } => None,
    };
    let pp_cfg = match &scenario.controller {
        ControllerKind::PurePursuit { lookahead_m } => Some(PurePursuitConfig {
            lookahead_m: *lookahead_m,
            wheelbase_m: scenario.wheelbase_m,
            max_steer_deg: scenario.max_steer_deg,
        }),
        _ => None,
    };

    let uses_camera = !matches!(scenario.controller, ControllerKind::PurePursuit { .. });
    let ground_map = uses_camera.then(|| GroundMap::new(&scenario.camera));
    let mut det_state = DetectorState::default();
    let mut held = SteeringCommand { angle_deg: 0.0 };
    let mut held_eod = 0.0;
    let mut held_eoa = 0.0;
    let mut held_cte = 0.0;

    let mut trace = Vec::with_capacity(n_frames as usize);
    let mut within_lane = true;
    let mut reached_end = track.is_closed();

    for frame in 0..n_frames {
        let cmd;
        let proc_ms;
        let (eod, eoa, cte);
        match &scenario.controller {
            ControllerKind::PurePursuit { .. } => {
                let t0 = Instant::now();
                match pure_pursuit_step(pp_cfg.as_ref().unwrap(), &vehicle.pose(), track) {
                    Ok(c) => cmd = c,
                    Err(_) => break,
                }
                proc_ms = t0.elapsed().as_secs_f64() * 1e3;
                (eod, eoa, cte) = (0.0, 0.0, 0.0);
            }
            ControllerKind::FuzzyPid { .. } | ControllerKind::RawPid { .. } => {
                let img = render_frame_cached(
                    ground_map.as_ref().expect("camera scenarios build the map"),
                    &vehicle.pose(),
                    track,
                    &scenario.conditions,
                    frame,
                );
                let t0 = Instant::now();
                let est = detect(
                    &img,
                    &scenario.camera,
                    &mut det_state,
                    &scenario.detector,
                )
                .map_err(|e| SimError::ConfigError(format!("detector: {e}")))?;
                if est.valid {
                    let c = match &scenario.controller {
                        ControllerKind::FuzzyPid { .. } => scenario
                            .fuzzy
                            .evaluate(est.eod_px, est.eoa_deg)
                            .expect("complete rule base always fires"),
                        _ => est.eod_px / 40.0 + est.eoa_deg / 10.0,
                    };
                    cmd = pid.as_mut().unwrap().step(c);
                    (eod, eoa, cte) = (est.eod_px, est.eoa_deg, c);
                } else {
                    cmd = held;
                    (eod, eoa, cte) = (held_eod, held_eoa, held_cte);
                }
                proc_ms = t0.elapsed().as_secs_f64() * 1e3;
            }
        }
        held = cmd;
        (held_eod, held_eoa, held_cte) = (eod, eoa, cte);

        let near = track.nearest(vehicle.x, vehicle.y);
        trace.push(TraceRecord {
            frame,
            t_s: frame as f64 * dt,
            x_m: vehicle.x,
            y_m: vehicle.y,
            heading_rad: vehicle.heading,
            speed_mps: vehicle.speed,
            eod_px: eod,
            eoa_deg: eoa,
            cte,
            steer_deg: cmd.angle_deg,
            lat_err_m: near.signed_lateral,
            proc_ms,
        });

        if near.signed_lateral.abs() > lane_half {
            within_lane = false;
            break;
        }
        if !track.is_closed() && near.s >= track.total_length() - 0.5 {
            reached_end = true;
            break;
        }

        vehicle = bicycle_step(&vehicle, cmd, dt);
    }

    let summary = summarize(&trace, within_lane, reached_end)?;
    Ok((trace, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::TrackSegment;

    fn straight_vehicle(speed: f64) -> VehicleState {
        VehicleState {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            speed,
            steer: 0.0,
            wheelbase: 2.0,
        }
    }

    #[test]
    fn straight_motion_advances_y() {
        let s = bicycle_step(
            &straight_vehicle(5.0),
            SteeringCommand { angle_deg: 0.0 },
            0.05,
        );
        assert!((s.y - 0.25).abs() < 1e-12);
        assert_eq!(s.x, 0.0);
        assert_eq!(s.heading, 0.0);
    }

    #[test]
    fn half_steps_match_full_step() {
        let cmd = SteeringCommand { angle_deg: 12.0 };
        let full = bicycle_step(&straight_vehicle(5.0), cmd, 0.05);
        let half = bicycle_step(
            &bicycle_step(&straight_vehicle(5.0), cmd, 0.025),
            cmd,
            0.025,
        );
        assert!((full.x - half.x).abs() < 1e-9);
        assert!((full.y - half.y).abs() < 1e-9);
        assert!((full.heading - half.heading).abs() < 1e-9);
    }

    #[test]
    fn displacement_matches_exact_circle_chord() {
        // tan(steer) = 0.4 on a 2 m wheelbase: radius 5 m.
        let steer_deg = 0.4f64.atan().to_degrees();
        let cmd = SteeringCommand {
            angle_deg: steer_deg,
        };
        let v = 5.0;
        let dt = 0.05;
        let s = bicycle_step(&straight_vehicle(v), cmd, dt);
        let chord = ((s.x).powi(2) + (s.y).powi(2)).sqrt();
        let radius = 2.0 / 0.4;
        let exact = 2.0 * radius * ((v * dt) / (2.0 * radius)).sin();
        assert!((chord - exact).abs() < 1e-9, "chord {chord} vs {exact}");
        // Straight motion: displacement equals v*dt outright.
        let st = bicycle_step(
            &straight_vehicle(v),
            SteeringCommand { angle_deg: 0.0 },
            dt,
        );
        assert!((st.y - v * dt).abs() < 1e-9);
    }

    #[test]
    fn full_revolution_returns_to_start() {
        let steer_deg = 0.4f64.atan().to_degrees(); // radius 5 m
        let cmd = SteeringCommand {
            angle_deg: steer_deg,
        };
        let v = 5.0;
        let radius = 5.0;
        let period = std::f64::consts::TAU * radius / v;
        let mut s = straight_vehicle(v);
        let steps = (period / 0.05).round() as usize;
        let dt = period / steps as f64;
        for _ in 0..steps {
            s = bicycle_step(&s, cmd, dt);
        }
        let err = (s.x.powi(2) + s.y.powi(2)).sqrt();
        assert!(err < 0.005 * radius, "closure error {err}");
    }

    #[test]
    fn turning_radius_law() {
        for steer_deg in [10.0f64, 21.8, 30.0] {
            let cmd = SteeringCommand {
                angle_deg: steer_deg,
            };
            let v = 2.0;
            let expected_r = 2.0 / steer_deg.to_radians().tan();
            let period = std::f64::consts::TAU * expected_r / v;
            let mut s = straight_vehicle(v);
            let mut min_x = f64::INFINITY;
            let mut max_x = f64::NEG_INFINITY;
            let steps = (period / 0.05).ceil() as usize;
            for _ in 0..steps {
                s = bicycle_step(&s, cmd, 0.05);
                min_x = min_x.min(s.x);
                max_x = max_x.max(s.x);
            }
            let r = (max_x - min_x) / 2.0;
            assert!(
                (r - expected_r).abs() / expected_r < 0.005,
                "steer {steer_deg}: {r} vs {expected_r}"
            );
        }
    }

    #[test]
    fn positive_command_turns_left() {
        let s = bicycle_step(
            &straight_vehicle(5.0),
            SteeringCommand { angle_deg: 20.0 },
            0.5,
        );
        // Left of a +y heading is -x.
        assert!(s.x < 0.0, "x = {}", s.x);
        assert!(s.heading < 0.0);
    }

    #[test]
    fn lateral_error_signs() {
        let track = Track::new(&[TrackSegment::Straight { length: 50.0 }]).unwrap();
        let mut v = straight_vehicle(5.0);
        v.y = 10.0;
        assert_eq!(lateral_error(&v, &track), 0.0);
        v.x = 1.0;
        assert!((lateral_error(&v, &track) - 1.0).abs() < 1e-12);
        // At the center of a 5 m arc the magnitude is the radius.
        let arc = Track::new(&[TrackSegment::Arc {
            radius: 5.0,
            sweep: std::f64::consts::FRAC_PI_2,
        }])
        .unwrap();
        v.x = 5.0;
        v.y = 0.0;
        assert!((lateral_error(&v, &arc).abs() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn summarize_examples() {
        let mut rec = TraceRecord {
            frame: 0,
            t_s: 0.0,
            x_m: 0.0,
            y_m: 0.0,
            heading_rad: 0.0,
            speed_mps: 5.0,
            eod_px: 0.0,
            eoa_deg: 0.0,
            cte: 0.0,
            steer_deg: 2.0,
            lat_err_m: 0.3,
            proc_ms: 1.0,
        };
        let s = summarize(&[rec], true, true).unwrap();
        assert_eq!(s.max_lat_err_m, 0.3);
        assert_eq!(s.mean_abs_lat_err_m, 0.3);
        assert_eq!(s.steering_variance_deg2, 0.0);
        assert!(s.completed);

        let mut trace = Vec::new();
        for (i, lat) in [0.1, -0.5, 0.2].iter().enumerate() {
            rec.frame = i as u64;
            rec.lat_err_m = *lat;
            trace.push(rec);
        }
        let s = summarize(&trace, true, true).unwrap();
        assert!((s.max_lat_err_m - 0.5).abs() < 1e-12);
        assert!((s.mean_abs_lat_err_m - 0.26666666666666666).abs() < 1e-12);
        assert_eq!(s.steering_variance_deg2, 0.0);

        assert_eq!(summarize(&[], true, true), Err(SimError::EmptyTrace));
    }

    #[test]
    fn scenario_validation() {
        let track = Track::new(&[TrackSegment::Straight { length: 50.0 }]).unwrap();
        let mut sc = Scenario::new(
            track,
            ControllerKind::PurePursuit { lookahead_m: 0.0 },
        );
        assert!(matches!(
            run_closed_loop(&sc),
            Err(SimError::ConfigError(_))
        ));
        sc.controller = ControllerKind::PurePursuit { lookahead_m: 8.0 };
        sc.speed_mps = -1.0;
        assert!(matches!(
            run_closed_loop(&sc),
            Err(SimError::ConfigError(_))
        ));
    }

    #[test]
    fn pure_pursuit_follows_straight_track() {
        let track = Track::new(&[TrackSegment::Straight { length: 60.0 }]).unwrap();
        let mut sc = Scenario::new(track, ControllerKind::PurePursuit { lookahead_m: 8.0 });
        sc.speed_mps = 10.0 / 3.6;
        sc.duration_s = 30.0;
        let (trace, summary) = run_closed_loop(&sc).unwrap();
        assert!(summary.completed, "{summary:?}");
        assert!(summary.max_lat_err_m < 0.05);
        // Ends at the track end, not the duration.
        assert!((trace.last().unwrap().y_m) > 55.0);
    }
}
