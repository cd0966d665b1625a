//! Monocular visual path-tracking control with a synthetic park-scene
//! simulator.
//!
//! The library covers the full perception-control loop of a camera-only
//! lateral controller:
//!
//! - [`camera`]: forward/reverse ground-plane perspective transforms and the
//!   overhead (bird's-eye) warp built on them.
//! - [`scene`]: a procedural track world and deterministic camera renderer
//!   that stands in for the original engine-rendered test scene.
//! - [`detect`]: central-line extraction from the overhead view (color
//!   channels, CLAHE, channel-agreement binarization, Kalman-tracked
//!   sliding windows, polynomial fit) yielding the two image errors EOD and
//!   EOA.
//! - [`fuzzy`]: Mamdani fusion of EOD/EOA into a single cross-track error.
//! - [`control`]: the increment-based PID over that error, plus a
//!   pure-pursuit baseline.
//! - [`sim`]: the kinematic bicycle vehicle and the 20 Hz closed loop with
//!   per-frame tracing and run metrics.

pub mod camera;
pub mod control;
pub mod detect;
pub mod fuzzy;
pub mod image;
pub mod scene;
pub mod sim;
pub mod track;

pub use camera::{CameraModel, GroundPoint, GroundRegion, PixelCoord};
pub use control::{Pid, PidGains, PurePursuitConfig, SteeringCommand};
pub use detect::{DetectorConfig, DetectorState, LaneEstimate};
pub use fuzzy::FuzzyController;
pub use image::{GrayImage, Image};
pub use scene::SceneConditions;
pub use sim::{run_closed_loop, ControllerKind, RunSummary, Scenario, TraceRecord};
pub use track::{Pose, Track, TrackSegment};
