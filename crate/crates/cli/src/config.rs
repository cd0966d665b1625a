//! JSON scenario configuration. Keys mirror the scenario fields exactly and
//! unknown keys are rejected so typos fail fast. Angles in config files are
//! degrees.

use anyhow::{anyhow, bail, Context, Result};
use parktrack::control::PidGains;
use parktrack::scene::SceneConditions;
use parktrack::sim::{ControllerKind, Scenario};
use parktrack::track::{Track, TrackSegment};
use parktrack::CameraModel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub track: TrackConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<CameraConfig>,
    /// One of "fuzzy-pid", "raw-pid", "pure-pursuit".
    pub controller: ControllerName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<GainsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lookahead_m: Option<f64>,
    pub speed_kmh: f64,
    pub duration_s: f64,
    pub conditions: Conditions,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerName {
    FuzzyPid,
    RawPid,
    PurePursuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conditions {
    Day,
    Night,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackConfig {
    pub segments: Vec<SegmentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker_width_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lane_half_width_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SegmentConfig {
    Straight { length_m: f64 },
    Arc { radius_m: f64, sweep_deg: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

/// Optional camera overrides; unset fields keep the experiment defaults.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yaw_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizontal_fov_deg: Option<f64>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).context("malformed scenario config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        if self.speed_kmh.is_nan() || self.speed_kmh <= 0.0 {
            bail!("speed_kmh must be positive");
        }
        if self.duration_s.is_nan() || self.duration_s <= 0.0 {
            bail!("duration_s must be positive");
        }
        match self.controller {
            ControllerName::PurePursuit => {
                if self.lookahead_m.is_none() {
                    bail!("pure-pursuit controller requires lookahead_m");
                }
            }
            ControllerName::FuzzyPid | ControllerName::RawPid => {
                if self.gains.is_none() {
                    bail!("pid controllers require gains");
                }
            }
        }
        Ok(())
    }

    /// Materialize the runnable scenario.
    pub fn build(&self) -> Result<Scenario> {
        let segments: Vec<TrackSegment> = self
            .track
            .segments
            .iter()
            .map(|s| match *s {
                SegmentConfig::Straight { length_m } => TrackSegment::Straight { length: length_m },
                SegmentConfig::Arc {
                    radius_m,
                    sweep_deg,
                } => TrackSegment::Arc {
                    radius: radius_m,
                    sweep: sweep_deg.to_radians(),
                },
            })
            .collect();
        let track = Track::with_geometry(
            &segments,
            self.track
                .marker_width_m
                .unwrap_or(parktrack::track::DEFAULT_MARKER_WIDTH),
            self.track
                .lane_half_width_m
                .unwrap_or(parktrack::track::DEFAULT_LANE_HALF_WIDTH),
        )
        .map_err(|e| anyhow!("{e}"))?;

        let controller = match self.controller {
            ControllerName::FuzzyPid => ControllerKind::FuzzyPid {
                gains: self.pid_gains()?,
            },
            ControllerName::RawPid => ControllerKind::RawPid {
                gains: self.pid_gains()?,
            },
            ControllerName::PurePursuit => ControllerKind::PurePursuit {
                lookahead_m: self.lookahead_m.expect("validated"),
            },
        };

        let mut scenario = Scenario::new(track, controller);
        scenario.speed_mps = self.speed_kmh / 3.6;
        scenario.duration_s = self.duration_s;
        scenario.conditions = match self.conditions {
            Conditions::Day => SceneConditions::day(self.seed),
            Conditions::Night => SceneConditions::night(self.seed),
        };
        if let Some(cam) = &self.camera {
            scenario.camera = apply_camera(cam);
        }
        Ok(scenario)
    }

    fn pid_gains(&self) -> Result<PidGains> {
        let g = self.gains.as_ref().expect("validated");
        Ok(PidGains {
            kp: g.kp,
            ki: g.ki,
            kd: g.kd,
        })
    }
}

fn apply_camera(cfg: &CameraConfig) -> CameraModel {
    let mut cam = CameraModel::default_experiment();
    if let Some(h) = cfg.height_m {
        cam.h = h;
    }
    if let Some(p) = cfg.pitch_deg {
        cam.theta = p.to_radians();
    }
    if let Some(y) = cfg.yaw_deg {
        cam.gamma = y.to_radians();
    }
    if let Some(f) = cfg.horizontal_fov_deg {
        cam.alpha_u = (f / 2.0).to_radians();
        cam.alpha_v = (cam.alpha_u.tan() * (cam.r_v as f64 / cam.r_u as f64)).atan();
    }
    cam
}
