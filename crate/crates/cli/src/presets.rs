//! Canned experiment scenarios.
//!
//! - se-fc / se-nfc: fuzzy vs raw error fusion at 20 km/h with gains
//!   (10, 10, 4) on a closed stadium track whose arcs have a 20 m radius.
//! - set-v / set-pp: the 5 m-radius 90-degree turn at 10 km/h, tracked by
//!   fuzzy PID with gains (10, 14, 1) and by pure pursuit with an 8 m
//!   look-ahead, on a narrow 2 m road.
//! - park-day / park-night: the 8 m-radius park loop at 10 km/h with gains
//!   (20, 18, 1), in daylight and at night (dimmed ambient, headlights,
//!   heavier sensor noise).

use crate::config::{
    Conditions, ControllerName, GainsConfig, ScenarioConfig, SegmentConfig, TrackConfig,
};
use anyhow::{bail, Result};

pub const PRESET_NAMES: [&str; 6] = [
    "se-fc",
    "se-nfc",
    "set-v",
    "set-pp",
    "park-day",
    "park-night",
];

fn stadium(straight_m: f64, radius_m: f64) -> Vec<SegmentConfig> {
    vec![
        SegmentConfig::Straight {
            length_m: straight_m,
        },
        SegmentConfig::Arc {
            radius_m,
            sweep_deg: 180.0,
        },
        SegmentConfig::Straight {
            length_m: straight_m,
        },
        SegmentConfig::Arc {
            radius_m,
            sweep_deg: 180.0,
        },
    ]
}

fn turn_track() -> TrackConfig {
    TrackConfig {
        segments: vec![
            SegmentConfig::Straight { length_m: 12.0 },
            SegmentConfig::Arc {
                radius_m: 5.0,
                sweep_deg: 90.0,
            },
            SegmentConfig::Straight { length_m: 12.0 },
        ],
        marker_width_m: None,
        lane_half_width_m: Some(1.0),
    }
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let cfg = match name {
        "se-fc" | "se-nfc" => ScenarioConfig {
            name: name.to_string(),
            track: TrackConfig {
                segments: stadium(20.0, 20.0),
                marker_width_m: None,
                lane_half_width_m: None,
            },
            camera: None,
            controller: if name == "se-fc" {
                ControllerName::FuzzyPid
            } else {
                ControllerName::RawPid
            },
            gains: Some(GainsConfig {
                kp: 10.0,
                ki: 10.0,
                kd: 4.0,
            }),
            lookahead_m: None,
            speed_kmh: 20.0,
            duration_s: 40.0,
            conditions: Conditions::Day,
            seed: 42,
        },
        "set-v" => ScenarioConfig {
            name: name.to_string(),
            track: turn_track(),
            camera: None,
            controller: ControllerName::FuzzyPid,
            gains: Some(GainsConfig {
                kp: 10.0,
                ki: 14.0,
                kd: 1.0,
            }),
            lookahead_m: None,
            speed_kmh: 10.0,
            duration_s: 20.0,
            conditions: Conditions::Day,
            seed: 42,
        },
        "set-pp" => ScenarioConfig {
            name: name.to_string(),
            track: turn_track(),
            camera: None,
            controller: ControllerName::PurePursuit,
            gains: None,
            lookahead_m: Some(8.0),
            speed_kmh: 10.0,
            duration_s: 20.0,
            conditions: Conditions::Day,
            seed: 42,
        },
        "park-day" | "park-night" => ScenarioConfig {
            name: name.to_string(),
            track: TrackConfig {
                segments: stadium(20.0, 8.0),
                marker_width_m: None,
                lane_half_width_m: None,
            },
            camera: None,
            controller: ControllerName::FuzzyPid,
            gains: Some(GainsConfig {
                kp: 20.0,
                ki: 18.0,
                kd: 1.0,
            }),
            lookahead_m: None,
            speed_kmh: 10.0,
            duration_s: 40.0,
            conditions: if name == "park-day" {
                Conditions::Day
            } else {
                Conditions::Night
            },
            seed: 42,
        },
        other => bail!("unknown preset '{other}' (expected one of {PRESET_NAMES:?})"),
    };
    Ok(cfg)
}
