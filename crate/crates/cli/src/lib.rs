//! Library half of the scenario runner: config parsing, canned presets,
//! CSV emission, and frame dumping. The binary in `main.rs` is a thin
//! argument layer over these calls so everything here is testable directly.

pub mod config;
pub mod csv;
pub mod presets;

use anyhow::{Context, Result};
use parktrack::detect::{detect_stages, DetectorState};
use parktrack::scene::render_frame;
use parktrack::sim::{run_closed_loop, RunSummary, TraceRecord};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub use config::ScenarioConfig;
pub use presets::{preset, PRESET_NAMES};

/// Outcome of one scenario run, plus the exit status it maps to.
pub struct RunOutcome {
    pub trace: Vec<TraceRecord>,
    pub summary: RunSummary,
}

impl RunOutcome {
    /// 0 when the run completed, 2 when the vehicle left the lane or fell
    /// short of an open track's end.
    pub fn exit_code(&self) -> i32 {
        if self.summary.completed {
            0
        } else {
            2
        }
    }
}

/// Execute a scenario and return its trace and summary.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let scenario = cfg.build()?;
    let (trace, summary) = run_closed_loop(&scenario).context("simulation failed")?;
    Ok(RunOutcome { trace, summary })
}

/// Human-readable summary block printed after each run.
pub fn summary_block(name: &str, outcome: &RunOutcome) -> String {
    let s = &outcome.summary;
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {name}");
    let _ = writeln!(out, "frames: {}", outcome.trace.len());
    let _ = writeln!(out, "completed: {}", s.completed);
    let _ = writeln!(out, "max_lat_err_m: {}", csv::fmt_g6(s.max_lat_err_m));
    let _ = writeln!(
        out,
        "mean_abs_lat_err_m: {}",
        csv::fmt_g6(s.mean_abs_lat_err_m)
    );
    let _ = writeln!(
        out,
        "steering_variance_deg2: {}",
        csv::fmt_g6(s.steering_variance_deg2)
    );
    let _ = writeln!(out, "mean_proc_ms: {}", csv::fmt_g6(s.mean_proc_ms));
    out
}

/// Run a scenario and write its trace CSV to `out_path`.
pub fn run_to_file(cfg: &ScenarioConfig, out_path: &Path) -> Result<RunOutcome> {
    let outcome = run_scenario(cfg)?;
    fs::write(out_path, csv::write_csv(&outcome.trace))
        .with_context(|| format!("writing {}", out_path.display()))?;
    Ok(outcome)
}

/// Re-simulate a scenario and dump the camera frame, overhead warp, and
/// binarized image for each requested frame index as
/// `<name>_<stage>_<frame>.ppm` / `.pgm` under `dir`.
pub fn dump_frames(cfg: &ScenarioConfig, frames: &[u64], dir: &Path) -> Result<usize> {
    if frames.is_empty() {
        return Ok(0);
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let scenario = cfg.build()?;
    let (trace, _) = run_closed_loop(&scenario).context("simulation failed")?;
    let max_frame = *frames.iter().max().expect("non-empty");

    // Replay deterministically: the trace holds each frame's pose, and the
    // detector state is rebuilt by running detection over every frame in
    // order.
    let mut det_state = DetectorState::default();
    let mut written = 0usize;
    for rec in &trace {
        if rec.frame > max_frame {
            break;
        }
        let pose = parktrack::Pose {
            x: rec.x_m,
            y: rec.y_m,
            heading: rec.heading_rad,
        };
        let img = render_frame(
            &scenario.camera,
            &pose,
            &scenario.track,
            &scenario.conditions,
            rec.frame,
        );
        let stages = detect_stages(&img, &scenario.camera, &mut det_state, &scenario.detector)
            .context("detection failed during dump")?;
        if frames.contains(&rec.frame) {
            let stem = |stage: &str, ext: &str| {
                dir.join(format!("{}_{stage}_{}.{ext}", cfg.name, rec.frame))
            };
            let mut f = fs::File::create(stem("camera", "ppm"))?;
            img.write_ppm(&mut f)?;
            let mut f = fs::File::create(stem("overhead", "ppm"))?;
            stages.overhead.write_ppm(&mut f)?;
            let mut f = fs::File::create(stem("binary", "pgm"))?;
            stages.binary.write_pgm(&mut f)?;
            written += 3;
        }
    }
    Ok(written)
}
