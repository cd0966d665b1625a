use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use parktrack_cli::config::{ControllerName, ScenarioConfig};
use parktrack_cli::{dump_frames, preset, run_to_file, summary_block, PRESET_NAMES};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "parktrack",
    about = "Closed-loop simulator for a camera-only path-tracking controller",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace CSV.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file (JSON).
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Canned scenario name: se-fc, se-nfc, set-v, set-pp, park-day,
    /// park-night.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Trace CSV output path (directory when --all-presets is set).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Override the scenario RNG seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override the controller: fuzzy-pid, raw-pid, pure-pursuit.
    #[arg(long, value_name = "NAME")]
    controller: Option<String>,
    /// Shortcut for --controller raw-pid.
    #[arg(long, conflicts_with = "controller")]
    no_fuzzy: bool,
    /// Comma-separated frame indices whose pipeline images are dumped.
    #[arg(long, value_name = "LIST", requires = "dump_dir")]
    dump_frames: Option<String>,
    /// Directory for dumped frames.
    #[arg(long, value_name = "PATH")]
    dump_dir: Option<PathBuf>,
    /// Run every preset, writing <out>/<name>.csv each.
    #[arg(long, conflicts_with_all = ["config", "preset"])]
    all_presets: bool,
}

fn load_config(args: &RunArgs) -> Result<ScenarioConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            ScenarioConfig::from_json(&text)?
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => bail!("one of --config or --preset is required"),
        (Some(_), Some(_)) => unreachable!("clap conflict"),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.no_fuzzy {
        cfg.controller = ControllerName::RawPid;
    }
    if let Some(name) = &args.controller {
        cfg.controller = match name.as_str() {
            "fuzzy-pid" => ControllerName::FuzzyPid,
            "raw-pid" => ControllerName::RawPid,
            "pure-pursuit" => ControllerName::PurePursuit,
            other => bail!("unknown controller '{other}'"),
        };
        if cfg.controller == ControllerName::PurePursuit && cfg.lookahead_m.is_none() {
            cfg.lookahead_m = Some(8.0);
        }
    }
    // Re-validate after overrides.
    ScenarioConfig::from_json(&cfg.to_json())
}

fn parse_frame_list(list: &str) -> Result<Vec<u64>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| anyhow!("bad frame index '{s}'"))
        })
        .collect()
}

fn run(args: &RunArgs) -> Result<i32> {
    if args.all_presets {
        std::fs::create_dir_all(&args.out)
            .with_context(|| format!("creating {}", args.out.display()))?;
        for name in PRESET_NAMES {
            let cfg = {
                let mut c = preset(name)?;
                if let Some(seed) = args.seed {
                    c.seed = seed;
                }
                c
            };
            let out_path = args.out.join(format!("{name}.csv"));
            let outcome = run_to_file(&cfg, &out_path)?;
            print!("{}", summary_block(name, &outcome));
            println!("trace: {}", out_path.display());
        }
        return Ok(0);
    }

    let cfg = load_config(args)?;
    if let (Some(list), Some(dir)) = (&args.dump_frames, &args.dump_dir) {
        let frames = parse_frame_list(list)?;
        let n = dump_frames(&cfg, &frames, dir)?;
        println!("dumped {n} images to {}", dir.display());
    }
    let outcome = run_to_file(&cfg, &args.out)?;
    print!("{}", summary_block(&cfg.name, &outcome));
    println!("trace: {}", args.out.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
