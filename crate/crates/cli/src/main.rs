//! `objrender` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use objrender::demo::{write_demo, DemoKind};
use objrender::engine::{EngineOptions, DEFAULT_SEED};
use objrender::jobs::{
    cmd_devices, cmd_probe, cmd_render, cmd_validate, dump_drives, JobError, RenderJob, EXIT_FAILURE, EXIT_UNREADABLE,
};
use objrender::{load_scenario, load_scene};

#[derive(Parser)]
#[command(name = "objrender", version, about = "Object-based audio renderer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene to one output channel per speaker.
    Render {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Adaptation rulebook (bundled rulebook if omitted).
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Renderer selection table (bundled table if omitted).
        #[arg(long)]
        select: Option<PathBuf>,
        /// Output WAV; `<stem>.report.json` and `<stem>.metrics.csv` go next to it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1024)]
        block: usize,
        /// Crossfade duration in seconds.
        #[arg(long, default_value_t = 1.0)]
        xfade: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        listener: Option<String>,
        /// Write the gain vectors, decode matrices and filters used to this file.
        #[arg(long, value_name = "PATH")]
        dump_drives: Option<PathBuf>,
    },
    /// Check a scene and a scenario; exit 1 on violations, 2 if unreadable.
    Validate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Renderer feasibility for a reference object at eight directions.
    Probe {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Speaker layout assembled from a device config.
    Devices {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a synthetic demo scene, scenario, rulebook and selection table.
    Demo {
        #[arg(long)]
        out: PathBuf,
        /// basic or narrator
        #[arg(long, default_value = "basic")]
        kind: DemoKind,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn fail(e: &JobError, code: i32) -> ExitCode {
    eprintln!("error: {}", e.diagnostic());
    ExitCode::from(code as u8)
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn run(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Render {
            scene,
            scenario,
            rules,
            select,
            out,
            block,
            xfade,
            seed,
            listener,
            dump_drives: dump,
        } => {
            let job = RenderJob {
                scene,
                scenario,
                rules,
                select,
                out,
                options: EngineOptions {
                    block_size: block,
                    crossfade_s: xfade,
                    seed,
                    listener,
                    capture_objects: false,
                },
            };
            let report = match cmd_render(&job) {
                Ok(r) => r,
                Err(e) => return fail(&e, EXIT_FAILURE),
            };
            if let Some(path) = dump {
                let written = load_scene(&job.scene)
                    .map_err(JobError::from)
                    .and_then(|s| {
                        let file = load_scenario(&job.scenario)?;
                        let layout = file.scenario(job.options.listener.as_deref())?.layout;
                        Ok(dump_drives(&report.intervals, &s, &layout))
                    })
                    .and_then(|d| {
                        std::fs::write(&path, to_json(&d) + "\n").map_err(|e| JobError::Output {
                            path: path.clone(),
                            message: e.to_string(),
                        })
                    });
                if let Err(e) = written {
                    return fail(&e, EXIT_FAILURE);
                }
            }
            println!(
                "wrote {} ({} channels, {} intervals, {:.2} s)",
                job.out.display(),
                report.speaker_ids.len(),
                report.intervals.len(),
                report.timing.render_s
            );
            ExitCode::SUCCESS
        }
        Command::Validate { scene, scenario, json } => match cmd_validate(&scene, &scenario) {
            Ok(records) => {
                if json {
                    println!("{}", to_json(&records));
                } else if records.is_empty() {
                    println!("ok");
                } else {
                    records.iter().for_each(|r| println!("{r}"));
                }
                if records.is_empty() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => fail(&e, EXIT_UNREADABLE),
        },
        Command::Probe { scenario, json } => match cmd_probe(&scenario) {
            Ok(t) if json => {
                println!("{}", to_json(&t));
                ExitCode::SUCCESS
            }
            Ok(t) => {
                print!("{}", t.to_text());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e, EXIT_FAILURE),
        },
        Command::Devices { config } => match cmd_devices(&config) {
            Ok(layout) => {
                println!("{}", to_json(&layout));
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e, EXIT_FAILURE),
        },
        Command::Demo { out, kind, seed } => match write_demo(&out, kind, seed) {
            Ok(p) => {
                println!("{}", p.scene.display());
                println!("{}", p.scenario.display());
                println!("{}", p.rules.display());
                println!("{}", p.select.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&JobError::from(e), EXIT_FAILURE),
        },
    }
}

fn main() -> ExitCode {
    run(Cli::parse())
}
