use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use railray::po::ScatterPolicy;
use railray_cli::commands::{cmd_bench, cmd_run, cmd_scatter_study, cmd_sweep, cmd_validate_scene};
use railray_cli::{CliError, CliResult, Overrides, ScenarioConfig};

#[derive(Parser)]
#[command(name = "railray", version, about = "Ray-traced time-variant channels along a track")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "RAILRAY_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream snapshots and write the path trace, metrics and manifest.
    Run(ScenarioArgs),
    /// Compare interpolated runs at several keyframe intervals to an exact run.
    Sweep(ScenarioArgs),
    /// Impulse responses and power split over the scatterer window.
    ScatterStudy(ScenarioArgs),
    /// Time exact and interpolated runs stage by stage.
    Bench(ScenarioArgs),
    /// Parse and check a scene file.
    ValidateScene { scene: PathBuf },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file; the bundled canyon scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    frequency_hz: Option<f64>,
    #[arg(long)]
    update_step: Option<f64>,
    #[arg(long)]
    kf_interval: Option<f64>,
    /// Trace every snapshot (keyframe interval equal to the update step).
    #[arg(long, conflicts_with = "kf_interval")]
    exact: bool,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, value_enum)]
    scatter: Option<ScatterArg>,
    /// Comma-separated keyframe intervals, seconds.
    #[arg(long, value_delimiter = ',')]
    intervals: Option<Vec<f64>>,
    #[arg(long)]
    repeats: Option<usize>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ScatterArg {
    Off,
    Direct,
    DirectAndReflection,
}

impl ScenarioArgs {
    fn resolve(&self) -> CliResult<ScenarioConfig> {
        let mut config = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::preset(),
        };
        let kf_interval = if self.exact {
            Some(self.update_step.unwrap_or(config.stream.update_step_s))
        } else {
            self.kf_interval
        };
        config.apply(&Overrides {
            scene: self.scene.clone(),
            output_dir: self.output.clone(),
            seed: self.seed,
            frequency_hz: self.frequency_hz,
            update_step_s: self.update_step,
            kf_interval_s: kf_interval,
            duration_s: self.duration,
            scatter: self.scatter.map(|s| match s {
                ScatterArg::Off => ScatterPolicy::Off,
                ScatterArg::Direct => ScatterPolicy::Direct,
                ScatterArg::DirectAndReflection => ScatterPolicy::DirectAndReflection,
            }),
            sweep_intervals_s: self.intervals.clone(),
            repeats: self.repeats,
        })?;
        Ok(config)
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    match cli.command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let r = cmd_run(&config)?;
            println!(
                "{} snapshots, {} ray-tracing invocations, {:.2} s compute",
                r.rows,
                r.stats.stream.rt_invocations,
                r.stats.compute_seconds()
            );
            for f in &r.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep(args) => {
            let config = args.resolve()?;
            let r = cmd_sweep(&config)?;
            println!(
                "reference: {} invocations, {:.2} s",
                r.reference.stream.rt_invocations,
                r.reference.compute_seconds()
            );
            for e in &r.entries {
                let vv = e.report.get(railray::Metric::PowerVv);
                println!(
                    "kf {:>5} ms: {:>5} invocations, VV power NRMSE {:.4}, normalized time {:.3}",
                    (e.stats.kf_interval * 1000.0).round(),
                    e.stats.stream.rt_invocations,
                    vv.nrmse,
                    e.report.normalized_time()
                );
            }
            println!("wrote {}", config.output_dir.display());
        }
        Command::ScatterStudy(args) => {
            let config = args.resolve()?;
            let s = cmd_scatter_study(&config)?;
            println!(
                "{} snapshots in [{}, {}] s: specular {:.3}, scattered {:.3} of total power; delay spread {:.2} ns with scatter, {:.2} ns without",
                s.snapshots,
                s.window_start_s,
                s.window_end_s,
                s.specular_fraction,
                s.scatter_fraction,
                s.mean_delay_spread_with_scatter_s * 1e9,
                s.mean_delay_spread_without_scatter_s * 1e9
            );
            println!("wrote {}", config.output_dir.display());
        }
        Command::Bench(args) => {
            let config = args.resolve()?;
            let r = cmd_bench(&config)?;
            println!("{:<13} {:<14} {:>10} {:>10}", "mode", "stage", "min s", "median s");
            for s in &r.stages {
                println!("{:<13} {:<14} {:>10.4} {:>10.4}", s.mode, s.stage, s.min, s.median);
            }
            println!(
                "ray-tracing invocations: exact {}, interpolated {}; speedup {:.2}",
                r.exact_rt_invocations, r.interpolated_rt_invocations, r.speedup
            );
        }
        Command::ValidateScene { scene } => {
            let s = cmd_validate_scene(&scene)?;
            println!(
                "{}: {} buildings, {} facades, {} vertical edges, {} scatterers",
                scene.display(),
                s.buildings,
                s.facades,
                s.edges,
                s.scatterers
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("railray: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
