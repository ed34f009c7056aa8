//! Command-line harness: catalog generation, single episodes, training and
//! the benchmark sweep.
//!
//! Exit codes: 0 on success, 2 on usage errors (flag parsing/validation),
//! 1 on runtime failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use socsim::bench::{self, BenchConfig, SchedulerKind};
use socsim::config::{self, SimConfigFile};
use socsim::eim::EimMode;
use socsim::kernel::{self, EpisodeConfig};
use socsim::metrics;
use socsim::neural::{self, TrainConfig};
use socsim::platform::platform_to_json;
use socsim::workload::{catalog_to_json, generate_catalog, validate_dag, GeneratorParams};
use socsim::{PolicyNet, Real};

#[derive(Parser)]
#[command(name = "socsim", version, about = "Heterogeneous SoC scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate catalog and platform files
    Gen(GenArgs),
    /// Run one episode with a chosen scheduler
    Run(RunArgs),
    /// Train the neural scheduler
    Train(TrainArgs),
    /// Run the full benchmark sweep
    Bench(BenchArgs),
}

#[derive(Args)]
struct CommonConfig {
    /// Run-configuration JSON (horizon, scale, queue capacity, seed, files)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Episode length in clocks
    #[arg(long)]
    horizon: Option<u64>,
    /// Mean inter-arrival time in clocks
    #[arg(long)]
    scale: Option<f64>,
    /// Job queue capacity
    #[arg(long)]
    capacity: Option<usize>,
    /// Base random seed
    #[arg(long)]
    seed: Option<u64>,
}

impl CommonConfig {
    fn resolve(&self) -> socsim::Result<(EpisodeConfig, u64, SimConfigFile)> {
        let mut file = match &self.config {
            Some(path) => SimConfigFile::load(path)?,
            None => SimConfigFile::default(),
        };
        if let Some(h) = self.horizon {
            file.horizon = h;
        }
        if let Some(s) = self.scale {
            file.scale = s;
        }
        if let Some(c) = self.capacity {
            file.queue_capacity = c;
        }
        if let Some(s) = self.seed {
            file.seed = s;
        }
        let config = file.resolve()?;
        let seed = file.seed;
        Ok((config, seed, file))
    }
}

#[derive(Args)]
struct GenArgs {
    /// Generator seed
    #[arg(long, default_value_t = config::DEFAULT_CATALOG_SEED)]
    seed: u64,
    /// Number of job types
    #[arg(long = "types", default_value_t = config::DEFAULT_NUM_JOB_TYPES as u64, value_parser = clap::value_parser!(u64).range(1..))]
    num_types: u64,
    /// Tasks per job
    #[arg(long = "tasks", default_value_t = config::DEFAULT_TASKS_PER_JOB as u64, value_parser = clap::value_parser!(u64).range(1..))]
    tasks_per_job: u64,
    /// Number of PE types
    #[arg(long = "pe-types", default_value_t = config::DEFAULT_NUM_PE_TYPES as u64, value_parser = clap::value_parser!(u64).range(1..))]
    num_pe_types: u64,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Scheduling policy
    #[arg(long, default_value = "heft")]
    scheduler: String,
    /// Checkpoint for the neural scheduler
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output directory for trace and summary CSVs
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Training episodes
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    episodes: u64,
    /// Discount per clock
    #[arg(long, default_value_t = 0.999)]
    gamma: f64,
    /// Return redistribution mode
    #[arg(long = "eim-mode", default_value = "span")]
    eim_mode: String,
    /// Learning rate
    #[arg(long, default_value_t = 3e-4)]
    learning_rate: f64,
    /// Entropy bonus coefficient
    #[arg(long, default_value_t = 0.01)]
    entropy_coef: f64,
    /// Output directory for checkpoint and learning curve
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Comma-separated policies to sweep
    #[arg(long, default_value = "random,met,etf,heft,neural")]
    schedulers: String,
    /// Comma-separated injection scales
    #[arg(long, default_value = "25,50,75,100")]
    scales: String,
    /// Number of trials (seeds are base_seed..base_seed+trials)
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Checkpoint for the neural scheduler; rows fail cleanly without it
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output directory for report CSVs
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Train(args) => cmd_train(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_gen(args: GenArgs) -> socsim::Result<()> {
    let catalog = generate_catalog(
        args.seed,
        args.num_types as usize,
        args.tasks_per_job as usize,
        args.num_pe_types as usize,
        &GeneratorParams::default(),
    )?;
    for dag in &catalog.job_types {
        let report = validate_dag(dag, catalog.num_pe_types);
        println!(
            "job type {}: {} tasks, {} edges, {}",
            dag.job_type_id,
            dag.num_tasks(),
            dag.edges.len(),
            if report.is_valid() {
                "valid".to_string()
            } else {
                format!("violations: {:?}", report.violations)
            }
        );
    }
    fs::create_dir_all(&args.out)?;
    let catalog_path = args.out.join("catalog.json");
    fs::write(&catalog_path, catalog_to_json(&catalog))?;
    let platform_path = args.out.join("platform.json");
    fs::write(&platform_path, platform_to_json(&config::reference_platform()))?;
    println!("wrote {} and {}", catalog_path.display(), platform_path.display());
    Ok(())
}

fn cmd_run(args: RunArgs) -> socsim::Result<()> {
    let (config, seed, file) = args.common.resolve()?;
    let kind = SchedulerKind::parse(&args.scheduler)?;
    let net = load_model(&args.model, kind)?;
    let mut scheduler = bench::make_scheduler(kind, &config, seed, net.as_ref())?;
    let trace = kernel::run(&config, scheduler.as_mut(), seed)?;
    let summary = metrics::summarize(&trace, kind.as_str(), seed);

    fs::create_dir_all(&args.out)?;
    trace.write_task_csv(fs::File::create(args.out.join("tasks.csv"))?)?;
    trace.write_job_csv(fs::File::create(args.out.join("jobs.csv"))?)?;
    trace.write_reward_csv(fs::File::create(args.out.join("rewards.csv"))?)?;
    let row = bench::BenchRow {
        scheduler: kind.as_str(),
        scale: config.scale,
        seed,
        summary: Some(summary.clone()),
        error: None,
    };
    bench::write_rows_csv(
        std::slice::from_ref(&row),
        fs::File::create(args.out.join("summary.csv"))?,
    )?;
    write_metadata(
        &args.out,
        &file,
        serde_json::json!({
            "command": "run",
            "scheduler": kind.as_str(),
            "model": args.model,
        }),
    )?;

    println!(
        "scheduler={} scale={} seed={} completed={} latency={:.2} energy={:.1} edp={:.1} trace_digest={:016x}",
        kind.as_str(),
        config.scale,
        seed,
        summary.completed_jobs,
        summary.avg_latency,
        summary.total_energy,
        summary.edp,
        trace.digest(),
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> socsim::Result<()> {
    let (config, seed, file) = args.common.resolve()?;
    let tcfg = TrainConfig {
        episodes: args.episodes as usize,
        gamma: args.gamma,
        eim_mode: EimMode::parse(&args.eim_mode)?,
        learning_rate: args.learning_rate,
        entropy_coef: args.entropy_coef,
        seed,
        ..TrainConfig::default()
    };
    let output = neural::train::<Real>(&config, &tcfg)?;

    fs::create_dir_all(&args.out)?;
    let ckpt = args.out.join("model.ckpt");
    neural::checkpoint::save(&output.net, &ckpt)?;
    neural::write_curve_csv(&output.curve, fs::File::create(args.out.join("curve.csv"))?)?;
    write_metadata(
        &args.out,
        &file,
        serde_json::json!({
            "command": "train",
            "episodes": tcfg.episodes,
            "gamma": tcfg.gamma,
            "eim_mode": tcfg.eim_mode.as_str(),
            "learning_rate": tcfg.learning_rate,
            "entropy_coef": tcfg.entropy_coef,
            "value_coef": tcfg.value_coef,
            "clip_norm": tcfg.clip_norm,
            "hidden": [tcfg.hidden.0, tcfg.hidden.1],
        }),
    )?;

    let last = output.curve.last().expect("at least one episode");
    println!(
        "trained {} episodes; final reward {:.1}, completions {}; checkpoint {}",
        tcfg.episodes,
        last.total_reward,
        last.completed_jobs,
        ckpt.display()
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> socsim::Result<()> {
    let (base, seed, file) = args.common.resolve()?;
    let mut schedulers = Vec::new();
    for name in args.schedulers.split(',') {
        schedulers.push(SchedulerKind::parse(name.trim())?);
    }
    let mut scales = Vec::new();
    for s in args.scales.split(',') {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| socsim::SimError::Config(format!("bad scale {s:?}")))?;
        scales.push(v);
    }
    let needs_model = schedulers.contains(&SchedulerKind::Neural);
    let net = if needs_model {
        load_model(&args.model, SchedulerKind::Neural)?
    } else {
        None
    };

    let cfg = BenchConfig {
        base,
        schedulers,
        scales,
        seeds: (seed..seed + args.trials).collect(),
        net,
    };
    let rows = bench::run_sweep(&cfg);
    let aggregates = bench::aggregate(&rows);

    fs::create_dir_all(&args.out)?;
    bench::write_rows_csv(&rows, fs::File::create(args.out.join("bench_rows.csv"))?)?;
    bench::write_aggregates_csv(
        &aggregates,
        fs::File::create(args.out.join("bench_aggregates.csv"))?,
    )?;
    write_metadata(
        &args.out,
        &file,
        serde_json::json!({
            "command": "bench",
            "schedulers": args.schedulers,
            "scales": args.scales,
            "trials": args.trials,
            "model": args.model,
        }),
    )?;

    for a in &aggregates {
        println!(
            "{:>7} scale {:>5}: latency {:>9.2} ± {:>8.2}  completed {:>6.1}  energy {:>9.1}  edp {:>13.1}  (n={})",
            a.scheduler, a.scale, a.mean_latency, a.std_latency, a.mean_completed, a.mean_energy, a.mean_edp, a.n
        );
    }
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    if failures > 0 {
        eprintln!("{failures} of {} rows failed; see bench_rows.csv", rows.len());
    }
    Ok(())
}

fn load_model(path: &Option<PathBuf>, kind: SchedulerKind) -> socsim::Result<Option<Arc<PolicyNet>>> {
    match (path, kind) {
        (Some(p), _) => Ok(Some(Arc::new(neural::checkpoint::load::<Real>(p)?))),
        (None, SchedulerKind::Neural) => Err(socsim::SimError::Config(
            "--scheduler neural requires --model <checkpoint>".into(),
        )),
        (None, _) => Ok(None),
    }
}

/// Full resolved configuration plus the source revision, for reproducibility.
fn write_metadata(
    out: &Path,
    file: &SimConfigFile,
    extra: serde_json::Value,
) -> socsim::Result<()> {
    let revision = std::process::Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".to_string());
    let meta = serde_json::json!({
        "config": file,
        "git_revision": revision,
        "details": extra,
    });
    fs::write(out.join("run_meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}
