//! The benchmark harness: scheduler construction by name, the
//! {scheduler} x {scale} x {seed} sweep, and report aggregation.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Result, SimError};
use crate::heuristics::{EtfPolicy, HeftPolicy, MetPolicy, RandomPolicy};
use crate::kernel::{self, EpisodeConfig};
use crate::metrics::{summarize, EpisodeSummary};
use crate::rlenv::{NeuralPolicy, ObservationLayout};
use crate::scheduler::Scheduler;
use crate::{mix_seed, PolicyNet};

const SALT_POLICY_RNG: u64 = 0x70;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerKind {
    Random,
    Met,
    Etf,
    Heft,
    Neural,
}

impl SchedulerKind {
    pub fn parse(s: &str) -> Result<SchedulerKind> {
        match s {
            "random" => Ok(SchedulerKind::Random),
            "met" => Ok(SchedulerKind::Met),
            "etf" => Ok(SchedulerKind::Etf),
            "heft" => Ok(SchedulerKind::Heft),
            "neural" => Ok(SchedulerKind::Neural),
            other => Err(SimError::Config(format!(
                "unknown scheduler {other:?}, expected random|met|etf|heft|neural"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SchedulerKind::Random => "random",
            SchedulerKind::Met => "met",
            SchedulerKind::Etf => "etf",
            SchedulerKind::Heft => "heft",
            SchedulerKind::Neural => "neural",
        }
    }
}

/// Builds a ready-to-run policy. The neural kind needs a trained network;
/// its observation layout is rebuilt from the episode config and must match
/// the network input width.
pub fn make_scheduler(
    kind: SchedulerKind,
    config: &EpisodeConfig,
    seed: u64,
    net: Option<&Arc<PolicyNet>>,
) -> Result<Box<dyn Scheduler>> {
    Ok(match kind {
        SchedulerKind::Random => Box::new(RandomPolicy::new(mix_seed(seed, SALT_POLICY_RNG))),
        SchedulerKind::Met => Box::new(MetPolicy),
        SchedulerKind::Etf => Box::new(EtfPolicy),
        SchedulerKind::Heft => Box::new(HeftPolicy::new(&config.catalog, &config.platform)),
        SchedulerKind::Neural => {
            let net = net.ok_or_else(|| {
                SimError::Config("neural scheduler needs a model checkpoint".into())
            })?;
            let layout = Arc::new(ObservationLayout::new(config));
            if layout.len() != net.dims().input {
                return Err(SimError::Config(format!(
                    "model expects observations of length {}, this config produces {}",
                    net.dims().input,
                    layout.len()
                )));
            }
            if net.dims().actions != config.platform.num_pes() {
                return Err(SimError::Config(format!(
                    "model selects over {} pes, platform has {}",
                    net.dims().actions,
                    config.platform.num_pes()
                )));
            }
            Box::new(NeuralPolicy::greedy(Arc::clone(net), layout))
        }
    })
}

/// One sweep cell. `summary` is empty when the episode failed; the error
/// text is recorded and the sweep continues.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub scheduler: &'static str,
    pub scale: f64,
    pub seed: u64,
    pub summary: Option<EpisodeSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub base: EpisodeConfig,
    pub schedulers: Vec<SchedulerKind>,
    pub scales: Vec<f64>,
    pub seeds: Vec<u64>,
    pub net: Option<Arc<PolicyNet>>,
}

/// Runs the full cross product. Rows are deterministic in isolation: each
/// cell runs a fresh kernel and a fresh policy seeded from the cell's seed.
pub fn run_sweep(cfg: &BenchConfig) -> Vec<BenchRow> {
    let mut rows =
        Vec::with_capacity(cfg.schedulers.len() * cfg.scales.len() * cfg.seeds.len());
    for &kind in &cfg.schedulers {
        for &scale in &cfg.scales {
            for &seed in &cfg.seeds {
                let config = EpisodeConfig {
                    scale,
                    ..cfg.base.clone()
                };
                let outcome = make_scheduler(kind, &config, seed, cfg.net.as_ref())
                    .and_then(|mut sched| kernel::run(&config, sched.as_mut(), seed));
                let (summary, error) = match outcome {
                    Ok(trace) => (Some(summarize(&trace, kind.as_str(), seed)), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                rows.push(BenchRow {
                    scheduler: kind.as_str(),
                    scale,
                    seed,
                    summary,
                    error,
                });
            }
        }
    }
    rows
}

/// Mean and sample standard deviation per (scheduler, scale) cell.
#[derive(Debug, Clone)]
pub struct Aggregate {
    pub scheduler: &'static str,
    pub scale: f64,
    pub n: usize,
    pub mean_latency: f64,
    pub std_latency: f64,
    pub mean_completed: f64,
    pub std_completed: f64,
    pub mean_energy: f64,
    pub std_energy: f64,
    pub mean_edp: f64,
    pub std_edp: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn aggregate(rows: &[BenchRow]) -> Vec<Aggregate> {
    let mut cells: Vec<(&'static str, f64)> = Vec::new();
    for row in rows {
        if !cells.contains(&(row.scheduler, row.scale)) {
            cells.push((row.scheduler, row.scale));
        }
    }
    cells
        .into_iter()
        .map(|(scheduler, scale)| {
            let summaries: Vec<&EpisodeSummary> = rows
                .iter()
                .filter(|r| r.scheduler == scheduler && r.scale == scale)
                .filter_map(|r| r.summary.as_ref())
                .collect();
            let latencies: Vec<f64> = summaries.iter().map(|s| s.avg_latency).collect();
            let completed: Vec<f64> = summaries.iter().map(|s| s.completed_jobs as f64).collect();
            let energy: Vec<f64> = summaries.iter().map(|s| s.total_energy).collect();
            let edp: Vec<f64> = summaries.iter().map(|s| s.edp).collect();
            let (mean_latency, std_latency) = mean_std(&latencies);
            let (mean_completed, std_completed) = mean_std(&completed);
            let (mean_energy, std_energy) = mean_std(&energy);
            let (mean_edp, std_edp) = mean_std(&edp);
            Aggregate {
                scheduler,
                scale,
                n: summaries.len(),
                mean_latency,
                std_latency,
                mean_completed,
                std_completed,
                mean_energy,
                std_energy,
                mean_edp,
                std_edp,
            }
        })
        .collect()
}

/// Per-row CSV with a fixed header; failed rows keep their seed and error.
pub fn write_rows_csv<W: Write>(rows: &[BenchRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "scheduler",
        "scale",
        "seed",
        "injected_jobs",
        "completed_jobs",
        "avg_latency",
        "throughput_jobs_per_kflop",
        "cumulative_execution_clk",
        "task_energy",
        "idle_energy",
        "total_energy",
        "edp",
        "total_reward",
        "mean_pe_utilization",
        "error",
    ])?;
    for row in rows {
        match &row.summary {
            Some(s) => w.write_record([
                row.scheduler.to_string(),
                format_f64(row.scale),
                row.seed.to_string(),
                s.injected_jobs.to_string(),
                s.completed_jobs.to_string(),
                format_f64(s.avg_latency),
                format_f64(s.throughput_jobs_per_kflop),
                s.cumulative_execution_clk.to_string(),
                format_f64(s.task_energy),
                format_f64(s.idle_energy),
                format_f64(s.total_energy),
                format_f64(s.edp),
                format_f64(s.total_reward),
                format_f64(s.mean_pe_utilization),
                String::new(),
            ])?,
            None => w.write_record([
                row.scheduler.to_string(),
                format_f64(row.scale),
                row.seed.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                row.error.clone().unwrap_or_default(),
            ])?,
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregates_csv<W: Write>(aggregates: &[Aggregate], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "scheduler",
        "scale",
        "n",
        "mean_latency",
        "std_latency",
        "mean_completed",
        "std_completed",
        "mean_energy",
        "std_energy",
        "mean_edp",
        "std_edp",
    ])?;
    for a in aggregates {
        w.write_record([
            a.scheduler.to_string(),
            format_f64(a.scale),
            a.n.to_string(),
            format_f64(a.mean_latency),
            format_f64(a.std_latency),
            format_f64(a.mean_completed),
            format_f64(a.std_completed),
            format_f64(a.mean_energy),
            format_f64(a.std_energy),
            format_f64(a.mean_edp),
            format_f64(a.std_edp),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.6}")
    }
}
