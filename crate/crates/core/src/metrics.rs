//! Episode metrics: average latency, throughput, energy and energy-delay
//! product, all derived from the trace.
//!
//! Average latency is the mean per-job elapsed time from injection to
//! completion, in clocks per job (lower is better). The reciprocal reading
//! (completed jobs per cumulative execution time) ships as
//! `throughput_jobs_per_kflop`. Cumulative execution time is the clock of
//! the last job completion of the episode.

use crate::trace::Trace;
use crate::Clock;

#[derive(Debug, Clone)]
pub struct EpisodeSummary {
    pub scheduler: String,
    pub scale: f64,
    pub seed: u64,
    pub horizon: Clock,
    pub injected_jobs: u64,
    pub completed_jobs: u64,
    /// Mean inject-to-complete time over completed jobs; NaN if none completed.
    pub avg_latency: f64,
    /// Completed jobs per thousand clocks of cumulative execution time.
    pub throughput_jobs_per_kflop: f64,
    /// Clock of the last job completion (0 when nothing completed).
    pub cumulative_execution_clk: Clock,
    pub task_energy: f64,
    pub idle_energy: f64,
    pub total_energy: f64,
    /// total_energy * cumulative_execution_clk, exactly.
    pub edp: f64,
    /// Sum of the per-clock reward track at gamma = 1.
    pub total_reward: f64,
    pub mean_pe_utilization: f64,
}

pub fn summarize(trace: &Trace, scheduler: &str, seed: u64) -> EpisodeSummary {
    let mut completed = 0u64;
    let mut latency_sum = 0u128;
    let mut last_completion: Clock = 0;
    for job in &trace.jobs {
        if let Some(complete) = job.complete_clk {
            completed += 1;
            latency_sum += (complete - job.inject_clk) as u128;
            last_completion = last_completion.max(complete);
        }
    }
    let avg_latency = if completed == 0 {
        f64::NAN
    } else {
        latency_sum as f64 / completed as f64
    };
    let throughput = if last_completion == 0 {
        f64::NAN
    } else {
        completed as f64 / (last_completion as f64 / 1000.0)
    };

    let task_energy: f64 = trace.pe_usage.iter().map(|pe| pe.task_energy).sum();
    let idle_energy: f64 = trace.pe_usage.iter().map(|pe| pe.idle_energy).sum();
    let total_energy = task_energy + idle_energy;
    let edp = total_energy * last_completion as f64;

    let total_reward = -0.5 * trace.horizon as f64 + 50.0 * trace.completed_jobs as f64;

    let mean_pe_utilization = if trace.pe_usage.is_empty() || trace.horizon == 0 {
        0.0
    } else {
        trace
            .pe_usage
            .iter()
            .map(|pe| pe.busy_clocks as f64 / trace.horizon as f64)
            .sum::<f64>()
            / trace.pe_usage.len() as f64
    };

    EpisodeSummary {
        scheduler: scheduler.to_string(),
        scale: trace.scale,
        seed,
        horizon: trace.horizon,
        injected_jobs: trace.injected_jobs,
        completed_jobs: trace.completed_jobs,
        avg_latency,
        throughput_jobs_per_kflop: throughput,
        cumulative_execution_clk: last_completion,
        task_energy,
        idle_energy,
        total_energy,
        edp,
        total_reward,
        mean_pe_utilization,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{JobRecord, PeUsage};

    fn trace_with_jobs(jobs: Vec<JobRecord>, horizon: Clock) -> Trace {
        let completed = jobs.iter().filter(|j| j.complete_clk.is_some()).count() as u64;
        Trace {
            horizon,
            scale: 25.0,
            queue_capacity: 3,
            tasks: vec![],
            jobs: jobs.clone(),
            completions_per_clk: vec![0; horizon as usize],
            pe_usage: vec![PeUsage {
                pe_id: 0,
                busy_clocks: 10,
                idle_clocks: horizon - 10,
                task_energy: 20.0,
                idle_energy: 5.0,
            }],
            injected_jobs: jobs.len() as u64,
            completed_jobs: completed,
        }
    }

    fn job(id: u64, inject: Clock, complete: Option<Clock>) -> JobRecord {
        JobRecord {
            job_instance_id: id,
            job_type_id: 0,
            inject_clk: inject,
            admit_clk: Some(inject),
            complete_clk: complete,
        }
    }

    #[test]
    fn latency_is_mean_elapsed_over_completed() {
        // 8 jobs, total waiting+service 4000 clocks -> 500 clocks/job
        let jobs: Vec<JobRecord> = (0..8).map(|i| job(i, 0, Some(500))).collect();
        let summary = summarize(&trace_with_jobs(jobs, 5000), "t", 0);
        assert_eq!(summary.avg_latency, 500.0);
        assert_eq!(summary.completed_jobs, 8);
    }

    #[test]
    fn incomplete_jobs_do_not_count() {
        let jobs = vec![job(0, 0, Some(100)), job(1, 50, None)];
        let summary = summarize(&trace_with_jobs(jobs, 200), "t", 0);
        assert_eq!(summary.avg_latency, 100.0);
        assert_eq!(summary.completed_jobs, 1);
        assert_eq!(summary.cumulative_execution_clk, 100);
    }

    #[test]
    fn no_completions_yield_nan_latency() {
        let jobs = vec![job(0, 0, None)];
        let summary = summarize(&trace_with_jobs(jobs, 200), "t", 0);
        assert!(summary.avg_latency.is_nan());
        assert_eq!(summary.total_reward, -100.0);
    }

    #[test]
    fn edp_is_energy_times_cumulative_time_exactly() {
        let jobs = vec![job(0, 0, Some(120)), job(1, 10, Some(400))];
        let summary = summarize(&trace_with_jobs(jobs, 500), "t", 0);
        assert_eq!(summary.total_energy, 25.0);
        assert_eq!(summary.cumulative_execution_clk, 400);
        assert_eq!(summary.edp, 25.0 * 400.0);
        assert_eq!(summary.edp, summary.total_energy * summary.cumulative_execution_clk as f64);
    }

    #[test]
    fn throughput_is_reciprocal_reading() {
        let jobs: Vec<JobRecord> = (0..4).map(|i| job(i, 0, Some(2000))).collect();
        let summary = summarize(&trace_with_jobs(jobs, 5000), "t", 0);
        assert!((summary.throughput_jobs_per_kflop - 4.0 / 2.0).abs() < 1e-12);
    }
}
