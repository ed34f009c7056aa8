//! Immutable episode traces: per-task and per-job records, per-clock job
//! completions and per-PE usage, plus CSV export and a stable digest.

use std::io::Write;

use crate::error::Result;
use crate::Clock;

/// One started task. `finish_clk` is the projected finish (`start + exec`);
/// `completed` is false for tasks still running at the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecord {
    pub job_instance_id: u64,
    pub job_type_id: usize,
    pub task_id: usize,
    pub pe: usize,
    pub ready_clk: Clock,
    pub start_clk: Clock,
    pub finish_clk: Clock,
    pub completed: bool,
    pub energy: f64,
}

/// One injected job. `admit_clk`/`complete_clk` stay empty for jobs that
/// never left the backlog or never finished.
#[derive(Debug, Clone, PartialEq)]
pub struct JobRecord {
    pub job_instance_id: u64,
    pub job_type_id: usize,
    pub inject_clk: Clock,
    pub admit_clk: Option<Clock>,
    pub complete_clk: Option<Clock>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeUsage {
    pub pe_id: usize,
    pub busy_clocks: u64,
    pub idle_clocks: u64,
    pub task_energy: f64,
    pub idle_energy: f64,
}

/// Full record of one episode; a pure function of (config, scheduler, seed).
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub horizon: Clock,
    pub scale: f64,
    pub queue_capacity: usize,
    pub tasks: Vec<TaskRecord>,
    pub jobs: Vec<JobRecord>,
    pub completions_per_clk: Vec<u32>,
    pub pe_usage: Vec<PeUsage>,
    pub injected_jobs: u64,
    pub completed_jobs: u64,
}

impl Trace {
    /// Total episode energy: per-task active energy plus per-PE idle energy.
    pub fn total_energy(&self) -> f64 {
        self.pe_usage
            .iter()
            .map(|pe| pe.task_energy + pe.idle_energy)
            .sum()
    }

    /// FNV-1a digest over the canonical byte encoding of every record.
    /// Equal digests mean bitwise-equal traces.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.u64(self.horizon);
        h.f64(self.scale);
        h.u64(self.queue_capacity as u64);
        h.u64(self.injected_jobs);
        h.u64(self.completed_jobs);
        for t in &self.tasks {
            h.u64(t.job_instance_id);
            h.u64(t.job_type_id as u64);
            h.u64(t.task_id as u64);
            h.u64(t.pe as u64);
            h.u64(t.ready_clk);
            h.u64(t.start_clk);
            h.u64(t.finish_clk);
            h.u64(t.completed as u64);
            h.f64(t.energy);
        }
        for j in &self.jobs {
            h.u64(j.job_instance_id);
            h.u64(j.job_type_id as u64);
            h.u64(j.inject_clk);
            h.u64(j.admit_clk.map(|c| c + 1).unwrap_or(0));
            h.u64(j.complete_clk.map(|c| c + 1).unwrap_or(0));
        }
        for (clk, &c) in self.completions_per_clk.iter().enumerate() {
            if c > 0 {
                h.u64(clk as u64);
                h.u64(c as u64);
            }
        }
        for pe in &self.pe_usage {
            h.u64(pe.pe_id as u64);
            h.u64(pe.busy_clocks);
            h.u64(pe.idle_clocks);
            h.f64(pe.task_energy);
            h.f64(pe.idle_energy);
        }
        h.finish()
    }

    /// Per-task CSV: `job_id,task_id,pe,ready_clk,start_clk,finish_clk,completed,energy`.
    pub fn write_task_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "job_id", "task_id", "pe", "ready_clk", "start_clk", "finish_clk", "completed",
            "energy",
        ])?;
        for t in &self.tasks {
            w.write_record([
                t.job_instance_id.to_string(),
                t.task_id.to_string(),
                t.pe.to_string(),
                t.ready_clk.to_string(),
                t.start_clk.to_string(),
                t.finish_clk.to_string(),
                (t.completed as u8).to_string(),
                format!("{:.6}", t.energy),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-job CSV: `job_id,job_type,inject_clk,admit_clk,complete_clk`.
    /// Empty fields mean "never happened".
    pub fn write_job_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["job_id", "job_type", "inject_clk", "admit_clk", "complete_clk"])?;
        for j in &self.jobs {
            w.write_record([
                j.job_instance_id.to_string(),
                j.job_type_id.to_string(),
                j.inject_clk.to_string(),
                j.admit_clk.map(|c| c.to_string()).unwrap_or_default(),
                j.complete_clk.map(|c| c.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-clock reward track CSV: `clk,completions,reward`.
    pub fn write_reward_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["clk", "completions", "reward"])?;
        for (clk, &c) in self.completions_per_clk.iter().enumerate() {
            let reward = -0.5 + 50.0 * c as f64;
            w.write_record([clk.to_string(), c.to_string(), format!("{reward:.1}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }
    fn bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_bits().to_le_bytes());
    }
    fn finish(&self) -> u64 {
        self.0
    }
}
