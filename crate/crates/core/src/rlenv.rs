//! The decision environment around the kernel: observation vectors, the
//! per-clock reward, and the neural policy that plugs into the scheduler
//! interface while recording its experience.
//!
//! Observation layout, per job slot (up to the queue capacity `C`), per task
//! slot (up to `T` tasks): a PE one-hot over `P + 1` entries (including
//! "unassigned"), a status one-hot over ready/running/outstanding, the
//! normalized task waiting time, the normalized remaining-predecessor count
//! and a focus flag marking the task whose assignment is being chosen. Per
//! job slot: normalized remaining dependency depth, normalized job waiting
//! time and a validity bit. One global feature counts awaiting tasks.
//! Completed tasks and empty slots are zero blocks; every feature lies in
//! `[0, 1]`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eim::EimBuffer;
use crate::kernel::{EpisodeConfig, KernelState, TaskKey, TaskStatus};
use crate::neural::{greedy_action, sample_action, PolicyValueNet};
use crate::scalar::Scalar;
use crate::scheduler::{ReadyTask, Scheduler, SchedulerDecision};
use crate::trace::Trace;
use crate::Clock;

/// Reward of one clock signal: a -0.5 penalty plus +50 per job completed at
/// that clock.
pub fn reward_at<T: Scalar>(completions: u32) -> T {
    T::from_real(-0.5 + 50.0 * completions as f64)
}

/// Full reward track of a finished episode, one entry per clock.
pub fn reward_track<T: Scalar>(trace: &Trace) -> Vec<T> {
    trace
        .completions_per_clk
        .iter()
        .map(|&c| reward_at(c))
        .collect()
}

#[derive(Debug, Clone)]
struct TypeInfo {
    in_degrees: Vec<usize>,
    successors: Vec<Vec<usize>>,
    topo: Vec<usize>,
    depth_hops: usize,
}

/// Fixed observation geometry for one (catalog, platform, config) triple.
#[derive(Debug, Clone)]
pub struct ObservationLayout {
    pub queue_capacity: usize,
    pub tasks_per_job: usize,
    pub num_pes: usize,
    pub horizon: Clock,
    types: Vec<TypeInfo>,
}

impl ObservationLayout {
    pub fn new(config: &EpisodeConfig) -> Self {
        let types = config
            .catalog
            .job_types
            .iter()
            .map(|dag| {
                let mut successors = vec![Vec::new(); dag.num_tasks()];
                for e in &dag.edges {
                    successors[e.pred].push(e.succ);
                }
                TypeInfo {
                    in_degrees: dag.in_degrees(),
                    successors,
                    topo: dag.topo_order().expect("validated catalog is acyclic"),
                    depth_hops: dag.depth_hops(),
                }
            })
            .collect();
        ObservationLayout {
            queue_capacity: config.queue_capacity,
            tasks_per_job: config.catalog.max_tasks_per_job(),
            num_pes: config.platform.num_pes(),
            horizon: config.horizon,
            types,
        }
    }

    /// Features per task slot: PE one-hot (P+1), status one-hot (3), waiting
    /// time, remaining predecessors, focus flag.
    pub fn task_block_len(&self) -> usize {
        self.num_pes + 1 + 3 + 1 + 1 + 1
    }

    /// Per job slot: its task blocks plus (depth, waiting time, validity).
    pub fn job_block_len(&self) -> usize {
        self.tasks_per_job * self.task_block_len() + 3
    }

    pub fn len(&self) -> usize {
        self.queue_capacity * self.job_block_len() + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds the observation with `focus` marking the ready task whose PE
    /// assignment is being chosen. Pure in (state, focus).
    pub fn featurize<T: Scalar>(&self, state: &KernelState, focus: TaskKey) -> Vec<T> {
        let mut obs = vec![T::zero(); self.len()];
        let horizon = self.horizon.max(1) as f64;
        let clk = state.clk;

        let mut awaiting = 0usize;
        for (slot, job) in state.job_queue.iter().enumerate().take(self.queue_capacity) {
            let base = slot * self.job_block_len();
            let info = &self.types[job.job_type_id];

            for (task_idx, task) in job.tasks.iter().enumerate().take(self.tasks_per_job) {
                if matches!(task.status, TaskStatus::Outstanding | TaskStatus::Ready) {
                    awaiting += 1;
                }
                if task.status == TaskStatus::Completed {
                    continue; // completed tasks vanish from the observation
                }
                let t_base = base + task_idx * self.task_block_len();
                // PE one-hot; the last entry means "unassigned".
                let pe_index = task.assigned_pe.unwrap_or(self.num_pes);
                obs[t_base + pe_index] = T::one();
                let stat_base = t_base + self.num_pes + 1;
                match task.status {
                    TaskStatus::Ready => obs[stat_base] = T::one(),
                    TaskStatus::Running => obs[stat_base + 1] = T::one(),
                    TaskStatus::Outstanding => obs[stat_base + 2] = T::one(),
                    TaskStatus::Completed => unreachable!(),
                }
                let wt = task
                    .ready_clk
                    .map(|r| ((clk - r) as f64 / horizon).clamp(0.0, 1.0))
                    .unwrap_or(0.0);
                obs[t_base + self.num_pes + 4] = T::from_real(wt);
                let in_deg = info.in_degrees[task_idx];
                let pred = if in_deg == 0 {
                    0.0
                } else {
                    task.remaining_preds as f64 / in_deg as f64
                };
                obs[t_base + self.num_pes + 5] = T::from_real(pred);
                if task.key == focus {
                    obs[t_base + self.num_pes + 6] = T::one();
                }
            }

            let job_base = base + self.tasks_per_job * self.task_block_len();
            let depth = if info.depth_hops == 0 {
                0.0
            } else {
                self.remaining_depth(job.job_type_id, job) as f64 / info.depth_hops as f64
            };
            obs[job_base] = T::from_real(depth);
            let job_wt = ((clk - job.inject_clk) as f64 / horizon).clamp(0.0, 1.0);
            obs[job_base + 1] = T::from_real(job_wt);
            obs[job_base + 2] = T::one();
        }

        let denom = (self.queue_capacity * self.tasks_per_job).max(1) as f64;
        obs[self.len() - 1] = T::from_real(awaiting as f64 / denom);
        obs
    }

    /// Longest dependency path, in hops, through the job's not-yet-completed
    /// tasks.
    fn remaining_depth(&self, job_type_id: usize, job: &crate::kernel::JobInstance) -> usize {
        let info = &self.types[job_type_id];
        let mut depth = vec![0usize; job.tasks.len()];
        let mut max = 0usize;
        for &t in &info.topo {
            if job.tasks[t].status == TaskStatus::Completed {
                continue;
            }
            max = max.max(depth[t]);
            for &s in &info.successors[t] {
                if job.tasks[s].status != TaskStatus::Completed {
                    depth[s] = depth[s].max(depth[t] + 1);
                    max = max.max(depth[s]);
                }
            }
        }
        max
    }
}

/// Sampling for training, argmax for evaluation.
pub enum ActionMode {
    Sample(ChaCha8Rng),
    Greedy,
}

/// The trained (or training) scheduler: featurizes each presented ready
/// task in canonical order, queries the network once per task at the paused
/// clock, and optionally records the full episode into an EIM buffer.
pub struct NeuralPolicy<T> {
    net: Arc<PolicyValueNet<T>>,
    layout: Arc<ObservationLayout>,
    mode: ActionMode,
    record: bool,
    buffer: EimBuffer<T>,
}

impl<T: Scalar> NeuralPolicy<T> {
    /// Training-time policy: samples actions and records experience.
    pub fn sampling(
        net: Arc<PolicyValueNet<T>>,
        layout: Arc<ObservationLayout>,
        seed: u64,
    ) -> Self {
        NeuralPolicy {
            net,
            layout,
            mode: ActionMode::Sample(ChaCha8Rng::seed_from_u64(seed)),
            record: true,
            buffer: EimBuffer::new(),
        }
    }

    /// Evaluation-time policy: greedy actions, no recording.
    pub fn greedy(net: Arc<PolicyValueNet<T>>, layout: Arc<ObservationLayout>) -> Self {
        NeuralPolicy {
            net,
            layout,
            mode: ActionMode::Greedy,
            record: false,
            buffer: EimBuffer::new(),
        }
    }

    /// Closes the episode and hands the buffer to return redistribution.
    pub fn into_buffer(self) -> EimBuffer<T> {
        self.buffer
    }
}

impl<T: Scalar> Scheduler for NeuralPolicy<T> {
    fn name(&self) -> &str {
        "neural"
    }

    fn decide(&mut self, ready: &[ReadyTask], state: &KernelState) -> SchedulerDecision {
        let mut pe_for = Vec::with_capacity(ready.len());
        // canonical presentation order; one network query per ready task
        for rt in ready {
            let obs = self.layout.featurize::<T>(state, rt.key);
            let fwd = self.net.forward(&obs).expect("layout matches network input");
            let action = match &mut self.mode {
                ActionMode::Sample(rng) => sample_action(&fwd.probs, rng),
                ActionMode::Greedy => greedy_action(&fwd.probs),
            };
            if self.record {
                self.buffer
                    .record_decision(
                        obs,
                        action,
                        rt.key,
                        Some(fwd.log_probs[action]),
                        Some(fwd.value),
                    )
                    .expect("kernel presents each ready task once");
            }
            pe_for.push(action);
        }
        SchedulerDecision::in_presentation_order(pe_for)
    }

    fn on_task_started(&mut self, key: TaskKey, clk: Clock) {
        if self.record {
            self.buffer
                .record_start(key, clk)
                .expect("kernel starts tasks once, in clock order");
        }
    }

    fn on_task_completed(&mut self, key: TaskKey, clk: Clock) {
        if self.record {
            self.buffer
                .record_completion(key, clk)
                .expect("kernel completes tasks once, after their start");
        }
    }

    fn on_tick(&mut self, clk: Clock, jobs_completed: u32) {
        if self.record {
            self.buffer
                .record_reward(clk, reward_at(jobs_completed))
                .expect("kernel ticks are contiguous");
        }
    }
}
