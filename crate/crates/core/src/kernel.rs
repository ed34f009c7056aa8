//! The clock-driven simulation core.
//!
//! Each clock signal processes, in fixed order: task completions, job
//! completions, new injections, admissions from the backlog into free queue
//! slots, one scheduler invocation over the ready set, and PE dispatch.
//! Scheduling before dispatch lets a task start on the same clock it is
//! assigned when its data is already local and the PE is idle.
//!
//! Arrivals that find the job queue full wait in an unbounded FIFO backlog;
//! nothing is dropped. Execution is non-preemptive: once dispatched, a task
//! occupies its PE for exactly its execution time.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SimError};
use crate::platform::Platform;
use crate::scheduler::{ReadyTask, Scheduler, SchedulerDecision};
use crate::trace::{JobRecord, PeUsage, TaskRecord, Trace};
use crate::workload::{sample_arrivals, JobDag, JobTypeCatalog, TaskTemplate};
use crate::{mix_seed, Clock};

const SALT_INITIAL_QUEUE: u64 = 0x51;
const SALT_ARRIVALS: u64 = 0x52;

/// Identity of a task instance: owning job instance plus template task id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskKey {
    pub job: u64,
    pub task: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskStatus {
    Outstanding,
    Ready,
    Running,
    Completed,
}

#[derive(Debug, Clone)]
pub struct TaskInstance {
    pub key: TaskKey,
    pub status: TaskStatus,
    pub remaining_preds: usize,
    pub assigned_pe: Option<usize>,
    pub data_ready_clk: Option<Clock>,
    pub ready_clk: Option<Clock>,
    pub start_clk: Option<Clock>,
    pub finish_clk: Option<Clock>,
}

#[derive(Debug, Clone)]
pub struct JobInstance {
    pub job_instance_id: u64,
    pub job_type_id: usize,
    pub inject_clk: Clock,
    pub admit_clk: Option<Clock>,
    pub complete_clk: Option<Clock>,
    pub tasks: Vec<TaskInstance>,
    pub remaining_tasks: usize,
}

/// A task sitting in a PE's dispatch FIFO, waiting for its data and for the
/// PE to go idle.
#[derive(Debug, Clone, Copy)]
pub struct QueuedTask {
    pub key: TaskKey,
    pub data_ready_clk: Clock,
    pub exec: Clock,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RunningTask {
    pub key: TaskKey,
    pub start_clk: Clock,
    pub finish_clk: Clock,
}

#[derive(Debug, Clone, Default)]
pub struct PeState {
    pub running: Option<RunningTask>,
    pub fifo: VecDeque<QueuedTask>,
    pub busy_clocks: u64,
    pub task_energy: f64,
}

impl PeState {
    /// Clock at which the PE is free to start another task.
    pub fn busy_until(&self, clk: Clock) -> Clock {
        self.running.map(|r| r.finish_clk).unwrap_or(clk)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    TaskCompleted { key: TaskKey, clk: Clock },
    JobCompleted { job: u64, clk: Clock },
    JobInjected { job: u64, clk: Clock },
    JobAdmitted { job: u64, clk: Clock },
    TaskReady { key: TaskKey, clk: Clock },
    TaskAssigned { key: TaskKey, pe: usize, data_ready_clk: Clock },
    TaskStarted { key: TaskKey, pe: usize, clk: Clock },
}

/// Everything needed to run one episode, minus the scheduler and seed.
#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub catalog: Arc<JobTypeCatalog>,
    pub platform: Arc<Platform>,
    pub horizon: Clock,
    pub scale: f64,
    pub queue_capacity: usize,
}

/// Observable simulation state. Policies receive a shared reference at every
/// invocation.
#[derive(Debug, Clone)]
pub struct KernelState {
    pub clk: Clock,
    pub horizon: Clock,
    pub scale: f64,
    pub queue_capacity: usize,
    pub catalog: Arc<JobTypeCatalog>,
    pub platform: Arc<Platform>,
    pub job_queue: Vec<JobInstance>,
    pub backlog: VecDeque<JobInstance>,
    pub pes: Vec<PeState>,
    pub injected_jobs: u64,
    pub completed_jobs: u64,
    arrivals: VecDeque<(Clock, usize)>,
    next_job_id: u64,
    completed_job_records: Vec<JobRecord>,
    task_records: Vec<TaskRecord>,
    completions_per_clk: Vec<u32>,
}

impl KernelState {
    pub fn template(&self, key: TaskKey) -> &TaskTemplate {
        let job = self.job(key.job).expect("task key resolves to a queued job");
        &self.catalog.job_types[job.job_type_id].tasks[key.task as usize]
    }

    pub fn dag(&self, job_instance_id: u64) -> &JobDag {
        let job = self.job(job_instance_id).expect("job is queued");
        &self.catalog.job_types[job.job_type_id]
    }

    pub fn job(&self, job_instance_id: u64) -> Option<&JobInstance> {
        self.job_queue
            .iter()
            .find(|j| j.job_instance_id == job_instance_id)
    }

    fn job_mut(&mut self, job_instance_id: u64) -> Option<&mut JobInstance> {
        self.job_queue
            .iter_mut()
            .find(|j| j.job_instance_id == job_instance_id)
    }

    pub fn task(&self, key: TaskKey) -> Option<&TaskInstance> {
        self.job(key.job).map(|j| &j.tasks[key.task as usize])
    }

    /// Clock at which all of the task's input data would be present on
    /// `pe_id`: the max over predecessors of finish time plus transfer delay.
    /// Every predecessor must already be completed (the task is ready).
    pub fn data_ready_on(&self, key: TaskKey, pe_id: usize) -> Clock {
        let job = self.job(key.job).expect("job is queued");
        let dag = &self.catalog.job_types[job.job_type_id];
        let mut ready = 0;
        for edge in dag.predecessors(key.task as usize) {
            let pred = &job.tasks[edge.pred];
            debug_assert_eq!(pred.status, TaskStatus::Completed);
            let finish = pred.finish_clk.expect("completed predecessor has finish");
            let src = pred.assigned_pe.expect("completed predecessor has a pe");
            ready = ready.max(finish + self.platform.comm_delay(src, pe_id, edge.data_volume));
        }
        ready
    }

    /// Ready-and-never-assigned tasks in canonical presentation order.
    /// The queue is kept in admission order, so scanning it in order yields
    /// ascending (admit_clk, job_instance_id, task_id).
    pub fn ready_tasks(&self) -> Vec<ReadyTask> {
        let mut out = Vec::new();
        for job in &self.job_queue {
            for task in &job.tasks {
                if task.status == TaskStatus::Ready && task.assigned_pe.is_none() {
                    out.push(ReadyTask {
                        key: task.key,
                        job_type_id: job.job_type_id,
                        admit_clk: job.admit_clk.expect("queued job was admitted"),
                        ready_clk: task.ready_clk.expect("ready task has ready_clk"),
                    });
                }
            }
        }
        out
    }

    fn instantiate_job(&mut self, job_type_id: usize, inject_clk: Clock) -> JobInstance {
        let job_instance_id = self.next_job_id;
        self.next_job_id += 1;
        self.injected_jobs += 1;
        let dag = &self.catalog.job_types[job_type_id];
        let in_deg = dag.in_degrees();
        let tasks = dag
            .tasks
            .iter()
            .map(|t| TaskInstance {
                key: TaskKey {
                    job: job_instance_id,
                    task: t.task_id as u32,
                },
                status: TaskStatus::Outstanding,
                remaining_preds: in_deg[t.task_id],
                assigned_pe: None,
                data_ready_clk: None,
                ready_clk: None,
                start_clk: None,
                finish_clk: None,
            })
            .collect::<Vec<_>>();
        let remaining_tasks = tasks.len();
        JobInstance {
            job_instance_id,
            job_type_id,
            inject_clk,
            admit_clk: None,
            complete_clk: None,
            tasks,
            remaining_tasks,
        }
    }

    fn admit(&mut self, mut job: JobInstance, clk: Clock, events: &mut Vec<Event>) {
        job.admit_clk = Some(clk);
        for task in &mut job.tasks {
            if task.remaining_preds == 0 {
                task.status = TaskStatus::Ready;
                task.ready_clk = Some(clk);
                events.push(Event::TaskReady { key: task.key, clk });
            }
        }
        events.push(Event::JobAdmitted {
            job: job.job_instance_id,
            clk,
        });
        self.job_queue.push(job);
    }
}

/// One episode in progress. Construct with [`Kernel::init`], advance with
/// [`Kernel::tick`] or [`Kernel::run_to_end`], then [`Kernel::into_trace`].
pub struct Kernel {
    pub state: KernelState,
}

impl Kernel {
    /// Builds the initial state: clock 0, job queue pre-filled to capacity
    /// (pseudo-steady start), arrival stream sampled over the horizon.
    pub fn init(config: &EpisodeConfig, seed: u64) -> Result<Kernel> {
        config.catalog.validate()?;
        config.platform.validate()?;
        if config.scale <= 0.0 {
            return Err(SimError::Config("scale must be > 0".into()));
        }

        let arrivals = sample_arrivals(
            &config.catalog,
            config.scale,
            config.horizon,
            mix_seed(seed, SALT_ARRIVALS),
        )?;

        let mut state = KernelState {
            clk: 0,
            horizon: config.horizon,
            scale: config.scale,
            queue_capacity: config.queue_capacity,
            catalog: Arc::clone(&config.catalog),
            platform: Arc::clone(&config.platform),
            job_queue: Vec::new(),
            backlog: VecDeque::new(),
            pes: vec![PeState::default(); config.platform.num_pes()],
            injected_jobs: 0,
            completed_jobs: 0,
            arrivals: arrivals.arrivals.into(),
            next_job_id: 0,
            completed_job_records: Vec::new(),
            task_records: Vec::new(),
            completions_per_clk: vec![0; config.horizon as usize],
        };

        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, SALT_INITIAL_QUEUE));
        let mut events = Vec::new();
        for _ in 0..config.queue_capacity {
            let ty = draw_type(&mut rng, &state.catalog.selection_weights);
            let job = state.instantiate_job(ty, 0);
            state.admit(job, 0, &mut events);
        }

        Ok(Kernel { state })
    }

    /// Processes one clock signal and advances the clock. Returns the events
    /// of this signal in processing order.
    pub fn tick(&mut self, scheduler: &mut dyn Scheduler) -> Result<Vec<Event>> {
        let state = &mut self.state;
        assert!(state.clk < state.horizon, "tick past horizon");
        let clk = state.clk;
        let mut events = Vec::new();

        // 1. Task completions at this clock release successors.
        let mut completed_keys = Vec::new();
        for pe in &mut state.pes {
            if let Some(running) = pe.running {
                if running.finish_clk == clk {
                    pe.running = None;
                    completed_keys.push(running.key);
                }
            }
        }
        completed_keys.sort();
        for key in completed_keys {
            let job = state.job_mut(key.job).expect("running task's job is queued");
            let job_type_id = job.job_type_id;
            job.tasks[key.task as usize].status = TaskStatus::Completed;
            job.remaining_tasks -= 1;
            events.push(Event::TaskCompleted { key, clk });

            let successors: Vec<usize> = state.catalog.job_types[job_type_id]
                .successors(key.task as usize)
                .map(|e| e.succ)
                .collect();
            let job = state.job_mut(key.job).expect("job still queued");
            for succ in successors {
                let task = &mut job.tasks[succ];
                task.remaining_preds -= 1;
                if task.remaining_preds == 0 {
                    debug_assert_eq!(task.status, TaskStatus::Outstanding);
                    task.status = TaskStatus::Ready;
                    task.ready_clk = Some(clk);
                    events.push(Event::TaskReady { key: task.key, clk });
                }
            }
            scheduler.on_task_completed(key, clk);
        }

        // 2. Completed jobs leave the queue.
        let mut jobs_completed_now: u32 = 0;
        let mut i = 0;
        while i < state.job_queue.len() {
            if state.job_queue[i].remaining_tasks == 0 {
                let mut job = state.job_queue.remove(i);
                job.complete_clk = Some(clk);
                state.completed_jobs += 1;
                jobs_completed_now += 1;
                events.push(Event::JobCompleted {
                    job: job.job_instance_id,
                    clk,
                });
                state.completed_job_records.push(JobRecord {
                    job_instance_id: job.job_instance_id,
                    job_type_id: job.job_type_id,
                    inject_clk: job.inject_clk,
                    admit_clk: job.admit_clk,
                    complete_clk: job.complete_clk,
                });
            } else {
                i += 1;
            }
        }

        // 3. New injections join the backlog.
        while state.arrivals.front().is_some_and(|&(t, _)| t == clk) {
            let (_, ty) = state.arrivals.pop_front().unwrap();
            let job = state.instantiate_job(ty, clk);
            events.push(Event::JobInjected {
                job: job.job_instance_id,
                clk,
            });
            state.backlog.push_back(job);
        }

        // 4. Admissions into freed queue slots, oldest first.
        while state.job_queue.len() < state.queue_capacity && !state.backlog.is_empty() {
            let job = state.backlog.pop_front().unwrap();
            state.admit(job, clk, &mut events);
        }

        // 5. Scheduler invocation over the ready set.
        let ready = state.ready_tasks();
        if !ready.is_empty() {
            let decision = scheduler.decide(&ready, state);
            Self::apply_decision(state, &ready, decision, &mut events)?;
        }

        // 6. Dispatch: an idle PE starts the head of its FIFO once the head's
        // data is local. Execution times are >= 1, so a PE starts at most one
        // task per clock.
        for pe_id in 0..state.pes.len() {
            let head_ready = {
                let pe = &state.pes[pe_id];
                pe.running.is_none() && pe.fifo.front().is_some_and(|q| q.data_ready_clk <= clk)
            };
            if !head_ready {
                continue;
            }
            let queued = state.pes[pe_id].fifo.pop_front().unwrap();
            let finish = clk + queued.exec;
            {
                let pe = &mut state.pes[pe_id];
                pe.running = Some(RunningTask {
                    key: queued.key,
                    start_clk: clk,
                    finish_clk: finish,
                });
                pe.busy_clocks += queued.exec;
                pe.task_energy += queued.energy;
            }
            let job = state.job_mut(queued.key.job).expect("queued task's job");
            let job_type_id = job.job_type_id;
            let task = &mut job.tasks[queued.key.task as usize];
            task.status = TaskStatus::Running;
            task.start_clk = Some(clk);
            task.finish_clk = Some(finish);
            let ready_clk = task.ready_clk.expect("started task was ready");
            state.task_records.push(TaskRecord {
                job_instance_id: queued.key.job,
                job_type_id,
                task_id: queued.key.task as usize,
                pe: pe_id,
                ready_clk,
                start_clk: clk,
                finish_clk: finish,
                completed: false,
                energy: queued.energy,
            });
            events.push(Event::TaskStarted {
                key: queued.key,
                pe: pe_id,
                clk,
            });
            scheduler.on_task_started(queued.key, clk);
        }

        state.completions_per_clk[clk as usize] = jobs_completed_now;
        scheduler.on_tick(clk, jobs_completed_now);

        debug_assert_eq!(
            state.injected_jobs,
            state.completed_jobs + state.job_queue.len() as u64 + state.backlog.len() as u64,
            "job conservation at clk {clk}"
        );

        state.clk += 1;
        Ok(events)
    }

    fn apply_decision(
        state: &mut KernelState,
        ready: &[ReadyTask],
        decision: SchedulerDecision,
        events: &mut Vec<Event>,
    ) -> Result<()> {
        if decision.assignments.len() != ready.len() {
            return Err(SimError::SchedulerContract(format!(
                "decision covers {} tasks but {} were presented",
                decision.assignments.len(),
                ready.len()
            )));
        }
        let mut seen = vec![false; ready.len()];
        let num_pes = state.platform.num_pes();
        for &(index, pe_id) in &decision.assignments {
            if index >= ready.len() || seen[index] {
                return Err(SimError::SchedulerContract(format!(
                    "decision names presented task {index} {}",
                    if index >= ready.len() { "out of range" } else { "twice" }
                )));
            }
            seen[index] = true;
            let rt = &ready[index];
            if pe_id >= num_pes {
                return Err(SimError::SchedulerContract(format!(
                    "task {:?} assigned to pe {pe_id}, platform has {num_pes}",
                    rt.key
                )));
            }
            let data_ready_clk = state.data_ready_on(rt.key, pe_id);
            let template = state.template(rt.key);
            let exec = state.platform.exec_time(pe_id, template)?;
            let energy = state.platform.task_energy(pe_id, template);
            let job = state.job_mut(rt.key.job).expect("ready task's job");
            let task = &mut job.tasks[rt.key.task as usize];
            task.assigned_pe = Some(pe_id);
            task.data_ready_clk = Some(data_ready_clk);
            state.pes[pe_id].fifo.push_back(QueuedTask {
                key: rt.key,
                data_ready_clk,
                exec,
                energy,
            });
            events.push(Event::TaskAssigned {
                key: rt.key,
                pe: pe_id,
                data_ready_clk,
            });
        }
        Ok(())
    }

    /// Ticks until the horizon.
    pub fn run_to_end(&mut self, scheduler: &mut dyn Scheduler) -> Result<()> {
        while self.state.clk < self.state.horizon {
            self.tick(scheduler)?;
        }
        Ok(())
    }

    /// Finalizes the episode into an immutable trace.
    pub fn into_trace(self) -> Trace {
        let state = self.state;
        let horizon = state.horizon;

        let mut tasks = state.task_records;
        // A completion is processed at the tick equal to its finish clock, so
        // only finishes strictly inside the horizon count as completed.
        for record in &mut tasks {
            record.completed = record.finish_clk < horizon;
        }
        tasks.sort_by_key(|r| (r.start_clk, r.pe, r.job_instance_id, r.task_id));

        let mut jobs = state.completed_job_records;
        for job in state.job_queue.iter().chain(state.backlog.iter()) {
            jobs.push(JobRecord {
                job_instance_id: job.job_instance_id,
                job_type_id: job.job_type_id,
                inject_clk: job.inject_clk,
                admit_clk: job.admit_clk,
                complete_clk: None,
            });
        }
        jobs.sort_by_key(|j| j.job_instance_id);

        let pe_usage = state
            .pes
            .iter()
            .enumerate()
            .map(|(pe_id, pe)| {
                let overshoot = pe
                    .running
                    .map(|r| r.finish_clk.saturating_sub(horizon))
                    .unwrap_or(0);
                let busy = (pe.busy_clocks - overshoot).min(horizon);
                let idle = horizon - busy;
                let idle_energy = state.platform.pes[pe_id].idle_power * idle as f64;
                PeUsage {
                    pe_id,
                    busy_clocks: busy,
                    idle_clocks: idle,
                    task_energy: pe.task_energy,
                    idle_energy,
                }
            })
            .collect();

        Trace {
            horizon,
            scale: state.scale,
            queue_capacity: state.queue_capacity,
            tasks,
            jobs,
            completions_per_clk: state.completions_per_clk,
            pe_usage,
            injected_jobs: state.injected_jobs,
            completed_jobs: state.completed_jobs,
        }
    }
}

fn draw_type(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    use rand::Rng;
    let u: f64 = rng.random_range(0.0..1.0);
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Runs one full episode and returns its trace.
pub fn run(config: &EpisodeConfig, scheduler: &mut dyn Scheduler, seed: u64) -> Result<Trace> {
    let mut kernel = Kernel::init(config, seed)?;
    kernel.run_to_end(scheduler)?;
    Ok(kernel.into_trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::platform::PeProfile;
    use crate::workload::{DagEdge, GeneratorParams, TaskTemplate};

    /// Assigns every presented task to a fixed PE.
    struct PinTo(usize);

    impl Scheduler for PinTo {
        fn name(&self) -> &str {
            "pin"
        }
        fn decide(&mut self, ready: &[ReadyTask], _state: &KernelState) -> SchedulerDecision {
            SchedulerDecision::in_presentation_order(vec![self.0; ready.len()])
        }
    }

    /// Maps tasks by a fixed (task_id -> pe) table.
    struct PinByTask(Vec<usize>);

    impl Scheduler for PinByTask {
        fn name(&self) -> &str {
            "pin-by-task"
        }
        fn decide(&mut self, ready: &[ReadyTask], _state: &KernelState) -> SchedulerDecision {
            SchedulerDecision::in_presentation_order(
                ready.iter().map(|rt| self.0[rt.key.task as usize]).collect::<Vec<_>>(),
            )
        }
    }

    fn single_type_catalog(dag: JobDag) -> Arc<JobTypeCatalog> {
        let num_pe_types = dag.tasks[0].exec_time.len();
        Arc::new(JobTypeCatalog {
            num_pe_types,
            job_types: vec![dag],
            selection_weights: vec![1.0],
        })
    }

    fn uniform_platform(num_pes: usize, bandwidth: f64) -> Arc<Platform> {
        let pes = (0..num_pes)
            .map(|pe_id| PeProfile {
                pe_id,
                pe_type: pe_id.min(1),
                active_power: 2.0,
                idle_power: 0.5,
            })
            .collect();
        let mut bw = vec![vec![bandwidth; num_pes]; num_pes];
        for (i, row) in bw.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        Arc::new(Platform { pes, bandwidth: bw })
    }

    fn chain(execs: &[&[Clock]], volume: f64) -> JobDag {
        JobDag {
            job_type_id: 0,
            tasks: execs
                .iter()
                .enumerate()
                .map(|(i, e)| TaskTemplate {
                    task_id: i,
                    exec_time: e.to_vec(),
                    energy: vec![None; e.len()],
                })
                .collect(),
            edges: (1..execs.len())
                .map(|i| DagEdge {
                    pred: i - 1,
                    succ: i,
                    data_volume: volume,
                })
                .collect(),
        }
    }

    #[test]
    fn single_task_completes_after_exec_time() {
        let dag = chain(&[&[5]], 0.0);
        let config = EpisodeConfig {
            catalog: single_type_catalog(dag),
            platform: uniform_platform(1, 1.0),
            horizon: 20,
            scale: 1000.0,
            queue_capacity: 1,
            // keep injections away: scale >> horizon makes extra arrivals rare
        };
        let mut kernel = Kernel::init(&config, 9).unwrap();
        let mut sched = PinTo(0);
        let ev0 = kernel.tick(&mut sched).unwrap();
        assert!(ev0.iter().any(|e| matches!(e, Event::TaskStarted { clk: 0, .. })));
        for _ in 1..5 {
            let ev = kernel.tick(&mut sched).unwrap();
            assert!(!ev.iter().any(|e| matches!(e, Event::TaskCompleted { .. })));
        }
        let ev5 = kernel.tick(&mut sched).unwrap();
        assert!(ev5.iter().any(|e| matches!(e, Event::TaskCompleted { clk: 5, .. })));
        assert!(ev5.iter().any(|e| matches!(e, Event::JobCompleted { clk: 5, .. })));
    }

    #[test]
    fn cross_pe_chain_waits_for_transfer() {
        // A on pe0 finishes at 5; volume 8 over bandwidth 2 -> B starts at 9
        // on pe1 even though pe1 is idle the whole time.
        let dag = chain(&[&[5, 5], &[3, 3]], 8.0);
        let config = EpisodeConfig {
            catalog: single_type_catalog(dag),
            platform: uniform_platform(2, 2.0),
            horizon: 40,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let mut kernel = Kernel::init(&config, 9).unwrap();
        let mut sched = PinByTask(vec![0, 1]);
        let mut b_start = None;
        for _ in 0..40 {
            for e in kernel.tick(&mut sched).unwrap() {
                if let Event::TaskStarted { key, pe, clk } = e {
                    if key.task == 1 {
                        b_start = Some((pe, clk));
                    }
                }
            }
        }
        assert_eq!(b_start, Some((1, 9)));
    }

    #[test]
    fn same_pe_chain_runs_back_to_back() {
        let dag = chain(&[&[5, 5], &[3, 3]], 8.0);
        let config = EpisodeConfig {
            catalog: single_type_catalog(dag),
            platform: uniform_platform(2, 2.0),
            horizon: 40,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let mut kernel = Kernel::init(&config, 9).unwrap();
        let mut sched = PinTo(0);
        let mut b_start = None;
        for _ in 0..40 {
            for e in kernel.tick(&mut sched).unwrap() {
                if let Event::TaskStarted { key, clk, .. } = e {
                    if key.task == 1 {
                        b_start = Some(clk);
                    }
                }
            }
        }
        assert_eq!(b_start, Some(5));
    }

    #[test]
    fn single_pe_serializes_critical_path() {
        // On one PE a chain completes at the sum of its execution times.
        let dag = chain(&[&[4], &[6], &[2]], 3.0);
        let config = EpisodeConfig {
            catalog: single_type_catalog(dag),
            platform: uniform_platform(1, 1.0),
            horizon: 50,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let trace = run(&config, &mut PinTo(0), 9).unwrap();
        let job = &trace.jobs[0];
        assert_eq!(job.complete_clk, Some(12));
    }

    #[test]
    fn full_queue_delays_admission() {
        let dag = chain(&[&[30]], 0.0);
        let config = EpisodeConfig {
            catalog: single_type_catalog(dag),
            platform: uniform_platform(1, 1.0),
            horizon: 200,
            scale: 10.0,
            queue_capacity: 1,
        };
        let trace = run(&config, &mut PinTo(0), 3).unwrap();
        // The initial job holds the single slot for 30 clocks; any job
        // injected before that completes must be admitted strictly later.
        let mut saw_delayed = false;
        for job in &trace.jobs {
            if let Some(admit) = job.admit_clk {
                assert!(admit >= job.inject_clk);
                if job.inject_clk > 0 && job.inject_clk < 30 {
                    assert!(admit > job.inject_clk);
                    saw_delayed = true;
                }
            }
        }
        assert!(saw_delayed, "expected at least one arrival during the first service");
    }

    #[test]
    fn zero_capacity_idles() {
        let dag = chain(&[&[5]], 0.0);
        let config = EpisodeConfig {
            catalog: single_type_catalog(dag),
            platform: uniform_platform(1, 1.0),
            horizon: 100,
            scale: 10.0,
            queue_capacity: 0,
        };
        let trace = run(&config, &mut PinTo(0), 3).unwrap();
        assert_eq!(trace.completed_jobs, 0);
        assert!(trace.tasks.is_empty());
        assert!(trace.injected_jobs > 0);
    }

    #[test]
    fn zero_horizon_empty_trace() {
        let dag = chain(&[&[5]], 0.0);
        let config = EpisodeConfig {
            catalog: single_type_catalog(dag),
            platform: uniform_platform(1, 1.0),
            horizon: 0,
            scale: 10.0,
            queue_capacity: 3,
        };
        let trace = run(&config, &mut PinTo(0), 3).unwrap();
        assert_eq!(trace.completed_jobs, 0);
        assert!(trace.tasks.is_empty());
        assert_eq!(trace.completions_per_clk.len(), 0);
    }

    #[test]
    fn init_fills_queue_with_ready_roots() {
        let catalog = crate::workload::generate_catalog(7, 5, 10, 3, &GeneratorParams::default())
            .map(Arc::new)
            .unwrap();
        let platform = uniform_platform(3, 2.0);
        let config = EpisodeConfig {
            catalog,
            platform,
            horizon: 100,
            scale: 25.0,
            queue_capacity: 3,
        };
        let kernel = Kernel::init(&config, 1).unwrap();
        assert_eq!(kernel.state.job_queue.len(), 3);
        for job in &kernel.state.job_queue {
            assert_eq!(job.admit_clk, Some(0));
            let dag = &kernel.state.catalog.job_types[job.job_type_id];
            for root in dag.roots() {
                assert_eq!(job.tasks[root].status, TaskStatus::Ready);
            }
        }
    }

    #[test]
    fn same_seed_same_initial_state() {
        let catalog = crate::workload::generate_catalog(7, 5, 10, 3, &GeneratorParams::default())
            .map(Arc::new)
            .unwrap();
        let config = EpisodeConfig {
            catalog,
            platform: uniform_platform(3, 2.0),
            horizon: 100,
            scale: 25.0,
            queue_capacity: 3,
        };
        let a = Kernel::init(&config, 1).unwrap();
        let b = Kernel::init(&config, 1).unwrap();
        let types_a: Vec<usize> = a.state.job_queue.iter().map(|j| j.job_type_id).collect();
        let types_b: Vec<usize> = b.state.job_queue.iter().map(|j| j.job_type_id).collect();
        assert_eq!(types_a, types_b);
    }

    #[test]
    fn invalid_pe_aborts_with_contract_violation() {
        let dag = chain(&[&[5]], 0.0);
        let config = EpisodeConfig {
            catalog: single_type_catalog(dag),
            platform: uniform_platform(1, 1.0),
            horizon: 10,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let err = run(&config, &mut PinTo(1), 3).unwrap_err();
        assert!(matches!(err, SimError::SchedulerContract(_)));
    }

    /// Omits one task from the decision.
    struct Omitter;
    impl Scheduler for Omitter {
        fn name(&self) -> &str {
            "omitter"
        }
        fn decide(&mut self, ready: &[ReadyTask], _state: &KernelState) -> SchedulerDecision {
            SchedulerDecision::in_presentation_order(vec![0; ready.len().saturating_sub(1)])
        }
    }

    #[test]
    fn incomplete_decision_aborts() {
        let dag = chain(&[&[5]], 0.0);
        let config = EpisodeConfig {
            catalog: single_type_catalog(dag),
            platform: uniform_platform(1, 1.0),
            horizon: 10,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let err = run(&config, &mut Omitter, 3).unwrap_err();
        assert!(matches!(err, SimError::SchedulerContract(_)));
    }
}
