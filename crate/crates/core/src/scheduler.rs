//! The scheduling-policy interface.
//!
//! At every clock signal with a non-empty ready set the kernel presents the
//! never-assigned ready tasks in canonical order (ascending admit clock, job
//! instance id, task id) and applies the returned decision atomically. A
//! decision must cover exactly the presented tasks; anything else aborts the
//! simulation with a diagnostic.

use crate::kernel::{KernelState, TaskKey};
use crate::Clock;

/// A ready task as presented to a policy. The full kernel state is passed
/// alongside for policies that inspect PE load or job structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadyTask {
    pub key: TaskKey,
    pub job_type_id: usize,
    pub admit_clk: Clock,
    pub ready_clk: Clock,
}

/// An ordered list of (presented-task index, PE id) pairs.
///
/// The order is part of the decision: tasks enter their PE FIFOs in exactly
/// this order, so a policy that places high-priority work first keeps that
/// priority at dispatch time. The pairs must cover every presented index
/// exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulerDecision {
    pub assignments: Vec<(usize, usize)>,
}

impl SchedulerDecision {
    /// Assignments in presentation order: `pe_for[i]` is the PE of ready
    /// task `i`.
    pub fn in_presentation_order(pe_for: impl IntoIterator<Item = usize>) -> Self {
        SchedulerDecision {
            assignments: pe_for.into_iter().enumerate().collect(),
        }
    }
}

pub trait Scheduler {
    fn name(&self) -> &str;

    /// Maps every presented ready task to a PE. Called with the clock paused.
    fn decide(&mut self, ready: &[ReadyTask], state: &KernelState) -> SchedulerDecision;

    /// A previously assigned task started executing on its PE.
    fn on_task_started(&mut self, _key: TaskKey, _clk: Clock) {}

    /// A running task finished.
    fn on_task_completed(&mut self, _key: TaskKey, _clk: Clock) {}

    /// End of a clock signal; `jobs_completed` is the number of jobs that
    /// finished at this clock.
    fn on_tick(&mut self, _clk: Clock, _jobs_completed: u32) {}
}
