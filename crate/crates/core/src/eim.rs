//! Eclectic interaction matching: the episode experience buffer and return
//! redistribution.
//!
//! Scheduling decisions happen at irregular paused-clock interactions while
//! rewards accrue once per clock, so a decision's consequence is spread over
//! the execution span of its task. The buffer records every decision, the
//! actual start and completion clocks of its task, and the per-clock reward
//! track; [`EimBuffer::redistribute`] then pairs each decision with a return
//! computed over its own task's span (or, alternatively, from its start to
//! the episode end).

use std::collections::HashMap;

use crate::error::{Result, SimError};
use crate::kernel::TaskKey;
use crate::scalar::Scalar;
use crate::Clock;

/// How far a decision's return reaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EimMode {
    /// Sum rewards over the task's own execution span `[start, end]`.
    #[default]
    Span,
    /// Sum rewards from the task's start to the end of the episode.
    ToHorizon,
}

impl EimMode {
    pub fn parse(s: &str) -> Result<EimMode> {
        match s {
            "span" => Ok(EimMode::Span),
            "to-horizon" => Ok(EimMode::ToHorizon),
            other => Err(SimError::Config(format!(
                "unknown eim mode {other:?}, expected span|to-horizon"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EimMode::Span => "span",
            EimMode::ToHorizon => "to-horizon",
        }
    }
}

/// One decision and the lifecycle of the task it scheduled.
#[derive(Debug, Clone)]
pub struct DecisionRecord<T> {
    pub observation: Vec<T>,
    pub action: usize,
    pub task: TaskKey,
    pub log_prob: Option<T>,
    pub value: Option<T>,
    pub start_clk: Option<Clock>,
    pub end_clk: Option<Clock>,
}

/// One training sample: a decision paired with its redistributed return.
#[derive(Debug, Clone)]
pub struct BatchEntry<T> {
    pub observation: Vec<T>,
    pub action: usize,
    pub ret: T,
    pub log_prob: Option<T>,
    pub value: Option<T>,
    pub start_clk: Clock,
    pub end_clk: Clock,
}

/// The redistributed episode. Decisions whose tasks never completed by the
/// horizon are dropped and counted.
#[derive(Debug, Clone)]
pub struct EimBatch<T> {
    pub entries: Vec<BatchEntry<T>>,
    pub dropped: usize,
}

/// Single-writer buffer for one episode.
#[derive(Debug, Clone, Default)]
pub struct EimBuffer<T> {
    decisions: Vec<DecisionRecord<T>>,
    by_task: HashMap<TaskKey, usize>,
    rewards: Vec<T>,
    last_event_clk: Clock,
}

impl<T: Scalar> EimBuffer<T> {
    pub fn new() -> Self {
        EimBuffer {
            decisions: Vec::new(),
            by_task: HashMap::new(),
            rewards: Vec::new(),
            last_event_clk: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn rewards(&self) -> &[T] {
        &self.rewards
    }

    pub fn decisions(&self) -> &[DecisionRecord<T>] {
        &self.decisions
    }

    fn advance_clk(&mut self, clk: Clock, what: &str) -> Result<()> {
        if clk < self.last_event_clk {
            return Err(SimError::Buffer(format!(
                "{what} at clk {clk} after an event at clk {}",
                self.last_event_clk
            )));
        }
        self.last_event_clk = clk;
        Ok(())
    }

    /// Stores a decision at the paused clock. Each task is decided once.
    pub fn record_decision(
        &mut self,
        observation: Vec<T>,
        action: usize,
        task: TaskKey,
        log_prob: Option<T>,
        value: Option<T>,
    ) -> Result<()> {
        if self.by_task.contains_key(&task) {
            return Err(SimError::Buffer(format!("task {task:?} decided twice")));
        }
        self.by_task.insert(task, self.decisions.len());
        self.decisions.push(DecisionRecord {
            observation,
            action,
            task,
            log_prob,
            value,
            start_clk: None,
            end_clk: None,
        });
        Ok(())
    }

    /// Marks the actual PE start of a decided task.
    pub fn record_start(&mut self, task: TaskKey, clk: Clock) -> Result<()> {
        self.advance_clk(clk, "start")?;
        let idx = *self
            .by_task
            .get(&task)
            .ok_or_else(|| SimError::Buffer(format!("start for undecided task {task:?}")))?;
        let record = &mut self.decisions[idx];
        if record.start_clk.is_some() {
            return Err(SimError::Buffer(format!("task {task:?} started twice")));
        }
        record.start_clk = Some(clk);
        Ok(())
    }

    /// Marks the completion of a started task. `clk` must exceed the start.
    pub fn record_completion(&mut self, task: TaskKey, clk: Clock) -> Result<()> {
        self.advance_clk(clk, "completion")?;
        let idx = *self
            .by_task
            .get(&task)
            .ok_or_else(|| SimError::Buffer(format!("completion for undecided task {task:?}")))?;
        let record = &mut self.decisions[idx];
        let Some(start) = record.start_clk else {
            return Err(SimError::Buffer(format!(
                "task {task:?} completed before it started"
            )));
        };
        if record.end_clk.is_some() {
            return Err(SimError::Buffer(format!("task {task:?} completed twice")));
        }
        if clk <= start {
            return Err(SimError::Buffer(format!(
                "task {task:?} completion clk {clk} <= start clk {start}"
            )));
        }
        record.end_clk = Some(clk);
        Ok(())
    }

    /// Appends the reward of clock `clk`; the track must be contiguous from 0.
    pub fn record_reward(&mut self, clk: Clock, reward: T) -> Result<()> {
        if clk != self.rewards.len() as Clock {
            return Err(SimError::Buffer(format!(
                "reward for clk {clk}, expected clk {}",
                self.rewards.len()
            )));
        }
        self.advance_clk(clk, "reward")?;
        self.rewards.push(reward);
        Ok(())
    }

    /// Pairs every completed decision with its redistributed return.
    ///
    /// Span mode: `G_i = sum_{clk=s_i..=e_i} gamma^(clk-s_i) R(clk)`.
    /// To-horizon mode: `G_i = sum_{clk=s_i..horizon} gamma^(clk-s_i) R(clk)`,
    /// computed right-to-left in one pass. Discounting is anchored at each
    /// decision's own start clock so returns are comparable across decisions.
    pub fn redistribute(&self, gamma: T, mode: EimMode) -> EimBatch<T> {
        let horizon = self.rewards.len();
        // Suffix returns g[clk] = R(clk) + gamma * g[clk+1].
        let suffix: Vec<T> = match mode {
            EimMode::ToHorizon => {
                let mut g = vec![T::zero(); horizon + 1];
                for clk in (0..horizon).rev() {
                    g[clk] = self.rewards[clk] + gamma * g[clk + 1];
                }
                g
            }
            EimMode::Span => Vec::new(),
        };

        let mut entries = Vec::new();
        let mut dropped = 0usize;
        for record in &self.decisions {
            let (Some(start), Some(end)) = (record.start_clk, record.end_clk) else {
                dropped += 1;
                continue;
            };
            let ret = match mode {
                EimMode::Span => {
                    let mut acc = T::zero();
                    let mut factor = T::one();
                    let last = (end as usize).min(horizon.saturating_sub(1));
                    for clk in start as usize..=last {
                        acc = acc + factor * self.rewards[clk];
                        factor = factor * gamma;
                    }
                    acc
                }
                EimMode::ToHorizon => suffix[(start as usize).min(horizon)],
            };
            entries.push(BatchEntry {
                observation: record.observation.clone(),
                action: record.action,
                ret,
                log_prob: record.log_prob,
                value: record.value,
                start_clk: start,
                end_clk: end,
            });
        }
        EimBatch { entries, dropped }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn key(i: u64) -> TaskKey {
        TaskKey {
            job: i,
            task: (i % 7) as u32,
        }
    }

    /// Builds a buffer the way the kernel would: decisions first, then
    /// starts, completions and rewards interleaved in clock order.
    fn filled_buffer(rewards: &[f64], spans: &[(Clock, Clock)]) -> EimBuffer<f64> {
        let mut buf = EimBuffer::new();
        for i in 0..spans.len() {
            buf.record_decision(vec![i as f64], i % 3, key(i as u64), None, None)
                .unwrap();
        }
        for clk in 0..rewards.len() as Clock {
            for (i, &(s, _)) in spans.iter().enumerate() {
                if s == clk {
                    buf.record_start(key(i as u64), clk).unwrap();
                }
            }
            for (i, &(_, e)) in spans.iter().enumerate() {
                if e == clk {
                    buf.record_completion(key(i as u64), clk).unwrap();
                }
            }
            buf.record_reward(clk, rewards[clk as usize]).unwrap();
        }
        buf
    }

    /// Naive double-loop oracle for both modes.
    fn oracle(rewards: &[f64], s: Clock, e: Clock, gamma: f64, mode: EimMode) -> f64 {
        let last = match mode {
            EimMode::Span => (e as usize).min(rewards.len().saturating_sub(1)),
            EimMode::ToHorizon => rewards.len().saturating_sub(1),
        };
        let mut acc = 0.0;
        for clk in s as usize..=last {
            acc += gamma.powi((clk - s as usize) as i32) * rewards[clk];
        }
        acc
    }

    #[test]
    fn span_return_sums_inclusive_window() {
        let buf = filled_buffer(&[-0.5, -0.5, 49.5], &[(0, 2)]);
        let batch = buf.redistribute(1.0, EimMode::Span);
        assert_eq!(batch.entries.len(), 1);
        assert!((batch.entries[0].ret - 48.5).abs() < 1e-12);
    }

    #[test]
    fn zero_gamma_keeps_only_start_reward() {
        let buf = filled_buffer(&[3.0, 7.0, 11.0], &[(1, 2)]);
        let batch = buf.redistribute(0.0, EimMode::Span);
        assert_eq!(batch.entries[0].ret, 7.0);
        let batch = buf.redistribute(0.0, EimMode::ToHorizon);
        assert_eq!(batch.entries[0].ret, 7.0);
    }

    #[test]
    fn identical_spans_get_identical_returns() {
        let rewards: Vec<f64> = (0..30).map(|i| -0.5 + (i % 7) as f64).collect();
        let buf = filled_buffer(&rewards, &[(3, 11), (3, 11), (5, 20)]);
        let batch = buf.redistribute(0.97, EimMode::Span);
        assert_eq!(batch.entries[0].ret, batch.entries[1].ret);
        assert_ne!(batch.entries[0].ret, batch.entries[2].ret);
    }

    #[test]
    fn span_with_no_completions_is_pure_penalty() {
        let rewards = vec![-0.5; 40];
        let buf = filled_buffer(&rewards, &[(4, 13)]);
        let batch = buf.redistribute(1.0, EimMode::Span);
        assert!((batch.entries[0].ret - (-0.5 * 10.0)).abs() < 1e-12);
    }

    #[test]
    fn pending_decisions_are_dropped_and_counted() {
        let mut buf: EimBuffer<f64> = EimBuffer::new();
        buf.record_decision(vec![0.0], 0, key(0), None, None).unwrap();
        buf.record_decision(vec![1.0], 1, key(1), None, None).unwrap();
        for clk in 0..10u64 {
            if clk == 2 {
                buf.record_start(key(0), clk).unwrap();
            }
            if clk == 3 {
                buf.record_start(key(1), clk).unwrap();
            }
            if clk == 6 {
                buf.record_completion(key(0), clk).unwrap();
            }
            buf.record_reward(clk, -0.5).unwrap();
        }
        // task 1 never completes by the horizon
        let batch = buf.redistribute(1.0, EimMode::Span);
        assert_eq!(batch.entries.len(), 1);
        assert_eq!(batch.dropped, 1);
    }

    #[test]
    fn completion_before_start_rejected() {
        let mut buf: EimBuffer<f64> = EimBuffer::new();
        buf.record_decision(vec![0.0], 0, key(0), None, None).unwrap();
        assert!(buf.record_completion(key(0), 5).is_err());
    }

    #[test]
    fn double_decision_rejected() {
        let mut buf: EimBuffer<f64> = EimBuffer::new();
        buf.record_decision(vec![0.0], 0, key(0), None, None).unwrap();
        assert!(buf.record_decision(vec![1.0], 1, key(0), None, None).is_err());
    }

    #[test]
    fn out_of_order_clks_rejected() {
        let mut buf: EimBuffer<f64> = EimBuffer::new();
        buf.record_decision(vec![0.0], 0, key(0), None, None).unwrap();
        buf.record_decision(vec![1.0], 1, key(1), None, None).unwrap();
        buf.record_start(key(0), 5).unwrap();
        assert!(buf.record_start(key(1), 3).is_err());
    }

    #[test]
    fn reward_track_must_be_contiguous() {
        let mut buf: EimBuffer<f64> = EimBuffer::new();
        buf.record_reward(0, -0.5).unwrap();
        assert!(buf.record_reward(2, -0.5).is_err());
        buf.record_reward(1, -0.5).unwrap();
        assert_eq!(buf.rewards().len(), 2);
    }

    #[test]
    fn matches_oracle_on_random_episodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let horizon = rng.random_range(2..=200usize);
            let rewards: Vec<f64> = (0..horizon)
                .map(|_| {
                    if rng.random_bool(0.1) {
                        -0.5 + 50.0 * rng.random_range(1..=3) as f64
                    } else {
                        -0.5
                    }
                })
                .collect();
            let n = rng.random_range(1..=50usize);
            let mut spans = Vec::new();
            for _ in 0..n {
                let s = rng.random_range(0..horizon as Clock - 1);
                let e = rng.random_range(s + 1..horizon as Clock);
                spans.push((s, e));
            }
            // distinct tasks but possibly identical spans
            let buf = filled_buffer(&rewards, &spans);
            let gamma = [0.0, 0.9, 0.999, 1.0][rng.random_range(0..4)];
            for mode in [EimMode::Span, EimMode::ToHorizon] {
                let batch = buf.redistribute(gamma, mode);
                assert_eq!(batch.entries.len(), n);
                for entry in &batch.entries {
                    let want = oracle(&rewards, entry.start_clk, entry.end_clk, gamma, mode);
                    assert!(
                        (entry.ret - want).abs() <= 1e-9,
                        "mode {mode:?} gamma {gamma} span ({}, {}): got {} want {want}",
                        entry.start_clk,
                        entry.end_clk,
                        entry.ret
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn redistribute_matches_oracle(
            seed in 0u64..5000,
            gamma in 0.0f64..=1.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let horizon = rng.random_range(2..=60usize);
            let rewards: Vec<f64> = (0..horizon).map(|_| rng.random_range(-1.0..50.0)).collect();
            let s = rng.random_range(0..horizon as Clock - 1);
            let e = rng.random_range(s + 1..horizon as Clock);
            let buf = filled_buffer(&rewards, &[(s, e)]);
            for mode in [EimMode::Span, EimMode::ToHorizon] {
                let batch = buf.redistribute(gamma, mode);
                let want = oracle(&rewards, s, e, gamma, mode);
                prop_assert!((batch.entries[0].ret - want).abs() <= 1e-9);
            }
        }
    }
}
