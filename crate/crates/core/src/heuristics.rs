//! Baseline scheduling policies: random, minimum execution time, earliest
//! task first, and a dynamic HEFT adaptation.
//!
//! HEFT orders the presented ready tasks by precomputed upward rank and maps
//! each to the PE with the smallest insertion-based earliest finish time,
//! given live PE reservations, predecessor finish clocks and transfer
//! delays. Ranks are computed once per job type; the templates are known
//! ahead of time, only the arrival mix is not.
//!
//! All tie-breaks are lexicographic (canonical task order, then lowest PE
//! id) so every policy is a pure function of (ready set, state, seed).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kernel::KernelState;
use crate::platform::Platform;
use crate::scheduler::{ReadyTask, Scheduler, SchedulerDecision};
use crate::workload::{JobDag, JobTypeCatalog};
use crate::Clock;

/// Uniform random PE per task; the evaluated reference point.
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        RandomPolicy {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Scheduler for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn decide(&mut self, ready: &[ReadyTask], state: &KernelState) -> SchedulerDecision {
        let num_pes = state.platform.num_pes();
        SchedulerDecision::in_presentation_order(
            ready.iter().map(|_| self.rng.random_range(0..num_pes)).collect::<Vec<_>>(),
        )
    }
}

/// Minimum execution time: each task goes to the PE with the smallest
/// execution time, ignoring load and transfer delays. Ties take the lowest
/// PE id.
pub struct MetPolicy;

impl Scheduler for MetPolicy {
    fn name(&self) -> &str {
        "met"
    }

    fn decide(&mut self, ready: &[ReadyTask], state: &KernelState) -> SchedulerDecision {
        let pe_for: Vec<usize> = ready
            .iter()
            .map(|rt| {
                let template = state.template(rt.key);
                (0..state.platform.num_pes())
                    .min_by_key(|&pe| {
                        state
                            .platform
                            .exec_time(pe, template)
                            .expect("validated catalog")
                    })
                    .expect("platform has pes")
            })
            .collect();
        SchedulerDecision::in_presentation_order(pe_for)
    }
}

/// Earliest task first: repeatedly commits the (task, PE) pair with the
/// smallest estimated finish time `max(pe available, data ready, now) +
/// exec`, appending to a tentative per-PE availability clock.
pub struct EtfPolicy;

impl Scheduler for EtfPolicy {
    fn name(&self) -> &str {
        "etf"
    }

    fn decide(&mut self, ready: &[ReadyTask], state: &KernelState) -> SchedulerDecision {
        let num_pes = state.platform.num_pes();
        let mut avail: Vec<Clock> = (0..num_pes)
            .map(|pe| projected_available(state, pe))
            .collect();
        let mut assignments = Vec::with_capacity(ready.len());
        let mut remaining: Vec<usize> = (0..ready.len()).collect();

        while !remaining.is_empty() {
            let mut best: Option<(Clock, usize, usize)> = None; // (finish, task idx, pe)
            for &idx in &remaining {
                let rt = &ready[idx];
                let template = state.template(rt.key);
                for pe in 0..num_pes {
                    let exec = state.platform.exec_time(pe, template).expect("valid catalog");
                    let data_ready = state.data_ready_on(rt.key, pe);
                    let start = avail[pe].max(data_ready).max(state.clk);
                    let finish = start + exec;
                    let candidate = (finish, idx, pe);
                    if best.is_none_or(|b| candidate < b) {
                        best = Some(candidate);
                    }
                }
            }
            let (finish, idx, pe) = best.expect("non-empty remaining set");
            assignments.push((idx, pe));
            avail[pe] = finish;
            remaining.retain(|&i| i != idx);
        }

        SchedulerDecision { assignments }
    }
}

/// Upward ranks per (job type, task): mean execution cost plus the maximum
/// over successors of mean edge delay plus successor rank.
#[derive(Debug, Clone)]
pub struct RankTable {
    ranks: Vec<Vec<f64>>,
}

impl RankTable {
    pub fn build(catalog: &JobTypeCatalog, platform: &Platform) -> RankTable {
        RankTable {
            ranks: catalog
                .job_types
                .iter()
                .map(|dag| heft_rank(dag, platform))
                .collect(),
        }
    }

    pub fn get(&self, job_type_id: usize, task_id: usize) -> f64 {
        self.ranks[job_type_id][task_id]
    }
}

/// Upward rank of every task of one DAG.
///
/// `rank(t) = mean_exec(t) + max over successors s of (mean_comm(t, s) +
/// rank(s))`; exit tasks have `rank = mean_exec`. Means are taken over all
/// PEs (execution) and all ordered distinct PE pairs (communication).
pub fn heft_rank(dag: &JobDag, platform: &Platform) -> Vec<f64> {
    let num_pes = platform.num_pes();
    let mean_exec: Vec<f64> = dag
        .tasks
        .iter()
        .map(|task| {
            let total: u64 = (0..num_pes)
                .map(|pe| platform.exec_time(pe, task).expect("valid catalog"))
                .sum();
            total as f64 / num_pes as f64
        })
        .collect();

    let mean_comm = |volume: f64| -> f64 {
        if num_pes < 2 {
            return 0.0;
        }
        let mut total = 0u64;
        let mut pairs = 0u64;
        for a in 0..num_pes {
            for b in 0..num_pes {
                if a != b {
                    total += platform.comm_delay(a, b, volume);
                    pairs += 1;
                }
            }
        }
        total as f64 / pairs as f64
    };

    let order = dag.topo_order().expect("acyclic dag");
    let mut rank = vec![0.0f64; dag.num_tasks()];
    for &t in order.iter().rev() {
        let downstream = dag
            .successors(t)
            .map(|e| mean_comm(e.data_volume) + rank[e.succ])
            .fold(0.0f64, f64::max);
        rank[t] = mean_exec[t] + downstream;
    }
    rank
}

/// Reserved execution windows of one PE, sorted and disjoint.
#[derive(Debug, Clone, Default)]
pub struct PeTimeline {
    intervals: Vec<(Clock, Clock)>,
}

impl PeTimeline {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intervals(&self) -> &[(Clock, Clock)] {
        &self.intervals
    }

    /// Inserts `[start, finish)` keeping the list sorted; the window must
    /// not overlap an existing reservation.
    pub fn insert(&mut self, start: Clock, finish: Clock) {
        debug_assert!(start < finish);
        let pos = self.intervals.partition_point(|&(s, _)| s < start);
        if pos > 0 {
            debug_assert!(self.intervals[pos - 1].1 <= start, "overlapping reservation");
        }
        if pos < self.intervals.len() {
            debug_assert!(finish <= self.intervals[pos].0, "overlapping reservation");
        }
        self.intervals.insert(pos, (start, finish));
    }
}

/// Smallest start `>= earliest_start` such that `[start, start + duration)`
/// fits in a gap of the reservation list or after its last interval.
pub fn insertion_eft(intervals: &[(Clock, Clock)], earliest_start: Clock, duration: Clock) -> Clock {
    debug_assert!(duration >= 1);
    let mut candidate = earliest_start;
    for &(s, f) in intervals {
        if candidate + duration <= s {
            return candidate;
        }
        candidate = candidate.max(f);
    }
    candidate
}

/// Append-only variant: after the last reservation (or `earliest_start`).
pub fn append_eft(intervals: &[(Clock, Clock)], earliest_start: Clock) -> Clock {
    intervals
        .last()
        .map(|&(_, f)| f.max(earliest_start))
        .unwrap_or(earliest_start)
}

/// Projects the PE's committed work (running task plus FIFO, in dispatch
/// order) into reserved windows starting at the current clock.
fn projected_timeline(state: &KernelState, pe_id: usize) -> PeTimeline {
    let pe = &state.pes[pe_id];
    let mut timeline = PeTimeline::new();
    let mut avail = state.clk;
    if let Some(running) = pe.running {
        timeline.insert(running.start_clk, running.finish_clk);
        avail = running.finish_clk;
    }
    for queued in &pe.fifo {
        let start = avail.max(queued.data_ready_clk);
        timeline.insert(start, start + queued.exec);
        avail = start + queued.exec;
    }
    timeline
}

/// Clock at which the PE would drain all committed work.
fn projected_available(state: &KernelState, pe_id: usize) -> Clock {
    projected_timeline(state, pe_id)
        .intervals()
        .last()
        .map(|&(_, f)| f)
        .unwrap_or(state.clk)
}

/// Dynamic HEFT: rank-ordered ready tasks, insertion-based EFT PE choice.
pub struct HeftPolicy {
    ranks: RankTable,
}

impl HeftPolicy {
    pub fn new(catalog: &JobTypeCatalog, platform: &Platform) -> Self {
        HeftPolicy {
            ranks: RankTable::build(catalog, platform),
        }
    }
}

impl Scheduler for HeftPolicy {
    fn name(&self) -> &str {
        "heft"
    }

    fn decide(&mut self, ready: &[ReadyTask], state: &KernelState) -> SchedulerDecision {
        let num_pes = state.platform.num_pes();
        let mut timelines: Vec<PeTimeline> = (0..num_pes)
            .map(|pe| projected_timeline(state, pe))
            .collect();

        let mut order: Vec<usize> = (0..ready.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = self.ranks.get(ready[a].job_type_id, ready[a].key.task as usize);
            let rb = self.ranks.get(ready[b].job_type_id, ready[b].key.task as usize);
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });

        let mut assignments = Vec::with_capacity(ready.len());
        for idx in order {
            let rt = &ready[idx];
            let template = state.template(rt.key);
            let mut best: Option<(Clock, usize, Clock)> = None; // (finish, pe, start)
            for pe in 0..num_pes {
                let exec = state.platform.exec_time(pe, template).expect("valid catalog");
                let earliest = state.data_ready_on(rt.key, pe).max(state.clk);
                let start = insertion_eft(timelines[pe].intervals(), earliest, exec);
                debug_assert!(
                    start <= append_eft(timelines[pe].intervals(), earliest),
                    "insertion EFT must not exceed append EFT"
                );
                let finish = start + exec;
                if best.is_none_or(|(bf, bp, _)| (finish, pe) < (bf, bp)) {
                    best = Some((finish, pe, start));
                }
            }
            let (finish, pe, start) = best.expect("platform has pes");
            timelines[pe].insert(start, finish);
            assignments.push((idx, pe));
        }

        SchedulerDecision { assignments }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Event, EpisodeConfig, Kernel};
    use crate::platform::PeProfile;
    use crate::workload::{DagEdge, TaskTemplate};
    use std::sync::Arc;

    fn platform(types: &[usize], bandwidth: f64) -> Arc<Platform> {
        let n = types.len();
        let pes = types
            .iter()
            .enumerate()
            .map(|(pe_id, &pe_type)| PeProfile {
                pe_id,
                pe_type,
                active_power: 2.0,
                idle_power: 0.2,
            })
            .collect();
        let mut bw = vec![vec![bandwidth; n]; n];
        for (i, row) in bw.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        Arc::new(Platform { pes, bandwidth: bw })
    }

    fn catalog_of(dag: JobDag) -> Arc<JobTypeCatalog> {
        let num_pe_types = dag.tasks[0].exec_time.len();
        Arc::new(JobTypeCatalog {
            num_pe_types,
            job_types: vec![dag],
            selection_weights: vec![1.0],
        })
    }

    fn task(task_id: usize, exec: &[Clock]) -> TaskTemplate {
        TaskTemplate {
            task_id,
            exec_time: exec.to_vec(),
            energy: vec![None; exec.len()],
        }
    }

    fn first_assignments(config: &EpisodeConfig, sched: &mut dyn Scheduler) -> Vec<(u32, usize)> {
        let mut kernel = Kernel::init(config, 5).unwrap();
        let events = kernel.tick(sched).unwrap();
        events
            .iter()
            .filter_map(|e| match e {
                Event::TaskAssigned { key, pe, .. } => Some((key.task, *pe)),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn met_picks_argmin_and_breaks_ties_low() {
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[5, 3, 7]), task(1, &[3, 3, 9])],
            edges: vec![],
        };
        let config = EpisodeConfig {
            catalog: catalog_of(dag),
            platform: platform(&[0, 1, 2], 1.0),
            horizon: 10,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let assigned = first_assignments(&config, &mut MetPolicy);
        assert_eq!(assigned, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn met_ignores_transfer_delay() {
        // Chain a -> b with a big transfer; after a completes on pe0, the
        // min-exec PE for b is pe1 and MET picks it even though the data
        // sits on pe0.
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[2, 9]), task(1, &[9, 2])],
            edges: vec![DagEdge {
                pred: 0,
                succ: 1,
                data_volume: 100.0,
            }],
        };
        let config = EpisodeConfig {
            catalog: catalog_of(dag),
            platform: platform(&[0, 1], 1.0),
            horizon: 200,
            scale: 10_000.0,
            queue_capacity: 1,
        };
        let mut kernel = Kernel::init(&config, 5).unwrap();
        let mut met = MetPolicy;
        let mut assignment = None;
        for _ in 0..50 {
            for e in kernel.tick(&mut met).unwrap() {
                if let Event::TaskAssigned { key, pe, .. } = e {
                    if key.task == 1 {
                        assignment = Some(pe);
                    }
                }
            }
        }
        assert_eq!(assignment, Some(1));
    }

    #[test]
    fn etf_single_task_picks_fastest_idle_pe() {
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[5, 3])],
            edges: vec![],
        };
        let config = EpisodeConfig {
            catalog: catalog_of(dag),
            platform: platform(&[0, 1], 1.0),
            horizon: 10,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let assigned = first_assignments(&config, &mut EtfPolicy);
        assert_eq!(assigned, vec![(0, 1)]);
    }

    #[test]
    fn etf_balances_two_identical_tasks() {
        // pe0 exec 4, pe1 exec 6 for both tasks. First goes to pe0 (finish
        // 4); queueing the second behind pe0 would finish at 8, pe1 finishes
        // at 6, so the second goes to pe1.
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[4, 6]), task(1, &[4, 6])],
            edges: vec![],
        };
        let config = EpisodeConfig {
            catalog: catalog_of(dag),
            platform: platform(&[0, 1], 1.0),
            horizon: 20,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let assigned = first_assignments(&config, &mut EtfPolicy);
        assert_eq!(assigned, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn etf_prefers_local_pe_over_remote_data() {
        // a runs on pe0, finishing at 5 with volume 8 over bandwidth 2:
        // remote data-ready is 9. Local: start 5, exec 6 -> finish 11.
        // Remote: start 9, exec 3 -> finish 12. Local wins.
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[5, 9]), task(1, &[6, 3])],
            edges: vec![DagEdge {
                pred: 0,
                succ: 1,
                data_volume: 8.0,
            }],
        };
        let config = EpisodeConfig {
            catalog: catalog_of(dag),
            platform: platform(&[0, 1], 2.0),
            horizon: 40,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let mut kernel = Kernel::init(&config, 5).unwrap();
        let mut etf = EtfPolicy;
        let mut assignment = None;
        for _ in 0..20 {
            for e in kernel.tick(&mut etf).unwrap() {
                if let Event::TaskAssigned { key, pe, .. } = e {
                    if key.task == 1 {
                        assignment = Some(pe);
                    }
                }
            }
        }
        assert_eq!(assignment, Some(0));
    }

    #[test]
    fn rank_of_exit_task_is_mean_exec() {
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[4, 4])],
            edges: vec![],
        };
        let ranks = heft_rank(&dag, &platform(&[0, 1], 1.0));
        assert_eq!(ranks, vec![4.0]);
    }

    #[test]
    fn rank_of_chain_adds_mean_edge_delay() {
        // root mean exec 3, exit mean exec 4, edge volume 8 over bandwidth 4
        // on both ordered pairs -> mean comm 2. rank(root) = 3 + 2 + 4 = 9.
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[3, 3]), task(1, &[4, 4])],
            edges: vec![DagEdge {
                pred: 0,
                succ: 1,
                data_volume: 8.0,
            }],
        };
        let ranks = heft_rank(&dag, &platform(&[0, 1], 4.0));
        assert_eq!(ranks, vec![9.0, 4.0]);
    }

    #[test]
    fn rank_of_fork_takes_max_branch() {
        // root mean 3; children mean 6 and 9; edge delays 1 and 2.
        // rank(root) = 3 + max(1 + 6, 2 + 9) = 14.
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[3, 3]), task(1, &[6, 6]), task(2, &[9, 9])],
            edges: vec![
                DagEdge {
                    pred: 0,
                    succ: 1,
                    data_volume: 4.0,
                },
                DagEdge {
                    pred: 0,
                    succ: 2,
                    data_volume: 8.0,
                },
            ],
        };
        let ranks = heft_rank(&dag, &platform(&[0, 1], 4.0));
        assert_eq!(ranks, vec![14.0, 6.0, 9.0]);
    }

    #[test]
    fn rank_decreases_along_every_path() {
        let catalog =
            crate::workload::generate_catalog(3, 5, 10, 3, &Default::default()).unwrap();
        let plat = platform(&[0, 1, 2], 2.0);
        for dag in &catalog.job_types {
            let ranks = heft_rank(dag, &plat);
            for e in &dag.edges {
                assert!(ranks[e.pred] > ranks[e.succ]);
            }
        }
    }

    #[test]
    fn insertion_fills_gap() {
        let intervals = [(0, 5), (9, 12)];
        assert_eq!(insertion_eft(&intervals, 0, 3), 5);
        assert_eq!(insertion_eft(&intervals, 0, 5), 12);
        assert_eq!(insertion_eft(&[], 7, 4), 7);
        assert_eq!(insertion_eft(&intervals, 6, 3), 6);
        assert_eq!(insertion_eft(&intervals, 7, 3), 12);
    }

    /// Brute-force reference: scan every start from `earliest` upward.
    fn insertion_oracle(intervals: &[(Clock, Clock)], earliest: Clock, duration: Clock) -> Clock {
        let overlaps = |start: Clock| {
            intervals
                .iter()
                .any(|&(s, f)| start < f && s < start + duration)
        };
        let mut start = earliest;
        while overlaps(start) {
            start += 1;
        }
        start
    }

    #[test]
    fn insertion_matches_brute_force() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let mut timeline = PeTimeline::new();
            let mut t = 0;
            for _ in 0..rng.random_range(0..6) {
                let gap = rng.random_range(0..5);
                let len = rng.random_range(1..6);
                timeline.insert(t + gap, t + gap + len);
                t += gap + len;
            }
            let earliest = rng.random_range(0..20);
            let duration = rng.random_range(1..6);
            let got = insertion_eft(timeline.intervals(), earliest, duration);
            let want = insertion_oracle(timeline.intervals(), earliest, duration);
            assert_eq!(got, want, "intervals {:?}", timeline.intervals());
            assert!(got <= append_eft(timeline.intervals(), earliest));
        }
    }

    #[test]
    fn heft_single_ready_task_matches_etf_choice() {
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[5, 3])],
            edges: vec![],
        };
        let config = EpisodeConfig {
            catalog: catalog_of(dag),
            platform: platform(&[0, 1], 1.0),
            horizon: 10,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let mut heft = HeftPolicy::new(&config.catalog, &config.platform);
        let heft_choice = first_assignments(&config, &mut heft);
        let etf_choice = first_assignments(&config, &mut EtfPolicy);
        assert_eq!(heft_choice, etf_choice);
        assert_eq!(heft_choice, vec![(0, 1)]);
    }

    #[test]
    fn heft_avoids_min_exec_pe_with_large_transfer() {
        // Same setup as the ETF delay-awareness case; HEFT must also keep
        // the dependent task local instead of chasing the min-exec PE.
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[5, 9]), task(1, &[6, 3])],
            edges: vec![DagEdge {
                pred: 0,
                succ: 1,
                data_volume: 8.0,
            }],
        };
        let config = EpisodeConfig {
            catalog: catalog_of(dag),
            platform: platform(&[0, 1], 2.0),
            horizon: 40,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let mut heft = HeftPolicy::new(&config.catalog, &config.platform);
        let mut kernel = Kernel::init(&config, 5).unwrap();
        let mut assignment = None;
        for _ in 0..20 {
            for e in kernel.tick(&mut heft).unwrap() {
                if let Event::TaskAssigned { key, pe, .. } = e {
                    if key.task == 1 {
                        assignment = Some(pe);
                    }
                }
            }
        }
        assert_eq!(assignment, Some(0));
    }

    #[test]
    fn random_policy_is_uniform_and_reproducible() {
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[2, 2, 2, 2])],
            edges: vec![],
        };
        let config = EpisodeConfig {
            catalog: catalog_of(dag),
            platform: platform(&[0, 1, 2, 3], 1.0),
            horizon: 10,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let kernel = Kernel::init(&config, 5).unwrap();
        let ready = kernel.state.ready_tasks();

        let mut counts = [0usize; 4];
        let mut policy = RandomPolicy::new(33);
        for _ in 0..10_000 {
            let d = policy.decide(&ready, &kernel.state);
            counts[d.assignments[0].1] += 1;
        }
        for &c in &counts {
            let freq = c as f64 / 10_000.0;
            assert!((freq - 0.25).abs() < 0.02, "freq {freq}");
        }

        let mut a = RandomPolicy::new(7);
        let mut b = RandomPolicy::new(7);
        for _ in 0..100 {
            assert_eq!(
                a.decide(&ready, &kernel.state),
                b.decide(&ready, &kernel.state)
            );
        }
    }

    #[test]
    fn single_pe_random_always_picks_it() {
        let dag = JobDag {
            job_type_id: 0,
            tasks: vec![task(0, &[2])],
            edges: vec![],
        };
        let config = EpisodeConfig {
            catalog: catalog_of(dag),
            platform: platform(&[0], 1.0),
            horizon: 10,
            scale: 1000.0,
            queue_capacity: 1,
        };
        let kernel = Kernel::init(&config, 5).unwrap();
        let ready = kernel.state.ready_tasks();
        let mut policy = RandomPolicy::new(1);
        for _ in 0..50 {
            assert_eq!(policy.decide(&ready, &kernel.state).assignments, vec![(0, 0)]);
        }
    }
}
