use std::sync::Arc;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use socsim::heuristics::HeftPolicy;
use socsim::kernel::{self, EpisodeConfig};
use socsim::platform::{PeProfile, Platform};
use socsim::workload::{generate_catalog, GeneratorParams, JobDag};
use socsim::Clock;

fn optimal_makespan(dag: &JobDag, platform: &Platform) -> Clock {
    let t = dag.num_tasks();
    let p = platform.num_pes();
    let preds: Vec<Vec<(usize, f64)>> = (0..t).map(|task| dag.predecessors(task).map(|e| (e.pred, e.data_volume)).collect()).collect();
    let mut orders = Vec::new();
    let mut order = Vec::with_capacity(t);
    let mut deg = dag.in_degrees();
    let mut used = vec![false; t];
    fn rec(t: usize, dag: &JobDag, deg: &mut Vec<usize>, used: &mut Vec<bool>, order: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if order.len() == t { out.push(order.clone()); return; }
        for task in 0..t {
            if !used[task] && deg[task] == 0 {
                used[task] = true; order.push(task);
                for e in dag.successors(task) { deg[e.succ] -= 1; }
                rec(t, dag, deg, used, order, out);
                for e in dag.successors(task) { deg[e.succ] += 1; }
                order.pop(); used[task] = false;
            }
        }
    }
    rec(t, dag, &mut deg, &mut used, &mut order, &mut orders);
    let mut assignment = vec![0usize; t];
    let mut best = Clock::MAX;
    loop {
        for order in &orders {
            let mut pe_free = vec![0 as Clock; p];
            let mut finish = vec![0 as Clock; t];
            let mut makespan = 0;
            for &task in order {
                let pe = assignment[task];
                let mut dr = 0;
                for &(pred, vol) in &preds[task] { dr = dr.max(finish[pred] + platform.comm_delay(assignment[pred], pe, vol)); }
                let start = pe_free[pe].max(dr);
                finish[task] = start + platform.exec_time(pe, &dag.tasks[task]).unwrap();
                pe_free[pe] = finish[task];
                makespan = makespan.max(finish[task]);
            }
            best = best.min(makespan);
        }
        let mut i = 0;
        loop {
            if i == t { return best; }
            assignment[i] += 1;
            if assignment[i] < p { break; }
            assignment[i] = 0; i += 1;
        }
    }
}

#[test]
fn ratio_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let params = GeneratorParams::default(); // exec [2,15], volume [1,20], p_edge 0.4
    let mut worst = 1.0f64;
    let mut over = 0;
    let started = std::time::Instant::now();
    for instance in 0..120u64 {
        let tasks = rng.random_range(1..=5usize);
        let num_pes = rng.random_range(1..=3usize);
        let catalog = generate_catalog(1000 + instance, 1, tasks, num_pes, &params).map(Arc::new).unwrap();
        let pes = (0..num_pes).map(|pe_id| PeProfile { pe_id, pe_type: pe_id, active_power: 2.0, idle_power: 0.2 }).collect();
        let mut bandwidth = vec![vec![0.0; num_pes]; num_pes];
        for a in 0..num_pes { for b in (a+1)..num_pes { let bw = [2.0, 4.0, 8.0][rng.random_range(0..3)]; bandwidth[a][b] = bw; bandwidth[b][a] = bw; } }
        let platform = Arc::new(Platform { pes, bandwidth });
        let config = EpisodeConfig { catalog: catalog.clone(), platform: platform.clone(), horizon: 500, scale: 1e12, queue_capacity: 1 };
        let optimum = optimal_makespan(&config.catalog.job_types[0], &config.platform);
        let mut heft = HeftPolicy::new(&config.catalog, &config.platform);
        let trace = kernel::run(&config, &mut heft, 1).unwrap();
        let got = trace.jobs[0].complete_clk.unwrap();
        let ratio = got as f64 / optimum as f64;
        if ratio > 1.3 { over += 1; println!("instance {instance}: heft {got} opt {optimum} ratio {ratio:.3}"); }
        worst = worst.max(ratio);
    }
    println!("worst ratio {worst:.3}, over-1.3 count {over}, elapsed {:?}", started.elapsed());
}
