//! Episodic training: one rollout, one redistributed batch, one update.

use std::io::Write;
use std::sync::Arc;

use crate::eim::EimMode;
use crate::error::{Result, SimError};
use crate::kernel::{self, EpisodeConfig};
use crate::metrics;
use crate::rlenv::{NeuralPolicy, ObservationLayout};
use crate::scalar::Scalar;
use crate::{mix_seed, Real};

use super::adam::{Adam, UpdateOutcome};
use super::net::{LossConfig, NetDims, PolicyValueNet};

const SALT_NET_INIT: u64 = 0x4e;
const SALT_EPISODE: u64 = 0x45;

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub episodes: usize,
    pub gamma: Real,
    pub eim_mode: EimMode,
    pub learning_rate: Real,
    pub value_coef: Real,
    pub entropy_coef: Real,
    pub clip_norm: Real,
    pub hidden: (usize, usize),
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 5000,
            gamma: 0.999,
            eim_mode: EimMode::Span,
            learning_rate: 3e-4,
            value_coef: 0.5,
            entropy_coef: 0.01,
            clip_norm: 1.0,
            hidden: (128, 64),
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(SimError::Config("episodes must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(SimError::Config("gamma must be in [0, 1]".into()));
        }
        if self.value_coef < 0.0 || self.entropy_coef < 0.0 || self.clip_norm <= 0.0 {
            return Err(SimError::Config("coefficients must be non-negative".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(SimError::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// One row of the learning curve.
#[derive(Debug, Clone)]
pub struct EpisodeStats {
    pub episode: usize,
    pub total_reward: f64,
    pub completed_jobs: u64,
    pub avg_latency: f64,
    pub loss: f64,
    pub batch_entries: usize,
    pub dropped: usize,
    pub grad_norm: f64,
    pub update_skipped: bool,
}

pub struct TrainOutput<T> {
    pub net: PolicyValueNet<T>,
    pub layout: Arc<ObservationLayout>,
    pub curve: Vec<EpisodeStats>,
}

/// Trains a fresh actor-critic on the given environment: per episode, run a
/// sampling rollout, close and redistribute the experience buffer, and take
/// one clipped adaptive-moment step. Bitwise reproducible for a fixed seed.
pub fn train<T: Scalar>(config: &EpisodeConfig, tcfg: &TrainConfig) -> Result<TrainOutput<T>> {
    tcfg.validate()?;
    let layout = Arc::new(ObservationLayout::new(config));
    let dims = NetDims {
        input: layout.len(),
        hidden1: tcfg.hidden.0,
        hidden2: tcfg.hidden.1,
        actions: config.platform.num_pes(),
    };
    let mut net: PolicyValueNet<T> =
        PolicyValueNet::init(dims, mix_seed(tcfg.seed, SALT_NET_INIT));
    let mut adam: Adam<T> = Adam::new(dims.num_params(), T::from_real(tcfg.learning_rate));
    adam.clip_norm = T::from_real(tcfg.clip_norm);
    let loss_cfg = LossConfig {
        value_coef: T::from_real(tcfg.value_coef),
        entropy_coef: T::from_real(tcfg.entropy_coef),
    };

    let mut curve = Vec::with_capacity(tcfg.episodes);
    for episode in 0..tcfg.episodes {
        let episode_seed = mix_seed(tcfg.seed, SALT_EPISODE ^ (episode as u64) << 8);
        let mut policy =
            NeuralPolicy::sampling(Arc::new(net.clone()), Arc::clone(&layout), episode_seed);
        let trace = kernel::run(config, &mut policy, episode_seed)?;
        let buffer = policy.into_buffer();
        let batch = buffer.redistribute(T::from_real(tcfg.gamma), tcfg.eim_mode);

        let (loss, grads) = net.compute_loss(&batch, &loss_cfg)?;
        let (grad_norm, update_skipped) = if batch.entries.is_empty() {
            (0.0, true)
        } else {
            match adam.apply_update(net.params_mut(), &grads) {
                UpdateOutcome::Applied { grad_norm } => (grad_norm.to_real(), false),
                UpdateOutcome::SkippedNonFinite => (f64::NAN, true),
            }
        };

        let summary = metrics::summarize(&trace, "neural-train", episode_seed);
        curve.push(EpisodeStats {
            episode,
            total_reward: summary.total_reward,
            completed_jobs: trace.completed_jobs,
            avg_latency: summary.avg_latency,
            loss: loss.to_real(),
            batch_entries: batch.entries.len(),
            dropped: batch.dropped,
            grad_norm,
            update_skipped,
        });
    }

    Ok(TrainOutput {
        net,
        layout,
        curve,
    })
}

/// Learning-curve CSV:
/// `episode,total_reward,completed_jobs,avg_latency,loss,batch_entries,dropped,grad_norm,update_skipped`.
pub fn write_curve_csv<W: Write>(curve: &[EpisodeStats], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "episode",
        "total_reward",
        "completed_jobs",
        "avg_latency",
        "loss",
        "batch_entries",
        "dropped",
        "grad_norm",
        "update_skipped",
    ])?;
    for row in curve {
        w.write_record([
            row.episode.to_string(),
            format!("{:.3}", row.total_reward),
            row.completed_jobs.to_string(),
            format!("{:.3}", row.avg_latency),
            format!("{:.6}", row.loss),
            row.batch_entries.to_string(),
            row.dropped.to_string(),
            format!("{:.6}", row.grad_norm),
            (row.update_skipped as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::platform::{PeProfile, Platform};
    use crate::workload::{JobDag, JobTypeCatalog, TaskTemplate};

    /// Two PEs of distinct types; type 0 strictly faster for every task.
    pub(crate) fn dominant_pe_config(horizon: u64, scale: f64) -> EpisodeConfig {
        let tasks = (0..4)
            .map(|task_id| TaskTemplate {
                task_id,
                exec_time: vec![2, 8],
                energy: vec![None, None],
            })
            .collect::<Vec<_>>();
        let edges = vec![
            crate::workload::DagEdge {
                pred: 0,
                succ: 2,
                data_volume: 2.0,
            },
            crate::workload::DagEdge {
                pred: 1,
                succ: 3,
                data_volume: 2.0,
            },
        ];
        EpisodeConfig {
            catalog: Arc::new(JobTypeCatalog {
                num_pe_types: 2,
                job_types: vec![JobDag {
                    job_type_id: 0,
                    tasks,
                    edges,
                }],
                selection_weights: vec![1.0],
            }),
            platform: Arc::new(Platform {
                pes: vec![
                    PeProfile {
                        pe_id: 0,
                        pe_type: 0,
                        active_power: 2.0,
                        idle_power: 0.2,
                    },
                    PeProfile {
                        pe_id: 1,
                        pe_type: 1,
                        active_power: 1.0,
                        idle_power: 0.1,
                    },
                ],
                bandwidth: vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            }),
            horizon,
            scale,
            queue_capacity: 2,
        }
    }

    #[test]
    fn training_is_reproducible() {
        let config = dominant_pe_config(120, 40.0);
        let tcfg = TrainConfig {
            episodes: 3,
            hidden: (16, 8),
            ..Default::default()
        };
        let a = train::<f64>(&config, &tcfg).unwrap();
        let b = train::<f64>(&config, &tcfg).unwrap();
        assert_eq!(a.net.params(), b.net.params());
        for (ra, rb) in a.curve.iter().zip(&b.curve) {
            assert_eq!(ra.total_reward, rb.total_reward);
            assert_eq!(ra.loss, rb.loss);
        }
    }

    #[test]
    fn zero_episodes_rejected() {
        let config = dominant_pe_config(50, 40.0);
        let tcfg = TrainConfig {
            episodes: 0,
            ..Default::default()
        };
        assert!(train::<f64>(&config, &tcfg).is_err());
    }

    #[test]
    fn curve_csv_is_writable() {
        let config = dominant_pe_config(60, 40.0);
        let tcfg = TrainConfig {
            episodes: 2,
            hidden: (8, 4),
            ..Default::default()
        };
        let out = train::<f64>(&config, &tcfg).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&out.curve, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
    }
}
