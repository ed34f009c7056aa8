//! Heterogeneous processing elements: execution-time lookup, communication
//! delay and energy accounting.
//!
//! Energy convention: a task charges its full catalog energy (or
//! `active_power * exec_time` when the catalog has no entry) when it starts;
//! idle PEs are charged `idle_power` per clock. Communication is not charged.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::workload::TaskTemplate;
use crate::Clock;

/// One processing element. Powers are in joules per clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeProfile {
    pub pe_id: usize,
    pub pe_type: usize,
    pub active_power: f64,
    pub idle_power: f64,
}

/// The PE set plus the pairwise bandwidth matrix (data units per clock).
/// The diagonal is ignored: same-PE transfers are free.
#[derive(Debug, Clone, PartialEq)]
pub struct Platform {
    pub pes: Vec<PeProfile>,
    pub bandwidth: Vec<Vec<f64>>,
}

impl Platform {
    pub fn num_pes(&self) -> usize {
        self.pes.len()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.pes.len();
        if p == 0 {
            return Err(SimError::Platform("no pes".into()));
        }
        for (i, pe) in self.pes.iter().enumerate() {
            if pe.pe_id != i {
                return Err(SimError::Platform(format!(
                    "pe at index {i} has id {}",
                    pe.pe_id
                )));
            }
            if !(pe.active_power >= pe.idle_power && pe.idle_power >= 0.0) {
                return Err(SimError::Platform(format!(
                    "pe {i}: need active_power >= idle_power >= 0"
                )));
            }
        }
        if self.bandwidth.len() != p || self.bandwidth.iter().any(|row| row.len() != p) {
            return Err(SimError::Platform("bandwidth matrix must be PxP".into()));
        }
        for a in 0..p {
            for b in 0..p {
                if a != b {
                    if self.bandwidth[a][b] <= 0.0 {
                        return Err(SimError::Platform(format!(
                            "bandwidth[{a}][{b}] must be positive"
                        )));
                    }
                    if self.bandwidth[a][b] != self.bandwidth[b][a] {
                        return Err(SimError::Platform("bandwidth must be symmetric".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Execution time of `task` on PE `pe_id`, from the template table.
    pub fn exec_time(&self, pe_id: usize, task: &TaskTemplate) -> Result<Clock> {
        let pe = self.pes.get(pe_id).ok_or(SimError::PeOutOfRange {
            pe_id,
            num_pes: self.pes.len(),
        })?;
        match task.exec_time.get(pe.pe_type) {
            Some(&clocks) if clocks >= 1 => Ok(clocks),
            _ => Err(SimError::MissingExecEntry {
                task: task.task_id,
                pe_type: pe.pe_type,
            }),
        }
    }

    /// Transfer delay in whole clocks: zero on the same PE, otherwise
    /// `ceil(volume / bandwidth)`.
    pub fn comm_delay(&self, src_pe: usize, dst_pe: usize, data_volume: f64) -> Clock {
        debug_assert!(src_pe < self.pes.len() && dst_pe < self.pes.len());
        debug_assert!(data_volume >= 0.0);
        if src_pe == dst_pe || data_volume == 0.0 {
            return 0;
        }
        (data_volume / self.bandwidth[src_pe][dst_pe]).ceil() as Clock
    }

    /// Energy charged for running `task` on `pe_id`: the catalog entry for
    /// the PE type when present, else `active_power * exec_time`.
    pub fn task_energy(&self, pe_id: usize, task: &TaskTemplate) -> f64 {
        let pe = &self.pes[pe_id];
        match task.energy.get(pe.pe_type).copied().flatten() {
            Some(joules) => joules,
            None => {
                let exec = task.exec_time.get(pe.pe_type).copied().unwrap_or(0);
                pe.active_power * exec as f64
            }
        }
    }
}

// --- file schema -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PlatformFile {
    pes: Vec<PeFile>,
    bandwidth: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PeFile {
    id: usize,
    #[serde(rename = "type")]
    pe_type: usize,
    active_power: f64,
    idle_power: f64,
}

pub fn platform_to_json(platform: &Platform) -> String {
    let file = PlatformFile {
        pes: platform
            .pes
            .iter()
            .map(|pe| PeFile {
                id: pe.pe_id,
                pe_type: pe.pe_type,
                active_power: pe.active_power,
                idle_power: pe.idle_power,
            })
            .collect(),
        bandwidth: platform.bandwidth.clone(),
    };
    serde_json::to_string_pretty(&file).expect("platform serializes")
}

pub fn platform_from_json(json: &str) -> Result<Platform> {
    let file: PlatformFile = serde_json::from_str(json)?;
    let platform = Platform {
        pes: file
            .pes
            .into_iter()
            .map(|pe| PeProfile {
                pe_id: pe.id,
                pe_type: pe.pe_type,
                active_power: pe.active_power,
                idle_power: pe.idle_power,
            })
            .collect(),
        bandwidth: file.bandwidth,
    };
    platform.validate()?;
    Ok(platform)
}
