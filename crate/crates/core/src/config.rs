//! Run configuration: a single JSON file referencing catalog and platform
//! files plus the episode parameters, with frozen defaults shipped in the
//! crate so benchmark results are reproducible without regeneration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernel::EpisodeConfig;
use crate::platform::{platform_from_json, PeProfile, Platform};
use crate::workload::{catalog_from_json, generate_catalog, GeneratorParams, JobTypeCatalog};
use crate::Clock;

/// Generation parameters of the frozen default catalog.
pub const DEFAULT_CATALOG_SEED: u64 = 7;
pub const DEFAULT_NUM_JOB_TYPES: usize = 5;
pub const DEFAULT_TASKS_PER_JOB: usize = 10;
pub const DEFAULT_NUM_PE_TYPES: usize = 3;

/// The frozen default catalog file shipped with the crate.
pub fn builtin_catalog_json() -> &'static str {
    include_str!("../assets/default_catalog.json")
}

/// The frozen default resource profile shipped with the crate.
pub fn builtin_platform_json() -> &'static str {
    include_str!("../assets/default_platform.json")
}

pub fn default_catalog() -> Result<JobTypeCatalog> {
    catalog_from_json(builtin_catalog_json())
}

pub fn default_platform() -> Result<Platform> {
    platform_from_json(builtin_platform_json())
}

/// Regenerates the default catalog from its recorded seed and parameters;
/// must stay byte-identical to the shipped file.
pub fn regenerate_default_catalog() -> Result<JobTypeCatalog> {
    generate_catalog(
        DEFAULT_CATALOG_SEED,
        DEFAULT_NUM_JOB_TYPES,
        DEFAULT_TASKS_PER_JOB,
        DEFAULT_NUM_PE_TYPES,
        &GeneratorParams::default(),
    )
}

/// The default platform as built in code: four PEs of three types (one
/// fast/high-power, two medium, one slow/low-power in the power profile)
/// with a 4x bandwidth spread.
pub fn reference_platform() -> Platform {
    Platform {
        pes: vec![
            PeProfile {
                pe_id: 0,
                pe_type: 0,
                active_power: 3.0,
                idle_power: 0.3,
            },
            PeProfile {
                pe_id: 1,
                pe_type: 1,
                active_power: 2.0,
                idle_power: 0.2,
            },
            PeProfile {
                pe_id: 2,
                pe_type: 1,
                active_power: 2.0,
                idle_power: 0.2,
            },
            PeProfile {
                pe_id: 3,
                pe_type: 2,
                active_power: 1.0,
                idle_power: 0.1,
            },
        ],
        bandwidth: vec![
            vec![0.0, 8.0, 8.0, 2.0],
            vec![8.0, 0.0, 4.0, 2.0],
            vec![8.0, 4.0, 0.0, 2.0],
            vec![2.0, 2.0, 2.0, 0.0],
        ],
    }
}

/// On-disk run configuration. Missing fields take the benchmark defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfigFile {
    pub horizon: Clock,
    pub scale: f64,
    pub queue_capacity: usize,
    pub seed: u64,
    /// Path to a catalog JSON; the shipped default when absent.
    pub catalog: Option<PathBuf>,
    /// Path to a platform JSON; the shipped default when absent.
    pub platform: Option<PathBuf>,
}

impl Default for SimConfigFile {
    fn default() -> Self {
        SimConfigFile {
            horizon: 5000,
            scale: 25.0,
            queue_capacity: 3,
            seed: 1,
            catalog: None,
            platform: None,
        }
    }
}

impl SimConfigFile {
    pub fn load(path: &Path) -> Result<SimConfigFile> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Loads the referenced catalog/platform (or the shipped defaults) and
    /// validates everything.
    pub fn resolve(&self) -> Result<EpisodeConfig> {
        let catalog = match &self.catalog {
            Some(path) => catalog_from_json(&std::fs::read_to_string(path)?)?,
            None => default_catalog()?,
        };
        let platform = match &self.platform {
            Some(path) => platform_from_json(&std::fs::read_to_string(path)?)?,
            None => default_platform()?,
        };
        let config = EpisodeConfig {
            catalog: Arc::new(catalog),
            platform: Arc::new(platform),
            horizon: self.horizon,
            scale: self.scale,
            queue_capacity: self.queue_capacity,
        };
        config.catalog.validate()?;
        config.platform.validate()?;
        Ok(config)
    }
}
