mod coupling;
mod fluctuation;
mod growth;
mod sample;
mod verify;

pub use coupling::{cmd_coupling, CouplingReport};
pub use fluctuation::{cmd_fluctuation, FluctuationHeader, FluctuationPathRecord, WindowSummary};
pub use growth::{cmd_growth, GrowthReport};
pub use sample::{cmd_sample, PathRecord};
pub use verify::{cmd_verify, CheckResult, VerifyReport};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// Attached to every persisted record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(cfg: &RunConfig) -> Self {
        Self { config_hash: cfg.hash(), seed: cfg.seed }
    }
}
