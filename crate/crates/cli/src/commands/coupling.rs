use gtzw_core::coupling::{build_coupling, stochastic_order_bruteforce, CouplingEntry};
use gtzw_core::Error;
use log::info;
use serde::{Deserialize, Serialize};

use super::Provenance;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_json};

pub const COUPLING_FILE: &str = "coupling.json";

/// Largest `n` for the exhaustive up-set comparison.
pub const BRUTEFORCE_MAX_BITS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub history: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub config: serde_json::Value,
    pub n: usize,
    pub hypothesis: bool,
    pub violation: Option<Violation>,
    pub monotone: Option<bool>,
    pub total: Option<f64>,
    pub left_marginal_error: Option<f64>,
    pub right_marginal_error: Option<f64>,
    /// Every up-set is at least as likely under the right law; `n <= 4` only.
    pub bruteforce_order: Option<bool>,
    pub diagonal: Option<bool>,
    pub entries: Vec<CouplingEntry>,
}

pub fn cmd_coupling(cfg: &RunConfig) -> CliResult<CouplingReport> {
    let mu = cfg.coupling.mu.build()?;
    let nu = cfg.coupling.nu.build()?;
    if mu.n() != nu.n() {
        return Err(CliError::Config(format!("mu has {} coordinates, nu has {}", mu.n(), nu.n())));
    }
    let n = mu.n();
    let mut report = CouplingReport {
        provenance: Provenance::of(cfg),
        config: cfg.provenance(),
        n,
        hypothesis: true,
        violation: None,
        monotone: None,
        total: None,
        left_marginal_error: None,
        right_marginal_error: None,
        bruteforce_order: None,
        diagonal: None,
        entries: Vec::new(),
    };
    if n <= BRUTEFORCE_MAX_BITS {
        report.bruteforce_order = Some(stochastic_order_bruteforce(&mu, &nu)?);
    }
    let result = build_coupling(&mu, &nu);
    ensure_dir(&cfg.out)?;
    let file = cfg.out.join(COUPLING_FILE);
    match result {
        Ok(table) => {
            let err = |got: Vec<f64>, want: Vec<f64>| got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            report.left_marginal_error = Some(err(table.left_marginal(), mu.to_dense()?));
            report.right_marginal_error = Some(err(table.right_marginal(), nu.to_dense()?));
            report.monotone = Some(table.is_monotone());
            report.total = Some(table.total());
            report.diagonal = Some(table.mass.keys().all(|(a, b)| a == b));
            report.entries = table.entries();
            write_json(&file, &report)?;
            info!("wrote {} coupling entries to {}", report.entries.len(), file.display());
            println!(
                "coupling on {n} coordinates: {} entries, monotone {}, marginal errors {:.2e} / {:.2e}",
                report.entries.len(),
                table.is_monotone(),
                report.left_marginal_error.unwrap(),
                report.right_marginal_error.unwrap()
            );
            Ok(report)
        }
        Err(Error::HypothesisViolation { history, detail }) => {
            report.hypothesis = false;
            report.violation = Some(Violation { history: history.clone(), detail: detail.clone() });
            write_json(&file, &report)?;
            println!("hypothesis violated at history {history:?}: {detail}");
            Err(CliError::Check(vec![format!("dominance hypothesis at history {history:?}")]))
        }
        Err(e) => Err(e.into()),
    }
}
