use gtzw_core::combinatorics::Path;
use gtzw_core::zw::ZwChain;
use log::info;
use serde::{Deserialize, Serialize};

use super::Provenance;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{ensure_dir, for_each_ordered, thread_pool, JsonLines};

pub const PATHS_FILE: &str = "paths.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub path_id: u64,
    #[serde(flatten)]
    pub provenance: Provenance,
    pub path: Path,
}

pub fn cmd_sample(cfg: &RunConfig) -> CliResult<std::path::PathBuf> {
    let chain = ZwChain::new(cfg.params()?, cfg.sampler_config())?;
    let provenance = Provenance::of(cfg);
    ensure_dir(&cfg.out)?;
    let file = cfg.out.join(PATHS_FILE);
    let mut out = JsonLines::create(&file)?;
    let pool = thread_pool(cfg.workers)?;
    for_each_ordered(
        &pool,
        cfg.n_paths,
        |p| Ok(chain.sample_path_keyed(cfg.n_levels, cfg.seed, p as u64)?),
        |p, path| {
            out.write(&PathRecord { path_id: p as u64, provenance: provenance.clone(), path })
        },
    )?;
    out.finish()?;
    info!("wrote {} paths to {}", cfg.n_paths, file.display());
    Ok(file)
}
