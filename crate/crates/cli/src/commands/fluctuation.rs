use gtzw_core::fluctuation::{
    admissibility_scan, detect_fluctuations, find_separating_k, loglr_trace, BoxEventRecord, FluctuationConfig,
    FluctuationEvent, LoglrTrace, SeparatingChoice,
};
use gtzw_core::zw::ZwChain;
use log::info;
use serde::{Deserialize, Serialize};

use super::Provenance;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, for_each_ordered, thread_pool, write_json, JsonLines};

pub const EVENTS_FILE: &str = "fluctuation.jsonl";
pub const SUMMARY_FILE: &str = "fluctuation_summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSource {
    Config,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationHeader {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub config: serde_json::Value,
    pub k: i64,
    pub delta: f64,
    pub k_source: DeltaSource,
    pub delta_source: DeltaSource,
    /// The automatic choice, when the parameter pairs admit one.
    pub separating: Option<SeparatingChoice>,
    pub windows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationPathRecord {
    pub path_id: u64,
    #[serde(flatten)]
    pub provenance: Provenance,
    pub events: Vec<FluctuationEvent>,
    pub box_records: Vec<BoxEventRecord>,
    pub admissible: bool,
    pub loglr: LoglrTrace,
}

/// Counts for the levels `[lo, hi)` across all paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub window: usize,
    pub lo: usize,
    pub hi: usize,
    pub fluctuations: usize,
    pub paths_with_fluctuation: usize,
    /// Paths with a content-`k` box in the window.
    pub box_records: usize,
    /// Of those, records meeting all four conditions.
    pub admissible_records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line {
    Header(FluctuationHeader),
    Path(FluctuationPathRecord),
    Summary { windows: Vec<WindowSummary>, total_fluctuations: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Summary {
    header: FluctuationHeader,
    windows: Vec<WindowSummary>,
    total_fluctuations: usize,
}

fn choose(cfg: &RunConfig, separating: &Result<SeparatingChoice, gtzw_core::Error>) -> CliResult<(i64, f64, DeltaSource, DeltaSource)> {
    let source = |given: bool| if given { DeltaSource::Config } else { DeltaSource::Auto };
    match (cfg.k, cfg.delta, separating) {
        (Some(k), Some(d), _) => Ok((k, d, DeltaSource::Config, DeltaSource::Config)),
        (k, d, Ok(s)) => Ok((k.unwrap_or(s.k), d.unwrap_or(s.delta), source(k.is_some()), source(d.is_some()))),
        (_, _, Err(e)) => Err(CliError::Config(format!("no automatic k and delta ({e}); set both explicitly"))),
    }
}

pub fn cmd_fluctuation(cfg: &RunConfig) -> CliResult<Vec<WindowSummary>> {
    let params = cfg.params()?;
    let prime = cfg
        .params_prime()?
        .ok_or_else(|| CliError::Config("fluctuation needs the second pair zp, wp".into()))?;
    let separating = find_separating_k(&params, &prime);
    let (k, delta, k_source, delta_source) = choose(cfg, &separating)?;
    let windows = if cfg.windows.is_empty() {
        FluctuationConfig::doubling_windows(cfg.first_window, cfg.n_levels)
    } else {
        cfg.windows.clone()
    };
    if windows.len() < 2 {
        return Err(CliError::Config(format!(
            "windows {windows:?} need at least two boundaries within n_levels = {}",
            cfg.n_levels
        )));
    }
    let fcfg = FluctuationConfig::new(delta, k, windows[0], windows.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    for p in [&params, &prime] {
        fcfg.check_params(p).map_err(|e| CliError::Config(e.to_string()))?;
    }
    let header = FluctuationHeader {
        provenance: Provenance::of(cfg),
        config: cfg.provenance(),
        k,
        delta,
        k_source,
        delta_source,
        separating: separating.ok(),
        windows: windows.clone(),
    };
    info!("k = {k}, delta = {delta:.3e}, windows {windows:?}");

    let chain = ZwChain::new(params, cfg.sampler_config())?;
    ensure_dir(&cfg.out)?;
    let mut out = JsonLines::create(&cfg.out.join(EVENTS_FILE))?;
    out.write(&Line::Header(header.clone()))?;
    let mut summary: Vec<WindowSummary> = windows
        .windows(2)
        .enumerate()
        .map(|(m, w)| WindowSummary {
            window: m + 1,
            lo: w[0],
            hi: w[1],
            fluctuations: 0,
            paths_with_fluctuation: 0,
            box_records: 0,
            admissible_records: 0,
        })
        .collect();
    let mut total_fluctuations = 0;
    let pool = thread_pool(cfg.workers)?;
    for_each_ordered(
        &pool,
        cfg.n_paths,
        |p| {
            let path = chain.sample_path_keyed(cfg.n_levels, cfg.seed, p as u64)?;
            let events = detect_fluctuations(&path, &fcfg, &params, &prime)?;
            let box_records = admissibility_scan(&path, &fcfg);
            Ok(FluctuationPathRecord {
                path_id: p as u64,
                provenance: header.provenance.clone(),
                admissible: gtzw_core::fluctuation::is_admissible(&path, &fcfg),
                loglr: loglr_trace(&path, &params, &prime),
                events,
                box_records,
            })
        },
        |_, rec| {
            total_fluctuations += rec.events.len();
            for s in summary.iter_mut() {
                let hits = rec.events.iter().filter(|e| (s.lo..s.hi).contains(&e.level)).count();
                s.fluctuations += hits;
                s.paths_with_fluctuation += (hits > 0) as usize;
            }
            for r in &rec.box_records {
                let s = &mut summary[r.window - 1];
                s.box_records += 1;
                s.admissible_records += r.admissible() as usize;
            }
            out.write(&Line::Path(rec))
        },
    )?;
    out.write(&Line::Summary { windows: summary.clone(), total_fluctuations })?;
    out.finish()?;
    write_json(
        &cfg.out.join(SUMMARY_FILE),
        &Summary { header, windows: summary.clone(), total_fluctuations },
    )?;
    for s in &summary {
        println!(
            "window {} [{}, {}): {} fluctuations on {} paths, {}/{} admissible box records",
            s.window, s.lo, s.hi, s.fluctuations, s.paths_with_fluctuation, s.admissible_records, s.box_records
        );
    }
    Ok(summary)
}
