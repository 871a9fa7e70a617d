use gtzw_core::growth::{
    envelope_sum_moments, fit_c1, geometric_checkpoints, growth_experiment, hook_survival, C1Fit, GrowthConfig,
    GrowthTable, HookSurvival,
};
use log::info;
use serde::{Deserialize, Serialize};

use super::Provenance;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, thread_pool, write_json};

pub const QUANTILES_FILE: &str = "growth.csv";
pub const REPORT_FILE: &str = "growth.json";

/// Observed diagonal growth against the Bernoulli envelope at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeComparison {
    pub level: usize,
    pub s_mean: f64,
    pub envelope_mean: f64,
    /// Combined standard error of the two means.
    pub sigma: f64,
    /// `s_mean <= envelope_mean + 3 sigma`.
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub config: serde_json::Value,
    pub k: i64,
    pub c1_fit: C1Fit,
    pub envelope: Vec<EnvelopeComparison>,
    pub envelope_violations: usize,
    pub median_trend: f64,
    pub hook: Option<HookSurvival>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    level: usize,
    s_mean: f64,
    s_std_err: f64,
    s_ratio_q05: f64,
    s_ratio_median: f64,
    s_ratio_q95: f64,
    s_ratio_mean: f64,
    tilde_ratio_q05: f64,
    tilde_ratio_median: f64,
    tilde_ratio_q95: f64,
    tilde_ratio_mean: f64,
    envelope_mean: f64,
    seed: u64,
    config_hash: &'a str,
}

fn write_csv(path: &std::path::Path, table: &GrowthTable, envelope: &[EnvelopeComparison], prov: &Provenance) -> CliResult<()> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io { path: path.to_path_buf(), source },
        other => CliError::Io { path: path.to_path_buf(), source: std::io::Error::other(format!("{other:?}")) },
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for (row, env) in table.rows.iter().zip(envelope) {
        w.serialize(CsvRow {
            level: row.level,
            s_mean: row.s_mean,
            s_std_err: row.s_std_err,
            s_ratio_q05: row.s_ratio.q05,
            s_ratio_median: row.s_ratio.median,
            s_ratio_q95: row.s_ratio.q95,
            s_ratio_mean: row.s_ratio.mean,
            tilde_ratio_q05: row.tilde_ratio.q05,
            tilde_ratio_median: row.tilde_ratio.median,
            tilde_ratio_q95: row.tilde_ratio.q95,
            tilde_ratio_mean: row.tilde_ratio.mean,
            envelope_mean: env.envelope_mean,
            seed: prov.seed,
            config_hash: &prov.config_hash,
        })
        .map_err(io)?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn cmd_growth(cfg: &RunConfig) -> CliResult<GrowthReport> {
    let params = cfg.params()?;
    let k = cfg.k.unwrap_or(0);
    let re = (params.w() + k as f64).re;
    if re <= 0.0 {
        return Err(CliError::Config(format!(
            "hypothesis Re(k + w) > 0 violated: k = {k}, Re(k + w) = {re}"
        )));
    }
    if cfg.n_levels < 2 {
        return Err(CliError::Config("growth needs n_levels >= 2".into()));
    }
    let [lo, hi] = cfg.c1_levels.unwrap_or([2, cfg.n_levels]);
    let sampler = cfg.sampler_config();
    let pool = thread_pool(cfg.workers)?;
    let gcfg = GrowthConfig {
        k,
        n_levels: cfg.n_levels,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        sampler: sampler.clone(),
        checkpoints: Vec::new(),
    };
    let (table, c1_fit, hook) = pool.install(|| -> CliResult<_> {
        let table = growth_experiment(&params, &gcfg)?;
        let fit = fit_c1(&params, k, (lo, hi), cfg.c1_paths, cfg.seed, &sampler)?;
        let hook = match cfg.hook_event()? {
            Some(ev) => {
                let checkpoints: Vec<usize> = geometric_checkpoints(cfg.n_levels).into_iter().filter(|&n| n >= ev.t).collect();
                if checkpoints.is_empty() {
                    return Err(CliError::Config(format!("hook start level {} exceeds n_levels", ev.t)));
                }
                Some(hook_survival(&params, &ev, &checkpoints, cfg.n_paths, cfg.seed, &sampler)?)
            }
            None => None,
        };
        Ok((table, fit, hook))
    })?;
    info!("c1 = {:.4} at level {}", c1_fit.c1, c1_fit.argmax_level);
    let envelope: Vec<EnvelopeComparison> = table
        .rows
        .iter()
        .map(|row| {
            let (mean, var) = envelope_sum_moments(c1_fit.c1, row.level);
            let sigma = (var / cfg.n_paths as f64).sqrt() + row.s_std_err;
            EnvelopeComparison {
                level: row.level,
                s_mean: row.s_mean,
                envelope_mean: mean,
                sigma,
                dominated: row.s_mean <= mean + 3.0 * sigma,
            }
        })
        .collect();
    let provenance = Provenance::of(cfg);
    ensure_dir(&cfg.out)?;
    write_csv(&cfg.out.join(QUANTILES_FILE), &table, &envelope, &provenance)?;
    let report = GrowthReport {
        provenance,
        config: cfg.provenance(),
        k,
        c1_fit,
        envelope,
        envelope_violations: table.envelope_violations,
        median_trend: table.median_trend,
        hook,
    };
    write_json(&cfg.out.join(REPORT_FILE), &report)?;
    println!(
        "c1 = {:.4}; envelope dominated at {}/{} checkpoints; {} envelope violations",
        report.c1_fit.c1,
        report.envelope.iter().filter(|e| e.dominated).count(),
        report.envelope.len(),
        report.envelope_violations
    );
    Ok(report)
}
