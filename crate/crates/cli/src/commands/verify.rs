//! Oracle suites: each compares two independent computations.

use gtzw_core::combinatorics::{count_paths_to, Signature};
use gtzw_core::coupling::{build_coupling, FiniteBinaryDistribution};
use gtzw_core::growth::signatures_in_box;
use gtzw_core::special::{gauss_2f1_at_one, series_2f1_at_one};
use gtzw_core::zw::{coherency_residual, log_unnormalized_density, p_m_ratio, ZwParams};
use gtzw_core::combinatorics::weyl_dimension;
use log::info;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Provenance;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_json};

pub const VERIFY_FILE: &str = "verify.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub config: serde_json::Value,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

type Measured = gtzw_core::Result<(usize, f64)>;

fn finish(name: &str, tolerance: f64, measured: Measured) -> CheckResult {
    match measured {
        Ok((cases, residual)) => CheckResult {
            name: name.into(),
            cases,
            residual,
            tolerance,
            passed: residual <= tolerance,
            error: None,
        },
        Err(e) => CheckResult {
            name: name.into(),
            cases: 0,
            residual: f64::NAN,
            tolerance,
            passed: false,
            error: Some(e.to_string()),
        },
    }
}

fn random_signature(rng: &mut ChaCha8Rng, level: usize, lo: i64, hi: i64) -> Signature {
    let mut rows: Vec<i64> = (0..level).map(|_| rng.gen_range(lo..=hi)).collect();
    rows.sort_unstable_by(|a, b| b.cmp(a));
    Signature::new(rows).expect("sorted rows")
}

fn coherency(params: &ZwParams, eps: f64, rng: &mut ChaCha8Rng) -> Measured {
    let mut worst: f64 = 0.0;
    for m in 0..40 {
        let mu = random_signature(rng, 1 + m % 4, -3, 3);
        worst = worst.max(coherency_residual(&mu, params, eps)?);
    }
    Ok((40, worst))
}

/// Exact mismatches between the Weyl product and the path count.
fn weyl_vs_paths() -> Measured {
    let mut cases = 0;
    let mut mismatches = 0;
    for level in 1..=4 {
        for lam in signatures_in_box(level, -2, 2) {
            if weyl_dimension(&lam)? != count_paths_to(&lam) {
                mismatches += 1;
            }
            cases += 1;
        }
    }
    Ok((cases, mismatches as f64))
}

fn gauss_vs_series(rng: &mut ChaCha8Rng) -> Measured {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let c = a + b + Complex64::new(rng.gen_range(2.0..4.0), rng.gen_range(-1.0..1.0));
        let gauss = gauss_2f1_at_one(a, b, c)?;
        let series = series_2f1_at_one(a, b, c, 1e-13)?;
        worst = worst.max((gauss - series).norm() / series.norm().max(f64::MIN_POSITIVE));
    }
    Ok((20, worst))
}

/// Closed-form row-shift ratio against the density quotient.
fn p_m_vs_density(params: &ZwParams, rng: &mut ChaCha8Rng) -> Measured {
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    while cases < 40 {
        let level = rng.gen_range(1..=5);
        let mu = random_signature(rng, level, -3, 4);
        let mr = mu.rows();
        let i = rng.gen_range(1..=level + 1);
        let lo = if i <= level { mr[i - 1] } else { mr[level - 1] - 3 }.max(0);
        let hi = if i >= 2 { mr[i - 2] } else { lo + 6 };
        if lo >= hi {
            continue;
        }
        let x0 = rng.gen_range(lo..hi);
        let m = rng.gen_range(1..=(hi - x0));
        let mut rows: Vec<i64> = (0..=level)
            .map(|r| {
                let lo_r = if r < level { mr[r] } else { mr[level - 1] - 2 };
                let hi_r = if r == 0 { mr[0] + 2 } else { mr[r - 1] };
                rng.gen_range(lo_r..=hi_r)
            })
            .collect();
        rows[i - 1] = x0;
        let closed = p_m_ratio(&mu, &rows, i, x0 + 1, m as u64, params)?;
        let base = Signature::new(rows.clone())?;
        rows[i - 1] = x0 + m;
        let moved = Signature::new(rows)?;
        let direct = (log_unnormalized_density(&moved, params)? - log_unnormalized_density(&base, params)?).exp();
        worst = worst.max((closed - direct).abs() / direct);
        cases += 1;
    }
    Ok((cases, worst))
}

fn coupling_marginals(rng: &mut ChaCha8Rng) -> Measured {
    let mut worst: f64 = 0.0;
    for t in 0..40 {
        let n = 1 + t % 6;
        let raw: Vec<f64> = (0..1usize << n).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let mu = FiniteBinaryDistribution::dense(n, raw.iter().map(|x| x / total).collect())?;
        let marginals = (0..n)
            .map(|len| {
                let top = mu.conditionals(len).into_iter().flatten().fold(0.0f64, f64::max);
                top + rng.gen::<f64>() * (1.0 - top)
            })
            .collect();
        let nu = FiniteBinaryDistribution::product(marginals)?;
        let table = build_coupling(&mu, &nu)?;
        if !table.is_monotone() {
            return Ok((t + 1, f64::INFINITY));
        }
        let (left, right) = (table.left_marginal(), table.right_marginal());
        for a in 0..1u32 << n {
            worst = worst.max((left[a as usize] - mu.prob(a)).abs());
            worst = worst.max((right[a as usize] - nu.prob(a)).abs());
        }
    }
    Ok((40, worst))
}

pub fn cmd_verify(cfg: &RunConfig) -> CliResult<VerifyReport> {
    let params = cfg.params()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let checks = vec![
        finish("coherency", 10.0 * cfg.eps_tail, coherency(&params, cfg.eps_tail, &mut rng)),
        finish("weyl_vs_paths", 0.0, weyl_vs_paths()),
        finish("gauss_vs_series", 1e-9, gauss_vs_series(&mut rng)),
        finish("p_m_vs_density", 1e-10, p_m_vs_density(&params, &mut rng)),
        finish("coupling_marginals", 1e-12, coupling_marginals(&mut rng)),
    ];
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {}: residual {:.3e} (tolerance {:.1e}, {} cases)", c.name, c.residual, c.tolerance, c.cases);
        if let Some(e) = &c.error {
            println!("  error: {e}");
        }
    }
    let report = VerifyReport {
        provenance: Provenance::of(cfg),
        config: cfg.provenance(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    };
    ensure_dir(&cfg.out)?;
    let file = cfg.out.join(VERIFY_FILE);
    write_json(&file, &report)?;
    info!("wrote {}", file.display());
    let failing: Vec<String> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    if failing.is_empty() {
        Ok(report)
    } else {
        Err(CliError::Check(failing))
    }
}
