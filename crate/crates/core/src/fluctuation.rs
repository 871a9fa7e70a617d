//! Likelihood-ratio increments between two zw-measures along a path, and
//! the box-shift modification that forces them away from 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{added_cell_with_content, interlaces, Cell, Path, Signature};
use crate::error::{Error, Result};
use crate::special::log_abs_gamma_sq_unchecked;
use crate::zw::{log_level_constant_closed, ZwParams};

/// Gamma part of the log-density: everything except the Weyl dimension,
/// which is the same for both parameter pairs and cancels in ratios.
fn log_gamma_part(lam: &Signature, params: &ZwParams) -> f64 {
    let n = lam.level() as i64;
    lam.rows()
        .iter()
        .enumerate()
        .map(|(r, &x)| {
            let shift = x - (r as i64 + 1);
            -log_abs_gamma_sq_unchecked(params.z() - shift as f64)
                - log_abs_gamma_sq_unchecked(params.w() + (n + 1 + shift) as f64)
        })
        .sum()
}

/// `ln h_N = ln p(tau(N+1) | tau(N); z, w) - ln p(tau(N+1) | tau(N); z', w')`.
///
/// This equals the double ratio of the cylinder densities: the dimension
/// factors cancel between the two parameter pairs and the normalization
/// enters only through `S_{N+1}/S_N`.
pub fn log_h_statistic(path: &Path, level: usize, params: &ZwParams, params_prime: &ZwParams) -> Result<f64> {
    let (mu, lam) = match (path.at(level), path.at(level + 1)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::arg(format!(
                "path covers levels {}..={}, need {level} and {}",
                path.start_level(),
                path.end_level(),
                level + 1
            )))
        }
    };
    if params == params_prime {
        return Ok(0.0);
    }
    Ok(log_h_step(mu, lam, params, params_prime))
}

fn log_h_step(mu: &Signature, lam: &Signature, params: &ZwParams, params_prime: &ZwParams) -> f64 {
    let level = mu.level();
    (log_gamma_part(lam, params) - log_gamma_part(lam, params_prime))
        - (log_gamma_part(mu, params) - log_gamma_part(mu, params_prime))
        - log_level_constant_closed(level, params)
        + log_level_constant_closed(level, params_prime)
}

pub fn h_statistic(path: &Path, level: usize, params: &ZwParams, params_prime: &ZwParams) -> Result<f64> {
    Ok(log_h_statistic(path, level, params, params_prime)?.exp())
}

/// Factor by which the density ratio at level `level + 1` changes when a
/// content-`k` box added between levels `level` and `level + 1` is moved one
/// level later: `|(z'-k)/(z-k)|² |(w+level+1+k)/(w'+level+1+k)|²`.
pub fn multiplier_star(params: &ZwParams, params_prime: &ZwParams, k: i64, level: usize) -> Result<f64> {
    let kf = k as f64;
    let s = level as f64 + 1.0 + kf;
    let zk = params.z() - kf;
    let wk = params_prime.w() + s;
    if zk.norm() == 0.0 || wk.norm() == 0.0 {
        return Err(Error::domain("multiplier has a vanishing denominator"));
    }
    Ok(((params_prime.z() - kf) / zk).norm_sqr() * ((params.w() + s) / wk).norm_sqr())
}

/// Moves the content-`k` box that enters `tau⁺` between levels `n` and
/// `n + 1` to the step `n + 1 -> n + 2`. Only `tau(n + 1)` changes.
pub fn shift_box_modification(path: &Path, n: usize, k: i64) -> Result<Path> {
    if !(path.covers(n) && path.covers(n + 2)) {
        return Err(Error::NotApplicable(format!(
            "path covers levels {}..={}, need {n}..={}",
            path.start_level(),
            path.end_level(),
            n + 2
        )));
    }
    let (a, b, c) = (path.at(n).unwrap(), path.at(n + 1).unwrap(), path.at(n + 2).unwrap());
    let cell = added_cell_with_content(Some(a), b, k).ok_or_else(|| {
        Error::NotApplicable(format!("condition 2: no content-{k} box enters between levels {n} and {}", n + 1))
    })?;
    if added_cell_with_content(Some(a), b, k + 1).is_some() {
        return Err(Error::NotApplicable(format!(
            "condition 3: a content-{} box also enters between levels {n} and {}",
            k + 1,
            n + 1
        )));
    }
    if added_cell_with_content(Some(b), c, k - 1).is_some() {
        return Err(Error::NotApplicable(format!(
            "condition 4: a content-{} box enters between levels {} and {}",
            k - 1,
            n + 1,
            n + 2
        )));
    }
    let row = cell.row as usize;
    let modified = b.with_row_shift(row, -1).map_err(|e| Error::NotApplicable(e.to_string()))?;
    if !(interlaces(a, &modified)? && interlaces(&modified, c)?) {
        return Err(Error::NotApplicable("modified signature breaks interlacing".into()));
    }
    let mut out = path.clone();
    out.replace_unchecked(n + 1, modified);
    Ok(out)
}

/// `(k, nu, delta, level threshold)` chosen so that moving a content-`k`
/// box changes the density ratio by more than `nu / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatingChoice {
    pub k: i64,
    /// `||(z'-k)/(z-k)|² - 1|`.
    pub first_factor_gap: f64,
    pub nu: f64,
    pub delta: f64,
    /// From this level on the `w`-factor of the multiplier is within `nu / 100` of 1.
    pub level_threshold: usize,
}

pub const SEPARATING_K_MAX: i64 = 64;
const THRESHOLD_SCAN: usize = 10_000_000;

/// Scans `k` in `1..=64` with `Re(k + w) > 0` for the largest gap of the
/// `z`-factor of the multiplier, then sets `nu` just below it and
/// `delta = nu / 100`.
pub fn find_separating_k(params: &ZwParams, params_prime: &ZwParams) -> Result<SeparatingChoice> {
    let mut best: Option<(i64, f64)> = None;
    for k in 1..=SEPARATING_K_MAX {
        let kf = k as f64;
        if (params.w() + kf).re <= 0.0 || (params_prime.w() + kf).re <= 0.0 {
            continue;
        }
        let gap = (((params_prime.z() - kf) / (params.z() - kf)).norm_sqr() - 1.0).abs();
        if best.map_or(true, |(_, g)| gap > g) {
            best = Some((k, gap));
        }
    }
    let (k, gap) = best.ok_or_else(|| Error::domain("no k in 1..=64 has Re(k + w) > 0"))?;
    if gap <= 1e-12 {
        return Err(Error::domain(
            "the z-factor equals 1 for every k: z' is z or its conjugate",
        ));
    }
    let nu = 0.999 * gap;
    let kf = k as f64;
    let second = |n: usize| {
        let s = n as f64 + 1.0 + kf;
        ((params.w() + s) / (params_prime.w() + s)).norm_sqr()
    };
    let mut last_bad = 0usize;
    for n in 1..=THRESHOLD_SCAN {
        if (second(n) - 1.0).abs() >= nu / 100.0 {
            last_bad = n;
        }
        // |second - 1| decays like 1/n once n exceeds the parameters
        if n > 64 * (last_bad + 1) && n as f64 > 10.0 * (params.w().norm() + params_prime.w().norm() + kf) {
            break;
        }
    }
    Ok(SeparatingChoice {
        k,
        first_factor_gap: gap,
        nu,
        delta: nu / 100.0,
        level_threshold: last_bad + 1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationConfig {
    pub delta: f64,
    pub k: i64,
    pub start_level: usize,
    /// Strictly increasing window boundaries `N_1 < N_2 < ...`.
    pub windows: Vec<usize>,
}

impl FluctuationConfig {
    pub fn new(delta: f64, k: i64, start_level: usize, windows: Vec<usize>) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::arg(format!("delta = {delta} must be positive")));
        }
        if start_level == 0 {
            return Err(Error::arg("start level must be positive"));
        }
        if windows.windows(2).any(|w| w[0] >= w[1]) || windows.first() == Some(&0) {
            return Err(Error::arg("window boundaries must be positive and strictly increasing"));
        }
        Ok(Self { delta, k, start_level, windows })
    }

    /// Windows `N_1, 2 N_1, 4 N_1, ...` up to `max_level`.
    pub fn doubling_windows(n1: usize, max_level: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut n = n1.max(1);
        while n <= max_level {
            out.push(n);
            n *= 2;
        }
        out
    }

    /// `k` and `delta` from [`find_separating_k`], doubling windows from `n1`.
    pub fn auto(params: &ZwParams, params_prime: &ZwParams, n1: usize, max_level: usize) -> Result<(Self, SeparatingChoice)> {
        let choice = find_separating_k(params, params_prime)?;
        let cfg = Self::new(choice.delta, choice.k, n1.max(1), Self::doubling_windows(n1, max_level))?;
        Ok((cfg, choice))
    }

    pub fn check_params(&self, params: &ZwParams) -> Result<()> {
        if (params.w() + self.k as f64).re <= 0.0 {
            return Err(Error::domain(format!(
                "Re(k + w) = {} must be positive",
                (params.w() + self.k as f64).re
            )));
        }
        Ok(())
    }
}

/// A level where `|h - 1| > delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationEvent {
    pub level: usize,
    pub h: f64,
}

/// All levels `N >= start_level` (with `N + 1` on the path) where `|h_N - 1| > delta`.
pub fn detect_fluctuations(
    path: &Path,
    cfg: &FluctuationConfig,
    params: &ZwParams,
    params_prime: &ZwParams,
) -> Result<Vec<FluctuationEvent>> {
    let mut out = Vec::new();
    if params == params_prime {
        return Ok(out);
    }
    let from = cfg.start_level.max(path.start_level());
    for level in from..path.end_level() {
        let h = log_h_step(path.at(level).unwrap(), path.at(level + 1).unwrap(), params, params_prime).exp();
        if (h - 1.0).abs() > cfg.delta {
            out.push(FluctuationEvent { level, h });
        }
    }
    Ok(out)
}

/// The first content-`k` box of a window with the admissibility conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxEventRecord {
    /// 1-based window index `m` of `[N_m, N_{m+1})`.
    pub window: usize,
    pub level: usize,
    pub cell: Cell,
    /// Conditions 1-4: minimal level in the window, content-`k` box added,
    /// no content `k+1` box at the same step, no content `k-1` box at the
    /// next step.
    pub conditions: [bool; 4],
}

impl BoxEventRecord {
    pub fn admissible(&self) -> bool {
        self.conditions.iter().all(|&c| c)
    }
}

/// Scans every complete window of the path for the first content-`k` box.
pub fn admissibility_scan(path: &Path, cfg: &FluctuationConfig) -> Vec<BoxEventRecord> {
    let mut out = Vec::new();
    let k = cfg.k;
    for (m, w) in cfg.windows.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        if lo < path.start_level() || hi > path.end_level() {
            continue;
        }
        for n in lo..hi {
            let (a, b) = (path.at(n).unwrap(), path.at(n + 1).unwrap());
            if let Some(cell) = added_cell_with_content(Some(a), b, k) {
                let cond3 = added_cell_with_content(Some(a), b, k + 1).is_none();
                let cond4 = match path.at(n + 2) {
                    Some(c) => added_cell_with_content(Some(b), c, k - 1).is_none(),
                    None => false,
                };
                out.push(BoxEventRecord {
                    window: m + 1,
                    level: n,
                    cell,
                    conditions: [true, true, cond3, cond4],
                });
                break;
            }
        }
    }
    out
}

/// Whether the path is admissible on every complete window: each has a
/// record and all its conditions hold.
pub fn is_admissible(path: &Path, cfg: &FluctuationConfig) -> bool {
    let complete = cfg
        .windows
        .windows(2)
        .filter(|w| w[0] >= path.start_level() && w[1] <= path.end_level())
        .count();
    let records = admissibility_scan(path, cfg);
    records.len() == complete && complete > 0 && records.iter().all(BoxEventRecord::admissible)
}

/// Cumulative log likelihood ratio along a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoglrTrace {
    pub start_level: usize,
    /// `cumulative[m] = Σ_{N < start + m} ln h_N`, so `cumulative[0] = 0`.
    pub cumulative: Vec<f64>,
    /// `ln P_1(tau(1); z, w) - ln P_1(tau(1); z', w')` when the path starts
    /// at level 1. Adding it to `cumulative` gives the density ratio itself.
    pub level_one_offset: Option<f64>,
}

pub fn loglr_trace(path: &Path, params: &ZwParams, params_prime: &ZwParams) -> LoglrTrace {
    let mut cumulative = Vec::with_capacity(path.len());
    cumulative.push(0.0);
    let mut acc = 0.0;
    if params != params_prime {
        for level in path.start_level()..path.end_level() {
            acc += log_h_step(path.at(level).unwrap(), path.at(level + 1).unwrap(), params, params_prime);
            cumulative.push(acc);
        }
    } else {
        cumulative.resize(path.len(), 0.0);
    }
    let level_one_offset = (path.start_level() == 1).then(|| {
        let first = &path.signatures()[0];
        (log_gamma_part(first, params) - log_level_one_norm(params))
            - (log_gamma_part(first, params_prime) - log_level_one_norm(params_prime))
    });
    LoglrTrace {
        start_level: path.start_level(),
        cumulative,
        level_one_offset,
    }
}

/// `ln S_1` via Dougall's bilateral sum.
fn log_level_one_norm(params: &ZwParams) -> f64 {
    let (z, w) = (params.z(), params.w());
    log_abs_gamma_sq_unchecked(Complex64::new(2.0 * params.re_sum() + 1.0, 0.0)) / 2.0
        - log_abs_gamma_sq_unchecked(z + w + 1.0)
        - log_abs_gamma_sq_unchecked(z + w.conj() + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zw::{log_transition_probability, log_unnormalized_density};

    fn sig(rows: &[i64]) -> Signature {
        Signature::new(rows.to_vec()).unwrap()
    }

    fn small_path() -> Path {
        Path::new(1, vec![sig(&[1]), sig(&[2, 0]), sig(&[2, 1, 0])]).unwrap()
    }

    #[test]
    fn multiplier_examples() {
        let p = ZwParams::real(0.5, 0.3).unwrap();
        let q = ZwParams::real(1.5 + 1e-3, 0.3).unwrap();
        assert!((multiplier_star(&p, &p, 3, 10).unwrap() - 1.0).abs() < 1e-15);
        let exact = ZwParams::new(Complex64::new(1.5, 1e-6), Complex64::new(0.3, 0.0)).unwrap();
        for n in [1, 10, 1000] {
            let m = multiplier_star(&p, &exact, 2, n).unwrap();
            assert!((m - 1.0 / 9.0).abs() < 1e-10, "{m}");
        }
        let far = multiplier_star(&p, &q, 2, 1_000_000_000).unwrap();
        let first = ((q.z() - 2.0) / (p.z() - 2.0)).norm_sqr();
        assert!((far - first).abs() < 1e-12);
    }

    #[test]
    fn shift_example() {
        let path = small_path();
        let out = shift_box_modification(&path, 1, 1).unwrap();
        assert_eq!(out.at(2).unwrap(), &sig(&[1, 0]));
        assert_eq!(out.at(1), path.at(1));
        assert_eq!(out.at(3), path.at(3));
        assert!(Path::new(1, out.signatures().to_vec()).is_ok());
        // the box now enters one step later, so a second shift at level 1 fails
        assert!(matches!(shift_box_modification(&out, 1, 1), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn shift_changes_density_ratio_by_multiplier() {
        let p = ZwParams::new(Complex64::new(0.5, 0.2), Complex64::new(0.3, -0.1)).unwrap();
        let q = ZwParams::new(Complex64::new(1.6, 0.0), Complex64::new(0.9, 0.4)).unwrap();
        let path = small_path();
        let out = shift_box_modification(&path, 1, 1).unwrap();
        let ratio = |s: &Signature| log_unnormalized_density(s, &p).unwrap() - log_unnormalized_density(s, &q).unwrap();
        let delta = ratio(out.at(2).unwrap()) - ratio(path.at(2).unwrap());
        let m = multiplier_star(&p, &q, 1, 1).unwrap();
        assert!((delta - m.ln()).abs() < 1e-10);
        // and h_1 picks up exactly that factor
        let h_before = log_h_statistic(&path, 1, &p, &q).unwrap();
        let h_after = log_h_statistic(&out, 1, &p, &q).unwrap();
        assert!((h_after - h_before - m.ln()).abs() < 1e-10);
    }

    #[test]
    fn h_matches_transition_quotient() {
        let p = ZwParams::real(0.5, 0.3).unwrap();
        let q = ZwParams::new(Complex64::new(1.6, 0.0), Complex64::new(0.3, 0.0)).unwrap();
        let path = Path::new(2, vec![sig(&[1, -1]), sig(&[3, 0, -1]), sig(&[3, 1, 0, -2])]).unwrap();
        for level in 2..4 {
            let direct = log_h_statistic(&path, level, &p, &q).unwrap();
            let (mu, lam) = (path.at(level).unwrap(), path.at(level + 1).unwrap());
            let two = log_transition_probability(mu, lam, &p, 1e-13).unwrap()
                - log_transition_probability(mu, lam, &q, 1e-13).unwrap();
            assert!((direct - two).abs() < 1e-10, "{direct} vs {two}");
        }
        assert_eq!(log_h_statistic(&path, 2, &p, &p).unwrap(), 0.0);
        assert!(log_h_statistic(&path, 4, &p, &q).is_err());
    }

    #[test]
    fn separating_choice() {
        let p = ZwParams::real(0.5, 0.3).unwrap();
        let q = ZwParams::real(1.6, 0.3).unwrap();
        let c = find_separating_k(&p, &q).unwrap();
        assert_eq!(c.k, 2);
        assert!((c.first_factor_gap - (1.0 - (0.4f64 / 1.5).powi(2))).abs() < 1e-12);
        assert!((c.delta - c.nu / 100.0).abs() < 1e-15);
        assert_eq!(c.level_threshold, 1);
        let r = ZwParams::real(0.5, 0.9).unwrap();
        let c2 = find_separating_k(&p, &r);
        assert!(c2.is_err());
        let s = ZwParams::real(1.6, 0.9).unwrap();
        let c3 = find_separating_k(&p, &s).unwrap();
        let second = |n: usize| ((p.w() + (n as f64 + 1.0 + c3.k as f64)) / (s.w() + (n as f64 + 1.0 + c3.k as f64))).norm_sqr();
        assert!((second(c3.level_threshold) - 1.0).abs() < c3.nu / 100.0);
        assert!((second(c3.level_threshold - 1) - 1.0).abs() >= c3.nu / 100.0);
    }

    #[test]
    fn scan_and_fluctuations() {
        let p = ZwParams::real(0.5, 0.3).unwrap();
        let q = ZwParams::real(1.6, 0.3).unwrap();
        let path = small_path();
        let cfg = FluctuationConfig::new(0.01, 1, 1, vec![1, 2]).unwrap();
        let recs = admissibility_scan(&path, &cfg);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].cell, Cell::new(1, 2));
        assert!(recs[0].admissible());
        assert!(is_admissible(&path, &cfg));
        let none = FluctuationConfig::new(0.01, 5, 1, vec![1, 2]).unwrap();
        assert!(admissibility_scan(&path, &none).is_empty());
        assert!(!is_admissible(&path, &none));
        assert!(detect_fluctuations(&path, &cfg, &p, &p).unwrap().is_empty());
        let huge = FluctuationConfig::new(1e9, 1, 1, vec![1, 2]).unwrap();
        assert!(detect_fluctuations(&path, &huge, &p, &q).unwrap().is_empty());
        let tr = loglr_trace(&path, &p, &q);
        assert_eq!(tr.cumulative.len(), 3);
        assert_eq!(tr.cumulative[0], 0.0);
        let h1 = log_h_statistic(&path, 1, &p, &q).unwrap();
        assert!((tr.cumulative[1] - h1).abs() < 1e-14);
        assert!(loglr_trace(&path, &p, &p).cumulative.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn trace_plus_offset_is_density_ratio() {
        let p = ZwParams::new(Complex64::new(0.5, 0.5), Complex64::new(0.25, 0.0)).unwrap();
        let q = ZwParams::real(1.2, 0.7).unwrap();
        let path = small_path();
        let tr = loglr_trace(&path, &p, &q);
        let off = tr.level_one_offset.unwrap();
        // level-1 normalizers from the chain's certified sums
        let chain_p = crate::zw::ZwChain::new(p, Default::default()).unwrap();
        let chain_q = crate::zw::ZwChain::new(q, Default::default()).unwrap();
        let first = path.at(1).unwrap();
        let direct = (log_unnormalized_density(first, &p).unwrap() - chain_p.log_level_one_total())
            - (log_unnormalized_density(first, &q).unwrap() - chain_q.log_level_one_total());
        assert!((off - direct).abs() < 1e-8, "{off} vs {direct}");
    }
}
