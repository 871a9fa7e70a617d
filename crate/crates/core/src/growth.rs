//! Growth of a fixed diagonal of the positive diagram along zw paths, the
//! conditional addition probabilities that control it, and the thick-hook
//! events whose probability decays along the chain.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    added_cell_with_content, diagonal_length, dimension_ratio_row_increment, Path, Signature,
};
use crate::coupling::FiniteBinaryDistribution;
use crate::error::{Error, Result};
use crate::zw::{
    log_level_constant_closed, log_unnormalized_density, RowBound, SamplerConfig, TransitionSums, ZwChain, ZwParams,
};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `xi[m] = 1` iff a content-`k` cell enters `tau⁺` at level `start + m`.
/// At a path's first level the previous diagram is taken empty when the
/// path starts at level 1, and equal to the current one otherwise.
pub fn xi_indicators(path: &Path, k: i64) -> Vec<u8> {
    let sigs = path.signatures();
    let mut out = Vec::with_capacity(sigs.len());
    for (m, lam) in sigs.iter().enumerate() {
        let prev = if m == 0 {
            if path.start_level() == 1 {
                None
            } else {
                out.push(0);
                continue;
            }
        } else {
            Some(&sigs[m - 1])
        };
        out.push(added_cell_with_content(prev, lam, k).is_some() as u8);
    }
    out
}

/// Per-level diagonal statistics of one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrace {
    pub k: i64,
    pub start_level: usize,
    pub xi: Vec<u8>,
    /// Running sums of `xi`, offset by the content-`k` diagonal already
    /// present at the first level when the path starts above level 1.
    pub s: Vec<u64>,
    /// Main-diagonal lengths.
    pub tilde_s: Vec<u64>,
}

impl GrowthTrace {
    pub fn from_path(path: &Path, k: i64) -> Self {
        let xi = xi_indicators(path, k);
        let mut acc = if path.start_level() == 1 {
            0
        } else {
            diagonal_length(&path.signatures()[0].positive_part(), k)
        };
        let s = xi
            .iter()
            .map(|&x| {
                acc += x as u64;
                acc
            })
            .collect();
        let tilde_s = path
            .signatures()
            .iter()
            .map(|lam| diagonal_length(&lam.positive_part(), 0))
            .collect();
        Self { k, start_level: path.start_level(), xi, s, tilde_s }
    }

    pub fn s_at(&self, level: usize) -> Option<u64> {
        level.checked_sub(self.start_level).and_then(|m| self.s.get(m).copied())
    }

    pub fn tilde_s_at(&self, level: usize) -> Option<u64> {
        level.checked_sub(self.start_level).and_then(|m| self.tilde_s.get(m).copied())
    }

    /// Levels where `tilde_s > s + k` (never happens for `k >= 0`).
    pub fn envelope_violations(&self) -> Vec<usize> {
        if self.k < 0 {
            return Vec::new();
        }
        (0..self.s.len())
            .filter(|&m| self.tilde_s[m] > self.s[m] + self.k as u64)
            .map(|m| self.start_level + m)
            .collect()
    }
}

/// The row in which a content-`k` cell can be added to `tau⁺` on the step
/// out of `mu`, with the bound on that row encoding the addition. `None`
/// when interlacing forbids it.
pub fn content_addition_bound(mu: &Signature, k: i64) -> Option<RowBound> {
    let n = mu.level();
    let first = 1.max(1 - k) as usize;
    if first > n + 1 {
        return None;
    }
    let row = (first..=n).find(|&r| mu.row(r) < r as i64 + k).unwrap_or(n + 1);
    let target = row as i64 + k;
    if row >= 2 && mu.row(row - 1) < target {
        return None;
    }
    Some(RowBound::at_least(row, target))
}

fn log_transition_norm(mu: &Signature, params: &ZwParams) -> Result<f64> {
    Ok(log_unnormalized_density(mu, params)? + log_level_constant_closed(mu.level(), params))
}

fn restricted_probability(mu: &Signature, params: &ZwParams, eps_tail: f64, bounds: &[RowBound]) -> Result<f64> {
    let part = TransitionSums::new(mu, params, eps_tail, usize::MAX, bounds)?.log_total();
    if part == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok((part - log_transition_norm(mu, params)?).exp().clamp(0.0, 1.0))
}

/// `P(a content-k cell enters tau⁺ on the next step | tau(N) = mu)`.
pub fn conditional_add_probability(mu: &Signature, k: i64, params: &ZwParams, eps_tail: f64) -> Result<f64> {
    match content_addition_bound(mu, k) {
        None => Ok(0.0),
        Some(b) => restricted_probability(mu, params, eps_tail, &[b]),
    }
}

/// The same probability conditioned also on a content-`(k-1)` cell entering
/// at that step; `None` when that event has probability zero.
pub fn conditional_add_probability_given_previous(
    mu: &Signature,
    k: i64,
    params: &ZwParams,
    eps_tail: f64,
) -> Result<Option<f64>> {
    let Some(prev) = content_addition_bound(mu, k - 1) else {
        return Ok(None);
    };
    let base = restricted_probability(mu, params, eps_tail, &[prev])?;
    if base == 0.0 {
        return Ok(None);
    }
    let both = match content_addition_bound(mu, k) {
        None => 0.0,
        Some(b) => restricted_probability(mu, params, eps_tail, &[prev, b])?,
    };
    Ok(Some((both / base).min(1.0)))
}

/// `P(xi_1 = 1)`: a content-`k` cell in `tau⁺(1)`.
pub fn first_level_add_probability(chain: &ZwChain, k: i64) -> f64 {
    if k < 0 {
        0.0
    } else {
        chain.level_one_at_least(k + 1)
    }
}

/// `N · P(xi_N = 1 | tau(N-1) = mu)` with `N = mu.level() + 1`.
pub fn scaled_add_probability(mu: &Signature, k: i64, params: &ZwParams, eps_tail: f64) -> Result<f64> {
    Ok((mu.level() + 1) as f64 * conditional_add_probability(mu, k, params, eps_tail)?)
}

/// Estimate of the constant `c1` with `P(xi_N = 1 | history) <= c1 / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Fit {
    /// Largest observed `N · P(xi_N = 1 | tau(N-1))`.
    pub c1: f64,
    pub argmax_level: usize,
    pub mean_scaled: f64,
    pub std_scaled: f64,
    /// Standard error of `mean_scaled`.
    pub std_err: f64,
    pub samples: usize,
    pub level_range: (usize, usize),
}

pub const C1_MIN_SAMPLES: usize = 10;

/// Evaluates `N · P(xi_N = 1 | tau(N-1))` exactly along sampled histories
/// for every `N` in `level_range` and reports the maximum. By the Markov
/// property the conditional law given `tau(N-1)` is the law given the whole
/// history, so every evaluated value is an exact conditional probability.
pub fn fit_c1(
    params: &ZwParams,
    k: i64,
    level_range: (usize, usize),
    n_paths: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<C1Fit> {
    let (lo, hi) = level_range;
    if lo < 2 || hi < lo {
        return Err(Error::arg(format!("level range ({lo}, {hi}) must satisfy 2 <= lo <= hi")));
    }
    let count = n_paths * (hi - lo + 1);
    if count < C1_MIN_SAMPLES {
        return Err(Error::Statistical(format!(
            "{count} evaluations, need at least {C1_MIN_SAMPLES}"
        )));
    }
    let chain = ZwChain::new(*params, cfg.clone())?;
    let per_path = |p: usize| -> Result<Vec<(usize, f64)>> {
        let path = chain.sample_path_keyed(hi - 1, seed, p as u64)?;
        (lo..=hi)
            .map(|n| Ok((n, scaled_add_probability(path.at(n - 1).unwrap(), k, params, cfg.eps_tail)?)))
            .collect()
    };
    #[cfg(feature = "parallel")]
    let values: Vec<Vec<(usize, f64)>> = (0..n_paths).into_par_iter().map(per_path).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let values: Vec<Vec<(usize, f64)>> = (0..n_paths).map(per_path).collect::<Result<_>>()?;
    let flat: Vec<(usize, f64)> = values.into_iter().flatten().collect();
    let (argmax_level, c1) = flat
        .iter()
        .copied()
        .fold((lo, 0.0), |best, (n, v)| if v > best.1 { (n, v) } else { best });
    let m = flat.len() as f64;
    let mean = flat.iter().map(|x| x.1).sum::<f64>() / m;
    let var = flat.iter().map(|x| (x.1 - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    Ok(C1Fit {
        c1,
        argmax_level,
        mean_scaled: mean,
        std_scaled: var.sqrt(),
        std_err: (var / m).sqrt(),
        samples: flat.len(),
        level_range,
    })
}

/// The exact supremum of `N · P(xi_N = 1 | history)` over all histories
/// ending in a signature with rows in `rows`, for `N` in `levels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Supremum {
    pub c1: f64,
    pub argmax_level: usize,
    pub argmax: Option<Vec<i64>>,
    pub states: usize,
}

pub fn exact_c1_supremum(
    params: &ZwParams,
    k: i64,
    levels: (usize, usize),
    rows: (i64, i64),
    eps_tail: f64,
) -> Result<C1Supremum> {
    let (lo, hi) = levels;
    if lo < 1 || hi < lo || rows.0 > rows.1 {
        return Err(Error::arg("empty level or row range"));
    }
    let chain = ZwChain::new(*params, SamplerConfig { eps_tail, ..SamplerConfig::default() })?;
    let mut best = C1Supremum { c1: 0.0, argmax_level: lo, argmax: None, states: 0 };
    if lo == 1 {
        best.c1 = first_level_add_probability(&chain, k);
        best.states = 1;
    }
    for n in lo.max(2)..=hi {
        for mu in signatures_in_box(n - 1, rows.0, rows.1) {
            let v = scaled_add_probability(&mu, k, params, eps_tail)?;
            best.states += 1;
            if v > best.c1 {
                best = C1Supremum { c1: v, argmax_level: n, argmax: Some(mu.into_rows()), states: best.states };
            }
        }
    }
    Ok(best)
}

/// All signatures of `level` with entries in `[lo, hi]`.
pub fn signatures_in_box(level: usize, lo: i64, hi: i64) -> Vec<Signature> {
    let mut out = Vec::new();
    let mut cur = vec![hi; level];
    fn rec(cur: &mut Vec<i64>, pos: usize, lo: i64, upper: i64, out: &mut Vec<Signature>) {
        if pos == cur.len() {
            out.push(Signature::new(cur.clone()).expect("non-increasing by construction"));
            return;
        }
        for x in (lo..=upper).rev() {
            cur[pos] = x;
            rec(cur, pos + 1, lo, x, out);
        }
    }
    rec(&mut cur, 0, lo, hi, &mut out);
    out
}

/// Product measure with `P(q_N = 1) = min(1, c1 / N)`, `N = 1..=n_levels`.
pub fn bernoulli_envelope(c1: f64, n_levels: usize) -> Result<FiniteBinaryDistribution> {
    if !(c1 >= 0.0) || !c1.is_finite() {
        return Err(Error::arg(format!("c1 = {c1} must be finite and non-negative")));
    }
    FiniteBinaryDistribution::product((1..=n_levels).map(|n| (c1 / n as f64).min(1.0)).collect())
}

/// Mean and variance of `Σ_{i<=n} q_i` under the envelope.
pub fn envelope_sum_moments(c1: f64, n: usize) -> (f64, f64) {
    (1..=n).fold((0.0, 0.0), |(m, v), i| {
        let p = (c1 / i as f64).min(1.0);
        (m + p, v + p * (1.0 - p))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub mean: f64,
}

impl Quantiles {
    /// Linear-interpolation quantiles; `values` must be non-empty.
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        let q = |p: f64| {
            let x = p * (v.len() - 1) as f64;
            let (i, f) = (x.floor() as usize, x.fract());
            if i + 1 < v.len() {
                v[i] * (1.0 - f) + v[i + 1] * f
            } else {
                v[i]
            }
        };
        Self {
            q05: q(0.05),
            median: q(0.5),
            q95: q(0.95),
            mean: v.iter().sum::<f64>() / v.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub k: i64,
    pub n_levels: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub sampler: SamplerConfig,
    /// Empty for the grid `2, 4, 8, ...` plus `n_levels`.
    #[serde(default)]
    pub checkpoints: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub level: usize,
    /// `s_N / ln N` across paths.
    pub s_ratio: Quantiles,
    /// `tilde_s_N / ln N` across paths.
    pub tilde_ratio: Quantiles,
    pub s_mean: f64,
    pub s_std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub k: i64,
    pub n_paths: usize,
    pub seed: u64,
    pub rows: Vec<GrowthRow>,
    /// Path-level pairs where `tilde_s > s + k`.
    pub envelope_violations: usize,
    /// In `[-1, 1]`: the share of consecutive checkpoints where the median
    /// ratio falls, minus the share where it rises.
    pub median_trend: f64,
}

pub fn geometric_checkpoints(n_levels: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 2;
    while n <= n_levels {
        out.push(n);
        n *= 2;
    }
    if n_levels >= 2 && out.last() != Some(&n_levels) {
        out.push(n_levels);
    }
    out
}

pub fn growth_experiment(params: &ZwParams, cfg: &GrowthConfig) -> Result<GrowthTable> {
    growth_experiment_with(params, cfg, |_, _| {})
}

/// As [`growth_experiment`], handing every path's trace to `inspect`.
pub fn growth_experiment_with(
    params: &ZwParams,
    cfg: &GrowthConfig,
    inspect: impl Fn(u64, &GrowthTrace) + Sync,
) -> Result<GrowthTable> {
    if (params.w() + cfg.k as f64).re <= 0.0 {
        return Err(Error::domain("Re(k + w) must be positive"));
    }
    if cfg.n_paths == 0 {
        return Err(Error::arg("n_paths must be positive"));
    }
    let checkpoints = if cfg.checkpoints.is_empty() {
        geometric_checkpoints(cfg.n_levels)
    } else {
        cfg.checkpoints.clone()
    };
    if checkpoints.iter().any(|&n| n < 2 || n > cfg.n_levels) {
        return Err(Error::arg("checkpoints must lie in [2, n_levels]"));
    }
    let chain = ZwChain::new(*params, cfg.sampler.clone())?;
    let run = |p: usize| -> Result<(Vec<(u64, u64)>, usize)> {
        let path = chain.sample_path_keyed(cfg.n_levels, cfg.seed, p as u64)?;
        let trace = GrowthTrace::from_path(&path, cfg.k);
        drop(path);
        inspect(p as u64, &trace);
        let at = checkpoints
            .iter()
            .map(|&n| (trace.s_at(n).unwrap(), trace.tilde_s_at(n).unwrap()))
            .collect();
        Ok((at, trace.envelope_violations().len()))
    };
    #[cfg(feature = "parallel")]
    let per_path: Vec<_> = (0..cfg.n_paths).into_par_iter().map(run).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let per_path: Vec<_> = (0..cfg.n_paths).map(run).collect::<Result<_>>()?;

    let envelope_violations = per_path.iter().map(|x| x.1).sum();
    let rows: Vec<GrowthRow> = checkpoints
        .iter()
        .enumerate()
        .map(|(c, &n)| {
            let ln = (n as f64).ln();
            let s: Vec<f64> = per_path.iter().map(|x| x.0[c].0 as f64).collect();
            let t: Vec<f64> = per_path.iter().map(|x| x.0[c].1 as f64 / ln).collect();
            let m = s.len() as f64;
            let mean = s.iter().sum::<f64>() / m;
            let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            GrowthRow {
                level: n,
                s_ratio: Quantiles::of(&s.iter().map(|x| x / ln).collect::<Vec<_>>()),
                tilde_ratio: Quantiles::of(&t),
                s_mean: mean,
                s_std_err: (var / m).sqrt(),
            }
        })
        .collect();
    let median_trend = if rows.len() < 2 {
        0.0
    } else {
        let steps = rows.windows(2).map(|w| {
            let d = w[1].s_ratio.median - w[0].s_ratio.median;
            if d < 0.0 {
                1.0
            } else if d > 0.0 {
                -1.0
            } else {
                0.0
            }
        });
        steps.sum::<f64>() / (rows.len() - 1) as f64
    };
    Ok(GrowthTable {
        k: cfg.k,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        rows,
        envelope_violations,
        median_trend,
    })
}

/// The quintuple of a thick-hook event: the positive diagram misses the
/// cell `(i, j)` with row `i` stuck at length `j - 1`, and the negative
/// diagram misses the cell `(l + 1, m + 1)` with its row `l + 1` stuck at
/// length `m`, from level `t` on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HookEvent {
    pub i: usize,
    pub j: u64,
    pub l: usize,
    pub m: u64,
    pub t: usize,
}

impl HookEvent {
    pub fn new(i: usize, j: u64, l: usize, m: u64, t: usize) -> Result<Self> {
        if i < 1 || j < 1 || t < 1 {
            return Err(Error::arg("i, j and t must be at least 1"));
        }
        if t < i + l {
            return Err(Error::arg(format!("level t = {t} must be at least i + l = {}", i + l)));
        }
        Ok(Self { i, j, l, m, t })
    }

    /// Conditions 1-4 at one signature:
    /// `lam_i = j - 1`, `lam_{i-1} >= j`, `lam_{N-l} = -m`, `lam_{N-l+1} <= -(m+1)`,
    /// where rows `0` and `N + 1` impose nothing.
    pub fn conditions(&self, lam: &Signature) -> Result<[bool; 4]> {
        let n = lam.level();
        if n < self.i + self.l {
            return Err(Error::arg(format!("level {n} is below i + l = {}", self.i + self.l)));
        }
        let (j, m) = (self.j as i64, self.m as i64);
        let low = n - self.l;
        Ok([
            lam.row(self.i) == j - 1,
            self.i == 1 || lam.row(self.i - 1) >= j,
            lam.row(low) == -m,
            self.l == 0 || lam.row(low + 1) <= -(m + 1),
        ])
    }

    pub fn holds(&self, lam: &Signature) -> Result<bool> {
        Ok(self.conditions(lam)?.iter().all(|&c| c))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HookTrace {
    /// Levels `t..=end` of the path.
    pub start_level: usize,
    pub holds: Vec<bool>,
    pub first_violation: Option<usize>,
}

pub fn thick_hook_event(path: &Path, ev: &HookEvent) -> Result<HookTrace> {
    if !path.covers(ev.t) {
        return Err(Error::arg(format!(
            "path covers levels {}..={}, event starts at {}",
            path.start_level(),
            path.end_level(),
            ev.t
        )));
    }
    let holds = (ev.t..=path.end_level())
        .map(|n| ev.holds(path.at(n).unwrap()))
        .collect::<Result<Vec<_>>>()?;
    let first_violation = holds.iter().position(|&h| !h).map(|m| ev.t + m);
    Ok(HookTrace { start_level: ev.t, holds, first_violation })
}

/// Fractions of sampled paths lying in the event at every level from `t`
/// through each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HookSurvival {
    pub event: HookEvent,
    pub n_paths: usize,
    pub checkpoints: Vec<usize>,
    pub survivors: Vec<usize>,
    pub fractions: Vec<f64>,
}

pub fn hook_survival(
    params: &ZwParams,
    ev: &HookEvent,
    checkpoints: &[usize],
    n_paths: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<HookSurvival> {
    if n_paths == 0 || checkpoints.is_empty() || checkpoints.iter().any(|&n| n < ev.t) {
        return Err(Error::arg("need paths and checkpoints at or above t"));
    }
    let top = *checkpoints.iter().max().unwrap();
    let chain = ZwChain::new(*params, cfg.clone())?;
    let run = |p: usize| -> Result<Option<usize>> {
        let path = chain.sample_path_keyed(top, seed, p as u64)?;
        Ok(thick_hook_event(&path, ev)?.first_violation)
    };
    #[cfg(feature = "parallel")]
    let exits: Vec<Option<usize>> = (0..n_paths).into_par_iter().map(run).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let exits: Vec<Option<usize>> = (0..n_paths).map(run).collect::<Result<_>>()?;
    let survivors: Vec<usize> = checkpoints
        .iter()
        .map(|&n| exits.iter().filter(|e| e.map_or(true, |v| v > n)).count())
        .collect();
    Ok(HookSurvival {
        event: *ev,
        n_paths,
        checkpoints: checkpoints.to_vec(),
        fractions: survivors.iter().map(|&s| s as f64 / n_paths as f64).collect(),
        survivors,
    })
}

/// `p(lam' | mu) / p(lam | mu)` where `lam'` is `lam` with row `i` one
/// longer: `|(z - j + i) / (w + n + j - i)|² · Dim(lam') / Dim(lam)` with
/// `j = lam_i + 1` and `n` the level of `lam`.
pub fn hook_escape_ratio(lam: &Signature, i: usize, params: &ZwParams) -> Result<f64> {
    let dim = dimension_ratio_row_increment(lam, i)?;
    let n = lam.level() as f64;
    let shift = (lam.row(i) + 1 - i as i64) as f64;
    let num = params.z() - shift;
    let den = params.w() + n + shift;
    if num.norm() == 0.0 || den.norm() == 0.0 {
        return Err(Error::domain("gamma factor at a pole"));
    }
    Ok((num / den).norm_sqr() * dim)
}

/// `(Σ_{i<=n} b_i ln i) / ln n` with `b[0] = b_1`.
pub fn abel_weighted_limit(b: &[f64], n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::arg("n must be at least 2"));
    }
    if b.len() < n {
        return Err(Error::arg(format!("sequence has {} terms, need {n}", b.len())));
    }
    let s: f64 = b[..n].iter().enumerate().map(|(i, x)| x * ((i + 1) as f64).ln()).sum();
    Ok(s / (n as f64).ln())
}

/// The three-term rearrangement of `(Σ b_i ln i) / ln n` obtained from
/// summation by parts with weights `ln i / ln n`, split at `split`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbelTerms {
    pub lhs: f64,
    /// `(Σ_{i<=n} b_i) ln L / ln n`.
    pub head: f64,
    /// `-Σ_{k=L}^{n-1} (Σ_{i=k+1}^n b_i) (ln k - ln(k+1)) / ln n`.
    pub tail: f64,
    /// `Σ_{k=1}^{L-1} (Σ_{i<=k} b_i) (ln k - ln(k+1)) / ln n`.
    pub start: f64,
}

impl AbelTerms {
    pub fn residual(&self) -> f64 {
        self.lhs - (self.head + self.tail + self.start)
    }
}

pub fn abel_identity(b: &[f64], n: usize, split: usize) -> Result<AbelTerms> {
    let lhs = abel_weighted_limit(b, n)?;
    if split < 1 || split > n {
        return Err(Error::arg(format!("split {split} must lie in [1, {n}]")));
    }
    let ln_n = (n as f64).ln();
    let b = &b[..n];
    let total: f64 = b.iter().sum();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + b[i];
    }
    let dv = |k: usize| ((k as f64).ln() - ((k + 1) as f64).ln()) / ln_n;
    let tail = -(split..n).map(|k| (total - prefix[k]) * dv(k)).sum::<f64>();
    let start = (1..split).map(|k| prefix[k] * dv(k)).sum::<f64>();
    Ok(AbelTerms {
        lhs,
        head: total * (split as f64).ln() / ln_n,
        tail,
        start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zw::transition_distribution;

    fn sig(rows: &[i64]) -> Signature {
        Signature::new(rows.to_vec()).unwrap()
    }

    #[test]
    fn xi_examples() {
        let zero = Path::new(1, vec![sig(&[0]), sig(&[0, 0]), sig(&[0, 0, 0])]).unwrap();
        assert!(xi_indicators(&zero, 0).iter().all(|&x| x == 0));
        let p = Path::new(1, vec![sig(&[1]), sig(&[2, 0])]).unwrap();
        assert_eq!(xi_indicators(&p, 1), vec![0, 1]);
        assert_eq!(xi_indicators(&p, 0), vec![1, 0]);
        let tr = GrowthTrace::from_path(&p, 1);
        assert_eq!(tr.s, vec![0, 1]);
        assert_eq!(tr.tilde_s, vec![1, 1]);
        assert!(tr.envelope_violations().is_empty());
    }

    #[test]
    fn addition_bound_matches_enumeration() {
        let params = ZwParams::real(0.5, 0.3).unwrap();
        let cfg = SamplerConfig { eps_tail: 1e-6, ..SamplerConfig::default() };
        for rows in [vec![0], vec![2, 0], vec![3, 1, -1], vec![1, 1, 0], vec![4, 2, 2]] {
            let mu = sig(&rows);
            let law = transition_distribution(&mu, &params, &cfg).unwrap();
            for k in -2..=3 {
                let direct: f64 = law
                    .support
                    .iter()
                    .zip(&law.log_probs)
                    .filter(|(lam, _)| added_cell_with_content(Some(&mu), lam, k).is_some())
                    .map(|(_, lp)| lp.exp())
                    .sum();
                let p = conditional_add_probability(&mu, k, &params, 1e-10).unwrap();
                assert!((p - direct).abs() < 1e-5, "{rows:?} k={k}: {p} vs {direct}");
            }
        }
        // (2,0) cannot receive a content-1 cell: row 2 needs length 3 > mu_1
        assert_eq!(conditional_add_probability(&sig(&[2, 0]), 1, &params, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn scaled_probability_stays_bounded() {
        let params = ZwParams::real(0.5, 0.3).unwrap();
        let scaled: Vec<f64> = (2..=12)
            .map(|n| scaled_add_probability(&Signature::zero(n - 1), 2, &params, 1e-10).unwrap())
            .collect();
        assert!(scaled.iter().all(|&x| x < 5.0), "{scaled:?}");
        let given = conditional_add_probability_given_previous(&sig(&[0, 0]), 2, &params, 1e-10)
            .unwrap()
            .unwrap();
        assert!(given > 0.0 && given < 1.0);
    }

    #[test]
    fn envelope_marginals() {
        let e = bernoulli_envelope(2.0, 4).unwrap();
        assert_eq!(e.marginals().unwrap()[3], 0.5);
        let zero = bernoulli_envelope(0.0, 3).unwrap();
        assert_eq!(zero.prob(0), 1.0);
        assert_eq!(bernoulli_envelope(0.5, 1).unwrap().marginals().unwrap()[0], 0.5);
        assert!(bernoulli_envelope(-1.0, 2).is_err());
        let (m, _) = envelope_sum_moments(2.0, 4);
        assert!((m - (1.0 + 1.0 + 2.0 / 3.0 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn hook_conditions() {
        let ev = HookEvent::new(2, 2, 1, 0, 4).unwrap();
        // rows: lam_1 >= 2, lam_2 = 1, lam_{N-1} = 0, lam_N <= -1
        let p = Path::new(4, vec![sig(&[3, 1, 0, -1]), sig(&[3, 1, 0, 0, -1]), sig(&[4, 1, 1, 0, 0, -1])]).unwrap();
        let tr = thick_hook_event(&p, &ev).unwrap();
        assert_eq!(tr.holds, vec![true, true, true]);
        assert_eq!(tr.first_violation, None);
        let broken = Path::new(4, vec![sig(&[3, 2, 0, -2])]).unwrap();
        assert_eq!(ev.conditions(broken.at(4).unwrap()).unwrap(), [false, true, true, true]);
        assert_eq!(thick_hook_event(&broken, &ev).unwrap().first_violation, Some(4));
        assert!(HookEvent::new(2, 2, 2, 0, 3).is_err());
        assert!(thick_hook_event(&broken, &HookEvent::new(1, 1, 1, 0, 5).unwrap()).is_err());
    }

    #[test]
    fn escape_ratio_is_density_quotient() {
        let params = ZwParams::new(num_complex::Complex64::new(0.5, 0.4), num_complex::Complex64::new(0.3, -0.2)).unwrap();
        let lam = sig(&[3, 1, 1, 0, -2]);
        for i in [1, 2, 4, 5] {
            let mut rows = lam.rows().to_vec();
            rows[i - 1] += 1;
            let direct = (log_unnormalized_density(&sig(&rows), &params).unwrap()
                - log_unnormalized_density(&lam, &params).unwrap())
            .exp();
            let r = hook_escape_ratio(&lam, i, &params).unwrap();
            assert!((r / direct - 1.0).abs() < 1e-10);
        }
        assert!(hook_escape_ratio(&lam, 3, &params).is_err());
    }

    #[test]
    fn abel() {
        assert_eq!(abel_weighted_limit(&[0.0; 10], 10).unwrap(), 0.0);
        assert!(abel_weighted_limit(&[1.0], 1).is_err());
        let b: Vec<f64> = (0..100).map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0).collect();
        for split in [1, 10, 100] {
            let t = abel_identity(&b, 100, split).unwrap();
            assert!(t.residual().abs() < 1e-12, "{t:?}");
        }
    }

    #[test]
    fn box_enumeration() {
        assert_eq!(signatures_in_box(2, -1, 1).len(), 6);
        assert_eq!(signatures_in_box(3, 0, 1).len(), 4);
    }

    #[test]
    fn quantiles() {
        let q = Quantiles::of(&[3.0, 1.0, 2.0]);
        assert_eq!(q.median, 2.0);
        assert_eq!(q.mean, 2.0);
        assert!((q.q05 - 1.1).abs() < 1e-12);
        assert_eq!(geometric_checkpoints(10), vec![2, 4, 8, 10]);
        assert_eq!(geometric_checkpoints(1), Vec::<usize>::new());
    }
}
