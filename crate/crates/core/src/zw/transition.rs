//! One-step transition laws `p(lam | mu) = P_{N+1}(lam) / P_N(mu)`.
//!
//! For `mu` of level `N` the extensions `lam` range over a finite box of
//! middle rows `2..=N` and two unbounded rows. Writing `l_u = lam_u - u`,
//! the Weyl product splits as
//! `(l_1 - l_{N+1}) · P(l_1) · Q(l_{N+1}) · C(middle)`, where `P` and `Q` are
//! polynomials whose coefficients depend on the middle rows only. Shifting
//! the variables to `u = lam_1 - mu_1 + 1` and `v = mu_N - lam_{N+1} + 1`
//! makes all coefficients non-negative, so the two unbounded rows reduce to
//! a handful of certified one-dimensional moment sums and the law of
//! `(lam_1, lam_{N+1})` given the middle rows is a two-component mixture of
//! product measures.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{interlaces, Signature};
use crate::error::{Error, Result};

use super::density::{down_gamma_ratio, log_unnormalized_density, row_log_weight, up_gamma_ratio};
use super::ray::{certified_ray, sample_index, RaySpec, RaySum};
use super::ZwParams;

/// How [`sample_level`](super::sample_level) draws the next signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMode {
    ExactEnumeration,
    Gibbs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub eps_tail: f64,
    pub mode: SamplerMode,
    pub gibbs_sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Largest number of middle-row configurations or materialized support
    /// points before exact enumeration gives up.
    pub cell_budget: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            eps_tail: 1e-9,
            mode: SamplerMode::ExactEnumeration,
            gibbs_sweeps: 2,
            burn_in: 1,
            seed: 0,
            cell_budget: 2_000_000,
        }
    }
}

impl SamplerConfig {
    pub fn gibbs() -> Self {
        Self {
            mode: SamplerMode::Gibbs,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_tail > 0.0 && self.eps_tail < 1.0) {
            return Err(Error::arg(format!("eps_tail = {} must lie in (0, 1)", self.eps_tail)));
        }
        if self.gibbs_sweeps == 0 {
            return Err(Error::arg("gibbs_sweeps must be at least 1"));
        }
        if self.cell_budget == 0 {
            return Err(Error::arg("cell_budget must be positive"));
        }
        Ok(())
    }
}

/// A materialized transition law, mostly for inspection and small tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTransition {
    pub source: Signature,
    pub support: Vec<Signature>,
    pub log_probs: Vec<f64>,
    pub tail_mass_bound: f64,
}

impl LevelTransition {
    pub fn probability_of(&self, lam: &Signature) -> f64 {
        self.support
            .iter()
            .position(|s| s == lam)
            .map_or(0.0, |k| self.log_probs[k].exp())
    }
}

/// Optional extra bounds on single rows of the next signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowBound {
    /// 1-based row of the level-`N+1` signature.
    pub row: usize,
    pub min: Option<i64>,
    pub max: Option<i64>,
}

impl RowBound {
    pub fn at_least(row: usize, min: i64) -> Self {
        Self { row, min: Some(min), max: None }
    }

    pub fn at_most(row: usize, max: i64) -> Self {
        Self { row, min: None, max: Some(max) }
    }
}

fn poly_from_roots(shifts: impl Iterator<Item = f64>) -> Vec<f64> {
    // coefficients of Π (t + a_k), lowest degree first
    let mut c = vec![1.0];
    for a in shifts {
        c.push(0.0);
        for d in (1..c.len()).rev() {
            c[d] = c[d] * a + c[d - 1];
        }
        c[0] *= a;
    }
    c
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in xs {
        let t = (x - m).exp();
        let s = sum + t;
        comp += if sum >= t { (sum - s) + t } else { (t - s) + sum };
        sum = s;
    }
    m + (sum + comp).ln()
}

/// One middle-row configuration with its share of the mass.
#[derive(Debug, Clone)]
struct MiddleConfig {
    log_mass: f64,
    /// `ln` of everything except the top and bottom row weights.
    log_core: f64,
    p: Vec<f64>,
    q: Vec<f64>,
    t0: f64,
    t1: f64,
    b0: f64,
    b1: f64,
}

/// Structured transition sums for one source signature.
#[derive(Debug, Clone)]
pub struct TransitionSums {
    mu: Signature,
    middle_rows: Vec<i64>,
    configs: Vec<MiddleConfig>,
    top: RaySum,
    bottom: RaySum,
    d0: f64,
    log_total: f64,
    tail_bound: f64,
}

impl TransitionSums {
    /// Builds the sums for `mu`, restricted by `bounds` (none for the full law).
    pub fn new(mu: &Signature, params: &ZwParams, eps_tail: f64, cell_budget: usize, bounds: &[RowBound]) -> Result<Self> {
        if !(eps_tail > 0.0 && eps_tail < 1.0) {
            return Err(Error::arg(format!("eps_tail = {eps_tail} must lie in (0, 1)")));
        }
        let big_n = mu.level();
        let n = big_n + 1;
        let m = mu.rows();
        let mut lo: Vec<Option<i64>> = (1..=n).map(|r| if r <= big_n { Some(m[r - 1]) } else { None }).collect();
        let mut hi: Vec<Option<i64>> = (1..=n).map(|r| if r >= 2 { Some(m[r - 2]) } else { None }).collect();
        for b in bounds {
            if b.row == 0 || b.row > n {
                return Err(Error::arg(format!("bound on row {} outside level {n}", b.row)));
            }
            if let Some(v) = b.min {
                lo[b.row - 1] = Some(lo[b.row - 1].map_or(v, |x| x.max(v)));
            }
            if let Some(v) = b.max {
                hi[b.row - 1] = Some(hi[b.row - 1].map_or(v, |x| x.min(v)));
            }
        }
        let empty = (0..n).any(|r| matches!((lo[r], hi[r]), (Some(a), Some(b)) if a > b));
        let mu1 = m[0];
        let mun = m[big_n - 1];
        let d0 = (mu1 - mun + big_n as i64 - 2) as f64;
        let eps_ray = eps_tail / 2.0;
        let lead = n as f64;
        let scale = lead;
        let d0s = d0 / scale;

        let top_start = lo[0].expect("top row has a lower bound");
        let top = certified_ray(
            &RaySpec {
                start: top_start,
                dir: 1,
                limit: hi[0],
                anchor: mu1,
                log_start: row_log_weight(params, n, 1, top_start),
                ratio: |x| up_gamma_ratio(params, n, 1, x),
                max_power: big_n,
                lead,
            },
            eps_ray,
        )?;
        let bottom_start = hi[n - 1].expect("bottom row has an upper bound");
        let bottom = certified_ray(
            &RaySpec {
                start: bottom_start,
                dir: -1,
                limit: lo[n - 1],
                anchor: mun,
                log_start: row_log_weight(params, n, n, bottom_start),
                ratio: |y| down_gamma_ratio(params, n, n, y),
                max_power: big_n,
                lead,
            },
            eps_ray,
        )?;

        // log of Π_{u<v} (v - u) over the level-n signature
        let mut log_denominator = 0.0;
        for d in 1..n {
            log_denominator += (n - d) as f64 * (d as f64).ln();
        }

        let n_mid = n.saturating_sub(2);
        let windows: Vec<(i64, i64)> = (2..n).map(|r| (lo[r - 1].unwrap(), hi[r - 1].unwrap())).collect();
        let count: u128 = if empty {
            0
        } else {
            windows.iter().map(|&(a, b)| (b - a + 1) as u128).product()
        };
        if count > cell_budget as u128 {
            return Err(Error::Resource(format!(
                "{count} middle-row configurations exceed the cell budget {cell_budget}; use gibbs mode"
            )));
        }
        let gamma_tables: Vec<Vec<f64>> = windows
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| (a..=b).map(|x| row_log_weight(params, n, k + 2, x)).collect())
            .collect();

        let mut configs = Vec::with_capacity(count as usize);
        let mut middle_rows = Vec::with_capacity(count as usize * n_mid);
        if count > 0 {
            let mut cur: Vec<i64> = windows.iter().map(|&(a, _)| a).collect();
            loop {
                let mut log_core = -log_denominator;
                for (k, &x) in cur.iter().enumerate() {
                    log_core += gamma_tables[k][(x - windows[k].0) as usize];
                }
                // middle-middle Weyl factors
                let l: Vec<i64> = cur.iter().enumerate().map(|(k, &x)| x - (k as i64 + 2)).collect();
                let mut prod = 1.0;
                for u in 0..l.len() {
                    for v in u + 1..l.len() {
                        prod *= (l[u] - l[v]) as f64;
                        if prod > 1e250 {
                            log_core += prod.ln();
                            prod = 1.0;
                        }
                    }
                }
                log_core += prod.ln();
                // polynomials in v = u / scale; the powers of scale go into log_core
                let p = poly_from_roots(l.iter().map(|&lv| (mu1 - 2 - lv) as f64 / scale));
                let q = poly_from_roots(l.iter().map(|&lv| (lv - mun + big_n as i64) as f64 / scale));
                log_core += (2 * l.len() + 1) as f64 * scale.ln();
                let mut t0 = 0.0;
                let mut t1 = 0.0;
                for (e, &c) in p.iter().enumerate() {
                    t0 += c * top.moments[e];
                    t1 += c * (top.moments[e + 1] + d0s * top.moments[e]);
                }
                let mut b0 = 0.0;
                let mut b1 = 0.0;
                for (e, &c) in q.iter().enumerate() {
                    b0 += c * bottom.moments[e];
                    b1 += c * bottom.moments[e + 1];
                }
                let log_mass =
                    log_core + top.log_scale + bottom.log_scale + log_add(t1.ln() + b0.ln(), t0.ln() + b1.ln());
                configs.push(MiddleConfig { log_mass, log_core, p, q, t0, t1, b0, b1 });
                middle_rows.extend_from_slice(&cur);
                // odometer over the windows
                let mut k = 0;
                while k < cur.len() {
                    if cur[k] < windows[k].1 {
                        cur[k] += 1;
                        break;
                    }
                    cur[k] = windows[k].0;
                    k += 1;
                }
                if k == cur.len() {
                    break;
                }
            }
        }
        let log_total = log_sum_exp(&configs.iter().map(|c| c.log_mass).collect::<Vec<_>>());
        if !configs.is_empty() && !top.is_empty() && !bottom.is_empty() && !log_total.is_finite() {
            return Err(Error::Resource(format!(
                "exact transition sums leave floating-point range at level {big_n}; use gibbs mode"
            )));
        }
        let tail_bound = (1.0 + top.tail_bound) * (1.0 + bottom.tail_bound) - 1.0;
        Ok(Self {
            mu: mu.clone(),
            middle_rows,
            configs,
            top,
            bottom,
            d0,
            log_total,
            tail_bound,
        })
    }

    /// `ln Σ_{lam ≻ mu} exp(log_unnormalized_density(lam))` over the
    /// truncated support; `-inf` when the restricted support is empty.
    pub fn log_total(&self) -> f64 {
        self.log_total
    }

    /// Relative bound on the mass beyond the truncation.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn source(&self) -> &Signature {
        &self.mu
    }

    /// Upper ends of the truncated top and lower end of the bottom row.
    pub fn caps(&self) -> Option<(i64, i64)> {
        if self.top.is_empty() || self.bottom.is_empty() {
            return None;
        }
        Some((
            self.top.value_at(self.top.len() - 1),
            self.bottom.value_at(self.bottom.len() - 1),
        ))
    }

    pub fn support_size(&self) -> u128 {
        self.configs.len() as u128 * self.top.len() as u128 * self.bottom.len() as u128
    }

    fn middle(&self, c: usize) -> &[i64] {
        let n_mid = self.mu.level() - 1;
        &self.middle_rows[c * n_mid..(c + 1) * n_mid]
    }

    /// Draws from the truncated law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Signature> {
        if self.configs.is_empty() {
            return Err(Error::domain("transition support is empty"));
        }
        let target: f64 = rng.gen::<f64>();
        let mut acc = 0.0;
        let mut chosen = self.configs.len() - 1;
        for (k, c) in self.configs.iter().enumerate() {
            acc += (c.log_mass - self.log_total).exp();
            if acc > target {
                chosen = k;
                break;
            }
        }
        let c = &self.configs[chosen];
        // share of the t1·b0 component, formed without overflowing products
        let first_share = 1.0 / (1.0 + (c.t0.ln() + c.b1.ln() - c.t1.ln() - c.b0.ln()).exp());
        let use_first = rng.gen::<f64>() < first_share;
        let d0 = self.d0 / self.top.u_scale;
        let (top_total, bottom_total) = if use_first { (c.t1, c.b0) } else { (c.t0, c.b1) };
        let mt = sample_index(
            &self.top.weights,
            top_total,
            |m| {
                let u = self.top.v_at(m);
                horner(&c.p, u) * if use_first { u + d0 } else { 1.0 }
            },
            rng.gen(),
        );
        let mb = sample_index(
            &self.bottom.weights,
            bottom_total,
            |m| {
                let v = self.bottom.v_at(m);
                horner(&c.q, v) * if use_first { 1.0 } else { v }
            },
            rng.gen(),
        );
        let mut rows = Vec::with_capacity(self.mu.level() + 1);
        rows.push(self.top.value_at(mt));
        rows.extend_from_slice(self.middle(chosen));
        rows.push(self.bottom.value_at(mb));
        Ok(Signature::from_rows_unchecked(rows))
    }

    /// Lists the whole truncated support with log-probabilities.
    pub fn materialize(&self, cell_budget: usize) -> Result<LevelTransition> {
        let size = self.support_size();
        if size > cell_budget as u128 {
            return Err(Error::Resource(format!(
                "{size} support points exceed the cell budget {cell_budget}; use gibbs mode"
            )));
        }
        let mut support = Vec::with_capacity(size as usize);
        let mut log_probs = Vec::with_capacity(size as usize);
        for (ci, c) in self.configs.iter().enumerate() {
            for mt in 0..self.top.len() {
                let u = self.top.v_at(mt);
                let pu = horner(&c.p, u);
                let lt = self.top.weights[mt].ln() + self.top.log_scale;
                for mb in 0..self.bottom.len() {
                    let v = self.bottom.v_at(mb);
                    let w = pu * horner(&c.q, v) * (u + v + self.d0 / self.top.u_scale);
                    let lb = self.bottom.weights[mb].ln() + self.bottom.log_scale;
                    let mut rows = Vec::with_capacity(self.mu.level() + 1);
                    rows.push(self.top.value_at(mt));
                    rows.extend_from_slice(self.middle(ci));
                    rows.push(self.bottom.value_at(mb));
                    support.push(Signature::from_rows_unchecked(rows));
                    log_probs.push(c.log_core + lt + lb + w.ln() - self.log_total);
                }
            }
        }
        Ok(LevelTransition {
            source: self.mu.clone(),
            support,
            log_probs,
            tail_mass_bound: self.tail_bound,
        })
    }
}

/// The transition law from `mu`, materialized over the certified support.
pub fn transition_distribution(mu: &Signature, params: &ZwParams, cfg: &SamplerConfig) -> Result<LevelTransition> {
    cfg.validate()?;
    TransitionSums::new(mu, params, cfg.eps_tail, cfg.cell_budget, &[])?.materialize(cfg.cell_budget)
}

/// `ln Σ_{lam ≻ mu} exp(log_unnormalized_density(lam))`, truncated.
pub fn log_transition_total(mu: &Signature, params: &ZwParams, eps_tail: f64) -> Result<f64> {
    Ok(TransitionSums::new(mu, params, eps_tail, usize::MAX, &[])?.log_total())
}

/// `ln (S_{N+1} / S_N)`, measured at the zero signature of level `N`
/// where the source density is a pure gamma product.
pub fn log_level_constant(level: usize, params: &ZwParams, eps_tail: f64) -> Result<f64> {
    if level == 0 {
        return Err(Error::arg("level must be positive"));
    }
    let zero = Signature::zero(level);
    Ok(log_transition_total(&zero, params, eps_tail)? - log_unnormalized_density(&zero, params)?)
}

/// `|Σ_{lam ≻ mu} p(lam | mu) - 1|` with `p` normalized by the level
/// constant rather than by the sum itself, so the value measures how far
/// the weights are from a coherent system.
pub fn coherency_residual(mu: &Signature, params: &ZwParams, eps_tail: f64) -> Result<f64> {
    let log_k = log_level_constant(mu.level(), params, eps_tail)?;
    let total = log_transition_total(mu, params, eps_tail)?;
    Ok(((total - log_unnormalized_density(mu, params)? - log_k).exp() - 1.0).abs())
}

/// `ln p(lam | mu)` normalized over the truncated support of `mu`.
pub fn log_transition_probability(mu: &Signature, lam: &Signature, params: &ZwParams, eps_tail: f64) -> Result<f64> {
    if !interlaces(mu, lam)? {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(log_unnormalized_density(lam, params)? - log_transition_total(mu, params, eps_tail)?)
}

/// Probability under `p(. | mu)` that every bound in `bounds` holds.
pub fn event_probability(mu: &Signature, params: &ZwParams, eps_tail: f64, bounds: &[RowBound]) -> Result<f64> {
    let full = log_transition_total(mu, params, eps_tail)?;
    let part = TransitionSums::new(mu, params, eps_tail, usize::MAX, bounds)?.log_total();
    Ok((part - full).exp().min(1.0))
}

/// `ln (S_{N+1} / S_N)` in closed form,
/// `Γ(2Re(z+w) + N + 1) / (N! |Γ(z + w + N + 1)|² |Γ(z + w̄ + N + 1)|²)`.
/// At `N = 1` this is Dougall's bilateral sum; for all levels it agrees with
/// the certified sum [`log_level_constant`].
pub fn log_level_constant_closed(level: usize, params: &ZwParams) -> f64 {
    let n = level as f64;
    let (z, w) = (params.z(), params.w());
    let two_r = 2.0 * params.re_sum();
    // arguments have positive real part, so no poles
    crate::special::log_abs_gamma_sq_unchecked(num_complex::Complex64::new(two_r + n + 1.0, 0.0)) / 2.0
        - crate::special::log_abs_gamma_sq_unchecked(num_complex::Complex64::new(n + 1.0, 0.0)) / 2.0
        - crate::special::log_abs_gamma_sq_unchecked(z + w + n + 1.0)
        - crate::special::log_abs_gamma_sq_unchecked(z + w.conj() + n + 1.0)
}
