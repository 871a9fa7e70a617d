//! Drawing paths of the zw Markov chain.

use rand::Rng;

use crate::combinatorics::{Path, Signature};
use crate::error::{Error, Result};
use crate::rng::level_rng;

use super::density::{down_gamma_ratio, row_log_weight, up_gamma_ratio, RowRuns};
use super::ray::{certified_ray, sample_index, RaySpec, RaySum};
use super::transition::{SamplerConfig, SamplerMode, TransitionSums};
use super::ZwParams;

/// Draws `tau(N+1)` given `tau(N) = mu`.
pub fn sample_level<R: Rng + ?Sized>(mu: &Signature, params: &ZwParams, cfg: &SamplerConfig, rng: &mut R) -> Result<Signature> {
    match cfg.mode {
        SamplerMode::ExactEnumeration => {
            TransitionSums::new(mu, params, cfg.eps_tail, cfg.cell_budget, &[])?.sample(rng)
        }
        SamplerMode::Gibbs => gibbs_level(mu, params, cfg, rng),
    }
}

fn draw_from_ray<R: Rng + ?Sized>(ray: &RaySum, rng: &mut R) -> i64 {
    let m = sample_index(&ray.weights, ray.moments[0], |_| 1.0, rng.gen());
    ray.value_at(m)
}

/// Systematic-sweep heat bath over the rows of the next signature. Each
/// row is redrawn from its exact conditional law given the other rows; the
/// unbounded first and last rows are truncated with a certified tail.
fn gibbs_level<R: Rng + ?Sized>(mu: &Signature, params: &ZwParams, cfg: &SamplerConfig, rng: &mut R) -> Result<Signature> {
    cfg.validate()?;
    let big_n = mu.level();
    let n = big_n + 1;
    let m = mu.rows();
    let mut init = m.to_vec();
    init.push(m[big_n - 1]);
    let mut runs = RowRuns::new(&init);
    let free: Vec<usize> = (1..=n).filter(|&i| i == 1 || i == n || m[i - 2] > m[i - 1]).collect();
    let lead = n as f64;
    let mut logw = Vec::new();
    for _ in 0..cfg.burn_in + cfg.gibbs_sweeps {
        for &i in &free {
            let x = if i == 1 {
                let ray = certified_ray(
                    &RaySpec {
                        start: m[0],
                        dir: 1,
                        limit: None,
                        anchor: m[0],
                        log_start: 0.0,
                        ratio: |x| up_gamma_ratio(params, n, 1, x) * runs.dim_up_ratio(1, x),
                        max_power: 0,
                        lead,
                    },
                    cfg.eps_tail,
                )?;
                draw_from_ray(&ray, rng)
            } else if i == n {
                let ray = certified_ray(
                    &RaySpec {
                        start: m[big_n - 1],
                        dir: -1,
                        limit: None,
                        anchor: m[big_n - 1],
                        log_start: 0.0,
                        ratio: |y| down_gamma_ratio(params, n, n, y) * runs.dim_down_ratio(n, y),
                        max_power: 0,
                        lead,
                    },
                    cfg.eps_tail,
                )?;
                draw_from_ray(&ray, rng)
            } else {
                let (lo, hi) = (m[i - 1], m[i - 2]);
                logw.clear();
                let mut acc = 0.0;
                logw.push(acc);
                for x in lo..hi {
                    acc += (up_gamma_ratio(params, n, i, x) * runs.dim_up_ratio(i, x)).ln();
                    logw.push(acc);
                }
                let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let weights: Vec<f64> = logw.iter().map(|&l| (l - top).exp()).collect();
                let total: f64 = weights.iter().sum();
                lo + sample_index(&weights, total, |_| 1.0, rng.gen()) as i64
            };
            runs.set(i, x);
        }
    }
    Signature::new(runs.to_rows())
}

/// The zw chain with its level-one law precomputed.
#[derive(Debug, Clone)]
pub struct ZwChain {
    params: ZwParams,
    cfg: SamplerConfig,
    up: RaySum,
    down: RaySum,
    p_up: f64,
}

impl ZwChain {
    pub fn new(params: ZwParams, cfg: SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let eps = cfg.eps_tail / 2.0;
        let up = certified_ray(
            &RaySpec {
                start: 0,
                dir: 1,
                limit: None,
                anchor: 0,
                log_start: row_log_weight(&params, 1, 1, 0),
                ratio: |x| up_gamma_ratio(&params, 1, 1, x),
                max_power: 0,
                lead: 1.0,
            },
            eps,
        )?;
        let down = certified_ray(
            &RaySpec {
                start: -1,
                dir: -1,
                limit: None,
                anchor: -1,
                log_start: row_log_weight(&params, 1, 1, -1),
                ratio: |x| down_gamma_ratio(&params, 1, 1, x),
                max_power: 0,
                lead: 1.0,
            },
            eps,
        )?;
        let lu = up.log_moment(0);
        let ld = down.log_moment(0);
        let p_up = 1.0 / (1.0 + (ld - lu).exp());
        Ok(Self { params, cfg, up, down, p_up })
    }

    pub fn params(&self) -> &ZwParams {
        &self.params
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    /// `ln Σ_x exp(log_unnormalized_density((x)))`, i.e. `ln S_1` up to the
    /// certified truncation.
    pub fn log_level_one_total(&self) -> f64 {
        let lu = self.up.log_moment(0);
        let ld = self.down.log_moment(0);
        let m = lu.max(ld);
        m + ((lu - m).exp() + (ld - m).exp()).ln()
    }

    /// `P(tau_1(1) >= x0)` under the level-one law.
    pub fn level_one_at_least(&self, x0: i64) -> f64 {
        let part = |ray: &RaySum| -> f64 {
            let s: f64 = (0..ray.len()).filter(|&m| ray.value_at(m) >= x0).map(|m| ray.weights[m]).sum();
            s * (ray.log_scale - self.log_level_one_total()).exp()
        };
        (part(&self.up) + part(&self.down)).min(1.0)
    }

    /// Draws `tau(1)` from the level-one law.
    pub fn sample_first<R: Rng + ?Sized>(&self, rng: &mut R) -> Signature {
        let ray = if rng.gen::<f64>() < self.p_up { &self.up } else { &self.down };
        Signature::from_rows_unchecked(vec![draw_from_ray(ray, rng)])
    }

    pub fn step<R: Rng + ?Sized>(&self, mu: &Signature, rng: &mut R) -> Result<Signature> {
        sample_level(mu, &self.params, &self.cfg, rng)
    }

    /// A path through levels `1..=n_levels` drawn from a single generator.
    pub fn sample_path<R: Rng + ?Sized>(&self, n_levels: usize, rng: &mut R) -> Result<Path> {
        if n_levels == 0 {
            return Err(Error::arg("n_levels must be positive"));
        }
        let mut sigs = Vec::with_capacity(n_levels);
        sigs.push(self.sample_first(rng));
        for _ in 1..n_levels {
            let next = self.step(sigs.last().unwrap(), rng)?;
            sigs.push(next);
        }
        Ok(Path::from_parts_unchecked(1, sigs))
    }

    /// A path whose level `L` is drawn from the stream `(seed, path_index, L)`.
    pub fn sample_path_keyed(&self, n_levels: usize, seed: u64, path_index: u64) -> Result<Path> {
        self.sample_path_keyed_with(n_levels, seed, path_index, |_, _| {})
    }

    /// Like [`sample_path_keyed`](Self::sample_path_keyed) but reports each
    /// new signature to `visit(level, sig)` as it is drawn.
    pub fn sample_path_keyed_with(
        &self,
        n_levels: usize,
        seed: u64,
        path_index: u64,
        mut visit: impl FnMut(usize, &Signature),
    ) -> Result<Path> {
        if n_levels == 0 {
            return Err(Error::arg("n_levels must be positive"));
        }
        let mut sigs = Vec::with_capacity(n_levels);
        let first = self.sample_first(&mut level_rng(seed, path_index, 1));
        visit(1, &first);
        sigs.push(first);
        for level in 2..=n_levels {
            let next = self.step(sigs.last().unwrap(), &mut level_rng(seed, path_index, level))?;
            visit(level, &next);
            sigs.push(next);
        }
        Ok(Path::from_parts_unchecked(1, sigs))
    }
}

/// Convenience wrapper building a [`ZwChain`] for a single path.
pub fn sample_path<R: Rng + ?Sized>(n_levels: usize, params: &ZwParams, cfg: &SamplerConfig, rng: &mut R) -> Result<Path> {
    ZwChain::new(*params, cfg.clone())?.sample_path(n_levels, rng)
}
