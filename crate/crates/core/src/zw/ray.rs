//! Summation of one-row weights along a half-line with a certified tail.
//!
//! Row weights decay only polynomially, `t(x+1)/t(x) ≈ 1 - α/x`, so a
//! geometric bound never applies. We use the Raabe-type estimate: if
//! `(y - s)(1 - r(y)) >= q > 1` for every `y >= X` then
//! `Σ_{y > X} t(y) <= t(X) (X - s) / (q - 1)`. The condition is checked on a
//! doubling grid reaching far past `X`.

use crate::error::{Error, Result};

/// Hard cap on the number of values a single ray may visit.
pub const MAX_RAY_LEN: usize = 50_000_000;

/// Weights `t(x)` for `x = start, start + dir, ...` relative to `t(start)`,
/// together with the moments `Σ t(x) v(x)^e`, `v(x) = (|x - anchor| + 1) / u_scale`.
#[derive(Debug, Clone)]
pub struct RaySum {
    pub start: i64,
    pub dir: i64,
    pub anchor: i64,
    /// `weights[m]` belongs to `start + dir * m`; scaled by `exp(-log_scale)`.
    pub weights: Vec<f64>,
    pub log_scale: f64,
    pub moments: Vec<f64>,
    /// Unit of `u` in the moments, so high powers stay in range.
    pub u_scale: f64,
    /// Upper bound on `tail_e / moment_e`, maximized over `e`.
    pub tail_bound: f64,
}

impl RaySum {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn value_at(&self, m: usize) -> i64 {
        self.start + self.dir * m as i64
    }

    /// `u(x)` of the `m`-th visited value.
    pub fn u_at(&self, m: usize) -> f64 {
        ((self.value_at(m) - self.anchor).abs() + 1) as f64
    }

    /// `u(x) / u_scale` of the `m`-th visited value.
    pub fn v_at(&self, m: usize) -> f64 {
        self.u_at(m) / self.u_scale
    }

    /// `ln Σ t(x) u(x)^e` in absolute terms.
    pub fn log_moment(&self, e: usize) -> f64 {
        self.moments[e].ln() + self.log_scale + e as f64 * self.u_scale.ln()
    }
}

/// Parameters of a ray walk.
pub struct RaySpec<F: Fn(i64) -> f64> {
    pub start: i64,
    pub dir: i64,
    /// Last admissible value (inclusive) in the walking direction.
    pub limit: Option<i64>,
    pub anchor: i64,
    /// `ln t(start)`.
    pub log_start: f64,
    /// `t(x + dir) / t(x)`.
    pub ratio: F,
    pub max_power: usize,
    /// Offset of the Raabe reference point behind `start`; also the unit
    /// of `u` in the moments.
    pub lead: f64,
}

const CHECK_GRID: usize = 62;

fn tail_estimate<F: Fn(i64) -> f64>(spec: &RaySpec<F>, x: i64, e: usize, s: f64) -> Option<f64> {
    // minimal Raabe quotient over a doubling grid starting at x
    let dist0 = (x - spec.start).abs() as f64 + spec.lead;
    let mut q_low = f64::INFINITY;
    for j in 0..CHECK_GRID {
        let off = ((1u64 << j.min(52)) as f64 - 1.0) * dist0;
        if off > 1e15 {
            break;
        }
        let y = x + spec.dir * off as i64;
        if let Some(lim) = spec.limit {
            if (y - lim) * spec.dir > 0 {
                break;
            }
        }
        let u = ((y - spec.anchor).abs() + 1) as f64;
        let r = (spec.ratio)(y) * ((u + 1.0) / u).powi(e as i32);
        let t = (y - spec.start).abs() as f64 + s;
        q_low = q_low.min(t * (1.0 - r));
    }
    if q_low > 1.0 {
        Some(dist0 / (q_low - 1.0))
    } else {
        None
    }
}

/// Walks the ray until every moment's remaining tail is certified below
/// `eps` relative to the accumulated moment, or the limit is reached.
pub fn certified_ray<F: Fn(i64) -> f64>(spec: &RaySpec<F>, eps: f64) -> Result<RaySum> {
    let n_pow = spec.max_power + 1;
    let u_scale = spec.lead.max(1.0);
    if let Some(lim) = spec.limit {
        if (lim - spec.start) * spec.dir < 0 {
            return Ok(RaySum {
                start: spec.start,
                dir: spec.dir,
                anchor: spec.anchor,
                weights: Vec::new(),
                log_scale: 0.0,
                moments: vec![0.0; n_pow],
                u_scale,
                tail_bound: 0.0,
            });
        }
    }
    let mut weights = Vec::new();
    let mut moments = vec![0.0; n_pow];
    let mut log_scale = spec.log_start;
    let mut w = 1.0f64;
    let mut x = spec.start;
    let mut next_check = 8usize;
    loop {
        weights.push(w);
        let u = ((x - spec.anchor).abs() + 1) as f64 / u_scale;
        let mut p = w;
        for m in moments.iter_mut() {
            *m += p;
            p *= u;
        }
        if let Some(lim) = spec.limit {
            if x == lim {
                return Ok(RaySum {
                    start: spec.start,
                    dir: spec.dir,
                    anchor: spec.anchor,
                    weights,
                    log_scale,
                    moments,
                    u_scale,
                    tail_bound: 0.0,
                });
            }
        }
        if weights.len() >= next_check {
            next_check = next_check + next_check / 4 + 1;
            let mut worst = 0.0f64;
            let mut ok = true;
            let mut pu = w;
            for (e, m) in moments.iter().enumerate() {
                // powers that underflowed to zero carry no mass worth certifying
                if *m == 0.0 {
                    pu *= u;
                    continue;
                }
                match tail_estimate(spec, x, e, spec.lead) {
                    Some(factor) => worst = worst.max(pu * factor / m),
                    None => {
                        ok = false;
                        break;
                    }
                }
                pu *= u;
            }
            if ok && worst <= eps {
                return Ok(RaySum {
                    start: spec.start,
                    dir: spec.dir,
                    anchor: spec.anchor,
                    weights,
                    log_scale,
                    moments,
                    u_scale,
                    tail_bound: worst,
                });
            }
        }
        if weights.len() >= MAX_RAY_LEN {
            return Err(Error::Resource(format!(
                "row tail from {} not certified within {MAX_RAY_LEN} values",
                spec.start
            )));
        }
        w *= (spec.ratio)(x);
        x += spec.dir;
        if !(1e-280..=1e280).contains(&w) {
            if w == 0.0 || !w.is_finite() {
                return Err(Error::domain(format!("row weight degenerated at {x}")));
            }
            let scale = w;
            log_scale += scale.ln();
            for v in weights.iter_mut() {
                *v /= scale;
            }
            for m in moments.iter_mut() {
                *m /= scale;
            }
            w = 1.0;
        }
    }
}

/// Draws an index `m` with probability proportional to `weights[m] * f(m)`,
/// given the total of those products.
pub fn sample_index(weights: &[f64], total: f64, f: impl Fn(usize) -> f64, uniform: f64) -> usize {
    let target = uniform * total;
    let mut acc = 0.0;
    for (m, &w) in weights.iter().enumerate() {
        acc += w * f(m);
        if acc > target {
            return m;
        }
    }
    // rounding at the very end of the list
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}
