//! Unnormalized zw-densities and the one-row step ratios used by samplers.

use num_complex::Complex64;

use crate::combinatorics::{log_weyl_dimension, Signature};
use crate::error::Result;
use crate::special::{log_abs_gamma_sq, log_abs_gamma_sq_unchecked};

use super::ZwParams;

/// `-ln|Γ(z - x + i)|² - ln|Γ(w + n + 1 + x - i)|²` for row `i` (1-based) of a
/// level-`n` signature holding the value `x`.
pub fn row_log_weight(params: &ZwParams, n: usize, i: usize, x: i64) -> f64 {
    let shift = x - i as i64;
    let a = params.z() - shift as f64;
    let b = params.w() + (n as i64 + 1 + shift) as f64;
    -log_abs_gamma_sq_unchecked(a) - log_abs_gamma_sq_unchecked(b)
}

/// `ln P_N(lam) + ln S_N`: the gamma factors times the Weyl dimension.
pub fn log_unnormalized_density(lam: &Signature, params: &ZwParams) -> Result<f64> {
    let n = lam.level();
    let mut acc = 0.0;
    for (r, &x) in lam.rows().iter().enumerate() {
        let shift = x - (r as i64 + 1);
        acc -= log_abs_gamma_sq(params.z() - shift as f64)?;
        acc -= log_abs_gamma_sq(params.w() + (n as i64 + 1 + shift) as f64)?;
    }
    Ok(acc + log_weyl_dimension(lam))
}

fn norm_sqr(c: Complex64) -> f64 {
    c.re * c.re + c.im * c.im
}

/// Gamma part of `W(x + 1) / W(x)` for row `i` at level `n`.
pub fn up_gamma_ratio(params: &ZwParams, n: usize, i: usize, x: i64) -> f64 {
    let shift = (x - i as i64) as f64;
    norm_sqr(params.z() - shift - 1.0) / norm_sqr(params.w() + (n as f64 + 1.0 + shift))
}

/// Gamma part of `W(x - 1) / W(x)` for row `i` at level `n`.
pub fn down_gamma_ratio(params: &ZwParams, n: usize, i: usize, x: i64) -> f64 {
    let shift = (x - i as i64) as f64;
    norm_sqr(params.w() + (n as f64 + shift)) / norm_sqr(params.z() - shift)
}

/// A maximal run of consecutive rows `start..=end` (1-based) sharing `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Run {
    start: usize,
    end: usize,
    value: i64,
}

/// Run-length view of a signature's rows. The Weyl product over a run of
/// equal rows telescopes, so the dimension change caused by moving a single
/// row costs one factor per run instead of one per row.
#[derive(Debug, Clone)]
pub struct RowRuns {
    runs: Vec<Run>,
}

impl RowRuns {
    pub fn new(rows: &[i64]) -> Self {
        let mut runs: Vec<Run> = Vec::new();
        for (r, &x) in rows.iter().enumerate() {
            match runs.last_mut() {
                Some(run) if run.value == x => run.end = r + 1,
                _ => runs.push(Run { start: r + 1, end: r + 1, value: x }),
            }
        }
        Self { runs }
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    fn locate(&self, i: usize) -> usize {
        self.runs.partition_point(|r| r.end < i)
    }

    /// Current value of row `i`.
    pub fn value(&self, i: usize) -> i64 {
        self.runs[self.locate(i)].value
    }

    /// Sets row `i` to `x`, splitting and merging runs locally.
    pub fn set(&mut self, i: usize, x: i64) {
        let k = self.locate(i);
        let run = self.runs[k];
        if run.value == x {
            return;
        }
        let mut pieces = Vec::with_capacity(3);
        if run.start < i {
            pieces.push(Run { start: run.start, end: i - 1, value: run.value });
        }
        pieces.push(Run { start: i, end: i, value: x });
        if i < run.end {
            pieces.push(Run { start: i + 1, end: run.end, value: run.value });
        }
        self.runs.splice(k..=k, pieces);
        // merge the single-row run with equal neighbours
        let mut k = self.locate(i);
        if k + 1 < self.runs.len() && self.runs[k + 1].value == x {
            self.runs[k].end = self.runs[k + 1].end;
            self.runs.remove(k + 1);
        }
        if k > 0 && self.runs[k - 1].value == x {
            self.runs[k - 1].end = self.runs[k].end;
            self.runs.remove(k);
            k -= 1;
        }
        debug_assert_eq!(self.runs[k].value, x);
    }

    pub fn to_rows(&self) -> Vec<i64> {
        let mut rows = Vec::new();
        for r in &self.runs {
            rows.extend(std::iter::repeat(r.value).take(r.end - r.start + 1));
        }
        rows
    }

    /// Calls `f(a, b, c)` for every maximal block `a..=b` of rows other than
    /// `i` holding the common value `c`.
    fn for_each_other_block(&self, i: usize, mut f: impl FnMut(i64, i64, i64)) {
        for r in &self.runs {
            if r.start <= i && i <= r.end {
                if r.start < i {
                    f(r.start as i64, i as i64 - 1, r.value);
                }
                if i < r.end {
                    f(i as i64 + 1, r.end as i64, r.value);
                }
            } else {
                f(r.start as i64, r.end as i64, r.value);
            }
        }
    }

    /// `Dim(.., lam_i = x + 1, ..) / Dim(.., lam_i = x, ..)` with all other
    /// rows as stored.
    pub fn dim_up_ratio(&self, i: usize, x: i64) -> f64 {
        let mut acc = 1.0;
        self.for_each_other_block(i, |a, b, c| {
            let y = x - i as i64 - c;
            acc *= (y + b + 1) as f64 / (y + a) as f64;
        });
        acc
    }

    /// `Dim(.., lam_i = x - 1, ..) / Dim(.., lam_i = x, ..)`.
    pub fn dim_down_ratio(&self, i: usize, x: i64) -> f64 {
        let mut acc = 1.0;
        self.for_each_other_block(i, |a, b, c| {
            let y = x - i as i64 - c;
            acc *= (y + a - 1) as f64 / (y + b) as f64;
        });
        acc
    }
}
