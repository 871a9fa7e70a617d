//! Odds of pushing one row past a content-`k` box, and their tail bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::Signature;
use crate::error::{Error, Result};
use crate::special::{gauss_2f1_at_one, log_pochhammer};

use super::density::{up_gamma_ratio, RowRuns};
use super::ray::{certified_ray, RaySpec};
use super::ZwParams;

fn check_geometry(mu: &Signature, rows: &[i64], i: usize, j: i64, m: u64) -> Result<()> {
    let big_n = mu.level();
    if rows.len() != big_n + 1 {
        return Err(Error::arg(format!(
            "completion has {} rows, expected {}",
            rows.len(),
            big_n + 1
        )));
    }
    if i == 0 || i > big_n + 1 {
        return Err(Error::arg(format!("row {i} outside level {}", big_n + 1)));
    }
    if j < 1 {
        return Err(Error::arg(format!("column {j} is not positive")));
    }
    let mr = mu.rows();
    let x0 = j - 1;
    if i <= big_n && mr[i - 1] > x0 {
        return Err(Error::arg(format!("box ({i},{j}) already lies in mu")));
    }
    if i >= 2 && x0 + m as i64 > mr[i - 2] {
        return Err(Error::arg(format!(
            "row {i} cannot reach {} under mu_{} = {}",
            x0 + m as i64,
            i - 1,
            mr[i - 2]
        )));
    }
    for (r0, &x) in rows.iter().enumerate() {
        let r = r0 + 1;
        if r == i {
            continue;
        }
        let lo_ok = r > big_n || x >= mr[r - 1];
        let hi_ok = r == 1 || x <= mr[r - 2];
        if !(lo_ok && hi_ok) {
            return Err(Error::arg(format!("row {r} = {x} does not interlace with mu")));
        }
    }
    Ok(())
}

/// Ratio of `p(lam_i = j - 1 + m | mu, other rows)` to
/// `p(lam_i = j - 1 | mu, other rows)` in closed form: a Pochhammer quotient
/// times two telescoped Weyl products. `rows` is the level-`N+1` completion;
/// its `i`-th entry is ignored.
pub fn p_m_ratio(mu: &Signature, rows: &[i64], i: usize, j: i64, m: u64, params: &ZwParams) -> Result<f64> {
    check_geometry(mu, rows, i, j, m)?;
    if m == 0 {
        return Ok(1.0);
    }
    let big_n = mu.level() as f64;
    let k = (j - i as i64) as f64;
    let mf = m as f64;
    let num = log_pochhammer(params.z() - k + 1.0 - mf, m)?;
    let den = log_pochhammer(params.w() + big_n + 1.0 + k, m)?;
    let mut log_p = 2.0 * (num.re - den.re);
    let km1 = k - 1.0;
    let mut prod = 1.0;
    for (a0, &la) in rows.iter().enumerate() {
        let a = a0 + 1;
        let sa = (la - a as i64) as f64;
        if a < i {
            prod *= (sa - (km1 + mf)) / (sa - km1);
        } else if a > i {
            prod *= ((km1 + mf) - sa) / (km1 - sa);
        }
    }
    log_p += prod.ln();
    Ok(log_p.exp())
}

/// `Σ_{m >= 1} p_m` summed along the row with a certified tail.
pub fn p_m_tail_sum(mu: &Signature, rows: &[i64], i: usize, j: i64, params: &ZwParams, eps: f64) -> Result<f64> {
    check_geometry(mu, rows, i, j, 0)?;
    let n = mu.level() + 1;
    let mut fixed = rows.to_vec();
    fixed[i - 1] = j - 1;
    let runs = RowRuns::new(&fixed);
    let limit = if i >= 2 { Some(mu.rows()[i - 2]) } else { None };
    let ray = certified_ray(
        &RaySpec {
            start: j - 1,
            dir: 1,
            limit,
            anchor: j - 1,
            log_start: 0.0,
            ratio: |x| up_gamma_ratio(params, n, i, x) * runs.dim_up_ratio(i, x),
            max_power: 0,
            lead: n as f64,
        },
        eps,
    )?;
    Ok(ray.moments[0] - 1.0)
}

/// The hypergeometric bound on `Σ_{m>=1} p_m` for a content-`k` box at
/// level `N`: `A² / R · F(A+1, A+1; R+1; 1)` with `A = |Re(k - z)| + |Im z|`
/// and `R = Re(w + N + 1 + k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmBound {
    pub prefactor: f64,
    pub a: f64,
    pub c: f64,
    pub hypergeometric: f64,
    pub bound: f64,
}

pub fn p_m_tail_bound(params: &ZwParams, k: i64, level: usize) -> Result<PmBound> {
    let kf = k as f64;
    if (params.w() + kf).re <= 0.0 {
        return Err(Error::domain(format!("Re(k + w) = {} is not positive", (params.w() + kf).re)));
    }
    let a0 = (kf - params.z().re).abs() + params.z().im.abs();
    let r = (params.w() + level as f64 + 1.0 + kf).re;
    let a = a0 + 1.0;
    let c = r + 1.0;
    if c - 2.0 * a <= 0.0 {
        return Err(Error::domain(format!(
            "level {level} too small: the bounding series diverges (c - 2a = {})",
            c - 2.0 * a
        )));
    }
    let f = gauss_2f1_at_one(Complex64::new(a, 0.0), Complex64::new(a, 0.0), Complex64::new(c, 0.0))?.re;
    let prefactor = a0 * a0 / r;
    Ok(PmBound {
        prefactor,
        a,
        c,
        hypergeometric: f,
        bound: prefactor * f,
    })
}
