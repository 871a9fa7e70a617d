//! Exact combinatorics of the Gelfand-Tsetlin graph.
//!
//! A vertex of level `N` is a [`Signature`], a non-increasing vector of `N`
//! integers. Two signatures on consecutive levels are joined by an edge when
//! they interlace. Dimensions are computed with the Weyl product formula and
//! cross-checked against a path-counting dynamic program.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest level for which [`weyl_dimension`] returns an exact integer.
/// Deeper levels use [`log_weyl_dimension`] only.
pub const EXACT_DIMENSION_MAX_LEVEL: usize = 60;

/// A vertex of the Gelfand-Tsetlin graph: `rows[0] >= rows[1] >= ... >= rows[N-1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Signature {
    rows: Vec<i64>,
}

impl Signature {
    pub fn new(rows: Vec<i64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::arg("a signature needs at least one row"));
        }
        if let Some(w) = rows.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::arg(format!(
                "rows must be non-increasing, found {} < {} at rows {} and {}",
                rows[w],
                rows[w + 1],
                w + 1,
                w + 2
            )));
        }
        Ok(Self { rows })
    }

    /// The all-zero signature of the given level.
    pub fn zero(level: usize) -> Self {
        assert!(level >= 1, "level must be positive");
        Self { rows: vec![0; level] }
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<i64>) -> Self {
        debug_assert!(!rows.is_empty() && rows.windows(2).all(|w| w[0] >= w[1]));
        Self { rows }
    }

    pub fn level(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[i64] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<i64> {
        self.rows
    }

    /// Row `i`, 1-based as in the usual notation `lambda_i`.
    pub fn row(&self, i: usize) -> i64 {
        self.rows[i - 1]
    }

    /// `(-lambda_N, ..., -lambda_1)`, the image under the graph symmetry.
    pub fn reversed_negated(&self) -> Self {
        Self {
            rows: self.rows.iter().rev().map(|&x| -x).collect(),
        }
    }

    pub fn positive_part(&self) -> Partition {
        Partition {
            rows: self.rows.iter().filter(|&&x| x > 0).map(|&x| x as u64).collect(),
        }
    }

    pub fn negative_part(&self) -> Partition {
        Partition {
            rows: self
                .rows
                .iter()
                .rev()
                .filter(|&&x| x < 0)
                .map(|&x| x.unsigned_abs())
                .collect(),
        }
    }

    /// Copy with row `i` (1-based) shifted by `delta`, validated.
    pub fn with_row_shift(&self, i: usize, delta: i64) -> Result<Self> {
        if i == 0 || i > self.level() {
            return Err(Error::arg(format!("row {i} out of range for level {}", self.level())));
        }
        let mut rows = self.rows.clone();
        rows[i - 1] += delta;
        Self::new(rows)
    }
}

impl TryFrom<Vec<i64>> for Signature {
    type Error = Error;

    fn try_from(rows: Vec<i64>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<Signature> for Vec<i64> {
    fn from(s: Signature) -> Self {
        s.rows
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, r) in self.rows.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

/// A Young diagram given by its positive row lengths.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Partition {
    rows: Vec<u64>,
}

impl Partition {
    pub fn new(mut rows: Vec<u64>) -> Result<Self> {
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::arg("partition rows must be weakly decreasing"));
        }
        while rows.last() == Some(&0) {
            rows.pop();
        }
        Ok(Self { rows })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Length of row `i` (1-based), zero past the last row.
    pub fn row(&self, i: usize) -> u64 {
        self.rows.get(i - 1).copied().unwrap_or(0)
    }

    pub fn size(&self) -> u64 {
        self.rows.iter().sum()
    }

    pub fn contains(&self, other: &Partition) -> bool {
        other.rows.len() <= self.rows.len()
            && other.rows.iter().zip(&self.rows).all(|(a, b)| a <= b)
    }
}

impl TryFrom<Vec<u64>> for Partition {
    type Error = Error;

    fn try_from(rows: Vec<u64>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<Partition> for Vec<u64> {
    fn from(p: Partition) -> Self {
        p.rows
    }
}

/// The ("positive", "negative") pair of Young diagrams of a signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramPair {
    pub positive: Partition,
    pub negative: Partition,
}

impl DiagramPair {
    /// Rebuilds the signature of the given level. Fails when the diagrams
    /// need more rows than the level provides.
    pub fn to_signature(&self, level: usize) -> Result<Signature> {
        let p = self.positive.rows.len();
        let n = self.negative.rows.len();
        if level == 0 || p + n > level {
            return Err(Error::arg(format!(
                "diagrams with {p}+{n} rows do not fit into level {level}"
            )));
        }
        let mut rows = Vec::with_capacity(level);
        rows.extend(self.positive.rows.iter().map(|&x| x as i64));
        rows.resize(level - n, 0);
        rows.extend(self.negative.rows.iter().rev().map(|&x| -(x as i64)));
        Signature::new(rows)
    }
}

/// A box of a Young diagram at row `row` and column `col`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: u64,
    pub col: u64,
}

impl Cell {
    pub fn new(row: u64, col: u64) -> Self {
        Self { row, col }
    }

    pub fn content(&self) -> i64 {
        self.col as i64 - self.row as i64
    }
}

/// A finite path in the graph: `signatures[m]` lives at level `start_level + m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPath", into = "RawPath")]
pub struct Path {
    start_level: usize,
    signatures: Vec<Signature>,
}

#[derive(Serialize, Deserialize)]
struct RawPath {
    start_level: usize,
    signatures: Vec<Signature>,
}

impl TryFrom<RawPath> for Path {
    type Error = Error;

    fn try_from(raw: RawPath) -> Result<Self> {
        Path::new(raw.start_level, raw.signatures)
    }
}

impl From<Path> for RawPath {
    fn from(p: Path) -> Self {
        RawPath {
            start_level: p.start_level,
            signatures: p.signatures,
        }
    }
}

impl Path {
    pub fn new(start_level: usize, signatures: Vec<Signature>) -> Result<Self> {
        if start_level == 0 {
            return Err(Error::arg("paths start at level 1 or deeper"));
        }
        if signatures.is_empty() {
            return Err(Error::arg("a path needs at least one signature"));
        }
        for (m, s) in signatures.iter().enumerate() {
            if s.level() != start_level + m {
                return Err(Error::arg(format!(
                    "signature {m} has level {} but should be at level {}",
                    s.level(),
                    start_level + m
                )));
            }
        }
        for (m, w) in signatures.windows(2).enumerate() {
            if !interlaces(&w[0], &w[1])? {
                return Err(Error::arg(format!(
                    "levels {} and {} do not interlace: {} / {}",
                    start_level + m,
                    start_level + m + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Self {
            start_level,
            signatures,
        })
    }

    pub(crate) fn from_parts_unchecked(start_level: usize, signatures: Vec<Signature>) -> Self {
        Self {
            start_level,
            signatures,
        }
    }

    pub fn start_level(&self) -> usize {
        self.start_level
    }

    /// Last level covered by the path.
    pub fn end_level(&self) -> usize {
        self.start_level + self.signatures.len() - 1
    }

    pub fn signatures(&self) -> &[Signature] {
        &self.signatures
    }

    pub fn len(&self) -> usize {
        self.signatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
    }

    pub fn covers(&self, level: usize) -> bool {
        level >= self.start_level && level <= self.end_level()
    }

    pub fn at(&self, level: usize) -> Option<&Signature> {
        if self.covers(level) {
            Some(&self.signatures[level - self.start_level])
        } else {
            None
        }
    }

    pub(crate) fn replace_unchecked(&mut self, level: usize, sig: Signature) {
        let idx = level - self.start_level;
        self.signatures[idx] = sig;
    }
}

/// Edge test `mu ≺ lam`: `lam_1 >= mu_1 >= lam_2 >= ... >= mu_N >= lam_{N+1}`.
pub fn interlaces(mu: &Signature, lam: &Signature) -> Result<bool> {
    if lam.level() != mu.level() + 1 {
        return Err(Error::arg(format!(
            "interlacing needs consecutive levels, got {} and {}",
            mu.level(),
            lam.level()
        )));
    }
    Ok(interlaces_rows(mu.rows(), lam.rows()))
}

pub(crate) fn interlaces_rows(mu: &[i64], lam: &[i64]) -> bool {
    mu.iter()
        .enumerate()
        .all(|(i, &m)| lam[i] >= m && m >= lam[i + 1])
}

pub fn to_diagram_pair(lam: &Signature) -> DiagramPair {
    DiagramPair {
        positive: lam.positive_part(),
        negative: lam.negative_part(),
    }
}

/// Cells of the skew diagram `outer / inner`, row by row.
pub fn skew_cells(outer: &Partition, inner: &Partition) -> Result<Vec<Cell>> {
    if !outer.contains(inner) {
        return Err(Error::arg("inner diagram is not contained in outer diagram"));
    }
    let mut cells = Vec::new();
    for (r, &len) in outer.rows.iter().enumerate() {
        let from = inner.row(r + 1);
        cells.extend((from + 1..=len).map(|c| Cell::new(r as u64 + 1, c)));
    }
    Ok(cells)
}

/// True iff `outer / inner` has at most one cell in every column.
pub fn is_horizontal_strip(outer: &Partition, inner: &Partition) -> Result<bool> {
    if !outer.contains(inner) {
        return Err(Error::arg("inner diagram is not contained in outer diagram"));
    }
    // Column c of row r+1 is in the skew iff inner_{r+1} < c <= outer_{r+1};
    // it collides with row r iff inner_r < c as well.
    Ok((1..outer.rows.len()).all(|r| outer.rows[r] <= inner.row(r)))
}

/// Cells of `lam⁺ / mu⁺` for an edge `mu ≺ lam` (or `mu = None` for the
/// empty level-0 diagram).
pub fn added_positive_cells(mu: Option<&Signature>, lam: &Signature) -> Vec<Cell> {
    let mut cells = Vec::new();
    for (r, &l) in lam.rows().iter().enumerate() {
        if l <= 0 {
            break;
        }
        let from = mu
            .and_then(|m| m.rows().get(r))
            .map_or(0, |&m| m.max(0));
        cells.extend((from + 1..=l).map(|c| Cell::new(r as u64 + 1, c as u64)));
    }
    cells
}

/// The content-`k` cell of `lam⁺ / mu⁺`, if one was added. There is at most
/// one because the skew diagram is a horizontal strip.
pub fn added_cell_with_content(mu: Option<&Signature>, lam: &Signature, k: i64) -> Option<Cell> {
    for (r0, &l) in lam.rows().iter().enumerate() {
        let r = r0 as i64 + 1;
        let col = r + k;
        if col < 1 {
            continue;
        }
        if l < col {
            // rows below are no longer but need a later column
            break;
        }
        let before = mu.and_then(|m| m.rows().get(r0)).map_or(0, |&m| m.max(0));
        if before < col {
            return Some(Cell::new(r as u64, col as u64));
        }
    }
    None
}

/// Number of cells of the diagram with content `k`.
pub fn diagonal_length(p: &Partition, k: i64) -> u64 {
    p.rows
        .iter()
        .enumerate()
        .filter(|(r0, &len)| {
            let col = *r0 as i64 + 1 + k;
            col >= 1 && len as i64 >= col
        })
        .count() as u64
}

/// Exact Weyl dimension `prod_{u<v} (lam_u - lam_v + v - u) / (v - u)`.
pub fn weyl_dimension(lam: &Signature) -> Result<BigUint> {
    let n = lam.level();
    if n > EXACT_DIMENSION_MAX_LEVEL {
        return Err(Error::arg(format!(
            "exact dimension is limited to level {EXACT_DIMENSION_MAX_LEVEL}; use log_weyl_dimension"
        )));
    }
    let shifted = shifted_rows(lam.rows());
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for u in 0..n {
        for v in u + 1..n {
            num *= (shifted[u] - shifted[v]) as u64;
            den *= (v - u) as u64;
        }
    }
    debug_assert!((&num % &den).is_zero());
    Ok(num / den)
}

/// Natural log of the Weyl dimension, summed factor by factor.
pub fn log_weyl_dimension(lam: &Signature) -> f64 {
    log_weyl_dimension_rows(lam.rows())
}

pub(crate) fn log_weyl_dimension_rows(rows: &[i64]) -> f64 {
    let n = rows.len();
    let shifted = shifted_rows(rows);
    let mut acc = 0.0;
    for u in 0..n {
        // Batch products to keep the number of logarithms small.
        let mut prod = 1.0f64;
        for v in u + 1..n {
            prod *= (shifted[u] - shifted[v]) as f64 / (v - u) as f64;
            if !(1e-200..=1e200).contains(&prod) {
                acc += prod.ln();
                prod = 1.0;
            }
        }
        acc += prod.ln();
    }
    acc
}

/// `l_u = lam_u - u` with 1-based `u`; strictly decreasing for a signature.
pub(crate) fn shifted_rows(rows: &[i64]) -> Vec<i64> {
    rows.iter().enumerate().map(|(u, &x)| x - (u as i64 + 1)).collect()
}

/// Counts paths from level 1 to a signature by dynamic programming over
/// levels. Memoizes across calls.
#[derive(Debug, Default)]
pub struct PathCounter {
    memo: HashMap<Vec<i64>, BigUint>,
}

impl PathCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&mut self, lam: &Signature) -> BigUint {
        self.count_rows(lam.rows())
    }

    fn count_rows(&mut self, rows: &[i64]) -> BigUint {
        if rows.len() == 1 {
            return BigUint::one();
        }
        if let Some(c) = self.memo.get(rows) {
            return c.clone();
        }
        // predecessors mu with lam_{i+1} <= mu_i <= lam_i
        let n = rows.len() - 1;
        let mut total = BigUint::zero();
        let mut mu: Vec<i64> = (0..n).map(|i| rows[i + 1]).collect();
        loop {
            total += self.count_rows(&mu);
            let mut i = 0;
            loop {
                if i == n {
                    self.memo.insert(rows.to_vec(), total.clone());
                    return total;
                }
                if mu[i] < rows[i] {
                    mu[i] += 1;
                    break;
                }
                mu[i] = rows[i + 1];
                i += 1;
            }
        }
    }
}

/// Number of paths from level 1 to `lam`; equals [`weyl_dimension`].
pub fn count_paths_to(lam: &Signature) -> BigUint {
    PathCounter::new().count(lam)
}

/// Iterator over all `lam ≻ mu` with `lam_1 <= top_cap` and
/// `lam_{N+1} >= bottom_cap`.
#[derive(Debug, Clone)]
pub struct Extensions {
    lo: Vec<i64>,
    hi: Vec<i64>,
    current: Option<Vec<i64>>,
}

impl Iterator for Extensions {
    type Item = Signature;

    fn next(&mut self) -> Option<Signature> {
        let cur = self.current.as_mut()?;
        let out = Signature::from_rows_unchecked(cur.clone());
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.hi[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = self.lo[i];
        }
        Some(out)
    }
}

/// Row windows `[lo_i, hi_i]` of the extensions of `mu` within the caps.
pub(crate) fn extension_windows(mu: &[i64], top_cap: i64, bottom_cap: i64) -> (Vec<i64>, Vec<i64>) {
    let n = mu.len() + 1;
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for i in 0..n {
        lo.push(if i < mu.len() { mu[i] } else { bottom_cap });
        hi.push(if i == 0 { top_cap } else { mu[i - 1] });
    }
    (lo, hi)
}

pub fn enumerate_extensions(mu: &Signature, top_cap: i64, bottom_cap: i64) -> Result<Extensions> {
    let rows = mu.rows();
    if top_cap < rows[0] {
        return Err(Error::arg(format!("top cap {top_cap} is below mu_1 = {}", rows[0])));
    }
    if bottom_cap > rows[rows.len() - 1] {
        return Err(Error::arg(format!(
            "bottom cap {bottom_cap} is above mu_N = {}",
            rows[rows.len() - 1]
        )));
    }
    let (lo, hi) = extension_windows(rows, top_cap, bottom_cap);
    Ok(Extensions {
        current: Some(lo.clone()),
        lo,
        hi,
    })
}

/// Number of extensions within the caps, without enumerating them.
pub fn count_extensions(mu: &Signature, top_cap: i64, bottom_cap: i64) -> u128 {
    let (lo, hi) = extension_windows(mu.rows(), top_cap, bottom_cap);
    lo.iter()
        .zip(&hi)
        .map(|(l, h)| (h - l + 1).max(0) as u128)
        .product()
}

/// `Dim(lam') / Dim(lam)` where `lam'` has row `i` incremented by one,
/// as an exact rational.
pub fn dimension_ratio_row_increment_exact(lam: &Signature, i: usize) -> Result<BigRational> {
    check_row_increment(lam, i)?;
    let rows = lam.rows();
    let j = rows[i - 1] + 1;
    let ii = i as i64;
    let mut r = BigRational::one();
    for (p0, &lp) in rows.iter().enumerate() {
        let p = p0 as i64 + 1;
        if p == ii {
            continue;
        }
        let (num, den) = if p < ii {
            (lp - p - j + ii, lp - p - (j - 1) + ii)
        } else {
            (j - ii - (lp - p), j - ii - 1 - (lp - p))
        };
        r *= BigRational::new(BigInt::from(num), BigInt::from(den));
    }
    Ok(r)
}

/// Floating-point version of [`dimension_ratio_row_increment_exact`].
pub fn dimension_ratio_row_increment(lam: &Signature, i: usize) -> Result<f64> {
    check_row_increment(lam, i)?;
    let rows = lam.rows();
    let j = rows[i - 1] + 1;
    let ii = i as i64;
    let mut r = 1.0;
    for (p0, &lp) in rows.iter().enumerate() {
        let p = p0 as i64 + 1;
        if p < ii {
            r *= (lp - p - j + ii) as f64 / (lp - p - (j - 1) + ii) as f64;
        } else if p > ii {
            r *= (j - ii - (lp - p)) as f64 / (j - ii - 1 - (lp - p)) as f64;
        }
    }
    Ok(r)
}

fn check_row_increment(lam: &Signature, i: usize) -> Result<()> {
    if i == 0 || i > lam.level() {
        return Err(Error::arg(format!("row {i} out of range for level {}", lam.level())));
    }
    if i > 1 && lam.row(i - 1) < lam.row(i) + 1 {
        return Err(Error::arg(format!(
            "incrementing row {i} breaks the order: lambda_{} = {} < {}",
            i - 1,
            lam.row(i - 1),
            lam.row(i) + 1
        )));
    }
    Ok(())
}

/// Converts an exact ratio to `f64` for reporting.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
