//! Stochastic dominance on the truncated sequence space `{0,1}^n` and the
//! inductive construction of monotone couplings.
//!
//! A point `a ∈ {0,1}^n` is stored as a bitmask: coordinate `i` (1-based)
//! is bit `i - 1`. The order is componentwise `a ≤ b`, i.e. `a & !b == 0`.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` with a dense `2^n` table.
pub const DENSE_MAX: usize = 24;
/// Largest `n` for [`build_coupling`]; the table may hold up to `3^n` atoms.
pub const COUPLING_MAX: usize = 14;
/// Largest `n` for up-set enumeration.
pub const UPSET_MAX: usize = 4;

/// Probability values: `f64` with a `1e-12` slack, or exact rationals.
pub trait Mass:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
{
    fn to_f64(&self) -> f64;
    /// Allowed deviation in sums and signs.
    fn tolerance() -> Self;
}

impl Mass for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
    fn tolerance() -> Self {
        1e-12
    }
}

impl Mass for Rational64 {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn tolerance() -> Self {
        Rational64::zero()
    }
}

fn abs_diff<T: Mass>(a: &T, b: &T) -> T {
    if a > b {
        a.clone() - b.clone()
    } else {
        b.clone() - a.clone()
    }
}

/// `"0110"`: coordinate 1 first.
pub fn bits_to_string(a: u32, n: usize) -> String {
    (0..n).map(|i| if a >> i & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn leq(a: u32, b: u32) -> bool {
    a & !b == 0
}

#[derive(Debug, Clone, PartialEq)]
enum Repr<T> {
    Dense(Vec<T>),
    Product(Vec<T>),
}

/// A probability measure on `{0,1}^n`, dense or of product form.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBinaryDistribution<T = f64> {
    n: usize,
    repr: Repr<T>,
}

impl<T: Mass> FiniteBinaryDistribution<T> {
    pub fn dense(n: usize, probs: Vec<T>) -> Result<Self> {
        if n > DENSE_MAX {
            return Err(Error::Resource(format!("dense tables stop at n = {DENSE_MAX}, got {n}")));
        }
        if probs.len() != 1 << n {
            return Err(Error::arg(format!("expected {} probabilities, got {}", 1u64 << n, probs.len())));
        }
        if probs.iter().any(|p| *p < T::zero()) {
            return Err(Error::arg("probabilities must be non-negative"));
        }
        let total = probs.iter().cloned().fold(T::zero(), |a, b| a + b);
        if abs_diff(&total, &T::one()) > T::tolerance() {
            return Err(Error::arg(format!("probabilities sum to {}", total.to_f64())));
        }
        Ok(Self { n, repr: Repr::Dense(probs) })
    }

    /// Independent coordinates with `P(q_i = 1) = marginals[i - 1]`.
    pub fn product(marginals: Vec<T>) -> Result<Self> {
        if marginals.iter().any(|p| *p < T::zero() || *p > T::one()) {
            return Err(Error::arg("marginals must lie in [0, 1]"));
        }
        Ok(Self { n: marginals.len(), repr: Repr::Product(marginals) })
    }

    pub fn point_mass(n: usize, a: u32) -> Result<Self> {
        let mut probs = vec![T::zero(); 1usize << n.min(DENSE_MAX)];
        if (a as u64) >= probs.len() as u64 {
            return Err(Error::arg("point outside the cube"));
        }
        probs[a as usize] = T::one();
        Self::dense(n, probs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Marginals when the measure is of product form.
    pub fn marginals(&self) -> Option<&[T]> {
        match &self.repr {
            Repr::Product(m) => Some(m),
            Repr::Dense(_) => None,
        }
    }

    pub fn prob(&self, a: u32) -> T {
        match &self.repr {
            Repr::Dense(p) => p[a as usize].clone(),
            Repr::Product(m) => m.iter().enumerate().fold(T::one(), |acc, (i, p)| {
                acc * if a >> i & 1 == 1 { p.clone() } else { T::one() - p.clone() }
            }),
        }
    }

    pub fn to_dense(&self) -> Result<Vec<T>> {
        if self.n > DENSE_MAX {
            return Err(Error::Resource(format!("dense tables stop at n = {DENSE_MAX}")));
        }
        Ok((0..1u32 << self.n).map(|a| self.prob(a)).collect())
    }

    /// Masses of all prefixes of length `len`, indexed by the prefix bits.
    pub fn prefix_masses(&self, len: usize) -> Vec<T> {
        assert!(len <= self.n && len <= DENSE_MAX);
        match &self.repr {
            Repr::Dense(p) => {
                let mask = (1u32 << len) - 1;
                let mut out = vec![T::zero(); 1 << len];
                for (a, v) in p.iter().enumerate() {
                    let h = a as u32 & mask;
                    out[h as usize] = out[h as usize].clone() + v.clone();
                }
                out
            }
            Repr::Product(m) => (0..1u32 << len)
                .map(|h| {
                    (0..len).fold(T::one(), |acc, i| {
                        acc * if h >> i & 1 == 1 { m[i].clone() } else { T::one() - m[i].clone() }
                    })
                })
                .collect(),
        }
    }

    /// `P(q_{len+1} = 1 | prefix)` for every prefix of length `len`; `None`
    /// where the prefix has zero mass.
    pub fn conditionals(&self, len: usize) -> Vec<Option<T>> {
        assert!(len < self.n);
        if let Repr::Product(m) = &self.repr {
            return vec![Some(m[len].clone()); 1 << len];
        }
        let here = self.prefix_masses(len);
        let next = self.prefix_masses(len + 1);
        here.iter()
            .enumerate()
            .map(|(h, mass)| {
                if mass.is_zero() {
                    None
                } else {
                    Some(next[h | 1 << len].clone() / mass.clone())
                }
            })
            .collect()
    }

    /// `P(q_i = 1)`, `i` 1-based.
    pub fn marginal_one(&self, i: usize) -> T {
        match &self.repr {
            Repr::Product(m) => m[i - 1].clone(),
            Repr::Dense(p) => p
                .iter()
                .enumerate()
                .filter(|(a, _)| a >> (i - 1) & 1 == 1)
                .fold(T::zero(), |acc, (_, v)| acc + v.clone()),
        }
    }
}

impl FiniteBinaryDistribution<f64> {
    /// Empirical law of observed points.
    pub fn empirical(n: usize, samples: &[u32]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Statistical("no samples".into()));
        }
        let mut probs = vec![0.0; 1 << n];
        let w = 1.0 / samples.len() as f64;
        for &a in samples {
            probs[a as usize] += w;
        }
        Self::dense(n, probs)
    }
}

/// For a product `nu`: whether `P(q_m = 1) >= P_mu(q_m = 1 | history)` for
/// every coordinate `m` and every positive-mass history of `mu`. A general
/// `nu` is checked along the pairs that the coupling construction actually
/// reaches, i.e. the check succeeds exactly when [`build_coupling`] does.
pub fn dominance_hypothesis_check<T: Mass>(
    mu: &FiniteBinaryDistribution<T>,
    nu: &FiniteBinaryDistribution<T>,
) -> Result<bool> {
    if mu.n() != nu.n() {
        return Err(Error::arg(format!("dimensions differ: {} vs {}", mu.n(), nu.n())));
    }
    let n = mu.n();
    if n > DENSE_MAX {
        return Err(Error::Resource(format!("history enumeration stops at n = {DENSE_MAX}")));
    }
    let Some(m) = nu.marginals() else {
        return match build_coupling(mu, nu) {
            Ok(_) => Ok(true),
            Err(Error::HypothesisViolation { .. }) => Ok(false),
            Err(e) => Err(e),
        };
    };
    if let Some(mm) = mu.marginals() {
        return Ok(mm.iter().zip(m).all(|(p, q)| *p <= q.clone() + T::tolerance()));
    }
    for len in 0..n {
        let bound = m[len].clone() + T::tolerance();
        if mu.conditionals(len).iter().flatten().any(|p| *p > bound) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A measure on pairs `(a, b)` with `a ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable<T = f64> {
    pub n: usize,
    /// Positive masses only.
    pub mass: BTreeMap<(u32, u32), T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub a: String,
    pub b: String,
    pub p: f64,
}

impl<T: Mass> CouplingTable<T> {
    pub fn total(&self) -> T {
        self.mass.values().cloned().fold(T::zero(), |a, b| a + b)
    }

    pub fn is_monotone(&self) -> bool {
        self.mass.keys().all(|&(a, b)| leq(a, b))
    }

    pub fn left_marginal(&self) -> Vec<T> {
        let mut out = vec![T::zero(); 1 << self.n];
        for (&(a, _), v) in &self.mass {
            out[a as usize] = out[a as usize].clone() + v.clone();
        }
        out
    }

    pub fn right_marginal(&self) -> Vec<T> {
        let mut out = vec![T::zero(); 1 << self.n];
        for (&(_, b), v) in &self.mass {
            out[b as usize] = out[b as usize].clone() + v.clone();
        }
        out
    }

    /// Image under forgetting coordinates `m + 1..=n`.
    pub fn project(&self, m: usize) -> Self {
        assert!(m <= self.n);
        let mask = (1u32 << m) - 1;
        let mut mass = BTreeMap::new();
        for (&(a, b), v) in &self.mass {
            let e = mass.entry((a & mask, b & mask)).or_insert_with(T::zero);
            *e = e.clone() + v.clone();
        }
        Self { n: m, mass }
    }

    pub fn entries(&self) -> Vec<CouplingEntry> {
        self.mass
            .iter()
            .map(|(&(a, b), v)| CouplingEntry {
                a: bits_to_string(a, self.n),
                b: bits_to_string(b, self.n),
                p: v.to_f64(),
            })
            .collect()
    }
}

/// Builds a coupling of `mu` and `nu` supported on `a ≤ b`, one coordinate
/// at a time. An atom `(a, b)` of mass `m` splits into `(a0, b0)`,
/// `(a0, b1)` and `(a1, b1)` with masses `m (1 - p_nu)`, `m (p_nu - p_mu)`
/// and `m p_mu`, where `p_mu = P_mu(next = 1 | a)`, `p_nu = P_nu(next = 1 | b)`.
pub fn build_coupling<T: Mass>(
    mu: &FiniteBinaryDistribution<T>,
    nu: &FiniteBinaryDistribution<T>,
) -> Result<CouplingTable<T>> {
    if mu.n() != nu.n() {
        return Err(Error::arg(format!("dimensions differ: {} vs {}", mu.n(), nu.n())));
    }
    let n = mu.n();
    if n > COUPLING_MAX {
        return Err(Error::Resource(format!("couplings are built up to n = {COUPLING_MAX}, got {n}")));
    }
    let tol = T::tolerance();
    let mut atoms: BTreeMap<(u32, u32), T> = BTreeMap::new();
    atoms.insert((0, 0), T::one());
    for len in 0..n {
        let pm = mu.conditionals(len);
        let pn = nu.conditionals(len);
        let bit = 1u32 << len;
        let mut next = BTreeMap::new();
        for ((a, b), m) in atoms {
            let (Some(p_mu), Some(p_nu)) = (&pm[a as usize], &pn[b as usize]) else {
                // unreachable for a consistent table: the atom has positive mass
                return Err(Error::HypothesisViolation {
                    history: format!("({}, {})", bits_to_string(a, len), bits_to_string(b, len)),
                    detail: "conditioning on a zero-mass history".into(),
                });
            };
            let mut gap = p_nu.clone() - p_mu.clone();
            if gap < T::zero() {
                if T::zero() - gap.clone() > tol {
                    return Err(Error::HypothesisViolation {
                        history: format!("({}, {})", bits_to_string(a, len), bits_to_string(b, len)),
                        detail: format!(
                            "P_nu(q_{} = 1) = {} < P_mu(q_{} = 1) = {}",
                            len + 1,
                            p_nu.to_f64(),
                            len + 1,
                            p_mu.to_f64()
                        ),
                    });
                }
                gap = T::zero();
            }
            let parts = [
                ((a, b), m.clone() * (T::one() - p_nu.clone())),
                ((a, b | bit), m.clone() * gap),
                ((a | bit, b | bit), m * p_mu.clone()),
            ];
            for (key, v) in parts {
                if v > T::zero() {
                    next.insert(key, v);
                }
            }
        }
        atoms = next;
    }
    Ok(CouplingTable { n, mass: atoms })
}

/// Subset of `{0,1}^n` given by its members, read as an up-set or a down-set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneSet {
    pub n: usize,
    pub members: Vec<u32>,
    pub upward: bool,
}

impl MonotoneSet {
    pub fn new(n: usize, mut members: Vec<u32>, upward: bool) -> Result<Self> {
        if n > DENSE_MAX {
            return Err(Error::Resource(format!("sets are stored densely up to n = {DENSE_MAX}")));
        }
        members.sort_unstable();
        members.dedup();
        if members.iter().any(|&a| (a as u64) >> n != 0) {
            return Err(Error::arg("member outside the cube"));
        }
        let mut inside = vec![false; 1 << n];
        for &a in &members {
            inside[a as usize] = true;
        }
        for &a in &members {
            for i in 0..n {
                let flip = a ^ (1 << i);
                let moves_up = flip > a;
                if moves_up == upward && !inside[flip as usize] {
                    return Err(Error::arg(format!(
                        "{} is not {}: contains {} but not {}",
                        if upward { "an up-set" } else { "a down-set" },
                        if upward { "closed upward" } else { "closed downward" },
                        bits_to_string(a, n),
                        bits_to_string(flip, n)
                    )));
                }
            }
        }
        Ok(Self { n, members, upward })
    }

    pub fn complement(&self) -> Self {
        let mut inside = vec![false; 1 << self.n];
        for &a in &self.members {
            inside[a as usize] = true;
        }
        Self {
            n: self.n,
            members: (0..1u32 << self.n).filter(|&a| !inside[a as usize]).collect(),
            upward: !self.upward,
        }
    }
}

pub fn upset_probability<T: Mass>(dist: &FiniteBinaryDistribution<T>, set: &MonotoneSet) -> Result<T> {
    if set.n != dist.n() {
        return Err(Error::arg(format!("set lives in dimension {}, measure in {}", set.n, dist.n())));
    }
    Ok(set.members.iter().fold(T::zero(), |acc, &a| acc + dist.prob(a)))
}

/// All up-sets of `{0,1}^n` (including the empty set and the full cube).
pub fn enumerate_upsets(n: usize) -> Result<Vec<MonotoneSet>> {
    if n > UPSET_MAX {
        return Err(Error::Resource(format!("up-set enumeration stops at n = {UPSET_MAX}")));
    }
    let points = 1usize << n;
    let mut out = Vec::new();
    for subset in 0u64..1 << points {
        let closed = (0..points).all(|a| {
            subset >> a & 1 == 0 || (0..n).all(|i| a >> i & 1 == 1 || subset >> (a | 1 << i) & 1 == 1)
        });
        if closed {
            let members = (0..points as u32).filter(|&a| subset >> a & 1 == 1).collect();
            out.push(MonotoneSet { n, members, upward: true });
        }
    }
    Ok(out)
}

/// `mu ≤ nu` in the stochastic order, checked on every up-set.
pub fn stochastic_order_bruteforce<T: Mass>(
    mu: &FiniteBinaryDistribution<T>,
    nu: &FiniteBinaryDistribution<T>,
) -> Result<bool> {
    if mu.n() != nu.n() {
        return Err(Error::arg(format!("dimensions differ: {} vs {}", mu.n(), nu.n())));
    }
    let tol = T::tolerance();
    for set in enumerate_upsets(mu.n())? {
        if upset_probability(mu, &set)? > upset_probability(nu, &set)? + tol.clone() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn one_step_system() {
        let mu = FiniteBinaryDistribution::product(vec![r(3, 10)]).unwrap();
        let nu = FiniteBinaryDistribution::product(vec![r(1, 2)]).unwrap();
        let t = build_coupling(&mu, &nu).unwrap();
        assert_eq!(t.mass[&(1, 1)], r(3, 10));
        assert_eq!(t.mass[&(0, 0)], r(1, 2));
        assert_eq!(t.mass[&(0, 1)], r(1, 5));
        assert_eq!(t.mass.len(), 3);
    }

    #[test]
    fn equal_measures_couple_on_diagonal() {
        let mu = FiniteBinaryDistribution::dense(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let t = build_coupling(&mu, &mu).unwrap();
        assert!(t.mass.keys().all(|(a, b)| a == b));
        for a in 0..4u32 {
            assert!((t.mass[&(a, a)] - mu.prob(a)).abs() < 1e-15);
        }
        assert!(dominance_hypothesis_check(&mu, &mu).unwrap());
    }

    #[test]
    fn two_step_example() {
        let mu = FiniteBinaryDistribution::product(vec![0.2, 0.3]).unwrap();
        let nu = FiniteBinaryDistribution::product(vec![0.4, 0.5]).unwrap();
        let t = build_coupling(&mu, &nu).unwrap();
        assert_eq!(t.mass.len(), 9);
        let (l, rr) = (t.left_marginal(), t.right_marginal());
        for a in 0..4u32 {
            assert!((l[a as usize] - mu.prob(a)).abs() < 1e-12);
            assert!((rr[a as usize] - nu.prob(a)).abs() < 1e-12);
        }
        assert!(t.is_monotone());
        // the first coordinate's three numbers
        let p1 = t.project(1);
        assert!((p1.mass[&(0, 0)] - 0.6).abs() < 1e-15);
        assert!((p1.mass[&(0, 1)] - 0.2).abs() < 1e-15);
        assert!((p1.mass[&(1, 1)] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn violations() {
        let mu = FiniteBinaryDistribution::<f64>::point_mass(2, 0b11).unwrap();
        let nu = FiniteBinaryDistribution::product(vec![0.5, 0.5]).unwrap();
        assert!(!dominance_hypothesis_check(&mu, &nu).unwrap());
        assert!(matches!(build_coupling(&mu, &nu), Err(Error::HypothesisViolation { .. })));
        assert!(!stochastic_order_bruteforce(&mu, &nu).unwrap());
        let zero = FiniteBinaryDistribution::<f64>::point_mass(2, 0).unwrap();
        assert!(stochastic_order_bruteforce(&zero, &mu).unwrap());
        assert!(stochastic_order_bruteforce(&zero, &nu).unwrap());
    }

    #[test]
    fn upset_counts() {
        let counts: Vec<usize> = (0..=4).map(|n| enumerate_upsets(n).unwrap().len()).collect();
        assert_eq!(counts, vec![2, 3, 6, 20, 168]);
        assert!(enumerate_upsets(5).is_err());
    }

    #[test]
    fn upset_probabilities() {
        let d = FiniteBinaryDistribution::product(vec![0.3, 0.6]).unwrap();
        let full = MonotoneSet::new(2, (0..4).collect(), true).unwrap();
        let empty = MonotoneSet::new(2, vec![], true).unwrap();
        let first = MonotoneSet::new(2, vec![0b01, 0b11], true).unwrap();
        assert!((upset_probability(&d, &full).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(upset_probability(&d, &empty).unwrap(), 0.0);
        assert!((upset_probability(&d, &first).unwrap() - 0.3).abs() < 1e-15);
        assert!(MonotoneSet::new(2, vec![0b01], true).is_err());
        assert!(MonotoneSet::new(2, vec![0b01], false).is_err());
        assert!(MonotoneSet::new(2, vec![0b00, 0b01], false).is_ok());
        assert_eq!(first.complement().members, vec![0b00, 0b10]);
    }

    #[test]
    fn dense_validation() {
        assert!(FiniteBinaryDistribution::dense(1, vec![0.5, 0.6]).is_err());
        assert!(FiniteBinaryDistribution::dense(1, vec![0.5]).is_err());
        assert!(FiniteBinaryDistribution::dense(1, vec![r(1, 3), r(2, 3)]).is_ok());
        assert!(FiniteBinaryDistribution::product(vec![1.5]).is_err());
        let e = FiniteBinaryDistribution::empirical(2, &[0, 3, 3, 1]).unwrap();
        assert!((e.prob(3) - 0.5).abs() < 1e-15);
        assert_eq!(bits_to_string(0b0110, 4), "0110");
        assert_eq!(bits_to_string(0b0001, 4), "1000");
    }
}
