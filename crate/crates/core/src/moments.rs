//! Moments of weighted sign sums `S = sum_i a_i e_i`, both under the
//! zero-sum constraint (signs uniform on the set with exactly half `+1`) and
//! over the full sign cube (independent uniform signs).
//!
//! Enumeration works on a common-denominator integer scaling of the weights,
//! bucketing the distinct sums with multiplicities. Moments of any integer
//! order then come out as exact rationals; real orders are evaluated in
//! floating point over the same exact buckets.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::numeric::{format_rational, pow_half, rat_int, to_f64};
use crate::report::{statements, BoundReport, Tolerance, Value};

/// Largest even length enumerated exactly under the zero-sum constraint
/// (binomial(24, 12) is about 2.7 million sign vectors).
pub const MAX_EXACT_ZERO_SUM_N: usize = 24;

/// Largest length enumerated exactly over the full sign cube.
pub const MAX_EXACT_CUBE_N: usize = 20;

/// Non-empty vector of exact rational weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<BigRational>);

impl WeightVector {
    pub fn new(weights: Vec<BigRational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("weight vector must be non-empty".into()));
        }
        Ok(WeightVector(weights))
    }

    /// Convenience constructor for integer weights.
    pub fn from_ints(vals: &[i64]) -> Result<Self> {
        Self::new(vals.iter().map(|&v| rat_int(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[BigRational] {
        &self.0
    }

    pub fn sum(&self) -> BigRational {
        self.0.iter().fold(BigRational::zero(), |acc, v| acc + v)
    }

    pub fn norm_sq(&self) -> BigRational {
        self.0.iter().fold(BigRational::zero(), |acc, v| acc + v * v)
    }

    pub fn mean(&self) -> BigRational {
        self.sum() / rat_int(self.len() as i64)
    }

    /// Length as `N`, failing when the zero-sum constraint is infeasible.
    pub fn require_even(&self) -> Result<usize> {
        if self.len() % 2 != 0 {
            Err(Error::OddLength { len: self.len() })
        } else {
            Ok(self.len())
        }
    }
}

/// A vector of signs, each entry `+1` or `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("signs must be +1 or -1".into()));
        }
        Ok(SignVector(signs))
    }

    fn from_mask(n: usize, mask: u32) -> Self {
        SignVector((0..n).map(|i| if mask & (1 << i) != 0 { 1 } else { -1 }).collect())
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|&s| s as i64).sum()
    }

    pub fn is_zero_sum(&self) -> bool {
        self.sum() == 0
    }
}

/// Iterates every sign vector of even length `n` whose entries sum to zero,
/// in ascending order of the `+1` position mask.
pub fn enumerate_zero_sum_signs(n: usize) -> Result<impl Iterator<Item = SignVector>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sign vectors must be non-empty".into()));
    }
    if n % 2 != 0 {
        return Err(Error::OddLength { len: n });
    }
    if n > MAX_EXACT_ZERO_SUM_N {
        return Err(Error::CapacityExceeded {
            what: "N",
            value: n as u64,
            cap: MAX_EXACT_ZERO_SUM_N as u64,
        });
    }
    let iter = GosperMasks {
        mask: (1u32 << (n / 2)) - 1,
        limit: 1u32 << n,
        done: false,
    };
    Ok(iter.map(move |mask| SignVector::from_mask(n, mask)))
}

/// Emits all `n`-bit masks with a fixed popcount in ascending order.
struct GosperMasks {
    mask: u32,
    limit: u32,
    done: bool,
}

impl Iterator for GosperMasks {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.done || self.mask >= self.limit {
            return None;
        }
        let c = self.mask;
        let u = c & c.wrapping_neg();
        let v = c + u;
        if v >= self.limit {
            self.done = true;
        } else {
            self.mask = v | (((v ^ c) / u) >> 2);
        }
        Some(c)
    }
}

/// `sum_i a_i s_i` as an exact rational.
pub fn weighted_sum(a: &WeightVector, s: &SignVector) -> Result<BigRational> {
    if a.len() != s.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: s.len() });
    }
    Ok(a.as_slice()
        .iter()
        .zip(s.signs())
        .fold(BigRational::zero(), |acc, (w, &sign)| {
            if sign > 0 {
                acc + w
            } else {
                acc - w
            }
        }))
}

/// Moment order: integer orders give exact rational moments, real orders are
/// evaluated in floating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MomentOrder {
    Integer(u32),
    Real(f64),
}

impl MomentOrder {
    pub fn integer(p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("moment order must be at least 1".into()));
        }
        Ok(MomentOrder::Integer(p))
    }

    pub fn real(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidParameter(format!("moment order must be a finite value >= 1, got {p}")));
        }
        Ok(MomentOrder::Real(p))
    }

    pub fn as_f64(self) -> f64 {
        match self {
            MomentOrder::Integer(p) => p as f64,
            MomentOrder::Real(p) => p,
        }
    }
}

impl FromStr for MomentOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(p) = s.parse::<u32>() {
            return MomentOrder::integer(p);
        }
        let p: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("cannot parse moment order from {s:?}")))?;
        MomentOrder::real(p)
    }
}

impl std::fmt::Display for MomentOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MomentOrder::Integer(p) => write!(f, "{p}"),
            MomentOrder::Real(p) => write!(f, "{p}"),
        }
    }
}

/// The exact distribution of a weighted sign sum: distinct values with
/// multiplicities, on a common-denominator integer scale.
#[derive(Clone, Debug)]
pub struct SumDistribution {
    /// `(scaled value, multiplicity)` in ascending value order; the actual
    /// sum is `value / scale`.
    entries: Vec<(BigInt, u64)>,
    scale: BigInt,
    total: u64,
}

impl SumDistribution {
    pub fn entries(&self) -> &[(BigInt, u64)] {
        &self.entries
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Exact point probability `P(S = value)`.
    pub fn probability_of(&self, value: &BigRational) -> BigRational {
        let scaled = value * BigRational::from_integer(self.scale.clone());
        if !scaled.is_integer() {
            return BigRational::zero();
        }
        let v = scaled.to_integer();
        match self.entries.binary_search_by(|(e, _)| e.cmp(&v)) {
            Ok(i) => BigRational::new(BigInt::from(self.entries[i].1), BigInt::from(self.total)),
            Err(_) => BigRational::zero(),
        }
    }

    /// `E |S|^p`: exact for integer orders, floating point for real orders.
    pub fn abs_moment(&self, order: MomentOrder) -> Value {
        match order {
            MomentOrder::Integer(p) => {
                let mut sum = BigInt::zero();
                for (v, count) in &self.entries {
                    sum += v.abs().pow(p) * BigInt::from(*count);
                }
                Value::exact(BigRational::new(sum, self.scale.pow(p) * BigInt::from(self.total)))
            }
            MomentOrder::Real(p) => {
                let mut sum = 0.0f64;
                for (v, count) in &self.entries {
                    let x = to_f64(&BigRational::new(v.clone(), self.scale.clone())).abs();
                    sum += *count as f64 * x.powf(p);
                }
                Value::approx(sum / self.total as f64)
            }
        }
    }
}

/// Scales rationals to integers over their common denominator.
pub(crate) fn common_scale(vals: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let scale = vals
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints = vals
        .iter()
        .map(|q| q.numer() * (&scale / q.denom()))
        .collect();
    (ints, scale)
}

pub(crate) fn try_i128(scaled: &[BigInt]) -> Option<Vec<i128>> {
    let max_sum: BigInt = scaled.iter().map(|v| v.abs()).sum();
    if max_sum > BigInt::from(i128::MAX / 4) {
        return None;
    }
    Some(scaled.iter().map(|v| v.to_i128().expect("checked above")).collect())
}

fn dfs_zero_sum_i128(vals: &[i128], idx: usize, plus: usize, minus: usize, acc: i128, out: &mut HashMap<i128, u64>) {
    if idx == vals.len() {
        *out.entry(acc).or_insert(0) += 1;
        return;
    }
    if plus > 0 {
        dfs_zero_sum_i128(vals, idx + 1, plus - 1, minus, acc + vals[idx], out);
    }
    if minus > 0 {
        dfs_zero_sum_i128(vals, idx + 1, plus, minus - 1, acc - vals[idx], out);
    }
}

fn dfs_zero_sum_big(vals: &[BigInt], idx: usize, plus: usize, minus: usize, acc: BigInt, out: &mut HashMap<BigInt, u64>) {
    if idx == vals.len() {
        *out.entry(acc).or_insert(0) += 1;
        return;
    }
    if plus > 0 {
        dfs_zero_sum_big(vals, idx + 1, plus - 1, minus, &acc + &vals[idx], out);
    }
    if minus > 0 {
        dfs_zero_sum_big(vals, idx + 1, plus, minus - 1, &acc - &vals[idx], out);
    }
}

fn dfs_cube_i128(vals: &[i128], idx: usize, acc: i128, out: &mut HashMap<i128, u64>) {
    if idx == vals.len() {
        *out.entry(acc).or_insert(0) += 1;
        return;
    }
    dfs_cube_i128(vals, idx + 1, acc + vals[idx], out);
    dfs_cube_i128(vals, idx + 1, acc - vals[idx], out);
}

fn dfs_cube_big(vals: &[BigInt], idx: usize, acc: BigInt, out: &mut HashMap<BigInt, u64>) {
    if idx == vals.len() {
        *out.entry(acc).or_insert(0) += 1;
        return;
    }
    dfs_cube_big(vals, idx + 1, &acc + &vals[idx], out);
    dfs_cube_big(vals, idx + 1, &acc - &vals[idx], out);
}

pub(crate) fn finish_distribution(map_small: Option<HashMap<i128, u64>>, map_big: Option<HashMap<BigInt, u64>>, scale: BigInt, total: u64) -> SumDistribution {
    let mut entries: Vec<(BigInt, u64)> = match (map_small, map_big) {
        (Some(m), _) => m.into_iter().map(|(v, c)| (BigInt::from(v), c)).collect(),
        (_, Some(m)) => m.into_iter().collect(),
        _ => unreachable!("one map is always supplied"),
    };
    entries.sort_by(|x, y| x.0.cmp(&y.0));
    debug_assert_eq!(entries.iter().map(|(_, c)| c).sum::<u64>(), total);
    SumDistribution { entries, scale, total }
}

/// Exact distribution of `S = sum a_i e_i` with signs uniform over the
/// zero-sum set (even length, exactly half `+1`).
pub fn zero_sum_distribution(a: &WeightVector) -> Result<SumDistribution> {
    let n = a.require_even()?;
    if n > MAX_EXACT_ZERO_SUM_N {
        return Err(Error::CapacityExceeded {
            what: "N",
            value: n as u64,
            cap: MAX_EXACT_ZERO_SUM_N as u64,
        });
    }
    let (scaled, scale) = common_scale(a.as_slice());
    let total = binomial(n as u64, (n / 2) as i64)
        .to_u64()
        .expect("fits for n <= 24");
    match try_i128(&scaled) {
        Some(vals) => {
            let mut out = HashMap::new();
            dfs_zero_sum_i128(&vals, 0, n / 2, n / 2, 0, &mut out);
            Ok(finish_distribution(Some(out), None, scale, total))
        }
        None => {
            let mut out = HashMap::new();
            dfs_zero_sum_big(&scaled, 0, n / 2, n / 2, BigInt::zero(), &mut out);
            Ok(finish_distribution(None, Some(out), scale, total))
        }
    }
}

/// Exact distribution of `S = sum a_i x_i` with independent uniform signs.
pub fn full_cube_distribution(a: &WeightVector) -> Result<SumDistribution> {
    let n = a.len();
    if n > MAX_EXACT_CUBE_N {
        return Err(Error::CapacityExceeded {
            what: "N",
            value: n as u64,
            cap: MAX_EXACT_CUBE_N as u64,
        });
    }
    let (scaled, scale) = common_scale(a.as_slice());
    let total = 1u64 << n;
    match try_i128(&scaled) {
        Some(vals) => {
            let mut out = HashMap::new();
            dfs_cube_i128(&vals, 0, 0, &mut out);
            Ok(finish_distribution(Some(out), None, scale, total))
        }
        None => {
            let mut out = HashMap::new();
            dfs_cube_big(&scaled, 0, BigInt::zero(), &mut out);
            Ok(finish_distribution(None, Some(out), scale, total))
        }
    }
}

/// `E |S|^p` under the zero-sum constraint.
pub fn exact_moment(a: &WeightVector, order: MomentOrder) -> Result<Value> {
    Ok(zero_sum_distribution(a)?.abs_moment(order))
}

/// Closed form for the zero-sum second moment:
/// `E |S|^2 = (N ||a||^2 - (sum a)^2) / (N - 1)`.
pub fn second_moment_closed_form(a: &WeightVector) -> Result<BigRational> {
    let n = a.require_even()?;
    let n_rat = rat_int(n as i64);
    let total = a.sum();
    Ok((n_rat * a.norm_sq() - &total * &total) / rat_int(n as i64 - 1))
}

/// The radicand of the constrained bound's right-hand side:
/// `||a||^2 - N * mean(a)^2`, which equals `||a - mean(a)||^2 >= 0`.
pub fn khintchine_radicand(a: &WeightVector) -> BigRational {
    let total = a.sum();
    let r = a.norm_sq() - &total * &total / rat_int(a.len() as i64);
    debug_assert!(!r.is_negative());
    r
}

pub(crate) fn require_order_at_least_two(order: MomentOrder) -> Result<()> {
    if order.as_f64() < 2.0 {
        return Err(Error::InvalidParameter(format!(
            "the moment bounds are stated for p >= 2, got p = {order}"
        )));
    }
    Ok(())
}

/// Checks the two-link constrained moment chain for `S = sum a_i e_i`
/// under the zero-sum sign measure:
///
/// 1. `(E |S|^p)^(1/p) <= sqrt(2p) * sqrt(||a||^2 - N mean(a)^2)`
/// 2. `sqrt(2p) * sqrt(||a||^2 - N mean(a)^2) <= sqrt(2p) * sqrt(E |S|^2)`
///
/// For integer `p` both verdicts are exact: the first by comparing p-th
/// powers (a rational against `scale * sqrt(root)`), the second by the
/// p-independent rational comparison of the radicands. Reported lhs/rhs
/// values are in the root domain.
pub fn constrained_khintchine_check(
    a: &WeightVector,
    order: MomentOrder,
    tol: Tolerance,
) -> Result<[BoundReport; 2]> {
    require_order_at_least_two(order)?;
    let n = a.require_even()?;
    let dist = zero_sum_distribution(a)?;
    let radicand = khintchine_radicand(a);
    let p_f64 = order.as_f64();
    let rhs1_sq = rat_int(2) * BigRational::from_float(p_f64).expect("finite order") * &radicand;
    let rhs1_approx = to_f64(&rhs1_sq).sqrt();

    let first = match order {
        MomentOrder::Integer(p) => {
            let mp = dist.abs_moment(order);
            let mp_exact = mp.exact.clone().expect("integer order is exact");
            let base = rat_int(2 * p as i64) * &radicand;
            let rhs_pow = pow_half(&base, p);
            let satisfied = rhs_pow.cmp_rational(&mp_exact) != Ordering::Less;
            BoundReport::exact_verdict(
                statements::CHAIN_FIRST,
                Value::approx(mp.approx.powf(1.0 / p_f64)),
                Value::approx(rhs1_approx),
                satisfied,
            )
            .with_param("lhs_pow_p", format_rational(&mp_exact))
            .with_param("rhs_sq", format_rational(&base))
            .with_note("verdict from exact comparison of p-th powers")
        }
        MomentOrder::Real(_) => {
            let mp = dist.abs_moment(order);
            BoundReport::approx_verdict(
                statements::CHAIN_FIRST,
                mp.approx.powf(1.0 / p_f64),
                rhs1_approx,
                tol,
            )
            .with_note("real moment order evaluated in floating point")
        }
    };

    let m2 = dist
        .abs_moment(MomentOrder::Integer(2))
        .exact
        .expect("second moment is exact");
    let rhs2_sq = rat_int(2) * BigRational::from_float(p_f64).expect("finite order") * &m2;
    let second = BoundReport::exact_verdict(
        statements::CHAIN_SECOND,
        Value::approx(rhs1_approx),
        Value::approx(to_f64(&rhs2_sq).sqrt()),
        radicand <= m2,
    )
    .with_param("lhs_sq_over_2p", format_rational(&radicand))
    .with_param("rhs_sq_over_2p", format_rational(&m2))
    .with_note("verdict from exact comparison of the squared sides");

    let decorate = |r: BoundReport| r.with_param("N", n).with_param("p", order);
    Ok([decorate(first), decorate(second)])
}

/// Checks the unconstrained bound `(E |S|^p)^(1/p) <= sqrt(p) * ||a||_2`
/// with independent uniform signs, by full cube enumeration.
pub fn classical_khintchine_check(
    a: &WeightVector,
    order: MomentOrder,
    tol: Tolerance,
) -> Result<BoundReport> {
    require_order_at_least_two(order)?;
    let dist = full_cube_distribution(a)?;
    let norm_sq = a.norm_sq();
    let p_f64 = order.as_f64();
    let rhs_approx = (p_f64 * to_f64(&norm_sq)).sqrt();
    let report = match order {
        MomentOrder::Integer(p) => {
            let mp = dist.abs_moment(order);
            let mp_exact = mp.exact.clone().expect("integer order is exact");
            let base = rat_int(p as i64) * &norm_sq;
            let rhs_pow = pow_half(&base, p);
            let satisfied = rhs_pow.cmp_rational(&mp_exact) != Ordering::Less;
            BoundReport::exact_verdict(
                statements::CLASSICAL_KHINTCHINE,
                Value::approx(mp.approx.powf(1.0 / p_f64)),
                Value::approx(rhs_approx),
                satisfied,
            )
            .with_param("lhs_pow_p", format_rational(&mp_exact))
            .with_param("rhs_sq", format_rational(&base))
            .with_note("verdict from exact comparison of p-th powers")
        }
        MomentOrder::Real(_) => {
            let mp = dist.abs_moment(order);
            BoundReport::approx_verdict(
                statements::CLASSICAL_KHINTCHINE,
                mp.approx.powf(1.0 / p_f64),
                rhs_approx,
                tol,
            )
            .with_note("real moment order evaluated in floating point")
        }
    };
    Ok(report.with_param("N", a.len()).with_param("p", order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use proptest::prelude::*;

    fn w(vals: &[i64]) -> WeightVector {
        WeightVector::from_ints(vals).unwrap()
    }

    fn exact(a: &WeightVector, p: u32) -> BigRational {
        exact_moment(a, MomentOrder::Integer(p)).unwrap().exact.unwrap()
    }

    #[test]
    fn zero_sum_moment_oracles() {
        let a = w(&[1, -1]);
        assert_eq!(exact(&a, 1), rat_int(2));
        assert_eq!(exact(&a, 2), rat_int(4));
        assert_eq!(exact(&a, 4), rat_int(16));

        let a = w(&[1, -1, 0, 0]);
        assert_eq!(exact(&a, 1), rat(4, 3));
        assert_eq!(exact(&a, 2), rat(8, 3));
        assert_eq!(exact(&a, 4), rat(32, 3));

        let a = w(&[1, 0, 0, 0]);
        assert_eq!(exact(&a, 2), rat_int(1));
        assert_eq!(exact(&a, 4), rat_int(1));

        let a = w(&[3, 1, -2, -2]);
        assert_eq!(exact(&a, 2), rat_int(24));
        assert_eq!(exact(&a, 4), rat_int(1376));
    }

    #[test]
    fn closed_form_uses_n_minus_one_denominator() {
        let a = w(&[1, -1]);
        let closed = second_moment_closed_form(&a).unwrap();
        assert_eq!(closed, rat_int(4));
        assert_eq!(closed, exact(&a, 2));
        // the same expression over N(N-1) would give 2, which enumeration refutes
        assert_ne!(closed, rat_int(2));

        assert_eq!(second_moment_closed_form(&w(&[3, 1, -2, -2])).unwrap(), rat_int(24));
        assert_eq!(second_moment_closed_form(&w(&[1, 0, 0, 0])).unwrap(), rat_int(1));
        assert!(second_moment_closed_form(&w(&[1, 2, 3])).is_err());
    }

    #[test]
    fn radicand_oracles() {
        assert_eq!(khintchine_radicand(&w(&[1, 0, 0, 0])), rat(3, 4));
        assert_eq!(khintchine_radicand(&w(&[3, 1, -2, -2])), rat_int(18));
        assert_eq!(khintchine_radicand(&w(&[5, 5])), rat_int(0));
    }

    #[test]
    fn constrained_chain_oracles() {
        let tol = Tolerance::default();
        let a = w(&[3, 1, -2, -2]);
        let [first, second] = constrained_khintchine_check(&a, MomentOrder::Integer(4), tol).unwrap();
        assert!(first.satisfied);
        assert_eq!(first.params["lhs_pow_p"], "1376");
        assert_eq!(first.params["rhs_sq"], "144");
        assert!((first.lhs.approx - 1376f64.powf(0.25)).abs() < 1e-12);
        assert!((first.rhs.approx - 12.0).abs() < 1e-12);
        assert!(second.satisfied);
        assert_eq!(second.params["lhs_sq_over_2p"], "18");
        assert_eq!(second.params["rhs_sq_over_2p"], "24");

        // odd integer order is still exact
        let [first, _] = constrained_khintchine_check(&a, MomentOrder::Integer(3), tol).unwrap();
        assert!(first.satisfied);
        assert_eq!(first.params["lhs_pow_p"], "176");

        assert!(constrained_khintchine_check(&a, MomentOrder::Integer(1), tol).is_err());
        assert!(constrained_khintchine_check(&w(&[1, 2, 3]), MomentOrder::Integer(2), tol).is_err());
    }

    #[test]
    fn constrained_chain_handles_zero_weights() {
        let tol = Tolerance::default();
        let [first, second] = constrained_khintchine_check(&w(&[0, 0]), MomentOrder::Integer(2), tol).unwrap();
        assert!(first.satisfied && second.satisfied);
        assert_eq!(first.lhs.approx, 0.0);
        assert_eq!(first.rhs.approx, 0.0);
    }

    #[test]
    fn classical_oracles() {
        let tol = Tolerance::default();
        let r = classical_khintchine_check(&w(&[1, 1]), MomentOrder::Integer(2), tol).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.params["lhs_pow_p"], "2");
        assert!((r.lhs.approx - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.rhs.approx - 2.0).abs() < 1e-12);

        let r = classical_khintchine_check(&w(&[1, 1, 1, 1]), MomentOrder::Integer(4), tol).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.params["lhs_pow_p"], "40");
        assert!((r.rhs.approx - 4.0).abs() < 1e-12);
    }

    #[test]
    fn real_order_matches_integer_order() {
        let tol = Tolerance::default();
        let a = w(&[3, 1, -2, -2]);
        for p in [2u32, 3, 4] {
            let [int_first, _] = constrained_khintchine_check(&a, MomentOrder::Integer(p), tol).unwrap();
            let [real_first, _] =
                constrained_khintchine_check(&a, MomentOrder::Real(p as f64), tol).unwrap();
            assert!((int_first.lhs.approx - real_first.lhs.approx).abs() < 1e-12);
            assert!((int_first.rhs.approx - real_first.rhs.approx).abs() < 1e-12);
            assert!(real_first.satisfied);
        }
    }

    #[test]
    fn enumeration_basics() {
        let all: Vec<_> = enumerate_zero_sum_signs(4).unwrap().collect();
        assert_eq!(all.len(), 6);
        for s in &all {
            assert!(s.is_zero_sum());
            assert_eq!(s.len(), 4);
        }
        let dedup: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(dedup.len(), 6);

        assert_eq!(enumerate_zero_sum_signs(2).unwrap().count(), 2);
        assert_eq!(enumerate_zero_sum_signs(12).unwrap().count(), 924);
        assert!(enumerate_zero_sum_signs(3).is_err());
        assert!(enumerate_zero_sum_signs(0).is_err());
        assert!(matches!(
            enumerate_zero_sum_signs(26),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn weighted_sum_checks_lengths() {
        let a = w(&[1, -1]);
        let s = SignVector::new(vec![1, -1]).unwrap();
        assert_eq!(weighted_sum(&a, &s).unwrap(), rat_int(2));
        let s3 = SignVector::new(vec![1, -1, 1]).unwrap();
        assert!(weighted_sum(&a, &s3).is_err());
        assert!(SignVector::new(vec![1, 0]).is_err());
    }

    #[test]
    fn distribution_shape() {
        let d = zero_sum_distribution(&w(&[1, -1, 0, 0])).unwrap();
        assert_eq!(d.total(), 6);
        assert_eq!(d.probability_of(&rat_int(2)), rat(1, 3));
        assert_eq!(d.probability_of(&rat_int(-2)), rat(1, 3));
        assert_eq!(d.probability_of(&rat_int(0)), rat(1, 3));
        assert_eq!(d.probability_of(&rat_int(1)), rat_int(0));
        assert_eq!(d.probability_of(&rat(1, 7)), rat_int(0));

        let d = full_cube_distribution(&w(&[1, 1, 1, 1])).unwrap();
        assert_eq!(d.total(), 16);
        assert_eq!(d.probability_of(&rat_int(4)), rat(1, 16));
        assert_eq!(d.probability_of(&rat_int(0)), rat(6, 16));
        assert_eq!(d.abs_moment(MomentOrder::Integer(4)).exact, Some(rat_int(40)));
    }

    #[test]
    fn huge_weights_take_the_big_integer_path() {
        let big = BigInt::from(10u8).pow(30);
        let a = WeightVector::new(vec![
            BigRational::from_integer(big.clone()),
            BigRational::from_integer(-big.clone()),
        ])
        .unwrap();
        let m2 = exact_moment(&a, MomentOrder::Integer(2)).unwrap().exact.unwrap();
        assert_eq!(m2, BigRational::from_integer(BigInt::from(4u8) * &big * &big));
    }

    fn weight_strategy(n: usize) -> impl Strategy<Value = WeightVector> {
        prop::collection::vec((-9i64..=9, 1i64..=9), n)
            .prop_map(|pairs| {
                WeightVector::new(pairs.into_iter().map(|(num, den)| rat(num, den)).collect())
                    .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, .. ProptestConfig::default() })]

        #[test]
        fn translation_leaves_zero_sum_moments_alone(a in weight_strategy(6), c_num in -9i64..=9, c_den in 1i64..=9, p in 1u32..=5) {
            let c = rat(c_num, c_den);
            let shifted = WeightVector::new(a.as_slice().iter().map(|v| v + &c).collect()).unwrap();
            prop_assert_eq!(exact(&a, p), exact(&shifted, p));
        }

        #[test]
        fn negation_and_reversal_leave_moments_alone(a in weight_strategy(6), p in 1u32..=5) {
            let negated = WeightVector::new(a.as_slice().iter().map(|v| -v).collect()).unwrap();
            let reversed = WeightVector::new(a.as_slice().iter().rev().cloned().collect()).unwrap();
            prop_assert_eq!(exact(&a, p), exact(&negated, p));
            prop_assert_eq!(exact(&a, p), exact(&reversed, p));
        }

        #[test]
        fn lyapunov_monotonicity(a in weight_strategy(6)) {
            let m2 = exact(&a, 2);
            let m4 = exact(&a, 4);
            let m6 = exact(&a, 6);
            // (E|S|^2)^(1/2) <= (E|S|^4)^(1/4) <= (E|S|^6)^(1/6), compared
            // after raising to suitable powers
            prop_assert!(&m2 * &m2 <= m4.clone());
            prop_assert!(&m4 * &m4 * &m4 <= &m6 * &m6);
        }

        #[test]
        fn closed_form_matches_enumeration(a in weight_strategy(4)) {
            prop_assert_eq!(second_moment_closed_form(&a).unwrap(), exact(&a, 2));
        }

        #[test]
        fn constrained_chain_holds_on_random_weights(a in weight_strategy(6), p in 2u32..=5) {
            let [first, second] = constrained_khintchine_check(&a, MomentOrder::Integer(p), Tolerance::default()).unwrap();
            prop_assert!(first.satisfied, "first link failed: {}", first.summary_line());
            prop_assert!(second.satisfied, "second link failed: {}", second.summary_line());
        }

        #[test]
        fn classical_bound_holds_on_random_weights(a in weight_strategy(7), p in 2u32..=4) {
            let r = classical_khintchine_check(&a, MomentOrder::Integer(p), Tolerance::default()).unwrap();
            prop_assert!(r.satisfied, "classical bound failed: {}", r.summary_line());
        }

        #[test]
        fn single_flip_leaves_cube_distribution_alone(a in weight_strategy(5), idx in 0usize..5) {
            let mut flipped = a.as_slice().to_vec();
            flipped[idx] = -&flipped[idx];
            let flipped = WeightVector::new(flipped).unwrap();
            let d1 = full_cube_distribution(&a).unwrap();
            let d2 = full_cube_distribution(&flipped).unwrap();
            prop_assert_eq!(d1.entries(), d2.entries());
            prop_assert_eq!(d1.scale(), d2.scale());
        }

        #[test]
        fn zero_sum_distribution_is_symmetric(a in weight_strategy(6)) {
            let d = zero_sum_distribution(&a).unwrap();
            prop_assert_eq!(d.total(), 20);
            for (v, count) in d.entries() {
                let mirrored = d.probability_of(&BigRational::new(-v.clone(), d.scale().clone()));
                prop_assert_eq!(mirrored, BigRational::new(BigInt::from(*count), BigInt::from(d.total())));
            }
        }
    }
}
