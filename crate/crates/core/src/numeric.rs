//! Exact-arithmetic building blocks shared by every checker: rational
//! parsing/formatting, robust conversions to `f64`, the `scale + coeff*sqrt(root)`
//! radical expressions used for exact comparisons against rationals, and
//! dyadic (fixed-point) evaluation of sqrt/exp/ln at a configurable bit count.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use num_integer::Integer;
use num_traits::ToPrimitive;
use std::cmp::Ordering;

use crate::error::Error;

/// Shorthand for an exact rational from an integer pair.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Parses "num/den" or a plain integer. Whitespace is trimmed; decimals are
/// rejected so that file inputs stay exact.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    let mk_err = |_| Error::Parse(format!("cannot parse rational from {s:?} (expected \"num/den\" or an integer)"));
    match s.split_once('/') {
        Some((n, d)) => {
            let num: BigInt = n.trim().parse().map_err(mk_err)?;
            let den: BigInt = d.trim().parse().map_err(mk_err)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(num, den))
        }
        None => {
            let num: BigInt = s.parse().map_err(mk_err)?;
            Ok(BigRational::from_integer(num))
        }
    }
}

/// Canonical "num/den" form ("num" alone when the denominator is 1).
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// log2 of a positive big integer, accurate to ~1 ulp of f64.
pub fn log2_bigint(x: &BigInt) -> f64 {
    debug_assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 53;
    let top: BigInt = x >> shift;
    shift as f64 + top.to_f64().expect("53-bit value").log2()
}

/// Natural log of a positive rational. Works far outside the f64 range
/// (e.g. tail probabilities with thousand-digit denominators).
pub fn ln_rational(q: &BigRational) -> f64 {
    debug_assert!(q.is_positive());
    std::f64::consts::LN_2 * (log2_bigint(q.numer()) - log2_bigint(q.denom()))
}

/// Rational to f64, falling back to a log-scaled estimate when the plain
/// conversion over- or underflows.
pub fn to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() || q.numer().is_zero() {
            return v;
        }
    }
    if q.numer().is_zero() {
        return 0.0;
    }
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    let log2 = log2_bigint(&q.numer().abs()) - log2_bigint(q.denom());
    sign * log2.exp2()
}

/// Exact conversion of a finite f64 (every finite f64 is a dyadic rational).
pub fn from_f64(v: f64) -> Result<BigRational, Error> {
    BigRational::from_float(v).ok_or_else(|| Error::InvalidParameter(format!("non-finite value {v}")))
}

/// `base^(p/2)` as an exact radical expression (`base >= 0`).
pub fn pow_half(base: &BigRational, p: u32) -> Radical {
    debug_assert!(!base.is_negative());
    if p % 2 == 0 {
        Radical::rational(base.pow((p / 2) as i32))
    } else if p == 1 {
        Radical::sqrt(base.clone())
    } else {
        Radical {
            scale: base.pow(((p - 1) / 2) as i32),
            root: base.clone(),
        }
    }
}

/// `scale * sqrt(root)` with `root >= 0`: the exact form taken by every
/// right-hand side of the moment bounds once integer powers are cleared.
/// Comparisons against rationals are decided by squaring, so no rounding
/// is involved.
#[derive(Clone, Debug, PartialEq)]
pub struct Radical {
    pub scale: BigRational,
    pub root: BigRational,
}

impl Radical {
    pub fn rational(q: BigRational) -> Self {
        Radical { scale: q, root: BigRational::one() }
    }

    pub fn sqrt(root: BigRational) -> Self {
        debug_assert!(!root.is_negative());
        Radical { scale: BigRational::one(), root }
    }

    pub fn mul_rational(&self, q: &BigRational) -> Self {
        Radical { scale: &self.scale * q, root: self.root.clone() }
    }

    /// Multiplies two radicals over the same root: scale1*scale2*root.
    pub fn mul_same_root(&self, other: &Radical) -> Option<Self> {
        if self.root != other.root {
            return None;
        }
        Some(Radical {
            scale: &self.scale * &other.scale * &self.root,
            root: BigRational::one(),
        })
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.scale) * to_f64(&self.root).sqrt()
    }

    /// Exact ordering of `scale*sqrt(root)` versus a rational, decided by
    /// squaring once the signs agree.
    pub fn cmp_rational(&self, q: &BigRational) -> Ordering {
        let self_negative = self.scale.is_negative() && !self.root.is_zero();
        match (self_negative, q.is_negative()) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (false, false) => {
                let sq_self = &self.scale * &self.scale * &self.root;
                sq_self.cmp(&(q * q))
            }
            (true, true) => {
                let sq_self = &self.scale * &self.scale * &self.root;
                (q * q).cmp(&sq_self)
            }
        }
    }
}

/// `a + b*sqrt(root)` with rational `a`, `b` and `root >= 0`. Closed under
/// multiplication, which is what lets `(mean + c*sqrt(q))^p` be expanded and
/// compared exactly against a rational p-th moment.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadExpr {
    pub a: BigRational,
    pub b: BigRational,
    pub root: BigRational,
}

impl QuadExpr {
    pub fn new(a: BigRational, b: BigRational, root: BigRational) -> Self {
        debug_assert!(!root.is_negative());
        QuadExpr { a, b, root }
    }

    pub fn rational(a: BigRational) -> Self {
        QuadExpr { a, b: BigRational::zero(), root: BigRational::zero() }
    }

    pub fn mul(&self, other: &QuadExpr) -> QuadExpr {
        debug_assert_eq!(self.root, other.root);
        QuadExpr {
            a: &self.a * &other.a + &self.b * &other.b * &self.root,
            b: &self.a * &other.b + &self.b * &other.a,
            root: self.root.clone(),
        }
    }

    pub fn pow(&self, exp: u32) -> QuadExpr {
        let mut acc = QuadExpr {
            a: BigRational::one(),
            b: BigRational::zero(),
            root: self.root.clone(),
        };
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.a) + to_f64(&self.b) * to_f64(&self.root).sqrt()
    }

    /// Exact ordering of `a + b*sqrt(root)` versus a rational `q`.
    pub fn cmp_rational(&self, q: &BigRational) -> Ordering {
        // sign of (a - q) + b*sqrt(root)
        let e = &self.a - q;
        if self.b.is_zero() || self.root.is_zero() {
            return e.cmp(&BigRational::zero());
        }
        let b2r = &self.b * &self.b * &self.root;
        let e2 = &e * &e;
        if self.b.is_positive() {
            if !e.is_negative() {
                // both parts >= 0, zero only if e == 0 and b^2 root == 0
                if e.is_zero() && b2r.is_zero() { Ordering::Equal } else { Ordering::Greater }
            } else {
                b2r.cmp(&e2)
            }
        } else {
            // b < 0: e - |b| sqrt(root)
            if !e.is_positive() {
                if e.is_zero() && b2r.is_zero() { Ordering::Equal } else { Ordering::Less }
            } else {
                e2.cmp(&b2r)
            }
        }
    }
}

/// Fixed decimal rendering (truncated toward zero) of a rational.
pub fn decimal_string(q: &BigRational, frac_digits: usize) -> String {
    let neg = q.is_negative();
    let abs = q.abs();
    let int = abs.to_integer();
    let frac = &abs - BigRational::from_integer(int.clone());
    let scale = BigInt::from(10u32).pow(frac_digits as u32);
    let frac_scaled = (frac * BigRational::from_integer(scale)).to_integer();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&int.to_string());
    if frac_digits > 0 {
        out.push('.');
        let digits = frac_scaled.to_string();
        for _ in digits.len()..frac_digits {
            out.push('0');
        }
        out.push_str(&digits);
    }
    out
}

// ---------------------------------------------------------------------------
// Dyadic high-precision evaluation (user-set bit count).
//
// Values are carried as BigInt fixed-point numbers scaled by 2^F. Operations
// lose at most one ulp each; the guard bits added below keep the total error
// under 2^-bits for the argument ranges the engine produces.
// ---------------------------------------------------------------------------

/// Upper cap on `--precision-bits`; the stored pi constant runs out of digits
/// beyond this.
pub const MAX_PRECISION_BITS: u32 = 192;

/// Rational lower/upper bounds on pi, tight to 10^-64. Enough to decide any
/// comparison this engine performs and to render up to MAX_PRECISION_BITS.
pub fn pi_bounds() -> (BigRational, BigRational) {
    let num: BigInt = "31415926535897932384626433832795028841971693993751058209749445923"
        .parse()
        .expect("pi digits");
    let den = BigInt::from(10u32).pow(64);
    let lo = BigRational::new(num.clone(), den.clone());
    let hi = BigRational::new(num + BigInt::one(), den);
    (lo, hi)
}

fn fx_from_rational(q: &BigRational, frac_bits: u64) -> BigInt {
    // round-to-nearest: floor((2*(num << f) + den) / (2*den))
    let num2: BigInt = (q.numer() << (frac_bits + 1)) + q.denom();
    num2.div_floor(&(q.denom() << 1u8))
}

fn fx_mul(a: &BigInt, b: &BigInt, frac_bits: u64) -> BigInt {
    (a * b) >> frac_bits
}

fn fx_to_rational(v: BigInt, frac_bits: u64) -> BigRational {
    BigRational::new(v, BigInt::one() << frac_bits)
}

/// Lower and upper dyadic bounds on sqrt(q), each within 2^-bits of the truth.
pub fn sqrt_bounds(q: &BigRational, bits: u32) -> Result<(BigRational, BigRational), Error> {
    if q.is_negative() {
        return Err(Error::InvalidParameter("sqrt of a negative rational".into()));
    }
    let f = bits as u64;
    // sqrt(n/d) = sqrt(n*d)/d; floor(sqrt(n*d) * 2^f) via integer sqrt.
    let scaled: BigInt = (q.numer() * q.denom()) << (2 * f);
    let root = scaled.sqrt();
    let den: BigInt = q.denom() << f;
    let lo = BigRational::new(root.clone(), den.clone());
    let hi = BigRational::new(root + BigInt::one(), den);
    Ok((lo, hi))
}

/// exp(x) as a dyadic rational with absolute error below 2^-bits
/// (relative error below 2^-bits for x <= 0).
pub fn exp_dyadic(x: &BigRational, bits: u32) -> BigRational {
    if x.is_zero() {
        return BigRational::one();
    }
    // Halve the argument until |y| <= 1/2, evaluate the Taylor series in
    // fixed point, then square the result back up.
    let mag_log2 = x.numer().bits() as i64 - x.denom().bits() as i64;
    let m = (mag_log2 + 2).max(0) as u64;
    let f = bits as u64 + m + 16;
    let y = x / BigRational::from_integer(BigInt::one() << m);
    let y_fx = fx_from_rational(&y, f);
    let one_fx: BigInt = BigInt::one() << f;
    let mut sum = one_fx.clone();
    let mut term = one_fx;
    let mut k: u64 = 1;
    loop {
        term = fx_mul(&term, &y_fx, f);
        term = term.div_floor(&BigInt::from(k));
        if term.is_zero() {
            break;
        }
        sum += &term;
        k += 1;
    }
    let mut v = sum;
    for _ in 0..m {
        v = fx_mul(&v, &v, f);
    }
    fx_to_rational(v, f)
}

/// Directed rational bounds on exp(x): the truth lies inside the interval.
pub fn exp_bounds(x: &BigRational, bits: u32) -> (BigRational, BigRational) {
    let v = exp_dyadic(x, bits);
    let eps = BigRational::new(BigInt::one(), BigInt::one() << bits);
    let lo = (&v - &eps).max(BigRational::zero());
    (lo, v + eps)
}

fn atanh_series_fx(y_fx: &BigInt, f: u64) -> BigInt {
    // sum_{j>=0} y^(2j+1) / (2j+1), |y| < 1
    let y2 = fx_mul(y_fx, y_fx, f);
    let mut pow = y_fx.clone();
    let mut sum = BigInt::zero();
    let mut j: u64 = 0;
    loop {
        let term = pow.div_floor(&BigInt::from(2 * j + 1));
        if term.is_zero() {
            break;
        }
        sum += term;
        pow = fx_mul(&pow, &y2, f);
        j += 1;
    }
    sum
}

fn ln2_fx(f: u64) -> BigInt {
    // ln 2 = 2 atanh(1/3)
    let third = fx_from_rational(&rat(1, 3), f);
    atanh_series_fx(&third, f) << 1u8
}

/// ln(q) for q > 0 as a dyadic rational with absolute error below 2^-bits.
pub fn ln_dyadic(q: &BigRational, bits: u32) -> Result<BigRational, Error> {
    if !q.is_positive() {
        return Err(Error::InvalidParameter("ln of a non-positive rational".into()));
    }
    let f = bits as u64 + 16;
    // Normalize q = m * 2^e with m in [1, 2).
    let mut e = q.numer().bits() as i64 - q.denom().bits() as i64;
    let two = rat_int(2);
    let pow2 = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(BigInt::one() << k as u64)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-k) as u64)
        }
    };
    let mut m = q / pow2(e);
    while m < BigRational::one() {
        e -= 1;
        m = q / pow2(e);
    }
    while m >= two {
        e += 1;
        m = q / pow2(e);
    }
    let y = (&m - BigRational::one()) / (&m + BigRational::one());
    let y_fx = fx_from_rational(&y, f);
    let ln_m = atanh_series_fx(&y_fx, f) << 1u8;
    let total = ln_m + BigInt::from(e) * ln2_fx(f);
    Ok(fx_to_rational(total, f))
}
