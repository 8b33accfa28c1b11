//! Exact binomial machinery and the combinatorial inequalities the moment
//! bounds rest on: the central-binomial sandwich, the shifted-ratio chain,
//! the gamma-function power bound, and the general ratio condition together
//! with its explicit sufficiency threshold.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::numeric::{log2_bigint, pi_bounds};
use crate::report::{statements, BoundReport, Tolerance, Value};

/// Binomial coefficient as an exact integer; zero outside `0 <= k <= n`.
pub fn binomial(n: u64, k: i64) -> BigInt {
    if k < 0 || (k as u64) > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k as u64))
}

/// `n!` as an exact integer.
pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Resolves a comparison that depends on pi using directed rational bounds:
/// `strict` is the verdict under the unfavourable endpoint, `generous` under
/// the favourable one. When they agree the verdict is exact.
fn pi_directed_verdict(strict: bool, generous: bool) -> (bool, Option<&'static str>) {
    if strict == generous {
        (strict, None)
    } else {
        (generous, Some("verdict not separated by the stored pi interval; reported from the favourable endpoint"))
    }
}

/// Checks `4^n / sqrt(2 pi n) <= binomial(2n, n) <= 4^n / sqrt(pi n)`.
///
/// Both verdicts are exact: after squaring, each comparison is rational in
/// pi and is evaluated at directed rational bounds on pi.
///
/// # Returns
/// Two reports, lower bound first.
pub fn stirling_sandwich_check(n: u64) -> Result<[BoundReport; 2]> {
    if n == 0 {
        return Err(Error::InvalidParameter("the sandwich needs n >= 1".into()));
    }
    let central = binomial(2 * n, n as i64);
    let central_sq = BigRational::from_integer(&central * &central);
    let pow_sq = BigRational::from_integer(BigInt::one() << (4 * n));
    let (pi_lo, pi_hi) = pi_bounds();
    let nf = n as f64;
    let log2_central = log2_bigint(&central);

    // lower: 4^n / sqrt(2 pi n) <= C  <=>  2^(4n) <= C^2 * 2n * pi
    let rhs_sq = |pi: &BigRational| &central_sq * BigRational::from_integer(BigInt::from(2 * n)) * pi;
    let (lower_ok, lower_note) =
        pi_directed_verdict(pow_sq <= rhs_sq(&pi_lo), pow_sq <= rhs_sq(&pi_hi));
    let lower_lhs = (2.0 * nf - 0.5 * (2.0 * std::f64::consts::PI * nf).log2()).exp2();
    let mut lower = BoundReport::exact_verdict(
        statements::STIRLING_LOWER,
        Value::approx(lower_lhs),
        Value::exact(BigRational::from_integer(central.clone())),
        lower_ok,
    )
    .with_param("n", n);
    if let Some(note) = lower_note {
        lower = lower.with_note(note);
    }

    // upper: C <= 4^n / sqrt(pi n)  <=>  C^2 * n * pi <= 2^(4n)
    let lhs_sq = |pi: &BigRational| &central_sq * BigRational::from_integer(BigInt::from(n)) * pi;
    let (upper_ok, upper_note) =
        pi_directed_verdict(lhs_sq(&pi_hi) <= pow_sq, lhs_sq(&pi_lo) <= pow_sq);
    let upper_rhs = (2.0 * nf - 0.5 * (std::f64::consts::PI * nf).log2()).exp2();
    let mut upper = BoundReport::exact_verdict(
        statements::STIRLING_UPPER,
        Value {
            approx: log2_central.exp2(),
            exact: Some(BigRational::from_integer(central)),
        },
        Value::approx(upper_rhs),
        upper_ok,
    )
    .with_param("n", n);
    if let Some(note) = upper_note {
        upper = upper.with_note(note);
    }
    Ok([lower, upper])
}

/// Checks the two-link ratio chain for a half-split row:
/// `binomial(2n - ell, n - k) / binomial(2n, n) <= 2 / 2^ell <= 1`
/// for every `k` in `0..=ell`, with `1 <= ell <= n`.
///
/// The report's lhs is the worst (largest) ratio over `k`, compared exactly.
pub fn binomial_ratio_chain_check(n: u64, ell: u64) -> Result<BoundReport> {
    if ell < 1 || ell > n {
        return Err(Error::InvalidParameter(format!(
            "the ratio chain needs 1 <= ell <= n, got n={n}, ell={ell}"
        )));
    }
    let denom = binomial(2 * n, n as i64);
    // Walks the numerators incrementally: with m = 2n - ell and r = n - k,
    // C(m, r - 1) = C(m, r) * r / (m - r + 1), an exact integer step.
    let mut num = binomial(2 * n - ell, n as i64);
    let mut max_num = num.clone();
    let mut argmax = 0u64;
    for k in 1..=ell {
        let r = n - k + 1;
        num = num * BigInt::from(r) / BigInt::from(n - ell + k);
        if num > max_num {
            max_num = num.clone();
            argmax = k;
        }
    }
    let max_ratio = BigRational::new(max_num, denom);
    let rhs = BigRational::new(BigInt::from(2), BigInt::one() << ell);
    let first_link = max_ratio <= rhs;
    let second_link = rhs <= BigRational::one();
    let report = BoundReport::exact_verdict(
        statements::BINOMIAL_RATIO,
        Value::exact(max_ratio),
        Value::exact(rhs),
        first_link && second_link,
    )
    .with_param("n", n)
    .with_param("ell", ell)
    .with_param("argmax_k", argmax)
    .with_note(if second_link {
        "second link 2/2^ell <= 1 holds"
    } else {
        "second link 2/2^ell <= 1 fails"
    });
    Ok(report)
}

/// Checks `Gamma(x) <= x^(x-1)` for `x >= 1` in floating point.
pub fn gamma_upper_bound_check(x: f64, tol: Tolerance) -> Result<BoundReport> {
    if !x.is_finite() || x < 1.0 || x > 170.0 {
        return Err(Error::InvalidParameter(format!(
            "the gamma bound is checked for 1 <= x <= 170, got {x}"
        )));
    }
    let lhs = gamma(x);
    let rhs = x.powf(x - 1.0);
    Ok(BoundReport::approx_verdict(statements::GAMMA_POWER, lhs, rhs, tol).with_param("x", x))
}

/// Outcome of [`extended_ratio_condition`].
#[derive(Clone, Debug)]
pub struct ExtendedRatio {
    /// Largest `binomial(N - ell, n - k) / binomial(N, n)` over `k` in `0..=ell`.
    pub max_ratio: BigRational,
    /// The `k` attaining `max_ratio`.
    pub argmax_k: u64,
    /// Whether `max_ratio <= 1` (non-strict).
    pub ratio_holds: bool,
    /// `N - log2(sqrt(pi) * binomial(N, n))`: `ell` at or above this value
    /// guarantees `ratio_holds`.
    pub threshold: f64,
    /// Whether `ell >= threshold`.
    pub sufficient_holds: bool,
}

/// Evaluates the general-row ratio condition
/// `binomial(N - ell, n - k) <= binomial(N, n)` for all `k` in `0..=ell`,
/// along with the explicit sufficiency threshold on `ell`.
///
/// The threshold is sufficient but not necessary, so `ratio_holds` may be
/// true while `sufficient_holds` is false; the converse never occurs.
pub fn extended_ratio_condition(big_n: u64, n: u64, ell: u64) -> Result<ExtendedRatio> {
    if n > big_n || ell > n {
        return Err(Error::InvalidParameter(format!(
            "the ratio condition needs ell <= n <= N, got N={big_n}, n={n}, ell={ell}"
        )));
    }
    let denom = binomial(big_n, n as i64);
    let mut max_ratio = BigRational::zero();
    let mut argmax = 0u64;
    for k in 0..=ell {
        let num = binomial(big_n - ell, n as i64 - k as i64);
        let ratio = BigRational::new(num, denom.clone());
        if ratio > max_ratio {
            max_ratio = ratio;
            argmax = k;
        }
    }
    let threshold =
        big_n as f64 - (0.5 * std::f64::consts::PI.log2() + log2_bigint(&denom));
    Ok(ExtendedRatio {
        ratio_holds: max_ratio <= BigRational::one(),
        argmax_k: argmax,
        max_ratio,
        threshold,
        sufficient_holds: ell as f64 >= threshold,
    })
}

/// Report form of [`extended_ratio_condition`] (lhs = worst ratio, rhs = 1).
pub fn extended_ratio_report(big_n: u64, n: u64, ell: u64) -> Result<BoundReport> {
    let outcome = extended_ratio_condition(big_n, n, ell)?;
    Ok(BoundReport::exact_verdict(
        statements::EXTENDED_RATIO,
        Value::exact(outcome.max_ratio.clone()),
        Value::exact(BigRational::one()),
        outcome.ratio_holds,
    )
    .with_param("N", big_n)
    .with_param("n", n)
    .with_param("ell", ell)
    .with_param("threshold", format!("{:.6}", outcome.threshold))
    .with_param("sufficient", outcome.sufficient_holds)
    .with_param("argmax_k", outcome.argmax_k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int, to_f64};

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(0, 0), BigInt::from(1));
        assert_eq!(binomial(4, 2), BigInt::from(6));
        assert_eq!(binomial(52, 5), BigInt::from(2_598_960));
        assert_eq!(binomial(30, 15), BigInt::from(155_117_520));
        assert_eq!(binomial(5, -1), BigInt::zero());
        assert_eq!(binomial(5, 7), BigInt::zero());
    }

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(1), BigInt::one());
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(factorial(20), BigInt::from(2_432_902_008_176_640_000u64));
    }

    #[test]
    fn binomial_satisfies_pascal_and_symmetry() {
        for n in 1..=64u64 {
            let mut row_sum = BigInt::zero();
            for k in 0..=n {
                let c = binomial(n, k as i64);
                assert_eq!(c, binomial(n - 1, k as i64 - 1) + binomial(n - 1, k as i64));
                assert_eq!(c, binomial(n, (n - k) as i64));
                row_sum += c;
            }
            assert_eq!(row_sum, BigInt::one() << n);
        }
    }

    #[test]
    fn binomial_satisfies_vandermonde() {
        for m in 0..=20u64 {
            for n in 0..=20u64 {
                for p in 0..=(m + n) {
                    let mut sum = BigInt::zero();
                    for k in 0..=p {
                        sum += binomial(m, k as i64) * binomial(n, p as i64 - k as i64);
                    }
                    assert_eq!(sum, binomial(m + n, p as i64));
                }
            }
        }
    }

    #[test]
    fn stirling_sandwich_small_values() {
        let [lower, upper] = stirling_sandwich_check(1).unwrap();
        assert!(lower.satisfied && upper.satisfied);
        assert!((lower.lhs.approx - 1.5957691216057308).abs() < 1e-12);
        assert_eq!(lower.rhs.exact, Some(rat_int(2)));
        assert!((upper.rhs.approx - 2.2567583341910251).abs() < 1e-12);

        let [lower, upper] = stirling_sandwich_check(2).unwrap();
        assert!((lower.lhs.approx - 4.5135166683820503).abs() < 1e-12);
        assert_eq!(lower.rhs.exact, Some(rat_int(6)));
        assert!((upper.rhs.approx - 6.3830764864229234).abs() < 1e-12);
        assert!(lower.satisfied && upper.satisfied);
    }

    #[test]
    fn stirling_sandwich_verdicts_stay_exact_up_to_200() {
        for n in 1..=200u64 {
            let [lower, upper] = stirling_sandwich_check(n).unwrap();
            assert!(lower.satisfied, "lower failed at n={n}");
            assert!(upper.satisfied, "upper failed at n={n}");
            assert!(lower.notes.is_empty(), "pi interval too loose at n={n}");
            assert!(upper.notes.is_empty(), "pi interval too loose at n={n}");
        }
        assert!(stirling_sandwich_check(0).is_err());
    }

    #[test]
    fn ratio_chain_oracles() {
        let r = binomial_ratio_chain_check(2, 2).unwrap();
        assert_eq!(r.lhs.exact, Some(rat(1, 3)));
        assert_eq!(r.rhs.exact, Some(rat(1, 2)));
        assert!(r.satisfied);
        assert_eq!(r.params["argmax_k"], "1");

        let r = binomial_ratio_chain_check(1, 1).unwrap();
        assert_eq!(r.lhs.exact, Some(rat(1, 2)));
        assert_eq!(r.rhs.exact, Some(rat_int(1)));
        assert!(r.satisfied);

        assert!(binomial_ratio_chain_check(3, 0).is_err());
        assert!(binomial_ratio_chain_check(3, 4).is_err());
    }

    #[test]
    fn ratio_chain_holds_through_n_30() {
        for n in 1..=30u64 {
            for ell in 1..=n {
                let r = binomial_ratio_chain_check(n, ell).unwrap();
                assert!(r.satisfied, "chain failed at n={n}, ell={ell}");
            }
        }
    }

    #[test]
    fn gamma_agrees_with_factorials() {
        let mut fact = 1.0f64;
        for k in 1..=20u64 {
            let g = gamma(k as f64);
            assert!((g - fact).abs() / fact < 1e-12, "Gamma({k}) = {g}, want {fact}");
            fact *= k as f64;
        }
    }

    #[test]
    fn gamma_power_bound_on_a_grid() {
        let tol = Tolerance::default();
        let mut x = 1.0f64;
        while x <= 50.0 {
            let r = gamma_upper_bound_check(x, tol).unwrap();
            assert!(r.satisfied, "gamma bound failed at x={x}");
            x += 0.25;
        }
        assert!(gamma_upper_bound_check(0.5, tol).is_err());
        assert!(gamma_upper_bound_check(f64::NAN, tol).is_err());
    }

    #[test]
    fn extended_ratio_oracles() {
        let r = extended_ratio_condition(4, 2, 0).unwrap();
        assert_eq!(r.max_ratio, rat_int(1));
        assert!(r.ratio_holds, "non-strict comparison admits equality");
        assert!(!r.sufficient_holds);
        assert!((r.threshold - 0.5893).abs() < 1e-3);

        let r = extended_ratio_condition(20, 10, 2).unwrap();
        assert_eq!(r.max_ratio, rat(48_620, 184_756));
        assert_eq!(r.argmax_k, 1);
        assert!(r.ratio_holds);

        assert!(extended_ratio_condition(4, 5, 0).is_err());
        assert!(extended_ratio_condition(4, 2, 3).is_err());
    }

    #[test]
    fn sufficiency_threshold_implies_ratio_holds() {
        for big_n in 1..=24u64 {
            for n in 1..=big_n {
                for ell in 0..=n {
                    let r = extended_ratio_condition(big_n, n, ell).unwrap();
                    if r.sufficient_holds {
                        assert!(
                            r.ratio_holds,
                            "sufficiency violated at N={big_n}, n={n}, ell={ell}: max ratio {}",
                            to_f64(&r.max_ratio)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn extended_ratio_report_shape() {
        // threshold at (20, 10) is 20 - log2(sqrt(pi) * 184756) ~ 1.68
        let r = extended_ratio_report(20, 10, 2).unwrap();
        assert_eq!(r.id, statements::EXTENDED_RATIO);
        assert!(r.satisfied);
        assert_eq!(r.params["sufficient"], "true");

        let r = extended_ratio_report(20, 10, 1).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.params["sufficient"], "false");
    }
}
