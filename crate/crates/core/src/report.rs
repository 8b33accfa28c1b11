//! The report vocabulary every checker speaks: a [`BoundReport`] records one
//! verified inequality with both sides, the slack, the verdict, and how the
//! verdict was reached. Exact-method reports carry rationals alongside the
//! f64 approximations so downstream consumers can re-verify them.

use std::collections::BTreeMap;

use num::rational::BigRational;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::numeric::{format_rational, to_f64};

/// Stable statement identifiers used in report output and sweep files.
/// These are wire-format strings; once published they never change.
pub mod statements {
    pub const CLASSICAL_KHINTCHINE: &str = "eq1";
    pub const CHAIN_FIRST: &str = "eq4-chain-1";
    pub const CHAIN_SECOND: &str = "eq4-chain-2";
    pub const BRIDGE: &str = "eq6-bridge";
    pub const SECOND_MOMENT: &str = "second-moment";
    pub const CENTRAL_MOMENT_TIGHT: &str = "prop31-sqrt2";
    pub const CENTRAL_MOMENT_DIRECT: &str = "prop31-direct2";
    pub const ZERO_ONE_MOMENT: &str = "cor33";
    pub const COUNT_IDENTITY: &str = "qk-identity";
    pub const PSI2_EMPIRICAL: &str = "psi2-cemp";
    pub const STIRLING_LOWER: &str = "stirling-lower";
    pub const STIRLING_UPPER: &str = "stirling-upper";
    pub const BINOMIAL_RATIO: &str = "eq12-ratio";
    pub const GAMMA_POWER: &str = "gamma-power";
    pub const EXTENDED_RATIO: &str = "rem35-ratio";
    pub const MAUREY_TAIL: &str = "eq7";
    pub const PRODUCT_MOMENT: &str = "eq10";
    pub const PRODUCT_MOMENT_CHAINED: &str = "eq10-chained";
    pub const MOMENT_RATIO: &str = "m-ratio";
    pub const LIPSCHITZ_BOUND: &str = "lipschitz-2ab";
}

/// How a report's verdict was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Enumeration or closed form over exact rationals; the verdict is a
    /// theorem about the stated instance.
    Exact,
    /// Seeded sampling; the verdict is a consistency statement, not a proof.
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// A numeric quantity in a report: always an f64 approximation, plus the
/// exact rational when the computation produced one.
#[derive(Clone, Debug, PartialEq)]
pub struct Value {
    pub approx: f64,
    pub exact: Option<BigRational>,
}

impl Value {
    pub fn approx(v: f64) -> Self {
        Value { approx: v, exact: None }
    }

    pub fn exact(q: BigRational) -> Self {
        Value { approx: to_f64(&q), exact: Some(q) }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Value", if self.exact.is_some() { 2 } else { 1 })?;
        st.serialize_field("dec", &format!("{}", self.approx))?;
        if let Some(q) = &self.exact {
            st.serialize_field("rat", &format_rational(q))?;
        }
        st.end()
    }
}

/// Relative tolerance applied to floating-point verdicts. A slack in
/// `[-rel*|rhs|, 0)` is reported as satisfied-with-warning rather than a
/// violation; exact verdicts never consult it.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(rel: f64) -> Self {
        Tolerance { rel }
    }

    /// (satisfied, warning) for a floating-point slack = rhs - lhs.
    pub fn judge(&self, slack: f64, rhs: f64) -> (bool, bool) {
        if slack >= 0.0 {
            (true, false)
        } else if slack >= -self.rel * rhs.abs() {
            (true, true)
        } else {
            (false, false)
        }
    }
}

/// One verified inequality instance.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub id: &'static str,
    pub params: BTreeMap<String, String>,
    pub lhs: Value,
    pub rhs: Value,
    pub slack: Value,
    pub satisfied: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub warning: bool,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub notes: Vec<String>,
}

impl BoundReport {
    /// Report whose verdict was decided by exact rational comparison.
    /// `satisfied` must come from that comparison, not from the approximations.
    pub fn exact_verdict(id: &'static str, lhs: Value, rhs: Value, satisfied: bool) -> Self {
        let slack = match (&lhs.exact, &rhs.exact) {
            (Some(l), Some(r)) => Value::exact(r - l),
            _ => Value::approx(rhs.approx - lhs.approx),
        };
        BoundReport {
            id,
            params: BTreeMap::new(),
            lhs,
            rhs,
            slack,
            satisfied,
            warning: false,
            method: Method::Exact,
            samples: None,
            seed: None,
            notes: Vec::new(),
        }
    }

    /// Report judged in floating point under `tol`.
    pub fn approx_verdict(id: &'static str, lhs: f64, rhs: f64, tol: Tolerance) -> Self {
        let slack = rhs - lhs;
        let (satisfied, warning) = tol.judge(slack, rhs);
        BoundReport {
            id,
            params: BTreeMap::new(),
            lhs: Value::approx(lhs),
            rhs: Value::approx(rhs),
            slack: Value::approx(slack),
            satisfied,
            warning,
            method: Method::Exact,
            samples: None,
            seed: None,
            notes: Vec::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_sampling(mut self, samples: u64, seed: u64) -> Self {
        self.method = Method::MonteCarlo;
        self.samples = Some(samples);
        self.seed = Some(seed);
        self
    }

    /// Human-oriented single-line rendering.
    pub fn summary_line(&self) -> String {
        let verdict = match (self.satisfied, self.warning) {
            (true, false) => "holds",
            (true, true) => "holds (within tolerance)",
            (false, _) => "VIOLATED",
        };
        format!(
            "{}: lhs={:.6e} rhs={:.6e} slack={:.3e} [{}] ({})",
            self.id, self.lhs.approx, self.rhs.approx, self.slack.approx, verdict, self.method
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn tolerance_band() {
        let tol = Tolerance::default();
        assert_eq!(tol.judge(0.0, 5.0), (true, false));
        assert_eq!(tol.judge(1.0, 5.0), (true, false));
        assert_eq!(tol.judge(-4e-9, 5.0), (true, true));
        assert_eq!(tol.judge(-6e-9, 5.0), (false, false));
        // zero rhs leaves no warning band
        assert_eq!(tol.judge(-1e-300, 0.0), (false, false));
    }

    #[test]
    fn exact_report_slack_is_rational() {
        let r = BoundReport::exact_verdict(
            statements::SECOND_MOMENT,
            Value::exact(rat(1, 3)),
            Value::exact(rat(1, 2)),
            true,
        );
        assert_eq!(r.slack.exact, Some(rat(1, 6)));
        assert!(r.satisfied);
        assert!(!r.warning);
    }

    #[test]
    fn json_shape() {
        let r = BoundReport::exact_verdict(
            statements::CHAIN_FIRST,
            Value::exact(rat(3, 2)),
            Value::exact(rat(2, 1)),
            true,
        )
        .with_param("N", 4)
        .with_param("p", 2);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["id"], "eq4-chain-1");
        assert_eq!(json["lhs"]["dec"], "1.5");
        assert_eq!(json["lhs"]["rat"], "3/2");
        assert_eq!(json["slack"]["rat"], "1/2");
        assert_eq!(json["method"], "exact");
        assert_eq!(json["params"]["N"], "4");
        assert!(json.get("samples").is_none());
        assert!(json.get("warning").is_none());
        assert_eq!(json["notes"], serde_json::json!([]));
    }

    #[test]
    fn monte_carlo_report_carries_seed_and_samples() {
        let r = BoundReport::approx_verdict(statements::MAUREY_TAIL, 0.1, 0.5, Tolerance::default())
            .with_sampling(10_000, 42);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["method"], "monte-carlo");
        assert_eq!(json["samples"], 10_000);
        assert_eq!(json["seed"], 42);
    }
}
