//! Report document assembly and rendering. Both formats are versioned,
//! carry the full configuration echo (seed included), and are byte-identical
//! across runs once the timestamp line is stripped.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::SystemTime;

use num::rational::BigRational;
use radbound::numeric::decimal_string;
use radbound::report::{BoundReport, Method, Value};
use serde::Serialize;

/// Bumped whenever a field or column changes meaning.
pub const FORMAT_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RADBOUND_OUT_DIR";

pub fn version_string() -> String {
    format!("{}+format.{}", env!("CARGO_PKG_VERSION"), FORMAT_VERSION)
}

pub fn rfc3339_now() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub command: String,
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub version: String,
    pub timestamp: String,
    pub config: ConfigEcho,
    pub reports: Vec<BoundReport>,
}

impl ReportDocument {
    pub fn new(command: &str, params: BTreeMap<String, String>, reports: Vec<BoundReport>) -> Self {
        ReportDocument {
            version: version_string(),
            timestamp: rfc3339_now(),
            config: ConfigEcho { command: command.to_owned(), params },
            reports,
        }
    }

    /// 0 when every exact check is satisfied; 1 otherwise. Monte-Carlo rows
    /// never influence the code.
    pub fn exit_code(&self) -> i32 {
        let violated = self
            .reports
            .iter()
            .any(|r| r.method == Method::Exact && !r.satisfied);
        if violated {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report document serializes");
        s.push('\n');
        s
    }

    /// Fixed-column CSV. `with_ratio` appends the sweep's ratio column and
    /// `note` becomes an extra comment line after the configuration echo.
    pub fn to_csv(&self, digits: usize, with_ratio: bool, note: Option<&str>) -> String {
        let mut out = String::new();
        out.push_str(&format!("# radbound {}\n", self.version));
        out.push_str(&format!("# timestamp: {}\n", self.timestamp));
        let config_pairs: Vec<String> = self
            .config
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        out.push_str(&format!(
            "# config: command={}{}{}\n",
            self.config.command,
            if config_pairs.is_empty() { "" } else { " " },
            config_pairs.join(" ")
        ));
        if let Some(note) = note {
            out.push_str(&format!("# note: {note}\n"));
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "statement_id",
            "N",
            "n",
            "ell",
            "p",
            "t",
            "lhs",
            "rhs",
            "slack",
            "satisfied",
            "method",
            "samples",
            "seed",
        ];
        if with_ratio {
            header.push("ratio");
        }
        writer.write_record(&header).expect("csv header");
        for report in &self.reports {
            let param = |key: &str| report.params.get(key).cloned().unwrap_or_default();
            let mut record = vec![
                report.id.to_owned(),
                param("N"),
                param("n"),
                param("ell"),
                param("p"),
                param("t"),
                render_value(&report.lhs, digits),
                render_value(&report.rhs, digits),
                render_verdict_cell(report, &report.slack, digits),
                render_satisfied_cell(report),
                match report.method {
                    Method::Exact => "exact".to_owned(),
                    Method::MonteCarlo => "monte-carlo".to_owned(),
                },
                report.samples.map(|s| s.to_string()).unwrap_or_default(),
                report.seed.map(|s| s.to_string()).unwrap_or_default(),
            ];
            if with_ratio {
                record.push(param("ratio"));
            }
            writer.write_record(&record).expect("csv record");
        }
        let body = writer.into_inner().expect("csv buffer");
        out.push_str(&String::from_utf8(body).expect("csv is utf-8"));
        out
    }
}

/// Data rows (statement id `m-ratio`) carry measurements, not verdicts, so
/// their slack and satisfied cells stay empty.
fn is_data_row(report: &BoundReport) -> bool {
    report.id == radbound::report::statements::MOMENT_RATIO
}

fn render_verdict_cell(report: &BoundReport, value: &Value, digits: usize) -> String {
    if is_data_row(report) {
        String::new()
    } else {
        render_value(value, digits)
    }
}

fn render_satisfied_cell(report: &BoundReport) -> String {
    if is_data_row(report) {
        String::new()
    } else {
        report.satisfied.to_string()
    }
}

fn render_value(value: &Value, digits: usize) -> String {
    match &value.exact {
        Some(q) => {
            let s = decimal_string(q, digits);
            if s.contains('.') {
                s.trim_end_matches('0').trim_end_matches('.').to_owned()
            } else {
                s
            }
        }
        None => format!("{}", value.approx),
    }
}

/// Decimal digits that carry the full precision of a `bits`-bit bracket:
/// bits * log10(2), floored, never below 17 (the f64 round-trip width).
pub fn csv_digits(bits: u32) -> usize {
    let from_bits = (bits as u64 * 30_103 / 100_000) as usize;
    from_bits.max(17)
}

/// `None` means stdout.
pub fn resolve_out_path(out: Option<&str>, command: &str, extension: &str) -> Option<PathBuf> {
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match out {
        Some("-") => None,
        Some(path) => {
            let path = PathBuf::from(path);
            if path.is_absolute() {
                Some(path)
            } else if let Some(dir) = env_dir {
                Some(dir.join(path))
            } else {
                Some(path)
            }
        }
        None => env_dir.map(|dir| dir.join(format!("{command}.{extension}"))),
    }
}

/// Joins exact rationals for a configuration echo, e.g. "1,-1,3/2".
pub fn join_rationals(values: &[BigRational]) -> String {
    values
        .iter()
        .map(|q| radbound::numeric::format_rational(q))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use radbound::numeric::rat;
    use radbound::report::{statements, Tolerance};

    fn sample_document() -> ReportDocument {
        let exact = BoundReport::exact_verdict(
            statements::SECOND_MOMENT,
            Value::exact(rat(4, 1)),
            Value::exact(rat(4, 1)),
            true,
        )
        .with_param("N", "2")
        .with_param("p", "2");
        let mc = BoundReport::approx_verdict(statements::CHAIN_FIRST, 2.0, 1.0, Tolerance::default())
            .with_sampling(1000, 7);
        let mut params = BTreeMap::new();
        params.insert("seed".to_owned(), "7".to_owned());
        ReportDocument::new("verify-main", params, vec![exact, mc])
    }

    #[test]
    fn json_has_version_timestamp_config_and_reports() {
        let doc = sample_document();
        let json: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(json["version"], version_string().as_str());
        assert!(json["timestamp"].as_str().unwrap().ends_with('Z'));
        assert_eq!(json["config"]["command"], "verify-main");
        assert_eq!(json["config"]["params"]["seed"], "7");
        assert_eq!(json["reports"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn exit_code_ignores_monte_carlo_rows() {
        let doc = sample_document();
        assert_eq!(doc.exit_code(), 0, "mc violation must not flip the code");

        let bad = BoundReport::exact_verdict(
            statements::SECOND_MOMENT,
            Value::exact(rat(5, 1)),
            Value::exact(rat(4, 1)),
            false,
        );
        let doc = ReportDocument::new("verify-main", BTreeMap::new(), vec![bad]);
        assert_eq!(doc.exit_code(), 1);
    }

    #[test]
    fn csv_has_comments_fixed_header_and_one_row_per_report() {
        let doc = sample_document();
        let csv = doc.to_csv(csv_digits(96), false, None);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# radbound 0.1.0+format.1"));
        assert!(lines[1].starts_with("# timestamp: "));
        assert!(lines[2].starts_with("# config: command=verify-main seed=7"));
        assert_eq!(
            lines[3],
            "statement_id,N,n,ell,p,t,lhs,rhs,slack,satisfied,method,samples,seed"
        );
        assert_eq!(lines.len(), 6);
        assert!(lines[4].starts_with("second-moment,2,,,2,,4,4,0,true,exact,,"));
        assert!(lines[5].contains("monte-carlo,1000,7"));
    }

    #[test]
    fn csv_ratio_column_and_data_rows() {
        let data = BoundReport::exact_verdict(
            statements::MOMENT_RATIO,
            Value::approx(2.0),
            Value::approx(1.0),
            true,
        )
        .with_param("p", "4")
        .with_param("ratio", "2");
        let doc = ReportDocument::new("sweep", BTreeMap::new(), vec![data]);
        let csv = doc.to_csv(17, true, Some("data rows carry no verdict"));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[3], "# note: data rows carry no verdict");
        assert!(lines[4].ends_with(",ratio"));
        assert_eq!(lines[5], "m-ratio,,,,4,,2,1,,,exact,,,2");
    }

    #[test]
    fn digits_track_precision_bits() {
        assert_eq!(csv_digits(96), 28);
        assert_eq!(csv_digits(16), 17);
        assert_eq!(csv_digits(192), 57);
    }

    #[test]
    fn out_paths_respect_dash_and_absolute() {
        assert_eq!(resolve_out_path(Some("-"), "x", "json"), None);
        assert_eq!(
            resolve_out_path(Some("/tmp/r.json"), "x", "json"),
            Some(PathBuf::from("/tmp/r.json"))
        );
    }

    #[test]
    fn rational_lists_round_trip() {
        assert_eq!(join_rationals(&[rat(1, 1), rat(-3, 2)]), "1,-3/2");
    }
}
