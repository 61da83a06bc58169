//! Machine-readable check reports. Field order is fixed by the struct definitions and all
//! maps are sorted, so serialization is byte-for-byte reproducible.

use serde::Serialize;
use serde_json::{json, Value};

use crate::arith;
use crate::qseries::QExpansion;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "SKIPPED")]
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    pub check: String,
    pub params: Value,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Value>,
}

impl CheckReport {
    pub fn new(check: &str, params: Value, pass: bool) -> Self {
        CheckReport {
            check: check.to_string(),
            params,
            status: if pass { Status::Pass } else { Status::Fail },
            detail: None,
            first_failure: None,
        }
    }

    pub fn skipped(check: &str, params: Value, reason: &str) -> Self {
        CheckReport {
            check: check.to_string(),
            params,
            status: Status::Skipped,
            detail: Some(json!({ "reason": reason })),
            first_failure: None,
        }
    }

    /// PASS iff the two series agree to their common precision.
    pub fn from_series(check: &str, params: Value, lhs: &QExpansion, rhs: &QExpansion) -> Self {
        let ff = first_difference(lhs, rhs);
        let mut r = CheckReport::new(check, params, ff.is_none());
        r.first_failure = ff;
        r
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

fn coords_json(c: &crate::cyclotomic::CycNumber) -> Value {
    Value::Array(c.coords().iter().map(|r| json!(arith::rat_to_string(r))).collect())
}

/// The lowest exponent at which two series differ, with both coefficients.
pub fn first_difference(lhs: &QExpansion, rhs: &QExpansion) -> Option<Value> {
    match lhs.sub(rhs) {
        Err(e) => Some(json!({ "error": e.to_string() })),
        Ok(d) => d.terms().next().map(|(e, _)| {
            json!({
                "exponent": arith::rat_to_string(&e),
                "lhs": coords_json(&lhs.coeff(&e)),
                "rhs": coords_json(&rhs.coeff(&e)),
            })
        }),
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    /// The identity being verified, written out.
    pub identity: String,
    pub config: Value,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(suite: &str, identity: &str, config: Value, checks: Vec<CheckReport>) -> Self {
        let passed = checks.iter().filter(|c| c.status == Status::Pass).count();
        let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
        let skipped = checks.len() - passed - failed;
        SuiteReport {
            schema_version: SCHEMA_VERSION,
            suite: suite.to_string(),
            identity: identity.to_string(),
            config,
            checks,
            summary: Summary { passed, failed, skipped },
            pass: failed == 0,
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rint;
    use crate::cyclotomic::CycNumber;

    #[test]
    fn first_difference_reports_lowest_exponent() {
        let a = QExpansion::constant(CycNumber::one(1), rint(3));
        let mut b = a.clone();
        b.add_term(2, &CycNumber::one(1));
        b.add_term(1, &CycNumber::one(1));
        let ff = first_difference(&a, &b).unwrap();
        assert_eq!(ff["exponent"], "1");
        assert!(first_difference(&a, &a).is_none());
    }

    #[test]
    fn suite_summary() {
        let checks = vec![
            CheckReport::new("x", json!({}), true),
            CheckReport::new("y", json!({}), false),
            CheckReport::skipped("z", json!({}), "n/a"),
        ];
        let r = SuiteReport::new("s", "id", json!({}), checks);
        assert!(!r.pass);
        assert_eq!((r.summary.passed, r.summary.failed, r.summary.skipped), (1, 1, 1));
        assert_eq!(r.to_json_string(), r.clone().to_json_string());
    }
}
