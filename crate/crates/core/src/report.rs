use std::collections::BTreeMap;

use serde::Serialize;

/// Outcome of one verification check. `pass` is always `defect <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub case: String,
    pub params: BTreeMap<String, f64>,
    pub defect: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<i32>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, case: impl Into<String>, defect: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            case: case.into(),
            params: BTreeMap::new(),
            defect,
            tolerance,
            // NaN defects fail
            pass: defect <= tolerance,
            sign: None,
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_sign(mut self, sign: i32) -> Self {
        self.sign = Some(sign);
        self
    }
}

/// Sorts reports by check name so that output order is canonical.
pub fn canonical_order(reports: &mut [VerificationReport]) {
    reports.sort_by(|a, b| a.check.cmp(&b.check).then_with(|| a.case.cmp(&b.case)));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_tracks_tolerance() {
        assert!(VerificationReport::new("a", "mp", 1e-12, 1e-10).pass);
        assert!(!VerificationReport::new("a", "mp", 1e-9, 1e-10).pass);
        assert!(!VerificationReport::new("a", "mp", f64::NAN, 1e-10).pass);
    }

    #[test]
    fn ordering_is_by_name() {
        let mut r =
            vec![VerificationReport::new("zeta", "mp", 0.0, 1.0), VerificationReport::new("alpha", "mp", 0.0, 1.0)];
        canonical_order(&mut r);
        assert_eq!(r[0].check, "alpha");
    }
}
