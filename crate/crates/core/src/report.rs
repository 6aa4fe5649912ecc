//! Verdicts produced by the inequality and identity checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hermitian::{LoewnerComparison, ToleranceConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A precondition of the statement does not hold for these inputs.
    Skipped,
    /// The check could not be evaluated.
    Error,
}

/// One sub-inequality of a check. `holds ⟺ margin ≥ −threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub margin: f64,
    pub threshold: f64,
    pub holds: bool,
}

impl Criterion {
    pub fn new(name: impl Into<String>, margin: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            margin,
            threshold,
            holds: margin >= -threshold,
        }
    }

    pub fn loewner(name: impl Into<String>, cmp: &LoewnerComparison) -> Self {
        Self::new(name, cmp.margin, cmp.threshold)
    }

    /// `error ≤ bound`, expressed as margin `−error` against threshold `bound`.
    pub fn upper_bound(name: impl Into<String>, error: f64, bound: f64) -> Self {
        Self::new(name, -error, bound)
    }

    fn slack(&self) -> f64 {
        self.margin + self.threshold
    }
}

/// Where a check's inputs came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// `seed`, `fixed` or `direct`.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub tolerances: ToleranceConfig,
}

impl Provenance {
    pub fn direct(tolerances: ToleranceConfig) -> Self {
        Self {
            source: "direct".into(),
            seed: None,
            label: None,
            dims: Vec::new(),
            weights: Vec::new(),
            tolerances,
        }
    }

    pub fn with_dims(mut self, dims: Vec<usize>) -> Self {
        self.dims = dims;
        self
    }

    pub fn with_weights(mut self, weights: Vec<Vec<f64>>) -> Self {
        self.weights = weights;
        self
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.source = "seed".into();
        self.seed = Some(seed);
        self
    }

    pub fn fixed(mut self, label: impl Into<String>) -> Self {
        self.source = "fixed".into();
        self.label = Some(label.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub status: CheckStatus,
    pub holds: bool,
    /// Margin of the worst sub-inequality; `None` when nothing was evaluated.
    pub margin: Option<f64>,
    pub threshold: Option<f64>,
    pub inputs: Provenance,
    pub details: Vec<Criterion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equality: Option<bool>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl CheckReport {
    /// The verdict is that of the criterion with the least slack.
    pub fn from_criteria(name: &str, inputs: Provenance, details: Vec<Criterion>) -> Self {
        let worst = details
            .iter()
            .min_by(|a, b| a.slack().total_cmp(&b.slack()))
            .cloned();
        let (holds, margin, threshold) = match &worst {
            Some(c) => (
                c.holds && !c.margin.is_nan(),
                Some(c.margin),
                Some(c.threshold),
            ),
            None => (true, None, None),
        };
        Self {
            check_name: name.to_string(),
            status: if holds {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            holds,
            margin,
            threshold,
            inputs,
            details,
            equality: None,
            values: BTreeMap::new(),
            message: None,
        }
    }

    pub fn skipped(name: &str, inputs: Provenance, reason: impl Into<String>) -> Self {
        Self::empty(name, inputs, CheckStatus::Skipped, reason.into())
    }

    /// Evaluation failure, e.g. a non-convergent solve. Never counts as holding.
    pub fn failed(name: &str, inputs: Provenance, reason: impl Into<String>) -> Self {
        Self::empty(name, inputs, CheckStatus::Fail, reason.into())
    }

    pub fn error(name: &str, inputs: Provenance, err: &Error) -> Self {
        Self::empty(name, inputs, CheckStatus::Error, err.to_string())
    }

    fn empty(name: &str, inputs: Provenance, status: CheckStatus, message: String) -> Self {
        Self {
            check_name: name.to_string(),
            status,
            holds: false,
            margin: None,
            threshold: None,
            inputs,
            details: Vec::new(),
            equality: None,
            values: BTreeMap::new(),
            message: Some(message),
        }
    }

    pub fn with_value(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }

    pub fn with_message(mut self, message: impl Into<String>) -> Self {
        self.message = Some(message.into());
        self
    }

    pub fn is_skipped(&self) -> bool {
        self.status == CheckStatus::Skipped
    }

    pub fn detail(&self, name: &str) -> Option<&Criterion> {
        self.details.iter().find(|c| c.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_worst_slack() {
        let p = Provenance::direct(ToleranceConfig::default());
        let r = CheckReport::from_criteria(
            "x",
            p.clone(),
            vec![
                Criterion::new("a", 0.5, 1e-9),
                Criterion::new("b", -2e-9, 1e-9),
            ],
        );
        assert!(!r.holds);
        assert_eq!(r.status, CheckStatus::Fail);
        assert_eq!(r.margin, Some(-2e-9));
        let r = CheckReport::from_criteria("x", p.clone(), vec![Criterion::new("a", -5e-10, 1e-9)]);
        assert!(r.holds);
        let r = CheckReport::from_criteria("x", p, vec![Criterion::upper_bound("err", 1e-7, 1e-6)]);
        assert!(r.holds);
        assert_eq!(r.margin, Some(-1e-7));
    }

    #[test]
    fn nan_margin_never_holds() {
        let p = Provenance::direct(ToleranceConfig::default());
        let r = CheckReport::from_criteria("x", p, vec![Criterion::new("a", f64::NAN, 1e-9)]);
        assert!(!r.holds);
    }

    #[test]
    fn skipped_reports_do_not_hold() {
        let p = Provenance::direct(ToleranceConfig::default());
        let r = CheckReport::skipped("x", p, "precondition");
        assert!(r.is_skipped() && !r.holds && r.margin.is_none());
    }
}
