//! Certificates: numerical checks of the identities and inequality chains
//! behind the growth results. Each check returns a [`CertificateReport`].
//!
//! A report is a set of sub-checks `measured ≷ bound`. The margin of a
//! sub-check is the signed gap divided by `max(|measured|, |bound|)`, so it is
//! negative exactly when the inequality is violated and lies in `[-2, 2]`. The
//! report margin is the minimum over sub-checks and the report passes when
//! `margin ≥ -tolerance`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

mod bubble;
mod bump;
mod energy;
mod interpolation;
mod layered;
mod lemma1d;
mod perturbation;
mod symmetry;
mod thm1;
mod thm2;

pub use bubble::{bubble_sample, check_bubble, BubbleSample};
pub use bump::check_bump_scaling;
pub use energy::check_energy_identity;
pub use interpolation::check_interpolation;
pub use layered::check_layered_gap;
pub use lemma1d::{check_lemma_1d, embedding_constant};
pub use perturbation::{perturbation_energy_curve, perturbation_energy_curve_with, PerturbationCurve};
pub use symmetry::check_symmetry;
pub use thm1::check_thm1_cone_bound;
pub use thm2::{check_thm2_chain, holder_constant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
    NotApplicable,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Passed => "PASS",
            Status::Failed => "FAIL",
            Status::NotApplicable => "N/A",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub name: String,
    pub status: Status,
    pub measured: BTreeMap<String, f64>,
    pub bound: BTreeMap<String, f64>,
    pub margin: f64,
    pub tolerance: f64,
    pub context: String,
    /// Sub-checks whose margin fell below `-tolerance`.
    pub failures: Vec<String>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Passed
    }

    pub fn applicable(&self) -> bool {
        self.status != Status::NotApplicable
    }

    /// One line: name, status, margin, tolerance, context, then `key=measured[/bound]`.
    pub fn to_line(&self) -> String {
        let mut s = format!(
            "{:<22} {:<4} margin={:+.3e} tol={:.1e}",
            self.name,
            self.status.label(),
            self.margin,
            self.tolerance
        );
        if !self.context.is_empty() {
            let _ = write!(s, " [{}]", self.context);
        }
        for (k, v) in &self.measured {
            match self.bound.get(k) {
                Some(b) => {
                    let _ = write!(s, " {k}={v:.6e}/{b:.6e}");
                }
                None => {
                    let _ = write!(s, " {k}={v:.6e}");
                }
            }
        }
        if !self.failures.is_empty() {
            let _ = write!(s, " failed:{}", self.failures.join(","));
        }
        s
    }

    pub const CSV_HEADER: &'static str = "name,status,passed,margin,tolerance,context,measured";

    pub fn to_csv_row(&self) -> String {
        let measured: Vec<String> = self
            .measured
            .iter()
            .map(|(k, v)| format!("{k}={v:.16e}"))
            .collect();
        format!(
            "{},{},{},{:.16e},{:.16e},{},{}",
            self.name,
            self.status.label(),
            self.passed(),
            self.margin,
            self.tolerance,
            self.context.replace(',', ";"),
            measured.join(";")
        )
    }
}

impl CertificateReport {
    /// Failed report for a check whose hypotheses or inputs were rejected.
    pub fn rejected(name: &str, reason: &str) -> Self {
        CertificateReport {
            name: name.to_string(),
            status: Status::Failed,
            measured: BTreeMap::new(),
            bound: BTreeMap::new(),
            margin: f64::NAN,
            tolerance: 0.0,
            context: reason.to_string(),
            failures: vec!["hypotheses".into()],
        }
    }

    /// Combine per-sample reports: worst margin, measured values of the worst
    /// applicable sample, failures tagged with their sample index.
    pub fn aggregate(name: &str, parts: &[CertificateReport]) -> Self {
        let applicable: Vec<(usize, &CertificateReport)> =
            parts.iter().enumerate().filter(|(_, r)| r.applicable()).collect();
        let Some(&(_, first)) = applicable.first() else {
            let context = parts
                .first()
                .map(|r| r.context.clone())
                .unwrap_or_else(|| "no samples".into());
            return CertificateReport {
                name: name.to_string(),
                status: Status::NotApplicable,
                measured: BTreeMap::new(),
                bound: BTreeMap::new(),
                margin: f64::NAN,
                tolerance: 0.0,
                context,
                failures: Vec::new(),
            };
        };
        let key = |r: &CertificateReport| if r.margin.is_nan() { f64::NEG_INFINITY } else { r.margin };
        let (_, worst) = applicable
            .iter()
            .copied()
            .min_by(|a, b| key(a.1).total_cmp(&key(b.1)))
            .unwrap_or((0, first));
        let mut failures = Vec::new();
        for (i, r) in &applicable {
            for f in &r.failures {
                failures.push(format!("{f}@{i}"));
            }
        }
        let status = if applicable.iter().all(|(_, r)| r.passed()) {
            Status::Passed
        } else {
            Status::Failed
        };
        CertificateReport {
            name: name.to_string(),
            status,
            measured: worst.measured.clone(),
            bound: worst.bound.clone(),
            margin: worst.margin,
            tolerance: worst.tolerance,
            context: format!("samples={} applicable={}", parts.len(), applicable.len()),
            failures,
        }
    }
}

/// Relative signed gap; 0 when both sides vanish.
pub(crate) fn relative_gap(gap: f64, measured: f64, bound: f64) -> f64 {
    let scale = measured.abs().max(bound.abs());
    if scale == 0.0 {
        0.0
    } else {
        gap / scale
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ReportBuilder {
    name: String,
    tolerance: f64,
    measured: BTreeMap<String, f64>,
    bound: BTreeMap<String, f64>,
    margin: f64,
    context: String,
    failures: Vec<String>,
}

impl ReportBuilder {
    pub fn new(name: &str, tolerance: f64) -> Self {
        ReportBuilder {
            name: name.to_string(),
            tolerance,
            measured: BTreeMap::new(),
            bound: BTreeMap::new(),
            margin: f64::INFINITY,
            context: String::new(),
            failures: Vec::new(),
        }
    }

    pub fn context(&mut self, c: impl Into<String>) -> &mut Self {
        self.context = c.into();
        self
    }

    pub fn value(&mut self, key: &str, v: f64) -> &mut Self {
        self.measured.insert(key.to_string(), v);
        self
    }

    fn sub(&mut self, key: &str, measured: f64, bound: f64, margin: f64) {
        self.measured.insert(key.to_string(), measured);
        self.bound.insert(key.to_string(), bound);
        let margin = if margin.is_nan() { -2.0 } else { margin };
        if margin < -self.tolerance {
            self.failures.push(key.to_string());
        }
        self.margin = self.margin.min(margin);
    }

    /// Sub-check `measured ≥ bound`.
    pub fn at_least(&mut self, key: &str, measured: f64, bound: f64) -> &mut Self {
        let m = relative_gap(measured - bound, measured, bound);
        self.sub(key, measured, bound, m);
        self
    }

    /// Sub-check `measured ≤ bound`.
    pub fn at_most(&mut self, key: &str, measured: f64, bound: f64) -> &mut Self {
        let m = relative_gap(bound - measured, measured, bound);
        self.sub(key, measured, bound, m);
        self
    }

    /// Boolean sub-check: leaves the margin alone when it holds, -1 otherwise.
    pub fn flag(&mut self, key: &str, ok: bool) -> &mut Self {
        self.sub(key, if ok { 1.0 } else { 0.0 }, 1.0, if ok { f64::INFINITY } else { -1.0 });
        self
    }

    pub fn not_applicable(self, reason: &str) -> CertificateReport {
        let context = if self.context.is_empty() {
            reason.to_string()
        } else {
            format!("{}; {reason}", self.context)
        };
        CertificateReport {
            name: self.name,
            status: Status::NotApplicable,
            measured: self.measured,
            bound: self.bound,
            margin: f64::NAN,
            tolerance: self.tolerance,
            context,
            failures: Vec::new(),
        }
    }

    pub fn finish(mut self) -> CertificateReport {
        if self.margin == f64::INFINITY {
            self.margin = 0.0;
        }
        let status = if self.margin >= -self.tolerance {
            Status::Passed
        } else {
            Status::Failed
        };
        CertificateReport {
            name: self.name,
            status,
            measured: self.measured,
            bound: self.bound,
            margin: self.margin,
            tolerance: self.tolerance,
            context: self.context,
            failures: self.failures,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_status() {
        let mut b = ReportBuilder::new("demo", 0.05);
        b.at_least("a", 0.97, 1.0).at_most("b", 1.0, 2.0);
        let r = b.finish();
        assert!((r.margin + 0.03).abs() < 1e-15);
        assert!(r.passed());
        let mut b = ReportBuilder::new("demo", 0.0);
        b.at_most("zero", 0.0, 0.0).flag("f", false);
        let r = b.finish();
        assert_eq!(r.status, Status::Failed);
        assert_eq!(r.failures, vec!["f".to_string()]);
        assert!(r.to_line().contains("FAIL"));
        assert_eq!(r.to_csv_row().split(',').count(), 7);
    }
}
