use std::f64::consts::PI;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{IpmError, Result};
use crate::tolerances;

use super::{CertificateReport, ReportBuilder};

/// Gap certificate for layered data: with `b = E_s - E(0)`, every sample must satisfy
/// `E_s - E(t) ≥ b` and `∫|∂x1 ρ| ≥ b / 2π²`.
///
/// `e_s` is the energy of the stratified state; `e_s_rearranged`, when given, is the
/// energy of the numerically computed rearrangement of `ρ0`, checked for consistency.
/// Data with `E(0) > E_s` do not meet the hypothesis and are reported not applicable.
pub fn check_layered_gap(
    records: &[DiagnosticsRecord],
    e_s: f64,
    e_s_rearranged: Option<f64>,
) -> Result<CertificateReport> {
    let first = records.first().ok_or(IpmError::TooFewSamples { need: 1, got: 0 })?;
    let gap = e_s - first.energy;
    let slack = 1e-12 * e_s.abs().max(1.0);
    let mut b = ReportBuilder::new("layered_gap", 0.0);
    b.context(format!("samples={}", records.len()))
        .value("E_s", e_s)
        .value("E0", first.energy)
        .value("b", gap);
    if let Some(er) = e_s_rearranged {
        b.at_most(
            "rearrangement_energy",
            (er - e_s).abs() / e_s.abs().max(f64::MIN_POSITIVE),
            tolerances::REARRANGEMENT_ENERGY,
        );
    }
    if gap < -slack {
        return Ok(b.not_applicable("E(0) > E_s"));
    }
    let gap = gap.max(0.0);
    let transfer = records
        .iter()
        .map(|r| e_s - r.energy)
        .fold(f64::INFINITY, f64::min);
    let l1 = records.iter().map(|r| r.dx1_l1).fold(f64::INFINITY, f64::min);
    b.at_least(
        "energy_transfer",
        transfer + slack,
        gap * (1.0 - tolerances::LAYER_GAP),
    )
    .at_least(
        "dx1_l1",
        l1,
        gap / (2.0 * PI * PI) * (1.0 - tolerances::LAYER_L1),
    );
    Ok(b.finish())
}
