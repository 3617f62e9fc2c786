use crate::diagnostics::DiagnosticsRecord;
use crate::error::{IpmError, Result};
use crate::tolerances;

use super::{CertificateReport, ReportBuilder};

/// `E' = -δ` at interior samples (three-point derivative on the sample grid),
/// `E(T) - E(0) = -∫δ` (trapezoid), `E` non-increasing and `δ ≥ 0`.
/// Only the samples before the first resolution-monitor trip are used.
pub fn check_energy_identity(records: &[DiagnosticsRecord]) -> Result<CertificateReport> {
    let used: Vec<&DiagnosticsRecord> = records
        .iter()
        .take_while(|r| r.tail_fraction <= tolerances::RESOLUTION_TAIL_MAX)
        .collect();
    if used.len() < 3 {
        return Err(IpmError::TooFewSamples {
            need: 3,
            got: used.len(),
        });
    }
    let e0 = used[0].energy;
    let mut worst_point: f64 = 0.0;
    for w in used.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        let (hm, hp) = (b.t - a.t, c.t - b.t);
        let de = (hm * hm * c.energy - hp * hp * a.energy - (hm * hm - hp * hp) * b.energy)
            / (hm * hp * (hm + hp));
        let scale = de
            .abs()
            .max(b.delta)
            .max(1e-3 * e0.abs())
            .max(f64::MIN_POSITIVE);
        worst_point = worst_point.max((de + b.delta).abs() / scale);
    }
    let integral: f64 = used
        .windows(2)
        .map(|w| 0.5 * (w[0].delta + w[1].delta) * (w[1].t - w[0].t))
        .sum();
    let last = used[used.len() - 1];
    let integrated =
        (last.energy - e0 + integral).abs() / (e0.abs() + integral).max(f64::MIN_POSITIVE);
    let rise = used
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_delta = used.iter().map(|r| r.delta).fold(f64::INFINITY, f64::min);

    let mut b = ReportBuilder::new("energy_identity", 0.0);
    b.context(format!("t=[{:.4},{:.4}] samples={}", used[0].t, last.t, used.len()))
        .value("E0", e0)
        .value("E_T", last.energy)
        .value("int_delta", integral)
        .at_most("pointwise", worst_point, tolerances::ENERGY_POINTWISE)
        .at_most("integrated", integrated, tolerances::ENERGY_INTEGRATED)
        .at_most("max_rise", rise, tolerances::ENERGY_MONOTONE * e0.abs())
        .at_least("min_delta", min_delta, 0.0);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, e: f64, d: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            energy: e,
            delta: d,
            l2: 1.0,
            hs: Vec::new(),
            grad_sup_rho: 0.0,
            grad_sup_u: 0.0,
            cube_root_mass: None,
            tail_fraction: 0.0,
            dx1_l1: 0.0,
        }
    }

    #[test]
    fn exact_exponential_decay() {
        // E = 1 + e^{-t}, δ = e^{-t}
        let rs: Vec<_> = (0..=1000)
            .map(|i| {
                let t = i as f64 * 1e-3;
                rec(t, 1.0 + (-t).exp(), (-t).exp())
            })
            .collect();
        let r = check_energy_identity(&rs).unwrap();
        assert!(r.passed(), "{}", r.to_line());
        let bad: Vec<_> = rs.iter().map(|x| rec(x.t, x.energy, 1.1 * x.delta)).collect();
        assert!(!check_energy_identity(&bad).unwrap().passed());
    }

    #[test]
    fn stratified_and_errors() {
        let rs: Vec<_> = (0..5).map(|i| rec(i as f64, 2.0, 0.0)).collect();
        assert!(check_energy_identity(&rs).unwrap().passed());
        assert!(check_energy_identity(&rs[..2]).is_err());
        let mut up = rs.clone();
        up[3].energy = 2.0 + 1e-6;
        assert!(!check_energy_identity(&up).unwrap().passed());
    }
}
