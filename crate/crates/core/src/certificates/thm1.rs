use std::f64::consts::PI;

use crate::error::{IpmError, Result};
use crate::spectral::{forward_transform, DomainKind, ScalarField};
use crate::tolerances;

use super::{CertificateReport, ReportBuilder};

/// Cone/triangle chain on the lattice `F(k) = 2π ρ̂(k)` of a torus field that
/// models a compactly supported whole-space field.
///
/// With `C2 = Σ|F|² = ‖ρ‖²`, `C1 = ‖ρ‖_{L¹}/2π ≥ sup|F|` and `δ = Σ k1²/|k|² |F|²`:
/// (i) `Σ_{D_δ} |F|² ≤ C2/2` on the cone `|k1|/|k| ≥ √(2δ/C2)`;
/// (ii) `h_δ` from `2h²cot θ0 = C2/(4C1²)` obeys `h_δ ≥ C2^{3/4} δ^{-1/4} / 4C1`, and the
///      lattice mass of `D_δ^c ∩ {|k2| < h_δ}` stays below `C2/4`;
/// (iii) `‖ρ‖²_{Ḣs} ≥ (C2/4) h_δ^{2s}`.
pub fn check_thm1_cone_bound(rho: &ScalarField, s: f64) -> Result<CertificateReport> {
    let d = *rho.domain();
    if d.kind() != DomainKind::Torus {
        return Err(IpmError::Unsupported {
            domain: "strip",
            what: "whole-space cone chain".into(),
        });
    }
    if !(s > 0.0) {
        return Err(IpmError::InvalidArgument(format!("s must be positive, got {s}")));
    }
    let defect = rho.odd_x2_defect();
    if defect > tolerances::PARITY {
        return Err(IpmError::Hypothesis(format!(
            "field is not odd in x2 (defect {defect:.3e})"
        )));
    }
    let c = forward_transform(rho)?;
    let w = 4.0 * PI * PI;
    let mut modes = Vec::with_capacity(c.coeffs().len());
    let mut c2 = 0.0;
    let mut delta = 0.0;
    for (idx, z) in c.coeffs().iter().enumerate() {
        let (k1, k2) = c.mode(idx);
        let m = w * z.norm_sqr();
        c2 += m;
        if (k1, k2) != (0, 0) {
            delta += (k1 * k1) as f64 / (k1 * k1 + k2 * k2) as f64 * m;
        }
        modes.push((k1 as f64, k2 as f64, m));
    }
    let c1 = rho.l1_norm() / (2.0 * PI);
    let mut b = ReportBuilder::new("thm1_cone_chain", tolerances::CONE_CHAIN);
    b.context(format!("s={s}"))
        .value("C1", c1)
        .value("C2", c2)
        .value("delta", delta);
    if delta <= 0.0 {
        return Ok(b.not_applicable("degenerate: delta = 0"));
    }
    if delta >= c2 / 4.0 {
        return Ok(b.not_applicable("delta >= C2/4"));
    }
    // bulk of the mass well inside the torus
    let (mut tail, mut mass) = (0.0, 0.0);
    for j in 0..d.ny() {
        for i in 0..d.nx() {
            let v = rho.at(i, j).abs();
            mass += v;
            if d.x1(i).hypot(d.x2(j)) > 0.5 * PI {
                tail += v;
            }
        }
    }
    let tail = if mass > 0.0 { tail / mass } else { 0.0 };
    if tail > 0.01 {
        return Err(IpmError::Hypothesis(format!(
            "support not compact: {:.2}% of the mass lies beyond radius π/2",
            100.0 * tail
        )));
    }
    b.value("support_tail", tail);

    let cos0 = (2.0 * delta / c2).sqrt();
    let cone_mass: f64 = modes
        .iter()
        .filter(|(k1, k2, _)| (*k1, *k2) != (0.0, 0.0) && k1.abs() / k1.hypot(*k2) >= cos0)
        .map(|m| m.2)
        .sum();
    b.at_most("i_cone_mass", cone_mass, 0.5 * c2);

    let theta0 = cos0.acos();
    let cot0 = theta0.cos() / theta0.sin();
    let h = (c2 / (8.0 * c1 * c1 * cot0)).sqrt();
    let h_bound = c2.powf(0.75) * delta.powf(-0.25) / (4.0 * c1);
    let outside = |k1: f64, k2: f64| (k1, k2) == (0.0, 0.0) || k1.abs() / k1.hypot(k2) < cos0;
    let low: f64 = modes
        .iter()
        .filter(|(k1, k2, _)| outside(*k1, *k2) && k2.abs() < h)
        .map(|m| m.2)
        .sum();
    let high: f64 = modes
        .iter()
        .filter(|(k1, k2, _)| outside(*k1, *k2) && k2.abs() >= h)
        .map(|m| m.2)
        .sum();
    b.value("h_delta", h)
        .at_least("ii_h_bound", h, h_bound)
        .at_most("ii_triangle_mass", low, 0.25 * c2)
        .at_least("ii_high_mass", high, 0.25 * c2);

    let hs2: f64 = modes
        .iter()
        .map(|(k1, k2, m)| (k1 * k1 + k2 * k2).powf(s) * m)
        .sum();
    b.at_least("iii_hs", hs2.sqrt(), (0.25 * c2).sqrt() * h.powf(s))
        .value("hs_bound_from_h_bound", (0.25 * c2).sqrt() * h_bound.powf(s));
    Ok(b.finish())
}
