use std::f64::consts::PI;

use crate::error::{IpmError, Result};
use crate::spectral::ScalarField;
use crate::tolerances;
use crate::tracking::{
    bubble_slice_check, curve_inside, enclosed_area, project_x2, MarkerCurve, SliceReport,
};

use super::{CertificateReport, ReportBuilder};

/// Geometry and slice data of one sample of a bubble run.
#[derive(Debug, Clone)]
pub struct BubbleSample {
    pub t: f64,
    pub area_outer: f64,
    pub area_inner: f64,
    pub projection_inclusion: bool,
    pub containment: bool,
    pub slice: SliceReport,
    /// `max |ρ(marker) - c|` over both curves, relative to `osc(ρ)`.
    pub level_error: f64,
}

pub fn bubble_sample(rho: &ScalarField, gamma0: &MarkerCurve, gamma1: &MarkerCurve, t: f64) -> Result<BubbleSample> {
    let area_outer = enclosed_area(gamma0)?;
    let area_inner = enclosed_area(gamma1)?;
    let p0 = project_x2(gamma0);
    let p1 = project_x2(gamma1);
    let osc = (rho.max() - rho.min()).max(f64::MIN_POSITIVE);
    Ok(BubbleSample {
        t,
        area_outer,
        area_inner,
        projection_inclusion: p1.is_subset_of(&p0, 1e-9),
        containment: curve_inside(gamma1, gamma0),
        slice: bubble_slice_check(rho, gamma0, gamma1)?,
        level_error: gamma0.level_error(rho).max(gamma1.level_error(rho)) / osc,
    })
}

/// Bubble certificate over a run: area conservation of both curves, projection
/// inclusion `Π2(Γ1) ⊆ Π2(Γ0)`, the slice bound `∫|∂x1 ρ| dx1 ≥ |c1 - c0|` on rows of
/// `Π2(Γ1)`, `|Π2(Γ1)| ≥ m(D1)/2π`, and the L¹ and L² bounds with the initial
/// inner area `m(D1)`.
pub fn check_bubble(samples: &[BubbleSample]) -> Result<CertificateReport> {
    let first = samples.first().ok_or(IpmError::TooFewSamples { need: 1, got: 0 })?;
    let (a0, a1) = (first.area_outer, first.area_inner);
    let gap = first.slice.level_gap;
    let mut drift: f64 = 0.0;
    let mut slice = f64::INFINITY;
    let mut proj_margin = f64::INFINITY;
    let mut l1_margin = f64::INFINITY;
    let mut l2_margin = f64::INFINITY;
    let mut inclusion = true;
    let mut level: f64 = 0.0;
    let l1_bound = a1 * gap / (2.0 * PI);
    let l2_bound = (a1 * gap).powi(2) / (16.0 * PI.powi(4));
    for s in samples {
        drift = drift
            .max((s.area_outer - a0).abs() / a0)
            .max((s.area_inner - a1).abs() / a1);
        slice = slice.min(s.slice.min_slice);
        proj_margin = proj_margin.min(s.slice.projection_length);
        l1_margin = l1_margin.min(s.slice.l1);
        l2_margin = l2_margin.min(s.slice.l2_sq);
        inclusion &= s.projection_inclusion && s.containment;
        level = level.max(s.level_error);
    }
    let last = samples.last().unwrap();
    let mut b = ReportBuilder::new("bubble", 0.0);
    b.context(format!("t=[{:.4},{:.4}] samples={}", first.t, last.t, samples.len()))
        .value("level_gap", gap)
        .value("inner_area0", a1)
        .value("level_error", level)
        .at_most("area_drift", drift, tolerances::AREA_DRIFT)
        .flag("projection_inclusion", inclusion)
        .at_least("min_slice", slice, gap * (1.0 - tolerances::BUBBLE_SLICE))
        .at_least("projection_length", proj_margin, a1 / (2.0 * PI))
        .at_least("dx1_l1", l1_margin, l1_bound)
        .at_least("dx1_l2_sq", l2_margin, l2_bound);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{make_bubble, Parity, StratifiedProfile};
    use crate::spectral::Domain;

    #[test]
    fn initial_bubble_passes_and_stratified_fails() {
        let d = Domain::torus(128, 128).unwrap();
        let zero = StratifiedProfile::new(d, vec![0.0; 128], Parity::Odd).unwrap();
        let bub = make_bubble(d, (0.0, 1.0), 0.8, 1.0, &zero).unwrap();
        let g0 = MarkerCurve::circle(d, bub.center, bub.r0, 512, bub.c0).unwrap();
        let g1 = MarkerCurve::circle(d, bub.center, bub.r1, 512, bub.c1).unwrap();
        let s = bubble_sample(&bub.field, &g0, &g1, 0.0).unwrap();
        let r = check_bubble(&[s]).unwrap();
        assert!(r.passed(), "{}", r.to_line());
        let bg = ScalarField::from_fn(d, |_, y| y.sin());
        let s = bubble_sample(&bg, &g0, &g1, 0.0).unwrap();
        assert!(!check_bubble(&[s]).unwrap().passed());
    }
}
