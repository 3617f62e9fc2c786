use crate::certificates::{CertificateReport, ReportBuilder};
use crate::error::{IpmError, Result};
use crate::spectral::ScalarField;
use crate::tolerances;

/// Oddness in x2 at every sample, and evenness in x1 whenever the first sample
/// is even. Defects are relative to the largest `|ρ|` of the sample.
pub fn check_symmetry(fields: &[&ScalarField]) -> Result<CertificateReport> {
    let first = fields.first().ok_or(IpmError::TooFewSamples { need: 1, got: 0 })?;
    let mut b = ReportBuilder::new("symmetry", 0.0);
    if !first.domain().is_torus() {
        return Ok(b.not_applicable("strip fields carry no parity"));
    }
    let tol = tolerances::PARITY;
    let even = first.even_x1_defect() <= tol;
    let mut odd_worst = 0.0f64;
    let mut even_worst = 0.0f64;
    for f in fields {
        odd_worst = odd_worst.max(f.odd_x2_defect());
        if even {
            even_worst = even_worst.max(f.even_x1_defect());
        }
    }
    b.context(format!("samples={}", fields.len()));
    b.at_most("odd_x2_defect", odd_worst, tol);
    if even {
        b.at_most("even_x1_defect", even_worst, tol);
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Domain;

    #[test]
    fn flipped_row_breaks_parity() {
        let d = Domain::torus(32, 32).unwrap();
        let f = ScalarField::from_fn(d, |x, y| (1.0 - x.cos()) * y.sin());
        assert!(check_symmetry(&[&f, &f]).unwrap().passed());
        let mut g = f.clone();
        for v in &mut g.values_mut()[5 * 32..6 * 32] {
            *v = -*v;
        }
        let r = check_symmetry(&[&f, &g]).unwrap();
        assert!(!r.passed());
        assert_eq!(r.failures, vec!["odd_x2_defect".to_string()]);
    }
}
