use crate::error::{IpmError, Result};
use crate::spectral::{DomainKind, SobolevIndex, SpectralField, sobolev_norm};
use crate::tolerances;

use super::{CertificateReport, ReportBuilder};

/// `‖f‖_{L²} ≤ ‖f‖_{Ḣ⁻¹}^{s/(s+1)} ‖f‖_{Ḣs}^{1/(s+1)}`, a Hölder inequality on the
/// lattice sums (torus) or eigenbasis sums (strip).
pub fn check_interpolation(f: &SpectralField, s: f64) -> Result<CertificateReport> {
    if !(s > 0.0) {
        return Err(IpmError::InvalidArgument(format!("s must be positive, got {s}")));
    }
    if f.domain().kind() == DomainKind::Torus {
        let m = f.get(0, 0).norm();
        if m > tolerances::MEAN_MODE * f.max_abs().max(1.0) {
            return Err(IpmError::NonZeroMean(m));
        }
    }
    let l2 = sobolev_norm(f, SobolevIndex::homogeneous(0.0))?;
    let neg = sobolev_norm(f, SobolevIndex::homogeneous(-1.0))?;
    let pos = sobolev_norm(f, SobolevIndex::homogeneous(s))?;
    let rhs = neg.powf(s / (s + 1.0)) * pos.powf(1.0 / (s + 1.0));
    let mut b = ReportBuilder::new("interpolation", tolerances::LATTICE_EXACT);
    b.context(format!("s={s} domain={}", f.domain().kind().name()))
        .at_most("l2", l2, rhs);
    Ok(b.finish())
}
