use crate::error::{IpmError, Result};
use crate::initial_data::{make_bump_perturbation, StratifiedProfile};
use crate::spectral::{forward_transform, sobolev_norm, SobolevIndex};
use crate::tolerances;

use super::{CertificateReport, ReportBuilder};

/// Least-squares slope of `ln y` against `ln x`.
pub(crate) fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Scaling of the bump perturbation `ρ0λ - ρ_s = 2Aλ φ(x/λ)` on the strip: the L²
/// norm scales like `λ²`, the `Ḣ²` seminorm is invariant and `Ḣ^{2-γ}` scales like
/// `λ^γ`. Norms use the eigenbasis coefficients of the difference.
pub fn check_bump_scaling(
    rho_s: &StratifiedProfile,
    gammas: &[f64],
    lambdas: &[f64],
) -> Result<CertificateReport> {
    if lambdas.len() < 2 {
        return Err(IpmError::TooFewSamples {
            need: 2,
            got: lambdas.len(),
        });
    }
    let d = *rho_s.domain();
    let base = rho_s.field();
    // coarsest spacing inside the smallest ball
    let lmin = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let dy = d
        .x2_grid()
        .windows(2)
        .filter(|w| w[1] > -lmin && w[0] < lmin)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    let cells = 2.0 * lmin / d.dx1().max(dy);
    if cells < tolerances::BUMP_MIN_CELLS {
        return Err(IpmError::InvalidArgument(format!(
            "λ = {lmin} spans only {cells:.1} grid cells; refine the grid"
        )));
    }
    let mut l2 = Vec::new();
    let mut h2 = Vec::new();
    let mut frac: Vec<Vec<f64>> = vec![Vec::new(); gammas.len()];
    let mut a = 0.0;
    for &lam in lambdas {
        let bp = make_bump_perturbation(rho_s, lam, d)?;
        a = bp.a;
        let diff = bp.field.axpy(-1.0, &base);
        let c = forward_transform(&diff)?;
        l2.push(sobolev_norm(&c, SobolevIndex::homogeneous(0.0))?);
        h2.push(sobolev_norm(&c, SobolevIndex::homogeneous(2.0))?);
        for (k, &g) in gammas.iter().enumerate() {
            frac[k].push(sobolev_norm(&c, SobolevIndex::homogeneous(2.0 - g))?);
        }
    }
    let mut b = ReportBuilder::new("bump_scaling", 0.0);
    b.context(format!("lambdas={lambdas:?}")).value("A", a);
    let s = loglog_slope(lambdas, &l2);
    b.value("l2_slope", s)
        .at_most("l2_slope_dev", (s - 2.0).abs(), tolerances::BUMP_L2_SLOPE);
    let worst = h2
        .windows(2)
        .map(|w| (w[1] / w[0] - 1.0).abs())
        .fold(0.0, f64::max);
    b.at_most("h2_ratio_dev", worst, tolerances::BUMP_H2_RATIO);
    for (k, &g) in gammas.iter().enumerate() {
        let s = loglog_slope(lambdas, &frac[k]);
        b.value(&format!("slope_gamma_{g}"), s).at_most(
            &format!("slope_gamma_{g}_dev"),
            (s - g).abs(),
            tolerances::BUMP_FRACTIONAL_SLOPE * g,
        );
    }
    Ok(b.finish())
}
