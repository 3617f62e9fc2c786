use std::f64::consts::PI;

use crate::error::{IpmError, Result};
use crate::initial_data::{annular_bump, StratifiedProfile};
use crate::spectral::cheb;
use crate::tolerances;

use super::{CertificateReport, ReportBuilder};

/// Values of `F(τ) = ∫ (ρ̃(x, τ) - ρ_s) x2 dx` on the τ grid and the derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationCurve {
    pub h0: f64,
    pub eps0: f64,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub f0: f64,
    pub f_prime: f64,
    pub f_second: f64,
    /// `-π ∫ r³ φ² dr · g'(h0)`, the leading-order value of `F''(0)`.
    pub f_second_leading: f64,
}

const N_R: usize = 257;
const N_THETA: usize = 512;

/// `F(τ)` by Clenshaw–Curtis in `r ∈ [ε0, 2ε0]` and the periodic trapezoid rule in θ,
/// using the exact rotated state `g(h0 + r sin(θ - φ(r)τ))`.
fn energy_change(g: &impl Fn(f64) -> f64, h0: f64, eps0: f64, tau: f64) -> f64 {
    let nodes = cheb::nodes(N_R);
    let w = cheb::clenshaw_curtis_weights(N_R);
    let dth = 2.0 * PI / N_THETA as f64;
    let mut total = 0.0;
    for (z, wz) in nodes.iter().zip(&w) {
        let r = eps0 * (1.5 + 0.5 * z);
        let phi = annular_bump(r, eps0);
        if phi == 0.0 {
            continue;
        }
        let mut ring = 0.0;
        for m in 0..N_THETA {
            let th = m as f64 * dth;
            let y = h0 + r * th.sin();
            ring += (g(h0 + r * (th - phi * tau).sin()) - g(y)) * y;
        }
        total += wz * 0.5 * eps0 * r * ring * dth;
    }
    total
}

/// Energy curve of the circular rearrangement of `ρ_s = g(x2)` around `(0, h0)`.
/// `h0` defaults to the maximiser of `g'` on `[2.5ε0, π - 2.5ε0]`.
pub fn perturbation_energy_curve_with(
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    eps0: f64,
    taus: &[f64],
    h0: Option<f64>,
) -> Result<(PerturbationCurve, CertificateReport)> {
    if !(eps0 > 0.0 && 5.0 * eps0 < PI) {
        return Err(IpmError::InvalidArgument(format!("eps0 = {eps0} out of range")));
    }
    if taus.is_empty() || taus.iter().any(|&t| !(t > 0.0)) {
        return Err(IpmError::InvalidArgument("tau grid must be non-empty and positive".into()));
    }
    let h0 = match h0 {
        Some(h) => {
            if !(h > 2.0 * eps0 && h < PI - 2.0 * eps0) {
                return Err(IpmError::InvalidArgument(format!(
                    "annulus around h0 = {h} leaves the upper half"
                )));
            }
            h
        }
        None => {
            let (lo, hi) = (2.5 * eps0, PI - 2.5 * eps0);
            (0..=512)
                .map(|i| lo + (hi - lo) * i as f64 / 512.0)
                .max_by(|a, b| dg(*a).total_cmp(&dg(*b)))
                .unwrap()
        }
    };
    let slope = dg(h0);
    if !(slope > 0.0) {
        return Err(IpmError::Hypothesis(format!(
            "no height with g' > 0 (g'({h0:.4}) = {slope:.3e})"
        )));
    }
    let step = taus.iter().cloned().fold(f64::INFINITY, f64::min);
    let f0 = energy_change(&g, h0, eps0, 0.0);
    let fp = energy_change(&g, h0, eps0, step);
    let fm = energy_change(&g, h0, eps0, -step);
    let f_prime = (fp - fm) / (2.0 * step);
    let f_second = (fp - 2.0 * f0 + fm) / (step * step);
    // ∫ r³ φ² dr
    let nodes = cheb::nodes(N_R);
    let w = cheb::clenshaw_curtis_weights(N_R);
    let moment: f64 = nodes
        .iter()
        .zip(&w)
        .map(|(z, wz)| {
            let r = eps0 * (1.5 + 0.5 * z);
            wz * 0.5 * eps0 * r.powi(3) * annular_bump(r, eps0).powi(2)
        })
        .sum();
    let leading = -PI * moment * slope;
    let values: Vec<f64> = taus.iter().map(|&t| energy_change(&g, h0, eps0, t)).collect();

    let mut b = ReportBuilder::new("perturbation_energy", 0.0);
    b.context(format!("eps0={eps0} h0={h0:.6}"))
        .value("F_second_leading", leading)
        .value("F_second_ratio", f_second / leading)
        .at_most("F0", f0.abs(), tolerances::F_AT_ZERO)
        .at_most(
            "F_prime",
            f_prime.abs(),
            tolerances::FPRIME_RELATIVE * f_second.abs() * step,
        )
        .at_most("F_second", f_second, 0.5 * leading);
    let worst = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    b.value("max_F", worst).flag("F_negative", worst < 0.0);
    let curve = PerturbationCurve {
        h0,
        eps0,
        taus: taus.to_vec(),
        values,
        f0,
        f_prime,
        f_second,
        f_second_leading: leading,
    };
    Ok((curve, b.finish()))
}

pub fn perturbation_energy_curve(
    rho_s: &StratifiedProfile,
    eps0: f64,
    taus: &[f64],
    h0: Option<f64>,
) -> Result<(PerturbationCurve, CertificateReport)> {
    perturbation_energy_curve_with(|y| rho_s.eval(y), |y| rho_s.derivative(y), eps0, taus, h0)
}
