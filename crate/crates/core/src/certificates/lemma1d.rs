use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{IpmError, Result};
use crate::spectral::fft;

use super::{CertificateReport, ReportBuilder};

/// Mean-zero trigonometric interpolant of samples on `x_i = -π + 2πi/n` (Nyquist dropped).
struct Series {
    /// `(k, ĥ_k)` for `1 ≤ |k| < n/2`.
    modes: Vec<(f64, Complex64)>,
}

impl Series {
    fn new(samples: &[f64]) -> Self {
        let n = samples.len();
        let mut c: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::rows(&mut c, n, false);
        let modes = (0..n)
            .filter_map(|j| {
                let k = fft::wavenumber(j, n);
                if k == 0 || 2 * k.unsigned_abs() as usize >= n {
                    return None;
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                Some((k as f64, c[j] * (sign / n as f64)))
            })
            .collect();
        Series { modes }
    }

    fn eval(&self, x: f64) -> f64 {
        self.modes
            .iter()
            .map(|(k, c)| (c * Complex64::from_polar(1.0, k * x)).re)
            .sum()
    }

    /// `‖h‖²_{Ḣα} = 2π Σ |k|^{2α} |ĥ_k|²`.
    fn hs2(&self, alpha: f64) -> f64 {
        2.0 * PI
            * self
                .modes
                .iter()
                .map(|(k, c)| k.abs().powf(2.0 * alpha) * c.norm_sqr())
                .sum::<f64>()
    }

    fn kmax(&self) -> usize {
        self.modes.iter().map(|m| m.0.abs() as usize).max().unwrap_or(0)
    }
}

/// `C(x) = (Σ_{0<|k|≤K} 4 sin²(kx/2) / |k|^{2α})^{1/2} / (√(2π) x^γ)`: by
/// Cauchy–Schwarz `|h(x) - h(0)| / x^γ ≤ C(x) ‖h‖_{Ḣα}` for every series with modes
/// up to `K`. Returns `sup_{0<x≤π} C(x)` (log-spaced search).
pub fn embedding_constant(alpha: f64, kmax: usize) -> f64 {
    let gamma = alpha - 0.5;
    let c = |x: f64| {
        let s: f64 = (1..=kmax)
            .map(|k| {
                let k = k as f64;
                2.0 * 4.0 * (0.5 * k * x).sin().powi(2) / k.powf(2.0 * alpha)
            })
            .sum();
        s.sqrt() / ((2.0 * PI).sqrt() * x.powf(gamma))
    };
    let lo = (PI / (100.0 * kmax.max(1) as f64)).ln();
    let hi = PI.ln();
    let m = 2000;
    (0..=m)
        .map(|i| c((lo + (hi - lo) * i as f64 / m as f64).exp()))
        .fold(0.0, f64::max)
}

struct Chain {
    gamma: f64,
    witness: f64,
    window: f64,
    quotient: f64,
    quotient_bound: f64,
    /// `(c/2)^{1+2γ} / C*`
    constant: f64,
}

fn chain(h: &Series, c: f64, delta: f64, alpha: f64) -> Result<Chain> {
    let gamma = alpha - 0.5;
    let window = 4.0 * delta / (c * c);
    let h0 = h.eval(0.0);
    let reach = window.min(PI);
    let m = 4000;
    let witness = (1..=m)
        .map(|i| reach * i as f64 / m as f64)
        .find(|&x| h.eval(x) > -0.5 * c)
        .ok_or_else(|| IpmError::Hypothesis("no witness point with h > -c/2 in (0, π]".into()))?;
    let quotient = (h.eval(witness) - h0).abs() / witness.powf(gamma);
    let quotient_bound = (0.5 * c).powf(1.0 + 2.0 * gamma) * delta.powf(-gamma);
    let constant = (0.5 * c).powf(1.0 + 2.0 * gamma) / embedding_constant(alpha, h.kmax());
    Ok(Chain {
        gamma,
        witness,
        window,
        quotient,
        quotient_bound,
        constant,
    })
}

/// Lower bound `‖f‖_{Ḣα} ≥ c(α, c0) δ^{-α+1/2}` for `f(0) = 0`, `∫f ≥ c0`.
///
/// `samples` are values on the grid `x_i = -π + 2πi/n`. Since `∫f ≥ c0` only gives
/// `h(0) = -f̄ ≤ -c0/2π`, the chain runs with `c = c0/2π`: a witness
/// `x0 ∈ (0, 4δ/c²)` with `h(x0) > -c/2`, the Hölder quotient bound
/// `(c/2)^{1+2γ} δ^{-γ}` with `γ = α - 1/2`, and the embedding step with the explicit
/// lattice constant of [`embedding_constant`]. For `α > 3/2` the bound goes through
/// `‖h‖_{Ḣα} ≥ ‖h‖_{Ḣ¹}^α ‖h‖_{L²}^{1-α}` and the `α = 1` chain.
pub fn check_lemma_1d(samples: &[f64], c0: f64, alpha: f64, delta: Option<f64>) -> Result<CertificateReport> {
    let n = samples.len();
    if n < 8 || n % 2 != 0 {
        return Err(IpmError::InvalidArgument(format!(
            "need an even number (≥ 8) of samples, got {n}"
        )));
    }
    if !(alpha > 0.5) {
        return Err(IpmError::InvalidArgument(format!("alpha must exceed 1/2, got {alpha}")));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(IpmError::NonFinite(samples.iter().position(|v| !v.is_finite()).unwrap()));
    }
    let fmax = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if samples[n / 2].abs() > 1e-12 * fmax.max(1.0) {
        return Err(IpmError::Hypothesis(format!("f(0) = {:.3e} ≠ 0", samples[n / 2])));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let integral = 2.0 * PI * mean;
    if !(c0 > 0.0) || integral < c0 * (1.0 - 1e-12) {
        return Err(IpmError::Hypothesis(format!(
            "∫f = {integral:.6e} is not ≥ c0 = {c0:.6e} > 0"
        )));
    }
    let var = 2.0 * PI / n as f64 * samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    let delta = match delta {
        Some(d) if d < var => {
            return Err(IpmError::Hypothesis(format!(
                "δ = {d:.6e} is below ∫|f - f̄|² = {var:.6e}"
            )))
        }
        Some(d) => d,
        None => var,
    };
    let c = c0 / (2.0 * PI);
    let h = Series::new(samples);
    let norm = h.hs2(alpha).sqrt();
    let mut b = ReportBuilder::new("lemma_1d", 0.0);
    b.context(format!("alpha={alpha}"))
        .value("delta", delta)
        .value("c", c)
        .value("hs_norm", norm);

    let route = if alpha <= 1.5 { alpha } else { 1.0 };
    let ch = chain(&h, c, delta, route)?;
    b.value("gamma", ch.gamma)
        .at_most("witness_in_window", ch.witness, ch.window)
        .at_least("holder_quotient", ch.quotient, ch.quotient_bound);
    if alpha <= 1.5 {
        b.at_least("hs_bound", norm, ch.constant * delta.powf(-ch.gamma));
    } else {
        let h1 = h.hs2(1.0).sqrt();
        let l2 = h.hs2(0.0).sqrt();
        b.at_least("h1_bound", h1, ch.constant * delta.powf(-0.5))
            .at_least("interpolation", norm * (1.0 + 1e-12), h1.powf(alpha) * l2.powf(1.0 - alpha))
            .at_least("hs_bound", norm, ch.constant.powf(alpha) * delta.powf(0.5 - alpha));
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect()
    }

    #[test]
    fn single_mode_norm() {
        let x = grid(64);
        let h = Series::new(&x.iter().map(|v| v.sin()).collect::<Vec<_>>());
        assert!((h.hs2(1.0).sqrt() - PI.sqrt()).abs() < 1e-13);
        assert!((h.hs2(2.5).sqrt() - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn shifted_cosine_passes() {
        let x = grid(128);
        let f: Vec<f64> = x.iter().map(|v| 1.0 - v.cos()).collect();
        for alpha in [0.75, 1.0, 1.5, 2.0] {
            let r = check_lemma_1d(&f, 2.0 * PI, alpha, None).unwrap();
            assert!(r.passed(), "{}", r.to_line());
        }
    }

    #[test]
    fn hypotheses() {
        let x = grid(64);
        let zero_mean: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        assert!(check_lemma_1d(&zero_mean, 0.1, 1.0, None).is_err());
        let f: Vec<f64> = x.iter().map(|v| 1.0 - v.cos()).collect();
        assert!(check_lemma_1d(&f, 2.0 * PI, 1.0, Some(1e-3)).is_err());
        assert!(check_lemma_1d(&f, 2.0 * PI, 0.5, None).is_err());
    }

    #[test]
    fn embedding_constant_is_bounded_below_three_halves() {
        let a = embedding_constant(1.0, 64);
        let b = embedding_constant(1.0, 1024);
        assert!((a - b).abs() / b < 0.05);
        // borderline exponent grows like √log K
        assert!(embedding_constant(1.5, 1024) > embedding_constant(1.5, 64));
    }
}
