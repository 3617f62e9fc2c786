use std::f64::consts::PI;

use num_complex::Complex64;

use super::{cheb, fft, Domain, DomainKind, ScalarField, SobolevIndex, SpectralField};
use crate::error::{IpmError, Result};
use crate::tolerances;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
fn parity(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `b_q(x) / √π`, the L²(-π, π)-normalized Dirichlet eigenfunctions.
#[inline]
pub(crate) fn strip_basis(q: usize, x: f64) -> f64 {
    let arg = 0.5 * q as f64 * x;
    let b = if q % 2 == 1 { arg.cos() } else { arg.sin() };
    b / PI.sqrt()
}

/// Row `q - 1` holds `b̃_q` on the CGL nodes.
pub(crate) fn strip_basis_table(d: &Domain) -> Vec<Vec<f64>> {
    let x = cheb::nodes(d.ny());
    (1..=d.strip_modes())
        .map(|q| x.iter().map(|&xj| strip_basis(q, xj)).collect())
        .collect()
}

pub fn forward_transform(f: &ScalarField) -> Result<SpectralField> {
    if let Some(idx) = f.values().iter().position(|v| !v.is_finite()) {
        return Err(IpmError::NonFinite(idx));
    }
    let d = *f.domain();
    let (nx, ny) = (d.nx(), d.ny());
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::rows(&mut data, nx, false);
    match d.kind() {
        DomainKind::Torus => {
            fft::cols(&mut data, nx, ny, false);
            let scale = 1.0 / (nx * ny) as f64;
            for j2 in 0..ny {
                for j1 in 0..nx {
                    // grid starts at -π: e^{-ik·(-π)} = (-1)^{k1+k2}
                    data[j2 * nx + j1] *= scale * parity(j1 + j2);
                }
            }
            SpectralField::new(d, data)
        }
        DomainKind::Strip => {
            let scale = 1.0 / nx as f64;
            for j in 0..ny {
                for j1 in 0..nx {
                    data[j * nx + j1] *= scale * parity(j1);
                }
            }
            let w = cheb::clenshaw_curtis_weights(ny);
            let basis = strip_basis_table(&d);
            let root = (2.0 * PI).sqrt();
            let mut out = vec![ZERO; d.spectral_len()];
            for (qi, bq) in basis.iter().enumerate() {
                let row = &mut out[qi * nx..(qi + 1) * nx];
                for j in 0..ny {
                    let pj = root * w[j] * bq[j];
                    if pj == 0.0 {
                        continue;
                    }
                    let src = &data[j * nx..(j + 1) * nx];
                    for (o, s) in row.iter_mut().zip(src) {
                        *o += s * pj;
                    }
                }
            }
            SpectralField::new(d, out)
        }
    }
}

/// Largest `|c(k) - conj c(-k)|` relative to max|c|, with `-k` taken modulo the grid.
pub fn symmetry_defect(f: &SpectralField) -> f64 {
    let d = f.domain();
    let nx = d.nx();
    let c = f.coeffs();
    let rows = c.len() / nx;
    let mut defect: f64 = 0.0;
    for r in 0..rows {
        let mr = match d.kind() {
            DomainKind::Torus => (d.ny() - r) % d.ny(),
            DomainKind::Strip => r,
        };
        for j1 in 0..nx {
            let m1 = (nx - j1) % nx;
            defect = defect.max((c[r * nx + j1] - c[mr * nx + m1].conj()).norm());
        }
    }
    let scale = f.max_abs();
    if scale == 0.0 {
        defect
    } else {
        defect / scale
    }
}

pub fn inverse_transform(f: &SpectralField) -> Result<ScalarField> {
    let defect = symmetry_defect(f);
    if !(defect <= tolerances::INVERSE_SYMMETRY) {
        return Err(IpmError::SymmetryViolation(defect));
    }
    let d = *f.domain();
    let (nx, ny) = (d.nx(), d.ny());
    let mut data = match d.kind() {
        DomainKind::Torus => {
            let mut data = f.coeffs().to_vec();
            for j2 in 0..ny {
                for j1 in 0..nx {
                    data[j2 * nx + j1] *= parity(j1 + j2);
                }
            }
            fft::cols(&mut data, nx, ny, true);
            data
        }
        DomainKind::Strip => {
            let basis = strip_basis_table(&d);
            let norm = 1.0 / (2.0 * PI).sqrt();
            let mut data = vec![ZERO; nx * ny];
            for (qi, bq) in basis.iter().enumerate() {
                let src = &f.coeffs()[qi * nx..(qi + 1) * nx];
                for j in 0..ny {
                    let b = bq[j] * norm;
                    let row = &mut data[j * nx..(j + 1) * nx];
                    for (o, s) in row.iter_mut().zip(src) {
                        *o += s * b;
                    }
                }
            }
            for j in 0..ny {
                for j1 in 0..nx {
                    data[j * nx + j1] *= parity(j1);
                }
            }
            data
        }
    };
    fft::rows(&mut data, nx, true);
    let values: Vec<f64> = data.iter().map(|c| c.re).collect();
    if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
        return Err(IpmError::NonFinite(idx));
    }
    Ok(ScalarField::from_vec_unchecked(d, values))
}

/// Spectral derivative along `axis` (1 or 2). Axis 2 is only available on the torus.
pub fn ddx(f: &SpectralField, axis: u8) -> Result<SpectralField> {
    let d = f.domain();
    match (axis, d.kind()) {
        (1, _) => {
            let nyq = -(d.nx() as i64) / 2;
            Ok(f.map_modes(|k1, _| {
                if k1 == nyq {
                    ZERO
                } else {
                    Complex64::new(0.0, k1 as f64)
                }
            }))
        }
        (2, DomainKind::Torus) => {
            let nyq = -(d.ny() as i64) / 2;
            Ok(f.map_modes(|_, k2| {
                if k2 == nyq {
                    ZERO
                } else {
                    Complex64::new(0.0, k2 as f64)
                }
            }))
        }
        (2, DomainKind::Strip) => Err(IpmError::Unsupported {
            domain: "strip",
            what: "spectral x2 derivative in the eigenbasis layout".into(),
        }),
        _ => Err(IpmError::InvalidArgument(format!(
            "axis must be 1 or 2, got {axis}"
        ))),
    }
}

pub fn inverse_laplacian(f: &SpectralField) -> Result<SpectralField> {
    let d = f.domain();
    if d.kind() == DomainKind::Torus {
        let mean = f.coeffs()[0].norm();
        if mean > tolerances::MEAN_MODE * f.max_abs().max(1.0) {
            return Err(IpmError::NonZeroMean(mean));
        }
    }
    let mut out = f.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let lam = f.eigenvalue(idx);
        *c = if lam == 0.0 { ZERO } else { *c / lam };
    }
    Ok(out)
}

/// `‖f‖_{Ḣ^s}` (or `H^s`). Torus weights carry the `(2π)²` Parseval factor;
/// strip coefficients are orthonormal so no factor appears.
pub fn sobolev_norm(f: &SpectralField, idx: SobolevIndex) -> Result<f64> {
    let d = f.domain();
    let pref = match d.kind() {
        DomainKind::Torus => 4.0 * PI * PI,
        DomainKind::Strip => 1.0,
    };
    let mut sum = 0.0;
    for (i, c) in f.coeffs().iter().enumerate() {
        let m2 = c.norm_sqr();
        if m2 == 0.0 {
            continue;
        }
        let lam = f.eigenvalue(i);
        let w = if idx.homogeneous {
            if lam == 0.0 {
                continue;
            }
            lam.powf(idx.s)
        } else {
            (1.0 + lam).powf(idx.s)
        };
        sum += w * m2;
        if !sum.is_finite() {
            let (k1, k2) = f.mode(i);
            return Err(IpmError::NormOverflow { k1, k2 });
        }
    }
    Ok((pref * sum).sqrt())
}

/// Physical-space gradient `(∂x1 f, ∂x2 f)`: spectral in periodic directions
/// (Nyquist dropped), Chebyshev collocation in x2 on the strip.
pub fn gradient(f: &ScalarField) -> (ScalarField, ScalarField) {
    let d = *f.domain();
    let (nx, ny) = (d.nx(), d.ny());
    let mut c: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::rows(&mut c, nx, false);
    let norm = 1.0 / nx as f64;
    let mut d1 = c.clone();
    for (idx, z) in d1.iter_mut().enumerate() {
        let j1 = idx % nx;
        let k = if j1 == nx / 2 { 0.0 } else { fft::wavenumber(j1, nx) as f64 };
        *z *= Complex64::new(0.0, k * norm);
    }
    fft::rows(&mut d1, nx, true);
    let g1: Vec<f64> = d1.iter().map(|z| z.re).collect();
    let g2: Vec<f64> = match d.kind() {
        DomainKind::Torus => {
            fft::cols(&mut c, nx, ny, false);
            let norm = norm / ny as f64;
            for (idx, z) in c.iter_mut().enumerate() {
                let j2 = idx / nx;
                let k = if j2 == ny / 2 { 0.0 } else { fft::wavenumber(j2, ny) as f64 };
                *z *= Complex64::new(0.0, k * norm);
            }
            fft::cols(&mut c, nx, ny, true);
            fft::rows(&mut c, nx, true);
            c.iter().map(|z| z.re).collect()
        }
        DomainKind::Strip => {
            let m = nalgebra::DMatrix::from_column_slice(nx, ny, f.values());
            let out = m * cheb::diff_matrix(ny).transpose();
            out.as_slice().to_vec()
        }
    };
    (
        ScalarField::from_vec_unchecked(d, g1),
        ScalarField::from_vec_unchecked(d, g2),
    )
}

/// Point evaluation of the truncated series at `(x1, x2)`.
pub fn evaluate(f: &SpectralField, x1: f64, x2: f64) -> f64 {
    let d = f.domain();
    let nx = d.nx();
    let e1: Vec<Complex64> = (0..nx)
        .map(|j| Complex64::from_polar(1.0, fft::wavenumber(j, nx) as f64 * x1))
        .collect();
    let c = f.coeffs();
    let mut acc = ZERO;
    match d.kind() {
        DomainKind::Torus => {
            let ny = d.ny();
            for j2 in 0..ny {
                let e2 = Complex64::from_polar(1.0, fft::wavenumber(j2, ny) as f64 * x2);
                let row: Complex64 = c[j2 * nx..(j2 + 1) * nx]
                    .iter()
                    .zip(&e1)
                    .map(|(a, b)| a * b)
                    .sum();
                acc += row * e2;
            }
        }
        DomainKind::Strip => {
            let norm = 1.0 / (2.0 * PI).sqrt();
            for q in 1..=d.strip_modes() {
                let b = strip_basis(q, x2) * norm;
                let row: Complex64 = c[(q - 1) * nx..q * nx]
                    .iter()
                    .zip(&e1)
                    .map(|(a, b)| a * b)
                    .sum();
                acc += row * b;
            }
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(n: usize) -> Domain {
        Domain::torus(n, n).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn constant_maps_to_mean_mode() {
        let f = ScalarField::from_fn(torus(16), |_, _| 1.0);
        let c = forward_transform(&f).unwrap();
        assert!(close(c.get(0, 0), Complex64::new(1.0, 0.0), 1e-14));
        let rest: f64 = c.coeffs()[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(rest < 1e-14);
    }

    #[test]
    fn sine_coefficients() {
        let f = ScalarField::from_fn(torus(16), |_, y| y.sin());
        let c = forward_transform(&f).unwrap();
        let half_i = Complex64::new(0.0, 2.0).inv();
        assert!(close(c.get(0, 1), half_i, 1e-14));
        assert!(close(c.get(0, -1), -half_i, 1e-14));
    }

    #[test]
    fn brute_force_dft_matches() {
        let d = Domain::torus(16, 12).unwrap();
        let mut seed = 12345u64;
        let vals: Vec<f64> = (0..d.len())
            .map(|_| {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let f = ScalarField::new(d, vals).unwrap();
        let c = forward_transform(&f).unwrap();
        for j2 in 0..12 {
            for j1 in 0..16 {
                let k1 = fft::wavenumber(j1, 16) as f64;
                let k2 = fft::wavenumber(j2, 12) as f64;
                let mut s = ZERO;
                for j in 0..12 {
                    for i in 0..16 {
                        let ph = -(k1 * d.x1(i) + k2 * d.x2(j));
                        s += Complex64::from_polar(f.at(i, j), ph);
                    }
                }
                s /= (16 * 12) as f64;
                assert!(close(c.coeffs()[j2 * 16 + j1], s, 1e-12));
            }
        }
        let back = inverse_transform(&c).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_from_coefficients() {
        let d = torus(16);
        let mut c = SpectralField::zeros(d);
        c.set(1, 0, Complex64::new(0.5, 0.0)).unwrap();
        c.set(-1, 0, Complex64::new(0.5, 0.0)).unwrap();
        let f = inverse_transform(&c).unwrap();
        for j in 0..16 {
            for i in 0..16 {
                assert!((f.at(i, j) - d.x1(i).cos()).abs() < 1e-14);
            }
        }
        c.set(2, 3, Complex64::new(0.0, 1.0)).unwrap();
        assert!(matches!(
            inverse_transform(&c),
            Err(IpmError::SymmetryViolation(_))
        ));
    }

    #[test]
    fn derivatives_and_inverse_laplacian() {
        let d = torus(64);
        let f = ScalarField::from_fn(d, |x, y| (3.0 * x).sin() * (2.0 * y).cos());
        let df = inverse_transform(&ddx(&forward_transform(&f).unwrap(), 1).unwrap()).unwrap();
        let exact = ScalarField::from_fn(d, |x, y| 3.0 * (3.0 * x).cos() * (2.0 * y).cos());
        let err = df.axpy(-1.0, &exact).max_abs();
        assert!(err <= 1e-12, "{err}");

        let g = ScalarField::from_fn(d, |x, y| (2.0 * x + 3.0 * y).cos());
        let lg = inverse_transform(&inverse_laplacian(&forward_transform(&g).unwrap()).unwrap())
            .unwrap();
        assert!(lg.axpy(-1.0 / 13.0, &g).max_abs() < 1e-14);

        let one = ScalarField::from_fn(d, |_, _| 1.0);
        assert!(matches!(
            inverse_laplacian(&forward_transform(&one).unwrap()),
            Err(IpmError::NonZeroMean(_))
        ));
    }

    #[test]
    fn gradient_on_both_domains() {
        let s = Domain::strip(32, 41).unwrap();
        let f = ScalarField::from_fn(s, |x, y| (2.0 * x).sin() * (0.5 * y).cos());
        let (a, b) = gradient(&f);
        let ea = ScalarField::from_fn(s, |x, y| 2.0 * (2.0 * x).cos() * (0.5 * y).cos());
        let eb = ScalarField::from_fn(s, |x, y| -0.5 * (2.0 * x).sin() * (0.5 * y).sin());
        assert!(a.axpy(-1.0, &ea).max_abs() < 1e-12);
        assert!(b.axpy(-1.0, &eb).max_abs() < 1e-10);

        let d = torus(32);
        let f = ScalarField::from_fn(d, |x, y| x.cos() * (3.0 * y).sin());
        let (a, b) = gradient(&f);
        let ea = ScalarField::from_fn(d, |x, y| -x.sin() * (3.0 * y).sin());
        let eb = ScalarField::from_fn(d, |x, y| 3.0 * x.cos() * (3.0 * y).cos());
        assert!(a.axpy(-1.0, &ea).max_abs() < 1e-13);
        assert!(b.axpy(-1.0, &eb).max_abs() < 1e-12);
    }

    #[test]
    fn sobolev_norm_of_sine() {
        let f = ScalarField::from_fn(torus(32), |_, y| y.sin());
        let c = forward_transform(&f).unwrap();
        for s in [0.0, -1.0, 2.5] {
            let n = sobolev_norm(&c, SobolevIndex::homogeneous(s)).unwrap();
            assert!((n - PI * 2f64.sqrt()).abs() < 1e-12);
        }
        let z = SpectralField::zeros(*c.domain());
        assert_eq!(sobolev_norm(&z, SobolevIndex::homogeneous(3.0)).unwrap(), 0.0);
    }

    #[test]
    fn sobolev_overflow_reports_mode() {
        let d = torus(16);
        let mut c = SpectralField::zeros(d);
        c.set(5, 0, Complex64::new(1.0, 0.0)).unwrap();
        c.set(-5, 0, Complex64::new(1.0, 0.0)).unwrap();
        let e = sobolev_norm(&c, SobolevIndex::homogeneous(300.0)).unwrap_err();
        assert!(matches!(e, IpmError::NormOverflow { k1: 5, k2: 0 }));
    }

    #[test]
    fn strip_sine_mode_normalization() {
        let d = Domain::strip(16, 33).unwrap();
        let mut c = SpectralField::zeros(d);
        c.set(0, 2, Complex64::new(1.0, 0.0)).unwrap();
        let f = inverse_transform(&c).unwrap();
        let k = 1.0 / (2.0 * PI * PI).sqrt();
        for j in 0..d.ny() {
            for i in 0..d.nx() {
                assert!((f.at(i, j) - k * d.x2(j).sin()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn strip_inverse_laplacian_of_first_mode() {
        let d = Domain::strip(16, 65).unwrap();
        let f = ScalarField::from_fn(d, |_, y| (0.5 * y).cos());
        let g = inverse_transform(&inverse_laplacian(&forward_transform(&f).unwrap()).unwrap())
            .unwrap();
        let err = g.axpy(-4.0, &f).max_abs();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn strip_gram_matrix_is_identity() {
        for ny in [33, 65, 129] {
            let d = Domain::strip(8, ny).unwrap();
            let qmax = d.strip_modes();
            for q in 1..=qmax {
                let f = ScalarField::from_fn(d, |x, y| {
                    (2.0 * x).cos() * strip_basis(q, y) * (2.0 / (2.0 * PI)).sqrt()
                });
                let c = forward_transform(&f).unwrap();
                for r in 1..=qmax {
                    // cos(2x)·√2/√(2π) = (ω_{2,q} + ω_{-2,q})/√2
                    let want = if r == q { 1.0 / 2f64.sqrt() } else { 0.0 };
                    assert!((c.get(2, r as i64).re - want).abs() < 1e-10, "ny={ny} q={q} r={r}");
                    assert!((c.get(-2, r as i64).re - want).abs() < 1e-10);
                }
            }
        }
    }
}
