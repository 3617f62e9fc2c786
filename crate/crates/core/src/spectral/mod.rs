//! Grids, fields and spectral operators on the torus `[-π, π)²` and the
//! periodic strip `T × [-π, π]`.
//!
//! Coefficient layout (part of the public contract):
//!
//! * Torus: `coeffs[j2 * nx + j1]` holds `ĉ(k1, k2)` with
//!   `f(x) = Σ ĉ(k) e^{i k·x}`, `ĉ(k) = (2π)^{-2} ∫ e^{-i k·x} f dx`, and `k`
//!   the signed wavenumber of FFT slot `j` (`j` for `j < n/2`, `j - n`
//!   otherwise, so `k ∈ {-n/2, .., n/2 - 1}`).
//! * Strip: `coeffs[(q - 1) * nx + j1]` holds `c(p, q)` against the
//!   L²(S)-orthonormal eigenfunctions `e^{i p x1}/√(2π) · b_q(x2)/√π` with
//!   `b_q = cos(q x2 / 2)` for odd `q` and `sin(q x2 / 2)` for even `q`,
//!   `q = 1..=Q`. The Laplacian eigenvalue of mode `(p, q)` is `p² + q²/4`.
//!
//! Odd-order derivatives zero the Nyquist slot `k = -n/2`.

pub mod cheb;
pub(crate) mod fft;
mod transform;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{IpmError, Result};

pub use fft::{slot, wavenumber};
pub use transform::{
    ddx, evaluate, forward_transform, gradient, inverse_laplacian, inverse_transform, sobolev_norm,
    symmetry_defect,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Torus,
    Strip,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Torus => "torus",
            DomainKind::Strip => "strip",
        }
    }
}

/// Tensor grid description. `x1` is always periodic with `nx` uniform samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Domain {
    kind: DomainKind,
    nx: usize,
    ny: usize,
    modes: usize,
}

impl Domain {
    pub fn torus(nx: usize, ny: usize) -> Result<Self> {
        check_periodic_axis("nx", nx)?;
        check_periodic_axis("ny", ny)?;
        Ok(Domain {
            kind: DomainKind::Torus,
            nx,
            ny,
            modes: 0,
        })
    }

    /// Strip with the default eigenbasis truncation [`Domain::default_strip_modes`].
    pub fn strip(nx: usize, ny: usize) -> Result<Self> {
        Self::strip_with_modes(nx, ny, Self::default_strip_modes(ny))
    }

    pub fn strip_with_modes(nx: usize, ny: usize, modes: usize) -> Result<Self> {
        check_periodic_axis("nx", nx)?;
        if ny < 8 {
            return Err(IpmError::InvalidDomain(format!(
                "strip needs at least 8 Chebyshev points, got {ny}"
            )));
        }
        if modes == 0 {
            return Err(IpmError::InvalidDomain(
                "strip eigenbasis truncation must be positive".into(),
            ));
        }
        Ok(Domain {
            kind: DomainKind::Strip,
            nx,
            ny,
            modes,
        })
    }

    /// Largest truncation for which Clenshaw–Curtis projection on `ny` nodes keeps
    /// the eigenbasis Gram matrix at the identity to 1e-10.
    pub fn default_strip_modes(ny: usize) -> usize {
        let deg = ny.saturating_sub(1) as f64;
        ((deg / PI).floor() as i64 - 7).max(1) as usize
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    /// Strip eigenbasis truncation `Q` (zero on the torus).
    pub fn strip_modes(&self) -> usize {
        self.modes
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn is_torus(&self) -> bool {
        self.kind == DomainKind::Torus
    }

    pub fn x1(&self, i: usize) -> f64 {
        -PI + 2.0 * PI * i as f64 / self.nx as f64
    }

    pub fn x2(&self, j: usize) -> f64 {
        match self.kind {
            DomainKind::Torus => -PI + 2.0 * PI * j as f64 / self.ny as f64,
            DomainKind::Strip => cheb::nodes(self.ny)[j],
        }
    }

    pub fn x1_grid(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x1(i)).collect()
    }

    pub fn x2_grid(&self) -> Vec<f64> {
        match self.kind {
            DomainKind::Torus => (0..self.ny).map(|j| self.x2(j)).collect(),
            DomainKind::Strip => cheb::nodes(self.ny),
        }
    }

    pub fn dx1(&self) -> f64 {
        2.0 * PI / self.nx as f64
    }

    /// Smallest x2 spacing (uniform on the torus, wall spacing on the strip).
    pub fn dx2_min(&self) -> f64 {
        match self.kind {
            DomainKind::Torus => 2.0 * PI / self.ny as f64,
            DomainKind::Strip => {
                let x = cheb::nodes(self.ny);
                x[1] - x[0]
            }
        }
    }

    /// Quadrature weights in x2 (trapezoid on the torus, Clenshaw–Curtis on the strip).
    pub fn x2_weights(&self) -> Vec<f64> {
        match self.kind {
            DomainKind::Torus => vec![2.0 * PI / self.ny as f64; self.ny],
            DomainKind::Strip => cheb::clenshaw_curtis_weights(self.ny),
        }
    }

    /// ∫ f dx over the domain for grid samples `values`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let w2 = self.x2_weights();
        let dx1 = self.dx1();
        let mut total = 0.0;
        for (j, w) in w2.iter().enumerate() {
            let row: f64 = values[j * self.nx..(j + 1) * self.nx].iter().sum();
            total += w * row;
        }
        total * dx1
    }

    /// Mirror index of row `j` under x2 ↦ -x2.
    pub fn mirror_x2(&self, j: usize) -> usize {
        match self.kind {
            DomainKind::Torus => (self.ny - j) % self.ny,
            DomainKind::Strip => self.ny - 1 - j,
        }
    }

    /// Mirror index of column `i` under x1 ↦ -x1.
    pub fn mirror_x1(&self, i: usize) -> usize {
        (self.nx - i) % self.nx
    }

    /// Number of spectral coefficients in the layout of this domain.
    pub fn spectral_len(&self) -> usize {
        match self.kind {
            DomainKind::Torus => self.nx * self.ny,
            DomainKind::Strip => self.nx * self.modes,
        }
    }
}

fn check_periodic_axis(name: &str, n: usize) -> Result<()> {
    if n < 8 || n % 2 != 0 {
        return Err(IpmError::InvalidDomain(format!(
            "{name} must be even and at least 8, got {n}"
        )));
    }
    Ok(())
}

/// Grid samples `values[j * nx + i] = f(x1_i, x2_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    domain: Domain,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(IpmError::DimensionMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(IpmError::NonFinite(idx));
        }
        Ok(ScalarField { domain, values })
    }

    pub(crate) fn from_vec_unchecked(domain: Domain, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), domain.len());
        ScalarField { domain, values }
    }

    pub fn zeros(domain: Domain) -> Self {
        ScalarField {
            domain,
            values: vec![0.0; domain.len()],
        }
    }

    pub fn from_fn(domain: Domain, f: impl Fn(f64, f64) -> f64) -> Self {
        let x1 = domain.x1_grid();
        let x2 = domain.x2_grid();
        let mut values = Vec::with_capacity(domain.len());
        for &y in &x2 {
            for &x in &x1 {
                values.push(f(x, y));
            }
        }
        ScalarField { domain, values }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.domain.nx + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let nx = self.domain.nx;
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn integral(&self) -> f64 {
        self.domain.integrate(&self.values)
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        self.domain.integrate(&sq).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        let abs: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        self.domain.integrate(&abs)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            domain: self.domain,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> ScalarField {
        self.map(|v| a * v)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &ScalarField) -> ScalarField {
        debug_assert_eq!(self.domain, other.domain);
        ScalarField {
            domain: self.domain,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        }
    }

    /// Largest deviation from oddness in x2, relative to max|f| (0 for the zero field).
    pub fn odd_x2_defect(&self) -> f64 {
        let d = &self.domain;
        let mut defect: f64 = 0.0;
        for j in 0..d.ny {
            let m = d.mirror_x2(j);
            for i in 0..d.nx {
                defect = defect.max((self.at(i, j) + self.at(i, m)).abs());
            }
        }
        relative(defect, self.max_abs())
    }

    /// Largest deviation from evenness in x1, relative to max|f|.
    pub fn even_x1_defect(&self) -> f64 {
        let d = &self.domain;
        let mut defect: f64 = 0.0;
        for j in 0..d.ny {
            for i in 0..d.nx {
                let m = d.mirror_x1(i);
                defect = defect.max((self.at(i, j) - self.at(m, j)).abs());
            }
        }
        relative(defect, self.max_abs())
    }
}

fn relative(defect: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        defect
    } else {
        defect / scale
    }
}

/// Spectral coefficients in the layout documented at module level.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    domain: Domain,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(domain: Domain, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != domain.spectral_len() {
            return Err(IpmError::DimensionMismatch {
                expected: domain.spectral_len(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField { domain, coeffs })
    }

    pub fn zeros(domain: Domain) -> Self {
        SpectralField {
            domain,
            coeffs: vec![Complex64::new(0.0, 0.0); domain.spectral_len()],
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Slot of mode `(k1, k2)`; on the strip `k2` is the eigen-index `q >= 1`.
    pub fn index(&self, k1: i64, k2: i64) -> Option<usize> {
        let d = &self.domain;
        let j1 = slot(k1, d.nx)?;
        match d.kind {
            DomainKind::Torus => Some(slot(k2, d.ny)? * d.nx + j1),
            DomainKind::Strip => {
                if k2 < 1 || k2 as usize > d.modes {
                    None
                } else {
                    Some((k2 as usize - 1) * d.nx + j1)
                }
            }
        }
    }

    /// Coefficient of mode `(k1, k2)`, zero when outside the layout.
    pub fn get(&self, k1: i64, k2: i64) -> Complex64 {
        self.index(k1, k2)
            .map(|i| self.coeffs[i])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn set(&mut self, k1: i64, k2: i64, value: Complex64) -> Result<()> {
        let i = self.index(k1, k2).ok_or_else(|| {
            IpmError::InvalidArgument(format!("mode ({k1}, {k2}) outside layout"))
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Signed mode `(k1, k2)` of flat slot `idx` (strip: `k2 = q`).
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        let d = &self.domain;
        let j1 = idx % d.nx;
        let j2 = idx / d.nx;
        match d.kind {
            DomainKind::Torus => (wavenumber(j1, d.nx), wavenumber(j2, d.ny)),
            DomainKind::Strip => (wavenumber(j1, d.nx), j2 as i64 + 1),
        }
    }

    /// Eigenvalue of -Δ for slot `idx`: |k|² on the torus, p² + q²/4 on the strip.
    pub fn eigenvalue(&self, idx: usize) -> f64 {
        let (k1, k2) = self.mode(idx);
        match self.domain.kind {
            DomainKind::Torus => (k1 * k1 + k2 * k2) as f64,
            DomainKind::Strip => (k1 * k1) as f64 + (k2 * k2) as f64 / 4.0,
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        SpectralField {
            domain: self.domain,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// Multiply every coefficient by `m(k1, k2)`.
    pub fn map_modes(&self, m: impl Fn(i64, i64) -> Complex64) -> SpectralField {
        let coeffs = (0..self.coeffs.len())
            .map(|idx| {
                let (k1, k2) = self.mode(idx);
                self.coeffs[idx] * m(k1, k2)
            })
            .collect();
        SpectralField {
            domain: self.domain,
            coeffs,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }
}

/// Sobolev exponent. Homogeneous norms use weights λ^s and drop the torus mean;
/// inhomogeneous norms use (1 + λ)^s, with λ the Laplacian eigenvalue of the mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex {
    pub s: f64,
    pub homogeneous: bool,
}

impl SobolevIndex {
    pub fn homogeneous(s: f64) -> Self {
        SobolevIndex {
            s,
            homogeneous: true,
        }
    }
    pub fn inhomogeneous(s: f64) -> Self {
        SobolevIndex {
            s,
            homogeneous: false,
        }
    }
}
