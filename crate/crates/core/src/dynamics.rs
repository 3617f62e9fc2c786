//! Biot–Savart law, advection right-hand side, RK4 stepping, CFL control and
//! the spectral resolution monitor.
//!
//! The torus uses a full 2-D Fourier pseudospectral discretization with a
//! rectangular dealiasing mask. The strip is Fourier in x1 and Chebyshev
//! collocation in x2; only x1 is dealiased there. Retained wavenumbers satisfy
//! `|k| <= kcut = floor(fraction * n / 2)` and exclude the Nyquist slot.

use nalgebra::{DMatrix, Dyn, LU};
use num_complex::Complex64;

use crate::error::{IpmError, Result};
use crate::spectral::{cheb, fft, forward_transform, Domain, DomainKind, ScalarField};
use crate::tolerances;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u1: ScalarField,
    pub u2: ScalarField,
}

impl VelocityField {
    pub fn zeros(domain: Domain) -> Self {
        VelocityField {
            u1: ScalarField::zeros(domain),
            u2: ScalarField::zeros(domain),
        }
    }

    pub fn domain(&self) -> &Domain {
        self.u1.domain()
    }

    pub fn max_abs(&self) -> f64 {
        self.u1.max_abs().max(self.u2.max_abs())
    }

    pub fn l2_norm(&self) -> f64 {
        self.u1.l2_norm().hypot(self.u2.l2_norm())
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub cfl: f64,
    pub dealias_fraction: f64,
    pub t_end: f64,
    pub max_steps: usize,
    pub resolution_tail_max: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            cfl: 0.5,
            dealias_fraction: tolerances::DEALIAS_FRACTION,
            t_end: 1.0,
            max_steps: 1_000_000,
            resolution_tail_max: tolerances::RESOLUTION_TAIL_MAX,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(IpmError::InvalidArgument(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.dealias_fraction > 0.5 && self.dealias_fraction <= 1.0) {
            return Err(IpmError::InvalidArgument(format!(
                "dealias_fraction must lie in (1/2, 1], got {}",
                self.dealias_fraction
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(IpmError::InvalidArgument(format!(
                "t_end must be finite and non-negative, got {}",
                self.t_end
            )));
        }
        if !(self.resolution_tail_max >= 0.0) {
            return Err(IpmError::InvalidArgument(
                "resolution_tail_max must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionReport {
    pub tail_fraction: f64,
    pub tripped: bool,
}

/// Result of one RK4 step. `stages[i]` is the velocity used by stage `i`, so
/// marker curves can be advanced with the same Butcher tableau.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub rho: ScalarField,
    pub stages: [VelocityField; 4],
}

/// Retained-wavenumber cut for an axis of `n` samples.
pub fn retained_cut(n: usize, fraction: f64) -> usize {
    let k = (fraction * n as f64 / 2.0 + 1e-9).floor() as usize;
    k.min(n / 2 - 1)
}

struct StripOps {
    d1: DMatrix<f64>,
    helmholtz: Vec<Option<LU<f64, Dyn, Dyn>>>,
}

/// Discretized IPM operator for one grid and dealiasing fraction.
pub struct Dynamics {
    domain: Domain,
    kcut1: usize,
    kcut2: usize,
    k1: Vec<f64>,
    k2: Vec<f64>,
    keep1: Vec<bool>,
    keep2: Vec<bool>,
    strip: Option<StripOps>,
}

impl Dynamics {
    pub fn new(domain: Domain, dealias_fraction: f64) -> Result<Self> {
        if !(dealias_fraction > 0.5 && dealias_fraction <= 1.0) {
            return Err(IpmError::InvalidArgument(format!(
                "dealias_fraction must lie in (1/2, 1], got {dealias_fraction}"
            )));
        }
        let nx = domain.nx();
        let kcut1 = retained_cut(nx, dealias_fraction);
        let k1: Vec<f64> = (0..nx).map(|j| fft::wavenumber(j, nx) as f64).collect();
        let keep1: Vec<bool> = (0..nx)
            .map(|j| fft::wavenumber(j, nx).unsigned_abs() as usize <= kcut1)
            .collect();
        let (kcut2, k2, keep2, strip) = match domain.kind() {
            DomainKind::Torus => {
                let ny = domain.ny();
                let kcut2 = retained_cut(ny, dealias_fraction);
                let k2 = (0..ny).map(|j| fft::wavenumber(j, ny) as f64).collect();
                let keep2 = (0..ny)
                    .map(|j| fft::wavenumber(j, ny).unsigned_abs() as usize <= kcut2)
                    .collect();
                (kcut2, k2, keep2, None)
            }
            DomainKind::Strip => {
                let ny = domain.ny();
                let d1 = cheb::diff_matrix(ny);
                let d2 = &d1 * &d1;
                let mut helmholtz = Vec::with_capacity(kcut1 + 1);
                helmholtz.push(None);
                for p in 1..=kcut1 {
                    let mut a = -&d2;
                    for j in 0..ny {
                        a[(j, j)] += (p * p) as f64;
                    }
                    for edge in [0, ny - 1] {
                        a.row_mut(edge).fill(0.0);
                        a[(edge, edge)] = 1.0;
                    }
                    let lu = a.lu();
                    if !lu.is_invertible() {
                        return Err(IpmError::InvalidDomain(format!(
                            "singular Helmholtz collocation matrix for p = {p}"
                        )));
                    }
                    helmholtz.push(Some(lu));
                }
                (0, Vec::new(), Vec::new(), Some(StripOps { d1, helmholtz }))
            }
        };
        Ok(Dynamics {
            domain,
            kcut1,
            kcut2,
            k1,
            k2,
            keep1,
            keep2,
            strip,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Retained cuts `(k1, k2)`; on the strip the second entry is the eigenbasis truncation Q.
    pub fn cuts(&self) -> (usize, usize) {
        match self.domain.kind() {
            DomainKind::Torus => (self.kcut1, self.kcut2),
            DomainKind::Strip => (self.kcut1, self.domain.strip_modes()),
        }
    }

    fn check(&self, f: &ScalarField) -> Result<()> {
        if f.domain() != &self.domain {
            return Err(IpmError::InvalidArgument(
                "field domain differs from the operator domain".into(),
            ));
        }
        Ok(())
    }

    // ---- raw transforms (no grid phase: multipliers depend on k only) ----

    fn fwd(&self, v: &[f64]) -> Vec<Complex64> {
        let (nx, ny) = (self.domain.nx(), self.domain.ny());
        let mut data: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft::rows(&mut data, nx, false);
        let mut scale = 1.0 / nx as f64;
        if self.domain.is_torus() {
            fft::cols(&mut data, nx, ny, false);
            scale /= ny as f64;
        }
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    fn inv(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        let (nx, ny) = (self.domain.nx(), self.domain.ny());
        if self.domain.is_torus() {
            fft::cols(&mut data, nx, ny, true);
        }
        fft::rows(&mut data, nx, true);
        data.into_iter().map(|c| c.re).collect()
    }

    fn mask(&self, data: &mut [Complex64]) {
        let nx = self.domain.nx();
        for (idx, c) in data.iter_mut().enumerate() {
            let j1 = idx % nx;
            let keep = self.keep1[j1] && (self.strip.is_some() || self.keep2[idx / nx]);
            if !keep {
                *c = ZERO;
            }
        }
    }

    fn apply(&self, data: &[Complex64], m: impl Fn(f64, f64) -> Complex64) -> Vec<Complex64> {
        let nx = self.domain.nx();
        data.iter()
            .enumerate()
            .map(|(idx, c)| {
                let k2 = if self.strip.is_some() {
                    0.0
                } else {
                    self.k2[idx / nx]
                };
                c * m(self.k1[idx % nx], k2)
            })
            .collect()
    }

    /// Collocation x2 derivative on the strip (values row-major, x1 fastest).
    fn strip_dx2(&self, v: &[f64]) -> Vec<f64> {
        let ops = self.strip.as_ref().expect("strip operator");
        let (nx, ny) = (self.domain.nx(), self.domain.ny());
        let m = DMatrix::from_column_slice(nx, ny, v);
        let out = m * ops.d1.transpose();
        out.as_slice().to_vec()
    }

    /// Dealiasing projection in physical space.
    pub fn filter(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f)?;
        let mut c = self.fwd(f.values());
        self.mask(&mut c);
        Ok(ScalarField::from_vec_unchecked(self.domain, self.inv(c)))
    }

    /// Stream function and velocity from the (already projected) x1 spectrum.
    fn velocity_from(&self, rho_hat: &[Complex64]) -> (Vec<f64>, VelocityField) {
        let d = self.domain;
        match &self.strip {
            None => {
                let psi = self.apply(rho_hat, |k1, k2| {
                    let l = k1 * k1 + k2 * k2;
                    if l == 0.0 {
                        ZERO
                    } else {
                        Complex64::new(0.0, k1 / l)
                    }
                });
                let u1 = self.apply(rho_hat, |k1, k2| {
                    let l = k1 * k1 + k2 * k2;
                    if l == 0.0 {
                        ZERO
                    } else {
                        Complex64::new(k1 * k2 / l, 0.0)
                    }
                });
                let u2 = self.apply(rho_hat, |k1, k2| {
                    let l = k1 * k1 + k2 * k2;
                    if l == 0.0 {
                        ZERO
                    } else {
                        Complex64::new(-k1 * k1 / l, 0.0)
                    }
                });
                (
                    self.inv(psi),
                    VelocityField {
                        u1: ScalarField::from_vec_unchecked(d, self.inv(u1)),
                        u2: ScalarField::from_vec_unchecked(d, self.inv(u2)),
                    },
                )
            }
            Some(ops) => {
                let (nx, ny) = (d.nx(), d.ny());
                let mut psi_hat = vec![ZERO; nx * ny];
                for p in 1..=self.kcut1 {
                    let lu = ops.helmholtz[p].as_ref().expect("factored");
                    let slots = [p, nx - p];
                    let mut rhs = DMatrix::<f64>::zeros(ny, 4);
                    for (s, &j1) in slots.iter().enumerate() {
                        let ik = Complex64::new(0.0, self.k1[j1]);
                        for j in 1..ny - 1 {
                            let v = ik * rho_hat[j * nx + j1];
                            rhs[(j, 2 * s)] = v.re;
                            rhs[(j, 2 * s + 1)] = v.im;
                        }
                    }
                    let sol = lu.solve(&rhs).expect("invertible Helmholtz matrix");
                    for (s, &j1) in slots.iter().enumerate() {
                        for j in 0..ny {
                            psi_hat[j * nx + j1] =
                                Complex64::new(sol[(j, 2 * s)], sol[(j, 2 * s + 1)]);
                        }
                    }
                }
                let u2_hat = self.apply(&psi_hat, |k1, _| Complex64::new(0.0, k1));
                let psi = self.inv(psi_hat);
                let u1: Vec<f64> = self.strip_dx2(&psi).into_iter().map(|v| -v).collect();
                (
                    psi,
                    VelocityField {
                        u1: ScalarField::from_vec_unchecked(d, u1),
                        u2: ScalarField::from_vec_unchecked(d, self.inv(u2_hat)),
                    },
                )
            }
        }
    }

    fn projected_spectrum(&self, rho: &ScalarField) -> Vec<Complex64> {
        let mut r = self.fwd(rho.values());
        self.mask(&mut r);
        r
    }

    /// Velocity `u = ∇⊥(-Δ)⁻¹ ∂x1 ρ` of the dealiased density.
    pub fn biot_savart(&self, rho: &ScalarField) -> Result<VelocityField> {
        self.check(rho)?;
        Ok(self.velocity_from(&self.projected_spectrum(rho)).1)
    }

    /// Stream function `ψ = (-Δ)⁻¹ ∂x1 ρ` (zero on the strip walls).
    pub fn stream_function(&self, rho: &ScalarField) -> Result<ScalarField> {
        self.check(rho)?;
        let psi = self.velocity_from(&self.projected_spectrum(rho)).0;
        Ok(ScalarField::from_vec_unchecked(self.domain, psi))
    }

    /// Physical-space gradient `(∂x1 f, ∂x2 f)` without dealiasing (Nyquist dropped).
    pub fn gradient(&self, f: &ScalarField) -> Result<(ScalarField, ScalarField)> {
        self.check(f)?;
        let d = self.domain;
        let c = self.fwd(f.values());
        let n1 = -(d.nx() as f64) / 2.0;
        let n2 = -(d.ny() as f64) / 2.0;
        let d1 = self.inv(self.apply(&c, |k1, _| {
            if k1 == n1 {
                ZERO
            } else {
                Complex64::new(0.0, k1)
            }
        }));
        let d2 = if self.strip.is_some() {
            self.strip_dx2(f.values())
        } else {
            self.inv(self.apply(&c, |_, k2| {
                if k2 == n2 {
                    ZERO
                } else {
                    Complex64::new(0.0, k2)
                }
            }))
        };
        Ok((
            ScalarField::from_vec_unchecked(d, d1),
            ScalarField::from_vec_unchecked(d, d2),
        ))
    }

    fn rhs_and_velocity(&self, rho: &ScalarField) -> (ScalarField, VelocityField) {
        let d = self.domain;
        let r = self.projected_spectrum(rho);
        let (_, u) = self.velocity_from(&r);
        let d1 = self.inv(self.apply(&r, |k1, _| Complex64::new(0.0, k1)));
        let d2 = match self.strip {
            Some(_) => self.strip_dx2(&self.inv(r.clone())),
            None => self.inv(self.apply(&r, |_, k2| Complex64::new(0.0, k2))),
        };
        let prod: Vec<f64> = (0..d.len())
            .map(|i| -(u.u1.values()[i] * d1[i] + u.u2.values()[i] * d2[i]))
            .collect();
        let mut n = self.fwd(&prod);
        self.mask(&mut n);
        (ScalarField::from_vec_unchecked(d, self.inv(n)), u)
    }

    /// `-P(u·∇ρ)`, with `P` the dealiasing projection applied to the factors and the product.
    pub fn advection_rhs(&self, rho: &ScalarField) -> Result<ScalarField> {
        self.check(rho)?;
        Ok(self.rhs_and_velocity(rho).0)
    }

    /// Classical RK4 step. The increment lies in the retained space, so already
    /// dealiased input stays dealiased.
    pub fn step_rk4(&self, rho: &ScalarField, dt: f64) -> Result<StepOutput> {
        self.check(rho)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(IpmError::InvalidArgument(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let stage = |f: &ScalarField, idx: usize| -> Result<(ScalarField, VelocityField)> {
            let (k, u) = self.rhs_and_velocity(f);
            if !k.is_finite() || !u.is_finite() {
                return Err(IpmError::NonFiniteStage { stage: idx });
            }
            Ok((k, u))
        };
        let (k1, v1) = stage(rho, 1)?;
        let (k2, v2) = stage(&rho.axpy(0.5 * dt, &k1), 2)?;
        let (k3, v3) = stage(&rho.axpy(0.5 * dt, &k2), 3)?;
        let (k4, v4) = stage(&rho.axpy(dt, &k3), 4)?;
        let mut out = rho.clone();
        let w = dt / 6.0;
        for (i, o) in out.values_mut().iter_mut().enumerate() {
            *o += w * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i]);
        }
        if !out.is_finite() {
            return Err(IpmError::NonFiniteStage { stage: 5 });
        }
        Ok(StepOutput {
            rho: out,
            stages: [v1, v2, v3, v4],
        })
    }

    /// Fraction of non-mean energy in modes beyond 2/3 of the retained cuts.
    pub fn resolution(&self, rho: &ScalarField, tail_max: f64) -> Result<ResolutionReport> {
        self.check(rho)?;
        let f = forward_transform(rho)?;
        let (c1, c2) = self.cuts();
        let (mut tail, mut total) = (0.0, 0.0);
        for (idx, c) in f.coeffs().iter().enumerate() {
            let (k1, k2) = f.mode(idx);
            if self.domain.is_torus() && k1 == 0 && k2 == 0 {
                continue;
            }
            let e = c.norm_sqr();
            total += e;
            let r = (k1.unsigned_abs() as f64 / c1 as f64).max(k2.unsigned_abs() as f64 / c2 as f64);
            if r > 2.0 / 3.0 {
                tail += e;
            }
        }
        let tail_fraction = if total > 0.0 { tail / total } else { 0.0 };
        Ok(ResolutionReport {
            tail_fraction,
            tripped: tail_fraction > tail_max,
        })
    }
}

/// Biot–Savart law on the full retained grid (only Nyquist modes dropped).
pub fn biot_savart(rho: &ScalarField) -> Result<VelocityField> {
    Dynamics::new(*rho.domain(), 1.0)?.biot_savart(rho)
}

pub fn stream_function(rho: &ScalarField) -> Result<ScalarField> {
    Dynamics::new(*rho.domain(), 1.0)?.stream_function(rho)
}

pub fn advection_rhs(rho: &ScalarField) -> Result<ScalarField> {
    Dynamics::new(*rho.domain(), tolerances::DEALIAS_FRACTION)?.advection_rhs(rho)
}

pub fn step_rk4(rho: &ScalarField, dt: f64) -> Result<ScalarField> {
    Ok(Dynamics::new(*rho.domain(), tolerances::DEALIAS_FRACTION)?
        .step_rk4(rho, dt)?
        .rho)
}

pub fn resolution_monitor(rho: &ScalarField, cfg: &StepperConfig) -> Result<ResolutionReport> {
    Dynamics::new(*rho.domain(), cfg.dealias_fraction)?.resolution(rho, cfg.resolution_tail_max)
}

/// CFL time step, capped by the time left until `cfg.t_end`.
pub fn cfl_dt(u: &VelocityField, cfg: &StepperConfig, t_now: f64) -> f64 {
    let remaining = (cfg.t_end - t_now).max(0.0);
    let d = u.domain();
    let m1 = u.u1.max_abs();
    let m2 = u.u2.max_abs();
    let mut dt = f64::INFINITY;
    if m1 > 0.0 {
        dt = dt.min(d.dx1() / m1);
    }
    if m2 > 0.0 {
        dt = dt.min(d.dx2_min() / m2);
    }
    (cfg.cfl * dt).min(remaining)
}

/// `∂x1 u1 + ∂x2 u2` on the grid.
pub fn divergence(u: &VelocityField) -> Result<ScalarField> {
    let dy = Dynamics::new(*u.domain(), 1.0)?;
    let (a, _) = dy.gradient(&u.u1)?;
    let (_, b) = dy.gradient(&u.u2)?;
    Ok(a.axpy(1.0, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn torus_two_mode_velocity() {
        let d = Domain::torus(64, 64).unwrap();
        let rho = ScalarField::from_fn(d, |x, y| x.sin() * y.sin());
        let u = biot_savart(&rho).unwrap();
        let e1 = ScalarField::from_fn(d, |x, y| -x.cos() * y.cos() / 2.0);
        let e2 = ScalarField::from_fn(d, |x, y| -x.sin() * y.sin() / 2.0);
        assert!(u.u1.axpy(-1.0, &e1).max_abs() < 1e-12);
        assert!(u.u2.axpy(-1.0, &e2).max_abs() < 1e-12);
        let psi = stream_function(&rho).unwrap();
        let ep = ScalarField::from_fn(d, |x, y| x.cos() * y.sin() / 2.0);
        assert!(psi.axpy(-1.0, &ep).max_abs() < 1e-12);
        let div = divergence(&u).unwrap();
        assert!(div.l2_norm() <= 1e-10 * u.l2_norm());
    }

    #[test]
    fn stratified_states_are_stationary() {
        for d in [Domain::torus(32, 32).unwrap(), Domain::strip(32, 33).unwrap()] {
            let rho = ScalarField::from_fn(d, |_, y| y.sin() + 0.3 * (2.0 * y).cos());
            assert!(biot_savart(&rho).unwrap().max_abs() < 1e-13);
            assert!(advection_rhs(&rho).unwrap().max_abs() < 1e-13);
        }
    }

    #[test]
    fn strip_manufactured_stream_function() {
        let d = Domain::strip(64, 65).unwrap();
        let rho = ScalarField::from_fn(d, |x, y| -2.0 * x.cos() * y.sin());
        let psi = stream_function(&rho).unwrap();
        let exact = ScalarField::from_fn(d, |x, y| x.sin() * y.sin());
        assert!(psi.axpy(-1.0, &exact).max_abs() < 1e-10);
        let u = biot_savart(&rho).unwrap();
        let ny = d.ny();
        for i in 0..d.nx() {
            assert!(u.u2.at(i, 0).abs() < 1e-10);
            assert!(u.u2.at(i, ny - 1).abs() < 1e-10);
        }
    }

    #[test]
    fn cfl_examples() {
        let d = Domain::torus(256, 256).unwrap();
        let u = VelocityField {
            u1: ScalarField::from_fn(d, |_, _| 1.0),
            u2: ScalarField::zeros(d),
        };
        let cfg = StepperConfig {
            cfl: 0.5,
            t_end: 10.0,
            ..Default::default()
        };
        assert!((cfl_dt(&u, &cfg, 0.0) - PI / 256.0).abs() < 1e-15);
        let cfg2 = StepperConfig { cfl: 1.0, ..cfg };
        assert!((cfl_dt(&u, &cfg2, 0.0) - 2.0 * PI / 256.0).abs() < 1e-15);
        assert_eq!(cfl_dt(&VelocityField::zeros(d), &cfg, 3.0), 7.0);
        assert_eq!(cfl_dt(&u, &cfg, 9.999), cfg.t_end - 9.999);
    }

    #[test]
    fn monitor_extremes() {
        let d = Domain::torus(64, 64).unwrap();
        let cfg = StepperConfig::default();
        let low = ScalarField::from_fn(d, |x, y| x.cos() + (2.0 * y).sin());
        let r = resolution_monitor(&low, &cfg).unwrap();
        assert!(r.tail_fraction < 1e-28 && !r.tripped);
        let kc = retained_cut(64, cfg.dealias_fraction) as f64;
        let high = ScalarField::from_fn(d, |x, _| ((kc - 1.0) * x).cos());
        let r = resolution_monitor(&high, &cfg).unwrap();
        assert!((r.tail_fraction - 1.0).abs() < 1e-12 && r.tripped);
    }

    #[test]
    fn rhs_preserves_symmetry() {
        let d = Domain::torus(64, 64).unwrap();
        let rho = ScalarField::from_fn(d, |x, y| (1.0 - x.cos()) * y.sin() + 0.3 * (2.0 * x).cos() * (3.0 * y).sin());
        let r = advection_rhs(&rho).unwrap();
        assert!(r.odd_x2_defect() < 1e-12);
        assert!(r.even_x1_defect() < 1e-12);
        let r2 = advection_rhs(&rho).unwrap();
        assert_eq!(r.values(), r2.values());
    }
}
