//! Initial data: symmetric data, bubbles, layered data built by an exact
//! circular rotation, stratified rearrangement and the bump perturbation of a
//! stratified state.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{IpmError, Result};
use crate::spectral::{cheb, fft, Domain, DomainKind, ScalarField};
use crate::tolerances;

/// Standard bump `exp(1 - 1/(1 - r²))` on `|r| < 1`, with `bump(0) = 1`.
pub fn bump(r: f64) -> f64 {
    let r2 = r * r;
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    }
}

/// `d/dr bump(r)`.
pub fn bump_derivative(r: f64) -> f64 {
    let r2 = r * r;
    if r2 >= 1.0 {
        0.0
    } else {
        let s = 1.0 - r2;
        -2.0 * r / (s * s) * bump(r)
    }
}

/// Annular profile `φ_ε(r)`: the bump rescaled to `[ε, 2ε]`, peak 1 at `r = 1.5ε`.
pub fn annular_bump(r: f64, eps0: f64) -> f64 {
    bump((r - 1.5 * eps0) / (0.5 * eps0))
}

/// Compact smooth step: 0 for `z <= 0`, 1 for `z >= 1`.
pub fn smooth_step(z: f64) -> f64 {
    let psi = |z: f64| if z > 0.0 { (-1.0 / z).exp() } else { 0.0 };
    let a = psi(z);
    let b = psi(1.0 - z);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    None,
}

/// A stratified state `ρ_s = g(x2)` sampled on the x2 grid of a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedProfile {
    domain: Domain,
    samples: Vec<f64>,
    parity: Parity,
    // torus: 1-D Fourier coefficients against e^{ikx}; strip: unused
    coeffs: Vec<Complex64>,
    // strip: collocation derivative samples
    dsamples: Vec<f64>,
}

impl StratifiedProfile {
    pub fn new(domain: Domain, samples: Vec<f64>, parity: Parity) -> Result<Self> {
        if samples.len() != domain.ny() {
            return Err(IpmError::DimensionMismatch {
                expected: domain.ny(),
                got: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(IpmError::NonFinite(i));
        }
        if parity == Parity::Odd {
            let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let defect = (0..domain.ny())
                .map(|j| (samples[j] + samples[domain.mirror_x2(j)]).abs())
                .fold(0.0, f64::max);
            if defect > tolerances::PROFILE_PARITY * scale.max(1.0) {
                return Err(IpmError::SymmetryViolation(defect));
            }
        }
        let coeffs = match domain.kind() {
            DomainKind::Torus => {
                let n = domain.ny();
                let mut c: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fft::rows(&mut c, n, false);
                for (j, cj) in c.iter_mut().enumerate() {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    *cj *= sign / n as f64;
                }
                c
            }
            DomainKind::Strip => Vec::new(),
        };
        let dsamples = match domain.kind() {
            DomainKind::Torus => Vec::new(),
            DomainKind::Strip => {
                let d = cheb::diff_matrix(samples.len());
                let v = nalgebra::DVector::from_column_slice(&samples);
                (d * v).as_slice().to_vec()
            }
        };
        Ok(StratifiedProfile {
            domain,
            samples,
            parity,
            coeffs,
            dsamples,
        })
    }

    pub fn from_fn(domain: Domain, g: impl Fn(f64) -> f64, parity: Parity) -> Result<Self> {
        let x2 = domain.x2_grid();
        let mut samples: Vec<f64> = x2.iter().map(|&y| g(y)).collect();
        if parity == Parity::Odd {
            // exact oddness on the grid
            let raw = samples.clone();
            for j in 0..samples.len() {
                let m = domain.mirror_x2(j);
                samples[j] = 0.5 * (raw[j] - raw[m]);
            }
        }
        Self::new(domain, samples, parity)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Interpolated value (trigonometric on the torus, barycentric on the strip).
    pub fn eval(&self, x2: f64) -> f64 {
        self.eval_derivative(x2, 0)
    }

    /// Interpolated `g'`.
    pub fn derivative(&self, x2: f64) -> f64 {
        self.eval_derivative(x2, 1)
    }

    fn eval_derivative(&self, x2: f64, order: u32) -> f64 {
        match self.domain.kind() {
            DomainKind::Torus => {
                let n = self.domain.ny();
                let mut acc = 0.0;
                for (j, c) in self.coeffs.iter().enumerate() {
                    let k = fft::wavenumber(j, n) as f64;
                    if j == n / 2 {
                        // Nyquist: real cosine term, derivative taken of cos(kx)
                        let t = c.re * if order == 0 {
                            (k * x2).cos()
                        } else {
                            -k * (k * x2).sin()
                        };
                        acc += t;
                        continue;
                    }
                    let e = Complex64::from_polar(1.0, k * x2);
                    let m = if order == 0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, k)
                    };
                    acc += (c * e * m).re;
                }
                acc
            }
            DomainKind::Strip => {
                if order == 0 {
                    cheb::interpolate(&self.samples, x2)
                } else {
                    cheb::interpolate(&self.dsamples, x2)
                }
            }
        }
    }

    /// `g'` on the x2 grid.
    pub fn derivative_samples(&self) -> Vec<f64> {
        match self.domain.kind() {
            DomainKind::Torus => self
                .domain
                .x2_grid()
                .iter()
                .map(|&y| self.derivative(y))
                .collect(),
            DomainKind::Strip => self.dsamples.clone(),
        }
    }

    /// Broadcast `g(x2)` to the full grid.
    pub fn field(&self) -> ScalarField {
        let nx = self.domain.nx();
        let mut v = Vec::with_capacity(self.domain.len());
        for &g in &self.samples {
            v.extend(std::iter::repeat(g).take(nx));
        }
        ScalarField::from_vec_unchecked(self.domain, v)
    }
}

/// Minimum-image displacement on the x1 circle.
fn wrap(dx: f64) -> f64 {
    let mut d = dx.rem_euclid(2.0 * PI);
    if d >= PI {
        d -= 2.0 * PI;
    }
    d
}

/// Odd extension in x2 of a field whose upper half (x2 > 0) is authoritative.
/// Rows at x2 = 0 and at self-mirrored rows become zero.
pub fn odd_reflect(f: &ScalarField) -> ScalarField {
    let d = *f.domain();
    let x2 = d.x2_grid();
    let nx = d.nx();
    let mut out = vec![0.0; d.len()];
    for j in 0..d.ny() {
        let m = d.mirror_x2(j);
        if m == j || x2[j] == 0.0 {
            continue;
        }
        for i in 0..nx {
            out[j * nx + i] = if x2[j] > 0.0 {
                f.at(i, j)
            } else {
                -f.at(i, m)
            };
        }
    }
    ScalarField::from_vec_unchecked(d, out)
}

/// `(1 - cos x1) sin x2`, with every symmetry hypothesis verified on the grid.
pub fn make_s2_symmetric(domain: Domain) -> Result<ScalarField> {
    if domain.kind() != DomainKind::Torus {
        return Err(IpmError::Unsupported {
            domain: "strip",
            what: "symmetric scenario data".into(),
        });
    }
    let f = ScalarField::from_fn(domain, |x, y| (1.0 - x.cos()) * y.sin());
    check_s2_hypotheses(&f)?;
    Ok(f)
}

/// Odd in x2, even in x1, zero on x1 = 0 and non-negative on `[0, π]²`.
pub fn check_s2_hypotheses(f: &ScalarField) -> Result<()> {
    let d = f.domain();
    let odd = f.odd_x2_defect();
    if odd > tolerances::PARITY {
        return Err(IpmError::Hypothesis(format!("not odd in x2 (defect {odd:.3e})")));
    }
    let even = f.even_x1_defect();
    if even > tolerances::PARITY {
        return Err(IpmError::Hypothesis(format!("not even in x1 (defect {even:.3e})")));
    }
    let scale = f.max_abs();
    let i0 = (0..d.nx()).find(|&i| d.x1(i) == 0.0).expect("x1 = 0 on grid");
    let axis = (0..d.ny()).map(|j| f.at(i0, j).abs()).fold(0.0, f64::max);
    if axis > tolerances::PARITY * scale.max(1.0) {
        return Err(IpmError::Hypothesis(format!("nonzero on x1 = 0 ({axis:.3e})")));
    }
    for j in 0..d.ny() {
        if d.x2(j) < 0.0 {
            continue;
        }
        for i in 0..d.nx() {
            if d.x1(i) >= 0.0 && f.at(i, j) < -tolerances::CUBE_ROOT_NEGATIVITY * scale {
                return Err(IpmError::Hypothesis(format!(
                    "negative on D at ({:.4}, {:.4})",
                    d.x1(i),
                    d.x2(j)
                )));
            }
        }
    }
    Ok(())
}

/// Bubble data with two seed levels for tracked curves.
#[derive(Debug, Clone)]
pub struct Bubble {
    pub field: ScalarField,
    pub center: (f64, f64),
    /// Outer seed level and radius (`Γ0`).
    pub c0: f64,
    pub r0: f64,
    /// Inner seed level and radius (`Γ1`).
    pub c1: f64,
    pub r1: f64,
}

fn check_ball(domain: &Domain, center: (f64, f64), rx: f64, ry: f64) -> Result<()> {
    if !(rx > 0.0 && ry > 0.0) {
        return Err(IpmError::Geometry("radius must be positive".into()));
    }
    if rx >= PI {
        return Err(IpmError::Geometry(format!("radius {rx} does not fit in x1")));
    }
    let (lo, hi) = (center.1 - ry, center.1 + ry);
    let fits = match domain.kind() {
        DomainKind::Torus => ry < PI,
        DomainKind::Strip => lo > -PI && hi < PI,
    };
    if !fits || !(-PI..=PI).contains(&center.1) {
        return Err(IpmError::Geometry(format!(
            "ball around ({}, {}) with half-heights {ry} leaves the domain",
            center.0, center.1
        )));
    }
    Ok(())
}

/// Axis-aligned elliptic bump `height · bump(√((dx/rx)² + (dy/ry)²))` (periodic images on the torus).
pub fn elliptic_bump(
    domain: Domain,
    center: (f64, f64),
    rx: f64,
    ry: f64,
    height: f64,
) -> Result<ScalarField> {
    check_ball(&domain, center, rx, ry)?;
    let torus = domain.is_torus();
    Ok(ScalarField::from_fn(domain, |x, y| {
        let dx = wrap(x - center.0);
        let dy = if torus { wrap(y - center.1) } else { y - center.1 };
        height * bump(((dx / rx).powi(2) + (dy / ry).powi(2)).sqrt())
    }))
}

/// `background(x2) + height · bump(|x - center| / radius)`; seeds at bump arguments 0.8 and 0.4.
pub fn make_bubble(
    domain: Domain,
    center: (f64, f64),
    radius: f64,
    height: f64,
    background: &StratifiedProfile,
) -> Result<Bubble> {
    if background.domain() != &domain {
        return Err(IpmError::InvalidArgument(
            "background profile lives on a different grid".into(),
        ));
    }
    let bubble = elliptic_bump(domain, center, radius, radius, height)?;
    let field = bubble.axpy(1.0, &background.field());
    let base = background.eval(center.1);
    Ok(Bubble {
        field,
        center,
        c0: base + height * bump(0.8),
        r0: 0.8 * radius,
        c1: base + height * bump(0.4),
        r1: 0.4 * radius,
    })
}

/// Exact circular transport of `ρ_s` by `v = (x - x0)^⊥ φ_ε(|x - x0|)` for time `tau`
/// in the upper half, extended oddly (the mirror annulus turns the other way).
pub fn make_layered(
    rho_s: &StratifiedProfile,
    x0: (f64, f64),
    eps0: f64,
    tau: f64,
    domain: Domain,
) -> Result<ScalarField> {
    if rho_s.domain() != &domain {
        return Err(IpmError::InvalidArgument(
            "stratified profile lives on a different grid".into(),
        ));
    }
    if rho_s.parity() != Parity::Odd {
        return Err(IpmError::Hypothesis("stratified state must be odd".into()));
    }
    if !(eps0 > 0.0) || x0.1 - 2.0 * eps0 <= 0.0 || x0.1 + 2.0 * eps0 >= PI || 2.0 * eps0 >= PI {
        return Err(IpmError::Geometry(format!(
            "annulus of outer radius {} around ({}, {}) leaves the upper half",
            2.0 * eps0,
            x0.0,
            x0.1
        )));
    }
    let upper = ScalarField::from_fn(domain, |x, y| {
        let dx = wrap(x - x0.0);
        let dy = y - x0.1;
        let r = dx.hypot(dy);
        let phi = annular_bump(r, eps0);
        if phi == 0.0 || tau == 0.0 {
            return rho_s.eval(y);
        }
        let theta = dy.atan2(dx) - phi * tau;
        rho_s.eval(x0.1 + r * theta.sin())
    });
    let out = odd_reflect(&upper);
    Ok(out)
}

/// Layered data with a curved lower interface: a smooth band that occupies
/// `ylow(x1) < x2 < 4π/5` in the upper half, `ylow = π/2 - (π/4) cos x1`,
/// extended oddly. Returns the field and its stratified state, the flat band
/// `π/2 < x2 < 4π/5`.
pub fn make_curved_band(domain: Domain, width: f64) -> Result<(ScalarField, StratifiedProfile)> {
    if domain.kind() != DomainKind::Torus {
        return Err(IpmError::Unsupported {
            domain: "strip",
            what: "curved band data".into(),
        });
    }
    if !(width > 0.0 && width < PI / 20.0) {
        return Err(IpmError::InvalidArgument(format!(
            "band transition width must lie in (0, π/20), got {width}"
        )));
    }
    let top = 4.0 * PI / 5.0;
    let band = move |ylow: f64, y: f64| -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        smooth_step((y - ylow) / width + 0.5) * smooth_step((top - y) / width + 0.5)
    };
    let upper = ScalarField::from_fn(domain, |x, y| band(PI / 2.0 - PI / 4.0 * x.cos(), y));
    let field = odd_reflect(&upper);
    let profile = StratifiedProfile::from_fn(
        domain,
        |y| {
            if y >= 0.0 {
                band(PI / 2.0, y)
            } else {
                -band(PI / 2.0, -y)
            }
        },
        Parity::Odd,
    )?;
    Ok((field, profile))
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Cylinder cut along the top line: row `r` of `rows` sits at `x2 = π - r h`,
/// `r = 0` and `r = ny` both being the grid row `x2 = -π`.
/// Returns the interface heights for level `c`, or `None` when the components
/// of `{ρ > c}` and `{ρ ≤ c}` do not stack as bands below the top line.
fn level_heights(rows: &[&[f64]], c: f64, h: f64) -> Option<Vec<f64>> {
    let nr = rows.len();
    let nx = rows[0].len();
    let idx = |r: usize, i: usize| r * nx + i;
    let above = |r: usize, i: usize| rows[r][i] > c;
    let mut dsu = Dsu((0..nr * nx).collect());
    for r in 0..nr {
        for i in 0..nx {
            let ip = (i + 1) % nx;
            if above(r, i) == above(r, ip) {
                dsu.union(idx(r, i), idx(r, ip));
            }
            if r + 1 < nr && above(r, i) == above(r + 1, i) {
                dsu.union(idx(r, i), idx(r + 1, i));
            }
        }
    }
    let top = dsu.find(idx(0, 0));
    let bottom = dsu.find(idx(nr - 1, 0));
    if top == bottom {
        return None;
    }
    let mut area: HashMap<usize, f64> = HashMap::new();
    let mut links: HashMap<usize, Vec<usize>> = HashMap::new();
    let link = |a: usize, b: usize, links: &mut HashMap<usize, Vec<usize>>| {
        let e = links.entry(a).or_default();
        if !e.contains(&b) {
            e.push(b);
        }
    };
    let dx = 2.0 * PI / nx as f64;
    for r in 0..nr {
        let w = if r == 0 || r == nr - 1 { 0.5 } else { 1.0 };
        for i in 0..nx {
            let a = dsu.find(idx(r, i));
            if (r == 0 || r == nr - 1) && a != if r == 0 { top } else { bottom } {
                return None;
            }
            *area.entry(a).or_default() += w * h * dx;
            let b = dsu.find(idx(r, (i + 1) % nx));
            if a != b {
                link(a, b, &mut links);
                link(b, a, &mut links);
            }
            if r + 1 < nr {
                let b = dsu.find(idx(r + 1, i));
                if a != b {
                    link(a, b, &mut links);
                    link(b, a, &mut links);
                    // sub-cell position of the crossing on this vertical edge
                    let (va, vb) = (rows[r][i], rows[r + 1][i]);
                    let t = (c - va) / (vb - va);
                    let shift = (t - 0.5) * h * dx;
                    *area.entry(a).or_default() += shift;
                    *area.entry(b).or_default() -= shift;
                }
            }
        }
    }
    let mut heights = Vec::new();
    let (mut prev, mut cur, mut cum) = (usize::MAX, top, 0.0);
    for _ in 0..area.len() {
        cum += area[&cur];
        if cur == bottom {
            break;
        }
        let next: Vec<usize> = links.get(&cur)?.iter().copied().filter(|&n| n != prev).collect();
        if next.len() != 1 {
            return None;
        }
        heights.push(PI - cum / (2.0 * PI));
        prev = cur;
        cur = next[0];
    }
    if cur != bottom || heights.len() + 1 != area.len() {
        return None;
    }
    Some(heights)
}

/// Stratified state of a layered torus field.
///
/// For each level `c` of a ladder, the components of `{ρ > c}` and `{ρ ≤ c}`
/// are labelled on the grid cut open along `x2 = π`. In a layered field they
/// stack as bands below the top line; the area `|D|` above each interface
/// gives the height `π - |D|/2π` at which `ρ_s = c`. Interface cells are
/// split at the linearly interpolated crossing. Levels whose components do
/// not stack are skipped; the profile is linearly interpolated between the
/// recovered points and the top and bottom values.
pub fn stratified_rearrangement(rho0: &ScalarField) -> Result<StratifiedProfile> {
    let d = *rho0.domain();
    if d.kind() != DomainKind::Torus {
        return Err(IpmError::Unsupported {
            domain: "strip",
            what: "stratified rearrangement".into(),
        });
    }
    let (nx, ny) = (d.nx(), d.ny());
    let h = 2.0 * PI / ny as f64;
    let rows: Vec<&[f64]> = (0..=ny).map(|r| rho0.row((ny - r) % ny)).collect();
    let (lo, hi) = (rho0.min(), rho0.max());
    let top = rho0.row(0).iter().sum::<f64>() / nx as f64;
    let mut points: Vec<(f64, f64)> = vec![(PI, top), (-PI, top)];
    if hi > lo {
        let levels = (2 * ny).clamp(64, 384);
        let ladder: Vec<f64> = (0..levels).map(|m| lo + (hi - lo) * (m as f64 + 0.5) / levels as f64).collect();
        let found: Vec<Option<Vec<f64>>> = ladder.iter().map(|&c| level_heights(&rows, c, h)).collect();
        for (c, ys) in ladder.iter().zip(&found) {
            if let Some(ys) = ys {
                points.extend(ys.iter().map(|&y| (y, *c)));
            }
        }
        // Near an extremum the bands can be thinner than a cell and break up.
        // If the last resolved level leaves a single band, the unresolved
        // levels beyond it are centred in that band with their grid area.
        let cell_area = |c: f64, upper: bool| {
            let mut a = 0.0;
            for (r, row) in rows.iter().enumerate() {
                let w = if r == 0 || r == ny { 0.5 } else { 1.0 };
                a += w * row.iter().filter(|&&v| (v > c) == upper).count() as f64;
            }
            a * h * (2.0 * PI / nx as f64)
        };
        let top_above = |c: f64| rows[0][0] > c;
        if let Some(k) = found.iter().rposition(|f| f.is_some()) {
            let ys = found[k].as_ref().expect("found");
            if ys.len() == 2 && !top_above(ladder[k]) {
                let mid = 0.5 * (ys[0] + ys[1]);
                for &c in &ladder[k + 1..] {
                    let half = cell_area(c, true) / (4.0 * PI);
                    points.push((mid + half, c));
                    points.push((mid - half, c));
                }
            }
        }
        if let Some(k) = found.iter().position(|f| f.is_some()) {
            let ys = found[k].as_ref().expect("found");
            if ys.len() == 2 && top_above(ladder[k]) {
                let mid = 0.5 * (ys[0] + ys[1]);
                for &c in &ladder[..k] {
                    let half = cell_area(c, false) / (4.0 * PI);
                    points.push((mid + half, c));
                    points.push((mid - half, c));
                }
            }
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let x2 = d.x2_grid();
    let mut g: Vec<f64> = x2
        .iter()
        .map(|&y| {
            let pos = points.partition_point(|p| p.0 < y);
            if pos == 0 {
                points[0].1
            } else if pos >= points.len() {
                points[points.len() - 1].1
            } else {
                let (ya, a) = points[pos - 1];
                let (yb, b) = points[pos];
                if yb == ya {
                    0.5 * (a + b)
                } else {
                    a + (b - a) * (y - ya) / (yb - ya)
                }
            }
        })
        .collect();
    let parity = if rho0.odd_x2_defect() <= tolerances::PARITY {
        let raw = g.clone();
        for j in 0..ny {
            g[j] = 0.5 * (raw[j] - raw[d.mirror_x2(j)]);
        }
        Parity::Odd
    } else {
        Parity::None
    };
    StratifiedProfile::new(d, g, parity)
}

/// Bump-perturbed stratified state on the strip and its certificate inputs.
#[derive(Debug, Clone)]
pub struct BumpPerturbation {
    pub field: ScalarField,
    pub lambda: f64,
    /// `‖∇ρ_s‖_∞` (1 when the profile is constant).
    pub a: f64,
    /// `ρ_s(0) + Aλ`, an upper bound for `ρ0λ` on `∂B(0, λ)`.
    pub boundary_bound: f64,
    /// `ρ_s(0) + 2Aλ = ρ0λ(0)`.
    pub center_value: f64,
    /// Regular level in `(boundary_bound, center_value)`.
    pub level: f64,
    /// Smallest `|∇ρ0λ|` on the traced level curve.
    pub min_gradient_on_level: f64,
}

/// `ρ_s(x2) + 2Aλ bump(|x|/λ)` on the strip.
pub fn make_bump_perturbation(
    rho_s: &StratifiedProfile,
    lambda: f64,
    domain: Domain,
) -> Result<BumpPerturbation> {
    if domain.kind() != DomainKind::Strip {
        return Err(IpmError::Unsupported {
            domain: "torus",
            what: "bump perturbation (strip scenario)".into(),
        });
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(IpmError::InvalidArgument(format!(
            "lambda must lie in (0, 1), got {lambda}"
        )));
    }
    if rho_s.domain().kind() != DomainKind::Strip || rho_s.domain().ny() != domain.ny() {
        return Err(IpmError::InvalidArgument(
            "stratified profile must be sampled on the same strip x2 grid".into(),
        ));
    }
    let gp = rho_s.derivative_samples();
    let mut a = gp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if a == 0.0 {
        a = 1.0;
    }
    let g0 = rho_s.eval(0.0);
    let amp = 2.0 * a * lambda;
    let x2 = domain.x2_grid();
    let bg = rho_s.samples();
    let nx = domain.nx();
    let mut values = Vec::with_capacity(domain.len());
    for (j, &y) in x2.iter().enumerate() {
        for i in 0..nx {
            let x = domain.x1(i);
            values.push(bg[j] + amp * bump(x.hypot(y) / lambda));
        }
    }
    let field = ScalarField::new(domain, values)?;

    let value = |x: f64, y: f64| rho_s.eval(y) + amp * bump(x.hypot(y) / lambda);
    let grad = |x: f64, y: f64| {
        let r = x.hypot(y);
        let radial = if r > 0.0 {
            amp * bump_derivative(r / lambda) / lambda
        } else {
            0.0
        };
        let (ex, ey) = if r > 0.0 { (x / r, y / r) } else { (0.0, 0.0) };
        (radial * ex).hypot(rho_s.derivative(y) + radial * ey)
    };
    let lo = g0 + a * lambda;
    let hi = g0 + amp;
    let mid = 0.5 * (lo + hi);
    let window = hi - lo;
    let mut chosen = None;
    for h in [mid, mid + 0.1 * window, mid - 0.1 * window] {
        let min_grad = trace_level(&value, &grad, h, lambda);
        if min_grad > 1e-3 * a {
            chosen = Some((h, min_grad));
            break;
        }
    }
    let (level, min_gradient_on_level) = chosen.ok_or_else(|| {
        IpmError::Hypothesis("no regular level found in the bump window".into())
    })?;
    Ok(BumpPerturbation {
        field,
        lambda,
        a,
        boundary_bound: lo,
        center_value: hi,
        level,
        min_gradient_on_level,
    })
}

/// Trace `{value = h}` along 256 rays from the origin by bisection; returns min |∇|.
fn trace_level(
    value: &impl Fn(f64, f64) -> f64,
    grad: &impl Fn(f64, f64) -> f64,
    h: f64,
    lambda: f64,
) -> f64 {
    let mut min_grad = f64::INFINITY;
    for m in 0..256 {
        let th = 2.0 * PI * m as f64 / 256.0;
        let (c, s) = (th.cos(), th.sin());
        let (mut a, mut b) = (0.0, lambda);
        if value(0.0, 0.0) <= h || value(b * c, b * s) >= h {
            return 0.0;
        }
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if value(m * c, m * s) > h {
                a = m;
            } else {
                b = m;
            }
        }
        let r = 0.5 * (a + b);
        min_grad = min_grad.min(grad(r * c, r * s));
    }
    min_grad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_normalized_and_compact() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.5), 0.0);
        let h = 1e-6;
        let fd = (bump(0.3 + h) - bump(0.3 - h)) / (2.0 * h);
        assert!((fd - bump_derivative(0.3)).abs() < 1e-8);
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn s2_data_and_hypotheses() {
        let d = Domain::torus(32, 32).unwrap();
        let f = make_s2_symmetric(d).unwrap();
        let i0 = d.nx() / 2;
        for j in 0..d.ny() {
            assert_eq!(f.at(i0, j), 0.0);
        }
        let bad = ScalarField::from_fn(d, |x, y| (1.0 - x.cos() + 0.1 * x.sin()) * y.sin());
        assert!(check_s2_hypotheses(&bad).is_err());
    }

    #[test]
    fn profile_interpolation() {
        let t = Domain::torus(16, 32).unwrap();
        let p = StratifiedProfile::from_fn(t, |y| y.sin() + 0.2 * (3.0 * y).sin(), Parity::Odd).unwrap();
        for y in [-2.9, -0.3, 0.77, 3.0] {
            assert!((p.eval(y) - (y.sin() + 0.2 * (3.0 * y).sin())).abs() < 1e-13);
            assert!((p.derivative(y) - (y.cos() + 0.6 * (3.0 * y).cos())).abs() < 1e-12);
        }
        let s = Domain::strip(16, 41).unwrap();
        let q = StratifiedProfile::from_fn(s, |y| -y, Parity::Odd).unwrap();
        assert!((q.eval(0.4) + 0.4).abs() < 1e-13);
        assert!((q.derivative(1.1) + 1.0).abs() < 1e-11);
        assert!(StratifiedProfile::new(t, vec![1.0; 32], Parity::Odd).is_err());
    }

    #[test]
    fn bubble_levels_and_support() {
        let d = Domain::torus(64, 64).unwrap();
        let zero = StratifiedProfile::new(d, vec![0.0; 64], Parity::Odd).unwrap();
        let b = make_bubble(d, (0.0, 1.5), 1.0, 1.0, &zero).unwrap();
        assert!(b.r0 > b.r1 && b.c1 > b.c0);
        let (i, j) = (32, 48);
        assert_eq!((d.x1(i), d.x2(j)), (0.0, PI / 2.0));
        let far = b.field.at(0, 16);
        assert_eq!(far, 0.0);
        assert!(make_bubble(d, (0.0, 1.5), 3.5, 1.0, &zero).is_err());
        let flat = make_bubble(d, (0.0, 1.5), 1.0, 0.0, &zero).unwrap();
        assert_eq!(flat.field.max_abs(), 0.0);
    }

    #[test]
    fn layered_identity_and_invariance() {
        let d = Domain::torus(128, 128).unwrap();
        let p = StratifiedProfile::from_fn(d, f64::sin, Parity::Odd).unwrap();
        let f0 = make_layered(&p, (0.0, PI / 4.0), 0.3, 0.0, d).unwrap();
        assert!(f0.axpy(-1.0, &p.field()).max_abs() < 1e-14);
        let f1 = make_layered(&p, (0.0, PI / 4.0), 0.3, 2.0, d).unwrap();
        assert!(f1.odd_x2_defect() < 1e-14);
        assert!((f1.l2_norm() - p.field().l2_norm()).abs() < 1e-3);
        assert!(make_layered(&p, (0.0, 0.3), 0.3, 1.0, d).is_err());
    }

    #[test]
    fn rearrangement_of_stratified_field() {
        let d = Domain::torus(32, 64).unwrap();
        let g = |y: f64| -y.sin() - 0.5 * (y / 2.0).sin();
        let f = ScalarField::from_fn(d, |_, y| g(y));
        let p = stratified_rearrangement(&f).unwrap();
        let h = 2.0 * PI / 64.0;
        for (j, &v) in p.samples().iter().enumerate() {
            let y = d.x2(j);
            assert!((v - g(y)).abs() < 1.6 * h, "j={j}");
        }
    }

    #[test]
    fn curved_band_rearranges_to_flat_band() {
        let d = Domain::torus(128, 256).unwrap();
        let (f, ps) = make_curved_band(d, 0.12).unwrap();
        let p = stratified_rearrangement(&f).unwrap();
        let err = p
            .samples()
            .iter()
            .zip(ps.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn bump_perturbation_values() {
        let d = Domain::strip(64, 129).unwrap();
        let p = StratifiedProfile::from_fn(d, |y| -y, Parity::Odd).unwrap();
        let b = make_bump_perturbation(&p, 0.5, d).unwrap();
        assert!((b.a - 1.0).abs() < 1e-10);
        assert!((b.center_value - 1.0).abs() < 1e-10);
        assert!(b.level > b.boundary_bound && b.level < b.center_value);
        assert!(make_bump_perturbation(&p, 1.0, d).is_err());
        let c = StratifiedProfile::new(d, vec![0.0; 129], Parity::Odd).unwrap();
        assert_eq!(make_bump_perturbation(&c, 0.25, d).unwrap().a, 1.0);
    }
}
