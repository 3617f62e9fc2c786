//! Material curves advected by the flow map, their enclosed areas, x2
//! projections, and the slice geometry used by the bubble certificate.

use std::f64::consts::PI;

use crate::dynamics::VelocityField;
use crate::error::{IpmError, Result};
use crate::spectral::{gradient, Domain, DomainKind, ScalarField};

/// Closed polyline of material points (unwrapped coordinates, implicit closure).
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerCurve {
    domain: Domain,
    points: Vec<(f64, f64)>,
    level: f64,
    base_spacing: f64,
}

impl MarkerCurve {
    pub fn new(domain: Domain, points: Vec<(f64, f64)>, level: f64) -> Result<Self> {
        if points.len() < 3 {
            return Err(IpmError::Geometry(format!(
                "a closed curve needs at least 3 markers, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(IpmError::Geometry("non-finite marker".into()));
        }
        let base_spacing = perimeter(&points) / points.len() as f64;
        Ok(MarkerCurve {
            domain,
            points,
            level,
            base_spacing,
        })
    }

    /// `n` markers on a circle, counter-clockwise.
    pub fn circle(domain: Domain, center: (f64, f64), radius: f64, n: usize, level: f64) -> Result<Self> {
        let pts = (0..n)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / n as f64;
                (center.0 + radius * th.cos(), center.1 + radius * th.sin())
            })
            .collect();
        Self::new(domain, pts, level)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
    pub fn level(&self) -> f64 {
        self.level
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    /// Target spacing: markers are inserted once a segment exceeds twice this.
    pub fn base_spacing(&self) -> f64 {
        self.base_spacing
    }

    pub fn perimeter(&self) -> f64 {
        perimeter(&self.points)
    }

    pub fn max_spacing(&self) -> f64 {
        segments(&self.points).map(|(a, b)| dist(a, b)).fold(0.0, f64::max)
    }

    /// Largest `|ρ(marker) - level|`, `ρ` evaluated by bilinear interpolation.
    pub fn level_error(&self, rho: &ScalarField) -> f64 {
        let g = GridInterp::new(rho.domain());
        self.points
            .iter()
            .map(|&p| (g.eval(rho, p) - self.level).abs())
            .fold(0.0, f64::max)
    }

    fn refine(&mut self) {
        let limit = 2.0 * self.base_spacing;
        let mut out = Vec::with_capacity(self.points.len() + 16);
        let n = self.points.len();
        for k in 0..n {
            let a = self.points[k];
            let b = self.points[(k + 1) % n];
            out.push(a);
            let l = dist(a, b);
            if l > limit {
                // straight-segment insertion leaves the polygon (and its area) unchanged
                let pieces = (l / self.base_spacing).ceil() as usize;
                for m in 1..pieces {
                    let t = m as f64 / pieces as f64;
                    out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
                }
            }
        }
        self.points = out;
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.0 - a.0).hypot(b.1 - a.1)
}

fn segments(p: &[(f64, f64)]) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
    let n = p.len();
    (0..n).map(move |k| (p[k], p[(k + 1) % n]))
}

fn perimeter(p: &[(f64, f64)]) -> f64 {
    segments(p).map(|(a, b)| dist(a, b)).sum()
}

/// Bilinear interpolation on the grid (periodic in x1; periodic in x2 on the torus,
/// Chebyshev nodes on the strip).
pub struct GridInterp {
    domain: Domain,
    x2: Vec<f64>,
}

impl GridInterp {
    pub fn new(domain: &Domain) -> Self {
        GridInterp {
            domain: *domain,
            x2: domain.x2_grid(),
        }
    }

    fn locate_periodic(x: f64, n: usize) -> (usize, usize, f64) {
        let h = 2.0 * PI / n as f64;
        let s = (x + PI).rem_euclid(2.0 * PI) / h;
        let i = (s.floor() as usize).min(n - 1);
        (i, (i + 1) % n, s - i as f64)
    }

    fn locate_x2(&self, y: f64) -> (usize, usize, f64) {
        match self.domain.kind() {
            DomainKind::Torus => Self::locate_periodic(y, self.domain.ny()),
            DomainKind::Strip => {
                let n = self.x2.len();
                let y = y.clamp(-PI, PI);
                let j = self.x2.partition_point(|&v| v <= y).clamp(1, n - 1) - 1;
                let t = (y - self.x2[j]) / (self.x2[j + 1] - self.x2[j]);
                (j, j + 1, t)
            }
        }
    }

    pub fn eval(&self, f: &ScalarField, p: (f64, f64)) -> f64 {
        let (i0, i1, tx) = Self::locate_periodic(p.0, self.domain.nx());
        let (j0, j1, ty) = self.locate_x2(p.1);
        let a = f.at(i0, j0) * (1.0 - tx) + f.at(i1, j0) * tx;
        let b = f.at(i0, j1) * (1.0 - tx) + f.at(i1, j1) * tx;
        a * (1.0 - ty) + b * ty
    }

    pub fn velocity(&self, u: &VelocityField, p: (f64, f64)) -> (f64, f64) {
        (self.eval(&u.u1, p), self.eval(&u.u2, p))
    }
}

/// Marker excursion beyond the strip walls tolerated before flagging a no-flow violation.
const WALL_SLACK: f64 = 1e-6;

/// RK4 marker update with one velocity per stage (the stepper's stage velocities),
/// followed by marker insertion on stretched segments.
pub fn advect_curve_stages(curve: &MarkerCurve, stages: &[VelocityField; 4], dt: f64) -> Result<MarkerCurve> {
    let g = GridInterp::new(&curve.domain);
    let mut out = curve.clone();
    for p in out.points.iter_mut() {
        let (x, y) = *p;
        let k1 = g.velocity(&stages[0], (x, y));
        let k2 = g.velocity(&stages[1], (x + 0.5 * dt * k1.0, y + 0.5 * dt * k1.1));
        let k3 = g.velocity(&stages[2], (x + 0.5 * dt * k2.0, y + 0.5 * dt * k2.1));
        let k4 = g.velocity(&stages[3], (x + dt * k3.0, y + dt * k3.1));
        p.0 = x + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        p.1 = y + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if curve.domain.kind() == DomainKind::Strip && p.1.abs() > PI + WALL_SLACK {
            return Err(IpmError::Geometry(format!(
                "marker left the strip at x2 = {:.6}",
                p.1
            )));
        }
    }
    out.refine();
    Ok(out)
}

/// RK4 marker update in a frozen velocity field.
pub fn advect_curve(curve: &MarkerCurve, u: &VelocityField, dt: f64) -> Result<MarkerCurve> {
    let stages = [u.clone(), u.clone(), u.clone(), u.clone()];
    advect_curve_stages(curve, &stages, dt)
}

fn signed_area(p: &[(f64, f64)]) -> f64 {
    0.5 * segments(p).map(|(a, b)| a.0 * b.1 - b.0 * a.1).sum::<f64>()
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn segments_cross(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// First pair of crossing non-adjacent edges, if any.
pub fn self_intersection(curve: &MarkerCurve) -> Option<(usize, usize)> {
    let p = &curve.points;
    let n = p.len();
    // bounding boxes prune most pairs
    let boxes: Vec<(f64, f64, f64, f64)> = (0..n)
        .map(|k| {
            let (a, b) = (p[k], p[(k + 1) % n]);
            (a.0.min(b.0), a.0.max(b.0), a.1.min(b.1), a.1.max(b.1))
        })
        .collect();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b) = (boxes[i], boxes[j]);
            if a.1 < b.0 || b.1 < a.0 || a.3 < b.2 || b.3 < a.2 {
                continue;
            }
            if segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Net displacement around the closed curve divided by 2π (nonzero if it wraps the torus).
pub fn winding(curve: &MarkerCurve) -> (i64, i64) {
    let p = &curve.points;
    let close = (p[0].0 - p[p.len() - 1].0, p[0].1 - p[p.len() - 1].1);
    ((close.0 / (2.0 * PI)).round() as i64, (close.1 / (2.0 * PI)).round() as i64)
}

/// Shoelace area of a simple, non-wrapping curve.
pub fn enclosed_area(curve: &MarkerCurve) -> Result<f64> {
    let w = winding(curve);
    if w != (0, 0) {
        return Err(IpmError::Geometry(format!("curve wraps the torus (winding {w:?})")));
    }
    if let Some((i, j)) = self_intersection(curve) {
        return Err(IpmError::Geometry(format!("edges {i} and {j} intersect")));
    }
    Ok(signed_area(&curve.points).abs())
}

/// Point-in-polygon test (crossing number).
pub fn contains_point(curve: &MarkerCurve, q: (f64, f64)) -> bool {
    let mut inside = false;
    for (a, b) in segments(&curve.points) {
        if (a.1 > q.1) != (b.1 > q.1) {
            let x = a.0 + (q.1 - a.1) / (b.1 - a.1) * (b.0 - a.0);
            if q.0 < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// `inner` lies inside `outer`: every marker inside and no edge crossings.
pub fn curve_inside(inner: &MarkerCurve, outer: &MarkerCurve) -> bool {
    if !inner.points.iter().all(|&q| contains_point(outer, q)) {
        return false;
    }
    let (p, q) = (&inner.points, &outer.points);
    for (a, b) in segments(p) {
        for (c, d) in segments(q) {
            if segments_cross(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Disjoint sorted x2 intervals (on T = [-π, π) for the torus, on [-π, π] for the strip).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet {
    pub intervals: Vec<(f64, f64)>,
}

impl ProjectionSet {
    fn from_raw(mut raw: Vec<(f64, f64)>) -> Self {
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        ProjectionSet { intervals: out }
    }

    pub fn length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, y: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= y && y <= b)
    }

    /// `self ⊆ other` up to `tol` at interval ends.
    pub fn is_subset_of(&self, other: &ProjectionSet, tol: f64) -> bool {
        self.intervals.iter().all(|&(a, b)| {
            other
                .intervals
                .iter()
                .any(|&(c, d)| c - tol <= a && b <= d + tol)
        })
    }
}

/// Union of the x2 extents of the curve's edges (modulo 2π on the torus).
pub fn project_x2(curve: &MarkerCurve) -> ProjectionSet {
    let periodic = curve.domain.is_torus();
    let mut raw = Vec::with_capacity(curve.len());
    for (a, b) in segments(&curve.points) {
        let (lo, hi) = (a.1.min(b.1), a.1.max(b.1));
        if !periodic {
            raw.push((lo.max(-PI), hi.min(PI)));
            continue;
        }
        if hi - lo >= 2.0 * PI {
            raw.push((-PI, PI));
            continue;
        }
        let shift = (lo + PI).div_euclid(2.0 * PI) * 2.0 * PI;
        let (l, h) = (lo - shift, hi - shift);
        if h <= PI {
            raw.push((l, h));
        } else {
            raw.push((l, PI));
            raw.push((-PI, h - 2.0 * PI));
        }
    }
    ProjectionSet::from_raw(raw)
}

/// Per-row slice integrals `∫_T |∂x1 ρ| dx1` over rows in `I = Π2(Γ1)`, and the
/// aggregate L¹ and L² bounds that follow from them.
#[derive(Debug, Clone)]
pub struct SliceReport {
    pub level_gap: f64,
    pub rows: Vec<(f64, f64)>,
    pub min_slice: f64,
    pub projection_length: f64,
    pub inner_area: f64,
    pub l1: f64,
    pub l1_bound: f64,
    pub l2_sq: f64,
    pub l2_sq_bound: f64,
}

impl SliceReport {
    /// Worst relative slice margin `min_row (slice - gap) / gap` (0 if the gap vanishes).
    pub fn slice_margin(&self) -> f64 {
        if self.level_gap == 0.0 {
            0.0
        } else {
            (self.min_slice - self.level_gap) / self.level_gap
        }
    }
}

pub fn bubble_slice_check(rho: &ScalarField, gamma0: &MarkerCurve, gamma1: &MarkerCurve) -> Result<SliceReport> {
    let d = *rho.domain();
    let proj = project_x2(gamma1);
    if proj.is_empty() {
        return Err(IpmError::Geometry("empty projection set".into()));
    }
    let inner_area = enclosed_area(gamma1)?;
    let level_gap = (gamma1.level() - gamma0.level()).abs();
    let d1 = gradient(rho).0;
    let abs = d1.map(f64::abs);
    let dx1 = d.dx1();
    let mut rows = Vec::new();
    for j in 0..d.ny() {
        let y = d.x2(j);
        if proj.contains(y) {
            let s: f64 = abs.row(j).iter().sum::<f64>() * dx1;
            rows.push((y, s));
        }
    }
    let min_slice = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let l2_sq = d1.map(|v| v * v).integral();
    Ok(SliceReport {
        level_gap,
        min_slice: if rows.is_empty() { f64::INFINITY } else { min_slice },
        rows,
        projection_length: proj.length(),
        inner_area,
        l1: abs.integral(),
        l1_bound: inner_area * level_gap / (2.0 * PI),
        l2_sq,
        l2_sq_bound: (inner_area * level_gap).powi(2) / (16.0 * PI.powi(4)),
    })
}
