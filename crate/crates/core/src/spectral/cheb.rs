//! Chebyshev–Gauss–Lobatto machinery on the interval [-π, π].
//!
//! Nodes are ordered bottom to top: `x_j = -π cos(π j / N)`, `j = 0..=N`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

/// CGL nodes on [-π, π], ascending, `n` points (`n >= 2`).
pub fn nodes(n: usize) -> Vec<f64> {
    let deg = (n - 1) as f64;
    (0..n)
        .map(|j| {
            // sin form keeps the nodes exactly antisymmetric
            let theta = PI * (deg - 2.0 * j as f64) / (2.0 * deg);
            -PI * theta.sin()
        })
        .collect()
}

/// Clenshaw–Curtis weights for ∫_{-π}^{π} on [`nodes`].
pub fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    let deg = n - 1;
    let nf = deg as f64;
    let mut w = vec![0.0; n];
    for (j, wj) in w.iter_mut().enumerate() {
        let theta = PI * j as f64 / nf;
        let mut s = 0.0;
        for k in 0..=deg / 2 {
            let b = if k == 0 || (deg % 2 == 0 && k == deg / 2) {
                1.0
            } else {
                2.0
            };
            s += b / (1.0 - 4.0 * (k * k) as f64) * (2.0 * k as f64 * theta).cos();
        }
        let c = if j == 0 || j == deg { 1.0 } else { 2.0 };
        // interval length 2π instead of 2
        *wj = PI * c / nf * s;
    }
    w
}

fn barycentric_weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n - 1 {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect()
}

/// First-derivative collocation matrix d/dx2 on [`nodes`].
pub fn diff_matrix(n: usize) -> DMatrix<f64> {
    let x = nodes(n);
    let w = barycentric_weights(n);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (x[i] - x[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Barycentric interpolation of CGL samples at an arbitrary `x` in [-π, π].
pub fn interpolate(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let nodes = nodes(n);
    let w = barycentric_weights(n);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..n {
        let dx = x - nodes[j];
        if dx == 0.0 {
            return values[j];
        }
        let t = w[j] / dx;
        num += t * values[j];
        den += t;
    }
    num / den
}

/// Precomputed interpolation weights for evaluating many CGL functions at the same `x`.
pub fn interpolation_row(nodes: &[f64], x: f64) -> Vec<f64> {
    let n = nodes.len();
    let w = barycentric_weights(n);
    let mut row = vec![0.0; n];
    if let Some(j) = nodes.iter().position(|&xj| xj == x) {
        row[j] = 1.0;
        return row;
    }
    let mut den = 0.0;
    for j in 0..n {
        let t = w[j] / (x - nodes[j]);
        row[j] = t;
        den += t;
    }
    row.iter_mut().for_each(|r| *r /= den);
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_symmetric_and_include_endpoints() {
        let x = nodes(9);
        assert_eq!(x[0], -PI);
        assert_eq!(x[8], PI);
        assert_eq!(x[4], 0.0);
        for j in 0..9 {
            assert_eq!(x[j], -x[8 - j]);
        }
    }

    #[test]
    fn clenshaw_curtis_integrates_polynomials() {
        for n in [9, 16, 33] {
            let x = nodes(n);
            let w = clenshaw_curtis_weights(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0 * PI).abs() < 1e-13);
            let x2: f64 = w.iter().zip(&x).map(|(w, x)| w * x * x).sum();
            assert!((x2 - 2.0 * PI.powi(3) / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn differentiation_is_spectral() {
        let n = 33;
        let x = nodes(n);
        let d = diff_matrix(n);
        let f: Vec<f64> = x.iter().map(|x| x.sin()).collect();
        for i in 0..n {
            let df: f64 = (0..n).map(|j| d[(i, j)] * f[j]).sum();
            assert!((df - x[i].cos()).abs() < 1e-10, "row {i}");
        }
    }

    #[test]
    fn interpolation_is_spectral() {
        let n = 41;
        let x = nodes(n);
        let f: Vec<f64> = x.iter().map(|x| (0.7 * x).cos()).collect();
        for &t in &[-3.0, -0.123, 0.5, 2.9] {
            assert!((interpolate(&f, t) - (0.7 * t).cos()).abs() < 1e-12);
            let row = interpolation_row(&x, t);
            let v: f64 = row.iter().zip(&f).map(|(a, b)| a * b).sum();
            assert!((v - (0.7 * t).cos()).abs() < 1e-12);
        }
    }
}
