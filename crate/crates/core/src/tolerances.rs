//! Named tolerances. Every threshold used by the transforms, the stepper
//! monitors and the certificates lives here.

/// Round-trip and brute-force transform agreement.
pub const TRANSFORM_EXACT: f64 = 1e-12;
/// Conjugate-symmetry defect above which an inverse transform is refused.
pub const INVERSE_SYMMETRY: f64 = 1e-10;
/// Largest admissible |c(0,0)| (relative to max(1, max|c|)) for the torus inverse Laplacian.
pub const MEAN_MODE: f64 = 1e-12;
/// Parity checks (odd/even) on sampled fields, relative to the field amplitude.
pub const PARITY: f64 = 1e-10;
/// Oddness of a stratified profile.
pub const PROFILE_PARITY: f64 = 1e-12;

/// Resolution monitor: energy fraction in the top third of retained modes.
pub const RESOLUTION_TAIL_MAX: f64 = 1e-6;
/// Default 2/3 dealiasing.
pub const DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// Negative dust below this (absolute) is clipped before taking cube roots.
pub const CUBE_ROOT_CLIP: f64 = 1e-10;
/// Negativity on D beyond this fraction of max ρ means the hypothesis fails.
pub const CUBE_ROOT_NEGATIVITY: f64 = 1e-6;

/// Pointwise energy identity |E' + δ| relative to max(|E'|, δ, 1e-3 |E(0)|).
pub const ENERGY_POINTWISE: f64 = 1e-4;
/// Integrated energy identity relative to |E(0)| + ∫δ.
pub const ENERGY_INTEGRATED: f64 = 1e-4;
/// Allowed increase of E between samples, relative to |E(0)|.
pub const ENERGY_MONOTONE: f64 = 1e-8;
/// Floor of the pointwise energy scale, as a fraction of |E(0)|.
pub const ENERGY_SCALE_FLOOR: f64 = 1e-3;

/// Cone-mass and triangle-geometry steps of the whole-plane chain (lattice vs continuum).
pub const CONE_CHAIN: f64 = 0.05;
/// Lattice inequalities that are exact up to roundoff (Hölder, Cauchy–Schwarz, Parseval).
pub const LATTICE_EXACT: f64 = 1e-12;
/// Torus symmetric-scenario checks on g: sign (a) and pinning (b), relative to max|g|.
pub const G_SIGN: f64 = 1e-6;
/// Drift of ∫_D ρ^{1/3} relative to its initial value.
pub const CUBE_ROOT_DRIFT: f64 = 1e-4;
/// Eq. relating ρ̂(k1,1) and ĝ(k1).
pub const G_FOURIER_RELATION: f64 = 1e-10;

/// Slice bound and aggregated L1 bound of the bubble certificate.
pub const BUBBLE_SLICE: f64 = 0.05;
/// Area drift of tracked material curves, relative.
pub const AREA_DRIFT: f64 = 1e-3;
/// Level fidelity of markers, relative to osc(ρ0).
pub const LEVEL_FIDELITY: f64 = 1e-3;

/// Energy-gap transfer step of the layered certificate (relative to b).
pub const LAYER_GAP: f64 = 1e-6;
/// L1 lower bound of the layered certificate.
pub const LAYER_L1: f64 = 0.05;

/// Bump scaling: accepted window of the fitted L2 slope around 2.
pub const BUMP_L2_SLOPE: f64 = 0.1;
/// Bump scaling: accepted window of the H2 seminorm ratios around 1.
pub const BUMP_H2_RATIO: f64 = 0.1;
/// Bump scaling: relative window of the fitted H^{2-γ} slope around γ.
pub const BUMP_FRACTIONAL_SLOPE: f64 = 0.15;
/// Minimum number of grid cells across the bump diameter.
pub const BUMP_MIN_CELLS: f64 = 8.0;

/// Relative error target of the graded quadrature of ∫_D sin(x2)^{-1/2}.
pub const SINGULAR_QUADRATURE: f64 = 1e-6;

/// Energy of the stratified profile vs the energy of the numerical rearrangement.
pub const REARRANGEMENT_ENERGY: f64 = 1e-3;
/// `|F'(0)| ≤ FPRIME_RELATIVE · |F''(0)| · Δτ`.
pub const FPRIME_RELATIVE: f64 = 1e-6;
/// `|F(0)|`.
pub const F_AT_ZERO: f64 = 1e-12;
