//! Named initial conditions with their tracked curves and reference states.

use std::f64::consts::PI;
use std::path::PathBuf;

use crate::error::{IpmError, Result};
use crate::initial_data::{
    make_bubble, make_bump_perturbation, make_curved_band, make_layered, make_s2_symmetric, odd_reflect, Bubble,
    Parity, StratifiedProfile,
};
use crate::spectral::{Domain, DomainKind, ScalarField};
use crate::tracking::MarkerCurve;

/// Stratified profile selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// `sin x2` (odd).
    Sin,
    /// `-x2` (strip only).
    Linear,
    Zero,
}

impl ProfileKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sin" => Ok(ProfileKind::Sin),
            "linear" => Ok(ProfileKind::Linear),
            "zero" => Ok(ProfileKind::Zero),
            _ => Err(IpmError::InvalidArgument(format!(
                "unknown profile '{s}' (expected sin, linear or zero)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Sin => "sin",
            ProfileKind::Linear => "linear",
            ProfileKind::Zero => "zero",
        }
    }

    pub fn build(&self, domain: Domain) -> Result<StratifiedProfile> {
        match self {
            ProfileKind::Sin => StratifiedProfile::from_fn(domain, f64::sin, Parity::Odd),
            ProfileKind::Zero => StratifiedProfile::from_fn(domain, |_| 0.0, Parity::Odd),
            ProfileKind::Linear => {
                if domain.is_torus() {
                    return Err(IpmError::Unsupported {
                        domain: "torus",
                        what: "linear profile".into(),
                    });
                }
                StratifiedProfile::from_fn(domain, |y| -y, Parity::None)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayeredShape {
    /// Circular-flow rotation of the profile around `center`.
    Rotation,
    /// Curved band over a flat band.
    Band,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Stratified {
        profile: ProfileKind,
    },
    S2Symmetric,
    Bubble {
        center: (f64, f64),
        radius: f64,
        height: f64,
        background: ProfileKind,
        /// Compose with the odd reflection in x2 (torus only).
        odd: bool,
        markers: usize,
    },
    Layered {
        shape: LayeredShape,
        profile: ProfileKind,
        center: (f64, f64),
        eps0: f64,
        tau: f64,
        width: f64,
    },
    BumpStrip {
        profile: ProfileKind,
        lambda: f64,
    },
    Snapshot {
        path: PathBuf,
    },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Stratified { .. } => "stratified",
            Scenario::S2Symmetric => "s2_symmetric",
            Scenario::Bubble { .. } => "bubble",
            Scenario::Layered { .. } => "layered",
            Scenario::BumpStrip { .. } => "bump_strip",
            Scenario::Snapshot { .. } => "custom_snapshot",
        }
    }
}

/// Built initial state.
#[derive(Debug, Clone)]
pub struct InitialState {
    pub field: ScalarField,
    pub curves: Vec<MarkerCurve>,
    /// Stratified reference state, when the scenario defines one.
    pub stratified: Option<StratifiedProfile>,
    pub bubble: Option<Bubble>,
}

impl InitialState {
    fn plain(field: ScalarField) -> Self {
        InitialState {
            field,
            curves: Vec::new(),
            stratified: None,
            bubble: None,
        }
    }
}

pub fn build(domain: Domain, scenario: &Scenario) -> Result<InitialState> {
    match scenario {
        Scenario::Stratified { profile } => {
            let p = profile.build(domain)?;
            Ok(InitialState {
                field: p.field(),
                curves: Vec::new(),
                stratified: Some(p),
                bubble: None,
            })
        }
        Scenario::S2Symmetric => make_s2_symmetric(domain).map(InitialState::plain),
        Scenario::Bubble {
            center,
            radius,
            height,
            background,
            odd,
            markers,
        } => {
            let bg = background.build(domain)?;
            let b = make_bubble(domain, *center, *radius, *height, &bg)?;
            let field = if *odd {
                if domain.kind() != DomainKind::Torus {
                    return Err(IpmError::Unsupported {
                        domain: "strip",
                        what: "odd reflection of bubble data".into(),
                    });
                }
                if center.1 - radius <= 0.0 {
                    return Err(IpmError::Geometry(
                        "odd bubble must lie in the upper half x2 > 0".into(),
                    ));
                }
                odd_reflect(&b.field)
            } else {
                b.field.clone()
            };
            let curves = vec![
                MarkerCurve::circle(domain, b.center, b.r0, *markers, b.c0)?,
                MarkerCurve::circle(domain, b.center, b.r1, *markers, b.c1)?,
            ];
            Ok(InitialState {
                field,
                curves,
                stratified: Some(bg),
                bubble: Some(b),
            })
        }
        Scenario::Layered {
            shape,
            profile,
            center,
            eps0,
            tau,
            width,
        } => match shape {
            LayeredShape::Band => {
                let (field, p) = make_curved_band(domain, *width)?;
                Ok(InitialState {
                    field,
                    curves: Vec::new(),
                    stratified: Some(p),
                    bubble: None,
                })
            }
            LayeredShape::Rotation => {
                let p = profile.build(domain)?;
                let field = make_layered(&p, *center, *eps0, *tau, domain)?;
                Ok(InitialState {
                    field,
                    curves: Vec::new(),
                    stratified: Some(p),
                    bubble: None,
                })
            }
        },
        Scenario::BumpStrip { profile, lambda } => {
            let p = profile.build(domain)?;
            let b = make_bump_perturbation(&p, *lambda, domain)?;
            Ok(InitialState {
                field: b.field,
                curves: Vec::new(),
                stratified: Some(p),
                bubble: None,
            })
        }
        Scenario::Snapshot { path } => {
            let (field, _t) = crate::io::read_snapshot(path)?;
            if (field.domain().kind(), field.domain().nx(), field.domain().ny()) != (domain.kind(), domain.nx(), domain.ny()) {
                return Err(IpmError::InvalidArgument(format!(
                    "snapshot grid {}x{} ({}) does not match the configured domain {}x{} ({})",
                    field.domain().nx(),
                    field.domain().ny(),
                    field.domain().kind().name(),
                    domain.nx(),
                    domain.ny(),
                    domain.kind().name()
                )));
            }
            Ok(InitialState::plain(field))
        }
    }
}

/// Default bubble: zero background, odd reflection, centred at `(0, π/2)`.
pub fn default_bubble() -> Scenario {
    Scenario::Bubble {
        center: (0.0, PI / 2.0),
        radius: 1.0,
        height: 1.0,
        background: ProfileKind::Zero,
        odd: true,
        markers: 512,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_parse() {
        for k in [ProfileKind::Sin, ProfileKind::Linear, ProfileKind::Zero] {
            assert_eq!(ProfileKind::parse(k.name()).unwrap(), k);
        }
        assert!(ProfileKind::parse("cos").is_err());
    }

    #[test]
    fn linear_profile_needs_strip() {
        let d = Domain::torus(16, 16).unwrap();
        assert!(ProfileKind::Linear.build(d).is_err());
    }

    #[test]
    fn odd_bubble_is_odd() {
        let d = Domain::torus(64, 64).unwrap();
        let st = build(d, &default_bubble()).unwrap();
        assert!(st.field.odd_x2_defect() < 1e-14);
        assert_eq!(st.curves.len(), 2);
        assert!(st.field.l2_norm() > 0.0);
    }

    #[test]
    fn odd_bubble_rejects_lower_half() {
        let d = Domain::torus(32, 32).unwrap();
        let sc = Scenario::Bubble {
            center: (0.0, 0.5),
            radius: 1.0,
            height: 1.0,
            background: ProfileKind::Zero,
            odd: true,
            markers: 64,
        };
        assert!(build(d, &sc).is_err());
    }
}
