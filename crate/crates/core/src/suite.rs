//! Certificate suites over a sequence of samples, shared by `run` and `certify`.

use crate::certificates::{
    bubble_sample, check_bubble, check_bump_scaling, check_energy_identity, check_interpolation,
    check_layered_gap, check_symmetry, check_thm1_cone_bound, check_thm2_chain, perturbation_energy_curve,
    BubbleSample, CertificateReport,
};
use crate::config::{RunConfig, CHECK_NAMES};
use crate::diagnostics::{dx1, potential_energy, DiagnosticsRecord};
use crate::error::{IpmError, Result};
use crate::initial_data::{stratified_rearrangement, StratifiedProfile};
use crate::scenario::{ProfileKind, Scenario};
use crate::spectral::{forward_transform, Domain, DomainKind, ScalarField};
use crate::tracking::MarkerCurve;

/// Perturbation certificate times `τ = 0.01, …, 0.1`.
pub fn perturbation_taus() -> Vec<f64> {
    (1..=10).map(|i| 0.01 * i as f64).collect()
}

fn wants(checks: &[String], name: &str) -> bool {
    checks.iter().any(|c| c == name)
}

fn or_rejected(name: &str, r: Result<CertificateReport>) -> CertificateReport {
    r.unwrap_or_else(|e| CertificateReport::rejected(name, &e.to_string()))
}

fn positive_s(s: &[f64]) -> Vec<f64> {
    s.iter().copied().filter(|&v| v > 0.0).collect()
}

/// Streaming evaluation of the requested checks.
pub struct Suite {
    checks: Vec<String>,
    s: Vec<f64>,
    records: Vec<DiagnosticsRecord>,
    first: Option<ScalarField>,
    cube_root0: Option<f64>,
    symmetry: Vec<CertificateReport>,
    thm2: Vec<CertificateReport>,
    interpolation: Vec<Vec<CertificateReport>>,
    bubble: Vec<BubbleSample>,
    bubble_error: Option<String>,
}

impl Suite {
    pub fn new(checks: &[String], requested_s: &[f64]) -> Result<Self> {
        for c in checks {
            if !CHECK_NAMES.contains(&c.as_str()) {
                return Err(IpmError::InvalidArgument(format!("unknown check '{c}'")));
            }
        }
        let s = positive_s(requested_s);
        Ok(Suite {
            checks: checks.to_vec(),
            interpolation: vec![Vec::new(); s.len()],
            s,
            records: Vec::new(),
            first: None,
            cube_root0: None,
            symmetry: Vec::new(),
            thm2: Vec::new(),
            bubble: Vec::new(),
            bubble_error: None,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn push(&mut self, field: &ScalarField, curves: &[MarkerCurve], record: &DiagnosticsRecord) {
        if self.first.is_none() {
            self.first = Some(field.clone());
            self.cube_root0 = record.cube_root_mass;
        }
        self.records.push(record.clone());
        let first = self.first.as_ref().expect("set above");
        if wants(&self.checks, "symmetry") {
            self.symmetry.push(or_rejected("symmetry", check_symmetry(&[first, field])));
        }
        if wants(&self.checks, "thm2") {
            let mut alphas = vec![1.0];
            alphas.extend(self.s.iter().copied().filter(|&a| a != 1.0));
            self.thm2
                .push(or_rejected("thm2_chain", check_thm2_chain(field, self.cube_root0, &alphas)));
        }
        if wants(&self.checks, "interpolation") {
            let spec = forward_transform(&dx1(field));
            for (k, &s) in self.s.iter().enumerate() {
                let r = match &spec {
                    Ok(f) => check_interpolation(f, s),
                    Err(e) => Err(IpmError::InvalidArgument(e.to_string())),
                };
                self.interpolation[k].push(or_rejected("interpolation", r));
            }
        }
        if wants(&self.checks, "bubble") && self.bubble_error.is_none() {
            if curves.len() < 2 {
                self.bubble_error = Some("bubble check needs two tracked curves".into());
            } else {
                match bubble_sample(field, &curves[0], &curves[1], record.t) {
                    Ok(b) => self.bubble.push(b),
                    Err(e) => self.bubble_error = Some(e.to_string()),
                }
            }
        }
    }

    /// Reports in the order of the requested checks. `stratified` is the
    /// scenario's stratified state, if any.
    pub fn finish(self, stratified: Option<&StratifiedProfile>, cfg: &RunConfig) -> Vec<CertificateReport> {
        let mut out = Vec::new();
        for name in &self.checks {
            match name.as_str() {
                "energy" => out.push(or_rejected("energy_identity", check_energy_identity(&self.records))),
                "symmetry" => out.push(CertificateReport::aggregate("symmetry", &self.symmetry)),
                "thm2" => out.push(CertificateReport::aggregate("thm2_chain", &self.thm2)),
                "interpolation" => {
                    for (k, s) in self.s.iter().enumerate() {
                        out.push(CertificateReport::aggregate(
                            &format!("interpolation_s{s}"),
                            &self.interpolation[k],
                        ));
                    }
                }
                "thm1" => match &self.first {
                    None => out.push(CertificateReport::rejected("thm1_cone", "no samples")),
                    Some(f) => {
                        for s in &self.s {
                            let mut r = or_rejected("thm1_cone", check_thm1_cone_bound(f, *s));
                            r.name = format!("thm1_cone_s{s}");
                            out.push(r);
                        }
                    }
                },
                "bubble" => out.push(match &self.bubble_error {
                    Some(e) => CertificateReport::rejected("bubble", e),
                    None => or_rejected("bubble", check_bubble(&self.bubble)),
                }),
                "layered" => out.push(or_rejected("layered_gap", self.layered(stratified))),
                "perturbation" => out.push(or_rejected("perturbation", perturbation(stratified, cfg))),
                "bump" => out.push(or_rejected("bump_scaling", bump(stratified, cfg))),
                _ => unreachable!("validated in Suite::new"),
            }
        }
        out
    }

    fn layered(&self, stratified: Option<&StratifiedProfile>) -> Result<CertificateReport> {
        let first = self.first.as_ref().ok_or(IpmError::TooFewSamples { need: 1, got: 0 })?;
        let rearranged = if first.domain().is_torus() {
            Some(stratified_rearrangement(first)?)
        } else {
            None
        };
        let e_rearranged = rearranged.as_ref().map(|p| potential_energy(&p.field())).transpose()?;
        let e_s = match stratified {
            Some(p) => potential_energy(&p.field())?,
            None => e_rearranged.ok_or_else(|| {
                IpmError::Hypothesis("layered check needs a stratified state or a torus field".into())
            })?,
        };
        let cross = if stratified.is_some() { e_rearranged } else { None };
        check_layered_gap(&self.records, e_s, cross)
    }
}

fn eps0_of(cfg: &RunConfig) -> f64 {
    match cfg.scenario {
        Scenario::Layered { eps0, .. } => eps0,
        _ => 0.1,
    }
}

fn perturbation(stratified: Option<&StratifiedProfile>, cfg: &RunConfig) -> Result<CertificateReport> {
    let profile = match stratified {
        Some(p) => p.clone(),
        None => ProfileKind::Sin.build(Domain::torus(256, 256)?)?,
    };
    let (_, r) = perturbation_energy_curve(&profile, eps0_of(cfg), &perturbation_taus(), None)?;
    Ok(r)
}

fn bump(stratified: Option<&StratifiedProfile>, cfg: &RunConfig) -> Result<CertificateReport> {
    let profile = match stratified {
        Some(p) if p.domain().kind() == DomainKind::Strip => p.clone(),
        _ => {
            let d = match cfg.domain_kind {
                DomainKind::Strip => cfg.domain()?,
                DomainKind::Torus => Domain::strip(512, 1025)?,
            };
            ProfileKind::Linear.build(d)?
        }
    };
    check_bump_scaling(&profile, &cfg.bump_gammas, &cfg.bump_lambdas)
}
