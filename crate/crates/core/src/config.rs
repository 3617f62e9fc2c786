//! Run configuration: line-oriented `key = value` text with `#` comments.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::dynamics::StepperConfig;
use crate::error::{IpmError, Result};
use crate::scenario::{LayeredShape, ProfileKind, Scenario};
use crate::simulation::SimulationOptions;
use crate::spectral::{Domain, DomainKind};

/// Certificate suite names understood by `certify` and `certificates.checks`.
pub const CHECK_NAMES: &[&str] = &[
    "energy",
    "symmetry",
    "thm1",
    "thm2",
    "interpolation",
    "bubble",
    "layered",
    "perturbation",
    "bump",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain_kind: DomainKind,
    pub nx: usize,
    pub ny: usize,
    /// Strip eigenmode count (`None`: default for `ny`).
    pub modes: Option<usize>,
    pub scenario: Scenario,
    pub stepper: StepperConfig,
    pub sample_interval: f64,
    pub requested_s: Vec<f64>,
    /// `None`: the scenario's default suite.
    pub checks: Option<Vec<String>>,
    pub snapshots: bool,
    pub out_dir: Option<PathBuf>,
    /// Exponents `γ` of the bump certificate.
    pub bump_gammas: Vec<f64>,
    /// Bump radii of the bump certificate.
    pub bump_lambdas: Vec<f64>,
    pub rng_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain_kind: DomainKind::Torus,
            nx: 128,
            ny: 128,
            modes: None,
            scenario: Scenario::S2Symmetric,
            stepper: StepperConfig::default(),
            sample_interval: 0.05,
            requested_s: vec![1.0],
            checks: None,
            snapshots: true,
            out_dir: None,
            bump_gammas: vec![0.5, 1.0],
            bump_lambdas: vec![0.5, 0.25, 0.125],
            rng_seed: 0,
        }
    }
}

/// Raw `key -> (value, line)` map.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, (String, usize)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        }
        .trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| IpmError::Config {
            line,
            msg: format!("expected 'key = value', got '{body}'"),
        })?;
        let key = key.trim();
        let value = value.trim().trim_matches('"');
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
            return Err(IpmError::Config {
                line,
                msg: format!("malformed key '{key}'"),
            });
        }
        if out.insert(key.to_string(), (value.to_string(), line)).is_some() {
            return Err(IpmError::Config {
                line,
                msg: format!("duplicate key '{key}'"),
            });
        }
    }
    Ok(out)
}

struct Reader {
    pairs: BTreeMap<String, (String, usize)>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.pairs.remove(key)
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|_| IpmError::Config {
                line,
                msg: format!("cannot parse '{v}' for key '{key}'"),
            }),
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parsed::<f64>(key)?.unwrap_or(default))
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => parse_list(&v).map(Some).map_err(|_| IpmError::Config {
                line,
                msg: format!("cannot parse number list '{v}' for key '{key}'"),
            }),
        }
    }

    fn point_or(&mut self, key: &str, default: (f64, f64)) -> Result<(f64, f64)> {
        match self.take(key) {
            None => Ok(default),
            Some((v, line)) => match parse_list(&v).as_deref() {
                Ok([a, b]) => Ok((*a, *b)),
                _ => Err(IpmError::Config {
                    line,
                    msg: format!("expected two numbers 'x1, x2' for key '{key}', got '{v}'"),
                }),
            },
        }
    }

    fn profile_or(&mut self, key: &str, default: ProfileKind) -> Result<ProfileKind> {
        match self.take(key) {
            None => Ok(default),
            Some((v, line)) => ProfileKind::parse(&v).map_err(|e| IpmError::Config { line, msg: e.to_string() }),
        }
    }
}

pub fn parse_list(v: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse::<f64>)
        .collect()
}

pub fn parse_check_list(v: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for name in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if !CHECK_NAMES.contains(&name) {
            return Err(IpmError::InvalidArgument(format!(
                "unknown check '{name}' (known: {})",
                CHECK_NAMES.join(", ")
            )));
        }
        out.push(name.to_string());
    }
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Reader { pairs: parse_pairs(text)? };
        let mut c = RunConfig::default();
        if let Some((v, line)) = r.take("domain.kind") {
            c.domain_kind = match v.as_str() {
                "torus" => DomainKind::Torus,
                "strip" => DomainKind::Strip,
                _ => {
                    return Err(IpmError::Config {
                        line,
                        msg: format!("domain.kind must be torus or strip, got '{v}'"),
                    })
                }
            };
        }
        c.nx = r.parsed("domain.nx")?.unwrap_or(c.nx);
        c.ny = r.parsed("domain.ny")?.unwrap_or(match c.domain_kind {
            DomainKind::Torus => c.nx,
            DomainKind::Strip => c.nx + 1,
        });
        c.modes = r.parsed("domain.modes")?;

        let (name, name_line) = r.take("scenario").unwrap_or(("s2_symmetric".into(), 0));
        let profile = r.profile_or(
            "scenario.profile",
            if c.domain_kind == DomainKind::Strip && name == "bump_strip" {
                ProfileKind::Linear
            } else {
                ProfileKind::Sin
            },
        )?;
        c.scenario = match name.as_str() {
            "stratified" => Scenario::Stratified { profile },
            "s2_symmetric" => Scenario::S2Symmetric,
            "bubble" => Scenario::Bubble {
                center: r.point_or("scenario.bubble.center", (0.0, PI / 2.0))?,
                radius: r.f64_or("scenario.bubble.radius", 1.0)?,
                height: r.f64_or("scenario.bubble.height", 1.0)?,
                background: r.profile_or("scenario.bubble.background", ProfileKind::Zero)?,
                odd: r.parsed("scenario.bubble.odd")?.unwrap_or(c.domain_kind == DomainKind::Torus),
                markers: r.parsed("scenario.bubble.markers")?.unwrap_or(512),
            },
            "layered" => {
                let shape = match r.take("scenario.layered.shape") {
                    None => LayeredShape::Band,
                    Some((v, line)) => match v.as_str() {
                        "band" => LayeredShape::Band,
                        "rotation" => LayeredShape::Rotation,
                        _ => {
                            return Err(IpmError::Config {
                                line,
                                msg: format!("scenario.layered.shape must be band or rotation, got '{v}'"),
                            })
                        }
                    },
                };
                Scenario::Layered {
                    shape,
                    profile,
                    center: r.point_or("scenario.layered.center", (0.0, PI / 2.0))?,
                    eps0: r.f64_or("scenario.layered.eps0", 0.1)?,
                    tau: r.f64_or("scenario.layered.tau", 1.0)?,
                    width: r.f64_or("scenario.layered.width", 0.15)?,
                }
            }
            "bump_strip" => Scenario::BumpStrip {
                profile,
                lambda: r.f64_or("scenario.bump.lambda", 0.5)?,
            },
            "custom_snapshot" => match r.take("scenario.snapshot.path") {
                Some((v, _)) => Scenario::Snapshot { path: PathBuf::from(v) },
                None => {
                    return Err(IpmError::Config {
                        line: name_line,
                        msg: "custom_snapshot needs scenario.snapshot.path".into(),
                    })
                }
            },
            _ => {
                return Err(IpmError::Config {
                    line: name_line,
                    msg: format!("unknown scenario '{name}'"),
                })
            }
        };
        if let Some(g) = r.list("scenario.bump.gamma")? {
            c.bump_gammas = g;
        }
        if let Some(l) = r.list("scenario.bump.lambdas")? {
            c.bump_lambdas = l;
        }

        c.stepper.cfl = r.f64_or("stepper.cfl", c.stepper.cfl)?;
        c.stepper.dealias_fraction = r.f64_or("stepper.dealias", c.stepper.dealias_fraction)?;
        c.stepper.t_end = r.f64_or("stepper.t_end", c.stepper.t_end)?;
        c.stepper.max_steps = r.parsed("stepper.max_steps")?.unwrap_or(c.stepper.max_steps);
        c.stepper.resolution_tail_max = r.f64_or("stepper.tail_max", c.stepper.resolution_tail_max)?;
        c.sample_interval = r.f64_or("sample.interval", c.sample_interval)?;
        if let Some(s) = r.list("diagnostics.s")? {
            c.requested_s = s;
        }
        if let Some((v, line)) = r.take("certificates.checks") {
            c.checks = Some(parse_check_list(&v).map_err(|e| IpmError::Config { line, msg: e.to_string() })?);
        }
        c.snapshots = r.parsed("output.snapshots")?.unwrap_or(c.snapshots);
        c.out_dir = r.take("output.dir").map(|(v, _)| PathBuf::from(v));
        c.rng_seed = r.parsed("rng_seed")?.unwrap_or(0);

        if let Some((key, (_, line))) = r.pairs.into_iter().next() {
            return Err(IpmError::Config {
                line,
                msg: format!("unknown key '{key}'"),
            });
        }
        c.validate()?;
        Ok(c)
    }

    /// Canonical text form; `parse(to_text())` gives back the same config.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let mut l: Vec<String> = Vec::new();
        l.push(format!("domain.kind = {}", self.domain_kind.name()));
        l.push(format!("domain.nx = {}", self.nx));
        l.push(format!("domain.ny = {}", self.ny));
        if let Some(q) = self.modes {
            l.push(format!("domain.modes = {q}"));
        }
        l.push(format!("scenario = {}", self.scenario.name()));
        match &self.scenario {
            Scenario::Stratified { profile } => l.push(format!("scenario.profile = {}", profile.name())),
            Scenario::S2Symmetric => {}
            Scenario::Bubble {
                center,
                radius,
                height,
                background,
                odd,
                markers,
            } => {
                l.push(format!("scenario.bubble.center = {:?}, {:?}", center.0, center.1));
                l.push(format!("scenario.bubble.radius = {radius:?}"));
                l.push(format!("scenario.bubble.height = {height:?}"));
                l.push(format!("scenario.bubble.background = {}", background.name()));
                l.push(format!("scenario.bubble.odd = {odd}"));
                l.push(format!("scenario.bubble.markers = {markers}"));
            }
            Scenario::Layered {
                shape,
                profile,
                center,
                eps0,
                tau,
                width,
            } => {
                l.push(format!("scenario.profile = {}", profile.name()));
                let shape = match shape {
                    LayeredShape::Band => "band",
                    LayeredShape::Rotation => "rotation",
                };
                l.push(format!("scenario.layered.shape = {shape}"));
                l.push(format!("scenario.layered.center = {:?}, {:?}", center.0, center.1));
                l.push(format!("scenario.layered.eps0 = {eps0:?}"));
                l.push(format!("scenario.layered.tau = {tau:?}"));
                l.push(format!("scenario.layered.width = {width:?}"));
            }
            Scenario::BumpStrip { profile, lambda } => {
                l.push(format!("scenario.profile = {}", profile.name()));
                l.push(format!("scenario.bump.lambda = {lambda:?}"));
            }
            Scenario::Snapshot { path } => l.push(format!("scenario.snapshot.path = {}", path.display())),
        }
        l.push(format!("scenario.bump.gamma = {}", list(&self.bump_gammas)));
        l.push(format!("scenario.bump.lambdas = {}", list(&self.bump_lambdas)));
        l.push(format!("stepper.cfl = {:?}", self.stepper.cfl));
        l.push(format!("stepper.dealias = {:?}", self.stepper.dealias_fraction));
        l.push(format!("stepper.t_end = {:?}", self.stepper.t_end));
        l.push(format!("stepper.max_steps = {}", self.stepper.max_steps));
        l.push(format!("stepper.tail_max = {:?}", self.stepper.resolution_tail_max));
        l.push(format!("sample.interval = {:?}", self.sample_interval));
        l.push(format!("diagnostics.s = {}", list(&self.requested_s)));
        if let Some(c) = &self.checks {
            l.push(format!("certificates.checks = {}", c.join(", ")));
        }
        l.push(format!("output.snapshots = {}", self.snapshots));
        if let Some(d) = &self.out_dir {
            l.push(format!("output.dir = {}", d.display()));
        }
        l.push(format!("rng_seed = {}", self.rng_seed));
        let mut text = l.join("\n");
        text.push('\n');
        text
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain()?;
        self.stepper.validate()?;
        if !(self.sample_interval > 0.0) {
            return Err(IpmError::InvalidArgument("sample.interval must be positive".into()));
        }
        if self.requested_s.iter().any(|s| !s.is_finite()) {
            return Err(IpmError::InvalidArgument("diagnostics.s must be finite".into()));
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain> {
        match (self.domain_kind, self.modes) {
            (DomainKind::Torus, None) => Domain::torus(self.nx, self.ny),
            (DomainKind::Torus, Some(_)) => Err(IpmError::InvalidArgument(
                "domain.modes only applies to the strip".into(),
            )),
            (DomainKind::Strip, None) => Domain::strip(self.nx, self.ny),
            (DomainKind::Strip, Some(q)) => Domain::strip_with_modes(self.nx, self.ny, q),
        }
    }

    pub fn simulation_options(&self) -> SimulationOptions {
        let mut s = self.requested_s.clone();
        s.sort_by(f64::total_cmp);
        s.dedup();
        SimulationOptions {
            stepper: self.stepper,
            sample_interval: self.sample_interval,
            requested_s: s,
            keep_fields: false,
        }
    }

    /// Configured checks, or the scenario's default suite.
    pub fn checks(&self) -> Vec<String> {
        if let Some(c) = &self.checks {
            return c.clone();
        }
        let names: &[&str] = match self.scenario {
            Scenario::S2Symmetric => &["energy", "symmetry", "thm2"],
            Scenario::Bubble { .. } => &["energy", "bubble"],
            Scenario::Layered { .. } => &["energy", "layered"],
            _ => &["energy"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn dotted_keys_and_comments() {
        let text = "# bubble run\ndomain.nx = 64  # grid\nscenario = bubble\nscenario.bubble.center = 0.5, 1.5\nscenario.bubble.radius = 0.8\ndiagnostics.s = 2, 0.5\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!((c.nx, c.ny), (64, 64));
        match c.scenario {
            Scenario::Bubble { center, radius, odd, .. } => {
                assert_eq!(center, (0.5, 1.5));
                assert_eq!(radius, 0.8);
                assert!(odd);
            }
            _ => panic!("wrong scenario"),
        }
        assert_eq!(c.simulation_options().requested_s, vec![0.5, 2.0]);
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let e = RunConfig::parse("domain.nx = 32\nscenario.bubble.radios = 1\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("scenario.bubble.radios"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            RunConfig::parse("a\n"),
            Err(IpmError::Config { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("domain.nx = 8\ndomain.nx = 16\n"),
            Err(IpmError::Config { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::parse("\n\ndomain.nx = many\n"),
            Err(IpmError::Config { line: 3, .. })
        ));
        assert!(RunConfig::parse("domain.nx = 7\n").is_err());
        assert!(RunConfig::parse("certificates.checks = energy, nope\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let text = "scenario = layered\nscenario.layered.shape = rotation\nscenario.layered.eps0 = 0.2\ncertificates.checks = energy, layered\nstepper.t_end = 0.1\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        let b = RunConfig::parse("scenario = bubble\noutput.dir = /tmp/x\n").unwrap();
        assert_eq!(RunConfig::parse(&b.to_text()).unwrap(), b);
    }

    #[test]
    fn strip_defaults() {
        let c = RunConfig::parse("domain.kind = strip\ndomain.nx = 32\nscenario = bump_strip\n").unwrap();
        assert_eq!(c.ny, 33);
        assert_eq!(
            c.scenario,
            Scenario::BumpStrip {
                profile: ProfileKind::Linear,
                lambda: 0.5
            }
        );
    }
}
