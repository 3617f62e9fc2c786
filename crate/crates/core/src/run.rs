//! Run and certify drivers: everything the command line does, minus argument parsing.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::certificates::CertificateReport;
use crate::config::RunConfig;
use crate::diagnostics::{dx1, record};
use crate::error::{IpmError, Result};
use crate::io::{self, SeriesWriter, CURVES_HEADER};
use crate::scenario::{build, InitialState};
use crate::simulation::{simulate_with, StopReason};
use crate::spectral::{forward_transform, sobolev_norm, ScalarField, SobolevIndex};
use crate::suite::Suite;
use crate::tracking::MarkerCurve;

pub const SERIES_FILE: &str = "series.csv";
pub const CURVES_FILE: &str = "curves.csv";
pub const CERTIFICATES_FILE: &str = "certificates.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const CONFIG_FILE: &str = "run.cfg";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub stop: StopReason,
    pub horizon: f64,
    pub steps: usize,
    pub samples: usize,
    /// `‖∂x1 ρ‖_{Ḣ¹}` at t = 0 and its maximum over the samples.
    pub dx1_h1_initial: f64,
    pub dx1_h1_max: f64,
    pub reports: Vec<CertificateReport>,
}

impl RunOutcome {
    pub fn growth_ratio(&self) -> f64 {
        self.dx1_h1_max / self.dx1_h1_initial
    }

    /// 0 on completion, 2 on a monitor trip, 1 when the step budget ran out.
    pub fn exit_code(&self) -> i32 {
        match self.stop {
            StopReason::Completed => 0,
            StopReason::MonitorTripped => 2,
            StopReason::MaxSteps => 1,
        }
    }
}

fn dx1_h1(field: &ScalarField) -> Result<f64> {
    sobolev_norm(&forward_transform(&dx1(field))?, SobolevIndex::homogeneous(1.0))
}

fn write_reports(path: &Path, reports: &[CertificateReport]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "{}", CertificateReport::CSV_HEADER)?;
    for r in reports {
        writeln!(f, "{}", r.to_csv_row())?;
    }
    f.flush()?;
    Ok(())
}

/// Build the initial data, integrate, and write `series.csv`, snapshots,
/// `curves.csv` (when curves are tracked), `certificates.csv`, `summary.txt`
/// and `run.cfg` into `out`. Outputs up to a monitor trip are kept.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let state = build(domain, &cfg.scenario)?;
    fs::create_dir_all(out)?;
    fs::write(out.join(CONFIG_FILE), cfg.to_text())?;
    let opts = cfg.simulation_options();
    let mut series = SeriesWriter::create(out.join(SERIES_FILE), &opts.requested_s)?;
    let mut curves_out = if state.curves.is_empty() {
        None
    } else {
        let mut w = BufWriter::new(File::create(out.join(CURVES_FILE))?);
        writeln!(w, "{CURVES_HEADER}")?;
        Some(w)
    };
    let mut suite = Suite::new(&cfg.checks(), &opts.requested_s)?;
    let mut index = 0usize;
    let mut h1 = (f64::NAN, 0.0f64);
    let traj = simulate_with(&state.field, state.curves.clone(), &opts, |s| {
        series.push(&s.record)?;
        if cfg.snapshots {
            io::write_snapshot(out.join(io::snapshot_name(index)), &s.field, s.record.t)?;
        }
        if let Some(w) = curves_out.as_mut() {
            io::write_curves_rows(w, s.record.t, &s.curves)?;
            w.flush()?;
        }
        let n = dx1_h1(&s.field)?;
        if index == 0 {
            h1.0 = n;
        }
        h1.1 = h1.1.max(n);
        suite.push(&s.field, &s.curves, &s.record);
        index += 1;
        Ok(())
    })?;
    let reports = suite.finish(state.stratified.as_ref(), cfg);
    write_reports(&out.join(CERTIFICATES_FILE), &reports)?;
    let outcome = RunOutcome {
        stop: traj.stop,
        horizon: traj.horizon,
        steps: traj.steps,
        samples: traj.records.len(),
        dx1_h1_initial: h1.0,
        dx1_h1_max: h1.1,
        reports,
    };
    fs::write(out.join(SUMMARY_FILE), summary_text(cfg, &outcome))?;
    Ok(outcome)
}

pub fn summary_text(cfg: &RunConfig, o: &RunOutcome) -> String {
    let stop = match o.stop {
        StopReason::Completed => "completed",
        StopReason::MonitorTripped => "monitor_tripped",
        StopReason::MaxSteps => "max_steps",
    };
    let mut s = format!(
        "scenario = {}\ngrid = {} {}x{}\nstop = {stop}\nhorizon = {}\nsteps = {}\nsamples = {}\ndx1_h1_initial = {}\ndx1_h1_max = {}\ngrowth_ratio = {}\n",
        cfg.scenario.name(),
        cfg.domain_kind.name(),
        cfg.nx,
        cfg.ny,
        io::num(o.horizon),
        o.steps,
        o.samples,
        io::num(o.dx1_h1_initial),
        io::num(o.dx1_h1_max),
        io::num(o.growth_ratio()),
    );
    for r in &o.reports {
        s.push_str("# ");
        s.push_str(&r.to_line());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone)]
pub struct CertifyOutcome {
    pub reports: Vec<CertificateReport>,
    pub warnings: Vec<String>,
}

impl CertifyOutcome {
    /// 0 iff every applicable check passed.
    pub fn exit_code(&self) -> i32 {
        if self.reports.iter().all(|r| r.passed() || !r.applicable()) {
            0
        } else {
            1
        }
    }
}

/// Snapshot files of a run directory, in sample order.
pub fn run_snapshots(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ipms"))
        .collect();
    v.sort();
    Ok(v)
}

/// Curves of `curves.csv` grouped by sample time.
pub fn read_curves(path: &Path, template: &[MarkerCurve]) -> Result<Vec<(f64, Vec<MarkerCurve>)>> {
    let text = fs::read_to_string(path)?;
    let mut out: Vec<(f64, Vec<Vec<(f64, f64)>>)> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let bad = || IpmError::InvalidArgument(format!("curves.csv line {}: malformed row", i + 1));
        if cols.len() != 5 {
            return Err(bad());
        }
        let t: f64 = cols[0].parse().map_err(|_| bad())?;
        let c: usize = cols[1].parse().map_err(|_| bad())?;
        let p = (
            cols[3].parse::<f64>().map_err(|_| bad())?,
            cols[4].parse::<f64>().map_err(|_| bad())?,
        );
        if out.last().is_none_or(|(tl, _)| *tl != t) {
            out.push((t, Vec::new()));
        }
        let curves = &mut out.last_mut().expect("pushed").1;
        if curves.len() <= c {
            curves.resize(c + 1, Vec::new());
        }
        curves[c].push(p);
    }
    out.into_iter()
        .map(|(t, cs)| {
            let curves = cs
                .into_iter()
                .enumerate()
                .map(|(k, pts)| {
                    let tpl = template.get(k).ok_or_else(|| {
                        IpmError::InvalidArgument(format!("curves.csv has an unexpected curve {k}"))
                    })?;
                    MarkerCurve::new(*tpl.domain(), pts, tpl.level())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((t, curves))
        })
        .collect()
}

/// Run the `checks` suite over snapshots. A single directory argument is read
/// as a run directory (its `run.cfg`, snapshots and `curves.csv`); otherwise
/// every path is a snapshot and the default configuration applies.
pub fn certify(paths: &[PathBuf], checks: &[String], requested_s: Option<&[f64]>) -> Result<CertifyOutcome> {
    let mut warnings = Vec::new();
    if checks.is_empty() {
        warnings.push("nothing to do".to_string());
        return Ok(CertifyOutcome {
            reports: Vec::new(),
            warnings,
        });
    }
    let (cfg, snapshots, curves_path) = match paths {
        [dir] if dir.is_dir() => {
            let cfg_path = dir.join(CONFIG_FILE);
            let cfg = if cfg_path.exists() {
                RunConfig::load(&cfg_path)?
            } else {
                warnings.push(format!("{} has no {CONFIG_FILE}; using defaults", dir.display()));
                RunConfig::default()
            };
            let curves = dir.join(CURVES_FILE);
            (cfg, run_snapshots(dir)?, curves.exists().then_some(curves))
        }
        _ => (RunConfig::default(), paths.to_vec(), None),
    };
    if snapshots.is_empty() {
        return Err(IpmError::Snapshot("no snapshots found".into()));
    }
    let s: Vec<f64> = requested_s.map(<[f64]>::to_vec).unwrap_or_else(|| cfg.requested_s.clone());
    let fields = snapshots
        .iter()
        .map(io::read_snapshot)
        .collect::<Result<Vec<(ScalarField, f64)>>>()?;
    let domain = *fields[0].0.domain();
    // rebuild the scenario only when it matches the snapshot grid
    let state: Option<InitialState> = match cfg.domain() {
        Ok(d) if (d.kind(), d.nx(), d.ny()) == (domain.kind(), domain.nx(), domain.ny()) => {
            build(d, &cfg.scenario).ok()
        }
        _ => None,
    };
    let curves = match (&curves_path, &state) {
        (Some(p), Some(st)) if !st.curves.is_empty() => read_curves(p, &st.curves)?,
        _ => Vec::new(),
    };
    let mut suite = Suite::new(checks, &s)?;
    for (field, t) in &fields {
        let rec = record(field, *t, &s)?;
        let cs = curves
            .iter()
            .find(|(tc, _)| tc.to_bits() == t.to_bits())
            .map(|(_, c)| c.clone())
            .unwrap_or_default();
        suite.push(field, &cs, &rec);
    }
    let reports = suite.finish(state.as_ref().and_then(|s| s.stratified.as_ref()), &cfg);
    Ok(CertifyOutcome { reports, warnings })
}
