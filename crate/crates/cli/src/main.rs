use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ipm_core::config::{parse_check_list, parse_list, RunConfig};
use ipm_core::diagnostics::record;
use ipm_core::initial_data::stratified_rearrangement;
use ipm_core::io;
use ipm_core::run::{certify, run};

#[derive(Parser)]
#[command(name = "ipm", about = "IPM simulator and certificate engine", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Certificate checks, comma separated.
    #[arg(long)]
    checks: Option<String>,
    /// Sobolev exponents, comma separated.
    #[arg(long)]
    s: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a configured scenario and write its outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a certificate suite over a run directory or snapshot files.
    Certify {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the diagnostics of a snapshot.
    Norms {
        snapshot: PathBuf,
        #[arg(long)]
        s: Option<String>,
    },
    /// Write the stratified rearrangement of a torus snapshot.
    Rearrange {
        snapshot: PathBuf,
        /// Snapshot to write (profile rows go to stdout either way).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn s_list(s: &Option<String>) -> Result<Option<Vec<f64>>> {
    s.as_deref()
        .map(|v| parse_list(v).with_context(|| format!("cannot parse --s '{v}'")))
        .transpose()
}

fn cmd_run(config: PathBuf, out: Option<PathBuf>, common: Common) -> Result<i32> {
    let mut cfg = RunConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
    if let Some(c) = &common.checks {
        cfg.checks = Some(parse_check_list(c)?);
    }
    if let Some(s) = s_list(&common.s)? {
        cfg.requested_s = s;
    }
    let out = match out.or_else(|| cfg.out_dir.clone()) {
        Some(o) => o,
        None => bail!("no output directory: pass --out or set output.dir"),
    };
    let o = run(&cfg, &out)?;
    print!("{}", ipm_core::run::summary_text(&cfg, &o));
    if o.exit_code() == 2 {
        eprintln!("stopped at the resolution limit, t = {}", o.horizon);
    }
    Ok(o.exit_code())
}

fn cmd_certify(paths: Vec<PathBuf>, common: Common) -> Result<i32> {
    let checks = match &common.checks {
        Some(c) => parse_check_list(c)?,
        None => vec!["energy".into(), "symmetry".into(), "thm2".into()],
    };
    let s = s_list(&common.s)?;
    let o = certify(&paths, &checks, s.as_deref())?;
    for w in &o.warnings {
        eprintln!("warning: {w}");
    }
    for r in &o.reports {
        println!("{}", r.to_line());
    }
    Ok(o.exit_code())
}

fn cmd_norms(snapshot: PathBuf, s: Option<String>) -> Result<i32> {
    let (f, t) = io::read_snapshot(&snapshot)?;
    let s = s_list(&s)?.unwrap_or_else(|| vec![1.0]);
    let r = record(&f, t, &s)?;
    let d = f.domain();
    println!("domain         {} {}x{}", d.kind().name(), d.nx(), d.ny());
    println!("t              {}", io::num(r.t));
    println!("E              {}", io::num(r.energy));
    println!("delta          {}", io::num(r.delta));
    println!("l2             {}", io::num(r.l2));
    for e in &r.hs {
        println!("hs_rho_{:<8} {}", e.s, io::num(e.rho));
        println!("hs_drho_{:<7} {}", e.s, io::num(e.drho));
    }
    println!("grad_sup_rho   {}", io::num(r.grad_sup_rho));
    println!("grad_sup_u     {}", io::num(r.grad_sup_u));
    println!("tail_fraction  {}", io::num(r.tail_fraction));
    if let Some(c) = r.cube_root_mass {
        println!("cube_root_mass {}", io::num(c));
    }
    Ok(0)
}

fn cmd_rearrange(snapshot: PathBuf, out: Option<PathBuf>) -> Result<i32> {
    let (f, t) = io::read_snapshot(&snapshot)?;
    let p = stratified_rearrangement(&f)?;
    println!("x2,rho_s");
    for (y, v) in f.domain().x2_grid().iter().zip(p.samples()) {
        println!("{},{}", io::num(*y), io::num(*v));
    }
    if let Some(o) = out {
        io::write_snapshot(&o, &p.field(), t)?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run { config, out, common } => cmd_run(config, out, common),
        Cmd::Certify { paths, common } => cmd_certify(paths, common),
        Cmd::Norms { snapshot, s } => cmd_norms(snapshot, s),
        Cmd::Rearrange { snapshot, out } => cmd_rearrange(snapshot, out),
    };
    match res {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
