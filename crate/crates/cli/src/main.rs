//! `spindyn` command-line driver.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical or check failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spindyn::suite::Fault;

use commands::{CmdResult, Failure};
use config::{ConfigError, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "spindyn", version, about = "Spinning-particle numerical laboratory")]
struct Cli {
    /// `key = value` config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for random test points (fallback: SPINDYN_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the main artifact here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Spin precession, optionally with the alignment term; CSV trajectory.
    Precess(PrecessArgs),
    /// Same as `precess` with gamma = 1 by default.
    Align(PrecessArgs),
    /// Bracket table values, or the bracket check report.
    Brackets(BracketArgs),
    /// Longitudinal acceleration sweep and power-law fit.
    Accel(AccelArgs),
    /// Spinning body in Schwarzschild (or flat) spacetime.
    Mptd(MptdArgs),
    /// Quantum identity suite.
    Qmcheck(QmArgs),
    /// Aggregate self-check table.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct PrecessArgs {
    /// Charge.
    #[arg(long = "e", allow_hyphen_values = true)]
    charge: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
    /// Alignment coupling.
    #[arg(long)]
    gamma: Option<f64>,
    /// Magnetic field `x,y,z`.
    #[arg(long = "B", allow_hyphen_values = true)]
    b: Option<String>,
    /// Constant electric field `x,y,z`.
    #[arg(long = "E", allow_hyphen_values = true)]
    e_field: Option<String>,
    /// Initial spin `x,y,z` (excludes --theta0).
    #[arg(long = "S", allow_hyphen_values = true)]
    s: Option<String>,
    /// Initial angle to B.
    #[arg(long)]
    theta0: Option<f64>,
    /// Spin magnitude used with --theta0.
    #[arg(long)]
    smag: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// rk4 or rk45.
    #[arg(long)]
    scheme: Option<String>,
    /// Pole distance counted as aligned.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args, Debug)]
struct BracketArgs {
    /// Emit the check report instead of the table.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "S", allow_hyphen_values = true)]
    s: Option<String>,
}

#[derive(Args, Debug)]
struct AccelArgs {
    /// em or geodesic.
    #[arg(long)]
    scenario: Option<String>,
    /// Fit an exact synthetic power law instead of integrating.
    #[arg(long)]
    self_test: bool,
    #[arg(long)]
    c: Option<f64>,
    /// Comma-separated v/c values.
    #[arg(long)]
    betas: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    e_field: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    q_over_m: Option<f64>,
    #[arg(long)]
    rs: Option<f64>,
    #[arg(long)]
    r_over_rs: Option<f64>,
}

#[derive(Args, Debug)]
struct MptdArgs {
    /// Gravimagnetic moment, 0 or 1.
    #[arg(long)]
    kappa: Option<u8>,
    /// Cartesian Minkowski background.
    #[arg(long)]
    flat: bool,
    /// Also run the other kappa and report the divergence and lambda scaling.
    #[arg(long)]
    compare: bool,
    /// Spin scale lambda; S.S = 8 alpha lambda^2.
    #[arg(long)]
    spin_scale: Option<f64>,
    #[arg(long)]
    rs: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// circular or radial.
    #[arg(long)]
    orbit: Option<String>,
    /// Radial (negative = infall) or flat-space speed.
    #[arg(long, allow_hyphen_values = true)]
    speed: Option<f64>,
    /// Rest-frame spin direction `x,y,z`.
    #[arg(long, allow_hyphen_values = true)]
    spin_dir: Option<String>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long)]
    dtau: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug)]
struct QmArgs {
    #[arg(long)]
    samples: Option<usize>,
    /// Include the wave-packet runs.
    #[arg(long)]
    zitter: bool,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InjectedFault {
    ReversedAlignment,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// JSON lines instead of the text table.
    #[arg(long)]
    json: bool,
    #[arg(long, hide = true)]
    inject_fault: Option<InjectedFault>,
}

fn s<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

fn on(flag: bool) -> Option<String> {
    flag.then(|| "true".to_string())
}

fn run(cli: Cli) -> CmdResult {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(ConfigError(e.to_string())))?;
    }
    let file = cli.config.as_deref();
    let common = vec![("seed", s(&cli.seed)), ("output", cli.output.as_ref().map(|p| p.display().to_string()))];
    let build = |name, keys: &[&str], mut extra: Vec<(&'static str, Option<String>)>| {
        extra.extend(common.clone());
        RunConfig::new(name, keys, file, extra)
    };
    match &cli.command {
        Cmd::Precess(a) | Cmd::Align(a) => {
            let align = matches!(cli.command, Cmd::Align(_));
            let cfg = build(
                if align { "align" } else { "precess" },
                commands::PRECESS_KEYS,
                vec![
                    ("e", s(&a.charge)),
                    ("m", s(&a.m)),
                    ("c", s(&a.c)),
                    ("hbar", s(&a.hbar)),
                    ("gamma", s(&a.gamma)),
                    ("B", a.b.clone()),
                    ("E", a.e_field.clone()),
                    ("S", a.s.clone()),
                    ("theta0", s(&a.theta0)),
                    ("smag", s(&a.smag)),
                    ("dt", s(&a.dt)),
                    ("steps", s(&a.steps)),
                    ("scheme", a.scheme.clone()),
                    ("eps", s(&a.eps)),
                ],
            )?;
            commands::precess(&cfg, if align { 1.0 } else { 0.0 })
        }
        Cmd::Brackets(a) => {
            let cfg = build(
                "brackets",
                commands::BRACKET_KEYS,
                vec![("samples", s(&a.samples)), ("m", s(&a.m)), ("c", s(&a.c)), ("S", a.s.clone())],
            )?;
            commands::brackets(&cfg, a.check)
        }
        Cmd::Accel(a) => {
            let cfg = build(
                "accel",
                commands::ACCEL_KEYS,
                vec![
                    ("scenario", a.scenario.clone()),
                    ("c", s(&a.c)),
                    ("betas", a.betas.clone()),
                    ("e_field", s(&a.e_field)),
                    ("q_over_m", s(&a.q_over_m)),
                    ("rs", s(&a.rs)),
                    ("r_over_rs", s(&a.r_over_rs)),
                ],
            )?;
            commands::accel(&cfg, a.self_test)
        }
        Cmd::Mptd(a) => {
            let cfg = build(
                "mptd",
                commands::MPTD_KEYS,
                vec![
                    ("kappa", s(&a.kappa)),
                    ("flat", on(a.flat)),
                    ("compare", on(a.compare)),
                    ("spin_scale", s(&a.spin_scale)),
                    ("rs", s(&a.rs)),
                    ("r", s(&a.r)),
                    ("orbit", a.orbit.clone()),
                    ("speed", s(&a.speed)),
                    ("spin_dir", a.spin_dir.clone()),
                    ("m", s(&a.m)),
                    ("c", s(&a.c)),
                    ("hbar", s(&a.hbar)),
                    ("dtau", s(&a.dtau)),
                    ("steps", s(&a.steps)),
                ],
            )?;
            commands::mptd(&cfg)
        }
        Cmd::Qmcheck(a) => {
            let cfg = build(
                "qmcheck",
                commands::QM_KEYS,
                vec![
                    ("samples", s(&a.samples)),
                    ("zitter", on(a.zitter)),
                    ("m", s(&a.m)),
                    ("c", s(&a.c)),
                    ("hbar", s(&a.hbar)),
                ],
            )?;
            commands::qmcheck(&cfg)
        }
        Cmd::Report(a) => {
            let cfg = build("report", commands::REPORT_KEYS, vec![("json", on(a.json))])?;
            let fault = match a.inject_fault {
                Some(InjectedFault::ReversedAlignment) => Fault::ReversedAlignment,
                None => Fault::None,
            };
            commands::report(&cfg, fault)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("spindyn: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
