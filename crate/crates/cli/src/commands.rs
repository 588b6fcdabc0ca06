use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use serde_json::json;
use spindyn::accel::{self, fit_exponent, Scenario, SweepConfig, DEFAULT_BETAS};
use spindyn::brackets::{standard_spin_table, Coord, PhasePoint};
use spindyn::curved::{
    circular_body, integrate_body, lambda_scaling, max_separation, spin_from_vector, spin_half_alpha, BodyParams,
    BodyState, BodyTrajectory, Kappa,
};
use spindyn::fit::linear_fit;
use spindyn::qm::QmParams;
use spindyn::spacetime::{Minkowski, Schwarzschild};
use spindyn::spin::{
    alignment_time, angle_to, integrate_spin, FieldConfig, ParticleParams, Scheme, SpinModel, SpinState,
};
use spindyn::suite::{bracket_check, qm_check, run_report, Fault, ReportOptions};
use spindyn::{Error, Vec3};

use crate::config::{ConfigError, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Run(Error),
    Check(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Io(_) | Failure::Run(Error::Validation(_)) => 1,
            Failure::Run(_) | Failure::Check(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "{e}"),
            Failure::Run(e) => write!(f, "{e}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
            Failure::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

pub type CmdResult = Result<(), Failure>;

/// Main artifact goes to `output` when set, else stdout. Summaries go to
/// stdout when the artifact is in a file, else stderr.
struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    fn new(cfg: &RunConfig) -> Self {
        Self { path: cfg.output() }
    }

    fn artifact(&self, text: &str) -> CmdResult {
        match &self.path {
            Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
            None => write_out(text),
        }
    }

    fn summary(&self, value: &serde_json::Value) -> CmdResult {
        let line = format!("{value}\n");
        match self.path {
            Some(_) => write_out(&line),
            None => {
                eprint!("{line}");
                Ok(())
            }
        }
    }
}

fn write_out(text: &str) -> CmdResult {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Io(e.to_string()))
}

fn elapsed(start: Instant) {
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
}

pub const PRECESS_KEYS: &[&str] = &["e", "m", "c", "hbar", "gamma", "B", "E", "S", "theta0", "smag", "dt", "steps", "scheme", "eps"];

fn scheme(cfg: &RunConfig) -> Result<Scheme, Failure> {
    match cfg.parse::<String>("scheme", "rk4".into())?.as_str() {
        "rk4" => Ok(Scheme::Rk4),
        "rk45" => Ok(Scheme::Rk45),
        other => Err(ConfigError(format!("unknown scheme '{other}' (expected rk4 or rk45)")).into()),
    }
}

/// `precess`, and `align` with `gamma` defaulting to 1.
pub fn precess(cfg: &RunConfig, default_gamma: f64) -> CmdResult {
    let params = ParticleParams::new(
        cfg.finite("e", -1.0)?,
        cfg.positive("m", 1.0)?,
        cfg.positive("c", 1.0)?,
        cfg.positive("hbar", 1.0)?,
        cfg.finite("gamma", default_gamma)?,
    )?;
    let b = cfg.vec3("B", Vec3::z())?;
    let fields = FieldConfig::uniform(cfg.vec3("E", Vec3::zeros())?, b);
    let smag = cfg.positive("smag", params.spin_half_magnitude())?;
    let state = match (cfg.optional::<String>("S")?, cfg.optional::<f64>("theta0")?) {
        (Some(_), Some(_)) => return Err(ConfigError("set either S or theta0, not both".into()).into()),
        (Some(_), None) => SpinState::new(cfg.vec3("S", Vec3::zeros())?),
        (None, theta0) => {
            let theta0 = theta0.unwrap_or(FRAC_PI_4);
            if !(0.0..=PI).contains(&theta0) {
                return Err(ConfigError(format!("theta0 must lie in [0, pi], got {theta0}")).into());
            }
            SpinState::at_angle(&b, theta0, smag)
        }
    };
    if state.s.norm() == 0.0 {
        return Err(ConfigError("spin must be nonzero".into()).into());
    }
    let dt = cfg.positive("dt", 0.01)?;
    let steps = cfg.count("steps", 1000)?;
    let scheme = scheme(cfg)?;
    let eps = cfg.positive("eps", 1e-3)?;
    let sink = Sink::new(cfg);

    let model = SpinModel::new(fields, params);
    let traj = integrate_spin(&state, &model, dt, steps, scheme)?;
    sink.artifact(&traj.to_csv())?;

    let theta0 = angle_to(&state.s, &b);
    let pole_distance = |th: f64| th.min(PI - th);
    let decaying: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .map(|s| (s.t, pole_distance(s.theta)))
        .filter(|&(_, d)| d > 1e-6 && d < FRAC_PI_2)
        .map(|(t, d)| (t, d.tan().ln()))
        .collect();
    let decay_rate = if params.gamma_align > 0.0 && decaying.len() >= 5 {
        let (t, y): (Vec<f64>, Vec<f64>) = decaying.into_iter().unzip();
        linear_fit(&t, &y).ok().map(|f| -f.slope)
    } else {
        None
    };
    let reached = traj.samples.iter().find(|s| pole_distance(s.theta) < eps).map(|s| s.t);
    let analytic = if params.gamma_align > 0.0 && b.norm() > 0.0 {
        alignment_time(theta0, eps, b.norm(), &params).ok()
    } else {
        None
    };
    let last = traj.last().expect("at least one step");
    sink.summary(&json!({
        "final_theta": last.theta,
        "smag_drift": traj.max_relative_norm_drift(),
        "decay_rate": decay_rate,
        "expected_decay_rate": params.beta_align() * b.norm(),
        "alignment_time": reached,
        "analytic_alignment_time": analytic,
    }))
}

pub const BRACKET_KEYS: &[&str] = &["samples", "m", "c", "S"];

pub fn brackets(cfg: &RunConfig, check: bool) -> CmdResult {
    let samples = cfg.count("samples", 100)?;
    let seed = cfg.seed()?;
    let params = ParticleParams { m: cfg.positive("m", 1.0)?, c: cfg.positive("c", 1.0)?, ..ParticleParams::electron() };
    let s = cfg.vec3("S", Vec3::new(0.0, 0.0, params.spin_half_magnitude()))?;
    let sink = Sink::new(cfg);
    if check {
        let c = bracket_check(samples, seed)?;
        let mut text = c.report.to_json_lines();
        text.push_str(&json!({"name": "truncated_jacobi_x1_x2_S1", "measured": c.truncated_jacobi, "asserted": false}).to_string());
        text.push('\n');
        sink.artifact(&text)?;
        if !c.report.all_pass() {
            let names: Vec<&str> = c.report.failures().map(|e| e.name.as_str()).collect();
            return Err(Failure::Check(names.join(", ")));
        }
        return Ok(());
    }
    let table = standard_spin_table(&params);
    let z = PhasePoint { x: Vec3::zeros(), p: Vec3::zeros(), s };
    let mut text = String::from("a,b,value\n");
    let coords: Vec<Coord> = Coord::all().collect();
    for (i, a) in coords.iter().enumerate() {
        for b in &coords[i + 1..] {
            let v = table.bracket(*a, *b, &z);
            if v != 0.0 {
                text.push_str(&format!("{a},{b},{v:?}\n"));
            }
        }
    }
    sink.artifact(&text)
}

pub const ACCEL_KEYS: &[&str] = &["scenario", "c", "betas", "e_field", "q_over_m", "rs", "r_over_rs"];

pub fn accel(cfg: &RunConfig, self_test: bool) -> CmdResult {
    let scenario: Scenario = cfg.parse("scenario", Scenario::Em)?;
    let mut sc = SweepConfig::new(scenario);
    sc.c = cfg.positive("c", sc.c)?;
    sc.betas = cfg.list("betas", &DEFAULT_BETAS)?;
    if sc.betas.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
        return Err(ConfigError("betas must lie in (0, 1)".into()).into());
    }
    sc.e_field = cfg.finite("e_field", sc.e_field)?;
    sc.q_over_m = cfg.finite("q_over_m", sc.q_over_m)?;
    sc.rs = cfg.positive("rs", sc.rs)?;
    sc.r_over_rs = cfg.positive("r_over_rs", sc.r_over_rs)?;
    if sc.r_over_rs <= 1.0 {
        return Err(ConfigError("r_over_rs must exceed 1".into()).into());
    }
    let sink = Sink::new(cfg);

    if self_test {
        // exact power law a = 0.7 (c^2 - v^2)^1.25
        let k = 1.25;
        let samples: Vec<(f64, f64)> = sc
            .betas
            .iter()
            .map(|b| {
                let v = b * sc.c;
                (v, 0.7 * (sc.c * sc.c - v * v).powf(k))
            })
            .collect();
        let fit = fit_exponent(&samples, sc.c)?;
        let error = (fit.exponent - k).abs();
        write_out(&format!("{}\n", json!({"self_test": true, "exponent": fit.exponent, "expected": k, "error": error})))?;
        return if error <= 1e-12 { Ok(()) } else { Err(Failure::Check(format!("self-test exponent off by {error:e}"))) };
    }

    let samples = accel::sweep(&sc)?;
    sink.artifact(&accel::sweep_csv(&samples))?;
    let fit = accel::sweep_fit(&sc, &samples)?;
    let worst_norm = samples.iter().map(|s| s.norm_residual).fold(0.0, f64::max);
    sink.summary(&json!({
        "scenario": scenario,
        "exponent": fit.exponent,
        "amplitude": fit.amplitude,
        "residual": fit.residual,
        "max_norm_residual": worst_norm,
    }))
}

pub const MPTD_KEYS: &[&str] = &[
    "kappa", "flat", "compare", "rs", "r", "orbit", "speed", "spin_scale", "spin_dir", "m", "c", "hbar", "dtau", "steps",
];

struct MptdSetup {
    params: BodyParams,
    alpha: f64,
    r: f64,
    speed: f64,
    dir: Vec3,
    radial: bool,
}

impl MptdSetup {
    /// Initial state in Schwarzschild, circular or radial.
    fn body(&self, st: &Schwarzschild, lambda: f64, kappa: Kappa) -> spindyn::Result<BodyState> {
        if !self.radial {
            return circular_body(st, self.r, &self.params, &self.dir, self.alpha, lambda, kappa);
        }
        let (x, v) = accel::radial_state(st, self.r, self.speed, self.params.c)?;
        let p = v.map(|c| c * self.params.m);
        let s = spin_from_vector(st, &x, &p, &self.dir, 8.0 * self.alpha * lambda * lambda)?;
        Ok(BodyState { x, p, s, tau: 0.0, kappa })
    }

    /// Body moving along y through `(r, 0, 0)` in Cartesian Minkowski.
    fn flat_body(&self, lambda: f64, kappa: Kappa) -> spindyn::Result<BodyState> {
        let x = [0.0, self.r, 0.0, 0.0];
        let v = accel::em_state(self.speed.abs(), Vec3::y(), self.params.c)?;
        let p = v.map(|c| c * self.params.m);
        let s = spin_from_vector(&Minkowski, &x, &p, &self.dir, 8.0 * self.alpha * lambda * lambda)?;
        Ok(BodyState { x, p, s, tau: 0.0, kappa })
    }
}

fn body_summary(tr: &BodyTrajectory, kappa: Kappa) -> serde_json::Value {
    let s0 = tr.samples[0].s.components();
    let spin_change = tr
        .samples
        .iter()
        .flat_map(|s| s.s.components().into_iter().zip(s0).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let (rmin, rmax) = tr.samples.iter().fold((f64::MAX, f64::MIN), |(lo, hi), s| (lo.min(s.r), hi.max(s.r)));
    json!({
        "kappa": kappa.index(),
        "samples": tr.samples.len(),
        "horizon_stop": tr.horizon_stop,
        "ss_drift": tr.ss_drift(),
        "max_sp": tr.max_ssc(),
        "max_mass_shell": tr.max_mass_shell(),
        "r_min": rmin,
        "r_max": rmax,
        "spin_change": spin_change,
    })
}

pub fn mptd(cfg: &RunConfig) -> CmdResult {
    let start = Instant::now();
    let kappa = Kappa::from_index(cfg.parse("kappa", 0u8)?).map_err(|e| ConfigError(e.to_string()))?;
    let flat = cfg.flag("flat")?;
    let compare = cfg.flag("compare")?;
    let rs = cfg.positive("rs", 1.0)?;
    let r = cfg.positive("r", 10.0)?;
    let radial = match cfg.parse::<String>("orbit", "circular".into())?.as_str() {
        "circular" => false,
        "radial" => true,
        other => return Err(ConfigError(format!("unknown orbit '{other}' (expected circular or radial)")).into()),
    };
    let params = BodyParams { m: cfg.positive("m", 1.0)?, c: cfg.positive("c", 1.0)? };
    let setup = MptdSetup {
        params,
        alpha: spin_half_alpha(cfg.positive("hbar", 1.0)?),
        r,
        speed: cfg.finite("speed", 0.0)?,
        dir: cfg.vec3("spin_dir", Vec3::new(0.6, 0.0, 0.8))?,
        radial,
    };
    if setup.speed.abs() >= params.c {
        return Err(ConfigError("speed must be below c".into()).into());
    }
    let lambda = cfg.finite("spin_scale", 1.0)?;
    if lambda < 0.0 {
        return Err(ConfigError("spin_scale must be non-negative".into()).into());
    }
    let dtau = cfg.positive("dtau", 0.1)?;
    let steps = cfg.count("steps", 1000)?;
    if !flat && r <= rs * (if radial { 1.0 } else { 1.5 }) {
        return Err(ConfigError(format!("r = {r} is too close to r_s = {rs}")).into());
    }
    let sink = Sink::new(cfg);

    if flat {
        let body = setup.flat_body(lambda, kappa).map_err(|e| ConfigError(e.to_string()))?;
        let tr = integrate_body(&body, &Minkowski, &params, dtau, steps)?;
        sink.artifact(&tr.to_csv(params.c))?;
        let v = body.p.map(|c| c / params.m);
        let line = tr
            .samples
            .iter()
            .map(|s| (1..4).map(|i| (s.x[i] - body.x[i] - v[i] * s.tau).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let mut summary = body_summary(&tr, kappa);
        summary["line_deviation"] = json!(line);
        sink.summary(&summary)?;
        elapsed(start);
        return Ok(());
    }

    let st = Schwarzschild::new(rs);
    let body = setup.body(&st, lambda, kappa).map_err(|e| ConfigError(e.to_string()))?;
    let other = if compare { Some(setup.body(&st, lambda, other_kappa(kappa))?) } else { None };
    let (tr, tr_other) = rayon::join(
        || integrate_body(&body, &st, &params, dtau, steps),
        || other.map(|b| integrate_body(&b, &st, &params, dtau, steps)).transpose(),
    );
    let (tr, tr_other) = (tr?, tr_other?);
    sink.artifact(&tr.to_csv(params.c))?;
    let mut summary = body_summary(&tr, kappa);
    if let Some(o) = &tr_other {
        let scaling = lambda_scaling(|l, k| setup.body(&st, l, k), &st, &params, dtau, steps, lambda)?;
        summary["separation"] = json!(max_separation(&tr, o));
        summary["lambda_scaling"] = json!(scaling);
    }
    sink.summary(&summary)?;
    elapsed(start);
    match tr.horizon_stop.or(tr_other.and_then(|o| o.horizon_stop)) {
        Some(step) => Err(Failure::Run(Error::Numerical {
            step,
            reason: format!("stopped near the horizon (r < {} r_s)", spindyn::curved::HORIZON_MARGIN),
        })),
        None => Ok(()),
    }
}

fn other_kappa(k: Kappa) -> Kappa {
    match k {
        Kappa::Mptd => Kappa::Gravimagnetic,
        Kappa::Gravimagnetic => Kappa::Mptd,
    }
}

pub const QM_KEYS: &[&str] = &["samples", "zitter", "m", "c", "hbar"];

pub fn qmcheck(cfg: &RunConfig) -> CmdResult {
    let start = Instant::now();
    let samples = cfg.count("samples", 1000)?;
    let seed = cfg.seed()?;
    let zitter = cfg.flag("zitter")?;
    let q = QmParams { hbar: cfg.positive("hbar", 1.0)?, m: cfg.positive("m", 1.0)?, c: cfg.positive("c", 1.0)? };
    let sink = Sink::new(cfg);
    let result = qm_check(samples, seed, &q, zitter)?;
    sink.artifact(&result.to_json_lines())?;
    elapsed(start);
    if result.pass {
        return Ok(());
    }
    let names: Vec<&str> =
        result.reports.iter().flat_map(|(_, r)| r.failures().map(|e| e.name.as_str())).collect();
    Err(Failure::Check(names.join(", ")))
}

pub const REPORT_KEYS: &[&str] = &["json"];

pub fn report(cfg: &RunConfig, fault: Fault) -> CmdResult {
    let json = cfg.flag("json")?;
    let opts = ReportOptions { seed: cfg.seed()?, fault };
    let sink = Sink::new(cfg);
    let rep = run_report(&opts);
    sink.artifact(&if json { rep.to_json_lines() } else { rep.to_table() })?;
    eprintln!("elapsed: {:.3} s", rep.duration.as_secs_f64());
    if rep.pass() {
        return Ok(());
    }
    let failed: Vec<String> = rep.rows.iter().filter(|r| !r.pass).map(|r| format!("{}: {}", r.criterion, r.claim)).collect();
    Err(Failure::Check(failed.join("; ")))
}
