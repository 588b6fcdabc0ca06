//! Aggregate self-check. Every row pins one measured claim against its tolerance.

use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::accel::{self, Scenario, SweepConfig};
use crate::brackets::{
    casimir_residual, casimir_residual_fd, hamiltonian_flow, jacobi_residual, jacobi_residual_coords,
    standard_spin_table, Coord, NumericCoord, PauliHamiltonian, PhasePoint,
};
use crate::check::CheckReport;
use crate::curved::{circular_body, integrate_body, lambda_scaling, spin_half_alpha, BodyParams, Kappa};
use crate::error::Result;
use crate::fit::loglog_slope;
use crate::qm::current::standard_current_check;
use crate::qm::identities::{identity_report, leading_order, IDENTITY_TOL};
use crate::qm::packets::{positive_run, zitterbewegung_run};
use crate::qm::QmParams;
use crate::rng::seeded;
use crate::spacetime::{kretschmann, schwarzschild_kretschmann, Schwarzschild, Spacetime};
use crate::spin::{
    analytic_theta, integrate_spin, precession_rhs, precession_vector, rotate_rodrigues, spin_orbit_ratio,
    ElectricField, FieldConfig, ParticleParams, Scheme, SpinModel, SpinState,
};
use crate::Vec3;

/// How a row's measured value is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// `|measured - expected| <= tol`.
    Near,
    /// `measured <= tol`.
    Below,
    /// `measured > expected`.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub criterion: u8,
    pub claim: &'static str,
    /// Where the expected value comes from.
    pub source: &'static str,
    pub measured: f64,
    pub expected: f64,
    pub tol: f64,
    pub rule: Rule,
    pub pass: bool,
}

impl ReportRow {
    fn judge(criterion: u8, claim: &'static str, source: &'static str, measured: f64, expected: f64, tol: f64, rule: Rule) -> Self {
        let pass = measured.is_finite()
            && match rule {
                Rule::Near => (measured - expected).abs() <= tol,
                Rule::Below => measured <= tol,
                Rule::Above => measured > expected,
            };
        Self { criterion, claim, source, measured, expected, tol, rule, pass }
    }

    fn near(c: u8, claim: &'static str, source: &'static str, measured: f64, expected: f64, tol: f64) -> Self {
        Self::judge(c, claim, source, measured, expected, tol, Rule::Near)
    }

    fn below(c: u8, claim: &'static str, source: &'static str, measured: f64, tol: f64) -> Self {
        Self::judge(c, claim, source, measured, 0.0, tol, Rule::Below)
    }

    fn above(c: u8, claim: &'static str, source: &'static str, measured: f64, expected: f64) -> Self {
        Self::judge(c, claim, source, measured, expected, 0.0, Rule::Above)
    }

    fn failed(c: u8, claim: &'static str, source: &'static str) -> Self {
        Self::judge(c, claim, source, f64::NAN, 0.0, 0.0, Rule::Near)
    }
}

/// Deliberate faults for harness self-tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Flip the sign of the alignment term.
    ReversedAlignment,
}

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub seed: u64,
    pub fault: Fault,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub duration: Duration,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_json_lines(&self) -> String {
        self.rows.iter().map(|r| serde_json::to_string(r).expect("rows serialize") + "\n").collect()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("id\tpass\tclaim\tsource\tmeasured\texpected\ttol\trule\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:?}\t{:?}\t{:?}\t{:?}\n",
                r.criterion,
                if r.pass { "PASS" } else { "FAIL" },
                r.claim,
                r.source,
                r.measured,
                r.expected,
                r.tol,
                r.rule
            ));
        }
        out
    }
}

/// Per-module check reports.
#[derive(Debug, Clone)]
pub struct CheckSuiteResult {
    pub reports: Vec<(String, CheckReport)>,
    pub pass: bool,
    pub duration: Duration,
}

impl CheckSuiteResult {
    pub fn new(reports: Vec<(String, CheckReport)>, duration: Duration) -> Self {
        let pass = reports.iter().all(|(_, r)| r.all_pass());
        Self { reports, pass, duration }
    }

    pub fn to_json_lines(&self) -> String {
        self.reports.iter().map(|(_, r)| r.to_json_lines()).collect()
    }
}

fn random_point(rng: &mut impl Rng) -> PhasePoint {
    let mut v = || Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    PhasePoint { x: v(), p: v(), s: v() }
}

/// Bracket-engine residuals plus the measured, unasserted Jacobi defect of the truncated table.
#[derive(Debug, Clone)]
pub struct BracketCheck {
    pub report: CheckReport,
    /// `(x^1, x^2, S^1)` Jacobi residual; the table sets `{x,S} = 0`.
    pub truncated_jacobi: f64,
}

pub fn bracket_check(samples: usize, seed: u64) -> Result<BracketCheck> {
    let params = ParticleParams::electron();
    let table = standard_spin_table(&params);
    let mut rng = seeded(seed);
    let (mut anti, mut so3, mut so3_fd, mut flow, mut cas, mut cas_fd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let mut z = random_point(&mut rng);
        for a in Coord::all() {
            for b in Coord::all() {
                anti = anti.max((table.bracket(a, b, &z) + table.bracket(b, a, &z)).abs());
            }
        }
        so3 = so3.max(jacobi_residual_coords(&table, &z, Coord::S(0), Coord::S(1), Coord::S(2)));
        so3_fd = so3_fd.max(jacobi_residual(
            &table,
            &z,
            &NumericCoord(Coord::S(0)),
            &NumericCoord(Coord::S(1)),
            &NumericCoord(Coord::S(2)),
        ));
        let e = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let b = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        for fields in [FieldConfig::uniform(e, b), FieldConfig { electric: ElectricField::Coulomb { charge: 0.8 }, magnetic: b }] {
            let f = hamiltonian_flow(&table, &PauliHamiltonian { fields, params }, &z);
            let r = precession_vector(&fields, &z.x, &z.p, &params)?;
            flow = flow.max((f.s - precession_rhs(&z.s, &r)).norm());
        }
        cas = cas.max(casimir_residual(&table, &z));
        z.s = z.s.normalize() * params.spin_half_magnitude();
        cas_fd = cas_fd.max(casimir_residual_fd(&table, &z));
    }
    let mut report = CheckReport::new();
    report.record("bracket_antisymmetry", anti, 0.0)?;
    report.record("so3_jacobi", so3, 0.0)?;
    report.record("so3_jacobi_fd", so3_fd, 1e-10)?;
    report.record("pauli_flow_precession", flow, 1e-12)?;
    report.record("casimir", cas, 1e-15)?;
    report.record("casimir_fd", cas_fd, 1e-10)?;
    report.record("xx_inverse_c2_slope", xx_slope() + 2.0, 0.01)?;
    let z = PhasePoint { x: Vec3::new(0.1, 0.2, 0.3), p: Vec3::x(), s: Vec3::new(0.4, -0.5, 0.6) };
    let truncated_jacobi = jacobi_residual_coords(&table, &z, Coord::X(0), Coord::X(1), Coord::S(0));
    Ok(BracketCheck { report, truncated_jacobi })
}

/// Log-log slope of `|{x^1, x^2}|` against `c` over `c = 10, 100, 1000`.
fn xx_slope() -> f64 {
    let z = PhasePoint { x: Vec3::zeros(), p: Vec3::zeros(), s: Vec3::new(0.2, -0.4, 0.75) };
    let cs = [10.0, 100.0, 1000.0];
    let vals: Vec<f64> = cs
        .iter()
        .map(|&c| standard_spin_table(&ParticleParams { c, ..ParticleParams::electron() }).bracket(Coord::X(0), Coord::X(1), &z))
        .collect();
    loglog_slope(&cs, &vals).map_or(f64::NAN, |f| f.slope)
}

/// Identity suite, leading-order position checks and optionally the packet runs.
pub fn qm_check(samples: usize, seed: u64, q: &QmParams, packets: bool) -> Result<CheckSuiteResult> {
    let start = Instant::now();
    q.validate()?;
    let mut reports = vec![("identities".to_string(), identity_report(samples, seed, q)?)];
    let lo = leading_order(q);
    let mut r = CheckReport::new();
    r.record("pryce_coefficient_order", lo.coefficient_order - 2.0, 0.05)?;
    r.record("pryce_commutator_leading", lo.commutator_deviation[1], 1e-5)?;
    r.record("pryce_commutator_order", lo.commutator_order - 2.0, 0.1)?;
    reports.push(("leading_order".to_string(), r));
    if packets {
        let (zitter, positive) = rayon::join(|| zitterbewegung_run(q, 0.5), || positive_run(q));
        let (dirac, osc) = zitter?;
        let (_, summary) = positive?;
        let omega0 = 2.0 * q.m * q.c * q.c / q.hbar;
        let n0 = dirac.norm[0];
        let mut r = CheckReport::new();
        r.record("zitter_frequency", osc.omega / omega0 - 1.0, 0.01)?;
        r.record("zitter_norm_drift", dirac.norm.iter().map(|n| (n - n0).abs() / n0).fold(0.0, f64::max), 1e-12)?;
        r.record("positive_x_linear", summary.x_linear_residual, 1e-6)?;
        r.record("positive_norm_drift", summary.norm_drift, 1e-12)?;
        reports.push(("packets".to_string(), r));
    }
    Ok(CheckSuiteResult::new(reports, start.elapsed()))
}

type Rows = Vec<ReportRow>;

fn alignment_model(opts: &ReportOptions, b: Vec3, gamma: f64) -> SpinModel {
    let model = SpinModel::new(FieldConfig::magnetic(b), ParticleParams::electron().with_gamma(gamma));
    match opts.fault {
        Fault::ReversedAlignment => model.with_reversed_alignment(),
        Fault::None => model,
    }
}

fn theta_decay(opts: &ReportOptions) -> Result<Rows> {
    let b = Vec3::new(0.0, 0.0, 1.0);
    let model = alignment_model(opts, b, 1.0);
    let p = model.params;
    let theta0 = 1.0;
    let s0 = SpinState::at_angle(&b, theta0, p.spin_half_magnitude());
    let decay = 1.0 / (p.beta_align() * b.norm());
    let dt = 1e-3 * decay;
    let traj = integrate_spin(&s0, &model, dt, 3000, Scheme::Rk4)?;
    let dev = traj
        .samples
        .iter()
        .map(|s| (s.theta - analytic_theta(theta0, b.norm(), &p, s.t)).abs())
        .fold(0.0, f64::max);
    // d(theta)/dt = -(dS . b_hat) / (|S| sin theta), against the stated rate toward the nearer pole
    let mut rate = 0.0f64;
    for smp in traj.samples.iter().step_by(250) {
        let ds = model.rhs(&smp.s)?;
        let measured = -ds.dot(&b.normalize()) / (smp.smag * smp.theta.sin());
        let mag = p.gamma_align * p.e.abs() * b.norm() / (2.0 * p.m * p.c) * (2.0 * smp.theta).sin().abs();
        let expected = if smp.theta < FRAC_PI_2 { -mag } else { mag };
        rate = rate.max((measured - expected).abs() / mag);
    }
    Ok(vec![
        ReportRow::below(1, "theta(t) follows tan(theta0) exp(-beta |B| t)", "separable ODE solution", dev, 1e-6),
        ReportRow::below(1, "d(theta)/dt equals gamma|e||B| |sin 2theta| / 2mc toward the pole", "alignment rate", rate, 1e-8),
    ])
}

fn spin_norm(opts: &ReportOptions) -> Result<Rows> {
    let b = Vec3::new(0.3, -0.2, 1.0);
    let model = alignment_model(opts, b, 1.0);
    let r = precession_vector(&model.fields, &model.x, &model.p, &model.params)?.norm();
    let s0 = SpinState::at_angle(&b, 1.2, model.params.spin_half_magnitude());
    let traj = integrate_spin(&s0, &model, 1e-2 / r, 100_000, Scheme::Rk4)?;
    Ok(vec![ReportRow::below(
        2,
        "|S| conserved by precession plus alignment, 1e5 rk4 steps",
        "right-hand side orthogonal to S",
        traj.max_relative_norm_drift(),
        1e-9,
    )])
}

fn stability(opts: &ReportOptions) -> Result<Rows> {
    let b = Vec3::new(0.0, 0.0, 1.0);
    let model = alignment_model(opts, b, 1.0);
    let smag = model.params.spin_half_magnitude();
    let run = |theta0: f64, steps: usize| integrate_spin(&SpinState::at_angle(&b, theta0, smag), &model, 1e-2, steps, Scheme::Rk4);
    // largest step-to-step increase of the distance to each pole
    let mut pole_growth = f64::MIN;
    for (theta0, pole) in [(1e-3, 0.0), (std::f64::consts::PI - 1e-3, std::f64::consts::PI)] {
        let traj = run(theta0, 1000)?;
        for w in traj.samples.windows(2) {
            pole_growth = pole_growth.max((w[1].theta - pole).abs() - (w[0].theta - pole).abs());
        }
    }
    let eq = run(FRAC_PI_2, 1000)?;
    let eq_dev = eq.samples.iter().map(|s| (s.theta - FRAC_PI_2).abs()).fold(0.0, f64::max);
    let near = run(FRAC_PI_2 - 1e-3, 100)?;
    let growth = (near.last().map_or(f64::NAN, |s| s.theta) - FRAC_PI_2).abs() / 1e-3;
    Ok(vec![
        ReportRow::below(3, "perturbations at the poles decay monotonically", "stable fixed points", pole_growth, 0.0),
        ReportRow::below(3, "equator is invariant", "alignment term vanishes at (B,S)=0", eq_dev, 1e-12),
        ReportRow::above(3, "equator repels: offset growth factor over t=1", "unstable invariant set", growth, 1.0),
    ])
}

fn precession_oracle() -> Result<Rows> {
    let b = Vec3::new(0.3, -0.2, 1.0);
    let model = SpinModel::new(FieldConfig::magnetic(b), ParticleParams::electron());
    let r = precession_vector(&model.fields, &model.x, &model.p, &model.params)?;
    let s0 = Vec3::new(0.5, 0.5, 0.1);
    let traj = integrate_spin(&SpinState::new(s0), &model, 1e-3, 5000, Scheme::Rk4)?;
    let err = traj.samples.iter().map(|s| (s.s - rotate_rodrigues(&s0, &r, s.t)).norm()).fold(0.0, f64::max);
    Ok(vec![ReportRow::below(4, "constant-R integration matches Rodrigues rotation", "closed-form rotation", err, 1e-8)])
}

fn brackets_rows(seed: u64) -> Result<Rows> {
    let c = bracket_check(100, seed)?;
    let get = |n: &str| c.report.get(n).map_or(f64::NAN, |e| e.residual);
    Ok(vec![
        ReportRow::below(5, "Pauli flow through the bracket table gives the precession equation", "Hamiltonian flow", get("pauli_flow_precession"), 1e-12),
        ReportRow::below(5, "so(3) Jacobi residual by finite differences", "Lie algebra", get("so3_jacobi_fd"), 1e-10),
        ReportRow::near(5, "{x,x} log-log slope in c", "1/(mc)^2 prefactor", xx_slope(), -2.0, 0.01),
    ])
}

fn exponents() -> Result<Rows> {
    let em = SweepConfig::new(Scenario::Em);
    let geo = SweepConfig::new(Scenario::Geodesic);
    let (a, b) = rayon::join(|| accel::sweep(&em), || accel::sweep(&geo));
    let fa = accel::sweep_fit(&em, &a?)?;
    let fb = accel::sweep_fit(&geo, &b?)?;
    Ok(vec![
        ReportRow::near(6, "EM longitudinal acceleration exponent", "(c^2 - v^2)^(3/2) law", fa.exponent, 1.5, 0.01),
        ReportRow::near(6, "geodesic longitudinal acceleration exponent", "(c^2 - v^2) law", fb.exponent, 1.0, 0.02),
    ])
}

fn curvature() -> Result<Rows> {
    let st = Schwarzschild::new(1.0);
    let mut worst = 0.0f64;
    for ratio in [3.0, 10.0, 100.0] {
        let x = [0.0, ratio, 1.1, 0.4];
        let k = kretschmann(&st.riemann(&x)?, &st.inverse_metric(&x)?);
        worst = worst.max((k / schwarzschild_kretschmann(1.0, ratio) - 1.0).abs());
    }
    Ok(vec![ReportRow::below(7, "finite-difference Kretschmann equals 12 r_s^2 / r^6", "Schwarzschild invariant", worst, 1e-6)])
}

fn mptd() -> Result<Rows> {
    let st = Schwarzschild::new(1.0);
    let params = BodyParams::default();
    let alpha = spin_half_alpha(1.0);
    let dir = Vec3::new(0.6, 0.0, 0.8);
    let drift = |kappa| -> Result<f64> {
        let b = circular_body(&st, 10.0, &params, &dir, alpha, 1.0, kappa)?;
        Ok(integrate_body(&b, &st, &params, 0.1, 10_000)?.ss_drift())
    };
    let ((d0, d1), scaling) = rayon::join(
        || rayon::join(|| drift(Kappa::Mptd), || drift(Kappa::Gravimagnetic)),
        || lambda_scaling(|l, k| circular_body(&st, 10.0, &params, &dir, alpha, l, k), &st, &params, 0.1, 1000, 0.05),
    );
    Ok(vec![
        ReportRow::below(8, "S.S drift, kappa = 0, 1e4 steps", "parallel transport of spin", d0?, 1e-8),
        ReportRow::below(8, "S.S drift, kappa = 1, 1e4 steps", "torque orthogonal to S", d1?, 1e-6),
        ReportRow::near(8, "kappa difference ratio under lambda -> lambda/2", "quadratic in spin", scaling?.ratio, 4.0, 0.2),
    ])
}

fn identities(seed: u64) -> Result<Rows> {
    let report = identity_report(1000, seed, &QmParams::default())?;
    let claims: [(&str, &'static str); 11] = [
        ("heisenberg_alpha", "[alpha_i, H] identity"),
        ("heisenberg_beta", "[beta, H] identity"),
        ("kg_factorization", "(sigma p)(sigma-bar p) = p^2"),
        ("v_inverse", "V V^-1 = 1"),
        ("v_scalar_product", "V^dag V = 1 + (sigma-bar p)^dag (sigma-bar p)/(mc)^2"),
        ("pryce_su2", "Pryce spin closes su(2)"),
        ("pryce_casimir", "Pryce spin squared = 3 hbar^2 / 4"),
        ("pryce_boosted_casimir", "S.S - (p x S)^2 / p0^2 = 3 hbar^2 / 4"),
        ("fw_restriction", "U_FW Psi_D[u] = (V u, 0)"),
        ("fw_unitarity", "U_FW unitary"),
        ("dirac_equation", "Psi_D solves the Dirac equation"),
    ];
    Ok(claims
        .iter()
        .map(|(name, claim)| {
            let res = report.get(name).map_or(f64::NAN, |e| e.residual);
            ReportRow::below(9, claim, "operator identity, 1000 seeded momenta", res, IDENTITY_TOL)
        })
        .collect())
}

fn pryce_leading() -> Result<Rows> {
    let lo = leading_order(&QmParams::default());
    Ok(vec![
        ReportRow::near(10, "position coefficient converges to the nonrelativistic one", "quadratic in |p|/mc", lo.coefficient_order, 2.0, 0.05),
        ReportRow::below(10, "position commutator vs (i hbar/(mc)^2) eps S at |p| = 1e-3 mc", "leading order", lo.commutator_deviation[1], 1e-5),
    ])
}

fn packets() -> Result<Rows> {
    let q = QmParams::default();
    let (z, p) = rayon::join(|| zitterbewegung_run(&q, 0.5), || positive_run(&q));
    let (dirac, osc) = z?;
    let (_, s) = p?;
    let n0 = dirac.norm[0];
    let drift = dirac.norm.iter().map(|n| (n - n0).abs() / n0).fold(s.norm_drift, f64::max);
    Ok(vec![
        ReportRow::near(11, "mixed-branch packet oscillates at 2mc^2/hbar", "trembling frequency", osc.omega / (2.0 * q.m * q.c * q.c / q.hbar), 1.0, 0.01),
        ReportRow::below(11, "positive-energy <X> linear, residual / width", "no trembling motion", s.x_linear_residual, 1e-6),
        ReportRow::below(11, "packet norm drift", "unitary evolution", drift, 1e-12),
    ])
}

fn current() -> Result<Rows> {
    let c = standard_current_check(&QmParams::default())?;
    Ok(vec![
        ReportRow::near(12, "divergence residual ratio under grid halving", "second-order differences", c.refinement_ratio, 4.0, 0.2),
        ReportRow::below(12, "charge drift over time", "conserved current", c.fine.charge_drift.max(c.coarse.charge_drift), 1e-8),
        ReportRow::above(12, "minimum density I^0 relative to maximum", "positive density", c.fine.min_density.min(c.coarse.min_density), 0.0),
    ])
}

fn coefficient_ratio(seed: u64) -> Result<Rows> {
    let params = ParticleParams::electron();
    let mut rng = seeded(seed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let z = random_point(&mut rng);
        let e = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let ratio = spin_orbit_ratio(&z, &FieldConfig::uniform(e, Vec3::zeros()), &params)?;
        worst = worst.max((ratio - 0.5).abs());
    }
    Ok(vec![ReportRow::near(13, "Pauli / covariant (S,[E,p]) coefficient", "factor one half", 0.5 + worst, 0.5, 0.0)])
}

fn determinism(seed: u64) -> Result<Rows> {
    let once = || -> Result<String> {
        let mut out = identity_report(16, seed, &QmParams::default())?.to_json_lines();
        out.push_str(&bracket_check(8, seed)?.report.to_json_lines());
        let b = Vec3::new(0.0, 0.0, 1.0);
        let model = SpinModel::new(FieldConfig::magnetic(b), ParticleParams::electron().with_gamma(1.0));
        out.push_str(&integrate_spin(&SpinState::at_angle(&b, 0.7, 1.0), &model, 1e-2, 200, Scheme::Rk45)?.to_csv());
        Ok(out)
    };
    let (a, b) = rayon::join(once, once);
    let differ = if a? == b? { 0.0 } else { 1.0 };
    Ok(vec![ReportRow::below(14, "repeated seeded runs are byte-identical", "fixed seed", differ, 0.0)])
}

fn guard(c: u8, claim: &'static str, rows: Result<Rows>) -> Rows {
    rows.unwrap_or_else(|_| vec![ReportRow::failed(c, claim, "run aborted")])
}

/// Runs every criterion at desk scale. Rows come back in criterion order.
pub fn run_report(opts: &ReportOptions) -> Report {
    let start = Instant::now();
    let seed = opts.seed;
    let jobs: Vec<(u8, &'static str, Box<dyn Fn() -> Result<Rows> + Sync>)> = vec![
        (1, "alignment law", Box::new(|| theta_decay(opts))),
        (2, "spin magnitude", Box::new(|| spin_norm(opts))),
        (3, "stability structure", Box::new(|| stability(opts))),
        (4, "precession oracle", Box::new(precession_oracle)),
        (5, "bracket consistency", Box::new(move || brackets_rows(seed))),
        (6, "scaling exponents", Box::new(exponents)),
        (7, "curvature oracle", Box::new(curvature)),
        (8, "spinning-body invariants", Box::new(mptd)),
        (9, "operator identities", Box::new(move || identities(seed))),
        (10, "Pryce consistency", Box::new(pryce_leading)),
        (11, "trembling motion", Box::new(packets)),
        (12, "current conservation", Box::new(current)),
        (13, "coefficient ratio", Box::new(move || coefficient_ratio(seed))),
        (14, "determinism", Box::new(move || determinism(seed))),
    ];
    let rows = jobs.par_iter().map(|(c, claim, job)| guard(*c, claim, job())).collect::<Vec<_>>().concat();
    Report { rows, duration: start.elapsed() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::DEFAULT_SEED;

    #[test]
    fn rules() {
        assert!(ReportRow::near(1, "", "", 1.0, 1.05, 0.1).pass);
        assert!(!ReportRow::near(1, "", "", f64::NAN, 1.0, 1.0).pass);
        assert!(ReportRow::below(1, "", "", 0.0, 0.0).pass);
        assert!(!ReportRow::above(1, "", "", 0.0, 0.0).pass);
    }

    #[test]
    fn brackets_pass_and_truncated_defect_is_reported() {
        let c = bracket_check(20, DEFAULT_SEED).unwrap();
        assert!(c.report.all_pass(), "{:?}", c.report);
        assert!((c.truncated_jacobi - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reversed_alignment_fails_theta_rows() {
        let good = ReportOptions { seed: 1, fault: Fault::None };
        let bad = ReportOptions { fault: Fault::ReversedAlignment, ..good };
        assert!(theta_decay(&good).unwrap().iter().all(|r| r.pass));
        assert!(theta_decay(&bad).unwrap().iter().all(|r| !r.pass));
        assert!(stability(&good).unwrap().iter().all(|r| r.pass));
    }

    #[test]
    fn cheap_rows_pass() {
        for rows in [spin_norm(&ReportOptions { seed: 1, fault: Fault::None }), precession_oracle(), curvature(), coefficient_ratio(3)] {
            for r in rows.unwrap() {
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn qm_check_reports_pryce_spin_failures_only() {
        let r = qm_check(50, 9, &QmParams::default(), false).unwrap();
        let failed: Vec<&str> = r.reports.iter().flat_map(|(_, r)| r.failures().map(|e| e.name.as_str())).collect();
        assert_eq!(failed, ["pryce_su2", "pryce_casimir"]);
        assert!(!r.pass);
    }
}
