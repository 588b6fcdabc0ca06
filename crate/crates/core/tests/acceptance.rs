//! Acceptance criteria 1 to 14, each computed from the library primitives and
//! printed as one PASS/FAIL line. Run with `--nocapture` to see the lines.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use rand::Rng;
use spindyn::accel::{self, Scenario, SweepConfig};
use spindyn::brackets::{
    hamiltonian_flow, jacobi_residual, standard_spin_table, Coord, NumericCoord, PauliHamiltonian, PhasePoint,
};
use spindyn::curved::{circular_body, integrate_body, lambda_scaling, spin_half_alpha, BodyParams, Kappa};
use spindyn::fit::loglog_slope;
use spindyn::qm::current::standard_current_check;
use spindyn::qm::identities::{identity_residuals, leading_order};
use spindyn::qm::packets::{positive_run, zitterbewegung_run};
use spindyn::qm::QmParams;
use spindyn::rng::seeded;
use spindyn::spacetime::{kretschmann, Schwarzschild, Spacetime};
use spindyn::spin::{
    integrate_spin, precession_rhs, precession_vector, spin_orbit_ratio, ElectricField, FieldConfig, ParticleParams,
    Scheme, SpinModel, SpinState,
};
use spindyn::Vec3;

const SEED: u64 = 20240611;

struct Outcome {
    id: u8,
    pass: bool,
    detail: String,
}

fn outcome(id: u8, checks: &[(&str, f64, bool)]) -> Outcome {
    let pass = checks.iter().all(|c| c.2);
    let detail = checks.iter().map(|(n, v, ok)| format!("{n}={v:e}{}", if *ok { "" } else { " (!)" })).collect::<Vec<_>>().join(" ");
    Outcome { id, pass, detail }
}

fn below(name: &'static str, v: f64, tol: f64) -> (&'static str, f64, bool) {
    (name, v, v <= tol)
}

fn near(name: &'static str, v: f64, target: f64, tol: f64) -> (&'static str, f64, bool) {
    (name, v, (v - target).abs() <= tol)
}

fn rand_vec(rng: &mut impl Rng, r: f64) -> Vec3 {
    Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r))
}

fn rodrigues(s: &Vec3, r: &Vec3, t: f64) -> Vec3 {
    let w = r.norm();
    let k = r / w;
    let (sin, cos) = (w * t).sin_cos();
    s * cos + k.cross(s) * sin + k * k.dot(s) * (1.0 - cos)
}

fn alignment(b: Vec3) -> SpinModel {
    SpinModel::new(FieldConfig::magnetic(b), ParticleParams::electron().with_gamma(1.0))
}

fn alignment_law() -> Outcome {
    let b = Vec3::new(0.0, 0.0, 1.0);
    let model = alignment(b);
    let p = model.params;
    let theta0 = 1.0f64;
    let beta = p.gamma_align * p.e.abs() / (p.m * p.c);
    let tau = 1.0 / (beta * b.norm());
    let traj = integrate_spin(&SpinState::at_angle(&b, theta0, p.spin_half_magnitude()), &model, 1e-3 * tau, 3000, Scheme::Rk4).unwrap();
    let dev = traj
        .samples
        .iter()
        .map(|s| (s.theta - (theta0.tan() * (-beta * b.norm() * s.t).exp()).atan()).abs())
        .fold(0.0, f64::max);
    let mut rate = 0.0f64;
    for s in &traj.samples {
        let ds = model.rhs(&s.s).unwrap();
        let dtheta = -ds.z / (s.smag * s.theta.sin());
        let mag = p.gamma_align * p.e.abs() * b.norm() / (2.0 * p.m * p.c) * (2.0 * s.theta).sin().abs();
        rate = rate.max((dtheta.abs() - mag).abs() / mag);
    }
    outcome(1, &[below("max_dtheta", dev, 1e-6), below("rate_rel", rate, 1e-8)])
}

fn spin_magnitude() -> Outcome {
    let b = Vec3::new(0.3, -0.2, 1.0);
    let model = alignment(b);
    let r = precession_vector(&model.fields, &model.x, &model.p, &model.params).unwrap().norm();
    let s0 = SpinState::at_angle(&b, 1.2, model.params.spin_half_magnitude());
    let traj = integrate_spin(&s0, &model, 1e-2 / r, 100_000, Scheme::Rk4).unwrap();
    let n0 = traj.samples[0].s.norm();
    let drift = traj.samples.iter().map(|s| (s.s.norm() - n0).abs() / n0).fold(0.0, f64::max);
    outcome(2, &[below("norm_drift", drift, 1e-9)])
}

fn stability() -> Outcome {
    let b = Vec3::new(0.0, 0.0, 1.0);
    let model = alignment(b);
    let smag = model.params.spin_half_magnitude();
    let run = |theta0: f64, steps| integrate_spin(&SpinState::at_angle(&b, theta0, smag), &model, 1e-2, steps, Scheme::Rk4).unwrap();
    let mut growth_at_poles = f64::MIN;
    for (theta0, pole) in [(1e-3, 0.0), (PI - 1e-3, PI)] {
        let t = run(theta0, 1000);
        for w in t.samples.windows(2) {
            growth_at_poles = growth_at_poles.max((w[1].theta - pole).abs() - (w[0].theta - pole).abs());
        }
    }
    let eq = run(FRAC_PI_2, 1000).samples.iter().map(|s| (s.theta - FRAC_PI_2).abs()).fold(0.0, f64::max);
    let near = run(FRAC_PI_2 - 1e-3, 100);
    let growth = (near.samples.last().unwrap().theta - FRAC_PI_2).abs() / 1e-3;
    outcome(
        3,
        &[
            below("pole_increment", growth_at_poles, 0.0),
            below("equator_dev", eq, 1e-12),
            ("equator_growth", growth, growth > 1.0),
        ],
    )
}

fn precession() -> Outcome {
    let b = Vec3::new(0.3, -0.2, 1.0);
    let model = SpinModel::new(FieldConfig::magnetic(b), ParticleParams::electron());
    let r = precession_vector(&model.fields, &model.x, &model.p, &model.params).unwrap();
    let s0 = Vec3::new(0.5, 0.5, 0.1);
    let traj = integrate_spin(&SpinState::new(s0), &model, 1e-3, 5000, Scheme::Rk4).unwrap();
    let err = traj.samples.iter().map(|s| (s.s - rodrigues(&s0, &r, s.t)).norm()).fold(0.0, f64::max);
    outcome(4, &[below("rodrigues_err", err, 1e-8)])
}

fn brackets() -> Outcome {
    let params = ParticleParams::electron();
    let table = standard_spin_table(&params);
    let mut rng = seeded(SEED);
    let (mut flow, mut jac) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let z = PhasePoint { x: rand_vec(&mut rng, 2.0), p: rand_vec(&mut rng, 2.0), s: rand_vec(&mut rng, 2.0) };
        let (e, b) = (rand_vec(&mut rng, 1.0), rand_vec(&mut rng, 1.0));
        for fields in [FieldConfig::uniform(e, b), FieldConfig { electric: ElectricField::Coulomb { charge: 0.8 }, magnetic: b }] {
            let f = hamiltonian_flow(&table, &PauliHamiltonian { fields, params }, &z);
            let r = precession_vector(&fields, &z.x, &z.p, &params).unwrap();
            flow = flow.max((f.s - precession_rhs(&z.s, &r)).norm());
        }
        let s = |i| NumericCoord(Coord::S(i));
        jac = jac.max(jacobi_residual(&table, &z, &s(0), &s(1), &s(2)));
    }
    let z = PhasePoint { x: Vec3::zeros(), p: Vec3::zeros(), s: Vec3::new(0.2, -0.4, 0.75) };
    let cs = [10.0, 100.0, 1000.0];
    let xx: Vec<f64> = cs
        .iter()
        .map(|&c| standard_spin_table(&ParticleParams { c, ..params }).bracket(Coord::X(0), Coord::X(1), &z).abs())
        .collect();
    let slope = loglog_slope(&cs, &xx).unwrap().slope;
    outcome(5, &[below("flow_err", flow, 1e-12), below("so3_jacobi", jac, 1e-10), near("xx_slope", slope, -2.0, 0.01)])
}

fn exponents() -> Outcome {
    let fit = |s| {
        let cfg = SweepConfig::new(s);
        assert!(cfg.betas.iter().all(|b| (0.90..=0.999).contains(b)));
        let samples = accel::sweep(&cfg).unwrap();
        accel::sweep_fit(&cfg, &samples).unwrap().exponent
    };
    outcome(6, &[near("k_em", fit(Scenario::Em), 1.5, 0.01), near("k_geodesic", fit(Scenario::Geodesic), 1.0, 0.02)])
}

fn curvature() -> Outcome {
    let rs = 1.0;
    let st = Schwarzschild::new(rs);
    let mut worst = 0.0f64;
    for ratio in [3.0, 10.0, 100.0] {
        let r = ratio * rs;
        let x = [0.0, r, 1.1, 0.4];
        let k = kretschmann(&st.riemann(&x).unwrap(), &st.inverse_metric(&x).unwrap());
        worst = worst.max((k / (12.0 * rs * rs / r.powi(6)) - 1.0).abs());
    }
    outcome(7, &[below("kretschmann_rel", worst, 1e-6)])
}

fn mptd() -> Outcome {
    let st = Schwarzschild::new(1.0);
    let params = BodyParams::default();
    let alpha = spin_half_alpha(1.0);
    let dir = Vec3::new(0.6, 0.0, 0.8);
    let drift = |kappa| {
        let b = circular_body(&st, 10.0, &params, &dir, alpha, 1.0, kappa).unwrap();
        let t = integrate_body(&b, &st, &params, 0.1, 10_000).unwrap();
        let s0 = t.samples[0].ss;
        t.samples.iter().map(|s| (s.ss - s0).abs() / s0.abs()).fold(0.0, f64::max)
    };
    let ratio = lambda_scaling(|l, k| circular_body(&st, 10.0, &params, &dir, alpha, l, k), &st, &params, 0.1, 1000, 0.05)
        .unwrap()
        .ratio;
    outcome(
        8,
        &[
            below("ss_drift_k0", drift(Kappa::Mptd), 1e-8),
            below("ss_drift_k1", drift(Kappa::Gravimagnetic), 1e-6),
            near("lambda_ratio", ratio, 4.0, 0.2),
        ],
    )
}

fn identities() -> Outcome {
    let worst = identity_residuals(1000, SEED, &QmParams::default()).unwrap();
    let checks: Vec<_> = worst.named().iter().map(|&(n, v)| below(n, v, 1e-12)).collect();
    outcome(9, &checks)
}

fn pryce() -> Outcome {
    let lo = leading_order(&QmParams::default());
    outcome(
        10,
        &[
            near("coefficient_order", lo.coefficient_order, 2.0, 0.05),
            below("commutator_dev", lo.commutator_deviation[1], 1e-5),
            near("commutator_order", lo.commutator_order, 2.0, 0.1),
        ],
    )
}

fn zitterbewegung() -> Outcome {
    let q = QmParams::default();
    let start = Instant::now();
    let (dirac, osc) = zitterbewegung_run(&q, 0.5).unwrap();
    let (_, positive) = positive_run(&q).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let n0 = dirac.norm[0];
    let drift = dirac.norm.iter().map(|n| (n - n0).abs() / n0).fold(positive.norm_drift, f64::max);
    let omega0 = 2.0 * q.m * q.c * q.c / q.hbar;
    outcome(
        11,
        &[
            near("omega_ratio", osc.omega / omega0, 1.0, 0.01),
            below("x_linear", positive.x_linear_residual, 1e-6),
            below("norm_drift", drift, 1e-12),
            below("seconds", secs, 30.0),
        ],
    )
}

fn current() -> Outcome {
    let c = standard_current_check(&QmParams::default()).unwrap();
    let min_density = c.fine.min_density.min(c.coarse.min_density);
    outcome(
        12,
        &[
            near("refinement_ratio", c.refinement_ratio, 4.0, 0.2),
            below("charge_drift", c.fine.charge_drift.max(c.coarse.charge_drift), 1e-8),
            ("min_density", min_density, min_density > 0.0),
        ],
    )
}

fn coefficient() -> Outcome {
    let params = ParticleParams::electron();
    let mut rng = seeded(SEED);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let z = PhasePoint { x: rand_vec(&mut rng, 2.0), p: rand_vec(&mut rng, 2.0), s: rand_vec(&mut rng, 2.0) };
        let fields = FieldConfig::uniform(rand_vec(&mut rng, 1.0), Vec3::zeros());
        worst = worst.max((spin_orbit_ratio(&z, &fields, &params).unwrap() - 0.5).abs());
    }
    outcome(13, &[below("ratio_minus_half", worst, 0.0)])
}

fn determinism() -> Outcome {
    let once = || {
        let mut out = format!("{:?}", identity_residuals(16, SEED, &QmParams::default()).unwrap().named());
        let b = Vec3::new(0.0, 0.0, 1.0);
        let traj = integrate_spin(&SpinState::at_angle(&b, 0.7, 1.0), &alignment(b), 1e-2, 200, Scheme::Rk45).unwrap();
        out.push_str(&traj.to_csv());
        let (_, pos) = positive_run(&QmParams::default()).unwrap();
        out.push_str(&format!("{pos:?}"));
        out
    };
    let (a, b) = rayon::join(once, once);
    outcome(14, &[("byte_identical", if a == b { 1.0 } else { 0.0 }, a == b)])
}

#[test]
fn acceptance_criteria() {
    let runs: [fn() -> Outcome; 14] = [
        alignment_law,
        spin_magnitude,
        stability,
        precession,
        brackets,
        exponents,
        curvature,
        mptd,
        identities,
        pryce,
        zitterbewegung,
        current,
        coefficient,
        determinism,
    ];
    let outcomes: Vec<Outcome> = runs.iter().map(|f| f()).collect();
    for o in &outcomes {
        println!("criterion {:2}: {} {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
