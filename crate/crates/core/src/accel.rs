//! Longitudinal acceleration of charged and freely falling particles near
//! the speed of light.
//!
//! The electromagnetic case gives `a_par ~ (c^2 - v^2)^{3/2}`, the radial
//! geodesic case `a_par ~ (c^2 - v^2)`. Both are measured instantaneously from
//! the proper-time right-hand side at prepared states of exact speed.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, validation, Error, Result};
use crate::fit::loglog_slope;
use crate::ode::rk4_step;
use crate::spacetime::{Schwarzschild, Spacetime};
use crate::tensor::{minkowski_dot, FourVector, Vec3};

/// Constant field. `F^mu_nu` is built with `q/m` folded in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmField {
    pub e: Vec3,
    pub b: Vec3,
    pub q_over_m: f64,
}

impl EmField {
    /// `F^mu_nu` with `F^0_i = F^i_0 = E_i / c` and `F^i_j = eps_ijk B^k`.
    pub fn mixed_tensor(&self, c: f64) -> [[f64; 4]; 4] {
        let k = self.q_over_m;
        let (e, b) = (self.e, self.b);
        let mut f = [[0.0; 4]; 4];
        for i in 0..3 {
            f[0][i + 1] = k * e[i] / c;
            f[i + 1][0] = k * e[i] / c;
        }
        f[1][2] = k * b[2];
        f[2][1] = -k * b[2];
        f[2][3] = k * b[0];
        f[3][2] = -k * b[0];
        f[3][1] = k * b[1];
        f[1][3] = -k * b[1];
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmWorldline {
    pub x: FourVector,
    pub v: FourVector,
    pub field: EmField,
    pub c: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GeoWorldline {
    pub x: FourVector,
    pub v: FourVector,
    pub spacetime: Schwarzschild,
    pub c: f64,
}

/// `dv^mu/ds = F^mu_nu v^nu`.
pub fn lorentz_rhs(w: &EmWorldline) -> FourVector {
    let f = w.field.mixed_tensor(w.c);
    let mut out = [0.0; 4];
    for (mu, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|nu| f[mu][nu] * w.v[nu]).sum();
    }
    out
}

/// `dv^mu/ds = -Gamma^mu_{nu alpha} v^nu v^alpha`.
pub fn geodesic_rhs(st: &dyn Spacetime, x: &FourVector, v: &FourVector) -> Result<FourVector> {
    let g = st.christoffel(x)?;
    let mut out = [0.0; 4];
    for (mu, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                acc += g[mu][a][b] * v[a] * v[b];
            }
        }
        *o = -acc;
    }
    Ok(out)
}

/// `(g_{mu nu} v^mu v^nu + c^2) / c^2`.
pub fn normalization_residual(st: &dyn Spacetime, x: &FourVector, v: &FourVector, c: f64) -> Result<f64> {
    let g = st.metric(x)?;
    let mut vv = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            vv += g[a][b] * v[a] * v[b];
        }
    }
    Ok((vv + c * c) / (c * c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeAcceleration {
    pub a: Vec3,
    /// `a . v / |v|`; for `v = 0` this is `|a|`.
    pub a_par: f64,
    pub v: Vec3,
}

/// Coordinate-time acceleration from a proper-time state: with `dt/ds = v^0/c`,
/// `a^i = (c / v^0)^2 (dv^i/ds - v^i (dv^0/ds) / v^0)`.
pub fn three_acceleration(v: &FourVector, dv: &FourVector, c: f64) -> Result<ThreeAcceleration> {
    if !(v[0] > 0.0) {
        return Err(domain("time component of the four-velocity must be positive"));
    }
    let k = (c / v[0]).powi(2);
    let a = Vec3::from_fn(|i, _| k * (dv[i + 1] - v[i + 1] * dv[0] / v[0]));
    let vel = Vec3::from_fn(|i, _| c * v[i + 1] / v[0]);
    let speed = vel.norm();
    let a_par = if speed == 0.0 { a.norm() } else { a.dot(&vel) / speed };
    Ok(ThreeAcceleration { a, a_par, v: vel })
}

/// Hat components of a four-vector and its derivative in the static frame.
///
/// `v^a_hat = e^a v^a`, so `d v_hat / ds = e dv/ds + (de/dr v^r + de/dtheta v^theta) v`.
pub fn to_static_frame(
    st: &Schwarzschild,
    x: &FourVector,
    v: &FourVector,
    dv: &FourVector,
) -> Result<(FourVector, FourVector)> {
    let fr = st.static_frame(x)?;
    let mut vh = [0.0; 4];
    let mut dvh = [0.0; 4];
    for a in 0..4 {
        vh[a] = fr.e[a] * v[a];
        dvh[a] = fr.e[a] * dv[a] + (fr.de_dr[a] * v[1] + fr.de_dtheta[a] * v[2]) * v[a];
    }
    Ok((vh, dvh))
}

/// Acceleration a static observer measures for a geodesic.
pub fn geodesic_local_acceleration(st: &Schwarzschild, x: &FourVector, v: &FourVector, c: f64) -> Result<ThreeAcceleration> {
    let dv = geodesic_rhs(st, x, v)?;
    let (vh, dvh) = to_static_frame(st, x, v, &dv)?;
    three_acceleration(&vh, &dvh, c)
}

/// Four-velocity with local speed `speed` along the unit 3-direction `dir` at rest-frame position.
pub fn em_state(speed: f64, dir: Vec3, c: f64) -> Result<FourVector> {
    check_speed(speed, c)?;
    let n = dir.try_normalize(0.0).ok_or_else(|| domain("direction must be nonzero"))?;
    let g = 1.0 / (1.0 - (speed / c).powi(2)).sqrt();
    Ok([g * c, g * speed * n[0], g * speed * n[1], g * speed * n[2]])
}

/// Radial four-velocity at `r` whose static-frame speed is `speed` (negative = infall).
pub fn radial_state(st: &Schwarzschild, r: f64, speed: f64, c: f64) -> Result<(FourVector, FourVector)> {
    check_speed(speed.abs(), c)?;
    let x = [0.0, r, std::f64::consts::FRAC_PI_2, 0.0];
    let fr = st.static_frame(&x)?;
    let g = 1.0 / (1.0 - (speed / c).powi(2)).sqrt();
    Ok((x, [g * c / fr.e[0], g * speed / fr.e[1], 0.0, 0.0]))
}

/// Circular geodesic at `r` in the equatorial plane.
pub fn circular_state(st: &Schwarzschild, r: f64, c: f64) -> Result<(FourVector, FourVector)> {
    if !(r > 1.5 * st.rs) {
        return Err(domain("circular orbits need r > 1.5 r_s"));
    }
    let omega = c * (st.rs / (2.0 * r.powi(3))).sqrt();
    let v0 = c / (1.0 - 1.5 * st.rs / r).sqrt();
    Ok(([0.0, r, std::f64::consts::FRAC_PI_2, 0.0], [v0, 0.0, 0.0, v0 * omega / c]))
}

fn check_speed(speed: f64, c: f64) -> Result<()> {
    if !(speed >= 0.0 && speed < c) {
        return Err(domain(format!("speed {speed} must lie in [0, c)")));
    }
    Ok(())
}

pub fn integrate_em(w: &EmWorldline, ds: f64, n_steps: usize) -> Result<Vec<[f64; 8]>> {
    let mut y = pack(&w.x, &w.v);
    let mut out = vec![y];
    for step in 0..n_steps {
        y = rk4_step(
            &mut |_, y: &[f64; 8]| {
                let (x, v) = unpack(y);
                let dv = lorentz_rhs(&EmWorldline { x, v, ..*w });
                Ok(pack(&v, &dv))
            },
            step as f64 * ds,
            &y,
            ds,
        )
        .map_err(|e| at_step(e, step))?;
        out.push(y);
    }
    Ok(out)
}

pub fn integrate_geodesic(st: &dyn Spacetime, x0: &FourVector, v0: &FourVector, ds: f64, n_steps: usize) -> Result<Vec<[f64; 8]>> {
    let mut y = pack(x0, v0);
    let mut out = vec![y];
    for step in 0..n_steps {
        y = rk4_step(
            &mut |_, y: &[f64; 8]| {
                let (x, v) = unpack(y);
                Ok(pack(&v, &geodesic_rhs(st, &x, &v)?))
            },
            step as f64 * ds,
            &y,
            ds,
        )
        .map_err(|e| at_step(e, step))?;
        out.push(y);
    }
    Ok(out)
}

fn at_step(e: Error, step: usize) -> Error {
    match e {
        Error::Numerical { reason, .. } => Error::Numerical { step, reason },
        Error::Domain(reason) => Error::Numerical { step, reason },
        other => other,
    }
}

fn pack(x: &FourVector, v: &FourVector) -> [f64; 8] {
    let mut y = [0.0; 8];
    y[..4].copy_from_slice(x);
    y[4..].copy_from_slice(v);
    y
}

fn unpack(y: &[f64; 8]) -> (FourVector, FourVector) {
    let mut x = [0.0; 4];
    let mut v = [0.0; 4];
    x.copy_from_slice(&y[..4]);
    v.copy_from_slice(&y[4..]);
    (x, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub amplitude: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
}

/// Least-squares slope of `ln|a_par|` against `ln(c^2 - v^2)`.
pub fn fit_exponent(samples: &[(f64, f64)], c: f64) -> Result<PowerFit> {
    if samples.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 samples, got {}", samples.len())));
    }
    for &(v, a) in samples {
        if !(v > 0.0 && v < c) || a == 0.0 || !a.is_finite() {
            return Err(Error::Fit(format!("bad sample (v = {v}, a_par = {a})")));
        }
    }
    let gaps: Vec<f64> = samples.iter().map(|(v, _)| c * c - v * v).collect();
    let accs: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let f = loglog_slope(&gaps, &accs)?;
    Ok(PowerFit { exponent: f.slope, amplitude: f.intercept.exp(), residual: f.rms_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Em,
    Geodesic,
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "em" => Ok(Self::Em),
            "geodesic" => Ok(Self::Geodesic),
            _ => Err(validation(format!("unknown scenario '{s}' (expected em or geodesic)"))),
        }
    }
}

/// Sweep parameters. The electromagnetic default has E parallel to v and
/// B = 0; the geodesic default is radial motion at r = 10 r_s.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub scenario: Scenario,
    pub c: f64,
    /// Speeds as fractions of c.
    pub betas: Vec<f64>,
    pub e_field: f64,
    pub q_over_m: f64,
    pub rs: f64,
    pub r_over_rs: f64,
}

pub const DEFAULT_BETAS: [f64; 5] = [0.90, 0.925, 0.95, 0.975, 0.999];

impl SweepConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            c: 1.0,
            betas: DEFAULT_BETAS.to_vec(),
            e_field: 1.0,
            q_over_m: 1.0,
            rs: 1.0,
            r_over_rs: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSample {
    pub v: f64,
    pub a_par: f64,
    /// `ln(c^2 - v^2)`.
    pub log_gap: f64,
    /// `|v.v + c^2| / c^2` of the prepared state.
    pub norm_residual: f64,
}

pub fn sweep_point(cfg: &SweepConfig, beta: f64) -> Result<SweepSample> {
    let c = cfg.c;
    let speed = beta * c;
    let (a_par, norm) = match cfg.scenario {
        Scenario::Em => {
            let v = em_state(speed, Vec3::x(), c)?;
            let field = EmField { e: Vec3::new(cfg.e_field, 0.0, 0.0), b: Vec3::zeros(), q_over_m: cfg.q_over_m };
            let w = EmWorldline { x: [0.0; 4], v, field, c };
            let acc = three_acceleration(&v, &lorentz_rhs(&w), c)?;
            (acc.a_par, ((minkowski_dot(&v, &v) + c * c) / (c * c)).abs())
        }
        Scenario::Geodesic => {
            let st = Schwarzschild::new(cfg.rs);
            let (x, v) = radial_state(&st, cfg.r_over_rs * cfg.rs, speed, c)?;
            let acc = geodesic_local_acceleration(&st, &x, &v, c)?;
            (acc.a_par, normalization_residual(&st, &x, &v, c)?.abs())
        }
    };
    Ok(SweepSample { v: speed, a_par, log_gap: (c * c - speed * speed).ln(), norm_residual: norm })
}

pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepSample>> {
    cfg.betas.par_iter().map(|&b| sweep_point(cfg, b)).collect()
}

pub fn sweep_fit(cfg: &SweepConfig, samples: &[SweepSample]) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.v, s.a_par)).collect();
    fit_exponent(&pts, cfg.c)
}

pub fn sweep_csv(samples: &[SweepSample]) -> String {
    let mut out = String::from("v,a_par,log_gap\n");
    for s in samples {
        out.push_str(&format!("{:?},{:?},{:?}\n", s.v, s.a_par, s.log_gap));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(e: f64) -> EmField {
        EmField { e: Vec3::new(e, 0.0, 0.0), b: Vec3::zeros(), q_over_m: 1.0 }
    }

    #[test]
    fn lorentz_trivia() {
        let w = EmWorldline { x: [0.0; 4], v: [1.0, 0.0, 0.0, 0.0], field: field(2.0), c: 1.0 };
        let d = lorentz_rhs(&w);
        assert_eq!(d, [0.0, 2.0, 0.0, 0.0]);
        let w0 = EmWorldline { field: field(0.0), ..w };
        assert_eq!(lorentz_rhs(&w0), [0.0; 4]);
    }

    #[test]
    fn lorentz_preserves_normalization_instantaneously() {
        let f = EmField { e: Vec3::new(0.3, -0.2, 0.5), b: Vec3::new(0.1, 0.7, -0.4), q_over_m: -1.3 };
        let v = em_state(0.8, Vec3::new(1.0, 2.0, -0.5), 1.0).unwrap();
        let d = lorentz_rhs(&EmWorldline { x: [0.0; 4], v, field: f, c: 1.0 });
        assert!(minkowski_dot(&v, &d).abs() < 1e-15);
    }

    #[test]
    fn magnetic_part_is_the_cross_product() {
        let f = EmField { e: Vec3::zeros(), b: Vec3::new(0.2, -0.3, 0.9), q_over_m: 1.0 };
        let v = em_state(0.6, Vec3::new(0.3, 1.0, 0.2), 1.0).unwrap();
        let d = lorentz_rhs(&EmWorldline { x: [0.0; 4], v, field: f, c: 1.0 });
        let u = Vec3::new(v[1], v[2], v[3]);
        let expect = u.cross(&f.b);
        for i in 0..3 {
            assert!((d[i + 1] - expect[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn em_longitudinal_law() {
        for beta in [0.0, 0.3, 0.9, 0.999] {
            let v = em_state(beta, Vec3::x(), 1.0).unwrap();
            let w = EmWorldline { x: [0.0; 4], v, field: field(0.7), c: 1.0 };
            let a = three_acceleration(&v, &lorentz_rhs(&w), 1.0).unwrap();
            let expect = 0.7 * (1.0 - beta * beta).powf(1.5);
            assert!((a.a_par - expect).abs() < 1e-13 * expect.max(1e-3), "beta {beta}");
        }
    }

    #[test]
    fn static_observer_falls_inward() {
        let st = Schwarzschild::new(1.0);
        let (x, v) = radial_state(&st, 5.0, 0.0, 1.0).unwrap();
        let d = geodesic_rhs(&st, &x, &v).unwrap();
        assert!(d[1] < 0.0);
    }

    #[test]
    fn flat_radial_motion_is_free() {
        let st = Schwarzschild::new(0.0);
        let (x, v) = radial_state(&st, 5.0, 0.4, 1.0).unwrap();
        assert_eq!(geodesic_rhs(&st, &x, &v).unwrap(), [0.0; 4]);
    }

    #[test]
    fn weak_field_limit_is_newtonian() {
        let st = Schwarzschild::new(1e-4);
        let r = 1.0;
        let (x, v) = radial_state(&st, r, 1e-6, 1.0).unwrap();
        let a = geodesic_local_acceleration(&st, &x, &v, 1.0).unwrap();
        let newton = -1e-4 / (2.0 * r * r);
        assert!((a.a[0] / newton - 1.0).abs() < 1e-3);
    }

    #[test]
    fn local_geodesic_law_is_linear_in_the_gap() {
        let st = Schwarzschild::new(1.0);
        let r = 10.0;
        let f = 1.0 - 1.0 / r;
        for beta in [0.0, 0.5, -0.95] {
            let (x, v) = radial_state(&st, r, beta, 1.0).unwrap();
            let a = geodesic_local_acceleration(&st, &x, &v, 1.0).unwrap();
            let expect = -(1.0 / (2.0 * r * r * f.sqrt())) * (1.0 - beta * beta);
            assert!((a.a[0] - expect).abs() < 1e-14, "beta {beta}: {} vs {expect}", a.a[0]);
            assert!(normalization_residual(&st, &x, &v, 1.0).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn zero_speed_gives_finite_acceleration() {
        let v = em_state(0.0, Vec3::x(), 1.0).unwrap();
        let a = three_acceleration(&v, &lorentz_rhs(&EmWorldline { x: [0.0; 4], v, field: field(1.0), c: 1.0 }), 1.0).unwrap();
        assert!((a.a_par - 1.0).abs() < 1e-15);
    }

    #[test]
    fn synthetic_power_law_is_recovered() {
        let pts: Vec<(f64, f64)> = DEFAULT_BETAS.iter().map(|&b| (b, (1.0 - b * b).powf(1.5))).collect();
        let f = fit_exponent(&pts, 1.0).unwrap();
        assert!((f.exponent - 1.5).abs() < 1e-12 && f.residual < 1e-12);
        assert!((f.amplitude - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate_samples() {
        let same = vec![(0.9, 0.1); 5];
        assert!(fit_exponent(&same, 1.0).is_err());
        assert!(fit_exponent(&same[..4], 1.0).is_err());
        let mut bad = DEFAULT_BETAS.iter().map(|&b| (b, 1.0)).collect::<Vec<_>>();
        bad[0].0 = 1.0;
        assert!(fit_exponent(&bad, 1.0).is_err());
    }

    #[test]
    fn sweeps_give_the_two_exponents() {
        let em = SweepConfig::new(Scenario::Em);
        let geo = SweepConfig::new(Scenario::Geodesic);
        let ks: Vec<f64> = [&em, &geo]
            .iter()
            .map(|cfg| {
                let s = sweep(cfg).unwrap();
                assert!(s.iter().all(|p| p.norm_residual < 1e-9));
                assert!(s.windows(2).all(|w| w[1].a_par.abs() < w[0].a_par.abs()));
                sweep_fit(cfg, &s).unwrap().exponent
            })
            .collect();
        assert!((ks[0] - 1.5).abs() < 0.01, "{}", ks[0]);
        assert!((ks[1] - 1.0).abs() < 0.02, "{}", ks[1]);
        assert!((ks[0] - ks[1] - 0.5).abs() < 0.03);
    }

    #[test]
    fn circular_orbit_keeps_its_radius() {
        let st = Schwarzschild::new(1.0);
        let (x, v) = circular_state(&st, 6.0, 1.0).unwrap();
        let d = geodesic_rhs(&st, &x, &v).unwrap();
        assert!(d[1].abs() < 1e-15);
        let traj = integrate_geodesic(&st, &x, &v, 0.05, 4000).unwrap();
        for y in &traj {
            assert!((y[1] - 6.0).abs() < 1e-9);
            let (x, v) = unpack(y);
            assert!(normalization_residual(&st, &x, &v, 1.0).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn em_integration_keeps_normalization() {
        let f = EmField { e: Vec3::new(0.3, 0.0, 0.1), b: Vec3::new(0.0, 0.0, 0.5), q_over_m: 1.0 };
        let v = em_state(0.5, Vec3::y(), 1.0).unwrap();
        let traj = integrate_em(&EmWorldline { x: [0.0; 4], v, field: f, c: 1.0 }, 0.01, 2000).unwrap();
        for y in &traj {
            let (_, v) = unpack(y);
            assert!((minkowski_dot(&v, &v) + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn interior_is_rejected() {
        let st = Schwarzschild::new(1.0);
        assert!(geodesic_rhs(&st, &[0.0, 0.9, 1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(radial_state(&st, 0.5, 0.1, 1.0).is_err());
    }
}
