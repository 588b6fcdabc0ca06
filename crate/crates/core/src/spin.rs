//! Nonrelativistic spin evolution: precession about `R`, the alignment
//! interaction `beta (B,S) [S^, [B^, S^]]`, closed-form oracles, and the
//! Pauli-vs-covariant Hamiltonian evaluators.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::brackets::PhasePoint;
use crate::error::{domain, validation, Error, Result};
use crate::ode::{dopri_advance, is_finite, rk4_step, AdaptiveTolerance};
use crate::tensor::{Mat3, Vec3};

/// Electric field model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ElectricField {
    Uniform(Vec3),
    /// `E(x) = q x / |x|^3`, scalar potential `q / |x|`.
    Coulomb { charge: f64 },
}

/// Background electromagnetic field: electric part plus a constant magnetic field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub electric: ElectricField,
    pub magnetic: Vec3,
}

impl FieldConfig {
    pub fn magnetic(b: Vec3) -> Self {
        Self { electric: ElectricField::Uniform(Vec3::zeros()), magnetic: b }
    }

    pub fn uniform(e: Vec3, b: Vec3) -> Self {
        Self { electric: ElectricField::Uniform(e), magnetic: b }
    }

    pub fn electric_at(&self, x: &Vec3) -> Result<Vec3> {
        match self.electric {
            ElectricField::Uniform(e) => Ok(e),
            ElectricField::Coulomb { charge } => {
                let r = x.norm();
                if r == 0.0 {
                    return Err(domain("Coulomb field evaluated at the origin"));
                }
                Ok(x * (charge / (r * r * r)))
            }
        }
    }

    /// `A^0(x)` with `E = -grad A^0`.
    pub fn scalar_potential(&self, x: &Vec3) -> Result<f64> {
        match self.electric {
            ElectricField::Uniform(e) => Ok(-e.dot(x)),
            ElectricField::Coulomb { charge } => {
                let r = x.norm();
                if r == 0.0 {
                    return Err(domain("Coulomb potential evaluated at the origin"));
                }
                Ok(charge / r)
            }
        }
    }

    /// `dE_i / dx_j`.
    pub fn electric_jacobian(&self, x: &Vec3) -> Result<Mat3> {
        match self.electric {
            ElectricField::Uniform(_) => Ok(Mat3::zeros()),
            ElectricField::Coulomb { charge } => {
                let r = x.norm();
                if r == 0.0 {
                    return Err(domain("Coulomb field evaluated at the origin"));
                }
                let r3 = r * r * r;
                Ok((Mat3::identity() / r3 - x * x.transpose() * (3.0 / (r3 * r * r))) * charge)
            }
        }
    }
}

/// Particle constants. `beta_align = gamma_align |e| / (m c)` is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleParams {
    pub e: f64,
    pub m: f64,
    pub c: f64,
    pub hbar: f64,
    pub gamma_align: f64,
    /// Magnetic moment; the evaluators below are written for `mu = 1`.
    pub mu: f64,
}

impl ParticleParams {
    pub fn new(e: f64, m: f64, c: f64, hbar: f64, gamma_align: f64) -> Result<Self> {
        let p = Self { e, m, c, hbar, gamma_align, mu: 1.0 };
        p.validate()?;
        Ok(p)
    }

    /// Electron in units `hbar = c = m = 1`, `e = -1`, alignment switched off.
    pub fn electron() -> Self {
        Self { e: -1.0, m: 1.0, c: 1.0, hbar: 1.0, gamma_align: 0.0, mu: 1.0 }
    }

    pub fn with_gamma(mut self, gamma_align: f64) -> Self {
        self.gamma_align = gamma_align;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("m", self.m), ("c", self.c), ("hbar", self.hbar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(validation(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.e.is_finite() {
            return Err(validation("charge must be finite"));
        }
        if !(self.gamma_align >= 0.0 && self.gamma_align.is_finite()) {
            return Err(validation(format!("gamma must be >= 0, got {}", self.gamma_align)));
        }
        Ok(())
    }

    pub fn beta_align(&self) -> f64 {
        self.gamma_align * self.e.abs() / (self.m * self.c)
    }

    /// Spin magnitude of a spin one-half particle, `sqrt(3)/2 hbar`.
    pub fn spin_half_magnitude(&self) -> f64 {
        3.0f64.sqrt() / 2.0 * self.hbar
    }
}

/// `R = -(e/mc) { B - (1/2mc) [p, E] }`.
pub fn precession_vector(fields: &FieldConfig, x: &Vec3, p: &Vec3, params: &ParticleParams) -> Result<Vec3> {
    let mc = params.m * params.c;
    let e_field = fields.electric_at(x)?;
    Ok((fields.magnetic - p.cross(&e_field) / (2.0 * mc)) * (-params.e / mc))
}

/// `dS/dt = [R, S]`.
pub fn precession_rhs(s: &Vec3, r: &Vec3) -> Vec3 {
    r.cross(s)
}

/// `beta (B,S) [S^, [B^, S^]]` for an explicit coupling `beta`.
pub fn alignment_term(s: &Vec3, b: &Vec3, beta: f64) -> Result<Vec3> {
    let s_norm = s.norm();
    if s_norm == 0.0 {
        return Err(domain("alignment term undefined for a zero spin"));
    }
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(Vec3::zeros());
    }
    let s_hat = s / s_norm;
    let b_hat = b / b_norm;
    Ok(s_hat.cross(&b_hat.cross(&s_hat)) * (beta * b.dot(s)))
}

/// Alignment interaction with `beta = gamma |e| / mc`.
pub fn alignment_rhs(s: &Vec3, b: &Vec3, params: &ParticleParams) -> Result<Vec3> {
    alignment_term(s, b, params.beta_align())
}

/// Precession plus alignment.
pub fn spin_rhs_total(
    s: &Vec3,
    fields: &FieldConfig,
    x: &Vec3,
    p: &Vec3,
    params: &ParticleParams,
) -> Result<Vec3> {
    let r = precession_vector(fields, x, p, params)?;
    let align = if params.gamma_align == 0.0 {
        Vec3::zeros()
    } else {
        alignment_rhs(s, &fields.magnetic, params)?
    };
    Ok(precession_rhs(s, &r) + align)
}

/// Rotation of `s0` about `R^` by the angle `|R| t` (Rodrigues). Exact solution of
/// `dS/dt = R x S` for constant `R`.
pub fn rotate_rodrigues(s0: &Vec3, r: &Vec3, t: f64) -> Vec3 {
    let w = r.norm();
    if w == 0.0 {
        return *s0;
    }
    let k = r / w;
    let (sin, cos) = (w * t).sin_cos();
    s0 * cos + k.cross(s0) * sin + k * (k.dot(s0) * (1.0 - cos))
}

/// Closed-form angle to the field under the alignment flow:
/// `tan theta(t) = tan theta0 exp(-beta |B| t)`, attracting the nearer pole.
pub fn analytic_theta(theta0: f64, b_mag: f64, params: &ParticleParams, t: f64) -> f64 {
    if theta0 == 0.0 || theta0 == FRAC_PI_2 || theta0 == std::f64::consts::PI {
        return theta0;
    }
    let k = params.beta_align() * b_mag;
    let (sin, cos) = theta0.sin_cos();
    (sin * (-k * t).exp()).atan2(cos)
}

/// Time for the angular distance to the attracting pole to fall to `eps`.
/// Returns `f64::INFINITY` on the equator or when there is no coupling.
pub fn alignment_time(theta0: f64, eps: f64, b_mag: f64, params: &ParticleParams) -> Result<f64> {
    if !(theta0 > 0.0 && theta0 < std::f64::consts::PI) {
        return Err(validation(format!("theta0 must lie in (0, pi), got {theta0}")));
    }
    if theta0 == FRAC_PI_2 {
        return Ok(f64::INFINITY);
    }
    let dist = theta0.min(std::f64::consts::PI - theta0);
    if !(eps > 0.0 && eps < dist) {
        return Err(validation(format!("eps must lie in (0, {dist}), got {eps}")));
    }
    let k = params.beta_align() * b_mag;
    if k == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((dist.tan() / eps.tan()).ln() / k)
}

/// Angle between `s` and the direction `axis` (or `+z` when the axis vanishes).
pub fn angle_to(s: &Vec3, axis: &Vec3) -> f64 {
    let a = if axis.norm() > 0.0 { axis.normalize() } else { Vec3::z() };
    s.cross(&a).norm().atan2(s.dot(&a))
}

/// Background for a spin integration: fields, constants and the frozen orbital data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinModel {
    pub fields: FieldConfig,
    pub params: ParticleParams,
    pub x: Vec3,
    pub p: Vec3,
    alignment_sign: f64,
}

impl SpinModel {
    pub fn new(fields: FieldConfig, params: ParticleParams) -> Self {
        Self { fields, params, x: Vec3::zeros(), p: Vec3::zeros(), alignment_sign: 1.0 }
    }

    pub fn with_kinematics(mut self, x: Vec3, p: Vec3) -> Self {
        self.x = x;
        self.p = p;
        self
    }

    /// Negative-control hook: flips the sign of the alignment term so that
    /// harness checks relying on it must fail.
    #[doc(hidden)]
    pub fn with_reversed_alignment(mut self) -> Self {
        self.alignment_sign = -1.0;
        self
    }

    pub fn rhs(&self, s: &Vec3) -> Result<Vec3> {
        let r = precession_vector(&self.fields, &self.x, &self.p, &self.params)?;
        let mut out = precession_rhs(s, &r);
        if self.params.gamma_align != 0.0 {
            out += alignment_term(s, &self.fields.magnetic, self.alignment_sign * self.params.beta_align())?;
        }
        Ok(out)
    }
}

/// Spin plus the background orbital variables it was sampled with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    pub s: Vec3,
    pub p: Vec3,
    pub t: f64,
}

impl SpinState {
    pub fn new(s: Vec3) -> Self {
        Self { s, p: Vec3::zeros(), t: 0.0 }
    }

    /// Spin of magnitude `smag` at angle `theta0` from `b`, in the plane of `b`
    /// and a fixed perpendicular direction.
    pub fn at_angle(b: &Vec3, theta0: f64, smag: f64) -> Self {
        let axis = if b.norm() > 0.0 { b.normalize() } else { Vec3::z() };
        let trial = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let perp = (trial - axis * axis.dot(&trial)).normalize();
        let (sin, cos) = if theta0 == FRAC_PI_2 { (1.0, 0.0) } else { theta0.sin_cos() };
        Self::new((perp * sin + axis * cos) * smag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Rk4,
    Rk45,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Scheme::Rk4),
            "rk45" => Ok(Scheme::Rk45),
            other => Err(validation(format!("unknown scheme `{other}` (expected rk4 or rk45)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSample {
    pub t: f64,
    pub s: Vec3,
    pub theta: f64,
    pub smag: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpinTrajectory {
    pub samples: Vec<SpinSample>,
}

impl SpinTrajectory {
    /// Largest relative deviation of `|S|` from its initial value.
    pub fn max_relative_norm_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else { return 0.0 };
        self.samples
            .iter()
            .map(|s| (s.smag - first.smag).abs() / first.smag)
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&SpinSample> {
        self.samples.last()
    }

    /// CSV with header `t,Sx,Sy,Sz,theta,Smag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,Sx,Sy,Sz,theta,Smag\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?},{:?},{:?}",
                s.t, s.s.x, s.s.y, s.s.z, s.theta, s.smag
            );
        }
        out
    }
}

/// Integrate the spin flow with `n_steps` steps of size `dt`, recording every step.
/// `|S|` is never renormalized.
pub fn integrate_spin(
    state0: &SpinState,
    model: &SpinModel,
    dt: f64,
    n_steps: usize,
    scheme: Scheme,
) -> Result<SpinTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(validation(format!("dt must be positive, got {dt}")));
    }
    if n_steps == 0 {
        return Err(validation("n_steps must be at least 1"));
    }
    model.params.validate()?;
    let axis = model.fields.magnetic;
    let sample = |t: f64, s: Vec3| SpinSample { t, s, theta: angle_to(&s, &axis), smag: s.norm() };

    let mut rhs = |_t: f64, y: &[f64; 3]| -> Result<[f64; 3]> {
        let d = model.rhs(&Vec3::from(*y))?;
        Ok([d.x, d.y, d.z])
    };
    let mut y: [f64; 3] = state0.s.into();
    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push(sample(state0.t, state0.s));
    let mut h_adapt = dt;
    for step in 0..n_steps {
        let t = state0.t + step as f64 * dt;
        y = match scheme {
            Scheme::Rk4 => rk4_step(&mut rhs, t, &y, dt),
            Scheme::Rk45 => dopri_advance(&mut rhs, t, &y, t + dt, &mut h_adapt, AdaptiveTolerance::default(), step),
        }
        .map_err(|e| match e {
            Error::Numerical { reason, .. } => Error::Numerical { step: step + 1, reason },
            other => other,
        })?;
        if !is_finite(&y) {
            return Err(Error::Numerical { step: step + 1, reason: "non-finite spin".into() });
        }
        samples.push(sample(state0.t + (step + 1) as f64 * dt, Vec3::from(y)));
    }
    Ok(SpinTrajectory { samples })
}

/// Individual contributions to a classical Hamiltonian evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerms {
    pub rest: f64,
    pub kinetic: f64,
    pub potential: f64,
    /// `-(e/mc)(S,B)`.
    pub zeeman: f64,
    /// `-(e/mc) k (S,[E,p])` with `k = 1/2mc` (Pauli) or `1/mc` (covariant).
    pub spin_orbit: f64,
}

impl HamiltonianTerms {
    pub fn total(&self) -> f64 {
        self.rest + self.kinetic + self.potential + self.zeeman + self.spin_orbit
    }
}

fn energy_terms(point: &PhasePoint, fields: &FieldConfig, params: &ParticleParams, so_divisor: f64) -> Result<HamiltonianTerms> {
    let mc = params.m * params.c;
    let e_field = fields.electric_at(&point.x)?;
    let so = point.s.dot(&e_field.cross(&point.p));
    Ok(HamiltonianTerms {
        rest: 0.0,
        kinetic: point.p.norm_squared() / (2.0 * params.m),
        potential: params.e * fields.scalar_potential(&point.x)?,
        zeeman: -params.e / mc * point.s.dot(&fields.magnetic),
        spin_orbit: -params.e / mc * (so / (so_divisor * mc)),
    })
}

/// Pauli Hamiltonian (vector potential set to zero).
pub fn pauli_energy(point: &PhasePoint, fields: &FieldConfig, params: &ParticleParams) -> Result<HamiltonianTerms> {
    energy_terms(point, fields, params, 2.0)
}

/// Expanded covariant Hamiltonian: rest energy plus the `1/mc` spin-orbit coefficient.
pub fn covariant_energy_expanded(
    point: &PhasePoint,
    fields: &FieldConfig,
    params: &ParticleParams,
) -> Result<HamiltonianTerms> {
    let mut t = energy_terms(point, fields, params, 1.0)?;
    t.rest = params.m * params.c * params.c;
    Ok(t)
}

/// Ratio of the Pauli to covariant spin-orbit coefficients on one state, with
/// `B` and the scalar potential switched off.
pub fn spin_orbit_ratio(point: &PhasePoint, fields: &FieldConfig, params: &ParticleParams) -> Result<f64> {
    let probe = FieldConfig { electric: fields.electric, magnetic: Vec3::zeros() };
    let pauli = pauli_energy(point, &probe, params)?;
    let cov = covariant_energy_expanded(point, &probe, params)?;
    if cov.spin_orbit == 0.0 {
        return Err(domain("spin-orbit term vanishes on this state"));
    }
    Ok(pauli.spin_orbit / cov.spin_orbit)
}
