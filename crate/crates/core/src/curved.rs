//! Spinning test bodies in curved spacetime.
//!
//! Two flows share one integrator: parallel transport of spin with the
//! curvature force `-1/4 theta_{mu nu} xdot^nu` (kappa = 0), and the
//! gravimagnetic body (kappa = 1) that adds a curvature-gradient force and a
//! torque. Velocity follows momentum, `xdot = P / m`; to leading
//! post-Newtonian order the two differ only at higher order in spin.

use serde::Serialize;

use crate::error::{domain, validation, Error, Result};
use crate::ode::rk4_step;
use crate::spacetime::{partials_of, Metric, Rank4, Schwarzschild, Spacetime};
use crate::tensor::{AntisymTensor4, FourVector, Vec3, ETA};

/// Gravimagnetic moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kappa {
    /// `kappa = 0`: parallel-transported spin.
    Mptd,
    /// `kappa = 1`: unit gravimagnetic moment.
    Gravimagnetic,
}

impl Kappa {
    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            0 => Ok(Self::Mptd),
            1 => Ok(Self::Gravimagnetic),
            _ => Err(validation(format!("kappa must be 0 or 1, got {k}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::Mptd => 0,
            Self::Gravimagnetic => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BodyParams {
    pub m: f64,
    pub c: f64,
}

impl Default for BodyParams {
    fn default() -> Self {
        Self { m: 1.0, c: 1.0 }
    }
}

impl BodyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.c > 0.0) || !self.m.is_finite() || !self.c.is_finite() {
            return Err(validation("mass and c must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BodyState {
    pub x: FourVector,
    /// Contravariant momentum `P^mu`.
    pub p: FourVector,
    /// Contravariant spin tensor `S^{mu nu}`.
    pub s: AntisymTensor4,
    pub tau: f64,
    pub kappa: Kappa,
}

/// `theta_{mu nu} = R_{mu nu alpha beta} S^{alpha beta}`, both indices down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaTensor(pub AntisymTensor4);

impl ThetaTensor {
    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.0.get(mu, nu)
    }

    /// `theta^mu_nu`.
    pub fn mixed(&self, ginv: &Metric) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (mu, row) in out.iter_mut().enumerate() {
            for (nu, o) in row.iter_mut().enumerate() {
                *o = (0..4).map(|r| ginv[mu][r] * self.get(r, nu)).sum();
            }
        }
        out
    }
}

pub fn theta_from(riem: &Rank4, s: &AntisymTensor4) -> ThetaTensor {
    let sm = s.to_matrix();
    let mut m = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            let mut acc = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    acc += riem[mu][nu][a][b] * sm[a][b];
                }
            }
            m[mu][nu] = acc;
        }
    }
    ThetaTensor(AntisymTensor4::from_matrix(&m))
}

pub fn theta(st: &dyn Spacetime, x: &FourVector, s: &AntisymTensor4) -> Result<ThetaTensor> {
    Ok(theta_from(&st.riemann(x)?, s))
}

/// Time derivatives along the affine parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyRhs {
    pub dx: FourVector,
    pub dp: FourVector,
    pub ds: AntisymTensor4,
}

struct Local {
    ginv: Metric,
    gamma: crate::spacetime::Christoffel,
    riem: Rank4,
    xdot: FourVector,
    theta: ThetaTensor,
}

fn local(state: &BodyState, st: &dyn Spacetime, params: &BodyParams) -> Result<Local> {
    let xdot = state.p.map(|p| p / params.m);
    let riem = st.riemann(&state.x)?;
    Ok(Local {
        ginv: st.inverse_metric(&state.x)?,
        gamma: st.christoffel(&state.x)?,
        theta: theta_from(&riem, &state.s),
        riem,
        xdot,
    })
}

fn transport(l: &Local, state: &BodyState) -> BodyRhs {
    let (g, v) = (&l.gamma, &l.xdot);
    let sm = state.s.to_matrix();
    let mut dp = [0.0; 4];
    for (mu, d) in dp.iter_mut().enumerate() {
        let mut acc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                acc -= g[mu][a][b] * v[a] * state.p[b];
            }
        }
        for r in 0..4 {
            for n in 0..4 {
                acc -= 0.25 * l.ginv[mu][r] * l.theta.get(r, n) * v[n];
            }
        }
        *d = acc;
    }
    // Gamma^mu_{alpha beta} xdot^alpha, reused for both spin indices.
    let mut gv = [[0.0; 4]; 4];
    for mu in 0..4 {
        for b in 0..4 {
            gv[mu][b] = (0..4).map(|a| g[mu][a][b] * v[a]).sum();
        }
    }
    let mut ds = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            let mut acc = 0.0;
            for b in 0..4 {
                acc -= gv[mu][b] * sm[b][nu] + gv[nu][b] * sm[mu][b];
            }
            ds[mu][nu] = acc;
        }
    }
    BodyRhs { dx: *v, dp, ds: AntisymTensor4::from_matrix(&ds) }
}

/// Parallel-transported spin with the curvature force.
pub fn mptd_rhs(state: &BodyState, st: &dyn Spacetime, params: &BodyParams) -> Result<BodyRhs> {
    let l = local(state, st, params)?;
    Ok(transport(&l, state))
}

/// `theta^{[mu}_alpha S^{nu] alpha}` with the weight-one bracket `A^{mu nu} - A^{nu mu}`.
pub fn torque_term(theta: &ThetaTensor, s: &AntisymTensor4, ginv: &Metric) -> AntisymTensor4 {
    let th = theta.mixed(ginv);
    let sm = s.to_matrix();
    let mut a = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            a[mu][nu] = (0..4).map(|al| th[mu][al] * sm[nu][al]).sum();
        }
    }
    let mut out = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            out[mu][nu] = a[mu][nu] - a[nu][mu];
        }
    }
    AntisymTensor4::from_matrix(&out)
}

/// `nabla_lambda R_{mu nu alpha beta}`, indexed `[lambda][mu][nu][alpha][beta]`.
///
/// The partial derivative comes from central differences of the Riemann tensor;
/// the connection terms act on all four slots.
pub fn riemann_gradient(st: &dyn Spacetime, x: &FourVector, riem: &Rank4) -> Result<[Rank4; 4]> {
    let d: [Rank4; 4] = partials_of(st, x, |q| st.riemann(q))?;
    let g = st.christoffel(x)?;
    let mut out = d;
    for l in 0..4 {
        for m in 0..4 {
            for n in 0..4 {
                for a in 0..4 {
                    for b in 0..4 {
                        let mut corr = 0.0;
                        for r in 0..4 {
                            corr += g[r][l][m] * riem[r][n][a][b]
                                + g[r][l][n] * riem[m][r][a][b]
                                + g[r][l][a] * riem[m][n][r][b]
                                + g[r][l][b] * riem[m][n][a][r];
                        }
                        out[l][m][n][a][b] -= corr;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `(nabla_mu theta_{sigma lambda}) S^{sigma lambda}` with `S` parallel transported,
/// i.e. `(nabla_mu R_{sigma lambda alpha beta}) S^{alpha beta} S^{sigma lambda}`.
pub fn gradient_force(st: &dyn Spacetime, x: &FourVector, riem: &Rank4, s: &AntisymTensor4) -> Result<FourVector> {
    let dr = riemann_gradient(st, x, riem)?;
    let sm = s.to_matrix();
    let mut f = [0.0; 4];
    for (l, fl) in f.iter_mut().enumerate() {
        let mut acc = 0.0;
        for m in 0..4 {
            for n in 0..4 {
                if sm[m][n] == 0.0 {
                    continue;
                }
                for a in 0..4 {
                    for b in 0..4 {
                        acc += dr[l][m][n][a][b] * sm[a][b] * sm[m][n];
                    }
                }
            }
        }
        *fl = acc;
    }
    Ok(f)
}

/// Gravimagnetic body: transport plus gradient force and torque.
pub fn modified_rhs(state: &BodyState, st: &dyn Spacetime, params: &BodyParams) -> Result<BodyRhs> {
    let l = local(state, st, params)?;
    let mut out = transport(&l, state);
    let g = st.metric(&state.x)?;
    let mut xx = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            xx += g[a][b] * l.xdot[a] * l.xdot[b];
        }
    }
    if !(xx < 0.0) {
        return Err(domain(format!("velocity is not timelike (xdot^2 = {xx})")));
    }
    let root = (-xx).sqrt();
    let (m, c) = (params.m, params.c);
    if state.s.components().iter().any(|&v| v != 0.0) {
        let f = gradient_force(st, &state.x, &l.riem, &state.s)?;
        for mu in 0..4 {
            let raised: f64 = (0..4).map(|r| l.ginv[mu][r] * f[r]).sum();
            out.dp[mu] -= root / (32.0 * m * c) * raised;
        }
        let t = torque_term(&l.theta, &state.s, &l.ginv);
        out.ds = out.ds.add(&t.scale(root / (4.0 * m * c)));
    }
    Ok(out)
}

pub fn body_rhs(state: &BodyState, st: &dyn Spacetime, params: &BodyParams) -> Result<BodyRhs> {
    match state.kappa {
        Kappa::Mptd => mptd_rhs(state, st, params),
        Kappa::Gravimagnetic => modified_rhs(state, st, params),
    }
}

/// `alpha` of a spin one-half body, `3 hbar^2 / 4`.
pub fn spin_half_alpha(hbar: f64) -> f64 {
    0.75 * hbar * hbar
}

fn perm_sign(idx: [usize; 4]) -> f64 {
    let mut sign = 1.0;
    for i in 0..4 {
        for j in i + 1..4 {
            if idx[i] == idx[j] {
                return 0.0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Spin tensor obeying `S^{mu nu} P_nu = 0` built from a spatial spin direction
/// given in the static observer's frame, scaled so that `S^{mu nu} S_{mu nu} = ss`.
///
/// In the local frame `S^{ab} = 2 eps^{abcd} u_c s_d` with `eps^{0123} = -1`, so at
/// rest `S^{12} = 2 s_3`.
pub fn spin_from_vector(st: &dyn Spacetime, x: &FourVector, p: &FourVector, dir: &Vec3, ss: f64) -> Result<AntisymTensor4> {
    if ss == 0.0 {
        return Ok(AntisymTensor4::zero());
    }
    if !(ss > 0.0) {
        return Err(validation("S.S must be non-negative"));
    }
    let e = st.frame_diag(x)?;
    let mut u = [0.0; 4];
    for a in 0..4 {
        u[a] = e[a] * p[a];
    }
    let uu: f64 = (0..4).map(|a| ETA[a] * u[a] * u[a]).sum();
    if !(uu < 0.0) {
        return Err(domain("momentum must be timelike"));
    }
    let n = (-uu).sqrt();
    u.iter_mut().for_each(|v| *v /= n);
    let mut s = [0.0, dir[0], dir[1], dir[2]];
    let us: f64 = (0..4).map(|a| ETA[a] * u[a] * s[a]).sum();
    for a in 0..4 {
        s[a] += us * u[a];
    }
    let ul: Vec<f64> = (0..4).map(|a| ETA[a] * u[a]).collect();
    let sl: Vec<f64> = (0..4).map(|a| ETA[a] * s[a]).collect();
    let mut m = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    let eps = -perm_sign([a, b, c, d]);
                    if eps != 0.0 {
                        acc += 2.0 * eps * ul[c] * sl[d];
                    }
                }
            }
            m[a][b] = acc / (e[a] * e[b]);
        }
    }
    let tensor = AntisymTensor4::from_matrix(&m);
    let cur = tensor.square(&st.metric(x)?);
    if !(cur > 0.0) {
        return Err(validation("spin direction must have a part orthogonal to the velocity"));
    }
    Ok(tensor.scale((ss / cur).sqrt()))
}

/// Body on a circular geodesic at `r` with spin `S.S = 8 alpha lambda^2`.
pub fn circular_body(
    st: &Schwarzschild,
    r: f64,
    params: &BodyParams,
    dir: &Vec3,
    alpha: f64,
    lambda: f64,
    kappa: Kappa,
) -> Result<BodyState> {
    let (x, v) = crate::accel::circular_state(st, r, params.c)?;
    let p = v.map(|c| c * params.m);
    let s = spin_from_vector(st, &x, &p, dir, 8.0 * alpha * lambda * lambda)?;
    Ok(BodyState { x, p, s, tau: 0.0, kappa })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BodySample {
    pub tau: f64,
    pub x: FourVector,
    pub p: FourVector,
    pub s: AntisymTensor4,
    /// `S^{mu nu} S_{mu nu}`.
    pub ss: f64,
    /// `S^{mu nu} P_nu`.
    pub sp: FourVector,
    /// `P^2 + (mc)^2`.
    pub mass_shell: f64,
    pub r: f64,
    pub phi: f64,
    pub pr: f64,
    pub pphi: f64,
}

pub fn sample(state: &BodyState, st: &dyn Spacetime, params: &BodyParams) -> Result<BodySample> {
    let g = st.metric(&state.x)?;
    let mut pp = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            pp += g[a][b] * state.p[a] * state.p[b];
        }
    }
    let (r, phi, pr, pphi) = st.spherical_view(&state.x, &state.p);
    Ok(BodySample {
        tau: state.tau,
        x: state.x,
        p: state.p,
        s: state.s,
        ss: state.s.square(&g),
        sp: state.s.contract_lowered(&g, &state.p),
        mass_shell: pp + (params.m * params.c).powi(2),
        r,
        phi,
        pr,
        pphi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BodyTrajectory {
    pub samples: Vec<BodySample>,
    /// Step after which integration stopped near the horizon.
    pub horizon_stop: Option<usize>,
}

/// Stop once `r < HORIZON_MARGIN * r_s`.
pub const HORIZON_MARGIN: f64 = 1.05;

fn pack(s: &BodyState) -> [f64; 14] {
    let mut y = [0.0; 14];
    y[..4].copy_from_slice(&s.x);
    y[4..8].copy_from_slice(&s.p);
    y[8..].copy_from_slice(&s.s.components());
    y
}

fn unpack(y: &[f64; 14], tau: f64, kappa: Kappa) -> BodyState {
    let mut x = [0.0; 4];
    let mut p = [0.0; 4];
    let mut c = [0.0; 6];
    x.copy_from_slice(&y[..4]);
    p.copy_from_slice(&y[4..8]);
    c.copy_from_slice(&y[8..]);
    BodyState { x, p, s: AntisymTensor4::from_components(c), tau, kappa }
}

fn inside_margin(st: &dyn Spacetime, y: &[f64; 14]) -> bool {
    let x: [f64; 4] = y[..4].try_into().expect("four coordinates");
    st.horizon() > 0.0 && st.radius(&x) < HORIZON_MARGIN * st.horizon()
}

enum Advance {
    Done([f64; 14]),
    /// Reached the horizon margin after the given proper time.
    Stopped([f64; 14], f64),
}

/// One RK4 step. Near a horizon a step that leaves the exterior (in a stage
/// or at its end) is bisected until the margin check triggers.
fn advance(
    rhs: &mut impl FnMut(f64, &[f64; 14]) -> Result<[f64; 14]>,
    st: &dyn Spacetime,
    tau: f64,
    y: &[f64; 14],
    h: f64,
    depth: u32,
) -> Result<Advance> {
    let res = rk4_step(rhs, tau, y, h);
    let left_exterior = st.horizon() > 0.0
        && match &res {
            Ok(next) => st.radius(&next[..4].try_into().expect("four coordinates")) <= st.horizon(),
            Err(e) => matches!(e, Error::Domain(_)),
        };
    match res {
        _ if left_exterior && depth < 30 => {
            let first = match advance(rhs, st, tau, y, 0.5 * h, depth + 1)? {
                Advance::Done(mid) => mid,
                stopped => return Ok(stopped),
            };
            if inside_margin(st, &first) {
                return Ok(Advance::Stopped(first, 0.5 * h));
            }
            match advance(rhs, st, tau + 0.5 * h, &first, 0.5 * h, depth + 1)? {
                Advance::Done(end) if inside_margin(st, &end) => Ok(Advance::Stopped(end, h)),
                Advance::Done(end) => Ok(Advance::Done(end)),
                Advance::Stopped(end, dt) => Ok(Advance::Stopped(end, 0.5 * h + dt)),
            }
        }
        res => res.map(Advance::Done),
    }
}

pub fn integrate_body(
    state0: &BodyState,
    st: &dyn Spacetime,
    params: &BodyParams,
    dtau: f64,
    n_steps: usize,
) -> Result<BodyTrajectory> {
    params.validate()?;
    if !(dtau > 0.0) || !dtau.is_finite() {
        return Err(validation("step size must be positive"));
    }
    let kappa = state0.kappa;
    let mut y = pack(state0);
    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push(sample(state0, st, params)?);
    let mut horizon_stop = None;
    let mut rhs = |t: f64, y: &[f64; 14]| -> Result<[f64; 14]> {
        let d = body_rhs(&unpack(y, t, kappa), st, params)?;
        let mut out = [0.0; 14];
        out[..4].copy_from_slice(&d.dx);
        out[4..8].copy_from_slice(&d.dp);
        out[8..].copy_from_slice(&d.ds.components());
        Ok(out)
    };
    for step in 0..n_steps {
        let tau = state0.tau + step as f64 * dtau;
        let (next, t_next) = match advance(&mut rhs, st, tau, &y, dtau, 0) {
            Ok(Advance::Done(next)) => (next, tau + dtau),
            Ok(Advance::Stopped(next, dt)) => (next, tau + dt),
            Err(Error::Domain(reason) | Error::Numerical { reason, .. }) => return Err(Error::Numerical { step, reason }),
            Err(other) => return Err(other),
        };
        y = next;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical { step, reason: "non-finite state".into() });
        }
        let state = unpack(&y, t_next, kappa);
        samples.push(sample(&state, st, params).map_err(|e| Error::Numerical { step, reason: e.to_string() })?);
        if inside_margin(st, &y) {
            horizon_stop = Some(step);
            break;
        }
    }
    Ok(BodyTrajectory { samples, horizon_stop })
}

pub const CSV_HEADER: &str =
    "tau,t,r,phi,P0,Pr,Pphi,S01,S02,S03,S12,S13,S23,SS,SP0,SP1,SP2,SP3,mass_shell";

impl BodyTrajectory {
    pub fn to_csv(&self, c: f64) -> String {
        let mut out = String::with_capacity(self.samples.len() * 300);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let mut row: Vec<f64> = vec![s.tau, s.x[0] / c, s.r, s.phi, s.p[0], s.pr, s.pphi];
            row.extend(s.s.components());
            row.push(s.ss);
            row.extend(s.sp);
            row.push(s.mass_shell);
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Largest relative change of `S.S` from its initial value.
    pub fn ss_drift(&self) -> f64 {
        let s0 = self.samples[0].ss;
        let scale = if s0 == 0.0 { 1.0 } else { s0.abs() };
        self.samples.iter().map(|s| (s.ss - s0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn max_mass_shell(&self) -> f64 {
        self.samples.iter().map(|s| s.mass_shell.abs()).fold(0.0, f64::max)
    }

    pub fn max_ssc(&self) -> f64 {
        self.samples.iter().flat_map(|s| s.sp).map(f64::abs).fold(0.0, f64::max)
    }
}

/// Largest separation of the spatial coordinates of two trajectories over shared samples.
pub fn max_separation(a: &BodyTrajectory, b: &BodyTrajectory) -> f64 {
    a.samples
        .iter()
        .zip(&b.samples)
        .map(|(p, q)| (1..4).map(|i| (p.x[i] - q.x[i]).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaScaling {
    pub lambda: f64,
    pub diff_full: f64,
    pub diff_half: f64,
    /// `diff_full / diff_half`; quadratic dependence on spin gives 4.
    pub ratio: f64,
}

/// Separation between kappa = 1 and kappa = 0 runs at spin scale `lambda` and `lambda / 2`.
pub fn lambda_scaling(
    make: impl Fn(f64, Kappa) -> Result<BodyState> + Sync,
    st: &dyn Spacetime,
    params: &BodyParams,
    dtau: f64,
    n_steps: usize,
    lambda: f64,
) -> Result<LambdaScaling> {
    let diff = |l: f64| -> Result<f64> {
        let a = integrate_body(&make(l, Kappa::Mptd)?, st, params, dtau, n_steps)?;
        let b = integrate_body(&make(l, Kappa::Gravimagnetic)?, st, params, dtau, n_steps)?;
        Ok(max_separation(&a, &b))
    };
    let (full, half) = rayon::join(|| diff(lambda), || diff(0.5 * lambda));
    let (diff_full, diff_half) = (full?, half?);
    Ok(LambdaScaling { lambda, diff_full, diff_half, ratio: diff_full / diff_half })
}
