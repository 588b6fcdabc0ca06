//! Spacetime geometry: metric, Christoffel symbols, Riemann tensor.
//!
//! Coordinates are `x^0 = ct` plus three spatial coordinates, signature (-,+,+,+).
//! [`Schwarzschild`] uses `(ct, r, theta, phi)`; [`Minkowski`] uses Cartesian
//! coordinates so that free motion is a coordinate straight line.

use crate::error::{domain, Result};

pub type Metric = [[f64; 4]; 4];
/// `Gamma^mu_{alpha beta}` indexed `[mu][alpha][beta]`.
pub type Christoffel = [[[f64; 4]; 4]; 4];
/// `d_lambda Gamma^mu_{alpha beta}` indexed `[lambda][mu][alpha][beta]`.
pub type ChristoffelPartials = [Christoffel; 4];
/// Rank-4 tensor indexed `[mu][nu][alpha][beta]`.
pub type Rank4 = [[[[f64; 4]; 4]; 4]; 4];

/// How `d Gamma` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivatives {
    /// Central differences with step `1e-6` times the coordinate scale.
    FiniteDifference,
    /// Closed-form expressions, where the spacetime provides them.
    ClosedForm,
}

/// Relative step for central differences of geometric quantities.
pub const FD_RELATIVE_STEP: f64 = 1e-6;

pub trait Spacetime: Send + Sync {
    fn metric(&self, x: &[f64; 4]) -> Result<Metric>;

    fn inverse_metric(&self, x: &[f64; 4]) -> Result<Metric>;

    fn christoffel(&self, x: &[f64; 4]) -> Result<Christoffel>;

    /// Step used when differentiating along coordinate `lambda` at `x`.
    fn fd_step(&self, x: &[f64; 4], lambda: usize) -> f64;

    /// Spatial radius used for horizon monitoring and diagnostics.
    fn radius(&self, x: &[f64; 4]) -> f64;

    /// Diagonal orthonormal frame `e^a_mu` of a static observer at `x`.
    fn frame_diag(&self, x: &[f64; 4]) -> Result<[f64; 4]>;

    /// `(r, phi, P^r, P^phi)` of a point and vector, for reporting.
    fn spherical_view(&self, x: &[f64; 4], p: &[f64; 4]) -> (f64, f64, f64, f64);

    /// Horizon radius (0 when there is none).
    fn horizon(&self) -> f64 {
        0.0
    }

    fn christoffel_partials(&self, x: &[f64; 4]) -> Result<ChristoffelPartials> {
        central_partials(x, |l| self.fd_step(x, l), |q| self.christoffel(q))
    }

    /// `R^mu_{nu alpha beta} = d_alpha Gamma^mu_{nu beta} - d_beta Gamma^mu_{nu alpha}
    ///  + Gamma^mu_{alpha lambda} Gamma^lambda_{nu beta} - Gamma^mu_{beta lambda} Gamma^lambda_{nu alpha}`.
    fn riemann_mixed(&self, x: &[f64; 4]) -> Result<Rank4> {
        let g = self.christoffel(x)?;
        let d = self.christoffel_partials(x)?;
        Ok(riemann_from(&g, &d))
    }

    /// All-lower `R_{mu nu alpha beta}`.
    fn riemann(&self, x: &[f64; 4]) -> Result<Rank4> {
        let up = self.riemann_mixed(x)?;
        let g = self.metric(x)?;
        Ok(lower_first(&g, &up))
    }
}

fn central_partials<T, F>(x: &[f64; 4], step: impl Fn(usize) -> f64, f: F) -> Result<[T; 4]>
where
    T: Copy + Default + FdArith,
    F: Fn(&[f64; 4]) -> Result<T>,
{
    let mut out = [T::default(); 4];
    for (l, o) in out.iter_mut().enumerate() {
        let h = step(l);
        let mut up = *x;
        let mut dn = *x;
        up[l] += h;
        dn[l] -= h;
        let width = up[l] - dn[l];
        *o = T::diff_quot(&f(&up)?, &f(&dn)?, width);
    }
    Ok(out)
}

/// Element-wise `(a - b) / w` on nested arrays.
pub(crate) trait FdArith {
    fn diff_quot(a: &Self, b: &Self, w: f64) -> Self;
}

impl FdArith for f64 {
    fn diff_quot(a: &Self, b: &Self, w: f64) -> Self {
        (a - b) / w
    }
}

impl<T: FdArith + Copy + Default, const N: usize> FdArith for [T; N] {
    fn diff_quot(a: &Self, b: &Self, w: f64) -> Self {
        let mut out = [T::default(); N];
        for i in 0..N {
            out[i] = T::diff_quot(&a[i], &b[i], w);
        }
        out
    }
}

/// Central-difference partials `d_lambda T` of any nested-array field.
pub(crate) fn partials_of<T, F>(st: &dyn Spacetime, x: &[f64; 4], f: F) -> Result<[T; 4]>
where
    T: Copy + Default + FdArith,
    F: Fn(&[f64; 4]) -> Result<T>,
{
    central_partials(x, |l| st.fd_step(x, l), f)
}

pub fn riemann_from(g: &Christoffel, d: &ChristoffelPartials) -> Rank4 {
    let mut r = [[[[0.0; 4]; 4]; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    let mut v = d[a][mu][nu][b] - d[b][mu][nu][a];
                    for l in 0..4 {
                        v += g[mu][a][l] * g[l][nu][b] - g[mu][b][l] * g[l][nu][a];
                    }
                    r[mu][nu][a][b] = v;
                }
            }
        }
    }
    r
}

pub fn lower_first(g: &Metric, up: &Rank4) -> Rank4 {
    let mut r = [[[[0.0; 4]; 4]; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    r[mu][nu][a][b] = (0..4).map(|l| g[mu][l] * up[l][nu][a][b]).sum();
                }
            }
        }
    }
    r
}

/// `R_{mu nu alpha beta} R^{mu nu alpha beta}` for a diagonal inverse metric.
pub fn kretschmann(r: &Rank4, ginv: &Metric) -> f64 {
    let mut acc = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    let w = ginv[mu][mu] * ginv[nu][nu] * ginv[a][a] * ginv[b][b];
                    acc += w * r[mu][nu][a][b] * r[mu][nu][a][b];
                }
            }
        }
    }
    acc
}

/// Christoffel symbols from central differences of the metric.
pub fn christoffel_from_metric(st: &dyn Spacetime, x: &[f64; 4]) -> Result<Christoffel> {
    let ginv = st.inverse_metric(x)?;
    let dg: [Metric; 4] = partials_of(st, x, |q| st.metric(q))?;
    let mut out = [[[0.0; 4]; 4]; 4];
    for mu in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                out[mu][a][b] = (0..4)
                    .map(|l| 0.5 * ginv[mu][l] * (dg[a][l][b] + dg[b][l][a] - dg[l][a][b]))
                    .sum();
            }
        }
    }
    Ok(out)
}

/// Flat spacetime in Cartesian coordinates `(ct, x, y, z)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Minkowski;

impl Spacetime for Minkowski {
    fn metric(&self, _x: &[f64; 4]) -> Result<Metric> {
        Ok(diag([-1.0, 1.0, 1.0, 1.0]))
    }

    fn inverse_metric(&self, _x: &[f64; 4]) -> Result<Metric> {
        Ok(diag([-1.0, 1.0, 1.0, 1.0]))
    }

    fn christoffel(&self, _x: &[f64; 4]) -> Result<Christoffel> {
        Ok([[[0.0; 4]; 4]; 4])
    }

    fn fd_step(&self, x: &[f64; 4], lambda: usize) -> f64 {
        FD_RELATIVE_STEP * x[lambda].abs().max(1.0)
    }

    fn radius(&self, x: &[f64; 4]) -> f64 {
        (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt()
    }

    fn christoffel_partials(&self, _x: &[f64; 4]) -> Result<ChristoffelPartials> {
        Ok([[[[0.0; 4]; 4]; 4]; 4])
    }

    fn frame_diag(&self, _x: &[f64; 4]) -> Result<[f64; 4]> {
        Ok([1.0; 4])
    }

    fn spherical_view(&self, x: &[f64; 4], p: &[f64; 4]) -> (f64, f64, f64, f64) {
        let r = self.radius(x);
        let rho2 = x[1] * x[1] + x[2] * x[2];
        let pr = if r > 0.0 { (x[1] * p[1] + x[2] * p[2] + x[3] * p[3]) / r } else { 0.0 };
        let pphi = if rho2 > 0.0 { (x[1] * p[2] - x[2] * p[1]) / rho2 } else { 0.0 };
        (r, x[2].atan2(x[1]), pr, pphi)
    }
}

fn diag(d: [f64; 4]) -> Metric {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        m[i][i] = d[i];
    }
    m
}

/// Schwarzschild exterior in coordinates `(ct, r, theta, phi)`.
#[derive(Debug, Clone, Copy)]
pub struct Schwarzschild {
    /// Schwarzschild radius `r_s`.
    pub rs: f64,
    pub derivatives: Derivatives,
}

impl Schwarzschild {
    pub fn new(rs: f64) -> Self {
        Self { rs, derivatives: Derivatives::FiniteDifference }
    }

    pub fn with_derivatives(mut self, d: Derivatives) -> Self {
        self.derivatives = d;
        self
    }

    fn check(&self, x: &[f64; 4]) -> Result<(f64, f64)> {
        let r = x[1];
        if !(r > self.rs) || !r.is_finite() {
            return Err(domain(format!("r = {r} is not outside r_s = {}", self.rs)));
        }
        let s = x[2].sin();
        if s.abs() < 1e-6 {
            return Err(domain(format!("theta = {} is too close to a coordinate pole", x[2])));
        }
        Ok((r, x[2]))
    }

    /// `f = 1 - r_s / r`.
    pub fn lapse2(&self, r: f64) -> f64 {
        1.0 - self.rs / r
    }

    /// Static-observer orthonormal frame `e^a_mu` (diagonal entries) and its
    /// partials along `r` and `theta`.
    pub fn static_frame(&self, x: &[f64; 4]) -> Result<StaticFrame> {
        let (r, th) = self.check(x)?;
        let f = self.lapse2(r);
        let fp = self.rs / (r * r);
        let sf = f.sqrt();
        let (s, c) = th.sin_cos();
        Ok(StaticFrame {
            e: [sf, 1.0 / sf, r, r * s],
            de_dr: [fp / (2.0 * sf), -fp / (2.0 * f * sf), 1.0, s],
            de_dtheta: [0.0, 0.0, 0.0, r * c],
        })
    }

    /// Closed-form `d_lambda Gamma`.
    pub fn christoffel_partials_exact(&self, x: &[f64; 4]) -> Result<ChristoffelPartials> {
        let (r, th) = self.check(x)?;
        let rs = self.rs;
        let f = self.lapse2(r);
        let fp = rs / (r * r);
        let fpp = -2.0 * rs / (r * r * r);
        let (s, c) = th.sin_cos();
        let mut d = [[[[0.0; 4]; 4]; 4]; 4];
        let q = (fpp * f - fp * fp) / (2.0 * f * f);
        // d_r
        set_sym(&mut d[1][0], 0, 1, q);
        d[1][1][0][0] = 0.5 * (fp * fp + f * fpp);
        d[1][1][1][1] = -q;
        d[1][1][2][2] = -1.0;
        d[1][1][3][3] = -s * s;
        set_sym(&mut d[1][2], 1, 2, -1.0 / (r * r));
        set_sym(&mut d[1][3], 1, 3, -1.0 / (r * r));
        // d_theta
        d[2][1][3][3] = -(r - rs) * 2.0 * s * c;
        d[2][2][3][3] = -(c * c - s * s);
        set_sym(&mut d[2][3], 2, 3, -1.0 / (s * s));
        Ok(d)
    }
}

fn set_sym(g: &mut [[f64; 4]; 4], a: usize, b: usize, v: f64) {
    g[a][b] = v;
    g[b][a] = v;
}

/// Diagonal static tetrad: hat components `v^a = e[a] v^a` (no sum).
#[derive(Debug, Clone, Copy)]
pub struct StaticFrame {
    pub e: [f64; 4],
    pub de_dr: [f64; 4],
    pub de_dtheta: [f64; 4],
}

impl Spacetime for Schwarzschild {
    fn metric(&self, x: &[f64; 4]) -> Result<Metric> {
        let (r, th) = self.check(x)?;
        let f = self.lapse2(r);
        let s = th.sin();
        Ok(diag([-f, 1.0 / f, r * r, r * r * s * s]))
    }

    fn inverse_metric(&self, x: &[f64; 4]) -> Result<Metric> {
        let (r, th) = self.check(x)?;
        let f = self.lapse2(r);
        let s = th.sin();
        Ok(diag([-1.0 / f, f, 1.0 / (r * r), 1.0 / (r * r * s * s)]))
    }

    fn christoffel(&self, x: &[f64; 4]) -> Result<Christoffel> {
        let (r, th) = self.check(x)?;
        let f = self.lapse2(r);
        let fp = self.rs / (r * r);
        let (s, c) = th.sin_cos();
        let mut g = [[[0.0; 4]; 4]; 4];
        set_sym(&mut g[0], 0, 1, fp / (2.0 * f));
        g[1][0][0] = 0.5 * f * fp;
        g[1][1][1] = -fp / (2.0 * f);
        g[1][2][2] = -(r - self.rs);
        g[1][3][3] = -(r - self.rs) * s * s;
        set_sym(&mut g[2], 1, 2, 1.0 / r);
        g[2][3][3] = -s * c;
        set_sym(&mut g[3], 1, 3, 1.0 / r);
        set_sym(&mut g[3], 2, 3, c / s);
        Ok(g)
    }

    fn fd_step(&self, x: &[f64; 4], lambda: usize) -> f64 {
        match lambda {
            1 => FD_RELATIVE_STEP * x[1].abs(),
            2 => FD_RELATIVE_STEP,
            _ => FD_RELATIVE_STEP * x[lambda].abs().max(1.0),
        }
    }

    fn radius(&self, x: &[f64; 4]) -> f64 {
        x[1]
    }

    fn horizon(&self) -> f64 {
        self.rs
    }

    fn frame_diag(&self, x: &[f64; 4]) -> Result<[f64; 4]> {
        Ok(self.static_frame(x)?.e)
    }

    fn spherical_view(&self, x: &[f64; 4], p: &[f64; 4]) -> (f64, f64, f64, f64) {
        (x[1], x[3], p[1], p[3])
    }

    fn christoffel_partials(&self, x: &[f64; 4]) -> Result<ChristoffelPartials> {
        match self.derivatives {
            Derivatives::ClosedForm => self.christoffel_partials_exact(x),
            Derivatives::FiniteDifference => {
                self.check(x)?;
                partials_of(self, x, |q| self.christoffel(q))
            }
        }
    }
}

/// Closed-form Kretschmann scalar of Schwarzschild, `12 r_s^2 / r^6`.
pub fn schwarzschild_kretschmann(rs: f64, r: f64) -> f64 {
    12.0 * rs * rs / r.powi(6)
}
