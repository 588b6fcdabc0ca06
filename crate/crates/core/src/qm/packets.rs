//! Momentum-grid wave packets on a line `p = (p_x, p_perp, 0)`.
//!
//! Position is `i hbar d/dp_x`, taken spectrally (the grid is periodic with
//! generous padding) or by central differences. Positive-energy packets
//! evolve by a phase per node and move on straight lines; mixing in the
//! negative-energy branch of the Dirac Hamiltonian produces the trembling
//! motion at `2 m c^2 / hbar`.

use std::sync::Arc;

use nalgebra::{Vector2, Vector4};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::identities::{position_matrix, pryce_spin};
use super::{OnShellMomentum, QmParams};
use crate::error::{validation, Result};
use crate::fit::linear_fit;
use crate::tensor::{identity4, DiracConstants, Vec3};

/// Uniform grid `p_k = (k - (n - 1)/2) dp`, symmetric about zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumGrid {
    pub n: usize,
    pub dp: f64,
}

impl MomentumGrid {
    pub fn new(n: usize, dp: f64) -> Result<Self> {
        if n < 8 || !(dp > 0.0) || !dp.is_finite() {
            return Err(validation(format!("bad grid (n = {n}, dp = {dp})")));
        }
        Ok(Self { n, dp })
    }

    pub fn node(&self, k: usize) -> f64 {
        (k as f64 - (self.n as f64 - 1.0) / 2.0) * self.dp
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    /// Largest position the grid resolves, `pi hbar / dp`.
    pub fn position_range(&self, hbar: f64) -> f64 {
        std::f64::consts::PI * hbar / self.dp
    }
}

/// Gaussian envelope `exp(-(p - center)^2 / (4 width^2))`, so `width` is the
/// standard deviation of `|psi|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gaussian {
    pub center: f64,
    pub width: f64,
}

impl Gaussian {
    pub fn amplitude(&self, p: f64) -> f64 {
        (-(p - self.center).powi(2) / (4.0 * self.width * self.width)).exp()
    }

    /// Position-space width `hbar / (2 width)`.
    pub fn position_width(&self, hbar: f64) -> f64 {
        hbar / (2.0 * self.width)
    }
}

/// Default grid: 512 nodes, eight nodes per momentum width.
pub const DEFAULT_NODES: usize = 512;
pub const NODES_PER_WIDTH: f64 = 8.0;

pub fn default_grid(width: f64) -> Result<MomentumGrid> {
    MomentumGrid::new(DEFAULT_NODES, width / NODES_PER_WIDTH)
}

/// `K`-component amplitudes at each grid node, on the line with fixed `p_perp`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField<const K: usize> {
    pub grid: MomentumGrid,
    pub p_perp: f64,
    pub amps: Vec<[Complex64; K]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Derivative {
    Spectral,
    Central,
}

impl<const K: usize> SpinorField<K> {
    pub fn momentum(&self, k: usize) -> [f64; 3] {
        [self.grid.node(k), self.p_perp, 0.0]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dp
    }

    /// `d psi / dp_x` per component.
    pub fn derivative(&self, how: Derivative, fft: &FftPair) -> Vec<[Complex64; K]> {
        let n = self.grid.n;
        let mut out = vec![[Complex64::ZERO; K]; n];
        match how {
            Derivative::Central => {
                let inv = 1.0 / (2.0 * self.grid.dp);
                for k in 0..n {
                    let (up, dn) = ((k + 1) % n, (k + n - 1) % n);
                    for c in 0..K {
                        out[k][c] = (self.amps[up][c] - self.amps[dn][c]) * inv;
                    }
                }
            }
            Derivative::Spectral => {
                let mut buf = vec![Complex64::ZERO; n];
                let len = n as f64 * self.grid.dp;
                for c in 0..K {
                    for k in 0..n {
                        buf[k] = self.amps[k][c];
                    }
                    fft.forward.process(&mut buf);
                    for (m, z) in buf.iter_mut().enumerate() {
                        let mm = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                        let kk = if 2 * m == n { 0.0 } else { std::f64::consts::TAU * mm / len };
                        *z *= Complex64::new(0.0, kk / n as f64);
                    }
                    fft.inverse.process(&mut buf);
                    for k in 0..n {
                        out[k][c] = buf[k];
                    }
                }
            }
        }
        out
    }
}

/// Forward and inverse transforms of one length.
pub struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }
}

fn check_resolution(grid: &MomentumGrid, packet: &Gaussian) -> Result<()> {
    if packet.width < 4.0 * grid.dp {
        return Err(validation(format!(
            "packet width {} is below four grid spacings ({})",
            packet.width,
            4.0 * grid.dp
        )));
    }
    let half = grid.node(grid.n - 1);
    if packet.center.abs() + 8.0 * packet.width > half {
        return Err(validation("packet does not fit inside the momentum grid"));
    }
    Ok(())
}

/// Positive-energy packet with a fixed two-spinor.
pub fn positive_packet(
    grid: MomentumGrid,
    packet: Gaussian,
    p_perp: f64,
    spinor: Vector2<Complex64>,
) -> Result<SpinorField<2>> {
    check_resolution(&grid, &packet)?;
    let chi = spinor.try_normalize(0.0).ok_or_else(|| validation("spinor must be nonzero"))?;
    let amps: Vec<[Complex64; 2]> = (0..grid.n)
        .map(|k| {
            let g = packet.amplitude(grid.node(k));
            [chi[0] * g, chi[1] * g]
        })
        .collect();
    let mut f = SpinorField { grid, p_perp, amps };
    let n = f.norm().sqrt();
    f.amps.iter_mut().flatten().for_each(|z| *z /= n);
    Ok(f)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PositiveSeries {
    pub t: Vec<f64>,
    pub norm: Vec<f64>,
    /// `<X>` with the spectral derivative.
    pub x: Vec<f64>,
    /// `<X>` with central differences.
    pub x_central: Vec<f64>,
    pub spin: Vec<[f64; 3]>,
}

fn sample_times(t_final: f64, n_samples: usize) -> Result<Vec<f64>> {
    if n_samples < 2 || !(t_final > 0.0) || !t_final.is_finite() {
        return Err(validation("need T > 0 and at least two samples"));
    }
    Ok((0..n_samples).map(|j| t_final * j as f64 / (n_samples - 1) as f64).collect())
}

fn expectation(num: f64, norm: f64) -> f64 {
    if norm > 0.0 {
        num / norm
    } else {
        0.0
    }
}

fn positive_observables(
    f: &SpinorField<2>,
    q: &QmParams,
    fft: &FftPair,
    d: &DiracConstants,
) -> (f64, f64, f64, [f64; 3]) {
    let norm = f.norm();
    let dp = f.grid.dp;
    let ih = Complex64::new(0.0, q.hbar);
    let mut xs = [0.0; 2];
    for (slot, how) in [Derivative::Spectral, Derivative::Central].into_iter().enumerate() {
        let dpsi = f.derivative(how, fft);
        let mut acc = 0.0;
        for k in 0..f.grid.n {
            let psi = Vector2::new(f.amps[k][0], f.amps[k][1]);
            let a = position_matrix(&f.momentum(k), q)[0];
            let xpsi = Vector2::new(dpsi[k][0], dpsi[k][1]) * ih + a * psi;
            acc += psi.dotc(&xpsi).re;
        }
        xs[slot] = expectation(acc * dp, norm);
    }
    let mut s = [0.0; 3];
    for k in 0..f.grid.n {
        let psi = Vector2::new(f.amps[k][0], f.amps[k][1]);
        let p = f.momentum(k);
        let ops = pryce_spin(d, &OnShellMomentum::new(Vec3::new(p[0], p[1], p[2]), q.m, q.c), q);
        for i in 0..3 {
            s[i] += psi.dotc(&(ops[i] * psi)).re * dp;
        }
    }
    (norm, xs[0], xs[1], s.map(|v| expectation(v, norm)))
}

/// Evolves `i hbar dPsi/dt = c sqrt(p^2 + (mc)^2) Psi` exactly, sampling observables.
pub fn evolve_positive_energy(
    field: &SpinorField<2>,
    q: &QmParams,
    t_final: f64,
    n_samples: usize,
) -> Result<PositiveSeries> {
    q.validate()?;
    let times = sample_times(t_final, n_samples)?;
    let fft = FftPair::new(field.grid.n);
    let d = DiracConstants::new();
    let energy: Vec<f64> = (0..field.grid.n)
        .map(|k| {
            let p = field.momentum(k);
            q.c * (p.iter().map(|v| v * v).sum::<f64>() + q.mc() * q.mc()).sqrt()
        })
        .collect();
    let mut out = PositiveSeries::default();
    let mut f = field.clone();
    for &t in &times {
        for (k, a) in f.amps.iter_mut().enumerate() {
            let ph = Complex64::from_polar(1.0, -energy[k] * t / q.hbar);
            *a = [field.amps[k][0] * ph, field.amps[k][1] * ph];
        }
        let (norm, x, xc, s) = positive_observables(&f, q, &fft, &d);
        out.t.push(t);
        out.norm.push(norm);
        out.x.push(x);
        out.x_central.push(xc);
        out.spin.push(s);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositiveSummary {
    pub norm_drift: f64,
    /// Largest deviation of `<X>(t)` from its straight-line fit, in units of the packet width.
    pub x_linear_residual: f64,
    pub velocity: f64,
    pub spin_drift: f64,
    /// Spectral/central disagreement of `<X>` at `t = 0`, in units of the packet width.
    /// Later samples carry the energy phase, which central differences resolve poorly.
    pub derivative_gap: f64,
}

impl PositiveSeries {
    pub fn summary(&self, position_width: f64) -> Result<PositiveSummary> {
        let n0 = self.norm[0];
        let norm_drift = self.norm.iter().map(|n| ((n - n0) / n0).abs()).fold(0.0, f64::max);
        let fit = linear_fit(&self.t, &self.x)?;
        let s0 = self.spin[0];
        let spin_drift = self
            .spin
            .iter()
            .flat_map(|s| (0..3).map(move |i| (s[i] - s0[i]).abs()))
            .fold(0.0, f64::max);
        let derivative_gap = (self.x[0] - self.x_central[0]).abs() / position_width;
        Ok(PositiveSummary {
            norm_drift,
            x_linear_residual: fit.max_residual / position_width,
            velocity: fit.slope,
            spin_drift,
            derivative_gap,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,obs_name,value\n");
        for (j, t) in self.t.iter().enumerate() {
            let rows = [
                ("norm", self.norm[j]),
                ("X", self.x[j]),
                ("S1", self.spin[j][0]),
                ("S2", self.spin[j][1]),
                ("S3", self.spin[j][2]),
            ];
            for (name, v) in rows {
                out.push_str(&format!("{t:?},{name},{v:?}\n"));
            }
        }
        out
    }
}

/// Dirac packet `g(p) (sqrt(1 - w) u_+(p) + sqrt(w) u_-(p))`, where `u_+-` are
/// the normalized projections of `(1,0,0,0)` and `(0,0,0,1)` onto the two
/// energy branches.
pub fn dirac_mixture(grid: MomentumGrid, packet: Gaussian, negative_weight: f64, q: &QmParams) -> Result<SpinorField<4>> {
    check_resolution(&grid, &packet)?;
    if !(0.0..=1.0).contains(&negative_weight) {
        return Err(validation("negative-branch weight must lie in [0, 1]"));
    }
    let d = DiracConstants::new();
    let (wp, wm) = ((1.0 - negative_weight).sqrt(), negative_weight.sqrt());
    let chi_p = Vector4::new(Complex64::ONE, Complex64::ZERO, Complex64::ZERO, Complex64::ZERO);
    let chi_m = Vector4::new(Complex64::ZERO, Complex64::ZERO, Complex64::ZERO, Complex64::ONE);
    let amps: Vec<[Complex64; 4]> = (0..grid.n)
        .map(|k| {
            let p = [grid.node(k), 0.0, 0.0];
            let h = d.hamiltonian(&p, q.m, q.c);
            let e = q.c * (p[0] * p[0] + q.mc() * q.mc()).sqrt();
            let proj = |sign: f64| (identity4() + h * Complex64::from(sign / e)) * Complex64::from(0.5);
            let up = (proj(1.0) * chi_p).normalize();
            let um = (proj(-1.0) * chi_m).normalize();
            let v = (up * Complex64::from(wp) + um * Complex64::from(wm)) * Complex64::from(packet.amplitude(p[0]));
            [v[0], v[1], v[2], v[3]]
        })
        .collect();
    let mut f = SpinorField { grid, p_perp: 0.0, amps };
    let n = f.norm().sqrt();
    if n > 0.0 {
        f.amps.iter_mut().flatten().for_each(|z| *z /= n);
    }
    Ok(f)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiracSeries {
    pub t: Vec<f64>,
    pub norm: Vec<f64>,
    /// Naive `<i hbar d/dp>`.
    pub x: Vec<f64>,
}

/// Exact per-node evolution `exp(-iHt/hbar) = cos(Et/hbar) - i sin(Et/hbar) H / E`.
pub fn evolve_dirac_packet(field: &SpinorField<4>, q: &QmParams, t_final: f64, n_samples: usize) -> Result<DiracSeries> {
    q.validate()?;
    let times = sample_times(t_final, n_samples)?;
    let fft = FftPair::new(field.grid.n);
    let d = DiracConstants::new();
    let nodes: Vec<(f64, nalgebra::Matrix4<Complex64>)> = (0..field.grid.n)
        .map(|k| {
            let p = field.momentum(k);
            let e = q.c * (p.iter().map(|v| v * v).sum::<f64>() + q.mc() * q.mc()).sqrt();
            (e, d.hamiltonian(&p, q.m, q.c) * Complex64::from(1.0 / e))
        })
        .collect();
    let mut out = DiracSeries::default();
    let mut f = field.clone();
    let ih = Complex64::new(0.0, q.hbar);
    for &t in &times {
        for (k, a) in f.amps.iter_mut().enumerate() {
            let (e, hn) = &nodes[k];
            let (s, c) = (e * t / q.hbar).sin_cos();
            let u = identity4() * Complex64::from(c) - hn * Complex64::new(0.0, s);
            let v = u * Vector4::from(field.amps[k]);
            *a = [v[0], v[1], v[2], v[3]];
        }
        let norm = f.norm();
        let dpsi = f.derivative(Derivative::Spectral, &fft);
        let mut acc = 0.0;
        for k in 0..f.grid.n {
            for c in 0..4 {
                acc += (f.amps[k][c].conj() * ih * dpsi[k][c]).re;
            }
        }
        out.t.push(t);
        out.norm.push(norm);
        out.x.push(expectation(acc * f.grid.dp, norm));
    }
    Ok(out)
}

/// Dominant oscillation of a detrended series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Oscillation {
    /// Angular frequency.
    pub omega: f64,
    /// `sqrt(2)` times the RMS of the detrended series.
    pub amplitude: f64,
}

/// Detrends by a linear fit, then locates the peak of the Hann-windowed
/// spectrum with parabolic interpolation of the peak bin.
pub fn dominant_oscillation(t: &[f64], x: &[f64]) -> Result<Oscillation> {
    let n = t.len();
    if n < 16 || x.len() != n {
        return Err(validation("need at least 16 equally spaced samples"));
    }
    let dt = t[1] - t[0];
    let fit = linear_fit(t, x)?;
    let resid: Vec<f64> = t.iter().zip(x).map(|(t, x)| x - (fit.slope * t + fit.intercept)).collect();
    let amplitude = (2.0 * resid.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
    let mut buf: Vec<Complex64> = resid
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let w = 0.5 - 0.5 * (std::f64::consts::TAU * j as f64 / (n - 1) as f64).cos();
            Complex64::from(r * w)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..n / 2].iter().map(|z| z.norm()).collect();
    let (peak, _) = mag
        .iter()
        .enumerate()
        .skip(1)
        .fold((1, f64::MIN), |best, (k, &m)| if m > best.1 { (k, m) } else { best });
    let shift = if peak + 1 < mag.len() {
        let (a, b, c) = (mag[peak - 1], mag[peak], mag[peak + 1]);
        let den = a - 2.0 * b + c;
        if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 }
    } else {
        0.0
    };
    let omega = std::f64::consts::TAU * (peak as f64 + shift) / (n as f64 * dt);
    Ok(Oscillation { omega, amplitude })
}

impl DiracSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,obs_name,value\n");
        for (j, t) in self.t.iter().enumerate() {
            out.push_str(&format!("{t:?},norm,{:?}\n{t:?},x,{:?}\n", self.norm[j], self.x[j]));
        }
        out
    }
}

/// Standard trembling-motion run: width `0.02 mc` at `p = 0`, `T = 200 pi hbar / (mc^2)`, 2048 samples.
pub fn zitterbewegung_run(q: &QmParams, negative_weight: f64) -> Result<(DiracSeries, Oscillation)> {
    let packet = Gaussian { center: 0.0, width: 0.02 * q.mc() };
    let f = dirac_mixture(default_grid(packet.width)?, packet, negative_weight, q)?;
    let t_final = 200.0 * std::f64::consts::PI * q.hbar / (q.m * q.c * q.c);
    let s = evolve_dirac_packet(&f, q, t_final, 2048)?;
    let osc = dominant_oscillation(&s.t, &s.x)?;
    Ok((s, osc))
}

/// Standard free positive-energy run used by the checks.
pub fn positive_run(q: &QmParams) -> Result<(PositiveSeries, PositiveSummary)> {
    let packet = Gaussian { center: 0.4 * q.mc(), width: 0.1 * q.mc() };
    let grid = default_grid(packet.width)?;
    let spinor = Vector2::new(Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6));
    let f = positive_packet(grid, packet, 0.3 * q.mc(), spinor)?;
    let t_final = 40.0 * q.hbar / (q.m * q.c * q.c);
    let s = evolve_positive_energy(&f, q, t_final, 201)?;
    let summary = s.summary(packet.position_width(q.hbar))?;
    Ok((s, summary))
}
