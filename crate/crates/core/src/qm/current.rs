//! The conserved current of positive-energy two-component solutions,
//! `I^mu[psi, phi] = (sigma-bar p psi)^dag sigma^mu (sigma-bar p phi) / (mc)^2 - psi^dag sigma-bar^mu phi`,
//! sampled on a periodic line and differentiated by central differences.

use nalgebra::Vector2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{OnShellMomentum, QmParams};
use crate::error::{validation, Result};
use crate::tensor::{DiracConstants, Vec3};

/// `amp * exp(i (p x - E t) / hbar)` with momentum `p` along `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub p: f64,
    pub amp: Vector2<Complex64>,
}

/// Superposition of positive-energy plane waves.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub waves: Vec<PlaneWave>,
}

impl Solution {
    /// `psi` and `(sigma-bar p-hat) psi` at `(t, x)`.
    pub fn eval(&self, d: &DiracConstants, q: &QmParams, t: f64, x: f64) -> (Vector2<Complex64>, Vector2<Complex64>) {
        let mut psi = Vector2::zeros();
        let mut spsi = Vector2::zeros();
        for w in &self.waves {
            let p = OnShellMomentum::new(Vec3::new(w.p, 0.0, 0.0), q.m, q.c);
            let phase = Complex64::from_polar(1.0, (w.p * x - q.c * p.p0 * t) / q.hbar);
            let v = w.amp * phase;
            psi += v;
            spsi += d.sigma_bar_dot(&p.lowered()) * v;
        }
        (psi, spsi)
    }
}

/// `I^mu[psi, phi]` at a point.
pub fn current(d: &DiracConstants, q: &QmParams, psi: &Solution, phi: &Solution, t: f64, x: f64) -> [Complex64; 4] {
    let (a, sa) = psi.eval(d, q, t, x);
    let (b, sb) = phi.eval(d, q, t, x);
    let k = 1.0 / (q.mc() * q.mc());
    std::array::from_fn(|mu| sa.dotc(&(d.sigma[mu] * sb)) * k - a.dotc(&(d.sigma_bar[mu] * b)))
}

/// Resolution of one conservation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurrentGrid {
    /// Periodic box length; every momentum must be a multiple of `2 pi hbar / length`.
    pub length: f64,
    /// Grid points per beat wavelength `2 pi hbar / max |p_i - p_j|`.
    pub points_per_beat: usize,
    /// Times at which the divergence and charge are sampled.
    pub times: usize,
    pub t_final: f64,
}

/// Minimum points per beat wavelength accepted.
pub const MIN_POINTS_PER_BEAT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurrentResidual {
    pub dx: f64,
    pub dt: f64,
    /// `max |d_mu I^mu|` relative to `max |I^mu|`.
    pub divergence: f64,
    /// Largest relative change of `int I^0 dx` over the sampled times.
    pub charge_drift: f64,
    /// Smallest `I^0[psi, psi]` on the grid, relative to its largest value.
    pub min_density: f64,
}

fn beat_wavelength(sols: &[&Solution], hbar: f64) -> Result<f64> {
    let ps: Vec<f64> = sols.iter().flat_map(|s| s.waves.iter().map(|w| w.p)).collect();
    let mut spread: f64 = 0.0;
    for a in &ps {
        for b in &ps {
            spread = spread.max((a - b).abs());
        }
    }
    if spread == 0.0 {
        return Err(validation("need at least two distinct momenta to resolve a beat"));
    }
    Ok(std::f64::consts::TAU * hbar / spread)
}

pub fn current_conservation(psi: &Solution, phi: &Solution, q: &QmParams, g: &CurrentGrid) -> Result<CurrentResidual> {
    q.validate()?;
    if g.points_per_beat < MIN_POINTS_PER_BEAT {
        return Err(validation(format!(
            "{} points per beat wavelength is below the minimum {MIN_POINTS_PER_BEAT}",
            g.points_per_beat
        )));
    }
    if g.times < 2 || !(g.t_final > 0.0) {
        return Err(validation("need at least two sample times and T > 0"));
    }
    let quantum = std::f64::consts::TAU * q.hbar / g.length;
    for w in psi.waves.iter().chain(&phi.waves) {
        let n = w.p / quantum;
        if (n - n.round()).abs() > 1e-9 {
            return Err(validation(format!("momentum {} is not periodic on the box", w.p)));
        }
    }
    let beat = beat_wavelength(&[psi, phi], q.hbar)?;
    let dx = beat / g.points_per_beat as f64;
    let nx = (g.length / dx).round() as usize;
    let dx = g.length / nx as f64;
    let dt = dx / q.c;
    let d = DiracConstants::new();
    let times: Vec<f64> = (0..g.times).map(|j| g.t_final * j as f64 / (g.times - 1) as f64).collect();

    let per_time: Vec<(f64, f64, f64, f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let mut div: f64 = 0.0;
            let mut scale: f64 = 0.0;
            let mut charge = 0.0;
            let mut dmin = f64::INFINITY;
            let mut dmax: f64 = 0.0;
            for i in 0..nx {
                let x = i as f64 * dx;
                for (a, b) in [(psi, phi), (psi, psi)] {
                    let here = current(&d, q, a, b, t, x);
                    let tp = current(&d, q, a, b, t + dt, x)[0];
                    let tm = current(&d, q, a, b, t - dt, x)[0];
                    let xp = current(&d, q, a, b, t, x + dx)[1];
                    let xm = current(&d, q, a, b, t, x - dx)[1];
                    let dv = (tp - tm) / (2.0 * q.c * dt) + (xp - xm) / (2.0 * dx);
                    div = div.max(dv.norm());
                    scale = scale.max(here.iter().map(|z| z.norm()).fold(0.0, f64::max));
                }
                let rho = current(&d, q, psi, psi, t, x)[0].re;
                charge += rho * dx;
                dmin = dmin.min(rho);
                dmax = dmax.max(rho);
            }
            (div, scale, charge, dmin, dmax)
        })
        .collect();
    let div = per_time.iter().map(|v| v.0).fold(0.0, f64::max);
    let scale = per_time.iter().map(|v| v.1).fold(0.0, f64::max);
    let q0 = per_time[0].2;
    let charge_drift = per_time.iter().map(|v| ((v.2 - q0) / q0).abs()).fold(0.0, f64::max);
    let dmin = per_time.iter().map(|v| v.3).fold(f64::INFINITY, f64::min);
    let dmax = per_time.iter().map(|v| v.4).fold(0.0, f64::max);
    Ok(CurrentResidual { dx, dt, divergence: div / scale, charge_drift, min_density: dmin / dmax })
}

/// Divergence residuals at two resolutions and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurrentReport {
    pub coarse: CurrentResidual,
    pub fine: CurrentResidual,
    /// `coarse.divergence / fine.divergence`; second order gives 4.
    pub refinement_ratio: f64,
}

/// Two independent superpositions of waves at `0.3 mc` and `0.5 mc` in a box of
/// length `20 pi hbar / mc`, at 2048 and 4096 points per beat wavelength.
pub fn standard_pair(q: &QmParams) -> (Solution, Solution, f64) {
    let mc = q.mc();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let psi = Solution {
        waves: vec![
            PlaneWave { p: 0.3 * mc, amp: Vector2::new(c(0.7, 0.1), c(-0.2, 0.4)) },
            PlaneWave { p: 0.5 * mc, amp: Vector2::new(c(0.1, -0.5), c(0.6, 0.2)) },
        ],
    };
    let phi = Solution {
        waves: vec![
            PlaneWave { p: 0.3 * mc, amp: Vector2::new(c(-0.3, 0.6), c(0.5, 0.0)) },
            PlaneWave { p: 0.5 * mc, amp: Vector2::new(c(0.4, 0.4), c(-0.1, 0.3)) },
        ],
    };
    (psi, phi, 20.0 * std::f64::consts::PI * q.hbar / mc)
}

pub fn standard_current_check(q: &QmParams) -> Result<CurrentReport> {
    let (psi, phi, length) = standard_pair(q);
    let t_final = 10.0 * q.hbar / (q.m * q.c * q.c);
    let run = |ppb| current_conservation(&psi, &phi, q, &CurrentGrid { length, points_per_beat: ppb, times: 5, t_final });
    let coarse = run(2048)?;
    let fine = run(4096)?;
    Ok(CurrentReport { coarse, fine, refinement_ratio: coarse.divergence / fine.divergence })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_plane_wave_current_is_uniform() {
        let q = QmParams::default();
        let d = DiracConstants::new();
        let s = Solution { waves: vec![PlaneWave { p: 0.4, amp: Vector2::new(Complex64::new(0.3, 0.2), Complex64::ONE) }] };
        let a = current(&d, &q, &s, &s, 0.0, 0.0);
        let b = current(&d, &q, &s, &s, 1.7, 3.1);
        for mu in 0..4 {
            assert!((a[mu] - b[mu]).norm() < 1e-14);
        }
        assert!(a[0].re > 0.0 && a[0].im.abs() < 1e-15);
    }

    #[test]
    fn coarse_or_aperiodic_grids_are_rejected() {
        let q = QmParams::default();
        let (psi, phi, length) = standard_pair(&q);
        let g = CurrentGrid { length, points_per_beat: 32, times: 3, t_final: 1.0 };
        assert!(current_conservation(&psi, &phi, &q, &g).is_err());
        let g = CurrentGrid { length: length * 1.01, points_per_beat: 64, times: 3, t_final: 1.0 };
        assert!(current_conservation(&psi, &phi, &q, &g).is_err());
    }

    #[test]
    fn divergence_converges_at_second_order() {
        let r = standard_current_check(&QmParams::default()).unwrap();
        assert!(r.coarse.divergence < 1e-6, "{r:?}");
        assert!((r.refinement_ratio - 4.0).abs() < 0.2, "{r:?}");
        assert!(r.coarse.charge_drift < 1e-8, "{r:?}");
        assert!(r.coarse.min_density > 0.0, "{r:?}");
    }
}
