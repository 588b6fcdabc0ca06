//! Explicit Runge-Kutta steppers on fixed-size states.

use crate::error::{Error, Result};

/// Classical fourth-order Runge-Kutta step.
pub fn rk4_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], h: f64) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = f(t + h, &axpy(y, h, &k3))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, x: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * x[i];
    }
    out
}

pub fn is_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Tolerances for the adaptive Dormand-Prince 5(4) integrator.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveTolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for AdaptiveTolerance {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-14 }
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Advance `y` from `t0` to `t1` with error-controlled Dormand-Prince steps.
/// `h` carries the step-size estimate across calls.
pub fn dopri_advance<const N: usize, F>(
    f: &mut F,
    t0: f64,
    y: &[f64; N],
    t1: f64,
    h: &mut f64,
    tol: AdaptiveTolerance,
    step_index: usize,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut t = t0;
    let mut y = *y;
    let mut rejected = 0usize;
    while t < t1 {
        let hh = h.min(t1 - t);
        let mut k = [[0.0; N]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += hh * A[s][j] * kj[i];
                }
            }
            k[s] = f(t + C[s] * hh, &ys)?;
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += hh * d5;
            let sc = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((hh * (d5 - d4)).abs() / sc);
        }
        if !err.is_finite() {
            return Err(Error::Numerical { step: step_index, reason: "non-finite error estimate".into() });
        }
        if err <= 1.0 {
            t += hh;
            y = y5;
            rejected = 0;
        } else {
            rejected += 1;
            if rejected > 50 {
                return Err(Error::Numerical { step: step_index, reason: "step size underflow".into() });
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        // Only grow the carried estimate from full (unclipped) steps.
        if hh == *h || factor < 1.0 {
            *h = hh * factor;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(_t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = [1.0, 0.0];
            for i in 0..n {
                y = rk4_step(&mut harmonic, i as f64 * h, &y, h).unwrap();
            }
            (y[0] - 1.0f64.cos()).abs()
        };
        let order = (err(20) / err(40)).log2();
        assert!((order - 4.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn dopri_meets_tolerance() {
        let mut h = 0.1;
        let y = dopri_advance(&mut harmonic, 0.0, &[1.0, 0.0], 10.0, &mut h, AdaptiveTolerance::default(), 0).unwrap();
        assert!((y[0] - 10.0f64.cos()).abs() < 1e-8);
        assert!((y[1] + 10.0f64.sin()).abs() < 1e-8);
    }
}
