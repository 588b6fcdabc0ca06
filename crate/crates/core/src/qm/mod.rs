//! Positive-energy quantum mechanics of a spin one-half particle.
//!
//! * [`identities`]: fixed-momentum matrix identities (Dirac algebra, the
//!   two-component Klein-Gordon factorization, the `V` map, Pryce operators,
//!   the Foldy-Wouthuysen restriction).
//! * [`packets`]: momentum-grid wave packets, with and without
//!   Zitterbewegung.
//! * [`current`]: the conserved current of positive-energy solutions.

pub mod current;
pub mod identities;
pub mod packets;

use serde::Serialize;

use crate::error::{validation, Result};
use crate::tensor::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QmParams {
    pub hbar: f64,
    pub m: f64,
    pub c: f64,
}

impl Default for QmParams {
    fn default() -> Self {
        Self { hbar: 1.0, m: 1.0, c: 1.0 }
    }
}

impl QmParams {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("hbar", self.hbar), ("m", self.m), ("c", self.c)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(validation(format!("{n} must be positive and finite")));
            }
        }
        Ok(())
    }

    pub fn mc(&self) -> f64 {
        self.m * self.c
    }
}

/// Momentum on the positive mass shell, `p0 = sqrt(p^2 + (mc)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnShellMomentum {
    pub p: Vec3,
    pub p0: f64,
    pub mc: f64,
}

impl OnShellMomentum {
    pub fn new(p: Vec3, m: f64, c: f64) -> Self {
        let mc = m * c;
        Self { p, p0: (p.norm_squared() + mc * mc).sqrt(), mc }
    }

    /// `p_mu = (-p0, p)`.
    pub fn lowered(&self) -> [f64; 4] {
        [-self.p0, self.p[0], self.p[1], self.p[2]]
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.p[0], self.p[1], self.p[2]]
    }

    /// `p_mu p^mu + (mc)^2`, relative to `(mc)^2`.
    pub fn shell_residual(&self) -> f64 {
        (self.p.norm_squared() - self.p0 * self.p0 + self.mc * self.mc) / (self.mc * self.mc)
    }
}
