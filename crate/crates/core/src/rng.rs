//! Seeded randomness. Every random draw in the crate goes through a
//! `ChaCha8Rng` so that a seed fixes all outputs on every platform.

use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

use crate::qm::OnShellMomentum;
use crate::tensor::Vec3;

/// Environment variable consulted when no seed is given explicitly.
pub const SEED_ENV: &str = "SPINDYN_SEED";
pub const DEFAULT_SEED: u64 = 20_240_917;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Explicit seed, else `SPINDYN_SEED`, else the built-in default.
pub fn resolve_seed(explicit: Option<u64>) -> crate::Result<u64> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| crate::error::validation(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

pub fn unit_vector(rng: &mut impl Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let rho = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(rho * phi.cos(), rho * phi.sin(), z)
}

/// Uniform direction and `|p| / mc` uniform in `[0, max_ratio]`.
pub fn on_shell(rng: &mut impl Rng, m: f64, c: f64, max_ratio: f64) -> OnShellMomentum {
    let mag = rng.random_range(0.0..=max_ratio) * m * c;
    OnShellMomentum::new(unit_vector(rng) * mag, m, c)
}

/// Complex 2-spinor with components uniform in the unit square.
pub fn spinor2(rng: &mut impl Rng) -> nalgebra::Vector2<num_complex::Complex64> {
    let mut z = || num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    nalgebra::Vector2::new(z(), z())
}
