//! Fixtures shared by the criterion benchmarks.

use spindyn::curved::{circular_body, spin_half_alpha, BodyParams, BodyState, Kappa};
use spindyn::spacetime::Schwarzschild;
use spindyn::spin::{FieldConfig, ParticleParams};
use spindyn::{Result, Vec3};

/// Electron-like particle in a tilted field with the alignment term switched on.
pub fn spin_fixture() -> Result<(FieldConfig, ParticleParams, Vec3)> {
    let fields = FieldConfig::uniform(Vec3::new(0.1, 0.0, 0.0), Vec3::new(0.3, -0.2, 1.0));
    let params = ParticleParams::new(-1.0, 1.0, 1.0, 1.0, 1.0)?;
    Ok((fields, params, Vec3::new(0.5, 0.0, 0.5)))
}

/// Spinning body on a circular orbit at `r = 10 r_s`.
pub fn body_fixture(kappa: Kappa) -> Result<(Schwarzschild, BodyParams, BodyState)> {
    let st = Schwarzschild::new(1.0);
    let params = BodyParams::default();
    let dir = Vec3::new(0.6, 0.0, 0.8);
    let state = circular_body(&st, 10.0, &params, &dir, spin_half_alpha(1.0), 1.0, kappa)?;
    Ok((st, params, state))
}
