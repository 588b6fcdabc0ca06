use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

pub type CMat2 = Matrix2<Complex64>;
pub type CMat4 = Matrix4<Complex64>;

/// Sign in the Clifford relation `{gamma^mu, gamma^nu} = CLIFFORD_SIGN * 2 eta^{mu nu}`.
///
/// The matrices are the standard Dirac representation (`(gamma^0)^2 = 1`,
/// `(gamma^i)^2 = -1`). Against the (-,+,+,+) metric this is the `-2 eta`
/// relation, which is the one under which `(gamma^mu p_mu + mc) Psi_D = 0`,
/// the unitarity of the Foldy-Wouthuysen operator and `beta^2 = 1` all close.
pub const CLIFFORD_SIGN: f64 = -1.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity2() -> CMat2 {
    CMat2::identity()
}

pub fn identity4() -> CMat4 {
    CMat4::identity()
}

/// Pauli matrices `sigma^1, sigma^2, sigma^3`.
pub fn pauli() -> [CMat2; 3] {
    [
        CMat2::new(ZERO, ONE, ONE, ZERO),
        CMat2::new(ZERO, -I, I, ZERO),
        CMat2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

pub fn commutator2(a: &CMat2, b: &CMat2) -> CMat2 {
    a * b - b * a
}

pub fn commutator(a: &CMat4, b: &CMat4) -> CMat4 {
    a * b - b * a
}

pub fn anticommutator(a: &CMat4, b: &CMat4) -> CMat4 {
    a * b + b * a
}

/// Largest entry modulus.
pub fn max_abs2(m: &CMat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs4(m: &CMat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn block(tl: &CMat2, tr: &CMat2, bl: &CMat2, br: &CMat2) -> CMat4 {
    let mut m = CMat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(tl);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(tr);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(bl);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(br);
    m
}

/// The fixed matrix set used by the quantum checks.
#[derive(Debug, Clone)]
pub struct DiracConstants {
    /// Dirac-representation `gamma^0..gamma^3`.
    pub gamma: [CMat4; 4],
    /// `alpha^i = gamma^0 gamma^i`.
    pub alpha: [CMat4; 3],
    /// `beta = gamma^0`.
    pub beta: CMat4,
    /// `sigma^mu = (1, sigma^i)`.
    pub sigma: [CMat2; 4],
    /// `sigma-bar^mu = (-1, sigma^i)`.
    pub sigma_bar: [CMat2; 4],
}

impl DiracConstants {
    pub fn new() -> Self {
        let s = pauli();
        let one = identity2();
        let zero = CMat2::zeros();
        let g0 = block(&one, &zero, &zero, &(-one));
        let gi = |k: usize| block(&zero, &s[k], &(-s[k]), &zero);
        let gamma = [g0, gi(0), gi(1), gi(2)];
        let alpha = [g0 * gamma[1], g0 * gamma[2], g0 * gamma[3]];
        Self {
            gamma,
            alpha,
            beta: g0,
            sigma: [one, s[0], s[1], s[2]],
            sigma_bar: [-one, s[0], s[1], s[2]],
        }
    }

    /// `sigma^mu p_mu` for covariant components `p_mu = (-p^0, p)`.
    pub fn sigma_dot(&self, p_low: &[f64; 4]) -> CMat2 {
        (0..4).fold(CMat2::zeros(), |acc, m| acc + self.sigma[m] * Complex64::from(p_low[m]))
    }

    /// `sigma-bar^mu p_mu`.
    pub fn sigma_bar_dot(&self, p_low: &[f64; 4]) -> CMat2 {
        (0..4).fold(CMat2::zeros(), |acc, m| {
            acc + self.sigma_bar[m] * Complex64::from(p_low[m])
        })
    }

    /// `sigma . p` for a 3-momentum.
    pub fn sigma_dot3(&self, p: &[f64; 3]) -> CMat2 {
        (0..3).fold(CMat2::zeros(), |acc, i| {
            acc + self.sigma[i + 1] * Complex64::from(p[i])
        })
    }

    /// `gamma-vec . p-vec` for a 3-momentum.
    pub fn gamma_dot3(&self, p: &[f64; 3]) -> CMat4 {
        (0..3).fold(CMat4::zeros(), |acc, i| {
            acc + self.gamma[i + 1] * Complex64::from(p[i])
        })
    }

    /// Free Dirac Hamiltonian `c alpha^i p_i + m c^2 beta`.
    pub fn hamiltonian(&self, p: &[f64; 3], m: f64, c: f64) -> CMat4 {
        (0..3).fold(self.beta * Complex64::from(m * c * c), |acc, i| {
            acc + self.alpha[i] * Complex64::from(c * p[i])
        })
    }
}

impl Default for DiracConstants {
    fn default() -> Self {
        Self::new()
    }
}
