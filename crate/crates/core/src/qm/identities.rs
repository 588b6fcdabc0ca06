//! Fixed-momentum operator identities, evaluated as max-abs matrix residuals.

use nalgebra::{Vector2, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{OnShellMomentum, QmParams};
use crate::check::CheckReport;
use crate::error::Result;
use crate::rng;
use crate::tensor::{
    commutator, commutator2, identity2, identity4, levi_civita, max_abs2, max_abs4, pauli, CMat2, CMat4,
    DiracConstants,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Largest `|[alpha_i, H] - 2(c p_i - H alpha_i)|` over `i`.
pub fn heisenberg_identity(d: &DiracConstants, p: &[f64; 3], q: &QmParams) -> f64 {
    let h = d.hamiltonian(p, q.m, q.c);
    (0..3)
        .map(|i| {
            let lhs = commutator(&d.alpha[i], &h);
            let rhs = (identity4() * re(q.c * p[i]) - h * d.alpha[i]) * re(2.0);
            max_abs4(&(lhs - rhs))
        })
        .fold(0.0, f64::max)
}

/// `|[beta, H] + 2c (alpha . p) beta|`.
pub fn beta_identity(d: &DiracConstants, p: &[f64; 3], q: &QmParams) -> f64 {
    let h = d.hamiltonian(p, q.m, q.c);
    let ap = (0..3).fold(CMat4::zeros(), |acc, i| acc + d.alpha[i] * re(p[i]));
    max_abs4(&(commutator(&d.beta, &h) + ap * d.beta * re(2.0 * q.c)))
}

/// `|(sigma p)(sigma-bar p) + (mc)^2|` for any covariant `p_mu`.
pub fn kg_factorization(d: &DiracConstants, p_low: &[f64; 4], mc: f64) -> f64 {
    let prod = d.sigma_dot(p_low) * d.sigma_bar_dot(p_low);
    max_abs2(&(prod + identity2() * re(mc * mc)))
}

/// `V = (1/mc) sqrt(p0/(p0+mc)) ((sigma-bar p) + mc)` and its inverse
/// `(mc - (sigma p)) / (2 sqrt(p0 (p0 + mc)))`.
pub fn v_operator(d: &DiracConstants, p: &OnShellMomentum) -> (CMat2, CMat2) {
    let (p0, mc) = (p.p0, p.mc);
    let pl = p.lowered();
    let v = (d.sigma_bar_dot(&pl) + identity2() * re(mc)) * re((p0 / (p0 + mc)).sqrt() / mc);
    let vinv = (identity2() * re(mc) - d.sigma_dot(&pl)) * re(1.0 / (2.0 * (p0 * (p0 + mc)).sqrt()));
    (v, vinv)
}

pub fn v_inverse_residual(d: &DiracConstants, p: &OnShellMomentum) -> f64 {
    let (v, vinv) = v_operator(d, p);
    max_abs2(&(v * vinv - identity2())).max(max_abs2(&(vinv * v - identity2())))
}

/// `|V^dag V - (1 + (sigma-bar p)^dag (sigma-bar p) / (mc)^2)|`.
pub fn v_scalar_product_residual(d: &DiracConstants, p: &OnShellMomentum) -> f64 {
    let (v, _) = v_operator(d, p);
    let sb = d.sigma_bar_dot(&p.lowered());
    let rhs = identity2() + sb.adjoint() * sb * re(1.0 / (p.mc * p.mc));
    max_abs2(&(v.adjoint() * v - rhs))
}

/// `S^i = (hbar / 2mc)(p0 sigma^i - (p . sigma) p^i / (p0 + mc))`.
pub fn pryce_spin(d: &DiracConstants, p: &OnShellMomentum, q: &QmParams) -> [CMat2; 3] {
    let s = pauli();
    let sp = d.sigma_dot3(&p.spatial());
    let k = q.hbar / (2.0 * p.mc);
    std::array::from_fn(|i| (s[i] * re(p.p0) - sp * re(p.p[i] / (p.p0 + p.mc))) * re(k))
}

/// Largest `|[S^i, S^j] - i hbar eps^{ijk} S^k|`.
pub fn su2_residual(s: &[CMat2; 3], hbar: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let rhs = (0..3).fold(CMat2::zeros(), |acc, k| acc + s[k] * (I * re(hbar * levi_civita(i, j, k))));
            worst = worst.max(max_abs2(&(commutator2(&s[i], &s[j]) - rhs)));
        }
    }
    worst
}

/// `|S . S - 3 hbar^2 / 4|`.
pub fn casimir_residual(s: &[CMat2; 3], hbar: f64) -> f64 {
    let sq = s.iter().fold(CMat2::zeros(), |acc, m| acc + m * m);
    max_abs2(&(sq - identity2() * re(0.75 * hbar * hbar)))
}

/// `|S . S - (p x S)^2 / p0^2 - 3 hbar^2 / 4|`: the invariant this operator does keep.
pub fn boosted_casimir_residual(s: &[CMat2; 3], p: &OnShellMomentum, hbar: f64) -> f64 {
    let sq = s.iter().fold(CMat2::zeros(), |acc, m| acc + m * m);
    let cross: [CMat2; 3] = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        s[k] * re(p.p[j]) - s[j] * re(p.p[k])
    });
    let cross_sq = cross.iter().fold(CMat2::zeros(), |acc, m| acc + m * m);
    max_abs2(&(sq - cross_sq * re(1.0 / (p.p0 * p.p0)) - identity2() * re(0.75 * hbar * hbar)))
}

/// Matrix part of the position operator, `A^i = (hbar / (2mc (p0 + mc))) eps^{ijk} sigma_j p_k`.
pub fn position_matrix(p: &[f64; 3], q: &QmParams) -> [CMat2; 3] {
    let s = pauli();
    let mc = q.mc();
    let p0 = (p.iter().map(|v| v * v).sum::<f64>() + mc * mc).sqrt();
    let a = q.hbar / (2.0 * mc * (p0 + mc));
    std::array::from_fn(|i| {
        let mut m = CMat2::zeros();
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e != 0.0 {
                    m += s[j] * re(a * e * p[k]);
                }
            }
        }
        m
    })
}

/// Coefficient `hbar / (2mc (p0 + mc))` relative to its small-momentum value `hbar / (4 (mc)^2)`.
pub fn position_coefficient_ratio(p_mag: f64, q: &QmParams) -> f64 {
    let mc = q.mc();
    let p0 = (p_mag * p_mag + mc * mc).sqrt();
    2.0 * mc / (p0 + mc)
}

/// `C^{ij} = i hbar (dA^j/dp_i - dA^i/dp_j) + [A^i, A^j]`, derivatives by central differences.
pub fn pryce_position_commutator(p: &[f64; 3], q: &QmParams) -> [[CMat2; 3]; 3] {
    let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = 1e-6 * norm.max(q.mc());
    // dA[l][j] = dA^j / dp_l
    let da: [[CMat2; 3]; 3] = std::array::from_fn(|l| {
        let mut up = *p;
        let mut dn = *p;
        up[l] += h;
        dn[l] -= h;
        let width = up[l] - dn[l];
        let (au, ad) = (position_matrix(&up, q), position_matrix(&dn, q));
        std::array::from_fn(|j| (au[j] - ad[j]) * re(1.0 / width))
    });
    let a = position_matrix(p, q);
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (da[i][j] - da[j][i]) * (I * re(q.hbar)) + commutator2(&a[i], &a[j]))
    })
}

/// Largest `|C^{ij} - (i hbar / (mc)^2) eps^{ijk} S^k|` relative to `hbar^2 / (2 (mc)^2)`.
pub fn position_commutator_deviation(d: &DiracConstants, p: &OnShellMomentum, q: &QmParams) -> f64 {
    let c = pryce_position_commutator(&p.spatial(), q);
    let s = pryce_spin(d, p, q);
    let k = q.hbar / (q.mc() * q.mc());
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let rhs = (0..3).fold(CMat2::zeros(), |acc, l| acc + s[l] * (I * re(k * levi_civita(i, j, l))));
            worst = worst.max(max_abs2(&(c[i][j] - rhs)));
        }
    }
    worst / (q.hbar * q.hbar / (2.0 * q.mc() * q.mc()))
}

/// `Psi_D[u] = ((sigma-bar p + mc) u, (sigma-bar p - mc) u) / (sqrt 2 mc)`.
pub fn dirac_spinor(d: &DiracConstants, p: &OnShellMomentum, u: &Vector2<Complex64>) -> Vector4<Complex64> {
    let sb = d.sigma_bar_dot(&p.lowered());
    let mc = re(p.mc);
    let top = (sb + identity2() * mc) * u;
    let bot = (sb - identity2() * mc) * u;
    let k = re(1.0 / (std::f64::consts::SQRT_2 * p.mc));
    Vector4::new(top[0], top[1], bot[0], bot[1]) * k
}

/// `U_FW = (p0 + mc + gamma . p) / sqrt(2 (p0 + mc) p0)`.
pub fn fw_operator(d: &DiracConstants, p: &OnShellMomentum) -> CMat4 {
    let n = (2.0 * (p.p0 + p.mc) * p.p0).sqrt();
    (identity4() * re(p.p0 + p.mc) + d.gamma_dot3(&p.spatial())) * re(1.0 / n)
}

/// `|U_FW Psi_D[u] - (V u, 0)|`.
pub fn fw_restriction(d: &DiracConstants, p: &OnShellMomentum, u: &Vector2<Complex64>) -> f64 {
    let out = fw_operator(d, p) * dirac_spinor(d, p, u);
    let (v, _) = v_operator(d, p);
    let vu = v * u;
    let expect = Vector4::new(vu[0], vu[1], Complex64::ZERO, Complex64::ZERO);
    (out - expect).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn fw_unitarity(d: &DiracConstants, p: &OnShellMomentum) -> f64 {
    let u = fw_operator(d, p);
    max_abs4(&(u.adjoint() * u - identity4()))
}

/// `|(gamma^mu p_mu + mc) Psi_D[u]|`.
pub fn dirac_equation_residual(d: &DiracConstants, p: &OnShellMomentum, u: &Vector2<Complex64>) -> f64 {
    let pl = p.lowered();
    let op = (0..4).fold(identity4() * re(p.mc), |acc, m| acc + d.gamma[m] * re(pl[m]));
    (op * dirac_spinor(d, p, u)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Tolerance for the fixed-momentum identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Largest `|p| / mc` drawn by the identity suite.
pub const MAX_MOMENTUM_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub heisenberg_alpha: f64,
    pub heisenberg_beta: f64,
    pub kg_factorization: f64,
    pub v_inverse: f64,
    pub v_scalar_product: f64,
    pub pryce_su2: f64,
    pub pryce_casimir: f64,
    pub pryce_boosted_casimir: f64,
    pub fw_restriction: f64,
    pub fw_unitarity: f64,
    pub dirac_equation: f64,
}

impl IdentityResiduals {
    fn max(self, o: Self) -> Self {
        Self {
            heisenberg_alpha: self.heisenberg_alpha.max(o.heisenberg_alpha),
            heisenberg_beta: self.heisenberg_beta.max(o.heisenberg_beta),
            kg_factorization: self.kg_factorization.max(o.kg_factorization),
            v_inverse: self.v_inverse.max(o.v_inverse),
            v_scalar_product: self.v_scalar_product.max(o.v_scalar_product),
            pryce_su2: self.pryce_su2.max(o.pryce_su2),
            pryce_casimir: self.pryce_casimir.max(o.pryce_casimir),
            pryce_boosted_casimir: self.pryce_boosted_casimir.max(o.pryce_boosted_casimir),
            fw_restriction: self.fw_restriction.max(o.fw_restriction),
            fw_unitarity: self.fw_unitarity.max(o.fw_unitarity),
            dirac_equation: self.dirac_equation.max(o.dirac_equation),
        }
    }

    pub fn named(&self) -> [(&'static str, f64); 11] {
        [
            ("heisenberg_alpha", self.heisenberg_alpha),
            ("heisenberg_beta", self.heisenberg_beta),
            ("kg_factorization", self.kg_factorization),
            ("v_inverse", self.v_inverse),
            ("v_scalar_product", self.v_scalar_product),
            ("pryce_su2", self.pryce_su2),
            ("pryce_casimir", self.pryce_casimir),
            ("pryce_boosted_casimir", self.pryce_boosted_casimir),
            ("fw_restriction", self.fw_restriction),
            ("fw_unitarity", self.fw_unitarity),
            ("dirac_equation", self.dirac_equation),
        ]
    }
}

pub fn residuals_at(d: &DiracConstants, p: &OnShellMomentum, u: &Vector2<Complex64>, q: &QmParams) -> IdentityResiduals {
    let s = pryce_spin(d, p, q);
    IdentityResiduals {
        heisenberg_alpha: heisenberg_identity(d, &p.spatial(), q),
        heisenberg_beta: beta_identity(d, &p.spatial(), q),
        kg_factorization: kg_factorization(d, &p.lowered(), p.mc),
        v_inverse: v_inverse_residual(d, p),
        v_scalar_product: v_scalar_product_residual(d, p),
        pryce_su2: su2_residual(&s, q.hbar),
        pryce_casimir: casimir_residual(&s, q.hbar),
        pryce_boosted_casimir: boosted_casimir_residual(&s, p, q.hbar),
        fw_restriction: fw_restriction(d, p, u),
        fw_unitarity: fw_unitarity(d, p),
        dirac_equation: dirac_equation_residual(d, p, u),
    }
}

/// Worst residual of every identity over `samples` seeded on-shell momenta.
pub fn identity_residuals(samples: usize, seed: u64, q: &QmParams) -> Result<IdentityResiduals> {
    q.validate()?;
    let mut r = rng::seeded(seed);
    let draws: Vec<_> = (0..samples)
        .map(|_| (rng::on_shell(&mut r, q.m, q.c, MAX_MOMENTUM_RATIO), rng::spinor2(&mut r)))
        .collect();
    let d = DiracConstants::new();
    Ok(draws
        .par_iter()
        .map(|(p, u)| residuals_at(&d, p, u, q))
        .reduce(IdentityResiduals::default, IdentityResiduals::max))
}

pub fn identity_report(samples: usize, seed: u64, q: &QmParams) -> Result<CheckReport> {
    let worst = identity_residuals(samples, seed, q)?;
    let mut rep = CheckReport::new();
    for (name, v) in worst.named() {
        rep.record(name, v, IDENTITY_TOL)?;
    }
    Ok(rep)
}

/// Small-momentum behaviour of the position operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeadingOrder {
    pub ratios: [f64; 2],
    /// `|coefficient / leading - 1|` at each ratio.
    pub coefficient_deviation: [f64; 2],
    pub coefficient_order: f64,
    /// Relative commutator deviation at each ratio.
    pub commutator_deviation: [f64; 2],
    pub commutator_order: f64,
}

pub const LEADING_RATIOS: [f64; 2] = [1e-2, 1e-3];

pub fn leading_order(q: &QmParams) -> LeadingOrder {
    let d = DiracConstants::new();
    let dir = nalgebra::Vector3::new(0.48, -0.6, 0.64);
    let coef = LEADING_RATIOS.map(|r| (position_coefficient_ratio(r * q.mc(), q) - 1.0).abs());
    let comm = LEADING_RATIOS.map(|r| {
        let p = OnShellMomentum::new(dir * (r * q.mc()), q.m, q.c);
        position_commutator_deviation(&d, &p, q)
    });
    let order = |v: [f64; 2]| (v[0] / v[1]).log10() / (LEADING_RATIOS[0] / LEADING_RATIOS[1]).log10();
    LeadingOrder {
        ratios: LEADING_RATIOS,
        coefficient_deviation: coef,
        coefficient_order: order(coef),
        commutator_deviation: comm,
        commutator_order: order(comm),
    }
}
