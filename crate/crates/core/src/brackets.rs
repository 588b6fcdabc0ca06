//! Poisson structures on the spin phase space `(x, p, S)`: the so(3) spin
//! brackets, spin-induced position noncommutativity `{x^i, x^j} = eps^{ijk} S^k / (mc)^2`,
//! Jacobi and Casimir residuals, and Hamiltonian flows.

use std::fmt;

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::spin::{FieldConfig, ParticleParams};
use crate::tensor::{levi_civita, Vec3};

/// Number of phase-space coordinates.
pub const DIM: usize = 9;

pub type PoissonTensor = SMatrix<f64, DIM, DIM>;

/// A point `(x, p, S)` of the nonrelativistic spin phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Vec3,
    pub p: Vec3,
    pub s: Vec3,
}

impl PhasePoint {
    pub fn to_array(&self) -> [f64; DIM] {
        let mut z = [0.0; DIM];
        for i in 0..3 {
            z[i] = self.x[i];
            z[3 + i] = self.p[i];
            z[6 + i] = self.s[i];
        }
        z
    }

    pub fn from_array(z: &[f64; DIM]) -> Self {
        Self {
            x: Vec3::new(z[0], z[1], z[2]),
            p: Vec3::new(z[3], z[4], z[5]),
            s: Vec3::new(z[6], z[7], z[8]),
        }
    }
}

/// Coordinate label `z^A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coord {
    X(usize),
    P(usize),
    S(usize),
}

impl Coord {
    pub fn index(self) -> usize {
        match self {
            Coord::X(i) => i,
            Coord::P(i) => 3 + i,
            Coord::S(i) => 6 + i,
        }
    }

    pub fn from_index(i: usize) -> Self {
        match i {
            0..=2 => Coord::X(i),
            3..=5 => Coord::P(i - 3),
            6..=8 => Coord::S(i - 6),
            _ => panic!("phase-space index {i} out of range"),
        }
    }

    pub fn all() -> impl Iterator<Item = Coord> {
        (0..DIM).map(Coord::from_index)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::X(i) => write!(f, "x{}", i + 1),
            Coord::P(i) => write!(f, "p{}", i + 1),
            Coord::S(i) => write!(f, "S{}", i + 1),
        }
    }
}

type ValueFn = Box<dyn Fn(&PhasePoint) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&PhasePoint) -> [f64; DIM] + Send + Sync>;

struct Entry {
    value: ValueFn,
    gradient: Option<GradFn>,
}

/// Bracket values `{z^A, z^B}` stored once per unordered pair; the reversed
/// pair is the negative, diagonal pairs vanish, unlisted pairs are zero.
pub struct BracketTable {
    entries: Vec<Option<Entry>>,
}

fn pair_slot(a: usize, b: usize) -> usize {
    debug_assert!(a < b);
    a * DIM + b
}

impl BracketTable {
    pub fn empty() -> Self {
        Self { entries: (0..DIM * DIM).map(|_| None).collect() }
    }

    /// Define `{a, b}`; `{b, a}` follows by antisymmetry. Defining a diagonal pair panics.
    pub fn define(
        &mut self,
        a: Coord,
        b: Coord,
        value: impl Fn(&PhasePoint) -> f64 + Send + Sync + 'static,
        gradient: Option<GradFn>,
    ) {
        let (ia, ib) = (a.index(), b.index());
        assert_ne!(ia, ib, "diagonal brackets vanish identically");
        let (lo, hi, sign) = if ia < ib { (ia, ib, 1.0) } else { (ib, ia, -1.0) };
        let value: ValueFn = if sign > 0.0 { Box::new(value) } else { Box::new(move |z| -value(z)) };
        let gradient = gradient.map(|g| -> GradFn {
            if sign > 0.0 {
                g
            } else {
                Box::new(move |z| g(z).map(|v| -v))
            }
        });
        self.entries[pair_slot(lo, hi)] = Some(Entry { value, gradient });
    }

    fn entry(&self, a: usize, b: usize) -> Option<(&Entry, f64)> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => self.entries[pair_slot(a, b)].as_ref().map(|e| (e, 1.0)),
            std::cmp::Ordering::Greater => self.entries[pair_slot(b, a)].as_ref().map(|e| (e, -1.0)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn bracket(&self, a: Coord, b: Coord, z: &PhasePoint) -> f64 {
        self.entry(a.index(), b.index()).map_or(0.0, |(e, s)| s * (e.value)(z))
    }

    /// `J^{AB}(z)`.
    pub fn poisson_tensor(&self, z: &PhasePoint) -> PoissonTensor {
        let mut j = PoissonTensor::zeros();
        for a in 0..DIM {
            for b in (a + 1)..DIM {
                if let Some(e) = &self.entries[pair_slot(a, b)] {
                    let v = (e.value)(z);
                    j[(a, b)] = v;
                    j[(b, a)] = -v;
                }
            }
        }
        j
    }

    /// Gradient of the structure function `{a, b}`: analytic when supplied,
    /// central differences otherwise.
    pub fn structure_gradient(&self, a: Coord, b: Coord, z: &PhasePoint) -> [f64; DIM] {
        match self.entry(a.index(), b.index()) {
            None => [0.0; DIM],
            Some((e, s)) => match &e.gradient {
                Some(g) => g(z).map(|v| s * v),
                None => central_gradient(&|q: &PhasePoint| s * (e.value)(q), z),
            },
        }
    }

    /// `{F, G}(z) = grad F . J . grad G`.
    pub fn poisson(&self, f: &dyn PhaseFunction, g: &dyn PhaseFunction, z: &PhasePoint) -> f64 {
        let j = self.poisson_tensor(z);
        let gf = SMatrix::<f64, DIM, 1>::from(f.gradient(z));
        let gg = SMatrix::<f64, DIM, 1>::from(g.gradient(z));
        (gf.transpose() * j * gg)[(0, 0)]
    }
}

/// Step for central differences: `1e-6` times the coordinate scale (at least 1).
pub fn fd_step(v: f64) -> f64 {
    1e-6 * v.abs().max(1.0)
}

fn central_gradient(f: &dyn Fn(&PhasePoint) -> f64, z: &PhasePoint) -> [f64; DIM] {
    let base = z.to_array();
    let mut g = [0.0; DIM];
    for (d, gd) in g.iter_mut().enumerate() {
        let h = fd_step(base[d]);
        let mut up = base;
        let mut dn = base;
        up[d] += h;
        dn[d] -= h;
        // divide by the spacing actually realised in floating point
        let width = up[d] - dn[d];
        *gd = (f(&PhasePoint::from_array(&up)) - f(&PhasePoint::from_array(&dn))) / width;
    }
    g
}

/// A scalar function on phase space.
pub trait PhaseFunction {
    fn value(&self, z: &PhasePoint) -> f64;

    fn gradient(&self, z: &PhasePoint) -> [f64; DIM] {
        central_gradient(&|q: &PhasePoint| self.value(q), z)
    }
}

impl PhaseFunction for Coord {
    fn value(&self, z: &PhasePoint) -> f64 {
        z.to_array()[self.index()]
    }

    fn gradient(&self, _z: &PhasePoint) -> [f64; DIM] {
        let mut g = [0.0; DIM];
        g[self.index()] = 1.0;
        g
    }
}

/// Wraps a closure; gradients by central differences.
pub struct FnPhase<F>(pub F);

impl<F: Fn(&PhasePoint) -> f64> PhaseFunction for FnPhase<F> {
    fn value(&self, z: &PhasePoint) -> f64 {
        (self.0)(z)
    }
}

/// Like [`Coord`] but forced through the finite-difference gradient path.
pub struct NumericCoord(pub Coord);

impl PhaseFunction for NumericCoord {
    fn value(&self, z: &PhasePoint) -> f64 {
        self.0.value(z)
    }
}

/// `S^2`.
pub struct SpinSquared;

impl PhaseFunction for SpinSquared {
    fn value(&self, z: &PhasePoint) -> f64 {
        z.s.norm_squared()
    }

    fn gradient(&self, z: &PhasePoint) -> [f64; DIM] {
        let mut g = [0.0; DIM];
        for i in 0..3 {
            g[6 + i] = 2.0 * z.s[i];
        }
        g
    }
}

/// `{S,S} = eps S`, `{x,x} = eps S / (mc)^2`, `{x^i, p_j} = delta^i_j`, all else zero.
pub fn standard_spin_table(params: &ParticleParams) -> BracketTable {
    let mut t = BracketTable::empty();
    let inv_mc2 = 1.0 / (params.m * params.c).powi(2);
    for i in 0..3 {
        for j in (i + 1)..3 {
            let k = 3 - i - j;
            let eps = levi_civita(i, j, k);
            let mut g_s = [0.0; DIM];
            g_s[6 + k] = eps;
            t.define(Coord::S(i), Coord::S(j), move |z| eps * z.s[k], Some(Box::new(move |_| g_s)));
            let coef = eps * inv_mc2;
            let mut g_x = [0.0; DIM];
            g_x[6 + k] = coef;
            t.define(Coord::X(i), Coord::X(j), move |z| coef * z.s[k], Some(Box::new(move |_| g_x)));
        }
        t.define(Coord::X(i), Coord::P(i), |_| 1.0, Some(Box::new(|_| [0.0; DIM])));
    }
    t
}

/// `{a,{b,c}} + {b,{c,a}} + {c,{a,b}}` for coordinate functions, using the
/// table's structure-function gradients.
pub fn jacobi_residual_coords(table: &BracketTable, z: &PhasePoint, a: Coord, b: Coord, c: Coord) -> f64 {
    let term = |u: Coord, v: Coord, w: Coord| -> f64 {
        // {u, {v,w}} = sum_d J^{u d} d_d J^{v w}
        let grad = table.structure_gradient(v, w, z);
        Coord::all().map(|d| table.bracket(u, d, z) * grad[d.index()]).sum()
    };
    (term(a, b, c) + term(b, c, a) + term(c, a, b)).abs()
}

/// Jacobi residual for arbitrary functions. The inner brackets are
/// differentiated numerically.
pub fn jacobi_residual(
    table: &BracketTable,
    z: &PhasePoint,
    a: &dyn PhaseFunction,
    b: &dyn PhaseFunction,
    c: &dyn PhaseFunction,
) -> f64 {
    let outer = |u: &dyn PhaseFunction, v: &dyn PhaseFunction, w: &dyn PhaseFunction| -> f64 {
        let inner = FnPhase(|q: &PhasePoint| table.poisson(v, w, q));
        table.poisson(u, &inner, z)
    };
    (outer(a, b, c) + outer(b, c, a) + outer(c, a, b)).abs()
}

/// Tangent `z-dot^A = {z^A, z^B} dH/dz^B`.
pub fn hamiltonian_flow(table: &BracketTable, h: &dyn PhaseFunction, z: &PhasePoint) -> PhasePoint {
    let j = table.poisson_tensor(z);
    let g = SMatrix::<f64, DIM, 1>::from(h.gradient(z));
    let dz = j * g;
    let mut arr = [0.0; DIM];
    arr.copy_from_slice(dz.as_slice());
    PhasePoint::from_array(&arr)
}

/// `max_A |{z^A, S^2}|` evaluated with the analytic gradient of `S^2`.
pub fn casimir_residual(table: &BracketTable, z: &PhasePoint) -> f64 {
    let g = SpinSquared.gradient(z);
    Coord::all()
        .map(|a| (0..DIM).map(|d| table.bracket(a, Coord::from_index(d), z) * g[d]).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// Same as [`casimir_residual`] with `S^2` differentiated numerically.
pub fn casimir_residual_fd(table: &BracketTable, z: &PhasePoint) -> f64 {
    let s2 = FnPhase(|q: &PhasePoint| q.s.norm_squared());
    Coord::all().map(|a| table.poisson(&a, &s2, z).abs()).fold(0.0, f64::max)
}

/// Pauli Hamiltonian with constant `B`, vector potential zero:
/// `p^2/2m + e A^0 - (e/mc)[(S,B) + (1/2mc)(S,[E,p])]`.
pub struct PauliHamiltonian {
    pub fields: FieldConfig,
    pub params: ParticleParams,
}

impl PhaseFunction for PauliHamiltonian {
    fn value(&self, z: &PhasePoint) -> f64 {
        crate::spin::pauli_energy(z, &self.fields, &self.params).map_or(f64::NAN, |t| t.total())
    }

    fn gradient(&self, z: &PhasePoint) -> [f64; DIM] {
        let p = &self.params;
        let mc = p.m * p.c;
        let k = -p.e / mc;
        let so = 1.0 / (2.0 * mc);
        let (Ok(e), Ok(jac)) = (self.fields.electric_at(&z.x), self.fields.electric_jacobian(&z.x)) else {
            return [f64::NAN; DIM];
        };
        // (S, E x p) = p . (S x E) = E . (p x S)
        let d_x = -e * p.e + jac.transpose() * z.p.cross(&z.s) * (k * so);
        let d_p = z.p / p.m + z.s.cross(&e) * (k * so);
        let d_s = (self.fields.magnetic + e.cross(&z.p) * so) * k;
        let mut g = [0.0; DIM];
        for i in 0..3 {
            g[i] = d_x[i];
            g[3 + i] = d_p[i];
            g[6 + i] = d_s[i];
        }
        g
    }
}

/// `p^2 / 2m`.
pub struct FreeKinetic {
    pub m: f64,
}

impl PhaseFunction for FreeKinetic {
    fn value(&self, z: &PhasePoint) -> f64 {
        z.p.norm_squared() / (2.0 * self.m)
    }

    fn gradient(&self, z: &PhasePoint) -> [f64; DIM] {
        let mut g = [0.0; DIM];
        for i in 0..3 {
            g[3 + i] = z.p[i] / self.m;
        }
        g
    }
}

/// `k (S, B)`.
pub struct SpinField {
    pub b: Vec3,
    pub k: f64,
}

impl PhaseFunction for SpinField {
    fn value(&self, z: &PhasePoint) -> f64 {
        self.k * z.s.dot(&self.b)
    }

    fn gradient(&self, _z: &PhasePoint) -> [f64; DIM] {
        let mut g = [0.0; DIM];
        for i in 0..3 {
            g[6 + i] = self.k * self.b[i];
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{precession_rhs, precession_vector, ElectricField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng) -> PhasePoint {
        let mut v = || Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        PhasePoint { x: v(), p: v(), s: v() }
    }

    #[test]
    fn standard_table_examples() {
        let t = standard_spin_table(&ParticleParams::electron());
        let z = PhasePoint { x: Vec3::zeros(), p: Vec3::zeros(), s: Vec3::new(0.0, 0.0, 0.7) };
        assert_eq!(t.bracket(Coord::S(0), Coord::S(1), &z), 0.7);
        assert_eq!(t.bracket(Coord::X(0), Coord::X(1), &z), 0.7);
        assert_eq!(t.bracket(Coord::X(0), Coord::X(0), &z), 0.0);
        assert_eq!(t.bracket(Coord::P(1), Coord::X(1), &z), -1.0);
        assert_eq!(t.bracket(Coord::X(0), Coord::S(2), &z), 0.0);
    }

    #[test]
    fn antisymmetry_at_random_points() {
        let t = standard_spin_table(&ParticleParams { c: 3.0, ..ParticleParams::electron() });
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let z = random_point(&mut rng);
            for a in Coord::all() {
                for b in Coord::all() {
                    assert_eq!(t.bracket(a, b, &z), -t.bracket(b, a, &z));
                }
            }
        }
    }

    #[test]
    fn so3_jacobi() {
        let t = standard_spin_table(&ParticleParams::electron());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let z = random_point(&mut rng);
            assert_eq!(jacobi_residual_coords(&t, &z, Coord::S(0), Coord::S(1), Coord::S(2)), 0.0);
            let fd = jacobi_residual(
                &t,
                &z,
                &NumericCoord(Coord::S(0)),
                &NumericCoord(Coord::S(1)),
                &NumericCoord(Coord::S(2)),
            );
            assert!(fd < 1e-10, "{fd}");
        }
    }

    #[test]
    fn truncated_table_jacobi_structure() {
        let p = ParticleParams::electron();
        let t = standard_spin_table(&p);
        let z = PhasePoint { x: Vec3::new(0.1, 0.2, 0.3), p: Vec3::new(1.0, 0.0, 0.0), s: Vec3::new(0.4, -0.5, 0.6) };
        // {x,S} = 0 leaves the same-index triple consistent ...
        let r = jacobi_residual(&t, &z, &Coord::X(0), &Coord::X(1), &Coord::S(2));
        assert!(r < 1e-8, "{r}");
        // ... and the mixed-index triple off by exactly |{S^3, S^1}| / (mc)^2 = |S^2|.
        let r = jacobi_residual_coords(&t, &z, Coord::X(0), Coord::X(1), Coord::S(0));
        assert!((r - 0.5).abs() < 1e-15, "{r}");
        // constant structure functions
        assert_eq!(jacobi_residual_coords(&t, &z, Coord::X(0), Coord::P(0), Coord::P(1)), 0.0);
    }

    #[test]
    fn flow_of_pauli_hamiltonian_reproduces_precession() {
        let params = ParticleParams::electron();
        let t = standard_spin_table(&params);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for coulomb in [false, true] {
            for _ in 0..50 {
                let z = random_point(&mut rng);
                let e = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.3);
                let b = Vec3::new(0.2, rng.random_range(-1.0..1.0), 1.0);
                let fields = if coulomb {
                    FieldConfig { electric: ElectricField::Coulomb { charge: 0.8 }, magnetic: b }
                } else {
                    FieldConfig::uniform(e, b)
                };
                let h = PauliHamiltonian { fields, params };
                let flow = hamiltonian_flow(&t, &h, &z);
                let r = precession_vector(&fields, &z.x, &z.p, &params).unwrap();
                assert!((flow.s - precession_rhs(&z.s, &r)).norm() < 1e-12);
                // analytic gradient agrees with differences
                let fd = central_gradient(&|q: &PhasePoint| h.value(q), &z);
                let an = h.gradient(&z);
                for d in 0..DIM {
                    assert!((fd[d] - an[d]).abs() < 1e-7, "component {d}: {} vs {}", fd[d], an[d]);
                }
            }
        }
    }

    #[test]
    fn free_and_spin_flows() {
        let params = ParticleParams { m: 2.0, ..ParticleParams::electron() };
        let t = standard_spin_table(&params);
        let z = PhasePoint { x: Vec3::new(1.0, 2.0, 3.0), p: Vec3::new(0.4, -0.2, 1.0), s: Vec3::new(0.1, 0.5, 0.2) };
        let f = hamiltonian_flow(&t, &FreeKinetic { m: 2.0 }, &z);
        assert_eq!(f.x, z.p / 2.0);
        assert_eq!(f.p, Vec3::zeros());
        assert_eq!(f.s, Vec3::zeros());
        let b = Vec3::new(0.3, 0.0, 1.0);
        let f = hamiltonian_flow(&t, &SpinField { b, k: 1.5 }, &z);
        assert!((f.s - b.cross(&z.s) * 1.5).norm() < 1e-15);
    }

    #[test]
    fn casimir_examples() {
        let t = standard_spin_table(&ParticleParams::electron());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut z = random_point(&mut rng);
            assert!(casimir_residual(&t, &z) < 1e-15);
            // roundoff in S^2 over a 2e-6 stencil bounds the numeric route; use spin one-half
            z.s = z.s.normalize() * 0.75f64.sqrt();
            assert!(casimir_residual_fd(&t, &z) < 1e-10);
        }
        let z = PhasePoint { x: Vec3::x(), p: Vec3::y(), s: Vec3::zeros() };
        assert_eq!(casimir_residual(&t, &z), 0.0);
    }
}
