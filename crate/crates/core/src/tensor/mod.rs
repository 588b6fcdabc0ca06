//! Small exact linear algebra: 3-vectors, Minkowski 4-tensors with signature
//! (-,+,+,+), antisymmetric spin tensors, and the Pauli/Dirac matrix sets.

mod dirac;
mod spin_tensor;

pub use dirac::{
    anticommutator, commutator, commutator2, identity2, identity4, max_abs2, max_abs4, pauli, CMat2, CMat4,
    DiracConstants, CLIFFORD_SIGN,
};
pub use spin_tensor::{AntisymTensor4, PAIRS};

use crate::error::{domain, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Contravariant 4-vector components `(x^0, x^1, x^2, x^3)`, with `x^0 = ct`.
pub type FourVector = [f64; 4];

/// Flat metric diagonal, signature (-,+,+,+).
pub const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

/// Right-handed cross product `[a, b]`.
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    a.cross(b)
}

/// Totally antisymmetric symbol on {0,1,2} with `epsilon(0,1,2) = 1`.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Projector on the plane orthogonal to `v`: `N^{ij} = delta^{ij} - v^i v^j / v^2`.
pub fn projector(v: &Vec3) -> Result<Mat3> {
    let n2 = v.norm_squared();
    if n2 == 0.0 || !n2.is_finite() {
        return Err(domain("projector of a zero or non-finite vector"));
    }
    Ok(Mat3::identity() - v * v.transpose() / n2)
}

/// Lower an index with the flat metric.
pub fn lower(v: &FourVector) -> FourVector {
    [ETA[0] * v[0], ETA[1] * v[1], ETA[2] * v[2], ETA[3] * v[3]]
}

/// Raise an index with the flat metric. Identical to [`lower`] for a diagonal
/// metric of unit magnitude, kept separate so call sites state intent.
pub fn raise(v: &FourVector) -> FourVector {
    lower(v)
}

/// `eta_{mu nu} a^mu b^nu`.
pub fn minkowski_dot(a: &FourVector, b: &FourVector) -> f64 {
    (0..4).map(|m| ETA[m] * a[m] * b[m]).sum()
}

/// Frenkel identification `S^i = 1/4 eps^{ijk} S^{jk}`.
pub fn spin_tensor_to_vector(s: &AntisymTensor4) -> Vec3 {
    let mut out = Vec3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e != 0.0 {
                    out[i] += 0.25 * e * s.get(j + 1, k + 1);
                }
            }
        }
    }
    out
}

/// Inverse of [`spin_tensor_to_vector`] on the spatial block: `S^{jk} = 2 eps^{jki} S^i`,
/// boost components `S^{0i}` set to zero.
pub fn vector_to_spin_tensor(s: &Vec3) -> AntisymTensor4 {
    let mut t = AntisymTensor4::zero();
    t.set(1, 2, 2.0 * s[2]);
    t.set(1, 3, -2.0 * s[1]);
    t.set(2, 3, 2.0 * s[0]);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn cross_examples() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(cross(&x, &y), Vec3::new(0.0, 0.0, 1.0));
        let a = Vec3::new(0.3, -1.2, 4.0);
        assert_eq!(cross(&a, &a), Vec3::zeros());
        let th = PI / 3.0;
        let r = cross(&Vec3::new(0.0, 0.0, 1.0), &Vec3::new(th.sin(), 0.0, th.cos()));
        assert_relative_eq!(r, Vec3::new(0.0, th.sin(), 0.0), epsilon = 1e-15);
    }

    #[test]
    fn projector_examples() {
        let n = projector(&Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(n, Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 0.0)));
        let v = Vec3::new(1.0, 2.0, 3.0);
        assert_relative_eq!(projector(&v).unwrap() * v, Vec3::zeros(), epsilon = 1e-14);
        let n = projector(&Vec3::new(1.0, -1.0, 2.0)).unwrap();
        assert_relative_eq!(n * n, n, epsilon = 1e-15);
        assert!(projector(&Vec3::zeros()).is_err());
    }

    #[test]
    fn levi_civita_contraction() {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for j in 0..3 {
            for k in 0..3 {
                for m in 0..3 {
                    for n in 0..3 {
                        let lhs: f64 = (0..3)
                            .map(|i| levi_civita(i, j, k) * levi_civita(i, m, n))
                            .sum();
                        assert_eq!(lhs, d(j, m) * d(k, n) - d(j, n) * d(k, m));
                    }
                }
            }
        }
    }

    #[test]
    fn frenkel_map_examples() {
        let mut t = AntisymTensor4::zero();
        t.set(1, 2, 2.0);
        assert_eq!(spin_tensor_to_vector(&t), Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(spin_tensor_to_vector(&AntisymTensor4::zero()), Vec3::zeros());
        let s = vector_to_spin_tensor(&Vec3::new(0.2, -0.7, 1.5));
        for i in 0..4 {
            assert_eq!(s.get(0, i), 0.0);
        }
    }

    #[test]
    fn minkowski_index_gymnastics() {
        let v = [2.0, 0.5, -1.0, 3.0];
        assert_eq!(raise(&lower(&v)), v);
        assert_eq!(minkowski_dot(&v, &v), -4.0 + 0.25 + 1.0 + 9.0);
    }

    proptest! {
        #[test]
        fn cross_is_orthogonal(a in prop::array::uniform3(-10.0f64..10.0), b in prop::array::uniform3(-10.0f64..10.0)) {
            let (a, b) = (Vec3::from(a), Vec3::from(b));
            let c = cross(&a, &b);
            let scale = 1.0 + a.norm() * b.norm() * (a.norm() + b.norm());
            prop_assert!(c.dot(&a).abs() < 1e-12 * scale);
            prop_assert!(c.dot(&b).abs() < 1e-12 * scale);
        }

        #[test]
        fn projector_spectrum(v in prop::array::uniform3(-5.0f64..5.0)) {
            let v = Vec3::from(v);
            prop_assume!(v.norm() > 1e-3);
            let n = projector(&v).unwrap();
            prop_assert!((n.trace() - 2.0).abs() < 1e-13);
            prop_assert!((n * v).norm() < 1e-12 * v.norm());
        }

        #[test]
        fn frenkel_round_trip(s in prop::array::uniform3(-5.0f64..5.0)) {
            let s = Vec3::from(s);
            prop_assert_eq!(spin_tensor_to_vector(&vector_to_spin_tensor(&s)), s);
        }
    }
}
