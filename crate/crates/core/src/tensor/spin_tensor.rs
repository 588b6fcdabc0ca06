use serde::{Deserialize, Serialize};

/// Index pairs `(mu, nu)` with `mu < nu`, in storage order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn slot(mu: usize, nu: usize) -> Option<(usize, f64)> {
    let (a, b, sign) = match mu.cmp(&nu) {
        std::cmp::Ordering::Less => (mu, nu, 1.0),
        std::cmp::Ordering::Greater => (nu, mu, -1.0),
        std::cmp::Ordering::Equal => return None,
    };
    let idx = match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("spacetime index out of range: ({mu}, {nu})"),
    };
    Some((idx, sign))
}

/// Antisymmetric rank-2 tensor `S^{mu nu} = -S^{nu mu}` stored as its six
/// independent components; antisymmetry cannot be violated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AntisymTensor4 {
    c: [f64; 6],
}

impl AntisymTensor4 {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Components in [`PAIRS`] order: `S01, S02, S03, S12, S13, S23`.
    pub fn from_components(c: [f64; 6]) -> Self {
        Self { c }
    }

    pub fn components(&self) -> [f64; 6] {
        self.c
    }

    /// Antisymmetric part `(M - M^T) / 2` of a full matrix.
    pub fn from_matrix(m: &[[f64; 4]; 4]) -> Self {
        let mut c = [0.0; 6];
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            c[k] = 0.5 * (m[a][b] - m[b][a]);
        }
        Self { c }
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        match slot(mu, nu) {
            Some((i, s)) => s * self.c[i],
            None => 0.0,
        }
    }

    /// Sets `S^{mu nu}` (and thereby `S^{nu mu}`). Diagonal writes are ignored.
    pub fn set(&mut self, mu: usize, nu: usize, value: f64) {
        if let Some((i, s)) = slot(mu, nu) {
            self.c[i] = s * value;
        }
    }

    pub fn to_matrix(&self) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            m[a][b] = self.c[k];
            m[b][a] = -self.c[k];
        }
        m
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { c: self.c.map(|x| k * x) }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(other.c) {
            *a += b;
        }
        Self { c }
    }

    /// Lower both indices with metric `g`: returns `S_{mu nu}` as a full matrix.
    pub fn lowered(&self, g: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let up = self.to_matrix();
        let mut out = [[0.0; 4]; 4];
        for (m, row) in out.iter_mut().enumerate() {
            for (n, v) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        acc += g[m][a] * g[n][b] * up[a][b];
                    }
                }
                *v = acc;
            }
        }
        out
    }

    /// Full contraction `S^{mu nu} S_{mu nu}`.
    pub fn square(&self, g: &[[f64; 4]; 4]) -> f64 {
        let up = self.to_matrix();
        let low = self.lowered(g);
        let mut acc = 0.0;
        for m in 0..4 {
            for n in 0..4 {
                acc += up[m][n] * low[m][n];
            }
        }
        acc
    }

    /// `S^{mu nu} p_nu` for a contravariant `p`, lowered with `g`.
    pub fn contract_lowered(&self, g: &[[f64; 4]; 4], p: &[f64; 4]) -> [f64; 4] {
        let mut p_low = [0.0; 4];
        for (n, pl) in p_low.iter_mut().enumerate() {
            *pl = (0..4).map(|a| g[n][a] * p[a]).sum();
        }
        let mut out = [0.0; 4];
        for (m, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|n| self.get(m, n) * p_low[n]).sum();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antisymmetry_is_structural() {
        let mut s = AntisymTensor4::zero();
        s.set(2, 1, 3.0);
        assert_eq!(s.get(1, 2), -3.0);
        s.set(0, 0, 7.0);
        assert_eq!(s.get(0, 0), 0.0);
        let m = s.to_matrix();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(m[a][b], -m[b][a]);
            }
        }
        assert_eq!(AntisymTensor4::from_matrix(&m), s);
    }

    #[test]
    fn square_of_spatial_block() {
        // S^{mu nu} S_{mu nu} = 2 (S12^2 + S13^2 + S23^2) - 2 (S01^2 + S02^2 + S03^2) in flat space
        let s = AntisymTensor4::from_components([0.5, 0.0, -1.0, 2.0, 1.0, -3.0]);
        let eta = [
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        assert_eq!(s.square(&eta), 2.0 * (4.0 + 1.0 + 9.0) - 2.0 * (0.25 + 1.0));
    }
}
