use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ORTHO_TOL: f64 = 1e-10;

/// A finite group acting on `ℝ^dim` by orthogonal matrices.
///
/// `table[g][h]` is the index of the product `g·h`; element 0 is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalRep {
    dim: usize,
    /// Row-major `dim × dim` matrices.
    matrices: Vec<Vec<f64>>,
    table: Vec<Vec<usize>>,
}

impl OrthogonalRep {
    /// Validates orthogonality and derives the composition table from the
    /// matrices themselves; fails if they are not closed under products.
    pub fn new(dim: usize, matrices: Vec<Vec<f64>>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::param("a group needs at least one element"));
        }
        let mats: Vec<DMatrix<f64>> = matrices
            .iter()
            .enumerate()
            .map(|(i, m)| {
                if m.len() != dim * dim {
                    return Err(Error::shape(format!("element {i}: expected {} entries, got {}", dim * dim, m.len())));
                }
                Ok(DMatrix::from_row_slice(dim, dim, m))
            })
            .collect::<Result<_>>()?;
        let eye = DMatrix::<f64>::identity(dim, dim);
        if (&mats[0] - &eye).amax() > ORTHO_TOL {
            return Err(Error::param("element 0 must be the identity"));
        }
        for (i, m) in mats.iter().enumerate() {
            if (m.transpose() * m - &eye).amax() > ORTHO_TOL {
                return Err(Error::param(format!("element {i} is not orthogonal")));
            }
        }
        let find = |p: &DMatrix<f64>| mats.iter().position(|m| (m - p).amax() <= ORTHO_TOL);
        let mut table = vec![vec![0; mats.len()]; mats.len()];
        for (g, mg) in mats.iter().enumerate() {
            for (h, mh) in mats.iter().enumerate() {
                table[g][h] = find(&(mg * mh))
                    .ok_or_else(|| Error::param(format!("product of elements {g} and {h} is not in the set")))?;
            }
        }
        // Closure plus a finite set of invertible matrices gives inverses; check anyway.
        for (g, row) in table.iter().enumerate() {
            if !row.contains(&0) {
                return Err(Error::param(format!("element {g} has no inverse in the set")));
            }
        }
        Ok(Self { dim, matrices, table })
    }

    pub fn trivial(dim: usize) -> Self {
        let eye = DMatrix::<f64>::identity(dim, dim);
        Self::new(dim, vec![row_major(&eye)]).expect("identity is a group")
    }

    /// The trivial action of the same abstract group as `group` on `ℝ^dim`.
    pub fn trivial_of(group: &OrthogonalRep, dim: usize) -> Self {
        let eye = row_major(&DMatrix::<f64>::identity(dim, dim));
        Self { dim, matrices: vec![eye; group.order()], table: group.table.clone() }
    }

    /// `{1, -1}` acting by `x ↦ ±x`.
    pub fn z2_sign(dim: usize) -> Self {
        let eye = DMatrix::<f64>::identity(dim, dim);
        Self::new(dim, vec![row_major(&eye), row_major(&(-eye))]).expect("sign group")
    }

    /// Quarter-turn rotations of the plane.
    pub fn z4_rotation() -> Self {
        let r = [0.0, -1.0, 1.0, 0.0];
        let mut mats = vec![vec![1.0, 0.0, 0.0, 1.0]];
        for k in 1..4 {
            let prev = DMatrix::from_row_slice(2, 2, &mats[k - 1]);
            mats.push(row_major(&(DMatrix::from_row_slice(2, 2, &r) * prev)));
        }
        Self::new(2, mats).expect("cyclic rotation group")
    }

    /// The symmetric group on `n` points acting on `n` rows of length `m`,
    /// flattened row-major into `ℝ^{n·m}`. Intended for small `n`.
    pub fn symmetric(n: usize, m: usize) -> Self {
        let dim = n * m;
        let mats = permutations(n)
            .into_iter()
            .map(|p| {
                let mut mat = vec![0.0; dim * dim];
                // (P x)_{i} = x_{p(i)} row-wise.
                for (i, &pi) in p.iter().enumerate() {
                    for c in 0..m {
                        mat[(i * m + c) * dim + pi * m + c] = 1.0;
                    }
                }
                mat
            })
            .collect();
        Self::new(dim, mats).expect("permutation group")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrix(&self, g: usize) -> &[f64] {
        &self.matrices[g]
    }

    pub fn compose(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.table[g].iter().position(|&p| p == 0).expect("validated group")
    }

    /// `R_g x`.
    pub fn apply(&self, g: usize, x: &[f64]) -> Vec<f64> {
        let m = &self.matrices[g];
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| m[i * self.dim + j] * x[j]).sum())
            .collect()
    }

    /// `R_g^{-1} x = R_gᵀ x`.
    pub fn apply_inverse(&self, g: usize, x: &[f64]) -> Vec<f64> {
        let m = &self.matrices[g];
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| m[j * self.dim + i] * x[j]).sum())
            .collect()
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])).collect()
}

/// All permutations of `0..n`, identity first.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_groups() {
        assert_eq!(OrthogonalRep::trivial(3).order(), 1);
        assert_eq!(OrthogonalRep::z2_sign(2).order(), 2);
        let z4 = OrthogonalRep::z4_rotation();
        assert_eq!(z4.order(), 4);
        assert_eq!(z4.apply(1, &[1.0, 0.0]), vec![0.0, 1.0]);
        assert_eq!(z4.compose(1, 3), 0);
        assert_eq!(z4.inverse(1), 3);
        let s3 = OrthogonalRep::symmetric(3, 2);
        assert_eq!(s3.order(), 6);
        assert_eq!(s3.dim(), 6);
    }

    #[test]
    fn rejects_non_groups() {
        assert!(OrthogonalRep::new(1, vec![vec![1.0], vec![2.0]]).is_err());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // A single eighth-turn without its powers is not closed.
        assert!(OrthogonalRep::new(2, vec![vec![1.0, 0.0, 0.0, 1.0], vec![r, -r, r, r]]).is_err());
        assert!(OrthogonalRep::new(1, vec![vec![-1.0]]).is_err());
    }

    #[test]
    fn inverse_undoes_apply() {
        let s = OrthogonalRep::symmetric(3, 1);
        let x = [1.0, 2.0, 3.0];
        for g in 0..s.order() {
            assert_eq!(s.apply_inverse(g, &s.apply(g, &x)), x.to_vec());
        }
    }
}
