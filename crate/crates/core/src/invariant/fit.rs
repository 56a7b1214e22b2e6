use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Minimizes `‖design·w − targets‖² + reg‖w‖²` via the normal equations and
/// a Cholesky solve.
pub fn fit_ridge(design: &DMatrix<f64>, targets: &[f64], reg: f64) -> Result<Vec<f64>> {
    if !(reg >= 0.0 && reg.is_finite()) {
        return Err(Error::param(format!("reg must be a finite nonnegative number, got {reg}")));
    }
    if design.nrows() != targets.len() {
        return Err(Error::shape(format!("design has {} rows but {} targets", design.nrows(), targets.len())));
    }
    let p = design.ncols();
    let mut gram = design.transpose() * design;
    for i in 0..p {
        gram[(i, i)] += reg;
    }
    let rhs = design.transpose() * DVector::from_column_slice(targets);
    let scale = (0..p).map(|i| gram[(i, i)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let singular = || {
        Error::Singular(if reg == 0.0 {
            "normal equations are singular; use reg > 0".into()
        } else {
            format!("normal equations are numerically singular at reg = {reg}; increase reg")
        })
    };
    let chol = gram.cholesky().ok_or_else(singular)?;
    // A rank-deficient Gram matrix can still factor with a tiny pivot. With
    // reg > 0 every exact pivot is at least reg, so only a breakdown below
    // that counts.
    let floor = if reg > 0.0 { 0.5 * reg } else { 1e-13 * scale };
    let l = chol.l_dirty();
    if (0..p).any(|i| l[(i, i)] * l[(i, i)] <= floor) {
        return Err(singular());
    }
    Ok(chol.solve(&rhs).iter().copied().collect())
}

pub fn rmse(pred: &[f64], targets: &[f64]) -> f64 {
    let s: f64 = pred.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    (s / targets.len().max(1) as f64).sqrt()
}

/// A scalar model that is linear in its outer weights.
pub trait RandomFeatureModel {
    fn input_len(&self) -> usize;
    /// Hidden-unit values; the output is their dot product with the outer weights.
    fn features(&self, x: &[f64]) -> Vec<f64>;
    fn set_outer(&mut self, c: &[f64]);

    fn predict(&self, x: &[f64], outer: &[f64]) -> f64 {
        self.features(x).iter().zip(outer).map(|(a, b)| a * b).sum()
    }
}

pub fn design_matrix<M: RandomFeatureModel + ?Sized>(model: &M, xs: &[Vec<f64>]) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = xs.iter().map(|x| model.features(x)).collect();
    let p = rows.first().map(|r| r.len()).unwrap_or(0);
    DMatrix::from_fn(xs.len(), p, |i, j| rows[i][j])
}

/// Ridge-fits the outer weights; returns the fitted vector and the training RMSE.
pub fn fit_outer<M: RandomFeatureModel + ?Sized>(model: &mut M, xs: &[Vec<f64>], ys: &[f64], reg: f64) -> Result<(Vec<f64>, f64)> {
    if let Some(x) = xs.iter().find(|x| x.len() != model.input_len()) {
        return Err(Error::shape(format!("sample has length {}, expected {}", x.len(), model.input_len())));
    }
    let design = design_matrix(model, xs);
    let c = fit_ridge(&design, ys, reg)?;
    let pred: Vec<f64> = (&design * DVector::from_column_slice(&c)).iter().copied().collect();
    model.set_outer(&c);
    Ok((c, rmse(&pred, ys)))
}

/// One fitting run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitRow {
    pub seed: u64,
    pub width: usize,
    pub train_rmse: f64,
    pub test_rmse: f64,
}

pub fn fit_rows_csv(rows: &[FitRow]) -> String {
    let mut s = String::from("seed,width,train_rmse,test_rmse\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.seed,
            r.width,
            crate::fmt_sig(r.train_rmse),
            crate::fmt_sig(r.test_rmse)
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_design() {
        let w = fit_ridge(&DMatrix::identity(3, 3), &[1.0, -2.0, 0.5], 0.0).unwrap();
        assert_eq!(w, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn zero_targets() {
        let d = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 1.0, 3.0, -1.0]);
        assert_eq!(fit_ridge(&d, &[0.0; 3], 0.1).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn hand_solved_system() {
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let w = fit_ridge(&d, &[1.0, 2.0], 0.0).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_without_reg() {
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let e = fit_ridge(&d, &[1.0, 2.0], 0.0).unwrap_err();
        assert!(e.to_string().contains("reg > 0"));
        assert!(fit_ridge(&d, &[1.0, 2.0], 1e-3).is_ok());
    }

    #[test]
    fn duplicate_columns_with_tiny_reg_split_the_weight() {
        // Large Gram diagonal, pivot of the repeated column near reg.
        let d = DMatrix::from_fn(2000, 2, |i, _| i as f64 / 2000.0);
        let y: Vec<f64> = (0..2000).map(|i| 2.0 * i as f64 / 2000.0).collect();
        let w = fit_ridge(&d, &y, 1e-10).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-6 && (w[1] - 1.0).abs() < 1e-6, "{w:?}");
    }

    #[test]
    fn csv_format() {
        let s = fit_rows_csv(&[FitRow { seed: 3, width: 8, train_rmse: 0.5, test_rmse: 0.25 }]);
        assert_eq!(s, "seed,width,train_rmse,test_rmse\n3,8,0.5,0.25\n");
    }
}
