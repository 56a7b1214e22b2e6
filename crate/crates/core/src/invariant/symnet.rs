use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::fit::RandomFeatureModel;
use crate::error::{Error, Result};

/// `p ↦ Σ_n y_n^p` for `p = 1..N`.
pub fn power_sums(y: &[f64]) -> Vec<f64> {
    (1..=y.len() as i32).map(|p| y.iter().map(|v| v.powi(p)).sum()).collect()
}

/// Weights of `Σ_t c_t σ(Σ_q w_qt Σ_n σ(b_q Σ_m a_tm X_nm + e_q) + h_t)`.
///
/// Flat layouts: `w[q·T1 + t]`, `a[t·M + m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymNetWeights {
    pub t1: usize,
    pub t2: usize,
    pub m: usize,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    pub a: Vec<f64>,
    #[serde(default)]
    pub activation: Activation,
}

impl SymNetWeights {
    pub fn validate(&self) -> Result<()> {
        let (t1, t2, m) = (self.t1, self.t2, self.m);
        let checks = [
            ("c", self.c.len(), t1),
            ("h", self.h.len(), t1),
            ("w", self.w.len(), t1 * t2),
            ("b", self.b.len(), t2),
            ("e", self.e.len(), t2),
            ("a", self.a.len(), t1 * m),
        ];
        for (name, got, want) in checks {
            if got != want {
                return Err(Error::shape(format!("{name} has length {got}, expected {want}")));
            }
        }
        if t1 == 0 || t2 == 0 || m == 0 {
            return Err(Error::param("t1, t2 and m must be positive"));
        }
        Ok(())
    }

    /// `a, b, e, h` uniform on `[-1, 1]`; `w` uniform on `[-1, 1]/√(N·T2)` so
    /// the pooled sums stay O(1); `c` zero.
    pub fn random<R: Rng>(t1: usize, t2: usize, m: usize, n_points: usize, activation: Activation, rng: &mut R) -> Self {
        let mut u = |k: usize, s: f64| (0..k).map(|_| rng.gen_range(-1.0..1.0) * s).collect::<Vec<f64>>();
        let ws = 1.0 / ((n_points * t2) as f64).sqrt();
        let a = u(t1 * m, 1.0);
        let b = u(t2, 1.0);
        let e = u(t2, 1.0);
        let h = u(t1, 1.0);
        let w = u(t1 * t2, ws);
        Self { t1, t2, m, c: vec![0.0; t1], h, w, b, e, a, activation }
    }

    /// Per-`t` hidden values `σ(Σ_q w_qt Σ_n σ(·) + h_t)`.
    fn hidden(&self, x: &[f64], n: usize) -> Vec<f64> {
        let m = self.m;
        // Canonical row order makes the sum over n independent of how the
        // caller ordered the rows, bit for bit.
        let mut rows: Vec<&[f64]> = x.chunks(m).collect();
        rows.sort_by(|p, q| lex_cmp(p, q));
        let sig = self.activation;
        let mut out = Vec::with_capacity(self.t1);
        let mut proj = vec![0.0; n];
        for t in 0..self.t1 {
            let a = &self.a[t * m..(t + 1) * m];
            for (pj, row) in proj.iter_mut().zip(&rows) {
                *pj = a.iter().zip(row.iter()).map(|(u, v)| u * v).sum();
            }
            let mut z = self.h[t];
            for q in 0..self.t2 {
                let mut pooled = 0.0;
                for &pj in &proj {
                    pooled += sig.apply(self.b[q] * pj + self.e[q]);
                }
                z += self.w[q * self.t1 + t] * pooled;
            }
            out.push(sig.apply(z));
        }
        out
    }
}

fn lex_cmp(p: &[f64], q: &[f64]) -> Ordering {
    for (a, b) in p.iter().zip(q) {
        match a.total_cmp(b) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Evaluates the permutation-invariant network on `N` rows of `x`
/// (row-major `N × M`).
pub fn symmetric_net_eval(w: &SymNetWeights, x: &[f64], n: usize) -> Result<f64> {
    w.validate()?;
    if x.len() != n * w.m || n == 0 {
        return Err(Error::shape(format!("x has length {}, expected N·M = {}·{}", x.len(), n, w.m)));
    }
    Ok(w.hidden(x, n).iter().zip(&w.c).map(|(s, c)| c * s).sum())
}

/// [`SymNetWeights`] bound to a point count, for fitting the outer `c`.
#[derive(Debug, Clone)]
pub struct SymNetModel {
    pub weights: SymNetWeights,
    pub n: usize,
}

impl RandomFeatureModel for SymNetModel {
    fn input_len(&self) -> usize {
        self.n * self.weights.m
    }

    fn features(&self, x: &[f64]) -> Vec<f64> {
        self.weights.hidden(x, self.n)
    }

    fn set_outer(&mut self, c: &[f64]) {
        self.weights.c = c.to_vec();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n_t2: usize) -> SymNetWeights {
        SymNetWeights {
            t1: 1,
            t2: n_t2,
            m: 1,
            c: vec![1.0],
            h: vec![0.0],
            w: vec![1.0; n_t2],
            b: vec![1.0; n_t2],
            e: vec![0.0; n_t2],
            a: vec![1.0],
            activation: Activation::Tanh,
        }
    }

    #[test]
    fn power_sum_examples() {
        assert_eq!(power_sums(&[1.0, 2.0, 3.0]), vec![6.0, 14.0, 36.0]);
        assert_eq!(power_sums(&[0.0; 4]), vec![0.0; 4]);
        assert_eq!(power_sums(&[3.0, 1.0, 2.0]), power_sums(&[1.0, 2.0, 3.0]));
    }

    #[test]
    fn zero_input() {
        assert_eq!(symmetric_net_eval(&unit(1), &[0.0, 0.0], 2).unwrap(), 0.0);
    }

    #[test]
    fn hand_value() {
        let v = symmetric_net_eval(&unit(1), &[1.0, 2.0], 2).unwrap();
        // tanh(tanh 1 + tanh 2); the second constant is a 30-digit evaluation.
        let oracle = (0.761_594_155_955_764_9_f64 + 0.964_027_580_075_817).tanh();
        assert!((v - oracle).abs() < 1e-12);
        assert!((v - 0.938_536_404_014_912_1).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        assert!(symmetric_net_eval(&unit(1), &[1.0, 2.0, 3.0], 2).is_err());
        let mut w = unit(1);
        w.a.push(0.0);
        assert!(symmetric_net_eval(&w, &[1.0, 2.0], 2).is_err());
    }
}
