use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rep::OrthogonalRep;
use crate::error::{Error, Result};

/// A real polynomial in `nvars` variables as a sparse list of monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub nvars: usize,
    /// `(exponents, coefficient)` pairs.
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl Polynomial {
    pub fn new(nvars: usize, terms: Vec<(Vec<u32>, f64)>) -> Result<Self> {
        for (e, _) in &terms {
            if e.len() != nvars {
                return Err(Error::shape(format!("monomial has {} exponents, expected {nvars}", e.len())));
            }
        }
        Ok(Self { nvars, terms })
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self { nvars, terms: vec![(vec![0; nvars], c)] }
    }

    /// The coordinate `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self { nvars, terms: vec![(e, 1.0)] }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
            .sum()
    }
}

/// Invariants `f_s` and equivariants `g_m` (each a `d_U`-vector of
/// polynomials) for one representation pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFeatureSet {
    pub invariants: Vec<Polynomial>,
    pub equivariants: Vec<Vec<Polynomial>>,
}

impl PolyFeatureSet {
    pub fn input_dim(&self) -> usize {
        self.invariants.first().map(|p| p.nvars).unwrap_or(0)
    }

    pub fn output_dim(&self) -> usize {
        self.equivariants.first().map(|g| g.len()).unwrap_or(0)
    }

    pub fn eval_invariants(&self, x: &[f64]) -> Vec<f64> {
        self.invariants.iter().map(|f| f.eval(x)).collect()
    }

    pub fn eval_equivariant(&self, m: usize, x: &[f64]) -> Vec<f64> {
        self.equivariants[m].iter().map(|p| p.eval(x)).collect()
    }

    /// Checks `f_s(R_γ x) = f_s(x)` and `g_m(R_γ x) = R'_γ g_m(x)` on random
    /// probes in `[-1, 1]^d`, to `1e-8`.
    pub fn validate(&self, rep_in: &OrthogonalRep, rep_out: &OrthogonalRep, probes: usize, seed: u64) -> Result<()> {
        let d = rep_in.dim();
        if rep_in.order() != rep_out.order() {
            return Err(Error::shape("input and output representations must be of the same group"));
        }
        if self.invariants.iter().any(|f| f.nvars != d) || self.equivariants.iter().flatten().any(|p| p.nvars != d) {
            return Err(Error::shape(format!("all features must take {d} variables")));
        }
        if self.equivariants.iter().any(|g| g.len() != rep_out.dim()) {
            return Err(Error::shape(format!("equivariants must have {} components", rep_out.dim())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..probes {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for g in 0..rep_in.order() {
                let gx = rep_in.apply(g, &x);
                for (s, f) in self.invariants.iter().enumerate() {
                    if (f.eval(&gx) - f.eval(&x)).abs() > 1e-8 {
                        return Err(Error::param(format!("invariant {s} is not invariant under element {g}")));
                    }
                }
                for m in 0..self.equivariants.len() {
                    let lhs = self.eval_equivariant(m, &gx);
                    let rhs = rep_out.apply(g, &self.eval_equivariant(m, &x));
                    if lhs.iter().zip(&rhs).any(|(a, b)| (a - b).abs() > 1e-8) {
                        return Err(Error::param(format!("equivariant {m} is not equivariant under element {g}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// The constant map `1`, turning an equivariant ansatz into an invariant one.
    pub fn with_unit_equivariant(mut self) -> Self {
        let d = self.input_dim();
        self.equivariants = vec![vec![Polynomial::constant(d, 1.0)]];
        self
    }

    /// Sign flip on `ℝ²`: invariants `x₁², x₂², x₁x₂`; equivariants `x ↦ x`.
    pub fn z2_sign_plane() -> Self {
        let mono = |a: u32, b: u32| Polynomial { nvars: 2, terms: vec![(vec![a, b], 1.0)] };
        Self {
            invariants: vec![mono(2, 0), mono(0, 2), mono(1, 1)],
            equivariants: vec![vec![Polynomial::var(2, 0), Polynomial::var(2, 1)]],
        }
    }

    /// Quarter turns of the plane: `|z|², Re z⁴, Im z⁴`; equivariants `z` and `z̄³`
    /// as real 2-vectors.
    pub fn z4_rotation_plane() -> Self {
        let p = |t: &[(u32, u32, f64)]| Polynomial { nvars: 2, terms: t.iter().map(|&(a, b, c)| (vec![a, b], c)).collect() };
        Self {
            invariants: vec![
                p(&[(2, 0, 1.0), (0, 2, 1.0)]),
                p(&[(4, 0, 1.0), (2, 2, -6.0), (0, 4, 1.0)]),
                p(&[(3, 1, 4.0), (1, 3, -4.0)]),
            ],
            equivariants: vec![
                vec![Polynomial::var(2, 0), Polynomial::var(2, 1)],
                vec![p(&[(3, 0, 1.0), (1, 2, -3.0)]), p(&[(0, 3, 1.0), (2, 1, -3.0)])],
            ],
        }
    }

    /// Permutations of `ℝ^n`: power sums `p_1..p_n`; equivariants
    /// `x ↦ (x_i^{k})_i` for `k = 0..n-1`.
    pub fn symmetric_power_sums(n: usize) -> Self {
        let invariants = (1..=n as u32)
            .map(|k| Polynomial {
                nvars: n,
                terms: (0..n)
                    .map(|i| {
                        let mut e = vec![0; n];
                        e[i] = k;
                        (e, 1.0)
                    })
                    .collect(),
            })
            .collect();
        let equivariants = (0..n as u32)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        let mut e = vec![0; n];
                        e[i] = k;
                        Polynomial { nvars: n, terms: vec![(e, 1.0)] }
                    })
                    .collect()
            })
            .collect();
        Self { invariants, equivariants }
    }

    /// Multisymmetric power sums `Σ_n Π_c y_{n,c}^{e_c}` over `n` points in
    /// `ℝ^m`, for all exponent vectors with `1 ≤ |e| ≤ degree`. Input layout
    /// is row-major `(n, m)`.
    pub fn multisymmetric_power_sums(n: usize, m: usize, degree: u32) -> Self {
        let mut exps = Vec::new();
        let mut cur = vec![0u32; m];
        fn rec(c: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if c == cur.len() {
                if cur.iter().sum::<u32>() > 0 {
                    out.push(cur.clone());
                }
                return;
            }
            for e in 0..=left {
                cur[c] = e;
                rec(c + 1, left - e, cur, out);
            }
            cur[c] = 0;
        }
        rec(0, degree, &mut cur, &mut exps);
        let invariants = exps
            .into_iter()
            .map(|e| Polynomial {
                nvars: n * m,
                terms: (0..n)
                    .map(|row| {
                        let mut full = vec![0; n * m];
                        full[row * m..row * m + m].copy_from_slice(&e);
                        (full, 1.0)
                    })
                    .collect(),
            })
            .collect();
        Self { invariants, equivariants: vec![vec![Polynomial::constant(n * m, 1.0)]] }
    }
}
