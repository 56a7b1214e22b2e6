use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::fit::RandomFeatureModel;
use super::poly::PolyFeatureSet;
use crate::error::{Error, Result};

/// `x ↦ Σ_n Σ_m c_mn g_m(x) σ(Σ_s w_mns f_s(x) + h_mn)`.
///
/// Flat layouts: `c[m·N + n]`, `h[m·N + n]`, `w[(m·N + n)·S + s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyAnsatz {
    pub features: PolyFeatureSet,
    pub units: usize,
    pub c: Vec<f64>,
    pub w: Vec<f64>,
    pub h: Vec<f64>,
    #[serde(default)]
    pub activation: Activation,
}

impl PolyAnsatz {
    pub fn new(features: PolyFeatureSet, units: usize, c: Vec<f64>, w: Vec<f64>, h: Vec<f64>, activation: Activation) -> Result<Self> {
        let a = Self { features, units, c, w, h, activation };
        a.check()?;
        Ok(a)
    }

    fn check(&self) -> Result<()> {
        let mn = self.features.equivariants.len() * self.units;
        let s = self.features.invariants.len();
        if self.c.len() != mn || self.h.len() != mn || self.w.len() != mn * s {
            return Err(Error::shape(format!(
                "expected c, h of length {mn} and w of length {}, got {}, {}, {}",
                mn * s,
                self.c.len(),
                self.h.len(),
                self.w.len()
            )));
        }
        Ok(())
    }

    /// Inner weights uniform on `[-1, 1]`, outer weights zero.
    pub fn random<R: Rng>(features: PolyFeatureSet, units: usize, activation: Activation, rng: &mut R) -> Self {
        let mn = features.equivariants.len() * units;
        let s = features.invariants.len();
        let w = (0..mn * s).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = (0..mn).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self { features, units, c: vec![0.0; mn], w, h, activation }
    }

    fn gates(&self, f: &[f64]) -> Vec<f64> {
        let s = f.len();
        (0..self.h.len())
            .map(|k| {
                let z: f64 = self.w[k * s..(k + 1) * s].iter().zip(f).map(|(a, b)| a * b).sum::<f64>() + self.h[k];
                self.activation.apply(z)
            })
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check()?;
        if x.len() != self.features.input_dim() {
            return Err(Error::shape(format!("input has length {}, expected {}", x.len(), self.features.input_dim())));
        }
        let f = self.features.eval_invariants(x);
        let gates = self.gates(&f);
        let mut out = vec![0.0; self.features.output_dim()];
        for m in 0..self.features.equivariants.len() {
            let g = self.features.eval_equivariant(m, x);
            for n in 0..self.units {
                let k = m * self.units + n;
                let s = self.c[k] * gates[k];
                for (o, gv) in out.iter_mut().zip(&g) {
                    *o += s * gv;
                }
            }
        }
        Ok(out)
    }
}

impl RandomFeatureModel for PolyAnsatz {
    fn input_len(&self) -> usize {
        self.features.input_dim()
    }

    /// Scalar output only: the unit features `g_m(x)·σ(·)` for the first output component.
    fn features(&self, x: &[f64]) -> Vec<f64> {
        let f = self.features.eval_invariants(x);
        let gates = self.gates(&f);
        let mut out = Vec::with_capacity(gates.len());
        for m in 0..self.features.equivariants.len() {
            let g0 = self.features.equivariants[m][0].eval(x);
            for n in 0..self.units {
                out.push(g0 * gates[m * self.units + n]);
            }
        }
        out
    }

    fn set_outer(&mut self, c: &[f64]) {
        self.c = c.to_vec();
    }
}

/// One isotypic block: `multiplicity` copies of an irreducible of dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotypeBlock {
    pub dim: usize,
    pub multiplicity: usize,
}

/// Shared features on the reference module `V' = ⊕_α V_α ⊗ ℝ^{dim V_α}`
/// precomposed with block maps `A_t = ⊕_α 1 ⊗ A_{t,α}`.
///
/// Input layout: for each block, for each copy `i < m_α`, the `dim V_α`
/// components. `maps[t][α]` is `m_α × dim V_α` row-major and sends copy `i`
/// to reference copy `j` with weight `A[i][j]`.
/// Outer layout as in [`PolyAnsatz`], with `t` in place of `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarizedAnsatz {
    pub blocks: Vec<IsotypeBlock>,
    pub maps: Vec<Vec<Vec<f64>>>,
    pub features: PolyFeatureSet,
    pub c: Vec<f64>,
    pub w: Vec<f64>,
    pub h: Vec<f64>,
    #[serde(default)]
    pub activation: Activation,
}

impl PolarizedAnsatz {
    pub fn input_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.multiplicity).sum()
    }

    pub fn reference_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    pub fn terms(&self) -> usize {
        self.maps.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.input_dim() != self.reference_dim() {
            return Err(Error::shape(format!(
                "features take {} variables but the reference module has dimension {}",
                self.features.input_dim(),
                self.reference_dim()
            )));
        }
        for (t, m) in self.maps.iter().enumerate() {
            if m.len() != self.blocks.len() {
                return Err(Error::shape(format!("map {t} has {} blocks, expected {}", m.len(), self.blocks.len())));
            }
            for (a, (blk, mat)) in self.blocks.iter().zip(m).enumerate() {
                if mat.len() != blk.multiplicity * blk.dim {
                    return Err(Error::shape(format!(
                        "map {t} block {a} must be {}x{}, got {} entries",
                        blk.multiplicity,
                        blk.dim,
                        mat.len()
                    )));
                }
            }
        }
        let mt = self.features.equivariants.len() * self.terms();
        let s = self.features.invariants.len();
        if self.c.len() != mt || self.h.len() != mt || self.w.len() != mt * s {
            return Err(Error::shape("outer weight lengths do not match the feature set and term count"));
        }
        Ok(())
    }

    /// Block maps, inner weights and biases uniform on `[-1, 1]`; outer zero.
    pub fn random<R: Rng>(blocks: Vec<IsotypeBlock>, features: PolyFeatureSet, terms: usize, activation: Activation, rng: &mut R) -> Self {
        let maps = (0..terms)
            .map(|_| {
                blocks
                    .iter()
                    .map(|b| (0..b.multiplicity * b.dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect()
            })
            .collect();
        let mt = features.equivariants.len() * terms;
        let s = features.invariants.len();
        let w = (0..mt * s).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = (0..mt).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self { blocks, maps, features, c: vec![0.0; mt], w, h, activation }
    }

    /// `A_t x` in the reference layout.
    pub fn block_map(&self, t: usize, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.reference_dim());
        let mut off = 0;
        for (blk, a) in self.blocks.iter().zip(&self.maps[t]) {
            let (m, d) = (blk.multiplicity, blk.dim);
            for j in 0..d {
                for k in 0..d {
                    out.push((0..m).map(|i| a[i * d + j] * x[off + i * d + k]).sum());
                }
            }
            off += m * d;
        }
        out
    }

    fn gate(&self, k: usize, f: &[f64]) -> f64 {
        let s = f.len();
        let z: f64 = self.w[k * s..(k + 1) * s].iter().zip(f).map(|(a, b)| a * b).sum::<f64>() + self.h[k];
        self.activation.apply(z)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        if x.len() != self.input_dim() {
            return Err(Error::shape(format!("input has length {}, expected {}", x.len(), self.input_dim())));
        }
        let t_count = self.terms();
        let mut out = vec![0.0; self.features.output_dim()];
        for t in 0..t_count {
            let y = self.block_map(t, x);
            let f = self.features.eval_invariants(&y);
            for m in 0..self.features.equivariants.len() {
                let k = m * t_count + t;
                let s = self.c[k] * self.gate(k, &f);
                for (o, gv) in out.iter_mut().zip(self.features.eval_equivariant(m, &y)) {
                    *o += s * gv;
                }
            }
        }
        Ok(out)
    }
}

impl RandomFeatureModel for PolarizedAnsatz {
    fn input_len(&self) -> usize {
        self.input_dim()
    }

    fn features(&self, x: &[f64]) -> Vec<f64> {
        let t_count = self.terms();
        let n_eq = self.features.equivariants.len();
        let mut out = vec![0.0; n_eq * t_count];
        for t in 0..t_count {
            let y = self.block_map(t, x);
            let f = self.features.eval_invariants(&y);
            for m in 0..n_eq {
                let k = m * t_count + t;
                out[k] = self.features.equivariants[m][0].eval(&y) * self.gate(k, &f);
            }
        }
        out
    }

    fn set_outer(&mut self, c: &[f64]) {
        self.c = c.to_vec();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::fit::fit_outer;
    use crate::invariant::poly::Polynomial;
    use crate::invariant::rep::OrthogonalRep;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square_feature() -> PolyFeatureSet {
        PolyFeatureSet {
            invariants: vec![Polynomial::new(1, vec![(vec![2], 1.0)]).unwrap()],
            equivariants: vec![vec![Polynomial::var(1, 0)]],
        }
    }

    #[test]
    fn odd_equivariant_example() {
        let a = PolyAnsatz::new(square_feature(), 1, vec![1.0], vec![1.0], vec![0.0], Activation::Tanh).unwrap();
        for &x in &[0.3, 1.7, -2.0] {
            let v = a.eval(&[x]).unwrap()[0];
            assert_eq!(v, x * (x * x).tanh());
            assert_eq!(a.eval(&[-x]).unwrap()[0], -v);
        }
    }

    #[test]
    fn zero_outer_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = PolyAnsatz::random(PolyFeatureSet::z4_rotation_plane(), 6, Activation::Tanh, &mut rng);
        assert_eq!(a.eval(&[0.4, -0.2]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn invariant_hand_value() {
        let feats = square_feature().with_unit_equivariant();
        let a = PolyAnsatz::new(feats, 1, vec![1.0], vec![1.0], vec![0.0], Activation::Tanh).unwrap();
        let v = a.eval(&[2.0]).unwrap()[0];
        assert!((v - 0.999_329_299_739_067).abs() < 1e-12);
    }

    #[test]
    fn ansatz_symmetry_on_random_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rep = OrthogonalRep::z4_rotation();
        let mut a = PolyAnsatz::random(PolyFeatureSet::z4_rotation_plane(), 5, Activation::Tanh, &mut rng);
        a.c = (0..a.c.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..100 {
            let x = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let fx = a.eval(&x).unwrap();
            for g in 0..4 {
                let lhs = a.eval(&rep.apply(g, &x)).unwrap();
                let rhs = rep.apply(g, &fx);
                assert!((lhs[0] - rhs[0]).abs() <= 1e-10 && (lhs[1] - rhs[1]).abs() <= 1e-10);
            }
        }
    }

    fn sum_square_ansatz(maps: Vec<Vec<Vec<f64>>>, c: Vec<f64>, w: Vec<f64>, h: Vec<f64>) -> PolarizedAnsatz {
        PolarizedAnsatz {
            blocks: vec![IsotypeBlock { dim: 1, multiplicity: 2 }],
            maps,
            features: PolyFeatureSet {
                invariants: vec![Polynomial::new(1, vec![(vec![2], 1.0)]).unwrap()],
                equivariants: vec![vec![Polynomial::constant(1, 1.0)]],
            },
            c,
            w,
            h,
            activation: Activation::Tanh,
        }
    }

    #[test]
    fn polarized_forced_composition() {
        let a = sum_square_ansatz(vec![vec![vec![1.0, 1.0]]], vec![1.0], vec![1.0], vec![0.0]);
        assert_eq!(a.block_map(0, &[0.25, 0.5]), vec![0.75]);
        let v = a.eval(&[0.25, 0.5]).unwrap()[0];
        assert_eq!(v, (0.75f64 * 0.75).tanh());
        assert_eq!(a.eval(&[0.5, 0.25]).unwrap()[0], v);
    }

    #[test]
    fn polarized_zero_map_is_constant() {
        let a = sum_square_ansatz(vec![vec![vec![0.0, 0.0]]; 2], vec![0.5, -1.0], vec![2.0, 3.0], vec![0.1, -0.2]);
        let want = 0.5 * 0.1f64.tanh() - (-0.2f64).tanh();
        for x in [[0.3, 0.9], [-1.0, 0.0]] {
            assert!((a.eval(&x).unwrap()[0] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn polarized_fit_of_sum_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a = PolarizedAnsatz::random(
            vec![IsotypeBlock { dim: 1, multiplicity: 2 }],
            PolyFeatureSet {
                invariants: vec![Polynomial::new(1, vec![(vec![2], 1.0)]).unwrap()],
                equivariants: vec![vec![Polynomial::constant(1, 1.0)]],
            },
            64,
            Activation::Tanh,
            &mut rng,
        );
        let pts: Vec<Vec<f64>> = (0..21).flat_map(|i| (0..21).map(move |j| vec![-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64])).collect();
        let ys: Vec<f64> = pts.iter().map(|x| (x[0] + x[1]).powi(2)).collect();
        fit_outer(&mut a, &pts, &ys, 1e-10).unwrap();
        let test: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let mse: f64 = test.iter().map(|x| (a.eval(x).unwrap()[0] - (x[0] + x[1]).powi(2)).powi(2)).sum::<f64>() / 40.0;
        assert!(mse.sqrt() < 1e-3, "rmse {}", mse.sqrt());
        // Invariance under the diagonal sign action holds for any weights.
        for x in &test {
            assert!((a.eval(x).unwrap()[0] - a.eval(&[-x[0], -x[1]]).unwrap()[0]).abs() < 1e-12);
        }
    }
}
