use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearTerm {
    pub mu: i32,
    pub n: usize,
    pub n1: usize,
    pub w: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTerm {
    pub mu1: i32,
    pub mu2: i32,
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub w: Complex64,
}

impl QuadraticTerm {
    pub fn mu(&self) -> i32 {
        self.mu1 + self.mu2
    }
}

/// Weights of one multiplication layer:
/// `Ψ_{μ,n} = w0_n·1[μ=0] + Σ w1_{μ,n,n1} Φ_{μ,n1} + Σ_{μ1+μ2=μ} w2 Φ_{μ1,n1} Φ_{μ2,n2}`.
///
/// Terms are stored sparsely and can only be added through the checked
/// builders, so every stored quadratic term conserves charge.
#[derive(Debug, Clone, PartialEq)]
pub struct MultWeights {
    t_diff: u32,
    in_dim: usize,
    out_dim: usize,
    is_final: bool,
    w0: Vec<Complex64>,
    w1: Vec<LinearTerm>,
    w2: Vec<QuadraticTerm>,
}

impl MultWeights {
    pub fn zeros(t_diff: u32, in_dim: usize, out_dim: usize, is_final: bool) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::param("multiplication layer dimensions must be positive"));
        }
        Ok(Self { t_diff, in_dim, out_dim, is_final, w0: vec![Complex64::default(); out_dim], w1: Vec::new(), w2: Vec::new() })
    }

    pub fn t_diff(&self) -> u32 {
        self.t_diff
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn is_final(&self) -> bool {
        self.is_final
    }

    pub fn w0(&self) -> &[Complex64] {
        &self.w0
    }

    pub fn w1(&self) -> &[LinearTerm] {
        &self.w1
    }

    pub fn w2(&self) -> &[QuadraticTerm] {
        &self.w2
    }

    /// Output charges of this layer.
    pub fn output_charges(&self) -> Vec<i32> {
        if self.is_final {
            vec![0]
        } else {
            let t = self.t_diff as i32;
            (-t..=t).collect()
        }
    }

    fn check_mu(&self, what: &str, mu: i32) -> Result<()> {
        if mu.unsigned_abs() > self.t_diff {
            return Err(Error::ChargeViolation(format!("{what} = {mu} lies outside ±T_diff = ±{}", self.t_diff)));
        }
        Ok(())
    }

    fn check_out(&self, mu: i32, n: usize) -> Result<()> {
        self.check_mu("mu", mu)?;
        if self.is_final && mu != 0 {
            return Err(Error::ChargeViolation(format!("final layer has only mu = 0 outputs, got mu = {mu}")));
        }
        if n >= self.out_dim {
            return Err(Error::param(format!("output channel {n} out of range 0..{}", self.out_dim)));
        }
        Ok(())
    }

    fn check_in(&self, n1: usize) -> Result<()> {
        if n1 >= self.in_dim {
            return Err(Error::param(format!("input channel {n1} out of range 0..{}", self.in_dim)));
        }
        Ok(())
    }

    pub fn set_w0(&mut self, n: usize, w: Complex64) -> Result<()> {
        self.check_out(0, n)?;
        self.w0[n] = w;
        Ok(())
    }

    pub fn add_w1(&mut self, mu: i32, n: usize, n1: usize, w: Complex64) -> Result<()> {
        self.check_out(mu, n)?;
        self.check_in(n1)?;
        self.w1.push(LinearTerm { mu, n, n1, w });
        Ok(())
    }

    /// Adds `w·Φ_{μ1,n1}Φ_{μ2,n2}` to output `(μ, n)`; rejects `μ1 + μ2 ≠ μ`.
    #[allow(clippy::too_many_arguments)]
    pub fn add_w2(&mut self, mu: i32, mu1: i32, mu2: i32, n: usize, n1: usize, n2: usize, w: Complex64) -> Result<()> {
        if mu1 + mu2 != mu {
            return Err(Error::ChargeViolation(format!("w2 couples mu1 = {mu1}, mu2 = {mu2} into mu = {mu}; need mu1 + mu2 = mu")));
        }
        self.check_mu("mu1", mu1)?;
        self.check_mu("mu2", mu2)?;
        self.check_out(mu, n)?;
        self.check_in(n1)?;
        self.check_in(n2)?;
        self.w2.push(QuadraticTerm { mu1, mu2, n, n1, n2, w });
        Ok(())
    }

    /// Dense random weights, uniform in the complex square `[-1,1]²` scaled
    /// by `1/in_dim` (linear) and `1/in_dim²` (quadratic).
    pub fn random<R: Rng>(t_diff: u32, in_dim: usize, out_dim: usize, is_final: bool, rng: &mut R) -> Result<Self> {
        let mut w = Self::zeros(t_diff, in_dim, out_dim, is_final)?;
        let c = |s: f64, rng: &mut R| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * s;
        let s1 = 1.0 / in_dim as f64;
        let s2 = s1 * s1;
        let t = t_diff as i32;
        for n in 0..out_dim {
            w.w0[n] = c(1.0, rng);
        }
        for mu in w.output_charges() {
            for n in 0..out_dim {
                for n1 in 0..in_dim {
                    let v = c(s1, rng);
                    w.add_w1(mu, n, n1, v)?;
                }
            }
            for mu1 in -t..=t {
                let mu2 = mu - mu1;
                if mu2.abs() > t {
                    continue;
                }
                for n in 0..out_dim {
                    for n1 in 0..in_dim {
                        for n2 in 0..in_dim {
                            let v = c(s2, rng);
                            w.add_w2(mu, mu1, mu2, n, n1, n2, v)?;
                        }
                    }
                }
            }
        }
        Ok(w)
    }

    /// Evaluates the layer at one node. `input[μ + T_diff]` holds the
    /// `in_dim` channels at charge `μ`; the result is laid out the same way
    /// over [`output_charges`](Self::output_charges).
    pub(crate) fn eval_node(&self, input: &[&[Complex64]], out: &mut [Vec<Complex64>]) {
        let t = self.t_diff as i32;
        let slot = |mu: i32| if self.is_final { 0 } else { (mu + t) as usize };
        for o in out.iter_mut() {
            o.iter_mut().for_each(|v| *v = Complex64::default());
        }
        out[slot(0)].copy_from_slice(&self.w0);
        for term in &self.w1 {
            out[slot(term.mu)][term.n] += term.w * input[(term.mu + t) as usize][term.n1];
        }
        for term in &self.w2 {
            let a = input[(term.mu1 + t) as usize][term.n1];
            let b = input[(term.mu2 + t) as usize][term.n2];
            out[slot(term.mu())][term.n] += term.w * a * b;
        }
        if self.is_final {
            for v in out[0].iter_mut() {
                v.im = 0.0;
            }
        }
    }

    pub(crate) fn to_raw(&self) -> RawMultWeights {
        RawMultWeights {
            w0: self.w0.iter().enumerate().filter(|(_, w)| w.norm() != 0.0).map(|(n, w)| (n, w.re, w.im)).collect(),
            w1: self.w1.iter().map(|t| (t.mu, t.n, t.n1, t.w.re, t.w.im)).collect(),
            w2: self.w2.iter().map(|t| (t.mu1, t.mu2, t.n, t.n1, t.n2, t.w.re, t.w.im)).collect(),
        }
    }

    pub(crate) fn from_raw(raw: &RawMultWeights, t_diff: u32, in_dim: usize, out_dim: usize, is_final: bool) -> Result<Self> {
        let mut w = Self::zeros(t_diff, in_dim, out_dim, is_final)?;
        for &(n, re, im) in &raw.w0 {
            w.set_w0(n, Complex64::new(re, im))?;
        }
        for &(mu, n, n1, re, im) in &raw.w1 {
            w.add_w1(mu, n, n1, Complex64::new(re, im))?;
        }
        for &(mu1, mu2, n, n1, n2, re, im) in &raw.w2 {
            w.add_w2(mu1 + mu2, mu1, mu2, n, n1, n2, Complex64::new(re, im))?;
        }
        Ok(w)
    }
}

/// JSON form of one layer: sparse `w0: [n, re, im]`, `w1: [mu, n, n1, re, im]`,
/// `w2: [mu1, mu2, n, n1, n2, re, im]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawMultWeights {
    #[serde(default)]
    pub w0: Vec<(usize, f64, f64)>,
    #[serde(default)]
    pub w1: Vec<(i32, usize, usize, f64, f64)>,
    #[serde(default)]
    pub w2: Vec<(i32, i32, usize, usize, usize, f64, f64)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_conserving_w2() {
        let mut w = MultWeights::zeros(2, 3, 3, false).unwrap();
        let e = w.add_w2(1, 1, 1, 0, 0, 0, Complex64::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::ChargeViolation(_)));
        assert!(w.add_w2(2, 1, 1, 0, 0, 0, Complex64::new(1.0, 0.0)).is_ok());
        assert!(w.add_w2(3, 2, 1, 0, 0, 0, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn final_layer_only_has_zero_charge() {
        let mut w = MultWeights::zeros(1, 2, 1, true).unwrap();
        assert!(w.add_w1(1, 0, 0, Complex64::new(1.0, 0.0)).is_err());
        assert!(w.add_w2(0, 1, -1, 0, 0, 1, Complex64::new(1.0, 0.0)).is_ok());
        assert_eq!(w.output_charges(), vec![0]);
    }

    #[test]
    fn w2_product_example() {
        let mut w = MultWeights::zeros(1, 1, 1, false).unwrap();
        w.add_w2(0, 1, -1, 0, 0, 0, Complex64::new(1.0, 0.0)).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let (m1, z, p1) = ([-i], [Complex64::default()], [i]);
        let input: Vec<&[Complex64]> = vec![&m1, &z, &p1];
        let mut out = vec![vec![Complex64::default(); 1]; 3];
        w.eval_node(&input, &mut out);
        assert_eq!(out[1][0], Complex64::new(1.0, 0.0));
        assert_eq!(out[0][0], Complex64::default());
        assert_eq!(out[2][0], Complex64::default());
    }

    #[test]
    fn raw_roundtrip() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let w = MultWeights::random(1, 2, 2, false, &mut rng).unwrap();
        let back = MultWeights::from_raw(&w.to_raw(), 1, 2, 2, false).unwrap();
        assert_eq!(w, back);
    }
}
