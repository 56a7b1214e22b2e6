use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::fit::RandomFeatureModel;
use super::rep::OrthogonalRep;
use crate::error::{Error, Result};

/// `x ↦ Σ_n y_n σ(l_n·x + h_n)` with `l_n ∈ ℝ^d`, `y_n ∈ ℝ^{d_U}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShallowNet {
    pub input_dim: usize,
    pub output_dim: usize,
    pub units: usize,
    /// `units × input_dim`, row-major.
    pub l: Vec<f64>,
    pub h: Vec<f64>,
    /// `units × output_dim`, row-major.
    pub y: Vec<f64>,
    #[serde(default)]
    pub activation: Activation,
}

#[derive(Debug, Clone, Copy)]
pub enum SymmetrizeMode<'a> {
    Invariant,
    /// Averages `R'_γ^{-1} f(R_γ x)` with `R'` acting on the output.
    Equivariant(&'a OrthogonalRep),
}

impl ShallowNet {
    pub fn new(
        input_dim: usize,
        output_dim: usize,
        l: Vec<f64>,
        h: Vec<f64>,
        y: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        let units = h.len();
        if l.len() != units * input_dim || y.len() != units * output_dim {
            return Err(Error::shape(format!(
                "{units} units need l of length {} and y of length {}, got {} and {}",
                units * input_dim,
                units * output_dim,
                l.len(),
                y.len()
            )));
        }
        Ok(Self { input_dim, output_dim, units, l, h, y, activation })
    }

    /// Inner weights uniform on `[-1, 1]`, outer weights zero.
    pub fn random<R: Rng>(input_dim: usize, output_dim: usize, units: usize, activation: Activation, rng: &mut R) -> Self {
        let l = (0..units * input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = (0..units).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self { input_dim, output_dim, units, l, h, y: vec![0.0; units * output_dim], activation }
    }

    fn hidden(&self, x: &[f64], out: &mut [f64]) {
        for (n, o) in out.iter_mut().enumerate() {
            let row = &self.l[n * self.input_dim..(n + 1) * self.input_dim];
            let z: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.h[n];
            *o = self.activation.apply(z);
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::shape(format!("input has length {}, expected {}", x.len(), self.input_dim)));
        }
        let mut hid = vec![0.0; self.units];
        self.hidden(x, &mut hid);
        let mut out = vec![0.0; self.output_dim];
        for (n, s) in hid.iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate() {
                *o += self.y[n * self.output_dim + k] * s;
            }
        }
        Ok(out)
    }
}

/// Group average of a shallow net; see [`SymmetrizeMode`].
pub fn symmetrize_eval(rep: &OrthogonalRep, net: &ShallowNet, x: &[f64], mode: SymmetrizeMode) -> Result<Vec<f64>> {
    if rep.dim() != net.input_dim || x.len() != net.input_dim {
        return Err(Error::shape(format!(
            "representation dim {}, net input dim {}, x length {} must agree",
            rep.dim(),
            net.input_dim,
            x.len()
        )));
    }
    if let SymmetrizeMode::Equivariant(out) = mode {
        if out.dim() != net.output_dim || out.order() != rep.order() {
            return Err(Error::shape("output representation must match the net output and the group"));
        }
    }
    let mut acc = vec![0.0; net.output_dim];
    for g in 0..rep.order() {
        let v = net.eval(&rep.apply(g, x))?;
        let v = match mode {
            SymmetrizeMode::Invariant => v,
            SymmetrizeMode::Equivariant(out) => out.apply_inverse(g, &v),
        };
        for (a, b) in acc.iter_mut().zip(v) {
            *a += b;
        }
    }
    let k = rep.order() as f64;
    Ok(acc.into_iter().map(|a| a / k).collect())
}

/// A scalar group-averaged shallow net, fitted through its outer weights.
#[derive(Debug, Clone)]
pub struct GroupAveragedNet {
    pub rep: OrthogonalRep,
    pub net: ShallowNet,
}

impl GroupAveragedNet {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(symmetrize_eval(&self.rep, &self.net, x, SymmetrizeMode::Invariant)?[0])
    }
}

impl RandomFeatureModel for GroupAveragedNet {
    fn input_len(&self) -> usize {
        self.net.input_dim
    }

    fn features(&self, x: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.net.units];
        let mut hid = vec![0.0; self.net.units];
        for g in 0..self.rep.order() {
            self.net.hidden(&self.rep.apply(g, x), &mut hid);
            for (a, h) in acc.iter_mut().zip(&hid) {
                *a += h;
            }
        }
        let k = self.rep.order() as f64;
        acc.into_iter().map(|a| a / k).collect()
    }

    fn set_outer(&mut self, c: &[f64]) {
        assert_eq!(self.net.output_dim, 1);
        self.net.y = c.to_vec();
    }
}
