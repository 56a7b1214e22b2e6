use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{AnalyticField, FieldKind};
use crate::zpoly::ZPoly;

/// Highest derivative order accepted per Wirtinger variable.
pub const MAX_DERIVATIVE_ORDER: u32 = 8;

/// `poly(z, z̄) · (1/2π) e^{-|x|²/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyGaussian {
    pub poly: ZPoly,
}

impl PolyGaussian {
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let z = Complex64::new(x, y);
        self.poly.eval(z) * gaussian(x, y)
    }
}

#[inline]
fn gaussian(x: f64, y: f64) -> f64 {
    (-(x * x + y * y) / 2.0).exp() / (2.0 * PI)
}

/// `∂_z^a ∂_z̄^b` of the unit Gaussian, via `p ↦ ∂_z p − (z̄/2)p` and
/// `p ↦ ∂_z̄ p − (z/2)p` starting from `p = 1`.
pub fn gaussian_deriv_kernel(a: u32, b: u32) -> Result<PolyGaussian> {
    if a > MAX_DERIVATIVE_ORDER || b > MAX_DERIVATIVE_ORDER {
        return Err(Error::DegreeGuard { a, b, max: MAX_DERIVATIVE_ORDER });
    }
    let half = Complex64::new(-0.5, 0.0);
    let mut p = ZPoly::one();
    for _ in 0..a {
        p = p.d_dz().add(&p.shift_mul(0, 1, half));
    }
    for _ in 0..b {
        p = p.d_dzbar().add(&p.shift_mul(1, 0, half));
    }
    Ok(PolyGaussian { poly: p })
}

/// Quadrature step for [`continuum_conv`].
pub const CONV_STEP: f64 = 0.05;
/// Half-side of the square `y`-domain for [`continuum_conv`].
pub const CONV_RADIUS: f64 = 8.0;

/// `∫ f(x − y) Ψ_{a,b}(y) d²y` per channel of `f`.
pub fn continuum_conv(f: &AnalyticField, a: u32, b: u32, x: [f64; 2]) -> Result<Vec<Complex64>> {
    let mut all = continuum_conv_many(f, &[(a, b)], x)?;
    Ok(all.pop().expect("one pair requested"))
}

/// [`continuum_conv`] for several `(a, b)` at once, sharing the field samples.
/// Result is indexed `[pair][channel]`.
pub fn continuum_conv_many(f: &AnalyticField, pairs: &[(u32, u32)], x: [f64; 2]) -> Result<Vec<Vec<Complex64>>> {
    if let Some(k) = f.components.iter().find(|k| matches!(k, FieldKind::CoordinateMonomial { .. })) {
        return Err(Error::UnsupportedField(format!(
            "continuum convolution needs a bounded field; got {}",
            serde_json::to_string(k).unwrap_or_default()
        )));
    }
    let kernels: Vec<ZPoly> = pairs
        .iter()
        .map(|&(a, b)| gaussian_deriv_kernel(a, b).map(|k| k.poly))
        .collect::<Result<_>>()?;
    let d = f.channels();
    let n = (CONV_RADIUS / CONV_STEP).round() as i64;
    let h = CONV_STEP;
    let mut acc = vec![vec![Complex64::default(); d]; pairs.len()];
    let mut fv = vec![Complex64::default(); d];
    let mut kv = vec![Complex64::default(); pairs.len()];
    for i in -n..=n {
        let y1 = i as f64 * h;
        let wi = if i.abs() == n { 0.5 } else { 1.0 };
        for j in -n..=n {
            let y2 = j as f64 * h;
            let wj = if j.abs() == n { 0.5 } else { 1.0 };
            let g = gaussian(y1, y2) * wi * wj;
            let z = Complex64::new(y1, y2);
            for (k, p) in kv.iter_mut().zip(&kernels) {
                *k = p.eval(z) * g;
            }
            f.eval_into(x[0] - y1, x[1] - y2, &mut fv);
            for (row, k) in acc.iter_mut().zip(&kv) {
                for (o, v) in row.iter_mut().zip(&fv) {
                    *o += k * v;
                }
            }
        }
    }
    for row in acc.iter_mut() {
        for v in row.iter_mut() {
            *v *= h * h;
        }
    }
    Ok(acc)
}
