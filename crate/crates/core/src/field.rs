//! Analytic test fields on ℝ², evaluated pointwise before discretization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zpoly::ZPoly;

/// One scalar channel of an [`AnalyticField`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldKind {
    /// `p(w, w̄) · exp(-|w|² / (2 width²))` with `w = z - center`.
    GaussianPoly {
        poly: ZPoly,
        center: [f64; 2],
        width: f64,
    },
    /// A constant value, given as `[re, im]`.
    Constant { value: Complex64 },
    /// `coeff · z^a z̄^b`. Not square-integrable; only usable where a bounded
    /// window is sampled.
    CoordinateMonomial {
        a: u32,
        b: u32,
        #[serde(default = "one")]
        coeff: Complex64,
    },
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl FieldKind {
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        match self {
            FieldKind::GaussianPoly { poly, center, width } => {
                let w = Complex64::new(x - center[0], y - center[1]);
                let r2 = w.norm_sqr();
                poly.eval(w) * (-r2 / (2.0 * width * width)).exp()
            }
            FieldKind::Constant { value } => *value,
            FieldKind::CoordinateMonomial { a, b, coeff } => {
                let z = Complex64::new(x, y);
                coeff * z.powu(*a) * z.conj().powu(*b)
            }
        }
    }

    fn is_real(&self) -> bool {
        match self {
            FieldKind::GaussianPoly { poly, .. } => poly.is_real_valued(0.0),
            FieldKind::Constant { value } => value.im == 0.0,
            FieldKind::CoordinateMonomial { a, b, coeff } => {
                // z^a z̄^a = |z|^{2a} is real; anything else picks up a phase.
                a == b && coeff.im == 0.0
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            FieldKind::GaussianPoly { poly, center, width } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::param(format!("gaussian_poly width must be positive, got {width}")));
                }
                if !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::param("gaussian_poly center must be finite"));
                }
                if poly.terms().any(|(_, _, c)| !(c.re.is_finite() && c.im.is_finite())) {
                    return Err(Error::param("gaussian_poly coefficients must be finite"));
                }
                Ok(())
            }
            FieldKind::Constant { value } => {
                if value.re.is_finite() && value.im.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("constant value must be finite"))
                }
            }
            FieldKind::CoordinateMonomial { coeff, .. } => {
                if coeff.re.is_finite() && coeff.im.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("coordinate_monomial coefficient must be finite"))
                }
            }
        }
    }

    /// The field composed with rotation by `-phi`, i.e. `x ↦ f(R_{-φ} x)`.
    pub fn rotated(&self, phi: f64) -> Self {
        match self {
            FieldKind::GaussianPoly { poly, center, width } => {
                let (s, c) = phi.sin_cos();
                FieldKind::GaussianPoly {
                    poly: poly.rotate_argument(phi),
                    center: [c * center[0] - s * center[1], s * center[0] + c * center[1]],
                    width: *width,
                }
            }
            FieldKind::Constant { .. } => self.clone(),
            FieldKind::CoordinateMonomial { a, b, coeff } => {
                let m = *a as f64 - *b as f64;
                FieldKind::CoordinateMonomial {
                    a: *a,
                    b: *b,
                    coeff: coeff * Complex64::from_polar(1.0, -m * phi),
                }
            }
        }
    }

    /// The field shifted by `t`, i.e. `x ↦ f(x - t)`.
    pub fn translated(&self, t: [f64; 2]) -> Result<Self> {
        match self {
            FieldKind::GaussianPoly { poly, center, width } => Ok(FieldKind::GaussianPoly {
                poly: poly.clone(),
                center: [center[0] + t[0], center[1] + t[1]],
                width: *width,
            }),
            FieldKind::Constant { .. } => Ok(self.clone()),
            FieldKind::CoordinateMonomial { .. } => Err(Error::UnsupportedField(
                "translation of coordinate_monomial is not closed in this family".into(),
            )),
        }
    }
}

/// A multi-channel analytic field; channel `c` is `components[c]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticField {
    pub components: Vec<FieldKind>,
}

impl AnalyticField {
    pub fn new(components: Vec<FieldKind>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::param("an analytic field needs at least one channel"));
        }
        for k in &components {
            k.validate()?;
        }
        Ok(Self { components })
    }

    pub fn single(kind: FieldKind) -> Result<Self> {
        Self::new(vec![kind])
    }

    /// `exp(-|x|²/2)`.
    pub fn unit_gaussian() -> Self {
        Self {
            components: vec![FieldKind::GaussianPoly {
                poly: ZPoly::one(),
                center: [0.0, 0.0],
                width: 1.0,
            }],
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            components: vec![FieldKind::Constant {
                value: Complex64::new(value, 0.0),
            }],
        }
    }

    pub fn channels(&self) -> usize {
        self.components.len()
    }

    pub fn is_real(&self) -> bool {
        self.components.iter().all(FieldKind::is_real)
    }

    pub fn is_square_integrable(&self) -> bool {
        self.components
            .iter()
            .all(|k| matches!(k, FieldKind::GaussianPoly { .. }))
    }

    pub fn eval_into(&self, x: f64, y: f64, out: &mut [Complex64]) {
        for (o, k) in out.iter_mut().zip(&self.components) {
            *o = k.eval(x, y);
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Vec<Complex64> {
        self.components.iter().map(|k| k.eval(x, y)).collect()
    }

    pub fn rotated(&self, phi: f64) -> Self {
        Self {
            components: self.components.iter().map(|k| k.rotated(phi)).collect(),
        }
    }

    pub fn translated(&self, t: [f64; 2]) -> Result<Self> {
        Ok(Self {
            components: self
                .components
                .iter()
                .map(|k| k.translated(t))
                .collect::<Result<_>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rotated_field_is_precomposition() {
        let f = AnalyticField::new(vec![FieldKind::GaussianPoly {
            poly: ZPoly::from_terms([(1, 0, c(0.5, 0.2)), (0, 2, c(-1.0, 0.3)), (0, 0, c(1.0, 0.0))]),
            center: [0.3, -0.4],
            width: 0.8,
        }])
        .unwrap();
        let phi = 0.9;
        let g = f.rotated(phi);
        let (x, y) = (0.7, 0.25);
        // R_{-φ}(x, y)
        let (s, co) = phi.sin_cos();
        let (rx, ry) = (co * x + s * y, -s * x + co * y);
        assert!((g.eval(x, y)[0] - f.eval(rx, ry)[0]).norm() < 1e-12);
    }

    #[test]
    fn translation_shifts_argument() {
        let f = AnalyticField::unit_gaussian();
        let g = f.translated([1.0, -2.0]).unwrap();
        assert!((g.eval(1.5, -1.0)[0] - f.eval(0.5, 1.0)[0]).norm() < 1e-15);
        let m = AnalyticField::single(FieldKind::CoordinateMonomial { a: 1, b: 0, coeff: one() }).unwrap();
        assert!(matches!(m.translated([1.0, 0.0]), Err(Error::UnsupportedField(_))));
    }

    #[test]
    fn realness() {
        assert!(AnalyticField::unit_gaussian().is_real());
        let z = AnalyticField::single(FieldKind::CoordinateMonomial { a: 1, b: 0, coeff: one() }).unwrap();
        assert!(!z.is_real());
        let r2 = AnalyticField::single(FieldKind::CoordinateMonomial { a: 1, b: 1, coeff: one() }).unwrap();
        assert!(r2.is_real());
    }

    #[test]
    fn rejects_bad_width() {
        let bad = FieldKind::GaussianPoly { poly: ZPoly::one(), center: [0.0, 0.0], width: 0.0 };
        assert!(AnalyticField::single(bad).is_err());
    }

    #[test]
    fn json_shape() {
        let f = AnalyticField::unit_gaussian();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(
            s,
            r#"{"components":[{"kind":"gaussian_poly","poly":[[0,0,1.0,0.0]],"center":[0.0,0.0],"width":1.0}]}"#
        );
        let back: AnalyticField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
