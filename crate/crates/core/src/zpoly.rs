//! Sparse polynomials in the Wirtinger variables `z = x + iy` and `z̄ = x - iy`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Σ c_jk z^j z̄^k with sparse complex coefficients.
///
/// Serialized as a list of `[j, k, re, im]` rows in ascending `(j, k)` order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZPoly {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl ZPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(j: u32, k: u32, coeff: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term(j, k, coeff);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, u32, Complex64)>) -> Self {
        let mut p = Self::zero();
        for (j, k, c) in terms {
            p.add_term(j, k, c);
        }
        p
    }

    pub fn add_term(&mut self, j: u32, k: u32, coeff: Complex64) {
        let entry = self.terms.entry((j, k)).or_insert(Complex64::new(0.0, 0.0));
        *entry += coeff;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(j, k));
        }
    }

    pub fn coeff(&self, j: u32, k: u32) -> Complex64 {
        self.terms.get(&(j, k)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, Complex64)> + '_ {
        self.terms.iter().map(|(&(j, k), &c)| (j, k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total degree j + k, or 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(j, k)| j + k).max().unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zb = z.conj();
        self.terms
            .iter()
            .map(|(&(j, k), &c)| c * z.powu(j) * zb.powu(k))
            .sum()
    }

    /// ∂_z, treating z and z̄ as independent.
    pub fn d_dz(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|&(j, _, _)| j > 0)
                .map(|(j, k, c)| (j - 1, k, c * j as f64)),
        )
    }

    /// ∂_z̄, treating z and z̄ as independent.
    pub fn d_dzbar(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|&(_, k, _)| k > 0)
                .map(|(j, k, c)| (j, k - 1, c * k as f64)),
        )
    }

    /// Multiplies by `coeff · z^dj · z̄^dk`.
    pub fn shift_mul(&self, dj: u32, dk: u32, coeff: Complex64) -> Self {
        Self::from_terms(self.terms().map(|(j, k, c)| (j + dj, k + dk, c * coeff)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, k, c) in other.terms() {
            out.add_term(j, k, c);
        }
        out
    }

    /// Coefficients of p(e^{-iφ} z, e^{iφ} z̄): rotating the argument by -φ.
    pub fn rotate_argument(&self, phi: f64) -> Self {
        Self::from_terms(self.terms().map(|(j, k, c)| {
            let m = j as f64 - k as f64;
            (j, k, c * Complex64::from_polar(1.0, -m * phi))
        }))
    }

    /// True when the polynomial is real-valued on ℝ², i.e. c_kj = conj(c_jk).
    pub fn is_real_valued(&self, tol: f64) -> bool {
        self.terms()
            .all(|(j, k, c)| (self.coeff(k, j).conj() - c).norm() <= tol)
    }
}

impl Serialize for ZPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<(u32, u32, f64, f64)> =
            self.terms().map(|(j, k, c)| (j, k, c.re, c.im)).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ZPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<(u32, u32, f64, f64)> = Vec::deserialize(d)?;
        Ok(Self::from_terms(
            rows.into_iter().map(|(j, k, re, im)| (j, k, Complex64::new(re, im))),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wirtinger_derivatives_of_z_zbar() {
        let p = ZPoly::monomial(1, 1, c(1.0, 0.0));
        assert_eq!(p.d_dz(), ZPoly::monomial(0, 1, c(1.0, 0.0)));
        assert_eq!(p.d_dzbar(), ZPoly::monomial(1, 0, c(1.0, 0.0)));
    }

    #[test]
    fn z_zbar_is_squared_modulus() {
        let p = ZPoly::monomial(1, 1, c(1.0, 0.0));
        let v = p.eval(c(3.0, 4.0));
        assert!((v - c(25.0, 0.0)).norm() < 1e-12);
        assert!(p.is_real_valued(0.0));
        assert!(!ZPoly::monomial(1, 0, c(1.0, 0.0)).is_real_valued(0.0));
    }

    #[test]
    fn rotation_matches_direct_substitution() {
        let p = ZPoly::from_terms([(2, 0, c(0.3, -0.1)), (0, 1, c(1.0, 2.0)), (1, 1, c(0.5, 0.0))]);
        let phi = 0.7;
        let z = c(0.4, -1.2);
        let direct = p.eval(z * Complex64::from_polar(1.0, -phi));
        assert!((p.rotate_argument(phi).eval(z) - direct).norm() < 1e-12);
    }

    #[test]
    fn cancelling_terms_are_dropped() {
        let mut p = ZPoly::monomial(1, 0, c(1.0, 0.0));
        p.add_term(1, 0, c(-1.0, 0.0));
        assert!(p.is_zero());
    }

    #[test]
    fn json_roundtrip() {
        let p = ZPoly::from_terms([(0, 0, c(1.0, 0.0)), (2, 1, c(-0.5, 0.25))]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[0,0,1.0,0.0],[2,1,-0.5,0.25]]");
        let back: ZPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
