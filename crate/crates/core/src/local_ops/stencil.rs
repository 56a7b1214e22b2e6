use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FieldType, Signal};

/// The five-point stencils. Each shrinks the grid by one node per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StencilKind {
    /// `(1/4λ)[(Φ(x+λ) − Φ(x−λ)) − i(Φ(y+λ) − Φ(y−λ))]`
    Dz,
    /// `(1/4λ)[(Φ(x+λ) − Φ(x−λ)) + i(Φ(y+λ) − Φ(y−λ))]`
    Dzbar,
    /// `(1/λ²)(Φ(x±λ) + Φ(y±λ) − 4Φ)`
    Laplace,
    /// `1 + (λ²/8)Δ`, i.e. neighbours weighted 1/8 and the centre 1/2.
    Smooth,
}

impl std::str::FromStr for StencilKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dz" => Ok(Self::Dz),
            "dzbar" => Ok(Self::Dzbar),
            "laplace" => Ok(Self::Laplace),
            "smooth" => Ok(Self::Smooth),
            _ => Err(Error::param(format!("unknown stencil kind {s:?}"))),
        }
    }
}

/// `⌈4/λ²⌉`, the number of smoothing layers at spacing `λ`.
pub fn smoothing_steps(spacing: f64) -> usize {
    let r = 4.0 / (spacing * spacing);
    let n = r.round();
    if (r - n).abs() <= 1e-9 * n.max(1.0) {
        n as usize
    } else {
        r.ceil() as usize
    }
}

pub fn stencil_apply(kind: StencilKind, s: &Signal) -> Result<Signal> {
    let grid = s.grid();
    if grid.half_width() < 1 {
        return Err(Error::GridTooSmall { needed: 1, available: 0 });
    }
    let out_grid = grid.shrink(1)?;
    let d = s.channels();
    let lam = grid.spacing();
    let side = grid.side();
    let out_side = out_grid.side();
    let v = s.values();
    let sx = side * d;
    let mut out = Vec::with_capacity(out_grid.node_count() * d);

    let i = Complex64::new(0.0, 1.0);
    let q = 1.0 / (4.0 * lam);
    let inv_l2 = 1.0 / (lam * lam);
    for ox in 0..out_side {
        for oy in 0..out_side {
            // Same node in input storage: offset by one in each axis.
            let base = ((ox + 1) * side + (oy + 1)) * d;
            for c in 0..d {
                let k = base + c;
                let (xp, xm, yp, ym, ctr) = (v[k + sx], v[k - sx], v[k + d], v[k - d], v[k]);
                let val = match kind {
                    StencilKind::Dz => ((xp - xm) - i * (yp - ym)) * q,
                    StencilKind::Dzbar => ((xp - xm) + i * (yp - ym)) * q,
                    StencilKind::Laplace => ((xp + xm) + (yp + ym) - ctr * 4.0) * inv_l2,
                    StencilKind::Smooth => ((xp + xm) + (yp + ym)) * 0.125 + ctr * 0.5,
                };
                out.push(val);
            }
        }
    }
    let field = match kind {
        StencilKind::Dz | StencilKind::Dzbar => FieldType::Complex,
        _ => s.field(),
    };
    if field == FieldType::Real {
        for v in out.iter_mut() {
            v.im = 0.0;
        }
    }
    Ok(Signal::from_parts(out_grid, d, field, out))
}

/// `⌈4/λ²⌉` applications of the smoothing stencil.
pub fn smooth_chain(s: &Signal) -> Result<Signal> {
    let n = smoothing_steps(s.grid().spacing());
    if s.grid().half_width() < n {
        return Err(Error::GridTooSmall { needed: n, available: s.grid().half_width() });
    }
    let mut cur = s.clone();
    for _ in 0..n {
        cur = stencil_apply(StencilKind::Smooth, &cur)?;
    }
    Ok(cur)
}

/// Smoothing chain, then `a` applications of ∂_z and `b` of ∂_z̄.
pub fn discrete_deriv_chain(s: &Signal, a: u32, b: u32) -> Result<Signal> {
    let n = smoothing_steps(s.grid().spacing());
    let needed = n + (a + b) as usize;
    if s.grid().half_width() < needed {
        return Err(Error::GridTooSmall { needed, available: s.grid().half_width() });
    }
    let mut cur = smooth_chain(s)?;
    for _ in 0..a {
        cur = stencil_apply(StencilKind::Dz, &cur)?;
    }
    for _ in 0..b {
        cur = stencil_apply(StencilKind::Dzbar, &cur)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{AnalyticField, FieldKind};
    use crate::grid::GridSpec;
    use crate::zpoly::ZPoly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn steps() {
        assert_eq!(smoothing_steps(2.0), 1);
        assert_eq!(smoothing_steps(1.0), 4);
        assert_eq!(smoothing_steps(0.5), 16);
        assert_eq!(smoothing_steps(0.125), 256);
        assert_eq!(smoothing_steps(0.3), 45);
    }

    #[test]
    fn smooth_keeps_constants() {
        let s = Signal::constant(GridSpec::new(0.7, 3).unwrap(), 2, 1.5);
        let o = stencil_apply(StencilKind::Smooth, &s).unwrap();
        assert_eq!(o.grid().half_width(), 2);
        assert!(o.values().iter().all(|v| *v == c(1.5, 0.0)));
    }

    #[test]
    fn dz_of_z_is_one() {
        for &lam in &[1.0, 0.5, 0.3] {
            let f = AnalyticField::single(FieldKind::CoordinateMonomial { a: 1, b: 0, coeff: c(1.0, 0.0) }).unwrap();
            let s = Signal::sample(&f, GridSpec::new(lam, 4).unwrap()).unwrap();
            let dz = stencil_apply(StencilKind::Dz, &s).unwrap();
            let dzb = stencil_apply(StencilKind::Dzbar, &s).unwrap();
            assert!(dz.values().iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-12));
            assert!(dzb.values().iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn laplace_of_r2_is_four() {
        let f = AnalyticField::single(FieldKind::CoordinateMonomial { a: 1, b: 1, coeff: c(1.0, 0.0) }).unwrap();
        let s = Signal::sample(&f, GridSpec::new(0.5, 5).unwrap()).unwrap();
        let l = stencil_apply(StencilKind::Laplace, &s).unwrap();
        assert_eq!(l.field(), FieldType::Real);
        assert!(l.values().iter().all(|v| (v.re - 4.0).abs() < 1e-12));
    }

    #[test]
    fn too_small() {
        let s = Signal::constant(GridSpec::new(1.0, 0).unwrap(), 1, 1.0);
        assert!(matches!(stencil_apply(StencilKind::Dz, &s), Err(Error::GridTooSmall { .. })));
        let s = Signal::constant(GridSpec::new(1.0, 3).unwrap(), 1, 1.0);
        assert!(smooth_chain(&s).is_err());
        let s = Signal::constant(GridSpec::new(1.0, 4).unwrap(), 1, 1.0);
        assert!(discrete_deriv_chain(&s, 1, 0).is_err());
    }

    #[test]
    fn single_smoothing_step_at_spacing_two() {
        let s = Signal::delta(GridSpec::new(2.0, 2).unwrap(), 1);
        let o = smooth_chain(&s).unwrap();
        assert_eq!(o.grid().half_width(), 1);
        assert_eq!(o.get(0, 0, 0), c(0.5, 0.0));
        for (x, y) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            assert_eq!(o.get(x, y, 0), c(0.125, 0.0));
        }
        assert_eq!(o.get(1, 1, 0), c(0.0, 0.0));
    }

    #[test]
    fn chain_matches_repeated_convolution() {
        // Naive full-plane convolution of the stencil with itself four times.
        let mut k = vec![vec![0.0f64; 9]; 9];
        k[4][4] = 1.0;
        for _ in 0..4 {
            let mut n = vec![vec![0.0f64; 9]; 9];
            for x in 0..9i32 {
                for y in 0..9i32 {
                    let mut acc = 0.0;
                    for (dx, dy, w) in [(0, 0, 0.5), (1, 0, 0.125), (-1, 0, 0.125), (0, 1, 0.125), (0, -1, 0.125)] {
                        let (sx, sy) = (x - dx, y - dy);
                        if (0..9).contains(&sx) && (0..9).contains(&sy) {
                            acc += w * k[sx as usize][sy as usize];
                        }
                    }
                    n[x as usize][y as usize] = acc;
                }
            }
            k = n;
        }
        let s = Signal::delta(GridSpec::new(1.0, 8).unwrap(), 1);
        let o = smooth_chain(&s).unwrap();
        assert_eq!(o.grid().half_width(), 4);
        for (x, y) in o.grid().nodes() {
            assert!((o.get(x, y, 0).re - k[(x + 4) as usize][(y + 4) as usize]).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_chain_kills_constants() {
        let s = Signal::constant(GridSpec::new(1.0, 7).unwrap(), 1, 3.0);
        let o0 = discrete_deriv_chain(&s, 0, 0).unwrap();
        assert_eq!(o0, smooth_chain(&s).unwrap());
        for (a, b) in [(1, 0), (0, 1), (2, 1)] {
            let o = discrete_deriv_chain(&s, a, b).unwrap();
            assert!(o.values().iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn derivatives_commute_exactly_on_dyadic_data() {
        // With λ = 1/4 the prefactor is 1 and all intermediate values are
        // small integers, so both orders are exact.
        let grid = GridSpec::new(0.25, 6).unwrap();
        let s = Signal::from_real_fn(grid, 1, |x, y, _| ((x * 7 + y * 3 + x * y) % 11) as f64).unwrap();
        let ab = stencil_apply(StencilKind::Dzbar, &stencil_apply(StencilKind::Dz, &s).unwrap()).unwrap();
        let ba = stencil_apply(StencilKind::Dz, &stencil_apply(StencilKind::Dzbar, &s).unwrap()).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn conjugation_swaps_derivatives() {
        let p = ZPoly::from_terms([(1, 0, c(0.3, 0.7)), (0, 2, c(-0.2, 0.1)), (0, 0, c(1.0, 0.5))]);
        let f = AnalyticField::single(FieldKind::GaussianPoly { poly: p, center: [0.1, 0.2], width: 1.3 }).unwrap();
        let s = Signal::sample(&f, GridSpec::new(0.4, 6).unwrap()).unwrap();
        let lhs = stencil_apply(StencilKind::Dzbar, &s.conj()).unwrap();
        let rhs = stencil_apply(StencilKind::Dz, &s).unwrap().conj();
        assert_eq!(lhs, rhs);
    }
}
