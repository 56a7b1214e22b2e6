use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::gaussian_deriv_kernel;
use super::stencil::{smoothing_steps, StencilKind};
use crate::error::{Error, Result};
use crate::grid::{FieldType, GridSpec, Signal};
use crate::quadrature::cell_average;

/// Frequency spacing `2π / (Nλ)` for a spatial grid of side `N`.
pub fn frequency_spacing(grid: GridSpec) -> f64 {
    2.0 * PI / (grid.side() as f64 * grid.spacing())
}

/// The frequency grid matching a spatial grid: same half-width, spacing `2π/(Nλ)`.
pub fn frequency_grid(grid: GridSpec) -> GridSpec {
    GridSpec::new(frequency_spacing(grid), grid.half_width()).expect("positive spacing")
}

/// `e^{-2πi m / N}` for `m = 0..N`.
fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|m| Complex64::from_polar(1.0, sign * 2.0 * PI * m as f64 / n as f64))
        .collect()
}

/// Separable transform over both axes: `out[j] = Σ_k in[k] · tw[(j·k) mod N]`
/// with centred indices, then scaled.
fn transform(values: &[Complex64], l: usize, d: usize, sign: f64, scale: f64) -> Vec<Complex64> {
    let n = 2 * l + 1;
    let tw = twiddles(n, sign);
    let li = l as i64;
    let ni = n as i64;
    let idx = |j: i64, k: i64| ((j * k).rem_euclid(ni)) as usize;

    // Along x (the outer storage axis).
    let mut tmp = vec![Complex64::default(); values.len()];
    for jx in -li..=li {
        for kx in -li..=li {
            let w = tw[idx(jx, kx)];
            let src = ((kx + li) as usize) * n * d;
            let dst = ((jx + li) as usize) * n * d;
            for r in 0..n * d {
                tmp[dst + r] += values[src + r] * w;
            }
        }
    }
    // Along y.
    let mut out = vec![Complex64::default(); values.len()];
    for x in 0..n {
        let row = x * n * d;
        for jy in -li..=li {
            let dst = row + ((jy + li) as usize) * d;
            for ky in -li..=li {
                let w = tw[idx(jy, ky)];
                let src = row + ((ky + li) as usize) * d;
                for c in 0..d {
                    out[dst + c] += tmp[src + c] * w;
                }
            }
        }
    }
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// `F(p) = (λ²/2π) Σ_γ Φ(γ) e^{-ip·γ}` on [`frequency_grid`].
pub fn dft2(s: &Signal) -> Signal {
    let g = s.grid();
    let lam = g.spacing();
    let v = transform(s.values(), g.half_width(), s.channels(), -1.0, lam * lam / (2.0 * PI));
    Signal::from_parts(frequency_grid(g), s.channels(), FieldType::Complex, v)
}

/// Inverse of [`dft2`]: `Φ(γ) = (Δp²/2π) Σ_p F(p) e^{ip·γ}`. `spacing` is the
/// spatial `λ` to restore.
pub fn idft2(f: &Signal, spacing: f64) -> Result<Signal> {
    let spatial = GridSpec::new(spacing, f.grid().half_width())?;
    let dp = frequency_spacing(spatial);
    if (dp - f.grid().spacing()).abs() > 1e-12 * dp {
        return Err(Error::GridMismatch(format!(
            "frequency spacing {} does not match 2π/(Nλ) = {dp} for λ = {spacing}",
            f.grid().spacing()
        )));
    }
    let v = transform(f.values(), f.grid().half_width(), f.channels(), 1.0, dp * dp / (2.0 * PI));
    Ok(Signal::from_parts(spatial, f.channels(), FieldType::Complex, v))
}

/// A composed spectral symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolKind {
    Stencil { stencil: StencilKind },
    /// `(Ψ_∂z)^a (Ψ_∂z̄)^b (1 + λ²/8 Ψ_Δ)^{⌈4/λ²⌉}`.
    Chain { a: u32, b: u32 },
}

fn atom(kind: StencilKind, lam: f64, p: [f64; 2]) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let (sx, sy) = ((lam * p[0]).sin(), (lam * p[1]).sin());
    match kind {
        StencilKind::Dz => i / (2.0 * lam) * Complex64::new(sx, -sy),
        StencilKind::Dzbar => i / (2.0 * lam) * Complex64::new(sx, sy),
        StencilKind::Laplace => Complex64::new(laplace_symbol(lam, p), 0.0),
        StencilKind::Smooth => Complex64::new(1.0 + lam * lam / 8.0 * laplace_symbol(lam, p), 0.0),
    }
}

fn laplace_symbol(lam: f64, p: [f64; 2]) -> f64 {
    let (a, b) = ((lam * p[0] / 2.0).sin(), (lam * p[1] / 2.0).sin());
    -4.0 / (lam * lam) * (a * a + b * b)
}

/// Closed-form symbol at `p`, which must lie in `[-π/λ, π/λ]²`.
pub fn fourier_symbol(kind: SymbolKind, lam: f64, p: [f64; 2]) -> Result<Complex64> {
    if !(lam.is_finite() && lam > 0.0) {
        return Err(Error::param(format!("lambda must be positive, got {lam}")));
    }
    let edge = PI / lam * (1.0 + 1e-12);
    if !(p[0].abs() <= edge && p[1].abs() <= edge) {
        return Err(Error::OutsideFundamentalDomain { px: p[0], py: p[1], lambda: lam });
    }
    Ok(symbol_unchecked(kind, lam, p))
}

fn symbol_unchecked(kind: SymbolKind, lam: f64, p: [f64; 2]) -> Complex64 {
    match kind {
        SymbolKind::Stencil { stencil } => atom(stencil, lam, p),
        SymbolKind::Chain { a, b } => {
            let n = smoothing_steps(lam) as i32;
            atom(StencilKind::Dz, lam, p).powu(a)
                * atom(StencilKind::Dzbar, lam, p).powu(b)
                * atom(StencilKind::Smooth, lam, p).re.powi(n)
        }
    }
}

/// Upper bound on `λ² Σ |K|` over nodes outside the half-width-`l` box for
/// the kernel of `(a, b)` at spacing `lam`.
///
/// The smoothing kernel is the law of a lazy walk whose coordinate steps lie
/// in {-1, 0, 1}; Hoeffding bounds each coordinate tail by `2e^{-t²/2n}`.
/// Each derivative stencil has ℓ¹ norm `1/λ` and widens the support by one.
pub fn truncation_bound(a: u32, b: u32, lam: f64, l: usize) -> f64 {
    let n = smoothing_steps(lam);
    let r = (a + b) as usize;
    if l >= n + r {
        return 0.0;
    }
    let t = (l + 1).saturating_sub(r) as f64;
    lam.powi(-(r as i32)) * 4.0 * (-t * t / (2.0 * n as f64)).exp()
}

pub const TRUNCATION_TOL: f64 = 1e-8;

/// Smallest half-width passing the truncation check.
pub fn min_kernel_half_width(a: u32, b: u32, lam: f64) -> usize {
    let mut l = (a + b) as usize;
    while truncation_bound(a, b, lam, l) >= TRUNCATION_TOL {
        l += 1;
    }
    l
}

/// `(1/2π) F_λ^{-1}` of the chain symbol on the `(2L+1)²` grid.
pub fn discrete_kernel(a: u32, b: u32, lam: f64, l: usize) -> Result<Signal> {
    if a > super::kernel::MAX_DERIVATIVE_ORDER || b > super::kernel::MAX_DERIVATIVE_ORDER {
        return Err(Error::DegreeGuard { a, b, max: super::kernel::MAX_DERIVATIVE_ORDER });
    }
    let spatial = GridSpec::new(lam, l)?;
    let bound = truncation_bound(a, b, lam, l);
    if bound >= TRUNCATION_TOL {
        return Err(Error::Truncation { bound, half_width: l });
    }
    let fg = frequency_grid(spatial);
    let kind = SymbolKind::Chain { a, b };
    let mut vals = Vec::with_capacity(fg.node_count());
    for (jx, jy) in fg.nodes() {
        let (px, py) = fg.position(jx, jy);
        vals.push(symbol_unchecked(kind, lam, [px, py]) / (2.0 * PI));
    }
    let spectrum = Signal::from_parts(fg, 1, FieldType::Complex, vals);
    idft2(&spectrum, lam)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelGap {
    pub a: u32,
    pub b: u32,
    pub lambda: f64,
    pub gap: f64,
    pub kernel_l2: f64,
    /// `|λ² Σ K − [a + b = 0]|`: the continuum kernel integrates to 1 or 0.
    pub mass_error: f64,
    pub grid_half_width: usize,
}

/// L² distance between the discrete kernel, extended as a step function, and
/// the cell averages of the continuum kernel.
pub fn kernel_gap(a: u32, b: u32, lam: f64) -> Result<KernelGap> {
    if !(lam > 0.0 && lam <= 1.0) {
        return Err(Error::param(format!("kernel_gap needs lambda in (0, 1], got {lam}")));
    }
    let l = min_kernel_half_width(a, b, lam).max((8.0 / lam).ceil() as usize);
    let k = discrete_kernel(a, b, lam, l)?;
    let psi = gaussian_deriv_kernel(a, b)?;
    let grid = k.grid();
    let mut out = [Complex64::default()];
    let mut scratch = [Complex64::default()];
    let mut diff2 = 0.0;
    let mut mass = Complex64::default();
    for (kx, ky) in grid.nodes() {
        mass += k.get(kx, ky, 0);
        let (cx, cy) = grid.position(kx, ky);
        cell_average(cx, cy, lam, &mut out, &mut scratch, |x, y, o| o[0] = psi.eval(x, y));
        diff2 += (k.get(kx, ky, 0) - out[0]).norm_sqr();
    }
    Ok(KernelGap {
        a,
        b,
        lambda: lam,
        gap: (lam * lam * diff2).sqrt(),
        kernel_l2: k.l2_norm(),
        mass_error: (mass * lam * lam - if a + b == 0 { 1.0 } else { 0.0 }).norm(),
        grid_half_width: l,
    })
}

/// `(1/4π²) ∫∫ ((|p_x|+|p_y|)/2)^{2k} e^{-(4/π²)|p|²} d²p` with `k = a + b`,
/// a λ-independent bound on `‖K‖²`.
pub fn kernel_norm_bound(a: u32, b: u32) -> f64 {
    let k = (a + b) as usize;
    let alpha = 4.0 / (PI * PI);
    let mut sum = 0.0;
    for j in 0..=2 * k {
        sum += binomial(2 * k, j) * gamma_half(j + 1) * gamma_half(2 * k - j + 1);
    }
    sum / (4.0 * PI * PI) / 4f64.powi(k as i32) / alpha.powi(k as i32 + 1)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Γ(m/2)` for a positive integer `m`.
fn gamma_half(m: usize) -> f64 {
    let (mut g, mut x) = if m.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = m as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// CSV rows `a,b,lambda,gap,kernel_l2,mass_error,grid_half_width`.
pub fn kernel_gap_csv(rows: &[KernelGap]) -> String {
    let mut s = String::from("a,b,lambda,gap,kernel_l2,mass_error,grid_half_width\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.a,
            r.b,
            crate::fmt_sig(r.lambda),
            crate::fmt_sig(r.gap),
            crate::fmt_sig(r.kernel_l2),
            crate::fmt_sig(r.mass_error),
            r.grid_half_width
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_ops::stencil::{smooth_chain, stencil_apply};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(rng: &mut ChaCha8Rng, lam: f64, l: usize, d: usize) -> Signal {
        Signal::from_fn(GridSpec::new(lam, l).unwrap(), d, FieldType::Complex, |_, _, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .unwrap()
    }

    #[test]
    fn delta_transforms_to_constant() {
        let d = Signal::delta(GridSpec::new(1.0, 4).unwrap(), 1);
        let f = dft2(&d);
        for v in f.values() {
            assert!((v - Complex64::new(1.0 / (2.0 * PI), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn roundtrip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &(lam, l, d) in &[(1.0, 3, 1), (0.37, 6, 2), (0.5, 10, 1)] {
            let s = random_signal(&mut rng, lam, l, d);
            let f = dft2(&s);
            assert!((f.l2_norm() - s.l2_norm()).abs() < 1e-10);
            let back = idft2(&f, lam).unwrap();
            assert!(back.max_abs_diff(&s).unwrap() < 1e-10);
        }
    }

    #[test]
    fn symbol_values() {
        let z = fourier_symbol(SymbolKind::Stencil { stencil: StencilKind::Dz }, 1.0, [PI / 2.0, 0.0]).unwrap();
        assert!((z - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        for st in [StencilKind::Dz, StencilKind::Dzbar, StencilKind::Laplace] {
            assert_eq!(fourier_symbol(SymbolKind::Stencil { stencil: st }, 0.5, [0.0, 0.0]).unwrap().norm(), 0.0);
        }
        let sm = fourier_symbol(SymbolKind::Stencil { stencil: StencilKind::Smooth }, 0.5, [0.0, 0.0]).unwrap();
        assert_eq!(sm, Complex64::new(1.0, 0.0));
        assert!(matches!(
            fourier_symbol(SymbolKind::Chain { a: 0, b: 0 }, 1.0, [3.2, 0.0]),
            Err(Error::OutsideFundamentalDomain { .. })
        ));
    }

    #[test]
    fn symbol_matches_transformed_stencil_response() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lam = 0.6;
        let grid = GridSpec::new(lam, 6).unwrap();
        for st in [StencilKind::Dz, StencilKind::Dzbar, StencilKind::Laplace, StencilKind::Smooth] {
            let big = Signal::delta(grid.with_half_width(7), 1);
            let resp = stencil_apply(st, &big).unwrap();
            let f = dft2(&resp);
            let fg = f.grid();
            for _ in 0..5 {
                let (jx, jy) = (rng.gen_range(-6..=6), rng.gen_range(-6..=6));
                let p = [fg.position(jx, jy).0, fg.position(jx, jy).1];
                let sym = fourier_symbol(SymbolKind::Stencil { stencil: st }, lam, p).unwrap();
                let got = f.get(jx, jy, 0) * 2.0 * PI / (lam * lam);
                assert!((sym - got).norm() < 1e-10, "{st:?}");
            }
        }
    }

    #[test]
    fn conjugate_symmetry_of_real_stencils() {
        for st in [StencilKind::Laplace, StencilKind::Smooth] {
            let p = [0.3, -1.1];
            let a = fourier_symbol(SymbolKind::Stencil { stencil: st }, 0.8, p).unwrap();
            let b = fourier_symbol(SymbolKind::Stencil { stencil: st }, 0.8, [-p[0], -p[1]]).unwrap();
            assert!((a.conj() - b).norm() < 1e-15);
        }
    }

    #[test]
    fn kernel_mass() {
        for &lam in &[1.0, 0.5] {
            for (a, b) in [(0u32, 0u32), (1, 0), (0, 1), (1, 1), (2, 0)] {
                let l = min_kernel_half_width(a, b, lam);
                let k = discrete_kernel(a, b, lam, l).unwrap();
                let mass: Complex64 = k.values().iter().sum::<Complex64>() * lam * lam;
                let want = if a + b == 0 { 1.0 } else { 0.0 };
                assert!((mass - Complex64::new(want, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn kernel_equals_smoothing_response() {
        let lam = 1.0;
        let k = discrete_kernel(0, 0, lam, 6).unwrap();
        let resp = smooth_chain(&Signal::delta(GridSpec::new(lam, 10).unwrap(), 1)).unwrap();
        for (x, y) in resp.grid().nodes() {
            let kv = k.get(x, y, 0);
            assert!((kv - resp.get(x, y, 0) / (lam * lam)).norm() < 1e-8);
        }
    }

    #[test]
    fn truncation_is_checked() {
        assert!(matches!(discrete_kernel(0, 0, 0.5, 3), Err(Error::Truncation { .. })));
        let l = min_kernel_half_width(1, 1, 0.25);
        assert!(discrete_kernel(1, 1, 0.25, l).is_ok());
        assert!(discrete_kernel(1, 1, 0.25, l - 1).is_err());
    }

    #[test]
    fn gap_symmetry_and_sign() {
        for &lam in &[1.0, 0.5] {
            let g10 = kernel_gap(1, 0, lam).unwrap();
            let g01 = kernel_gap(0, 1, lam).unwrap();
            assert!((g10.gap - g01.gap).abs() < 1e-10);
            assert!(g10.gap >= 0.0);
        }
        assert!(kernel_gap(0, 0, 1.5).is_err());
    }

    #[test]
    fn norm_bound_closed_form() {
        // k = 0: a plain Gaussian integral, π/α.
        let alpha = 4.0 / (PI * PI);
        assert!((kernel_norm_bound(0, 0) - 1.0 / (4.0 * PI * PI) * PI / alpha).abs() < 1e-15);
        // Brute-force 2-D quadrature for k = 1; the |x| kink limits it to O(h²).
        let h = 0.01;
        let mut s = 0.0;
        let n = 1200;
        for i in -n..=n {
            for j in -n..=n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                s += ((x.abs() + y.abs()) / 2.0).powi(2) * (-alpha * (x * x + y * y)).exp();
            }
        }
        s *= h * h / (4.0 * PI * PI);
        assert!((kernel_norm_bound(1, 0) - s).abs() < 1e-3 * s);
    }

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(8), 6.0);
    }
}
