use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stack::{diff_stage, flatten_diff, ChargedStack};
use super::weights::{MultWeights, RawMultWeights};
use crate::error::{Error, Result};
use crate::field::AnalyticField;
use crate::grid::{cutoff_half_width, discretize_on, FieldType, GridSpec, Signal};
use crate::invariant::fit_ridge;
use crate::local_ops::{continuum_conv_many, smooth_chain, smoothing_steps};

/// The charge-conserving convnet: smoothing, `T_diff` differentiation layers
/// and `T_mult` multiplication layers, the last reduced to `Re(·)` at `μ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeConvNetSpec {
    pub lambda: f64,
    pub cutoff: f64,
    pub t_diff: u32,
    pub d_mult: usize,
    /// Input channels `d_V`.
    pub d_in: usize,
    /// Output channels `d_U`.
    pub d_out: usize,
    layers: Vec<MultWeights>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    lambda: f64,
    #[serde(rename = "Lambda")]
    cutoff: f64,
    #[serde(rename = "T_diff")]
    t_diff: u32,
    #[serde(rename = "T_mult")]
    t_mult: usize,
    d_mult: usize,
    #[serde(rename = "d_V", default = "one")]
    d_in: usize,
    #[serde(rename = "d_U", default = "one")]
    d_out: usize,
    layers: Vec<RawMultWeights>,
}

fn one() -> usize {
    1
}

/// Multinomial `T!/(a! b! (T-a-b)!)`.
pub fn multinomial(t: u32, a: u32, b: u32) -> f64 {
    let f = |n: u32| (1..=n).map(f64::from).product::<f64>();
    f(t) / (f(a) * f(b) * f(t - a - b))
}

impl ChargeConvNetSpec {
    /// Checks layer shapes: layer 1 reads `(T_diff+1)·d_V` channels per
    /// charge, later layers `d_mult`; the last writes `d_U` at `μ = 0`.
    pub fn new(lambda: f64, cutoff: f64, t_diff: u32, d_mult: usize, d_in: usize, d_out: usize, layers: Vec<MultWeights>) -> Result<Self> {
        let mut problems = Vec::new();
        if !(lambda.is_finite() && lambda > 0.0) {
            problems.push(format!("lambda must be positive, got {lambda}"));
        }
        if !(cutoff.is_finite() && cutoff >= 0.0) {
            problems.push(format!("Lambda must be nonnegative, got {cutoff}"));
        }
        if t_diff == 0 {
            problems.push("T_diff must be positive".into());
        }
        if layers.is_empty() {
            problems.push("T_mult must be positive".into());
        }
        if d_mult == 0 || d_in == 0 || d_out == 0 {
            problems.push("d_mult, d_V and d_U must be positive".into());
        }
        let t_mult = layers.len();
        for (i, l) in layers.iter().enumerate() {
            let want_in = if i == 0 { (t_diff as usize + 1) * d_in } else { d_mult };
            let last = i + 1 == t_mult;
            let want_out = if last { d_out } else { d_mult };
            if l.t_diff() != t_diff {
                problems.push(format!("layers[{i}]: built for T_diff = {}, spec has {t_diff}", l.t_diff()));
            }
            if l.in_dim() != want_in || l.out_dim() != want_out {
                problems.push(format!(
                    "layers[{i}]: dims {}→{}, expected {want_in}→{want_out}",
                    l.in_dim(),
                    l.out_dim()
                ));
            }
            if l.is_final() != last {
                problems.push(format!("layers[{i}]: only the last layer may be final"));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        Ok(Self { lambda, cutoff, t_diff, d_mult, d_in, d_out, layers })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn random<R: Rng>(lambda: f64, cutoff: f64, t_diff: u32, t_mult: usize, d_mult: usize, d_in: usize, d_out: usize, rng: &mut R) -> Result<Self> {
        if t_mult == 0 {
            return Err(Error::param("T_mult must be positive"));
        }
        let mut layers = Vec::with_capacity(t_mult);
        for i in 0..t_mult {
            let din = if i == 0 { (t_diff as usize + 1) * d_in } else { d_mult };
            let last = i + 1 == t_mult;
            layers.push(MultWeights::random(t_diff, din, if last { d_out } else { d_mult }, last, rng)?);
        }
        Self::new(lambda, cutoff, t_diff, d_mult, d_in, d_out, layers)
    }

    pub fn layers(&self) -> &[MultWeights] {
        &self.layers
    }

    pub fn t_mult(&self) -> usize {
        self.layers.len()
    }

    pub fn output_half_width(&self) -> usize {
        cutoff_half_width(self.lambda, self.cutoff)
    }

    /// `⌊Λ/λ⌋ + T_diff + ⌈4/λ²⌉`: the grid of `Λ' = Λ + (T_diff + ⌈4/λ²⌉)λ`.
    pub fn input_half_width(&self) -> usize {
        self.output_half_width() + self.t_diff as usize + smoothing_steps(self.lambda)
    }

    pub fn to_json(&self) -> String {
        let raw = RawSpec {
            lambda: self.lambda,
            cutoff: self.cutoff,
            t_diff: self.t_diff,
            t_mult: self.t_mult(),
            d_mult: self.d_mult,
            d_in: self.d_in,
            d_out: self.d_out,
            layers: self.layers.iter().map(|l| l.to_raw()).collect(),
        };
        serde_json::to_string(&raw).expect("spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(s)?;
        if raw.layers.len() != raw.t_mult {
            return Err(Error::Config(vec![format!("T_mult = {} but {} layers given", raw.t_mult, raw.layers.len())]));
        }
        let layers = raw
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let din = if i == 0 { (raw.t_diff as usize + 1) * raw.d_in } else { raw.d_mult };
                let last = i + 1 == raw.t_mult;
                MultWeights::from_raw(l, raw.t_diff, din, if last { raw.d_out } else { raw.d_mult }, last)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(raw.lambda, raw.cutoff, raw.t_diff, raw.d_mult, raw.d_in, raw.d_out, layers)
    }
}

/// Applies one multiplication layer pointwise. Input entries must cover
/// every charge in `±T_diff` with `w.in_dim()` channels.
pub fn mult_layer(stack: &ChargedStack, w: &MultWeights) -> Result<ChargedStack> {
    let ChargedStack::Mult { t_diff, entries } = stack else {
        return Err(Error::param("mult_layer expects a mult-stage stack; use flatten_diff first"));
    };
    if *t_diff != w.t_diff() {
        return Err(Error::shape(format!("stack has T_diff = {t_diff}, weights expect {}", w.t_diff())));
    }
    let t = *t_diff as i32;
    let grid = stack.grid();
    let mut inputs = Vec::with_capacity(2 * t as usize + 1);
    for mu in -t..=t {
        let s = entries.get(&mu).ok_or_else(|| Error::ChargeViolation(format!("stack lacks charge mu = {mu}")))?;
        if s.channels() != w.in_dim() {
            return Err(Error::shape(format!("charge {mu} has {} channels, layer expects {}", s.channels(), w.in_dim())));
        }
        inputs.push(s.values());
    }
    if let Some(&mu) = entries.keys().find(|m| m.abs() > t) {
        return Err(Error::ChargeViolation(format!("label mu = {mu} outside ±T_diff")));
    }
    let charges = w.output_charges();
    let (din, dout) = (w.in_dim(), w.out_dim());
    let mut outs: Vec<Vec<Complex64>> = charges.iter().map(|_| Vec::with_capacity(grid.node_count() * dout)).collect();
    let mut node_out = vec![vec![Complex64::default(); dout]; charges.len()];
    let mut node_in: Vec<&[Complex64]> = Vec::with_capacity(inputs.len());
    for node in 0..grid.node_count() {
        node_in.clear();
        node_in.extend(inputs.iter().map(|v| &v[node * din..(node + 1) * din]));
        w.eval_node(&node_in, &mut node_out);
        for (o, n) in outs.iter_mut().zip(&node_out) {
            o.extend_from_slice(n);
        }
    }
    let field = if w.is_final() { FieldType::Real } else { FieldType::Complex };
    let entries = charges
        .into_iter()
        .zip(outs)
        .map(|(mu, v)| Ok((mu, Signal::new(grid, dout, field, v)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(ChargedStack::Mult { t_diff: *t_diff, entries })
}

/// Runs the whole net on a signal already on the `Λ'` grid.
pub fn forward_signal(spec: &ChargeConvNetSpec, input: &Signal) -> Result<Signal> {
    let want = spec.input_half_width();
    if input.grid().half_width() != want || input.grid().spacing() != spec.lambda {
        return Err(Error::GridMismatch(format!(
            "charge net expects spacing {} and half_width {want}, got {} and {}",
            spec.lambda,
            input.grid().spacing(),
            input.grid().half_width()
        )));
    }
    if input.channels() != spec.d_in {
        return Err(Error::shape(format!("input has {} channels, spec expects d_V = {}", input.channels(), spec.d_in)));
    }
    let smoothed = smooth_chain(&input.to_complex())?;
    let mut stack = flatten_diff(&diff_stage(&smoothed, spec.t_diff)?)?;
    for w in &spec.layers {
        stack = mult_layer(&stack, w)?;
    }
    Ok(stack.mult_entry(0).expect("final layer writes mu = 0").clone())
}

/// Discretizes `f` on the `Λ'` grid and runs [`forward_signal`]. The result
/// is real with `d_U` channels on half-width `⌊Λ/λ⌋`.
pub fn forward(spec: &ChargeConvNetSpec, f: &AnalyticField) -> Result<Signal> {
    let grid = GridSpec::new(spec.lambda, spec.input_half_width())?;
    forward_signal(spec, &discretize_on(f, grid)?)
}

/// The continuum counterpart: per point `x`, feeds
/// `c_{a,b}·(f * Ψ_{a,b})(x)` for `a + b ≤ T_diff` through the same
/// multiplication layers. Returns `[point][channel]`.
pub fn scaling_limit_eval(spec: &ChargeConvNetSpec, f: &AnalyticField, points: &[[f64; 2]]) -> Result<Vec<Vec<f64>>> {
    if f.channels() != spec.d_in {
        return Err(Error::shape(format!("field has {} channels, spec expects d_V = {}", f.channels(), spec.d_in)));
    }
    let t = spec.t_diff;
    let mut pairs = Vec::new();
    for s in 0..=t {
        for a in 0..=s {
            pairs.push((a, s - a));
        }
    }
    let d = spec.d_in;
    let width = (t as usize + 1) * d;
    let grid = GridSpec::new(spec.lambda, 0)?;
    points
        .iter()
        .map(|&x| {
            let conv = continuum_conv_many(f, &pairs, x)?;
            let mut entries = BTreeMap::new();
            for mu in -(t as i32)..=t as i32 {
                entries.insert(mu, vec![Complex64::default(); width]);
            }
            for (&(a, b), vals) in pairs.iter().zip(&conv) {
                let (s, mu) = (a + b, a as i32 - b as i32);
                let c = multinomial(t, a, b);
                let row = entries.get_mut(&mu).expect("|mu| <= T_diff");
                for (ch, v) in vals.iter().enumerate() {
                    row[s as usize * d + ch] = v * c;
                }
            }
            let signals = entries
                .into_iter()
                .map(|(mu, v)| Ok((mu, Signal::new(grid, width, FieldType::Complex, v)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            let mut stack = ChargedStack::Mult { t_diff: t, entries: signals };
            for w in &spec.layers {
                stack = mult_layer(&stack, w)?;
            }
            Ok(stack.mult_entry(0).expect("final").values().iter().map(|v| v.re).collect())
        })
        .collect()
}

/// `max |L(e^{-iμφ}Φ)_μ − e^{-iμφ}L(Φ)_μ|` over nodes, charges and channels,
/// for a non-final layer `L`.
pub fn phase_equivariance_check(w: &MultWeights, stack: &ChargedStack, phi: f64) -> Result<f64> {
    if w.is_final() {
        return Err(Error::param("phase equivariance applies to non-final layers"));
    }
    let lhs = mult_layer(&stack.phase_rotate(phi), w)?;
    let rhs = mult_layer(stack, w)?.phase_rotate(phi);
    lhs.max_abs_diff(&rhs)
}

/// Refits the final layer (`d_U = 1`) by ridge regression on the centre-node
/// output, keeping earlier layers fixed. Real and imaginary parts of each
/// final-layer weight are fitted as separate real unknowns.
pub fn fit_final_layer(spec: &mut ChargeConvNetSpec, inputs: &[AnalyticField], targets: &[f64], reg: f64) -> Result<f64> {
    if spec.d_out != 1 {
        return Err(Error::param("final-layer fit supports d_U = 1"));
    }
    if inputs.len() != targets.len() || inputs.is_empty() {
        return Err(Error::shape("need as many targets as inputs, at least one"));
    }
    let last = spec.layers.len() - 1;
    let template = spec.layers[last].clone();
    let (din, t) = (template.in_dim(), spec.t_diff as i32);
    // Monomials at μ = 0: the constant, Φ_{0,n1}, and Φ_{μ1,n1}Φ_{-μ1,n2}.
    let mut basis: Vec<(i32, usize, usize)> = vec![(i32::MIN, 0, 0)];
    basis.extend((0..din).map(|n1| (i32::MAX, n1, 0)));
    // The product is symmetric in its factors, so keep one ordering.
    for mu1 in 0..=t {
        for n1 in 0..din {
            for n2 in 0..din {
                if mu1 > 0 || n1 <= n2 {
                    basis.push((mu1, n1, n2));
                }
            }
        }
    }
    let grid = GridSpec::new(spec.lambda, spec.input_half_width())?;
    let mut rows = Vec::with_capacity(inputs.len());
    for f in inputs {
        let x = smooth_chain(&discretize_on(f, grid)?.to_complex())?;
        let mut stack = flatten_diff(&diff_stage(&x, spec.t_diff)?)?;
        for w in &spec.layers[..last] {
            stack = mult_layer(&stack, w)?;
        }
        let at = |mu: i32, n: usize| stack.mult_entry(mu).expect("all charges present").get(0, 0, n);
        let mut row = Vec::with_capacity(2 * basis.len());
        for &(mu1, n1, n2) in &basis {
            let v = match mu1 {
                i32::MIN => Complex64::new(1.0, 0.0),
                i32::MAX => at(0, n1),
                _ => at(mu1, n1) * at(-mu1, n2),
            };
            // Re(w·v) = w.re·v.re − w.im·v.im
            row.push(v.re);
            if mu1 != i32::MIN {
                row.push(-v.im);
            }
        }
        rows.push(row);
    }
    let design = DMatrix::from_fn(rows.len(), 2 * basis.len() - 1, |i, j| rows[i][j]);
    let coef = fit_ridge(&design, targets, reg)?;
    let mut w = MultWeights::zeros(template.t_diff(), din, 1, true)?;
    for (k, &(mu1, n1, n2)) in basis.iter().enumerate() {
        let c = if k == 0 { Complex64::new(coef[0], 0.0) } else { Complex64::new(coef[2 * k - 1], coef[2 * k]) };
        match mu1 {
            i32::MIN => w.set_w0(0, c)?,
            i32::MAX => w.add_w1(0, 0, n1, c)?,
            _ => w.add_w2(0, mu1, -mu1, 0, n1, n2, c)?,
        }
    }
    spec.layers[last] = w;
    let pred = design * nalgebra::DVector::from_vec(coef);
    let resid: f64 = pred.iter().zip(targets).map(|(p, y)| (p - y).powi(2)).sum::<f64>() / targets.len() as f64;
    Ok(resid.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldKind;
    use crate::zpoly::ZPoly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn pass_through(lambda: f64, cutoff: f64) -> ChargeConvNetSpec {
        let mut w = MultWeights::zeros(1, 2, 1, true).unwrap();
        w.add_w1(0, 0, 0, Complex64::new(1.0, 0.0)).unwrap();
        ChargeConvNetSpec::new(lambda, cutoff, 1, 2, 1, 1, vec![w]).unwrap()
    }

    #[test]
    fn multinomials() {
        assert_eq!(multinomial(2, 1, 1), 2.0);
        assert_eq!(multinomial(3, 1, 0), 3.0);
        assert_eq!(multinomial(4, 2, 1), 12.0);
    }

    #[test]
    fn zero_weights_zero_stack() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let st = random_stack(&mut rng, 1, 2, 2);
        let w = MultWeights::zeros(1, 2, 3, false).unwrap();
        let out = mult_layer(&st, &w).unwrap();
        assert!(out.signals().all(|s| s.values().iter().all(|v| v.norm() == 0.0)));
    }

    #[test]
    fn constant_injection() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let st = random_stack(&mut rng, 1, 2, 1);
        let mut w = MultWeights::zeros(1, 2, 2, false).unwrap();
        w.set_w0(1, Complex64::new(3.0, 0.0)).unwrap();
        let out = mult_layer(&st, &w).unwrap();
        let z = out.mult_entry(0).unwrap();
        assert!(z.grid().nodes().all(|(x, y)| z.get(x, y, 1) == Complex64::new(3.0, 0.0) && z.get(x, y, 0).norm() == 0.0));
        assert!(out.mult_entry(1).unwrap().values().iter().all(|v| v.norm() == 0.0));
    }

    pub(crate) fn random_stack(rng: &mut ChaCha8Rng, t: u32, d: usize, hw: usize) -> ChargedStack {
        let grid = GridSpec::new(0.5, hw).unwrap();
        let ti = t as i32;
        let entries = (-ti..=ti)
            .map(|mu| {
                let s = Signal::from_fn(grid, d, FieldType::Complex, |_, _, _| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
                .unwrap();
                (mu, s)
            })
            .collect();
        ChargedStack::mult(t, entries).unwrap()
    }

    #[test]
    fn phase_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = MultWeights::random(2, 3, 3, false, &mut rng).unwrap();
        let st = random_stack(&mut rng, 2, 3, 2);
        assert_eq!(phase_equivariance_check(&w, &st, 0.0).unwrap(), 0.0);
        assert!(phase_equivariance_check(&w, &st, 0.7).unwrap() < 1e-12);
    }

    #[test]
    fn even_charges_at_pi() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w = MultWeights::random(2, 2, 2, false, &mut rng).unwrap();
        let mut st = random_stack(&mut rng, 2, 2, 1);
        if let ChargedStack::Mult { entries, .. } = &mut st {
            for (mu, s) in entries.iter_mut() {
                if mu % 2 != 0 {
                    *s = s.scale(Complex64::default());
                }
            }
        }
        assert_eq!(phase_equivariance_check(&w, &st, PI).unwrap(), 0.0);
    }

    #[test]
    fn zero_input_gives_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = ChargeConvNetSpec::random(1.0, 2.0, 2, 2, 3, 1, 1, &mut rng).unwrap();
        let out = forward(&spec, &AnalyticField::constant(0.0)).unwrap();
        let c0 = out.get(0, 0, 0);
        assert!(out.values().iter().all(|v| *v == c0));
        let lim = scaling_limit_eval(&spec, &AnalyticField::constant(0.0), &[[0.3, 0.1]]).unwrap();
        assert_eq!(lim[0][0], c0.re);
    }

    #[test]
    fn pass_through_matches_smoothing() {
        let spec = pass_through(0.5, 1.0);
        let f = AnalyticField::unit_gaussian();
        let out = forward(&spec, &f).unwrap();
        let grid = GridSpec::new(0.5, spec.input_half_width()).unwrap();
        let sm = smooth_chain(&discretize_on(&f, grid).unwrap()).unwrap().restrict(2).unwrap();
        assert!(out.max_abs_diff(&sm).unwrap() < 1e-14);
    }

    #[test]
    fn pass_through_limit_at_origin() {
        let v = scaling_limit_eval(&pass_through(0.5, 0.0), &AnalyticField::unit_gaussian(), &[[0.0, 0.0]]).unwrap();
        assert!((v[0][0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn origin_invariant_under_quarter_turns() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = ChargeConvNetSpec::random(1.0, 1.0, 2, 2, 3, 1, 1, &mut rng).unwrap();
        let grid = GridSpec::new(1.0, spec.input_half_width()).unwrap();
        let x = Signal::from_real_fn(grid, 1, |_, _, _| rng.gen_range(-1.0..1.0)).unwrap();
        let base = forward_signal(&spec, &x).unwrap().get(0, 0, 0);
        for q in 1..4 {
            let r = forward_signal(&spec, &x.rotate_quarter(q)).unwrap().get(0, 0, 0);
            assert!((r - base).norm() < 1e-10);
        }
    }

    #[test]
    fn shift_equivariant_on_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let spec = ChargeConvNetSpec::random(0.5, 1.5, 1, 2, 2, 1, 1, &mut rng).unwrap();
        let f = AnalyticField::single(FieldKind::GaussianPoly {
            poly: ZPoly::from_terms([(0, 0, Complex64::new(1.0, 0.0)), (1, 1, Complex64::new(0.5, 0.0))]),
            center: [0.2, -0.1],
            width: 0.4,
        })
        .unwrap();
        let a = forward(&spec, &f).unwrap();
        let b = forward(&spec, &f.translated([0.5, 0.0]).unwrap()).unwrap();
        // Node k of b sees what node k−1 of a sees.
        for (x, y) in a.grid().nodes() {
            if b.grid().contains(x + 1, y) {
                assert!((b.get(x + 1, y, 0) - a.get(x, y, 0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn json_roundtrip_and_triple_format() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = ChargeConvNetSpec::random(0.5, 0.0, 1, 2, 2, 1, 1, &mut rng).unwrap();
        let j = spec.to_json();
        assert_eq!(ChargeConvNetSpec::from_json(&j).unwrap(), spec);
        let bad = r#"{"lambda":1,"Lambda":0,"T_diff":1,"T_mult":1,"d_mult":1,
            "layers":[{"w2":[[1,1,0,0,0,1.0,0.0]]}]}"#;
        assert!(matches!(ChargeConvNetSpec::from_json(bad), Err(Error::ChargeViolation(_))));
    }

    #[test]
    fn final_fit_recovers_reachable_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec0 = ChargeConvNetSpec::random(1.0, 0.0, 1, 2, 2, 1, 1, &mut rng).unwrap();
        let inputs: Vec<AnalyticField> = (0..40)
            .map(|_| {
                AnalyticField::single(FieldKind::GaussianPoly {
                    poly: ZPoly::from_terms([(0, 0, Complex64::new(rng.gen_range(-1.0..1.0), 0.0)), (1, 0, Complex64::new(rng.gen_range(-1.0..1.0), 0.0)), (0, 1, Complex64::new(rng.gen_range(-1.0..1.0), 0.0))]),
                    center: [0.0, 0.0],
                    width: 1.0,
                })
                .unwrap()
            })
            .collect();
        let targets: Vec<f64> = inputs.iter().map(|f| forward(&spec0, f).unwrap().get(0, 0, 0).re).collect();
        let mut spec = spec0.clone();
        let rmse = fit_final_layer(&mut spec, &inputs, &targets, 1e-10).unwrap();
        assert!(rmse < 1e-6, "{rmse}");
    }
}
