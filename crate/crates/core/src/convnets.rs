//! Translation-equivariant convolutional nets on grids: the basic (unpooled)
//! net and the net with decimation.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::AnalyticField;
use crate::grid::{cutoff_half_width, discretize_on, FieldType, GridSpec, Signal};
use crate::invariant::Activation;

/// One layer's weights. For a convolution the layout is `[n][θ][k]` with
/// `θ = (θx + L_rf)·(2L_rf+1) + (θy + L_rf)`; for the final pointwise layer
/// it is `[n][k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerWeights {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerWeights {
    fn zeros(out: usize, fan_in: usize) -> Self {
        Self { weights: vec![0.0; out * fan_in], bias: vec![0.0; out] }
    }

    /// Uniform on `[-1, 1]/fan_in`.
    fn random<R: Rng>(out: usize, fan_in: usize, rng: &mut R) -> Self {
        let s = 1.0 / fan_in as f64;
        Self {
            weights: (0..out * fan_in).map(|_| rng.gen_range(-1.0..1.0) * s).collect(),
            bias: (0..out).map(|_| rng.gen_range(-1.0..1.0) * s).collect(),
        }
    }
}

/// Structure and weights of a basic convnet: `T - 1` convolutional layers
/// with receptive field `Z_{L_rf}`, then a pointwise affine layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasicConvNetSpec {
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub cutoff: f64,
    pub l_rf: usize,
    /// `d_1 .. d_{T+1}`; `T = dims.len() - 1`.
    pub dims: Vec<usize>,
    /// `T - 1` convolutional layers.
    pub layers: Vec<LayerWeights>,
    #[serde(rename = "final")]
    pub final_layer: LayerWeights,
    #[serde(default)]
    pub activation: Activation,
}

/// A convnet with decimation by `stride` after each convolution, evaluated at
/// a single output node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DownsampledConvNetSpec {
    pub lambda: f64,
    pub l_rf: usize,
    pub stride: usize,
    pub dims: Vec<usize>,
    pub layers: Vec<LayerWeights>,
    #[serde(rename = "final")]
    pub final_layer: LayerWeights,
    pub activation: Activation,
    /// Optional explicit `L_{t,T}` for `t = 1..T`; checked against the recurrence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranges: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DownsampledJson {
    lambda: f64,
    l_rf: usize,
    stride: usize,
    dims: Vec<usize>,
    layers: Vec<LayerWeights>,
    #[serde(rename = "final")]
    final_layer: LayerWeights,
    #[serde(default)]
    activation: Activation,
    #[serde(default)]
    ranges: Option<Vec<usize>>,
}

impl<'de> Deserialize<'de> for DownsampledConvNetSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = DownsampledJson::deserialize(d)?;
        let spec = DownsampledConvNetSpec {
            lambda: j.lambda,
            l_rf: j.l_rf,
            stride: j.stride,
            dims: j.dims,
            layers: j.layers,
            final_layer: j.final_layer,
            activation: j.activation,
            ranges: j.ranges,
        };
        spec.check().map_err(serde::de::Error::custom)?;
        Ok(spec)
    }
}

/// Result of [`validate_spec`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecReport {
    pub ok: bool,
    pub diagnostics: Vec<String>,
    /// Input half-width of each layer, then the output half-width.
    pub schedule: Vec<usize>,
}

pub enum AnySpec<'a> {
    Basic(&'a BasicConvNetSpec),
    Downsampled(&'a DownsampledConvNetSpec),
}

fn rf_side(l_rf: usize) -> usize {
    2 * l_rf + 1
}

fn layer_diagnostics(dims: &[usize], l_rf: usize, layers: &[LayerWeights], final_layer: &LayerWeights, out: &mut Vec<String>) {
    if dims.len() < 2 {
        out.push(format!("dims must list d_1..d_(T+1) with T >= 1, got {} entries", dims.len()));
        return;
    }
    if let Some(i) = dims.iter().position(|&d| d == 0) {
        out.push(format!("dims[{i}] (d_{}) must be positive", i + 1));
    }
    let t = dims.len() - 1;
    if layers.len() != t - 1 {
        out.push(format!("layers: expected T-1 = {} convolutional layers, got {}", t - 1, layers.len()));
        return;
    }
    let taps = rf_side(l_rf) * rf_side(l_rf);
    for (i, l) in layers.iter().enumerate() {
        let want = dims[i + 1] * taps * dims[i];
        if l.weights.len() != want {
            out.push(format!(
                "layers[{i}].weights: expected d_{}·(2L_rf+1)²·d_{} = {want}, got {}",
                i + 2,
                i + 1,
                l.weights.len()
            ));
        }
        if l.bias.len() != dims[i + 1] {
            out.push(format!("layers[{i}].bias: expected d_{} = {}, got {}", i + 2, dims[i + 1], l.bias.len()));
        }
    }
    if final_layer.weights.len() != dims[t] * dims[t - 1] {
        out.push(format!(
            "final.weights: expected d_(T+1)·d_T = {}, got {}",
            dims[t] * dims[t - 1],
            final_layer.weights.len()
        ));
    }
    if final_layer.bias.len() != dims[t] {
        out.push(format!("final.bias: expected d_(T+1) = {}, got {}", dims[t], final_layer.bias.len()));
    }
    let finite = layers.iter().chain(std::iter::once(final_layer)).all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()));
    if !finite {
        out.push("weights and biases must be finite".into());
    }
}

impl BasicConvNetSpec {
    pub fn depth(&self) -> usize {
        self.dims.len().saturating_sub(1)
    }

    pub fn output_half_width(&self) -> usize {
        cutoff_half_width(self.lambda, self.cutoff)
    }

    /// `⌊Λ/λ⌋ + (T - 1)L_rf`.
    pub fn input_half_width(&self) -> usize {
        self.output_half_width() + (self.depth().saturating_sub(1)) * self.l_rf
    }

    pub fn zeros(lambda: f64, cutoff: f64, l_rf: usize, dims: Vec<usize>) -> Result<Self> {
        Self::build(lambda, cutoff, l_rf, dims, Activation::Tanh, LayerWeights::zeros)
    }

    pub fn random<R: Rng>(lambda: f64, cutoff: f64, l_rf: usize, dims: Vec<usize>, activation: Activation, rng: &mut R) -> Result<Self> {
        Self::build(lambda, cutoff, l_rf, dims, activation, |o, f| LayerWeights::random(o, f, rng))
    }

    fn build(
        lambda: f64,
        cutoff: f64,
        l_rf: usize,
        dims: Vec<usize>,
        activation: Activation,
        mut make: impl FnMut(usize, usize) -> LayerWeights,
    ) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::param("dims must have at least two entries"));
        }
        let taps = rf_side(l_rf).pow(2);
        let t = dims.len() - 1;
        let layers = (0..t - 1).map(|i| make(dims[i + 1], taps * dims[i])).collect();
        let final_layer = make(dims[t], dims[t - 1]);
        let spec = Self { lambda, cutoff, l_rf, dims, layers, final_layer, activation };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        let r = validate_spec(AnySpec::Basic(self));
        if r.ok {
            Ok(())
        } else {
            Err(Error::Config(r.diagnostics))
        }
    }
}

impl DownsampledConvNetSpec {
    pub fn depth(&self) -> usize {
        self.dims.len().saturating_sub(1)
    }

    /// `L_{t,T} = L_rf(1 + s + … + s^{T-t-1})` for `t = 1..T`.
    pub fn range_schedule(&self) -> Vec<usize> {
        range_schedule(self.l_rf, self.stride, self.depth())
    }

    pub fn zeros(lambda: f64, l_rf: usize, stride: usize, dims: Vec<usize>) -> Result<Self> {
        Self::build(lambda, l_rf, stride, dims, Activation::Tanh, LayerWeights::zeros)
    }

    pub fn random<R: Rng>(lambda: f64, l_rf: usize, stride: usize, dims: Vec<usize>, activation: Activation, rng: &mut R) -> Result<Self> {
        Self::build(lambda, l_rf, stride, dims, activation, |o, f| LayerWeights::random(o, f, rng))
    }

    fn build(
        lambda: f64,
        l_rf: usize,
        stride: usize,
        dims: Vec<usize>,
        activation: Activation,
        mut make: impl FnMut(usize, usize) -> LayerWeights,
    ) -> Result<Self> {
        check_stride(l_rf, stride)?;
        if dims.len() < 2 {
            return Err(Error::param("dims must have at least two entries"));
        }
        let taps = rf_side(l_rf).pow(2);
        let t = dims.len() - 1;
        let layers = (0..t - 1).map(|i| make(dims[i + 1], taps * dims[i])).collect();
        let final_layer = make(dims[t], dims[t - 1]);
        let spec = Self { lambda, l_rf, stride, dims, layers, final_layer, activation, ranges: None };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        check_stride(self.l_rf, self.stride)?;
        let r = validate_spec(AnySpec::Downsampled(self));
        if r.ok {
            Ok(())
        } else {
            Err(Error::Config(r.diagnostics))
        }
    }

    /// The equivalent basic net (`Λ = 0`) when `stride == 1`.
    pub fn as_basic(&self) -> Result<BasicConvNetSpec> {
        if self.stride != 1 {
            return Err(Error::param("only stride 1 has a basic-net equivalent"));
        }
        Ok(BasicConvNetSpec {
            lambda: self.lambda,
            cutoff: 0.0,
            l_rf: self.l_rf,
            dims: self.dims.clone(),
            layers: self.layers.clone(),
            final_layer: self.final_layer.clone(),
            activation: self.activation,
        })
    }
}

fn check_stride(l_rf: usize, stride: usize) -> Result<()> {
    if stride == 0 {
        return Err(Error::param("stride must be positive"));
    }
    if stride > rf_side(l_rf) {
        return Err(Error::param(format!(
            "stride {stride} exceeds the receptive field size 2L_rf+1 = {}; decimation would skip input nodes",
            rf_side(l_rf)
        )));
    }
    Ok(())
}

pub fn range_schedule(l_rf: usize, stride: usize, depth: usize) -> Vec<usize> {
    let mut r = vec![0usize; depth];
    for t in (0..depth.saturating_sub(1)).rev() {
        r[t] = stride * r[t + 1] + l_rf;
    }
    r
}

/// Shape and range checks, plus the per-layer half-width schedule.
pub fn validate_spec(spec: AnySpec) -> SpecReport {
    let mut diagnostics = Vec::new();
    let schedule = match spec {
        AnySpec::Basic(s) => {
            if !(s.lambda.is_finite() && s.lambda > 0.0) {
                diagnostics.push(format!("lambda must be positive, got {}", s.lambda));
            }
            if !(s.cutoff.is_finite() && s.cutoff >= 0.0) {
                diagnostics.push(format!("Lambda must be nonnegative, got {}", s.cutoff));
            }
            if s.l_rf == 0 {
                diagnostics.push("l_rf must be positive".into());
            }
            layer_diagnostics(&s.dims, s.l_rf, &s.layers, &s.final_layer, &mut diagnostics);
            if diagnostics.is_empty() {
                let base = s.output_half_width();
                let t = s.depth();
                (1..=t).map(|k| base + (t - k) * s.l_rf).collect()
            } else {
                Vec::new()
            }
        }
        AnySpec::Downsampled(s) => {
            if !(s.lambda.is_finite() && s.lambda > 0.0) {
                diagnostics.push(format!("lambda must be positive, got {}", s.lambda));
            }
            if s.l_rf == 0 {
                diagnostics.push("l_rf must be positive".into());
            }
            if s.stride == 0 || s.stride > rf_side(s.l_rf) {
                diagnostics.push(format!("stride {} must lie in 1..=2L_rf+1 = {}", s.stride, rf_side(s.l_rf)));
            }
            layer_diagnostics(&s.dims, s.l_rf, &s.layers, &s.final_layer, &mut diagnostics);
            let sched = s.range_schedule();
            if let Some(given) = &s.ranges {
                if given.len() != sched.len() {
                    diagnostics.push(format!("ranges: expected {} entries L_(t,T), got {}", sched.len(), given.len()));
                } else {
                    for t in 0..given.len() {
                        let next = if t + 1 < given.len() { given[t + 1] } else { 0 };
                        let want = if t + 1 < given.len() { s.stride * next + s.l_rf } else { 0 };
                        if given[t] != want {
                            diagnostics.push(format!(
                                "ranges[{t}] = {} violates L_(t,T) = s·L_(t+1,T) + L_rf (expected {want})",
                                given[t]
                            ));
                        }
                    }
                }
            }
            if diagnostics.is_empty() {
                sched
            } else {
                Vec::new()
            }
        }
    };
    SpecReport { ok: diagnostics.is_empty(), diagnostics, schedule }
}

/// One convolutional layer with stride `s`: output node `γ` reads
/// `Φ_{sγ+θ}` for `θ ∈ Z_{L_rf}`.
fn conv_layer(input: &Signal, w: &LayerWeights, l_rf: usize, stride: usize, out_dim: usize, act: Activation) -> Result<Signal> {
    let grid = input.grid();
    let h = grid.half_width();
    if h < l_rf {
        return Err(Error::GridTooSmall { needed: l_rf, available: h });
    }
    let out_hw = (h - l_rf) / stride;
    let out_grid = GridSpec::new(grid.spacing() * stride as f64, out_hw)?;
    let d_in = input.channels();
    let side = rf_side(l_rf);
    let lr = l_rf as i64;
    let s = stride as i64;
    let mut vals = Vec::with_capacity(out_grid.node_count() * out_dim);
    let mut patch = Vec::with_capacity(side * side * d_in);
    for (gx, gy) in out_grid.nodes() {
        patch.clear();
        for tx in -lr..=lr {
            for ty in -lr..=lr {
                patch.extend(input.node(s * gx + tx, s * gy + ty).iter().map(|v| v.re));
            }
        }
        for n in 0..out_dim {
            let row = &w.weights[n * patch.len()..(n + 1) * patch.len()];
            let z: f64 = row.iter().zip(&patch).map(|(a, b)| a * b).sum::<f64>() + w.bias[n];
            vals.push(Complex64::new(act.apply(z), 0.0));
        }
    }
    Ok(Signal::from_parts(out_grid, out_dim, FieldType::Real, vals))
}

fn affine_layer(input: &Signal, w: &LayerWeights, out_dim: usize) -> Signal {
    let d_in = input.channels();
    let grid = input.grid();
    let mut vals = Vec::with_capacity(grid.node_count() * out_dim);
    for (x, y) in grid.nodes() {
        let node = input.node(x, y);
        for n in 0..out_dim {
            let row = &w.weights[n * d_in..(n + 1) * d_in];
            let z: f64 = row.iter().zip(node).map(|(a, b)| a * b.re).sum::<f64>() + w.bias[n];
            vals.push(Complex64::new(z, 0.0));
        }
    }
    Signal::from_parts(grid, out_dim, FieldType::Real, vals)
}

fn check_input(s: &Signal, lambda: f64, channels: usize) -> Result<()> {
    if s.field() != FieldType::Real {
        return Err(Error::param("convnet inputs must be real signals"));
    }
    if s.grid().spacing() != lambda {
        return Err(Error::GridMismatch(format!("input spacing {} differs from spec lambda {lambda}", s.grid().spacing())));
    }
    if s.channels() != channels {
        return Err(Error::shape(format!("input has {} channels, spec expects d_1 = {channels}", s.channels())));
    }
    Ok(())
}

/// Forward pass on a signal of half-width `⌊Λ/λ⌋ + (T-1)L_rf`; output on
/// half-width `⌊Λ/λ⌋` with `d_{T+1}` channels.
pub fn basic_forward(spec: &BasicConvNetSpec, input: &Signal) -> Result<Signal> {
    spec.check()?;
    check_input(input, spec.lambda, spec.dims[0])?;
    let want = spec.input_half_width();
    if input.grid().half_width() != want {
        return Err(Error::shape(format!(
            "input half_width must be floor(Lambda/lambda) + (T-1)L_rf = {want}, got {}",
            input.grid().half_width()
        )));
    }
    basic_forward_any(spec, input)
}

/// [`basic_forward`] on any large-enough input; the output half-width is the
/// input's minus `(T-1)L_rf`.
pub fn basic_forward_any(spec: &BasicConvNetSpec, input: &Signal) -> Result<Signal> {
    check_input(input, spec.lambda, spec.dims[0])?;
    let mut cur = input.clone();
    for (i, l) in spec.layers.iter().enumerate() {
        cur = conv_layer(&cur, l, spec.l_rf, 1, spec.dims[i + 1], spec.activation)?;
    }
    Ok(affine_layer(&cur, &spec.final_layer, *spec.dims.last().expect("validated")))
}

/// Discretizes `f` on the input grid, then runs [`basic_forward`].
pub fn basic_forward_field(spec: &BasicConvNetSpec, f: &AnalyticField) -> Result<Signal> {
    spec.check()?;
    let grid = GridSpec::new(spec.lambda, spec.input_half_width())?;
    basic_forward(spec, &discretize_on(f, grid)?)
}

/// Output vector at the single surviving node; the input half-width must be `L_{1,T}`.
pub fn downsampled_forward(spec: &DownsampledConvNetSpec, input: &Signal) -> Result<Vec<f64>> {
    spec.check()?;
    check_input(input, spec.lambda, spec.dims[0])?;
    let want = spec.range_schedule()[0];
    if input.grid().half_width() != want {
        return Err(Error::shape(format!("input half_width must be L_(1,T) = {want}, got {}", input.grid().half_width())));
    }
    let out = downsampled_forward_map(spec, input)?;
    debug_assert_eq!(out.grid().half_width(), 0);
    Ok(out.node(0, 0).iter().map(|v| v.re).collect())
}

pub fn downsampled_forward_field(spec: &DownsampledConvNetSpec, f: &AnalyticField) -> Result<Vec<f64>> {
    spec.check()?;
    let grid = GridSpec::new(spec.lambda, spec.range_schedule()[0])?;
    downsampled_forward(spec, &discretize_on(f, grid)?)
}

/// The same layers applied at every admissible coarse node of a larger input.
/// Output node `γ` sees the input window centred at `s^{T-1}γ`.
pub fn downsampled_forward_map(spec: &DownsampledConvNetSpec, input: &Signal) -> Result<Signal> {
    spec.check()?;
    check_input(input, spec.lambda, spec.dims[0])?;
    let mut cur = input.clone();
    for (i, l) in spec.layers.iter().enumerate() {
        cur = conv_layer(&cur, l, spec.l_rf, spec.stride, spec.dims[i + 1], spec.activation)?;
    }
    Ok(affine_layer(&cur, &spec.final_layer, *spec.dims.last().expect("validated")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_input(rng: &mut ChaCha8Rng, lam: f64, hw: usize, d: usize) -> Signal {
        Signal::from_real_fn(GridSpec::new(lam, hw).unwrap(), d, |_, _, _| rng.gen_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn zero_weights_give_zero() {
        let spec = BasicConvNetSpec::zeros(0.5, 1.0, 1, vec![2, 3, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = random_input(&mut rng, 0.5, spec.input_half_width(), 2);
        let y = basic_forward(&spec, &x).unwrap();
        assert_eq!(y.grid().half_width(), 2);
        assert!(y.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn pointwise_affine_only() {
        let mut spec = BasicConvNetSpec::zeros(1.0, 2.0, 1, vec![1, 1]).unwrap();
        spec.final_layer = LayerWeights { weights: vec![2.0], bias: vec![1.0] };
        let x = Signal::constant(GridSpec::new(1.0, 2).unwrap(), 1, 3.0);
        let y = basic_forward(&spec, &x).unwrap();
        assert!(y.values().iter().all(|v| v.re == 7.0));
    }

    #[test]
    fn smoothing_weights_match_direct_convolution() {
        let mut spec = BasicConvNetSpec::zeros(0.5, 1.0, 1, vec![1, 1, 1]).unwrap();
        // θ order: (θx, θy) with θx outer.
        spec.layers[0].weights = vec![0.0, 0.125, 0.0, 0.125, 0.5, 0.125, 0.0, 0.125, 0.0];
        spec.layers[0].bias = vec![0.1];
        spec.final_layer = LayerWeights { weights: vec![-1.5], bias: vec![0.25] };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_input(&mut rng, 0.5, 3, 1);
        let y = basic_forward(&spec, &x).unwrap();
        for (gx, gy) in y.grid().nodes() {
            let v = |a: i64, b: i64| x.get(gx + a, gy + b, 0).re;
            let s = 0.5 * v(0, 0) + 0.125 * (v(1, 0) + v(-1, 0) + v(0, 1) + v(0, -1)) + 0.1;
            assert!((y.get(gx, gy, 0).re - (-1.5 * s.tanh() + 0.25)).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_and_diagnostics() {
        let spec = BasicConvNetSpec::zeros(0.5, 1.0, 2, vec![1, 2, 2, 1]).unwrap();
        let r = validate_spec(AnySpec::Basic(&spec));
        assert!(r.ok);
        assert_eq!(r.schedule, vec![6, 4, 2]);
        let mut bad = spec.clone();
        bad.dims[0] = 3;
        let r = validate_spec(AnySpec::Basic(&bad));
        assert!(!r.ok);
        assert!(r.diagnostics.iter().any(|d| d.contains("layers[0].weights")));
    }

    #[test]
    fn stride_constraint() {
        let e = DownsampledConvNetSpec::zeros(1.0, 1, 4, vec![1, 1, 1]).unwrap_err();
        assert!(e.to_string().contains("receptive field"));
        assert!(DownsampledConvNetSpec::zeros(1.0, 1, 3, vec![1, 1, 1]).is_ok());
    }

    #[test]
    fn inconsistent_ranges_are_reported() {
        let mut spec = DownsampledConvNetSpec::zeros(1.0, 1, 2, vec![1, 1, 1, 1]).unwrap();
        assert_eq!(spec.range_schedule(), vec![3, 1, 0]);
        spec.ranges = Some(vec![4, 1, 0]);
        let r = validate_spec(AnySpec::Downsampled(&spec));
        assert!(!r.ok);
        assert!(r.diagnostics[0].contains("s·L_(t+1,T) + L_rf"));
        let json = serde_json::to_string(&spec).unwrap();
        assert!(serde_json::from_str::<DownsampledConvNetSpec>(&json).is_err());
    }

    #[test]
    fn unit_stride_matches_basic() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let spec = DownsampledConvNetSpec::random(0.5, 1, 1, vec![2, 3, 3, 2], Activation::Tanh, &mut rng).unwrap();
        let x = random_input(&mut rng, 0.5, spec.range_schedule()[0], 2);
        let a = downsampled_forward(&spec, &x).unwrap();
        let b = basic_forward(&spec.as_basic().unwrap(), &x).unwrap();
        for (k, v) in a.iter().enumerate() {
            assert!((v - b.get(0, 0, k).re).abs() < 1e-12);
        }
    }

    #[test]
    fn strided_two_layer_hand_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = DownsampledConvNetSpec::random(1.0, 2, 2, vec![1, 1, 1], Activation::Tanh, &mut rng).unwrap();
        assert_eq!(spec.range_schedule(), vec![2, 0]);
        let x = Signal::delta(GridSpec::new(1.0, 2).unwrap(), 1);
        let out = downsampled_forward(&spec, &x).unwrap()[0];
        // Only θ = 0 sees the delta: index (0+2)·5 + (0+2) = 12.
        let hidden = (spec.layers[0].weights[12] + spec.layers[0].bias[0]).tanh();
        let want = spec.final_layer.weights[0] * hidden + spec.final_layer.bias[0];
        assert!((out - want).abs() < 1e-12);
    }

    #[test]
    fn map_agrees_with_single_node_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spec = DownsampledConvNetSpec::random(1.0, 1, 2, vec![1, 2, 2, 1], Activation::Tanh, &mut rng).unwrap();
        let l1 = spec.range_schedule()[0];
        let big = random_input(&mut rng, 1.0, l1 + 8, 1);
        let map = downsampled_forward_map(&spec, &big).unwrap();
        let single = downsampled_forward(&spec, &big.restrict(l1).unwrap()).unwrap();
        assert_eq!(map.get(0, 0, 0).re, single[0]);
        // A fine shift of s^{T-1} cells is a coarse shift of one node.
        let shifted = downsampled_forward_map(&spec, &big.translate([4, 0])).unwrap();
        assert_eq!(shifted.get(1, 0, 0), map.get(0, 0, 0));
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = BasicConvNetSpec::random(0.5, 1.0, 1, vec![1, 2, 1], Activation::Softplus, &mut rng).unwrap();
        let j = serde_json::to_string(&spec).unwrap();
        assert!(j.contains("\"Lambda\":1.0"));
        assert_eq!(serde_json::from_str::<BasicConvNetSpec>(&j).unwrap(), spec);
    }
}
