//! Centered square grids and multi-channel signals living on them.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::AnalyticField;
use crate::quadrature::cell_average;

/// Nodes `{λk : k ∈ Z², ‖k‖_∞ ≤ L}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    spacing: f64,
    half_width: usize,
}

impl GridSpec {
    pub fn new(spacing: f64, half_width: usize) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::param(format!("grid spacing must be positive, got {spacing}")));
        }
        Ok(Self { spacing, half_width })
    }

    /// Grid covering `[-Λ, Λ]²` at spacing `λ`: `L = ⌊Λ/λ⌋`.
    pub fn for_cutoff(spacing: f64, cutoff: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff >= 0.0) {
            return Err(Error::param(format!("cutoff must be nonnegative, got {cutoff}")));
        }
        Self::new(spacing, cutoff_half_width(spacing, cutoff))
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn node_count(&self) -> usize {
        self.side() * self.side()
    }

    pub fn with_half_width(&self, half_width: usize) -> Self {
        Self { spacing: self.spacing, half_width }
    }

    /// The grid after `by` stencil layers.
    pub fn shrink(&self, by: usize) -> Result<Self> {
        if self.half_width < by {
            return Err(Error::GridTooSmall { needed: by, available: self.half_width });
        }
        Ok(self.with_half_width(self.half_width - by))
    }

    pub fn contains(&self, kx: i64, ky: i64) -> bool {
        let l = self.half_width as i64;
        kx.abs() <= l && ky.abs() <= l
    }

    pub fn position(&self, kx: i64, ky: i64) -> (f64, f64) {
        (kx as f64 * self.spacing, ky as f64 * self.spacing)
    }

    /// Integer node coordinates in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (i64, i64)> {
        let l = self.half_width as i64;
        (-l..=l).flat_map(move |x| (-l..=l).map(move |y| (x, y)))
    }

    fn same_as(&self, other: &GridSpec) -> bool {
        self.half_width == other.half_width && self.spacing == other.spacing
    }
}

/// `⌊Λ/λ⌋`, tolerant of the rounding in ratios such as `0.3 / 0.1`.
pub fn cutoff_half_width(spacing: f64, cutoff: f64) -> usize {
    let r = cutoff / spacing;
    let n = r.round();
    if (r - n).abs() <= 1e-9 * n.max(1.0) {
        n as usize
    } else {
        r.floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldType {
    Real,
    Complex,
}

/// Values on a [`GridSpec`] with `channels` components per node.
///
/// Storage is flat: `((kx + L)·side + (ky + L))·channels + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: GridSpec,
    channels: usize,
    field: FieldType,
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: GridSpec, channels: usize, field: FieldType, values: Vec<Complex64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::param("a signal needs at least one channel"));
        }
        let want = grid.node_count() * channels;
        if values.len() != want {
            return Err(Error::shape(format!("expected {want} values, got {}", values.len())));
        }
        for (i, v) in values.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            if field == FieldType::Real && v.im != 0.0 {
                return Err(Error::param(format!("real signal has imaginary part at flat index {i}")));
            }
        }
        Ok(Self { grid, channels, field, values })
    }

    /// Internal constructor for values already known to be valid.
    pub(crate) fn from_parts(grid: GridSpec, channels: usize, field: FieldType, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count() * channels);
        Self { grid, channels, field, values }
    }

    pub fn zeros(grid: GridSpec, channels: usize, field: FieldType) -> Self {
        Self::from_parts(grid, channels, field, vec![Complex64::default(); grid.node_count() * channels])
    }

    pub fn from_fn<F>(grid: GridSpec, channels: usize, field: FieldType, mut f: F) -> Result<Self>
    where
        F: FnMut(i64, i64, usize) -> Complex64,
    {
        let mut values = Vec::with_capacity(grid.node_count() * channels);
        for (kx, ky) in grid.nodes() {
            for c in 0..channels {
                values.push(f(kx, ky, c));
            }
        }
        Self::new(grid, channels, field, values)
    }

    pub fn from_real_fn<F>(grid: GridSpec, channels: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(i64, i64, usize) -> f64,
    {
        Self::from_fn(grid, channels, FieldType::Real, |x, y, c| Complex64::new(f(x, y, c), 0.0))
    }

    /// 1 at the origin in every channel, 0 elsewhere.
    pub fn delta(grid: GridSpec, channels: usize) -> Self {
        let mut s = Self::zeros(grid, channels, FieldType::Real);
        for c in 0..channels {
            s.set(0, 0, c, Complex64::new(1.0, 0.0));
        }
        s
    }

    pub fn constant(grid: GridSpec, channels: usize, value: f64) -> Self {
        Self::from_parts(
            grid,
            channels,
            FieldType::Real,
            vec![Complex64::new(value, 0.0); grid.node_count() * channels],
        )
    }

    /// Point values of `field` at the nodes.
    pub fn sample(field: &AnalyticField, grid: GridSpec) -> Result<Self> {
        let d = field.channels();
        let ft = if field.is_real() { FieldType::Real } else { FieldType::Complex };
        let mut values = Vec::with_capacity(grid.node_count() * d);
        let mut buf = vec![Complex64::default(); d];
        for (kx, ky) in grid.nodes() {
            let (x, y) = grid.position(kx, ky);
            field.eval_into(x, y, &mut buf);
            values.extend(buf.iter().map(|v| clean(*v, ft)));
        }
        Self::new(grid, d, ft, values)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn field(&self) -> FieldType {
        self.field
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn index(&self, kx: i64, ky: i64, c: usize) -> usize {
        let l = self.grid.half_width as i64;
        let side = self.grid.side();
        (((kx + l) as usize) * side + (ky + l) as usize) * self.channels + c
    }

    #[inline]
    pub fn get(&self, kx: i64, ky: i64, c: usize) -> Complex64 {
        self.values[self.index(kx, ky, c)]
    }

    /// Value at a node, or 0 off-grid.
    pub fn get_or_zero(&self, kx: i64, ky: i64, c: usize) -> Complex64 {
        if self.grid.contains(kx, ky) {
            self.get(kx, ky, c)
        } else {
            Complex64::default()
        }
    }

    pub(crate) fn set(&mut self, kx: i64, ky: i64, c: usize, v: Complex64) {
        let i = self.index(kx, ky, c);
        self.values[i] = v;
    }

    /// All channels at a node.
    pub fn node(&self, kx: i64, ky: i64) -> &[Complex64] {
        let i = self.index(kx, ky, 0);
        &self.values[i..i + self.channels]
    }

    /// Center crop to a smaller half-width.
    pub fn restrict(&self, half_width: usize) -> Result<Self> {
        if half_width > self.grid.half_width {
            return Err(Error::GridTooSmall { needed: half_width, available: self.grid.half_width });
        }
        let grid = self.grid.with_half_width(half_width);
        let mut values = Vec::with_capacity(grid.node_count() * self.channels);
        for (kx, ky) in grid.nodes() {
            values.extend_from_slice(self.node(kx, ky));
        }
        Ok(Self::from_parts(grid, self.channels, self.field, values))
    }

    /// Node `m` takes the value at `m - k`; off-grid sources give 0.
    pub fn translate(&self, k: [i64; 2]) -> Self {
        self.remap(|x, y| (x - k[0], y - k[1]))
    }

    /// Node `k` takes the value at `ρ^{-q} k`, with `ρ(x, y) = (-y, x)`.
    pub fn rotate_quarter(&self, q: i64) -> Self {
        let q = q.rem_euclid(4);
        self.remap(|x, y| match q {
            0 => (x, y),
            1 => (y, -x),
            2 => (-x, -y),
            _ => (-y, x),
        })
    }

    fn remap(&self, src: impl Fn(i64, i64) -> (i64, i64)) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for (kx, ky) in self.grid.nodes() {
            let (sx, sy) = src(kx, ky);
            if self.grid.contains(sx, sy) {
                values.extend_from_slice(self.node(sx, sy));
            } else {
                values.extend(std::iter::repeat_n(Complex64::default(), self.channels));
            }
        }
        Self::from_parts(self.grid, self.channels, self.field, values)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn real_part(&self) -> Self {
        let mut s = self.map(|v| Complex64::new(v.re, 0.0));
        s.field = FieldType::Real;
        s
    }

    /// Same values, reinterpreted as a complex signal.
    pub fn to_complex(&self) -> Self {
        let mut s = self.clone();
        s.field = FieldType::Complex;
        s
    }

    pub fn scale(&self, a: Complex64) -> Self {
        let mut s = self.map(|v| v * a);
        if a.im != 0.0 {
            s.field = FieldType::Complex;
        }
        s
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_parts(self.grid, self.channels, self.field, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `sqrt(λ² Σ |v|²)`.
    pub fn l2_norm(&self) -> f64 {
        let h2 = self.grid.spacing * self.grid.spacing;
        (h2 * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `λ² Σ conj(self)·other`.
    pub fn inner(&self, other: &Signal) -> Result<Complex64> {
        self.check_compatible(other)?;
        let h2 = self.grid.spacing * self.grid.spacing;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * h2)
    }

    pub fn max_abs_diff(&self, other: &Signal) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn check_compatible(&self, other: &Signal) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch(format!(
                "(lambda={}, L={}) vs (lambda={}, L={})",
                self.grid.spacing, self.grid.half_width, other.grid.spacing, other.grid.half_width
            )));
        }
        if self.channels != other.channels {
            return Err(Error::shape(format!("channel count {} vs {}", self.channels, other.channels)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("signal serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn clean(v: Complex64, ft: FieldType) -> Complex64 {
    match ft {
        FieldType::Real => Complex64::new(v.re, 0.0),
        FieldType::Complex => v,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
    pub inner: Complex64,
}

/// `l2` and `linf` of `s`, and `⟨s, t⟩` with `s` conjugated.
pub fn norms(s: &Signal, t: &Signal) -> Result<Norms> {
    Ok(Norms { l2: s.l2_norm(), linf: s.linf_norm(), inner: s.inner(t)? })
}

/// Cell averages of `field` on the grid `L = ⌊Λ/λ⌋`.
pub fn discretize(field: &AnalyticField, spacing: f64, cutoff: f64) -> Result<Signal> {
    discretize_on(field, GridSpec::for_cutoff(spacing, cutoff)?)
}

/// Cell averages of `field` over the squares of side `λ` centred at each node.
pub fn discretize_on(field: &AnalyticField, grid: GridSpec) -> Result<Signal> {
    let d = field.channels();
    let ft = if field.is_real() { FieldType::Real } else { FieldType::Complex };
    let h = grid.spacing();
    let mut values = Vec::with_capacity(grid.node_count() * d);
    let mut out = vec![Complex64::default(); d];
    let mut scratch = vec![Complex64::default(); d];
    for (kx, ky) in grid.nodes() {
        let (cx, cy) = grid.position(kx, ky);
        cell_average(cx, cy, h, &mut out, &mut scratch, |x, y, o| field.eval_into(x, y, o));
        values.extend(out.iter().map(|v| clean(*v, ft)));
    }
    Signal::new(grid, d, ft, values)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalJson {
    lambda: f64,
    half_width: usize,
    channels: usize,
    field: FieldType,
    values: Vec<Vec<Vec<Value>>>,
}

impl Serialize for Signal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let side = self.grid.side();
        let l = self.grid.half_width as i64;
        let mut rows = Vec::with_capacity(side);
        for ix in 0..side as i64 {
            let mut col = Vec::with_capacity(side);
            for iy in 0..side as i64 {
                let node = self.node(ix - l, iy - l);
                col.push(
                    node.iter()
                        .map(|v| match self.field {
                            FieldType::Real => Value::from(v.re),
                            FieldType::Complex => Value::from(vec![v.re, v.im]),
                        })
                        .collect(),
                );
            }
            rows.push(col);
        }
        SignalJson {
            lambda: self.grid.spacing,
            half_width: self.grid.half_width,
            channels: self.channels,
            field: self.field,
            values: rows,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Signal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SignalJson::deserialize(d)?;
        let grid = GridSpec::new(j.lambda, j.half_width).map_err(D::Error::custom)?;
        let side = grid.side();
        if j.values.len() != side || j.values.iter().any(|r| r.len() != side) {
            return Err(D::Error::custom(format!("values must be {side}x{side}")));
        }
        let mut flat = Vec::with_capacity(grid.node_count() * j.channels);
        for row in &j.values {
            for node in row {
                if node.len() != j.channels {
                    return Err(D::Error::custom(format!("each node needs {} channel values", j.channels)));
                }
                for v in node {
                    flat.push(parse_value(v, j.field).map_err(D::Error::custom)?);
                }
            }
        }
        Signal::new(grid, j.channels, j.field, flat).map_err(D::Error::custom)
    }
}

fn parse_value(v: &Value, field: FieldType) -> std::result::Result<Complex64, String> {
    match (v, field) {
        (Value::Number(n), _) => n.as_f64().map(|x| Complex64::new(x, 0.0)).ok_or_else(|| "bad number".into()),
        (Value::Array(a), FieldType::Complex) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or("bad real part")?;
            let im = a[1].as_f64().ok_or("bad imaginary part")?;
            Ok(Complex64::new(re, im))
        }
        _ => Err(format!("value {v} does not match field type {field:?}")),
    }
}
