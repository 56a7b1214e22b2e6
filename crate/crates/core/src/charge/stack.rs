use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FieldType, GridSpec, Signal};
use crate::local_ops::{stencil_apply, StencilKind};

/// Charge-labeled signals on a common grid.
///
/// Diff-stage entries are keyed by `(s, μ)`: derivative degree and global
/// charge. Mult-stage entries are keyed by `μ` alone, one multi-channel
/// signal per charge.
#[derive(Debug, Clone, PartialEq)]
pub enum ChargedStack {
    Diff { t_diff: u32, entries: BTreeMap<(u32, i32), Signal> },
    Mult { t_diff: u32, entries: BTreeMap<i32, Signal> },
}

impl ChargedStack {
    pub fn t_diff(&self) -> u32 {
        match self {
            Self::Diff { t_diff, .. } | Self::Mult { t_diff, .. } => *t_diff,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.signals().next().expect("stacks are never empty").grid()
    }

    pub fn signals(&self) -> Box<dyn Iterator<Item = &Signal> + '_> {
        match self {
            Self::Diff { entries, .. } => Box::new(entries.values()),
            Self::Mult { entries, .. } => Box::new(entries.values()),
        }
    }

    pub fn diff_entry(&self, s: u32, mu: i32) -> Option<&Signal> {
        match self {
            Self::Diff { entries, .. } => entries.get(&(s, mu)),
            Self::Mult { .. } => None,
        }
    }

    pub fn mult_entry(&self, mu: i32) -> Option<&Signal> {
        match self {
            Self::Mult { entries, .. } => entries.get(&mu),
            Self::Diff { .. } => None,
        }
    }

    /// A mult-stage stack; all entries must share a grid and channel count,
    /// and charges must lie within `±t_diff`.
    pub fn mult(t_diff: u32, entries: BTreeMap<i32, Signal>) -> Result<Self> {
        let first = entries.values().next().ok_or_else(|| Error::param("empty stack"))?;
        for (&mu, s) in &entries {
            if mu.unsigned_abs() > t_diff {
                return Err(Error::ChargeViolation(format!("label mu = {mu} outside ±T_diff = ±{t_diff}")));
            }
            first.check_compatible(s)?;
        }
        Ok(Self::Mult { t_diff, entries })
    }

    fn map_signals(&self, mut f: impl FnMut(i32, &Signal) -> Signal) -> Self {
        match self {
            Self::Diff { t_diff, entries } => {
                Self::Diff { t_diff: *t_diff, entries: entries.iter().map(|(&k, s)| (k, f(k.1, s))).collect() }
            }
            Self::Mult { t_diff, entries } => {
                Self::Mult { t_diff: *t_diff, entries: entries.iter().map(|(&mu, s)| (mu, f(mu, s))).collect() }
            }
        }
    }

    /// Multiplies each charge-`μ` entry by `e^{-iμφ}`.
    pub fn phase_rotate(&self, phi: f64) -> Self {
        self.map_signals(|mu, s| s.scale(unit_phase(-(mu as f64) * phi)))
    }

    pub fn rotate_quarter(&self, q: i64) -> Self {
        self.map_signals(|_, s| s.rotate_quarter(q))
    }

    pub fn restrict(&self, half_width: usize) -> Result<Self> {
        let mut err = None;
        let out = self.map_signals(|_, s| match s.restrict(half_width) {
            Ok(r) => r,
            Err(e) => {
                err.get_or_insert(e);
                s.clone()
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// Largest entrywise difference over matching labels.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let pairs: Vec<(&Signal, &Signal)> = match (self, other) {
            (Self::Diff { entries: a, .. }, Self::Diff { entries: b, .. }) if a.keys().eq(b.keys()) => {
                a.values().zip(b.values()).collect()
            }
            (Self::Mult { entries: a, .. }, Self::Mult { entries: b, .. }) if a.keys().eq(b.keys()) => {
                a.values().zip(b.values()).collect()
            }
            _ => return Err(Error::shape("stacks have different stages or labels")),
        };
        pairs.into_iter().try_fold(0.0f64, |m, (x, y)| Ok(m.max(x.max_abs_diff(y)?)))
    }

    /// `{label: signal}` where labels are `"s,mu"` (diff) or `"mu"` (mult).
    pub fn to_json(&self) -> String {
        let mut map = serde_json::Map::new();
        let mut put = |k: String, s: &Signal| {
            map.insert(k, serde_json::from_str(&s.to_json()).expect("signal JSON is valid"));
        };
        match self {
            Self::Diff { entries, .. } => entries.iter().for_each(|(&(s, mu), sig)| put(format!("{s},{mu}"), sig)),
            Self::Mult { entries, .. } => entries.iter().for_each(|(&mu, sig)| put(mu.to_string(), sig)),
        }
        serde_json::Value::Object(map).to_string()
    }
}

/// `e^{iθ}`, exact when `θ` is a whole number of quarter turns.
pub(crate) fn unit_phase(theta: f64) -> Complex64 {
    let q = theta / std::f64::consts::FRAC_PI_2;
    if q == q.round() {
        match (q as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, theta)
    }
}

/// `T_diff` differentiation layers. Each layer maps entry `(s, μ)` to
/// `(s, μ)` by cropping, to `(s+1, μ+1)` by `∂_z` and to `(s+1, μ-1)` by
/// `∂_z̄`. Every label with `|μ| ≤ s` is materialized, including the
/// parity-forced zeros.
pub fn diff_stage(s0: &Signal, t_diff: u32) -> Result<ChargedStack> {
    let grid = s0.grid();
    if grid.half_width() < t_diff as usize {
        return Err(Error::GridTooSmall { needed: t_diff as usize, available: grid.half_width() });
    }
    let base = s0.to_complex();
    let mut entries: BTreeMap<(u32, i32), Signal> = BTreeMap::new();
    entries.insert((0, 0), base);
    for layer in 0..t_diff {
        let out_grid = grid.shrink(layer as usize + 1)?;
        let d = s0.channels();
        let zero = Signal::zeros(out_grid, d, FieldType::Complex);
        let mut dz = BTreeMap::new();
        let mut dzb = BTreeMap::new();
        let mut next: BTreeMap<(u32, i32), Signal> = BTreeMap::new();
        for (&(s, mu), sig) in &entries {
            dz.insert((s, mu), stencil_apply(StencilKind::Dz, sig)?);
            dzb.insert((s, mu), stencil_apply(StencilKind::Dzbar, sig)?);
        }
        let top = layer + 1;
        for s in 0..=top {
            let si = s as i32;
            for mu in -si..=si {
                let mut acc = match entries.get(&(s, mu)) {
                    Some(old) => old.restrict(out_grid.half_width())?.into_values(),
                    None => zero.values().to_vec(),
                };
                if s > 0 {
                    for (src, m) in [(&dz, mu - 1), (&dzb, mu + 1)] {
                        if let Some(v) = src.get(&(s - 1, m)) {
                            for (a, b) in acc.iter_mut().zip(v.values()) {
                                *a += b;
                            }
                        }
                    }
                }
                next.insert((s, mu), Signal::new(out_grid, d, FieldType::Complex, acc)?);
            }
        }
        entries = next;
    }
    Ok(ChargedStack::Diff { t_diff, entries })
}

/// Repacks a diff stack as the first mult-stage input: one signal per
/// `μ ∈ [-T_diff, T_diff]` with `(T_diff+1)·d` channels, channel `s·d + c`
/// holding entry `(s, μ)` channel `c` (zero where no such entry exists).
pub fn flatten_diff(stack: &ChargedStack) -> Result<ChargedStack> {
    let ChargedStack::Diff { t_diff, entries } = stack else {
        return Err(Error::param("flatten_diff expects a diff-stage stack"));
    };
    let grid = stack.grid();
    let d = entries[&(0, 0)].channels();
    let t = *t_diff as i32;
    let width = (*t_diff as usize + 1) * d;
    let mut out = BTreeMap::new();
    for mu in -t..=t {
        let mut vals = vec![Complex64::default(); grid.node_count() * width];
        for s in 0..=*t_diff {
            if let Some(sig) = entries.get(&(s, mu)) {
                for (node, chunk) in sig.values().chunks(d).enumerate() {
                    let o = node * width + s as usize * d;
                    vals[o..o + d].copy_from_slice(chunk);
                }
            }
        }
        out.insert(mu, Signal::new(grid, width, FieldType::Complex, vals)?);
    }
    Ok(ChargedStack::Mult { t_diff: *t_diff, entries: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(seed: u64, hw: usize) -> Signal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Signal::from_real_fn(GridSpec::new(0.5, hw).unwrap(), 1, |_, _, _| rng.gen_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn constant_input() {
        let s = Signal::constant(GridSpec::new(0.5, 3).unwrap(), 1, 2.0);
        let st = diff_stage(&s, 1).unwrap();
        assert!(st.diff_entry(0, 0).unwrap().values().iter().all(|v| *v == Complex64::new(2.0, 0.0)));
        for mu in [-1, 1] {
            assert!(st.diff_entry(1, mu).unwrap().values().iter().all(|v| v.norm() == 0.0));
        }
        assert!(st.diff_entry(1, 0).unwrap().values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn multinomial_coefficient_on_mixed_entry() {
        let s = random(1, 5);
        let st = diff_stage(&s, 2).unwrap();
        let mixed = stencil_apply(StencilKind::Dz, &stencil_apply(StencilKind::Dzbar, &s.to_complex()).unwrap()).unwrap();
        assert!(st.diff_entry(2, 0).unwrap().max_abs_diff(&mixed.scale(Complex64::new(2.0, 0.0))).unwrap() < 1e-12);
        // (1, ±1): two layers, derivative taken in either one.
        let dz = stencil_apply(StencilKind::Dz, &s.to_complex()).unwrap().restrict(3).unwrap();
        assert!(st.diff_entry(1, 1).unwrap().max_abs_diff(&dz.scale(Complex64::new(2.0, 0.0))).unwrap() < 1e-12);
        let dzz = stencil_apply(StencilKind::Dz, &stencil_apply(StencilKind::Dz, &s.to_complex()).unwrap()).unwrap();
        assert!(st.diff_entry(2, 2).unwrap().max_abs_diff(&dzz).unwrap() < 1e-12);
    }

    #[test]
    fn opposite_parity_entries_vanish() {
        let st = diff_stage(&random(2, 6), 3).unwrap();
        let ChargedStack::Diff { entries, .. } = &st else { unreachable!() };
        for (&(s, mu), sig) in entries {
            assert!(mu.unsigned_abs() <= s);
            if (s as i32 - mu) % 2 != 0 {
                assert!(sig.values().iter().all(|v| v.norm() == 0.0), "({s},{mu})");
            }
            assert_eq!(sig.grid().half_width(), 3);
        }
    }

    #[test]
    fn too_small() {
        assert!(matches!(diff_stage(&random(3, 1), 2), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn flatten_layout() {
        let s = random(4, 4);
        let st = diff_stage(&s, 2).unwrap();
        let flat = flatten_diff(&st).unwrap();
        let m1 = flat.mult_entry(-1).unwrap();
        assert_eq!(m1.channels(), 3);
        assert_eq!(m1.get(1, 0, 1), st.diff_entry(1, -1).unwrap().get(1, 0, 0));
        assert_eq!(m1.get(1, 0, 0), Complex64::default());
        assert_eq!(m1.get(1, 0, 2), Complex64::default());
    }

    #[test]
    fn quarter_turn_covariance() {
        let s = random(5, 6);
        for q in 1..4 {
            let phi = q as f64 * std::f64::consts::FRAC_PI_2;
            let a = diff_stage(&s.rotate_quarter(q), 2).unwrap();
            let b = diff_stage(&s, 2).unwrap().rotate_quarter(q).phase_rotate(phi);
            assert!(a.max_abs_diff(&b).unwrap() < 1e-10);
        }
    }
}
