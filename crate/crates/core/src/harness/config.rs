use std::f64::consts::PI;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CltSweep,
    SnInvarianceFit,
    BasicEquivariance,
    DownsampleNonequivariance,
    ChargeRotation,
    LambdaConsistency,
    InvariantPolyFit,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::CltSweep,
        Self::SnInvarianceFit,
        Self::BasicEquivariance,
        Self::DownsampleNonequivariance,
        Self::ChargeRotation,
        Self::LambdaConsistency,
        Self::InvariantPolyFit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::CltSweep => "clt_sweep",
            Self::SnInvarianceFit => "sn_invariance_fit",
            Self::BasicEquivariance => "basic_equivariance",
            Self::DownsampleNonequivariance => "downsample_nonequivariance",
            Self::ChargeRotation => "charge_rotation",
            Self::LambdaConsistency => "lambda_consistency",
            Self::InvariantPolyFit => "invariant_poly_fit",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::CltSweep => "discrete derivative-chain kernels vs Gaussian derivatives over a lambda sweep",
            Self::SnInvarianceFit => "permutation invariance and random-feature fits of the S_N network",
            Self::BasicEquivariance => "exact shift equivariance of basic convnets on overlap windows",
            Self::DownsampleNonequivariance => "shift-equivariance failure of strided convnets, plus stride validation",
            Self::ChargeRotation => "phase equivariance, quarter-turn covariance and charge-rule enforcement",
            Self::LambdaConsistency => "charge convnet vs its continuum limit, and continuous-rotation consistency",
            Self::InvariantPolyFit => "polynomial-invariant ansatz vs group-averaged net on a Z2-invariant target",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

fn d_pairs() -> Vec<[u32; 2]> {
    vec![[0, 0], [1, 0], [1, 1], [2, 0]]
}
fn d_clt_lambdas() -> Vec<f64> {
    vec![1.0, 0.5, 0.25, 0.125]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltSweepParams {
    #[serde(default = "d_pairs")]
    pub pairs: Vec<[u32; 2]>,
    #[serde(default = "d_clt_lambdas")]
    pub lambdas: Vec<f64>,
    /// Required `gap(last λ) / gap(first λ)` upper bound.
    #[serde(default = "d_ratio")]
    pub ratio_max: f64,
    #[serde(default = "d_mass_tol")]
    pub mass_tol: f64,
}
fn d_ratio() -> f64 {
    0.15
}
fn d_mass_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnFitParams {
    #[serde(default = "d_n")]
    pub n: usize,
    #[serde(default = "d_m")]
    pub m: usize,
    #[serde(default = "d_widths")]
    pub widths: Vec<usize>,
    #[serde(default = "d_seeds")]
    pub seeds: usize,
    #[serde(default = "d_t2")]
    pub t2: usize,
    #[serde(default = "d_train")]
    pub n_train: usize,
    #[serde(default = "d_test")]
    pub n_test: usize,
    #[serde(default = "d_reg")]
    pub reg: f64,
    /// Final median test RMSE must be below this fraction of the target's std.
    #[serde(default = "d_rmse_ratio")]
    pub rmse_ratio: f64,
    #[serde(default = "d_tol10")]
    pub invariance_tol: f64,
    /// `N` for the exhaustive bit-exact permutation check.
    #[serde(default = "d_exhaustive_n")]
    pub exhaustive_n: usize,
    #[serde(default = "d_random_perm_n")]
    pub random_perm_n: usize,
    #[serde(default = "d_random_perms")]
    pub random_perms: usize,
}
fn d_n() -> usize {
    6
}
fn d_m() -> usize {
    3
}
fn d_widths() -> Vec<usize> {
    vec![8, 32, 128]
}
fn d_seeds() -> usize {
    10
}
fn d_t2() -> usize {
    8
}
fn d_train() -> usize {
    3000
}
fn d_test() -> usize {
    1000
}
fn d_reg() -> f64 {
    1e-8
}
fn d_rmse_ratio() -> f64 {
    0.1
}
fn d_tol10() -> f64 {
    1e-10
}
fn d_exhaustive_n() -> usize {
    4
}
fn d_random_perm_n() -> usize {
    12
}
fn d_random_perms() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasicEquivarianceParams {
    #[serde(default = "d_triples")]
    pub triples: usize,
    #[serde(default = "d_tol12")]
    pub tol: f64,
    #[serde(default = "d_max_shift")]
    pub max_shift: i64,
}
fn d_triples() -> usize {
    50
}
fn d_tol12() -> f64 {
    1e-12
}
fn d_max_shift() -> i64 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DownsampleParams {
    #[serde(default = "d_stride")]
    pub stride: usize,
    #[serde(default = "d_one")]
    pub l_rf: usize,
    #[serde(default = "d_depth")]
    pub depth: usize,
    #[serde(default = "d_trials")]
    pub trials: usize,
    /// A fine shift must break the coarse-shift identity by more than this.
    #[serde(default = "d_violation")]
    pub violation_min: f64,
    #[serde(default = "d_tol12")]
    pub control_tol: f64,
    /// Stride that must be rejected for the configured `l_rf`.
    #[serde(default = "d_bad_stride")]
    pub rejected_stride: usize,
}
fn d_stride() -> usize {
    2
}
fn d_one() -> usize {
    1
}
fn d_depth() -> usize {
    3
}
fn d_trials() -> usize {
    5
}
fn d_violation() -> f64 {
    1e-3
}
fn d_bad_stride() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeRotationParams {
    #[serde(default = "d_phase_trials")]
    pub phase_trials: usize,
    #[serde(default = "d_origin_specs")]
    pub origin_specs: usize,
    #[serde(default = "d_origin_specs")]
    pub covariance_trials: usize,
    #[serde(default = "d_quarters")]
    pub quarter_turns: Vec<i64>,
    #[serde(default = "d_lambda_one")]
    pub lambda: f64,
    #[serde(default = "d_tol10")]
    pub tol: f64,
}
fn d_phase_trials() -> usize {
    100
}
fn d_origin_specs() -> usize {
    20
}
fn d_quarters() -> Vec<i64> {
    vec![1, 2, 3]
}
fn d_lambda_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaConsistencyParams {
    #[serde(default = "d_two")]
    pub t_diff: u32,
    #[serde(default = "d_two_usize")]
    pub t_mult: usize,
    #[serde(default = "d_four")]
    pub d_mult: usize,
    /// The rotation check compares the last two entries.
    #[serde(default = "d_lc_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "d_angle")]
    pub angle: f64,
    #[serde(default = "d_factor")]
    pub min_factor: f64,
    /// Sample points; each must be a node at every λ in the sweep.
    #[serde(default = "d_points")]
    pub points: Vec<[f64; 2]>,
}
fn d_two() -> u32 {
    2
}
fn d_two_usize() -> usize {
    2
}
fn d_four() -> usize {
    4
}
fn d_lc_lambdas() -> Vec<f64> {
    vec![0.5, 0.25, 0.125]
}
fn d_angle() -> f64 {
    PI / 7.0
}
fn d_factor() -> f64 {
    1.5
}
fn d_points() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0], [0.5, 0.0], [0.0, -0.5], [0.5, 0.5], [-0.5, 0.5]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantPolyFitParams {
    #[serde(default = "d_width")]
    pub width: usize,
    #[serde(default = "d_poly_train")]
    pub n_train: usize,
    #[serde(default = "d_test")]
    pub n_test: usize,
    /// Side of the argmax test grid over `[-1, 1]²`.
    #[serde(default = "d_grid_side")]
    pub grid_side: usize,
    #[serde(default = "d_poly_reg")]
    pub reg: f64,
    #[serde(default = "d_rmse_tol")]
    pub rmse_tol: f64,
}
fn d_width() -> usize {
    64
}
fn d_poly_train() -> usize {
    2000
}
fn d_grid_side() -> usize {
    11
}
fn d_poly_reg() -> f64 {
    1e-10
}
fn d_rmse_tol() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ExperimentParams {
    CltSweep(CltSweepParams),
    SnInvarianceFit(SnFitParams),
    BasicEquivariance(BasicEquivarianceParams),
    DownsampleNonequivariance(DownsampleParams),
    ChargeRotation(ChargeRotationParams),
    LambdaConsistency(LambdaConsistencyParams),
    InvariantPolyFit(InvariantPolyFitParams),
}

/// A validated experiment configuration.
///
/// JSON: `{"kind": ..., "seed": ..., "out_dir": ..., <kind parameters>}`.
/// Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub params: ExperimentParams,
}

fn parse_params<T: DeserializeOwned>(v: Value, problems: &mut Vec<String>) -> Option<T> {
    match serde_json::from_value(v) {
        Ok(p) => Some(p),
        Err(e) => {
            problems.push(e.to_string());
            None
        }
    }
}

impl ExperimentConfig {
    pub fn default_for(kind: ExperimentKind, seed: u64) -> Self {
        let params = Self::params_from(kind, Value::Object(Default::default()), &mut Vec::new()).expect("defaults parse");
        Self { kind, seed, out_dir: None, params }
    }

    fn params_from(kind: ExperimentKind, v: Value, problems: &mut Vec<String>) -> Option<ExperimentParams> {
        use ExperimentParams as P;
        Some(match kind {
            ExperimentKind::CltSweep => P::CltSweep(parse_params(v, problems)?),
            ExperimentKind::SnInvarianceFit => P::SnInvarianceFit(parse_params(v, problems)?),
            ExperimentKind::BasicEquivariance => P::BasicEquivariance(parse_params(v, problems)?),
            ExperimentKind::DownsampleNonequivariance => P::DownsampleNonequivariance(parse_params(v, problems)?),
            ExperimentKind::ChargeRotation => P::ChargeRotation(parse_params(v, problems)?),
            ExperimentKind::LambdaConsistency => P::LambdaConsistency(parse_params(v, problems)?),
            ExperimentKind::InvariantPolyFit => P::InvariantPolyFit(parse_params(v, problems)?),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        Self::from_value(v)
    }

    pub fn from_value(v: Value) -> Result<Self> {
        let Value::Object(mut map) = v else {
            return Err(Error::Config(vec!["config must be a JSON object".into()]));
        };
        let mut problems = Vec::new();
        let kind = match map.remove("kind") {
            Some(Value::String(s)) => ExperimentKind::parse(&s).or_else(|| {
                let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                problems.push(format!("kind: unknown experiment {s:?}; expected one of {}", names.join(", ")));
                None
            }),
            Some(other) => {
                problems.push(format!("kind: expected a string, got {other}"));
                None
            }
            None => {
                problems.push("kind: missing".into());
                None
            }
        };
        let seed = match map.remove("seed") {
            None => 0,
            Some(v) => v.as_u64().unwrap_or_else(|| {
                problems.push(format!("seed: expected a nonnegative integer, got {v}"));
                0
            }),
        };
        let out_dir = match map.remove("out_dir") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(other) => {
                problems.push(format!("out_dir: expected a string, got {other}"));
                None
            }
        };
        let params = kind.and_then(|k| Self::params_from(k, Value::Object(map), &mut problems));
        if let (Some(kind), Some(params), true) = (kind, params.clone(), problems.is_empty()) {
            let cfg = Self { kind, seed, out_dir, params };
            cfg.validate()?;
            return Ok(cfg);
        }
        Err(Error::Config(problems))
    }

    /// Range checks beyond what the JSON schema enforces.
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        match &self.params {
            ExperimentParams::CltSweep(c) => {
                positive(&mut p, "ratio_max", c.ratio_max);
                positive(&mut p, "mass_tol", c.mass_tol);
                check_lambdas("lambdas", &c.lambdas, 1.0, &mut p);
                if c.pairs.is_empty() {
                    p.push("pairs: must not be empty".into());
                }
                for [a, b] in &c.pairs {
                    if *a > crate::local_ops::MAX_DERIVATIVE_ORDER || *b > crate::local_ops::MAX_DERIVATIVE_ORDER {
                        p.push(format!("pairs: ({a},{b}) exceeds derivative order {}", crate::local_ops::MAX_DERIVATIVE_ORDER));
                    }
                }
            }
            ExperimentParams::SnInvarianceFit(c) => {
                positive(&mut p, "reg", c.reg);
                positive(&mut p, "rmse_ratio", c.rmse_ratio);
                positive(&mut p, "invariance_tol", c.invariance_tol);
                for (name, v) in [("n", c.n), ("m", c.m), ("seeds", c.seeds), ("t2", c.t2), ("n_train", c.n_train), ("n_test", c.n_test)] {
                    if v == 0 {
                        p.push(format!("{name}: must be positive"));
                    }
                }
                if c.widths.is_empty() || c.widths.contains(&0) {
                    p.push("widths: must be a nonempty list of positive integers".into());
                }
                if c.exhaustive_n == 0 || c.exhaustive_n > 8 {
                    p.push(format!("exhaustive_n: must lie in 1..=8, got {}", c.exhaustive_n));
                }
                if c.random_perm_n == 0 {
                    p.push("random_perm_n: must be positive".into());
                }
            }
            ExperimentParams::BasicEquivariance(c) => {
                positive(&mut p, "tol", c.tol);
                if c.triples == 0 {
                    p.push("triples: must be positive".into());
                }
                if c.max_shift < 0 {
                    p.push("max_shift: must be nonnegative".into());
                }
            }
            ExperimentParams::DownsampleNonequivariance(c) => {
                positive(&mut p, "violation_min", c.violation_min);
                positive(&mut p, "control_tol", c.control_tol);
                if c.l_rf == 0 || c.depth < 2 || c.trials == 0 {
                    p.push("l_rf and trials must be positive, depth at least 2".into());
                }
                if c.stride < 2 || c.stride > 2 * c.l_rf + 1 {
                    p.push(format!("stride: must lie in 2..=2*l_rf+1 = {}, got {}", 2 * c.l_rf + 1, c.stride));
                }
                if c.rejected_stride <= 2 * c.l_rf + 1 {
                    p.push(format!("rejected_stride: must exceed 2*l_rf+1 = {}", 2 * c.l_rf + 1));
                }
            }
            ExperimentParams::ChargeRotation(c) => {
                positive(&mut p, "tol", c.tol);
                positive(&mut p, "lambda", c.lambda);
                if c.quarter_turns.is_empty() {
                    p.push("quarter_turns: must not be empty".into());
                }
            }
            ExperimentParams::LambdaConsistency(c) => {
                positive(&mut p, "angle", c.angle.abs());
                positive(&mut p, "min_factor", c.min_factor);
                check_lambdas("lambdas", &c.lambdas, 1.0, &mut p);
                if c.lambdas.len() < 2 {
                    p.push("lambdas: need at least two values".into());
                }
                if c.t_diff == 0 || c.t_mult == 0 || c.d_mult == 0 {
                    p.push("t_diff, t_mult and d_mult must be positive".into());
                }
                for pt in &c.points {
                    for &lam in &c.lambdas {
                        let on_grid = pt.iter().all(|v| ((v / lam) - (v / lam).round()).abs() < 1e-9);
                        if !on_grid {
                            p.push(format!("points: {pt:?} is not a node at lambda = {lam}"));
                        }
                    }
                }
                if c.points.is_empty() {
                    p.push("points: must not be empty".into());
                }
            }
            ExperimentParams::InvariantPolyFit(c) => {
                positive(&mut p, "reg", c.reg);
                positive(&mut p, "rmse_tol", c.rmse_tol);
                if c.width == 0 || c.n_train == 0 || c.n_test == 0 || c.grid_side < 2 {
                    p.push("width, n_train, n_test must be positive and grid_side at least 2".into());
                }
            }
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p))
        }
    }

    /// The configuration with all defaults filled in.
    pub fn to_value(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("kind".into(), Value::String(self.kind.name().into()));
        map.insert("seed".into(), Value::from(self.seed));
        if let Some(d) = &self.out_dir {
            map.insert("out_dir".into(), Value::String(d.display().to_string()));
        }
        if let Value::Object(params) = serde_json::to_value(&self.params).expect("params serialize") {
            map.extend(params);
        }
        Value::Object(map)
    }
}

fn check_lambdas(name: &str, l: &[f64], max: f64, p: &mut Vec<String>) {
    if l.is_empty() {
        p.push(format!("{name}: must not be empty"));
    }
    if l.iter().any(|&v| !(v.is_finite() && v > 0.0 && v <= max)) {
        p.push(format!("{name}: values must lie in (0, {max}]"));
    }
    if l.windows(2).any(|w| w[1] >= w[0]) {
        p.push(format!("{name}: must be sorted strictly descending"));
    }
}

fn positive(p: &mut Vec<String>, name: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        p.push(format!("{name}: must be positive, got {v}"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_echo() {
        let c = ExperimentConfig::from_json(r#"{"kind":"clt_sweep","seed":3}"#).unwrap();
        assert_eq!(c, ExperimentConfig::default_for(ExperimentKind::CltSweep, 3));
        let v = c.to_value();
        assert_eq!(v["ratio_max"], 0.15);
        assert_eq!(ExperimentConfig::from_value(v).unwrap(), c);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_listed() {
        let e = ExperimentConfig::from_json(r#"{"kind":"clt_sweep","lambdaz":[1]}"#).unwrap_err();
        let Error::Config(p) = e else { panic!() };
        assert!(p[0].contains("lambdaz"));
        let e = ExperimentConfig::from_json(r#"{"kind":"clt_sweep","lambdas":[0.5,1.0],"ratio_max":-1}"#).unwrap_err();
        let Error::Config(p) = e else { panic!() };
        assert_eq!(p.len(), 2, "{p:?}");
        assert!(ExperimentConfig::from_json(r#"{"kind":"nope"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"seed":1}"#).is_err());
    }

    #[test]
    fn all_defaults_validate() {
        for k in ExperimentKind::ALL {
            ExperimentConfig::default_for(k, 0).validate().unwrap();
            assert_eq!(ExperimentKind::parse(k.name()), Some(k));
        }
    }
}
