use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::experiments::{case_rng, run_kind};
use super::report::{CaseRecord, Check, Report, Table};
use crate::field::{AnalyticField, FieldKind};
use crate::grid::{FieldType, GridSpec, Signal};
use crate::local_ops::{dft2, fourier_symbol, idft2, stencil_apply, StencilKind, SymbolKind};

/// Seed used by every acceptance experiment.
pub const SUITE_SEED: u64 = 20_240_601;

/// One acceptance criterion with its runtime budget.
#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub budget: Duration,
}

pub const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "stencil_identities", budget: Duration::from_secs(1) },
    Criterion { id: 2, name: "fourier_machinery", budget: Duration::from_secs(30) },
    Criterion { id: 3, name: "kernel_gap_sweep", budget: Duration::from_secs(120) },
    Criterion { id: 4, name: "permutation_net", budget: Duration::from_secs(120) },
    Criterion { id: 5, name: "convnet_translations", budget: Duration::from_secs(30) },
    Criterion { id: 6, name: "charge_conservation", budget: Duration::from_secs(60) },
    Criterion { id: 7, name: "rotation_scaling_limit", budget: Duration::from_secs(180) },
    Criterion { id: 8, name: "invariant_ansatz_equivalence", budget: Duration::from_secs(30) },
    Criterion { id: 9, name: "determinism", budget: Duration::MAX },
];

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub criterion: Criterion,
    /// Reports backing the criterion, one per experiment it ran.
    pub reports: Vec<(String, Report)>,
    pub elapsed: Duration,
    /// Set for the determinism criterion, which has no report of its own.
    pub note: Option<String>,
    pub checks_passed: bool,
}

impl CriterionOutcome {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.criterion.budget
    }

    pub fn passed(&self) -> bool {
        self.checks_passed && self.within_budget()
    }

    /// `criterion N (name): pass|fail  <detail>`.
    pub fn line(&self) -> String {
        let c = &self.criterion;
        let mut detail = Vec::new();
        for (_, r) in &self.reports {
            for ch in r.checks.iter().filter(|ch| !ch.pass) {
                detail.push(format!("failed {:?}: {} {}", ch.name, crate::fmt_sig(ch.value), ch.bound));
            }
            for case in r.cases.iter().filter(|k| k.error.is_some()) {
                detail.push(format!("case {:?} errored: {}", case.name, case.error.as_deref().unwrap_or("")));
            }
        }
        if let Some(n) = &self.note {
            detail.push(n.clone());
        }
        if !self.within_budget() {
            detail.push(format!("runtime {:.2}s over budget {}s", self.elapsed.as_secs_f64(), c.budget.as_secs()));
        }
        let verdict = if self.passed() { "pass" } else { "fail" };
        let mut s = format!("criterion {} ({}): {verdict}", c.id, c.name);
        if !detail.is_empty() {
            s.push_str("  ");
            s.push_str(&detail.join("; "));
        }
        s
    }
}

fn suite_config(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig::default_for(kind, SUITE_SEED)
}

fn monomial(a: u32, b: u32) -> AnalyticField {
    AnalyticField::single(FieldKind::CoordinateMonomial { a, b, coeff: Complex64::new(1.0, 0.0) }).expect("valid field")
}

/// Stencils applied to `z`, `z̄` and `|z|²` reproduce their exact derivatives.
fn stencil_identities() -> Report {
    let mut cases = Vec::new();
    let mut table = Table::new("stencil_identities", &["lambda", "identity", "max_dev"]);
    let identities: [(&str, StencilKind, (u32, u32), f64); 3] = [
        ("dz z = 1", StencilKind::Dz, (1, 0), 1.0),
        ("dzbar z = 0", StencilKind::Dzbar, (1, 0), 0.0),
        ("laplace |z|^2 = 4", StencilKind::Laplace, (1, 1), 4.0),
    ];
    let mut worst = 0.0f64;
    for lam in [1.0, 0.5] {
        for (label, st, (a, b), want) in identities {
            let name = format!("{label}, lambda={}", crate::fmt_sig(lam));
            let run = || -> crate::Result<f64> {
                let s = Signal::sample(&monomial(a, b), GridSpec::new(lam, 8)?)?;
                let out = stencil_apply(st, &s)?;
                Ok(out.values().iter().map(|v| (v - want).norm()).fold(0.0, f64::max))
            };
            match run() {
                Ok(dev) => {
                    worst = worst.max(dev);
                    table.push(vec![lam.into(), label.into(), dev.into()]);
                    cases.push(CaseRecord::ok(name).with("max_dev", dev));
                }
                Err(e) => cases.push(CaseRecord::failed(name, e)),
            }
        }
    }
    Report {
        config: json!({"criterion": 1, "lambdas": [1.0, 0.5], "half_width": 8}),
        cases,
        checks: vec![Check::at_most("max stencil identity deviation on interior nodes", worst, 1e-12)],
        tables: vec![table],
    }
}

/// Parseval, inverse round trip and symbol agreement on random signals.
fn fourier_machinery(seed: u64) -> Report {
    let mut cases = Vec::new();
    let mut table = Table::new("fourier", &["trial", "lambda", "half_width", "parseval_rel", "roundtrip"]);
    let (mut parseval, mut roundtrip) = (0.0f64, 0.0f64);
    for t in 0..20u64 {
        let mut rng = case_rng(seed, t);
        let lam = [1.0, 0.5, 0.25][rng.gen_range(0..3)];
        let hw = if t == 0 { 32 } else { rng.gen_range(1..=32) };
        let name = format!("signal {t}");
        let mut run = || -> crate::Result<(f64, f64)> {
            let grid = GridSpec::new(lam, hw)?;
            let s = Signal::from_fn(grid, 1, FieldType::Complex, |_, _, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))?;
            let f = dft2(&s);
            let back = idft2(&f, lam)?;
            Ok(((f.l2_norm() - s.l2_norm()).abs() / s.l2_norm(), back.max_abs_diff(&s)?))
        };
        match run() {
            Ok((p, r)) => {
                parseval = parseval.max(p);
                roundtrip = roundtrip.max(r);
                table.push(vec![t.into(), lam.into(), hw.into(), p.into(), r.into()]);
                cases.push(CaseRecord::ok(name).with("parseval_rel", p).with("roundtrip", r));
            }
            Err(e) => cases.push(CaseRecord::failed(name, e)),
        }
    }
    let mut symbol_dev = 0.0f64;
    for lam in [1.0, 0.6, 0.25] {
        for st in [StencilKind::Dz, StencilKind::Dzbar, StencilKind::Laplace, StencilKind::Smooth] {
            let name = format!("symbol {st:?}, lambda={}", crate::fmt_sig(lam));
            let run = || -> crate::Result<f64> {
                let resp = stencil_apply(st, &Signal::delta(GridSpec::new(lam, 9)?, 1))?;
                let f = dft2(&resp);
                let fg = f.grid();
                let mut dev = 0.0f64;
                for (jx, jy) in fg.nodes() {
                    let (px, py) = fg.position(jx, jy);
                    let sym = fourier_symbol(SymbolKind::Stencil { stencil: st }, lam, [px, py])?;
                    dev = dev.max((sym - f.get(jx, jy, 0) * 2.0 * PI / (lam * lam)).norm());
                }
                Ok(dev)
            };
            match run() {
                Ok(d) => {
                    symbol_dev = symbol_dev.max(d);
                    cases.push(CaseRecord::ok(name).with("max_dev", d));
                }
                Err(e) => cases.push(CaseRecord::failed(name, e)),
            }
        }
    }
    Report {
        config: json!({"criterion": 2, "seed": seed, "signals": 20, "max_side": 65}),
        cases,
        checks: vec![
            Check::at_most("relative Parseval deviation", parseval, 1e-10),
            Check::at_most("inverse round-trip deviation", roundtrip, 1e-10),
            Check::at_most("symbol vs transformed stencil response", symbol_dev, 1e-8),
        ],
        tables: vec![table],
    }
}

fn criterion_reports(id: u8) -> Vec<(String, Report)> {
    let exp = |k: ExperimentKind| (k.name().to_string(), run_kind(&suite_config(k)));
    match id {
        1 => vec![("stencil_identities".into(), stencil_identities())],
        2 => vec![("fourier_machinery".into(), fourier_machinery(SUITE_SEED))],
        3 => vec![exp(ExperimentKind::CltSweep)],
        4 => vec![exp(ExperimentKind::SnInvarianceFit)],
        5 => vec![exp(ExperimentKind::BasicEquivariance), exp(ExperimentKind::DownsampleNonequivariance)],
        6 => vec![exp(ExperimentKind::ChargeRotation)],
        7 => vec![exp(ExperimentKind::LambdaConsistency)],
        8 => vec![exp(ExperimentKind::InvariantPolyFit)],
        _ => unreachable!("criterion ids run 1..=8"),
    }
}

/// Runs one of criteria 1 to 8 on the current thread pool.
pub fn run_criterion(id: u8) -> CriterionOutcome {
    let criterion = CRITERIA[(id - 1) as usize];
    let start = Instant::now();
    let reports = criterion_reports(id);
    let elapsed = start.elapsed();
    let checks_passed = reports.iter().all(|(_, r)| r.passed());
    CriterionOutcome { criterion, reports, elapsed, note: None, checks_passed }
}

/// Byte image of every file a set of reports would write, in order.
pub fn report_bytes(reports: &[(String, Report)]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (dir, r) in reports {
        out.push((format!("{dir}/report.json"), r.to_json()));
        for t in &r.tables {
            out.push((format!("{dir}/{}.csv", t.name), t.to_csv()));
        }
    }
    out
}

/// Runs criteria 1 to 8, then repeats them to check criterion 9.
pub fn run_selftest() -> Vec<CriterionOutcome> {
    let mut outcomes: Vec<CriterionOutcome> = (1..=8).map(run_criterion).collect();
    let start = Instant::now();
    let first: Vec<(String, String)> = outcomes.iter().flat_map(|o| report_bytes(&o.reports)).collect();
    let second: Vec<(String, String)> = (1..=8).flat_map(|id| report_bytes(&criterion_reports(id))).collect();
    let differing: Vec<&str> = first.iter().zip(&second).filter(|(a, b)| a != b).map(|(a, _)| a.0.as_str()).collect();
    let same = first.len() == second.len() && differing.is_empty();
    let note = if same {
        format!("{} files byte-identical across two runs", first.len())
    } else {
        format!("files differ between runs: {}", differing.join(", "))
    };
    outcomes.push(CriterionOutcome { criterion: CRITERIA[8], reports: Vec::new(), elapsed: start.elapsed(), note: Some(note), checks_passed: same });
    outcomes
}
