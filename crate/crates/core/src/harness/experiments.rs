use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::*;
use super::report::{CaseRecord, Check, Report, Table};
use crate::charge::{self, ChargeConvNetSpec, ChargedStack, MultWeights};
use crate::convnets::{basic_forward_any, downsampled_forward, downsampled_forward_map, BasicConvNetSpec, DownsampledConvNetSpec};
use crate::error::{Error, Result};
use crate::field::{AnalyticField, FieldKind};
use crate::grid::{FieldType, GridSpec, Signal};
use crate::invariant::{
    fit_outer, permutations, rmse, symmetric_net_eval, Activation, GroupAveragedNet, OrthogonalRep, PolyAnsatz, PolyFeatureSet,
    RandomFeatureModel, ShallowNet, SymNetModel, SymNetWeights,
};
use crate::local_ops::{kernel_gap, kernel_norm_bound};
use crate::zpoly::ZPoly;

/// Independent deterministic stream `stream` of the experiment seed.
pub(crate) fn case_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Maps in parallel on the current pool, keeping input order.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

fn record(name: String, r: Result<CaseRecord>) -> CaseRecord {
    r.unwrap_or_else(|e| CaseRecord::failed(name, e))
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn run_kind(cfg: &ExperimentConfig) -> Report {
    let seed = cfg.seed;
    let (cases, checks, tables) = match &cfg.params {
        ExperimentParams::CltSweep(p) => clt_sweep(p),
        ExperimentParams::SnInvarianceFit(p) => sn_fit(p, seed),
        ExperimentParams::BasicEquivariance(p) => basic_equivariance(p, seed),
        ExperimentParams::DownsampleNonequivariance(p) => downsample(p, seed),
        ExperimentParams::ChargeRotation(p) => charge_rotation(p, seed),
        ExperimentParams::LambdaConsistency(p) => lambda_consistency(p, seed),
        ExperimentParams::InvariantPolyFit(p) => invariant_poly_fit(p, seed),
    };
    Report { config: cfg.to_value(), cases, checks, tables }
}

type Outcome = (Vec<CaseRecord>, Vec<Check>, Vec<Table>);

fn clt_sweep(p: &CltSweepParams) -> Outcome {
    let jobs: Vec<(u32, u32, f64)> = p.pairs.iter().flat_map(|&[a, b]| p.lambdas.iter().map(move |&l| (a, b, l))).collect();
    let cases = par_map(&jobs, |_, &(a, b, lam)| {
        let name = format!("a={a},b={b},lambda={}", crate::fmt_sig(lam));
        record(
            name.clone(),
            kernel_gap(a, b, lam).map(|g| {
                CaseRecord::ok(name)
                    .with("gap", g.gap)
                    .with("kernel_l2", g.kernel_l2)
                    .with("mass_error", g.mass_error)
                    .with("grid_half_width", g.grid_half_width as f64)
            }),
        )
    });
    let mut table = Table::new("kernel_gap", &["a", "b", "lambda", "gap", "kernel_l2", "mass_error", "grid_half_width"]);
    let mut checks = Vec::new();
    let nl = p.lambdas.len();
    for (pi, &[a, b]) in p.pairs.iter().enumerate() {
        let rows = &cases[pi * nl..(pi + 1) * nl];
        let gaps: Vec<f64> = rows.iter().map(|c| c.get("gap").unwrap_or(f64::NAN)).collect();
        for (c, &lam) in rows.iter().zip(&p.lambdas) {
            let g = |k: &str| c.get(k).unwrap_or(f64::NAN);
            table.push(vec![a.into(), b.into(), lam.into(), g("gap").into(), g("kernel_l2").into(), g("mass_error").into(), g("grid_half_width").into()]);
        }
        let decreasing = gaps.iter().all(|g| g.is_finite()) && gaps.windows(2).all(|w| w[1] < w[0]);
        checks.push(Check::holds(format!("gap strictly decreasing over lambda, (a,b)=({a},{b})"), decreasing));
        if nl >= 2 {
            checks.push(Check::below(format!("gap ratio last/first lambda, (a,b)=({a},{b})"), gaps[nl - 1] / gaps[0], p.ratio_max));
        }
        checks.push(Check::at_most(
            format!("kernel mass error, (a,b)=({a},{b})"),
            max_of(rows.iter().map(|c| c.get("mass_error").unwrap_or(f64::NAN))),
            p.mass_tol,
        ));
        checks.push(Check::at_most(
            format!("kernel L2 norm vs lambda-independent bound, (a,b)=({a},{b})"),
            max_of(rows.iter().map(|c| c.get("kernel_l2").unwrap_or(f64::NAN))),
            kernel_norm_bound(a, b).sqrt(),
        ));
    }
    (cases, checks, vec![table])
}

fn sn_target(x: &[f64], m: usize) -> f64 {
    x.chunks(m).map(|r| r.iter().map(|v| v * v).sum::<f64>().tanh()).sum()
}

fn uniform_points(rng: &mut ChaCha8Rng, count: usize, len: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

fn permute_rows(x: &[f64], m: usize, perm: &[usize]) -> Vec<f64> {
    perm.iter().flat_map(|&i| x[i * m..(i + 1) * m].iter().copied()).collect()
}

fn sn_fit(p: &SnFitParams, seed: u64) -> Outcome {
    enum Job {
        Exhaustive,
        Random,
        Fit { seed_idx: usize, width: usize },
    }
    let mut jobs = vec![Job::Exhaustive, Job::Random];
    for s in 0..p.seeds {
        for &w in &p.widths {
            jobs.push(Job::Fit { seed_idx: s, width: w });
        }
    }
    let m = p.m;
    let cases = par_map(&jobs, |i, job| match job {
        Job::Exhaustive => {
            let n = p.exhaustive_n;
            let name = format!("exhaustive permutations, N={n}");
            let mut rng = case_rng(seed, 1_000 + i as u64);
            let w = SymNetWeights::random(16, p.t2, m, n, Activation::Tanh, &mut rng);
            let mut w = w;
            w.c = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let perms = permutations(n);
            let run = || -> Result<CaseRecord> {
                let mut dev = 0.0f64;
                let mut mismatches = 0usize;
                for x in uniform_points(&mut rng.clone(), 5, n * m) {
                    let base = symmetric_net_eval(&w, &x, n)?;
                    for perm in &perms {
                        let v = symmetric_net_eval(&w, &permute_rows(&x, m, perm), n)?;
                        if v.to_bits() != base.to_bits() {
                            mismatches += 1;
                        }
                        dev = dev.max((v - base).abs());
                    }
                }
                Ok(CaseRecord::ok(name.clone()).with("max_dev", dev).with("bit_mismatches", mismatches as f64).with("permutations", perms.len() as f64))
            };
            record(name.clone(), run())
        }
        Job::Random => {
            let n = p.random_perm_n;
            let name = format!("random permutations, N={n}");
            let mut rng = case_rng(seed, 2_000 + i as u64);
            let mut w = SymNetWeights::random(16, p.t2, m, n, Activation::Tanh, &mut rng);
            w.c = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut run = || -> Result<CaseRecord> {
                let x = uniform_points(&mut rng, 1, n * m).remove(0);
                let base = symmetric_net_eval(&w, &x, n)?;
                let mut dev = 0.0f64;
                let mut perm: Vec<usize> = (0..n).collect();
                for _ in 0..p.random_perms {
                    perm.shuffle(&mut rng);
                    dev = dev.max((symmetric_net_eval(&w, &permute_rows(&x, m, &perm), n)? - base).abs());
                }
                Ok(CaseRecord::ok(name.clone()).with("max_dev", dev))
            };
            record(name.clone(), run())
        }
        Job::Fit { seed_idx, width } => {
            let name = format!("fit seed={seed_idx} width={width}");
            let n = p.n;
            let run = || -> Result<CaseRecord> {
                // Data depend on the seed index only, so every width sees the same samples.
                let mut data = case_rng(seed, 10_000 + *seed_idx as u64);
                let train = uniform_points(&mut data, p.n_train, n * m);
                let test = uniform_points(&mut data, p.n_test, n * m);
                let ytr: Vec<f64> = train.iter().map(|x| sn_target(x, m)).collect();
                let yte: Vec<f64> = test.iter().map(|x| sn_target(x, m)).collect();
                let mut model_rng = case_rng(seed, 20_000 + (*seed_idx as u64) * 1_000 + *width as u64);
                let mut model = SymNetModel { weights: SymNetWeights::random(*width, p.t2, m, n, Activation::Tanh, &mut model_rng), n };
                let (c, train_rmse) = fit_outer(&mut model, &train, &ytr, p.reg)?;
                let pred: Vec<f64> = test.iter().map(|x| model.predict(x, &c)).collect();
                let mut dev = 0.0f64;
                let mut perm: Vec<usize> = (0..n).collect();
                for x in test.iter().take(20) {
                    let base = symmetric_net_eval(&model.weights, x, n)?;
                    perm.shuffle(&mut model_rng);
                    dev = dev.max((symmetric_net_eval(&model.weights, &permute_rows(x, m, &perm), n)? - base).abs());
                }
                let mean = yte.iter().sum::<f64>() / yte.len() as f64;
                let std = (yte.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / yte.len() as f64).sqrt();
                Ok(CaseRecord::ok(name.clone())
                    .with("train_rmse", train_rmse)
                    .with("test_rmse", rmse(&pred, &yte))
                    .with("target_std", std)
                    .with("invariance_dev", dev))
            };
            record(name.clone(), run())
        }
    });

    let mut checks = vec![
        Check::at_most(
            format!("exhaustive permutation deviation, N={} (bit-exact)", p.exhaustive_n),
            cases[0].get("max_dev").unwrap_or(f64::NAN),
            0.0,
        ),
        Check::at_most(format!("random permutation deviation, N={}", p.random_perm_n), cases[1].get("max_dev").unwrap_or(f64::NAN), p.invariance_tol),
    ];
    let fits = &cases[2..];
    let nw = p.widths.len();
    let mut fit_table = Table::new("sn_fits", &["seed", "width", "train_rmse", "test_rmse", "invariance_dev"]);
    for (k, c) in fits.iter().enumerate() {
        let g = |key: &str| c.get(key).unwrap_or(f64::NAN);
        fit_table.push(vec![(k / nw).into(), p.widths[k % nw].into(), g("train_rmse").into(), g("test_rmse").into(), g("invariance_dev").into()]);
    }
    let mut med_table = Table::new("sn_medians", &["width", "median_test_rmse"]);
    let medians: Vec<f64> = (0..nw)
        .map(|wi| {
            let mut v: Vec<f64> = (0..p.seeds).map(|s| fits[s * nw + wi].get("test_rmse").unwrap_or(f64::NAN)).collect();
            median(&mut v)
        })
        .collect();
    for (w, m) in p.widths.iter().zip(&medians) {
        med_table.push(vec![(*w).into(), (*m).into()]);
    }
    checks.push(Check::at_most("fitted-net permutation deviation", max_of(fits.iter().map(|c| c.get("invariance_dev").unwrap_or(f64::NAN))), p.invariance_tol));
    checks.push(Check::holds(
        "median test RMSE non-increasing over widths",
        medians.iter().all(|m| m.is_finite()) && medians.windows(2).all(|w| w[1] <= w[0]),
    ));
    let mut stds: Vec<f64> = fits.iter().map(|c| c.get("target_std").unwrap_or(f64::NAN)).collect();
    let std = median(&mut stds);
    checks.push(Check::below("final median test RMSE / target std", medians[nw - 1] / std, p.rmse_ratio));
    (cases, checks, vec![fit_table, med_table])
}

fn random_activation(rng: &mut ChaCha8Rng) -> Activation {
    [Activation::Tanh, Activation::Sigmoid, Activation::Softplus][rng.gen_range(0..3)]
}

fn random_signal(rng: &mut ChaCha8Rng, grid: GridSpec, d: usize) -> Signal {
    Signal::from_real_fn(grid, d, |_, _, _| rng.gen_range(-1.0..1.0)).expect("finite values")
}

fn basic_equivariance(p: &BasicEquivarianceParams, seed: u64) -> Outcome {
    let idx: Vec<usize> = (0..p.triples).collect();
    let cases = par_map(&idx, |_, &t| {
        let name = format!("triple {t}");
        let mut rng = case_rng(seed, t as u64);
        let mut run = || -> Result<CaseRecord> {
            let lam = [1.0, 0.5][rng.gen_range(0..2)];
            let cutoff = lam * rng.gen_range(0..3) as f64;
            let l_rf = rng.gen_range(1..=2);
            let depth = rng.gen_range(2..=3);
            let dims: Vec<usize> = (0..=depth).map(|_| rng.gen_range(1..=3)).collect();
            let act = random_activation(&mut rng);
            let spec = BasicConvNetSpec::random(lam, cutoff, l_rf, dims.clone(), act, &mut rng)?;
            let reach = (depth - 1) * l_rf;
            let hw = spec.input_half_width() + p.max_shift as usize + 2;
            let x = random_signal(&mut rng, GridSpec::new(lam, hw)?, dims[0]);
            let k = [rng.gen_range(-p.max_shift..=p.max_shift), rng.gen_range(-p.max_shift..=p.max_shift)];
            let y = basic_forward_any(&spec, &x)?;
            let ys = basic_forward_any(&spec, &x.translate(k))?;
            debug_assert_eq!(y.grid().half_width(), hw - reach);
            let mut dev = 0.0f64;
            let mut overlap = 0usize;
            for (gx, gy) in y.grid().nodes() {
                if y.grid().contains(gx - k[0], gy - k[1]) {
                    overlap += 1;
                    for c in 0..y.channels() {
                        dev = dev.max((ys.get(gx, gy, c) - y.get(gx - k[0], gy - k[1], c)).norm());
                    }
                }
            }
            Ok(CaseRecord::ok(name.clone())
                .with("lambda", lam)
                .with("l_rf", l_rf as f64)
                .with("depth", depth as f64)
                .with("shift_x", k[0] as f64)
                .with("shift_y", k[1] as f64)
                .with("overlap_nodes", overlap as f64)
                .with("max_dev", dev))
        };
        record(name.clone(), run())
    });
    let mut table = Table::new("basic_equivariance", &["triple", "lambda", "l_rf", "depth", "shift_x", "shift_y", "overlap_nodes", "max_dev"]);
    for (t, c) in cases.iter().enumerate() {
        let g = |k: &str| c.get(k).unwrap_or(f64::NAN);
        table.push(vec![
            t.into(),
            g("lambda").into(),
            (g("l_rf") as i64).into(),
            (g("depth") as i64).into(),
            (g("shift_x") as i64).into(),
            (g("shift_y") as i64).into(),
            (g("overlap_nodes") as i64).into(),
            g("max_dev").into(),
        ]);
    }
    let checks = vec![
        Check::at_most("max shift-equivariance deviation on overlap windows", max_of(cases.iter().map(|c| c.get("max_dev").unwrap_or(f64::NAN))), p.tol),
        Check::holds("every triple has a nonempty overlap", cases.iter().all(|c| c.get("overlap_nodes").is_some_and(|v| v > 0.0))),
    ];
    (cases, checks, vec![table])
}

fn downsample(p: &DownsampleParams, seed: u64) -> Outcome {
    let idx: Vec<usize> = (0..=p.trials).collect();
    let cases = par_map(&idx, |_, &t| {
        if t == p.trials {
            let name = format!("stride {} with l_rf {} is rejected", p.rejected_stride, p.l_rf);
            let rejected = DownsampledConvNetSpec::zeros(1.0, p.l_rf, p.rejected_stride, vec![1; p.depth + 1]).is_err();
            return CaseRecord::ok(name).with("rejected", if rejected { 1.0 } else { 0.0 });
        }
        let name = format!("trial {t}");
        let mut rng = case_rng(seed, t as u64);
        let mut run = || -> Result<CaseRecord> {
            let mut dims = vec![3; p.depth + 1];
            dims[0] = 1;
            dims[p.depth] = 1;
            let spec = DownsampledConvNetSpec::random(1.0, p.l_rf, p.stride, dims, Activation::Tanh, &mut rng)?;
            let l1 = spec.range_schedule()[0];
            let coarse = (p.stride as i64).pow(p.depth as u32 - 1);
            let hw = l1 + 4 * coarse as usize;
            let x = random_signal(&mut rng, GridSpec::new(1.0, hw)?, 1);
            let base = downsampled_forward_map(&spec, &x)?;
            let single = downsampled_forward(&spec, &x.restrict(l1)?)?[0];
            // Coarse node γ reads input nodes within l1 of coarse·γ.
            let valid = |gx: i64, gy: i64, extra: i64| (coarse * gx).abs().max((coarse * gy).abs()) + l1 as i64 + extra <= hw as i64;
            let compare = |shifted: &Signal| -> f64 {
                let mut dev = 0.0f64;
                for (gx, gy) in shifted.grid().nodes() {
                    if valid(gx, gy, 1) && valid(gx - 1, gy, 1) && base.grid().contains(gx - 1, gy) {
                        dev = dev.max((shifted.get(gx, gy, 0) - base.get(gx - 1, gy, 0)).norm());
                    }
                }
                dev
            };
            let fine = compare(&downsampled_forward_map(&spec, &x.translate([1, 0]))?);
            let control = compare(&downsampled_forward_map(&spec, &x.translate([coarse, 0]))?);
            Ok(CaseRecord::ok(name.clone())
                .with("fine_shift_violation", fine)
                .with("coarse_shift_control_dev", control)
                .with("single_node_dev", (single - base.get(0, 0, 0).re).abs()))
        };
        record(name.clone(), run())
    });
    let trials = &cases[..p.trials];
    let g = |c: &CaseRecord, k: &str| c.get(k).unwrap_or(f64::NAN);
    let mut table = Table::new("downsample", &["trial", "fine_shift_violation", "coarse_shift_control_dev", "single_node_dev"]);
    for (t, c) in trials.iter().enumerate() {
        table.push(vec![t.into(), g(c, "fine_shift_violation").into(), g(c, "coarse_shift_control_dev").into(), g(c, "single_node_dev").into()]);
    }
    let checks = vec![
        Check::above(
            "largest violation under a one-cell shift",
            trials.iter().map(|c| g(c, "fine_shift_violation")).fold(f64::NEG_INFINITY, f64::max),
            p.violation_min,
        ),
        Check::at_most(
            format!("deviation under a shift by stride^(T-1) = {} cells", p.stride.pow(p.depth as u32 - 1)),
            max_of(trials.iter().map(|c| g(c, "coarse_shift_control_dev"))),
            p.control_tol,
        ),
        Check::at_most("map vs single-node forward", max_of(trials.iter().map(|c| g(c, "single_node_dev"))), 0.0),
        Check::holds(format!("stride {} rejected for l_rf {}", p.rejected_stride, p.l_rf), g(&cases[p.trials], "rejected") == 1.0),
    ];
    (cases, checks, vec![table])
}

fn random_mult_stack(rng: &mut ChaCha8Rng, t: u32, d: usize, grid: GridSpec) -> ChargedStack {
    let ti = t as i32;
    let entries = (-ti..=ti)
        .map(|mu| {
            let s = Signal::from_fn(grid, d, FieldType::Complex, |_, _, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .expect("finite values");
            (mu, s)
        })
        .collect();
    ChargedStack::mult(t, entries).expect("consistent stack")
}

fn charge_rotation(p: &ChargeRotationParams, seed: u64) -> Outcome {
    #[derive(Clone, Copy)]
    enum Job {
        Phase(usize),
        Origin(usize),
        Covariance(usize),
        Violation,
    }
    let mut jobs: Vec<Job> = (0..p.phase_trials).map(Job::Phase).collect();
    jobs.extend((0..p.origin_specs).map(Job::Origin));
    jobs.extend((0..p.covariance_trials).map(Job::Covariance));
    jobs.push(Job::Violation);
    let lam = p.lambda;
    let quarter = |q: i64| q as f64 * PI / 2.0;
    let cases = par_map(&jobs, |i, job| {
        let mut rng = case_rng(seed, i as u64);
        match *job {
            Job::Phase(k) => {
                let name = format!("phase trial {k}");
                let mut run = || -> Result<CaseRecord> {
                    let t = rng.gen_range(1..=3);
                    let din = rng.gen_range(1..=3);
                    let dout = rng.gen_range(1..=3);
                    let w = MultWeights::random(t, din, dout, false, &mut rng)?;
                    let st = random_mult_stack(&mut rng, t, din, GridSpec::new(lam, 2)?);
                    let phi = rng.gen_range(0.0..2.0 * PI);
                    let dev = charge::phase_equivariance_check(&w, &st, phi)?;
                    Ok(CaseRecord::ok(name.clone()).with("t_diff", t as f64).with("phi", phi).with("max_dev", dev))
                };
                record(name.clone(), run())
            }
            Job::Origin(k) => {
                let name = format!("origin spec {k}");
                let mut run = || -> Result<CaseRecord> {
                    let t_diff = rng.gen_range(1..=2);
                    let t_mult = rng.gen_range(1..=3);
                    let d_mult = rng.gen_range(1..=4);
                    let d_in = rng.gen_range(1..=2);
                    let d_out = rng.gen_range(1..=2);
                    let cutoff = lam * rng.gen_range(0..=2) as f64;
                    let spec = ChargeConvNetSpec::random(lam, cutoff, t_diff, t_mult, d_mult, d_in, d_out, &mut rng)?;
                    let x = random_signal(&mut rng, GridSpec::new(lam, spec.input_half_width())?, d_in);
                    let y = charge::forward_signal(&spec, &x)?;
                    let mut rec = CaseRecord::ok(name.clone());
                    let (mut center, mut full) = (0.0f64, 0.0f64);
                    for &q in &p.quarter_turns {
                        let yr = charge::forward_signal(&spec, &x.rotate_quarter(q))?;
                        let c = (0..d_out).map(|ch| (yr.get(0, 0, ch) - y.get(0, 0, ch)).norm()).fold(0.0, f64::max);
                        let f = yr.max_abs_diff(&y.rotate_quarter(q))?;
                        rec = rec.with(&format!("center_dev_q{q}"), c).with(&format!("full_dev_q{q}"), f);
                        center = center.max(c);
                        full = full.max(f);
                    }
                    Ok(rec.with("center_dev", center).with("full_dev", full))
                };
                record(name.clone(), run())
            }
            Job::Covariance(k) => {
                let name = format!("diff covariance trial {k}");
                let mut run = || -> Result<CaseRecord> {
                    let t = rng.gen_range(1..=3);
                    let d = rng.gen_range(1..=2);
                    let x = random_signal(&mut rng, GridSpec::new(lam, t as usize + 4)?, d);
                    let st = charge::diff_stage(&x, t)?;
                    let mut rec = CaseRecord::ok(name.clone()).with("t_diff", t as f64);
                    let mut dev = 0.0f64;
                    for &q in &p.quarter_turns {
                        let lhs = charge::diff_stage(&x.rotate_quarter(q), t)?;
                        let rhs = st.rotate_quarter(q).phase_rotate(quarter(q));
                        let e = lhs.max_abs_diff(&rhs)?;
                        rec = rec.with(&format!("dev_q{q}"), e);
                        dev = dev.max(e);
                    }
                    Ok(rec.with("max_dev", dev))
                };
                record(name.clone(), run())
            }
            Job::Violation => {
                let name = "charge-rule violations rejected".to_string();
                let one = Complex64::new(1.0, 0.0);
                let mut w = MultWeights::zeros(2, 2, 2, false).expect("valid dims");
                let bad_sum = matches!(w.add_w2(1, 1, 1, 0, 0, 0, one), Err(Error::ChargeViolation(_)));
                let bad_range = matches!(w.add_w2(3, 2, 1, 0, 0, 0, one), Err(Error::ChargeViolation(_)));
                let mut fw = MultWeights::zeros(2, 2, 1, true).expect("valid dims");
                let bad_final = matches!(fw.add_w2(2, 1, 1, 0, 0, 0, one), Err(Error::ChargeViolation(_)));
                let json = r#"{"lambda":1,"Lambda":0,"T_diff":1,"T_mult":1,"d_mult":1,"layers":[{"w2":[[1,1,0,0,0,1.0,0.0]]}]}"#;
                let bad_json = matches!(ChargeConvNetSpec::from_json(json), Err(Error::ChargeViolation(_)));
                let all = bad_sum && bad_range && bad_final && bad_json;
                CaseRecord::ok(name)
                    .with("mu_sum_rejected", bad_sum as u8 as f64)
                    .with("out_of_range_rejected", bad_range as u8 as f64)
                    .with("final_nonzero_charge_rejected", bad_final as u8 as f64)
                    .with("json_violation_rejected", bad_json as u8 as f64)
                    .with("all_rejected", all as u8 as f64)
            }
        }
    });
    let g = |c: &CaseRecord, k: &str| c.get(k).unwrap_or(f64::NAN);
    let (np, no, nc) = (p.phase_trials, p.origin_specs, p.covariance_trials);
    let phase = &cases[..np];
    let origin = &cases[np..np + no];
    let cov = &cases[np + no..np + no + nc];
    let viol = &cases[np + no + nc];
    let mut t_phase = Table::new("phase_equivariance", &["trial", "t_diff", "phi", "max_dev"]);
    for (k, c) in phase.iter().enumerate() {
        t_phase.push(vec![k.into(), (g(c, "t_diff") as i64).into(), g(c, "phi").into(), g(c, "max_dev").into()]);
    }
    let mut t_origin = Table::new("origin_rotation", &["spec", "q", "center_dev", "full_dev"]);
    for (k, c) in origin.iter().enumerate() {
        for &q in &p.quarter_turns {
            t_origin.push(vec![k.into(), q.into(), g(c, &format!("center_dev_q{q}")).into(), g(c, &format!("full_dev_q{q}")).into()]);
        }
    }
    let mut t_cov = Table::new("diff_covariance", &["trial", "t_diff", "q", "max_dev"]);
    for (k, c) in cov.iter().enumerate() {
        for &q in &p.quarter_turns {
            t_cov.push(vec![k.into(), (g(c, "t_diff") as i64).into(), q.into(), g(c, &format!("dev_q{q}")).into()]);
        }
    }
    let checks = vec![
        Check::at_most("mult-layer phase equivariance", max_of(phase.iter().map(|c| g(c, "max_dev"))), p.tol),
        Check::at_most("center output under quarter turns", max_of(origin.iter().map(|c| g(c, "center_dev"))), p.tol),
        Check::at_most("whole output under quarter turns", max_of(origin.iter().map(|c| g(c, "full_dev"))), p.tol),
        Check::at_most("diff-stage per-charge covariance under quarter turns", max_of(cov.iter().map(|c| g(c, "max_dev"))), p.tol),
        Check::holds("charge-rule violations rejected at construction", g(viol, "all_rejected") == 1.0),
    ];
    (cases, checks, vec![t_phase, t_origin, t_cov])
}

/// A real-valued Gaussian-times-polynomial test field with angular content.
pub(crate) fn consistency_field() -> AnalyticField {
    let c = Complex64::new;
    let poly = ZPoly::from_terms([
        (0, 0, c(1.0, 0.0)),
        (1, 0, c(0.3, 0.2)),
        (0, 1, c(0.3, -0.2)),
        (2, 0, c(0.1, -0.15)),
        (0, 2, c(0.1, 0.15)),
        (1, 1, c(0.2, 0.0)),
    ]);
    AnalyticField::single(FieldKind::GaussianPoly { poly, center: [0.25, -0.15], width: 1.2 }).expect("valid field")
}

fn lambda_consistency(p: &LambdaConsistencyParams, seed: u64) -> Outcome {
    let cutoff = p.points.iter().flat_map(|q| q.iter().map(|v| v.abs())).fold(0.0, f64::max);
    let mut rng = case_rng(seed, 0);
    let base = match ChargeConvNetSpec::random(p.lambdas[0], cutoff, p.t_diff, p.t_mult, p.d_mult, 1, 1, &mut rng) {
        Ok(s) => s,
        Err(e) => return (vec![CaseRecord::failed("spec", e)], vec![], vec![]),
    };
    let f = consistency_field();
    let f_rot = f.rotated(p.angle);
    // Job 0 is the continuum limit; job k ≥ 1 is lambdas[k-1].
    let jobs: Vec<usize> = (0..=p.lambdas.len()).collect();
    let cases = par_map(&jobs, |_, &j| {
        if j == 0 {
            let name = "continuum limit".to_string();
            let run = || -> Result<CaseRecord> {
                let v = charge::scaling_limit_eval(&base, &f, &p.points)?;
                let mut rec = CaseRecord::ok(name.clone());
                for (k, row) in v.iter().enumerate() {
                    rec = rec.with(&format!("value_p{k}"), row[0]);
                }
                Ok(rec)
            };
            return record(name.clone(), run());
        }
        let lam = p.lambdas[j - 1];
        let name = format!("lambda={}", crate::fmt_sig(lam));
        let run = || -> Result<CaseRecord> {
            let mut spec = base.clone();
            spec.lambda = lam;
            let y = charge::forward(&spec, &f)?;
            let yr = charge::forward(&spec, &f_rot)?;
            let mut rec = CaseRecord::ok(name.clone())
                .with("lambda", lam)
                .with("center", y.get(0, 0, 0).re)
                .with("center_rotated", yr.get(0, 0, 0).re)
                .with("rotation_dev", (y.get(0, 0, 0) - yr.get(0, 0, 0)).norm());
            for (k, pt) in p.points.iter().enumerate() {
                let (kx, ky) = ((pt[0] / lam).round() as i64, (pt[1] / lam).round() as i64);
                rec = rec.with(&format!("value_p{k}"), y.get(kx, ky, 0).re);
            }
            Ok(rec)
        };
        record(name.clone(), run())
    });
    let g = |c: &CaseRecord, k: &str| c.get(k).unwrap_or(f64::NAN);
    let limit = &cases[0];
    let sweeps = &cases[1..];
    let mut t_pts = Table::new("limit_consistency", &["lambda", "point", "x", "y", "forward", "limit", "abs_dev"]);
    let mut checks = Vec::new();
    for (k, pt) in p.points.iter().enumerate() {
        let key = format!("value_p{k}");
        let lim = g(limit, &key);
        let devs: Vec<f64> = sweeps.iter().map(|c| (g(c, &key) - lim).abs()).collect();
        for (c, (&lam, d)) in sweeps.iter().zip(p.lambdas.iter().zip(&devs)) {
            t_pts.push(vec![lam.into(), k.into(), pt[0].into(), pt[1].into(), g(c, &key).into(), lim.into(), (*d).into()]);
        }
        checks.push(Check::holds(
            format!("|forward - limit| strictly decreasing at point ({}, {})", crate::fmt_sig(pt[0]), crate::fmt_sig(pt[1])),
            devs.iter().all(|d| d.is_finite()) && devs.windows(2).all(|w| w[1] < w[0]),
        ));
    }
    let mut t_rot = Table::new("rotation_consistency", &["lambda", "center", "center_rotated", "rotation_dev"]);
    for (c, &lam) in sweeps.iter().zip(&p.lambdas) {
        t_rot.push(vec![lam.into(), g(c, "center").into(), g(c, "center_rotated").into(), g(c, "rotation_dev").into()]);
    }
    let n = sweeps.len();
    let factor = g(&sweeps[n - 2], "rotation_dev") / g(&sweeps[n - 1], "rotation_dev");
    checks.push(Check::at_least(
        format!(
            "rotation discrepancy shrink factor, lambda {} -> {}",
            crate::fmt_sig(p.lambdas[n - 2]),
            crate::fmt_sig(p.lambdas[n - 1])
        ),
        factor,
        p.min_factor,
    ));
    (cases, checks, vec![t_pts, t_rot])
}

fn z2_target(x: &[f64]) -> f64 {
    (-3.0 * (x[0] * x[0] + x[1] * x[1])).exp() + 0.3 * x[0] * x[1]
}

fn invariant_poly_fit(p: &InvariantPolyFitParams, seed: u64) -> Outcome {
    let mut data = case_rng(seed, 0);
    let train = uniform_points(&mut data, p.n_train, 2);
    let test = uniform_points(&mut data, p.n_test, 2);
    let ytr: Vec<f64> = train.iter().map(|x| z2_target(x)).collect();
    let yte: Vec<f64> = test.iter().map(|x| z2_target(x)).collect();
    let side = p.grid_side;
    let grid: Vec<[f64; 2]> = (0..side)
        .flat_map(|i| (0..side).map(move |j| [-1.0 + 2.0 * i as f64 / (side - 1) as f64, -1.0 + 2.0 * j as f64 / (side - 1) as f64]))
        .collect();
    let argmax = |f: &dyn Fn(&[f64]) -> f64| -> [f64; 2] {
        let mut best = (f64::NEG_INFINITY, grid[0]);
        for pt in &grid {
            let v = f(pt);
            if v > best.0 {
                best = (v, *pt);
            }
        }
        best.1
    };
    let target_arg = argmax(&|x| z2_target(x));
    let models = ["poly_ansatz", "group_averaged"];
    let cases = par_map(&models, |i, &name| {
        let mut rng = case_rng(seed, 1 + i as u64);
        let mut run = || -> Result<CaseRecord> {
            let mut model: Box<dyn RandomFeatureModel> = if i == 0 {
                Box::new(PolyAnsatz::random(PolyFeatureSet::z2_sign_plane().with_unit_equivariant(), p.width, Activation::Tanh, &mut rng))
            } else {
                Box::new(GroupAveragedNet { rep: OrthogonalRep::z2_sign(2), net: ShallowNet::random(2, 1, p.width, Activation::Tanh, &mut rng) })
            };
            let (c, train_rmse) = fit_outer(model.as_mut(), &train, &ytr, p.reg)?;
            let pred: Vec<f64> = test.iter().map(|x| model.predict(x, &c)).collect();
            let inv = max_of(test.iter().map(|x| (model.predict(x, &c) - model.predict(&[-x[0], -x[1]], &c)).abs()));
            let am = argmax(&|x| model.predict(x, &c));
            Ok(CaseRecord::ok(name)
                .with("train_rmse", train_rmse)
                .with("test_rmse", rmse(&pred, &yte))
                .with("sign_flip_dev", inv)
                .with("argmax_x", am[0])
                .with("argmax_y", am[1]))
        };
        record(name.to_string(), run())
    });
    let g = |c: &CaseRecord, k: &str| c.get(k).unwrap_or(f64::NAN);
    let mut table = Table::new("invariant_fit", &["model", "train_rmse", "test_rmse", "sign_flip_dev", "argmax_x", "argmax_y"]);
    for c in &cases {
        table.push(vec![
            c.name.as_str().into(),
            g(c, "train_rmse").into(),
            g(c, "test_rmse").into(),
            g(c, "sign_flip_dev").into(),
            g(c, "argmax_x").into(),
            g(c, "argmax_y").into(),
        ]);
    }
    let same_arg = g(&cases[0], "argmax_x") == g(&cases[1], "argmax_x") && g(&cases[0], "argmax_y") == g(&cases[1], "argmax_y");
    let checks = vec![
        Check::below("poly-invariant ansatz test RMSE", g(&cases[0], "test_rmse"), p.rmse_tol),
        Check::below("group-averaged net test RMSE", g(&cases[1], "test_rmse"), p.rmse_tol),
        Check::holds("argmax over the test grid coincides", same_arg),
        Check::holds(
            "argmax matches the target's",
            g(&cases[0], "argmax_x") == target_arg[0] && g(&cases[0], "argmax_y") == target_arg[1],
        ),
        Check::at_most("sign-flip invariance of both fits", max_of(cases.iter().map(|c| g(c, "sign_flip_dev"))), 1e-12),
    ];
    (cases, checks, vec![table])
}
