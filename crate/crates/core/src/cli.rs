//! The `equinet` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{self, ExperimentConfig, ExperimentKind};
use crate::local_ops::{kernel_gap, kernel_gap_csv};

#[derive(Debug, Parser)]
#[command(name = "equinet", version, about = "Experiment runner for invariant and equivariant approximation models")]
struct Cli {
    /// Worker threads for independent cases (0 = all cores). Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; overrides EQUINET_OUT and the config's out_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replaces the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the kernel gap table for the given (a,b) pairs and spacings as CSV.
    CheckKernels {
        /// Derivative orders `a,b`; repeat the flag or separate pairs with `;`.
        #[arg(long, required = true)]
        ab: Vec<String>,
        /// Comma-separated spacings, strictly descending.
        #[arg(long, required = true)]
        lambdas: String,
    },
    /// List experiment kinds.
    ListExperiments,
    /// Run the full acceptance suite.
    Selftest {
        /// Where to write the suite's reports; defaults to EQUINET_OUT or `out/selftest`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit codes: 0 pass, 1 failed verdict, 2 usage or input error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let jobs = cli.jobs;
    let outcome = match cli.command {
        Command::Run { config, out, seed } => run(&config, out.as_deref(), seed, jobs),
        Command::CheckKernels { ab, lambdas } => check_kernels(&ab, &lambdas),
        Command::ListExperiments => {
            for k in ExperimentKind::ALL {
                println!("{:<28} {}", k.name(), k.summary());
            }
            Ok(true)
        }
        Command::Selftest { out } => selftest(out.as_deref(), jobs),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn run(path: &Path, out: Option<&Path>, seed: Option<u64>, jobs: usize) -> Result<bool> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("cannot read config {}: {e}", path.display()))))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let (report, seconds) = harness::run_experiment(&cfg, jobs)?;
    let dir = harness::resolve_out_dir(&cfg, out);
    for p in harness::write_outputs(&report, seconds, &dir)? {
        eprintln!("wrote {}", p.display());
    }
    for c in &report.checks {
        println!("{}: {} ({} {})", if c.pass { "pass" } else { "FAIL" }, c.name, crate::fmt_sig(c.value), c.bound);
    }
    for c in report.cases.iter().filter(|c| c.error.is_some()) {
        println!("error: case {}: {}", c.name, c.error.as_deref().unwrap_or(""));
    }
    println!("verdict: {}", report.verdict());
    eprintln!("wall clock: {seconds:.3}s");
    Ok(report.passed())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::param(format!("{what}: cannot parse {t:?}"))))
        .collect()
}

fn check_kernels(ab: &[String], lambdas: &str) -> Result<bool> {
    let mut pairs = Vec::new();
    for item in ab.iter().flat_map(|s| s.split(';')) {
        let v: Vec<u32> = parse_list(item, "--ab")?;
        let [a, b] = v[..] else {
            return Err(Error::param(format!("--ab: expected a,b, got {item:?}")));
        };
        pairs.push((a, b));
    }
    let lams: Vec<f64> = parse_list(lambdas, "--lambdas")?;
    if lams.iter().any(|l| !(l.is_finite() && *l > 0.0)) || lams.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("--lambdas must be positive and strictly descending"));
    }
    let mut rows = Vec::new();
    let mut decreasing = true;
    for &(a, b) in &pairs {
        let start = rows.len();
        for &lam in &lams {
            rows.push(kernel_gap(a, b, lam)?);
        }
        decreasing &= rows[start..].windows(2).all(|w| w[1].gap < w[0].gap);
    }
    print!("{}", kernel_gap_csv(&rows));
    Ok(decreasing)
}

fn selftest(out: Option<&Path>, jobs: usize) -> Result<bool> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::param(format!("cannot build thread pool: {e}")))?;
    let outcomes = pool.install(harness::run_selftest);
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(harness::OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join("selftest"));
    for o in &outcomes {
        for (name, r) in &o.reports {
            r.write(&dir.join(format!("criterion{}", o.criterion.id)).join(name))?;
        }
        println!("{}", o.line());
        eprintln!("  criterion {} wall clock: {:.3}s", o.criterion.id, o.elapsed.as_secs_f64());
    }
    let all = outcomes.iter().all(|o| o.passed());
    println!("selftest: {}", if all { "pass" } else { "fail" });
    Ok(all)
}
