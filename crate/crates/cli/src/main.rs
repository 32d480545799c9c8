#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use crlab::config::RunConfig;
use crlab::fiber::{sum_bound, write_grid_csv, GridKind};
use crlab::map_factory::{build_immersion, map_summary};
use crlab::quadric::{sample_level, write_points_csv, LevelSpec};
use crlab::report::{Status, VerificationReport};
use crlab::suites::{run_suite, sweep, sweep_passed, write_sweep_csv, Suite, SweepSpec};

/// Levels this close below `sqrt 2` are read as `sqrt 2` itself, so that a
/// rounded decimal on the command line still names the first collision level.
const SQRT2_SNAP: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "crlab",
    version,
    about = "Numerical verification of CR immersions of level sets of Q^3"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build P_n and print a_n and t_n.
    Build {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a verification suite; exit status is nonzero iff a check fails.
    Verify(VerifyArgs),
    /// Criterion margins and level gaps across a range of levels.
    Sweep(SweepArgs),
    /// Export phi or the domain D on a grid over its bounding box.
    Grid {
        #[arg(long, value_enum, default_value = "phi")]
        what: What,
        #[arg(long, default_value_t = 501, value_parser = clap::value_parser!(u64).range(101..))]
        resolution: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample points of a level set M_t.
    Sample {
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, env = "CRLAB_SEED", default_value_t = RunConfig::default().seed)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Phi,
    #[value(name = "D", alias = "d")]
    D,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Construction,
    Nondegeneracy,
    Fibers,
    Phi,
    Witnesses,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Construction => Suite::Construction,
            SuiteArg::Nondegeneracy => Suite::Nondegeneracy,
            SuiteArg::Fibers => Suite::Fibers,
            SuiteArg::Phi => Suite::Phi,
            SuiteArg::Witnesses => Suite::Witnesses,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, env = "CRLAB_SEED")]
    seed: Option<u64>,
    /// Largest order for the construction checks.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    n_max: Option<u32>,
    /// Largest order for the sampled nondegeneracy checks.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    n: Option<u32>,
    /// Levels for the witness (t >= sqrt 2) and injectivity (t < sqrt 2) checks.
    #[arg(long, num_args = 1..)]
    t: Vec<f64>,
    /// Samples per level for the nondegeneracy checks.
    #[arg(long)]
    samples: Option<usize>,
    /// Samples per level for the fiber checks.
    #[arg(long)]
    fiber_samples: Option<usize>,
    /// Grid points per axis for the phi minimization.
    #[arg(long, value_parser = clap::value_parser!(u64).range(101..))]
    resolution: Option<u64>,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct TolArgs {
    #[arg(long)]
    tol_construction: Option<f64>,
    #[arg(long)]
    tol_arg_condition: Option<f64>,
    #[arg(long)]
    tol_witness_criterion: Option<f64>,
    #[arg(long)]
    tol_margin_factor: Option<f64>,
    #[arg(long)]
    tol_fiber_roots: Option<f64>,
    #[arg(long)]
    tol_fiber_value: Option<f64>,
    #[arg(long)]
    tol_phi_min: Option<f64>,
    #[arg(long)]
    tol_phi_argmin: Option<f64>,
    #[arg(long)]
    tol_restriction: Option<f64>,
    #[arg(long)]
    tol_level_gap: Option<f64>,
    #[arg(long)]
    tol_root_cluster: Option<f64>,
    #[arg(long)]
    tol_provenance: Option<f64>,
    #[arg(long)]
    tol_quadric: Option<f64>,
}

impl TolArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let pairs = [
            ("construction", self.tol_construction),
            ("arg_condition", self.tol_arg_condition),
            ("witness_criterion", self.tol_witness_criterion),
            ("margin_factor", self.tol_margin_factor),
            ("fiber_roots", self.tol_fiber_roots),
            ("fiber_value", self.tol_fiber_value),
            ("phi_min", self.tol_phi_min),
            ("phi_argmin", self.tol_phi_argmin),
            ("restriction", self.tol_restriction),
            ("level_gap", self.tol_level_gap),
            ("root_cluster", self.tol_root_cluster),
            ("provenance", self.tol_provenance),
            ("quadric", self.tol_quadric),
        ];
        for (name, value) in pairs {
            if let Some(v) = value {
                let known = cfg.tolerances.set(name, v);
                debug_assert!(known);
            }
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    #[arg(long)]
    t_min: f64,
    #[arg(long)]
    t_max: f64,
    #[arg(long, default_value_t = 15)]
    steps: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, env = "CRLAB_SEED", default_value_t = RunConfig::default().seed)]
    seed: u64,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: &Option<PathBuf>, value: &serde_json::Value) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_report_csv(rep: &VerificationReport, w: &mut dyn Write) -> Result<()> {
    writeln!(w, "id,status,observed,threshold,margin")?;
    let num = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in &rep.records {
        let status = match r.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        };
        writeln!(
            w,
            "{},{status},{},{},{}",
            r.id,
            num(r.observed),
            num(r.threshold),
            num(r.margin)
        )?;
    }
    Ok(())
}

fn cmd_build(n: u32, out: &OutArgs) -> Result<bool> {
    let m = build_immersion(n).with_context(|| format!("building P_{n}"))?;
    println!("n={n} a={} t={} K={}", m.a, m.t_threshold, m.k);
    if out.format == Format::Csv {
        bail!("build writes JSON only");
    }
    if out.out.is_some() {
        let mut summary = map_summary(&m);
        summary["p"] = serde_json::from_str(&m.p.to_json())?;
        write_json(&out.out, &summary)?;
    }
    Ok(true)
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let mut cfg = RunConfig::default();
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.n_max {
        cfg.n_max = n;
    }
    if let Some(n) = args.n {
        cfg.nondegeneracy_n_max = n;
    }
    if let Some(s) = args.samples {
        cfg.samples = s;
    }
    if let Some(s) = args.fiber_samples {
        cfg.fiber_samples = s;
    }
    if let Some(r) = args.resolution {
        cfg.grid_resolution = r as usize;
    }
    if !args.t.is_empty() {
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut witness = Vec::new();
        let mut injectivity = Vec::new();
        for &t in &args.t {
            if !(t > 1.0) {
                bail!("levels must exceed 1, got {t}");
            }
            if (t - sqrt2).abs() < SQRT2_SNAP {
                witness.push(sqrt2);
            } else if t >= sqrt2 {
                witness.push(t);
            } else {
                if t >= sum_bound() {
                    eprintln!("note: t = {t} >= sqrt(5)/2, level gaps are reported but not asserted");
                }
                injectivity.push(t);
            }
        }
        if !witness.is_empty() {
            cfg.witness_levels = witness;
        }
        if !injectivity.is_empty() {
            cfg.injectivity_levels = injectivity;
        }
    }
    args.tol.apply(&mut cfg);

    let rep = run_suite(args.suite.into(), &cfg);
    for r in &rep.records {
        let tag = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        eprintln!("[{tag}] {}", r.id);
    }
    eprintln!(
        "{} records, {} failed, {:.0} ms",
        rep.records.len(),
        rep.failures().count(),
        rep.wall_time_ms
    );
    match args.out.format {
        Format::Json => write_json(&args.out.out, &serde_json::to_value(&rep)?)?,
        Format::Csv => {
            let mut w = sink(&args.out.out)?;
            write_report_csv(&rep, &mut w)?;
            w.flush()?;
        }
    }
    Ok(rep.passed())
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    if !(1.0 < args.t_min && args.t_min < args.t_max) {
        bail!("need 1 < t-min < t-max");
    }
    if args.steps == 0 {
        bail!("steps must be positive");
    }
    let mut cfg = RunConfig::default();
    args.tol.apply(&mut cfg);
    let spec = SweepSpec {
        n: args.n,
        t_min: args.t_min,
        t_max: args.t_max,
        steps: args.steps,
        samples: args.samples,
        seed: args.seed,
    };
    let rows = sweep(&spec, &cfg.tolerances)?;
    match args.format {
        Format::Csv => write_sweep_csv(&rows, args.n == 1, sink(&args.out)?)?,
        Format::Json => write_json(
            &args.out,
            &serde_json::json!({ "schema": crlab::report::SCHEMA, "sweep": spec, "rows": rows }),
        )?,
    }
    Ok(sweep_passed(&rows))
}

fn cmd_grid(what: What, resolution: u64, out: &Option<PathBuf>) -> Result<bool> {
    let kind = match what {
        What::Phi => GridKind::Phi,
        What::D => GridKind::Domain,
    };
    write_grid_csv(kind, resolution as usize, sink(out)?)?;
    Ok(true)
}

fn cmd_sample(t: f64, samples: usize, seed: u64, out: &OutArgs) -> Result<bool> {
    let level = LevelSpec::new(t)?;
    let pts = sample_level(&level, samples, seed);
    match out.format {
        Format::Csv => write_points_csv(&pts, sink(&out.out)?)?,
        Format::Json => write_json(&out.out, &serde_json::to_value(&pts)?)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build { n, out } => cmd_build(*n, out),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Grid {
            what,
            resolution,
            out,
        } => cmd_grid(*what, *resolution, out),
        Command::Sample {
            t,
            samples,
            seed,
            out,
        } => cmd_sample(*t, *samples, *seed, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
