use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use extremal_core::geometry::{ComplexPoint, SetExpr};
use extremal_core::harness::{self, ExperimentConfig, ExperimentKind, Overrides};

/// Relative extremal functions: grid envelopes, analytic discs, boundary
/// formulas and capacities.
///
/// Settings are resolved as built-in defaults, then the config file, then
/// command-line flags. Exit status is 0 iff the ledger has no failures.
#[derive(Parser)]
#[command(name = "extremal", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Grid envelope for each set.
    Envelope(RunArgs),
    /// Disc optimisation for each set and probe point.
    DiscOpt(RunArgs),
    /// Boundary formulas for arc sets on the unit disc.
    Boundary(RunArgs),
    /// Capacity of each set.
    Capacity(RunArgs),
    /// Verification suite.
    Verify {
        #[arg(long, default_value = "full")]
        suite: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Summary table of the records under a directory.
    Report { dir: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// JSON or TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid_h: Option<f64>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

fn build(kind: ExperimentKind, args: RunArgs, suite: Option<String>) -> extremal_core::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => {
            let mut c = ExperimentConfig::new(kind);
            if kind != ExperimentKind::Verify {
                c.sets = vec![if kind == ExperimentKind::Boundary {
                    SetExpr::arc(0.0, 2.0)
                } else {
                    SetExpr::closed_disc0(0.5)
                }];
                c.probes = vec![ComplexPoint::real(0.7)];
            }
            c
        }
    };
    if cfg.kind != kind {
        return Err(extremal_core::Error::Config {
            path: "kind".into(),
            msg: format!("file is a {:?} experiment, command asks for {kind:?}", cfg.kind),
        });
    }
    cfg.apply(&Overrides {
        seed: args.seed,
        out: args.out,
        grid_h: args.grid_h,
        degree: args.degree,
        restarts: args.restarts,
        samples: args.samples,
        tol: args.tol,
        suite,
    });
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (kind, args, suite) = match cli.cmd {
        Cmd::Report { dir } => {
            return match harness::report(&dir) {
                Ok(s) => {
                    print!("{}", s.to_text());
                    let csv = dir.join("summary.csv");
                    if let Err(e) = std::fs::File::create(&csv).map_err(Into::into).and_then(|f| s.write_csv(f)) {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                    if s.passed() && !s.partial {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            };
        }
        Cmd::Envelope(a) => (ExperimentKind::Envelope, a, None),
        Cmd::DiscOpt(a) => (ExperimentKind::DiscOpt, a, None),
        Cmd::Boundary(a) => (ExperimentKind::Boundary, a, None),
        Cmd::Capacity(a) => (ExperimentKind::Capacity, a, None),
        Cmd::Verify { suite, run } => (ExperimentKind::Verify, run, Some(suite)),
    };
    let record = build(kind, args, suite).and_then(|c| harness::run(&c));
    match record {
        Ok(r) => {
            for e in &r.ledger {
                let v = e.value.map_or(String::new(), |v| format!("  value {v:.6e}"));
                let t = e.target.map_or(String::new(), |t| format!("  target {t:.6e}"));
                println!("{}  {}{v}{t}  {}", if e.pass { "pass" } else { "FAIL" }, e.id, e.detail);
            }
            if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
