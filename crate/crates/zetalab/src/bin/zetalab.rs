use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use zetalab::io::{out_dir, OUT_ENV};
use zetalab::run::{execute, parse_complex, Command, MomentSuite, RunConfig};
use zetalab::C64;

#[derive(Parser)]
#[command(name = "zetalab", version, about = "Secular functions of Dirac operators and the Sine_β zeta function")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Sine and Bessel operators: Taylor, ODE and determinant routes against closed forms.
    OracleCheck(Common),
    /// Circular ensemble: secular function, characteristic polynomial and product form.
    CircularIdentity(Common),
    /// Circular ensemble: ratio moments of characteristic polynomials.
    CircularBs(Common),
    /// Limit ratio moments of ζ through the Cauchy-averaged sampler.
    ZetaBs(Common),
    /// Exact moment targets for ℰ and ĥζ.
    Moments(Common),
    /// The Dufresne identity for ℬ₁(0).
    Dufresne(Common),
    /// Principal-value trace of the sampled point process against Cauchy(0, 1/2).
    TraceCauchy(Common),
    /// Eigenvalue samples of the truncated operator and the counting check.
    SampleSineb(Common),
    /// One sampled ζ on a grid of complex points.
    ZetaEval(Common),
}

#[derive(Copy, Clone, ValueEnum)]
enum Suite {
    Finite,
    Limit,
}

#[derive(Args)]
struct Common {
    /// Inverse temperature; repeat or separate by commas to sweep.
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    /// Truncation point ν < 0.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "delta")]
    nu: Option<f64>,
    /// Truncation given as e^(βν/4) ∈ (0, 1).
    #[arg(long)]
    delta: Option<f64>,
    /// SDE step size h.
    #[arg(long)]
    step: Option<f64>,
    /// Replicates (per seed where several seeds are used).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long)]
    seeds: Option<usize>,
    /// Circular ensemble size; repeat or separate by commas to sweep.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Numerator points, e.g. 0, 1j, 0.5-2j.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = complex)]
    z: Vec<C64>,
    /// Denominator points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = complex)]
    w: Vec<C64>,
    /// Eigenvalue window radius r, or the grid half-width for zeta-eval.
    #[arg(long)]
    window: Option<f64>,
    /// Moment targets to check.
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    /// Output directory (default: $ZETALAB_OUT, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

fn complex(s: &str) -> Result<C64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn config(command: Command, a: Common) -> RunConfig {
    RunConfig {
        command,
        beta: a.beta,
        nu: a.nu,
        delta: a.delta,
        step: a.step,
        samples: a.samples,
        seed: a.seed,
        seeds: a.seeds,
        n: a.n,
        z: a.z,
        w: a.w,
        window: a.window,
        suite: a.suite.map(|s| match s {
            Suite::Finite => MomentSuite::Finite,
            Suite::Limit => MomentSuite::Limit,
        }),
        out: out_dir(a.out.as_deref()),
        workers: a.workers,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::OracleCheck(a) => (Command::OracleCheck, a),
        Sub::CircularIdentity(a) => (Command::CircularIdentity, a),
        Sub::CircularBs(a) => (Command::CircularBs, a),
        Sub::ZetaBs(a) => (Command::ZetaBs, a),
        Sub::Moments(a) => (Command::Moments, a),
        Sub::Dufresne(a) => (Command::Dufresne, a),
        Sub::TraceCauchy(a) => (Command::TraceCauchy, a),
        Sub::SampleSineb(a) => (Command::SampleSineb, a),
        Sub::ZetaEval(a) => (Command::ZetaEval, a),
    };
    let cfg = config(command, args);
    match execute(&cfg) {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("zetalab: {e}");
            if matches!(e, zetalab::Error::Io(_)) {
                eprintln!("(output directory: {}, override with --out or ${OUT_ENV})", cfg.out.display());
            }
            ExitCode::from(2)
        }
    }
}
