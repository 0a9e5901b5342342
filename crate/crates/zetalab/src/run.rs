//! Reproducible experiment runs behind the command-line tool.
//!
//! A [`RunConfig`] names a subcommand and its parameters. Unset parameters
//! are filled from the subcommand's defaults by [`RunConfig::resolved`], and
//! the resolved configuration is stamped as the JSON header of every CSV the
//! run writes, so a file always records exactly what produced it.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::circular;
use crate::dirac::sine_spec;
use crate::error::{Error, Result};
use crate::experiments::{self, McSettings, Outcome};
use crate::io::{self, ResultRow, ZetaEvalRow, ZetaGridRow};
use crate::moments::mc_collect;
use crate::oracles::SineOracle;
use crate::sde::{self, make_driver};
use crate::secular::{taylor_coeffs, zeta_ode, zeta_taylor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    OracleCheck,
    CircularIdentity,
    CircularBs,
    ZetaBs,
    Moments,
    Dufresne,
    TraceCauchy,
    SampleSineb,
    ZetaEval,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::OracleCheck => "oracle-check",
            Command::CircularIdentity => "circular-identity",
            Command::CircularBs => "circular-bs",
            Command::ZetaBs => "zeta-bs",
            Command::Moments => "moments",
            Command::Dufresne => "dufresne",
            Command::TraceCauchy => "trace-cauchy",
            Command::SampleSineb => "sample-sineb",
            Command::ZetaEval => "zeta-eval",
        }
    }
}

/// Which exact targets `moments` checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentSuite {
    /// Closed forms at the given truncation.
    Finite,
    /// Limit formulas at deep truncation.
    Limit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    /// Inverse temperatures; several for the subcommands that sweep β.
    pub beta: Vec<f64>,
    /// Truncation point ν. When absent, `delta` = e^{βν/4} fixes it per β.
    pub nu: Option<f64>,
    pub delta: Option<f64>,
    pub step: Option<f64>,
    pub samples: Option<usize>,
    pub seed: u64,
    /// Number of independent seeds (seed, seed + 1, …) where a check uses several.
    pub seeds: Option<usize>,
    /// Matrix size for the circular ensemble.
    pub n: Vec<usize>,
    pub z: Vec<C64>,
    pub w: Vec<C64>,
    /// Eigenvalue window [−r, r].
    pub window: Option<f64>,
    pub suite: Option<MomentSuite>,
    pub out: PathBuf,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            beta: Vec::new(),
            nu: None,
            delta: None,
            step: None,
            samples: None,
            seed: 0,
            seeds: None,
            n: Vec::new(),
            z: Vec::new(),
            w: Vec::new(),
            window: None,
            suite: None,
            out: io::out_dir(None),
            workers: None,
        }
    }

    /// The configuration with every default the subcommand uses written in.
    pub fn resolved(&self) -> RunConfig {
        let mut c = self.clone();
        let or_beta = |c: &mut RunConfig, b: &[f64]| {
            if c.beta.is_empty() {
                c.beta = b.to_vec();
            }
        };
        let or = |v: &mut Option<f64>, d: f64| {
            v.get_or_insert(d);
        };
        match c.command {
            Command::OracleCheck => {}
            Command::CircularIdentity => {
                or_beta(&mut c, &[1.0, 2.0, 4.0]);
                if c.n.is_empty() {
                    c.n = vec![4, 8, 16];
                }
                c.seeds.get_or_insert(5);
            }
            Command::CircularBs => {
                or_beta(&mut c, &[2.0]);
                if c.n.is_empty() {
                    c.n = vec![16];
                }
                c.samples.get_or_insert(100_000);
            }
            Command::ZetaBs => {
                or_beta(&mut c, &[2.0]);
                if c.z.is_empty() && c.w.is_empty() {
                    c.z = vec![C64::i()];
                    c.w = vec![-C64::i()];
                }
                if c.nu.is_none() {
                    or(&mut c.delta, 1e-8);
                }
                or(&mut c.step, 1e-3);
                c.samples.get_or_insert(10_000);
            }
            Command::Moments => {
                let suite = *c.suite.get_or_insert(MomentSuite::Finite);
                match suite {
                    MomentSuite::Finite => {
                        or_beta(&mut c, &[4.0]);
                        if c.nu.is_none() {
                            or(&mut c.delta, 0.5);
                        }
                        or(&mut c.step, 2e-4);
                    }
                    MomentSuite::Limit => {
                        or_beta(&mut c, &[2.0, 4.0]);
                        if c.nu.is_none() {
                            or(&mut c.delta, 1e-8);
                        }
                        or(&mut c.step, 1e-3);
                    }
                }
                c.samples.get_or_insert(10_000);
            }
            Command::Dufresne => {
                or_beta(&mut c, &[1.0, 2.0]);
                if c.nu.is_none() {
                    or(&mut c.delta, 1e-8);
                }
                or(&mut c.step, 1e-3);
                c.samples.get_or_insert(2000);
                c.seeds.get_or_insert(3);
            }
            Command::TraceCauchy => {
                or_beta(&mut c, &[4.0]);
                if c.nu.is_none() {
                    or(&mut c.delta, 1e-3);
                }
                or(&mut c.step, 1e-3);
                or(&mut c.window, 200.0);
                c.samples.get_or_insert(2000);
                c.seeds.get_or_insert(3);
            }
            Command::SampleSineb => {
                or_beta(&mut c, &[2.0]);
                if c.nu.is_none() {
                    or(&mut c.delta, 1e-3);
                }
                or(&mut c.step, 1e-3);
                or(&mut c.window, 50.0);
                c.samples.get_or_insert(20);
            }
            Command::ZetaEval => {
                or_beta(&mut c, &[2.0]);
                if c.nu.is_none() {
                    or(&mut c.delta, 1e-6);
                }
                or(&mut c.step, 1e-3);
                or(&mut c.window, 20.0);
            }
        }
        c
    }

    fn settings(&self) -> McSettings {
        McSettings {
            beta: self.beta.first().copied().unwrap_or(2.0),
            delta: self.delta.unwrap_or(1e-8),
            nu: self.nu,
            h: self.step.unwrap_or(1e-3),
            samples: self.samples.unwrap_or(1000),
            seed: self.seed,
            workers: self.workers,
        }
    }

    fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds.unwrap_or(1) as u64).map(|k| self.seed + k).collect()
    }

    fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }
}

/// Parses `1.5`, `-2j`, `0.5-1.25j` or `3+4i` into a complex number.
pub fn parse_complex(text: &str) -> Result<C64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Domain(format!("cannot read {text:?} as a complex number"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('j').or_else(|| t.strip_suffix('i')) else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split before the last sign that is not the leading one or an exponent's.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> Result<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(C64::new(body[..k].parse::<f64>().map_err(|_| bad())?, imag(&body[k..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

/// What a run produced: one verdict line per check and the files written.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub outcomes: Vec<Outcome>,
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    fn add(&mut self, o: Outcome) {
        self.lines.push(o.line());
        self.outcomes.push(o);
    }
}

#[derive(Serialize)]
struct VerdictRow<'a> {
    criterion: u8,
    name: &'a str,
    pass: bool,
    detail: &'a str,
}

fn write_verdicts(cfg: &RunConfig, path: &Path, outcomes: &[Outcome]) -> Result<()> {
    let rows: Vec<VerdictRow> = outcomes
        .iter()
        .map(|o| VerdictRow { criterion: o.id, name: &o.name, pass: o.pass, detail: &o.detail })
        .collect();
    io::write_csv(path, cfg, &rows)
}

fn write_results(cfg: &RunConfig, rep: &mut RunReport) -> Result<()> {
    let rows: Vec<ResultRow> = rep.outcomes.iter().flat_map(|o| o.rows.iter().cloned()).collect();
    let path = cfg.path(&format!("{}.csv", cfg.command.name()));
    io::write_csv(&path, cfg, &rows)?;
    rep.files.push(path);
    Ok(())
}

/// Runs the configured subcommand, writing its CSV files under `cfg.out`.
pub fn execute(cfg: &RunConfig) -> Result<RunReport> {
    let cfg = cfg.resolved();
    let mut rep = RunReport::default();
    match cfg.command {
        Command::OracleCheck => oracle_check(&cfg, &mut rep)?,
        Command::CircularIdentity => circular_identity(&cfg, &mut rep)?,
        Command::CircularBs => circular_bs(&cfg, &mut rep)?,
        Command::ZetaBs => {
            if cfg.z.len() != cfg.w.len() || cfg.z.is_empty() {
                return Err(Error::Domain("zeta-bs needs equally many --z and --w points".into()));
            }
            rep.add(experiments::zeta_ratio_check(cfg.settings(), &cfg.z, &cfg.w)?);
            write_results(&cfg, &mut rep)?;
        }
        Command::Moments => {
            let outs = match cfg.suite {
                Some(MomentSuite::Limit) => experiments::limit_check(cfg.settings(), &cfg.beta)?,
                _ => experiments::finite_nu_check(cfg.settings())?,
            };
            outs.into_iter().for_each(|o| rep.add(o));
            write_results(&cfg, &mut rep)?;
        }
        Command::Dufresne => dufresne(&cfg, &mut rep)?,
        Command::TraceCauchy => trace_cauchy(&cfg, &mut rep)?,
        Command::SampleSineb => sample_sineb(&cfg, &mut rep)?,
        Command::ZetaEval => zeta_eval(&cfg, &mut rep)?,
    }
    Ok(rep)
}

fn oracle_check(cfg: &RunConfig, rep: &mut RunReport) -> Result<()> {
    rep.add(experiments::sine_oracle_check()?);
    rep.add(experiments::bessel_oracle_check()?);
    rep.add(experiments::det2_check()?);
    rep.add(experiments::eigenvalue_check()?);
    let path = cfg.path("oracle-check.csv");
    write_verdicts(cfg, &path, &rep.outcomes)?;
    rep.files.push(path);

    // Both deterministic routes for the sine operator at θ = π/2.
    let o = SineOracle::new(1.0, 0.5 * PI)?;
    let spec = sine_spec(1.0, o.q())?;
    let tc = taylor_coeffs(&spec, 90)?;
    let mut rows = Vec::new();
    for z in experiments::disk_grid(100, 10.0) {
        for v in [zeta_taylor(&tc, z, 1e-12)?, zeta_ode(&spec, z, None)?] {
            rows.push(ZetaEvalRow::from(&v));
        }
    }
    let path = cfg.path("oracle-zeta.csv");
    io::write_csv(&path, cfg, &rows)?;
    rep.files.push(path);
    Ok(())
}

#[derive(Serialize)]
struct IdentityRow {
    n: usize,
    beta: f64,
    seed: u64,
    max_dev_transfer: f64,
    max_dev_ode: f64,
    max_dev_product: f64,
    frame_condition: f64,
}

#[derive(Serialize)]
struct AngleRow {
    n: usize,
    beta: f64,
    seed: u64,
    angle: f64,
}

fn circular_identity(cfg: &RunConfig, rep: &mut RunReport) -> Result<()> {
    let grid = experiments::disk_grid(100, 10.0);
    let seeds = cfg.seed_list();
    let (mut rows, mut angles) = (Vec::new(), Vec::new());
    for &n in &cfg.n {
        for &beta in &cfg.beta {
            for &seed in &seeds {
                let s = circular::sample_verblunsky(n, beta, seed)?;
                let r = circular::verify_identities(&s, &grid)?;
                rows.push(IdentityRow {
                    n,
                    beta,
                    seed,
                    max_dev_transfer: r.max_dev_transfer,
                    max_dev_ode: r.max_dev_ode,
                    max_dev_product: r.max_dev_product,
                    frame_condition: r.frame_condition,
                });
                for angle in circular::eigenangles(&s)? {
                    angles.push(AngleRow { n, beta, seed, angle });
                }
            }
        }
    }
    for o in experiments::circular_identity_check(&cfg.n, &cfg.beta, &seeds, &grid)? {
        rep.add(o);
    }
    for (file, write) in [
        ("circular-identity.csv", io::write_csv(&cfg.path("circular-identity.csv"), cfg, &rows)),
        ("circular-eigenangles.csv", io::write_csv(&cfg.path("circular-eigenangles.csv"), cfg, &angles)),
    ] {
        write?;
        rep.files.push(cfg.path(file));
    }
    Ok(())
}

#[derive(Serialize)]
struct RatioRow {
    replicate: usize,
    re: f64,
    im: f64,
}

fn circular_bs(cfg: &RunConfig, rep: &mut RunReport) -> Result<()> {
    let n = cfg.n[0];
    let beta = cfg.beta[0];
    let samples = cfg.samples.unwrap_or(100_000);
    if cfg.z.is_empty() && cfg.w.is_empty() {
        rep.add(experiments::circular_bs_check(n, beta, samples, cfg.seed)?);
        write_results(cfg, rep)?;
        return Ok(());
    }
    let target = crate::moments::borodin_strahov(&cfg.z, &cfg.w)?;
    let ratios = circular::bs_samples(n, beta, cfg.seed, samples, &cfg.z, &cfg.w)?;
    let est = crate::moments::MCEstimate::from_samples(&ratios, cfg.seed)?;
    let pass = est.within(target, 3.0);
    let detail = format!(
        "n={n}, β={beta}, {samples} replicates: mean {:.5}{:+.5}i vs {:.5}{:+.5}i ({:.2} SE)",
        est.mean.re,
        est.mean.im,
        target.re,
        target.im,
        est.z_score(target)
    );
    let mut o = Outcome::new(7, "circular ratio moments", pass, detail);
    o.rows.push(ResultRow::new("prod E_n(z)/E_n(w)", target, &est, pass));
    rep.add(o);
    write_results(cfg, rep)?;
    let rows: Vec<RatioRow> =
        ratios.iter().enumerate().map(|(replicate, r)| RatioRow { replicate, re: r.re, im: r.im }).collect();
    let path = cfg.path("circular-bs-ratios.csv");
    io::write_csv(&path, cfg, &rows)?;
    rep.files.push(path);
    Ok(())
}

#[derive(Serialize)]
struct DufresneRow {
    beta: f64,
    seed: u64,
    replicate: usize,
    b1: f64,
}

fn dufresne(cfg: &RunConfig, rep: &mut RunReport) -> Result<()> {
    let (o, all) = experiments::dufresne_check(cfg.settings(), &cfg.beta, &cfg.seed_list())?;
    rep.add(o);
    write_results(cfg, rep)?;
    let rows: Vec<DufresneRow> = all
        .iter()
        .flat_map(|(beta, seed, b1)| {
            b1.iter().enumerate().map(move |(replicate, &b)| DufresneRow { beta: *beta, seed: *seed, replicate, b1: b })
        })
        .collect();
    let path = cfg.path("dufresne-samples.csv");
    io::write_csv(&path, cfg, &rows)?;
    rep.files.push(path);
    Ok(())
}

#[derive(Serialize)]
struct TraceRow {
    seed: u64,
    replicate: usize,
    trace: f64,
}

fn trace_cauchy(cfg: &RunConfig, rep: &mut RunReport) -> Result<()> {
    let r = cfg.window.unwrap_or(200.0);
    let (outs, runs) = experiments::trace_check(cfg.settings(), r, &cfg.seed_list())?;
    outs.into_iter().for_each(|o| rep.add(o));
    write_results(cfg, rep)?;
    let rows: Vec<TraceRow> = runs
        .iter()
        .flat_map(|run| {
            run.traces.iter().enumerate().map(move |(replicate, &trace)| TraceRow { seed: run.seed, replicate, trace })
        })
        .collect();
    let path = cfg.path("trace-samples.csv");
    io::write_csv(&path, cfg, &rows)?;
    rep.files.push(path);
    Ok(())
}

#[derive(Serialize)]
struct CountingRow {
    replicate: usize,
    lambda: f64,
    count: usize,
    alpha_over_2pi: f64,
}

fn sample_sineb(cfg: &RunConfig, rep: &mut RunReport) -> Result<()> {
    let s = cfg.settings();
    let c = s.config()?;
    let r = cfg.window.unwrap_or(50.0);
    let samples = mc_collect(s.samples, s.workers, |k| sde::sample_sine_beta(&make_driver(s.seed, k, c), r))?;
    let mut eig = Vec::new();
    let mut counting = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, smp) in samples.iter().enumerate() {
        eig.extend(smp.eigenvalues.iter().copied());
        worst = worst.max(smp.counting_deviation());
        for &(l, a) in smp.grid.iter().filter(|(l, _)| *l >= 0.0) {
            let count = smp.eigenvalues.iter().filter(|&&x| x >= 0.0 && x <= l).count();
            counting.push(CountingRow { replicate: k, lambda: l, count, alpha_over_2pi: a / (2.0 * PI) });
        }
    }
    rep.add(Outcome::new(
        16,
        "counting function tracks the phase",
        worst <= 1.05,
        format!("max deviation {worst:.3} over {} replicates (bound 1.05)", samples.len()),
    ));
    let p1 = cfg.path("sineb-eigenvalues.csv");
    io::write_column(&p1, cfg, "lambda", &eig)?;
    let p2 = cfg.path("sineb-counting.csv");
    io::write_csv(&p2, cfg, &counting)?;
    rep.files.extend([p1, p2]);
    Ok(())
}

fn zeta_eval(cfg: &RunConfig, rep: &mut RunReport) -> Result<()> {
    let s = cfg.settings();
    let c = s.config()?;
    let r = cfg.window.unwrap_or(20.0);
    let zs: Vec<C64> = if cfg.z.is_empty() {
        let (nx, ny) = (81, 21);
        let im_max = 0.25 * r;
        (0..ny)
            .flat_map(|j| {
                (0..nx).map(move |i| {
                    C64::new(
                        -r + 2.0 * r * i as f64 / (nx - 1) as f64,
                        -im_max + 2.0 * im_max * j as f64 / (ny - 1) as f64,
                    )
                })
            })
            .collect()
    } else {
        cfg.z.clone()
    };
    let d = sde::sample_zeta(&make_driver(s.seed, 0, c), &zs)?;
    let rows: Vec<ZetaGridRow> = (0..zs.len())
        .map(|i| {
            let v = d.zeta(i);
            ZetaGridRow { re_z: zs[i].re, im_z: zs[i].im, zeta_re: v.re, zeta_im: v.im, log_abs: v.norm().ln() }
        })
        .collect();
    let path = cfg.path("zeta-grid.csv");
    io::write_csv(&path, cfg, &rows)?;
    rep.files.push(path);
    rep.lines.push(format!("sampled ζ at {} points, q = {:.6}", zs.len(), d.q));
    Ok(())
}
