use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use zetalab::io::{read_body, read_header};
use zetalab::run::{execute, Command, MomentSuite, RunConfig};
use zetalab::C64;

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("zetalab-runs-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn body(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# {"), "{} lacks the JSON header", path.display());
    text.split_once('\n').unwrap().1.to_string()
}

fn small(command: Command) -> RunConfig {
    let mut c = RunConfig::new(command);
    c.samples = Some(40);
    c.seed = 3;
    c
}

/// Runs `cfg` with one and with four workers and checks the CSV bodies agree.
fn reproducible(mut cfg: RunConfig, tag: &str, files: &[(&str, &[&str])]) {
    cfg.out = scratch(&format!("{tag}-a"));
    cfg.workers = Some(1);
    let first = execute(&cfg).unwrap();
    let mut again = cfg.clone();
    again.out = scratch(&format!("{tag}-b"));
    again.workers = Some(4);
    execute(&again).unwrap();
    assert_eq!(first.files.len(), files.len(), "{tag}: {:?}", first.files);
    for (name, columns) in files {
        let (a, b) = (cfg.out.join(name), again.out.join(name));
        assert_eq!(body(&a), body(&b), "{tag}: {name} differs between runs");
        let (head, rows) = read_body(&a).unwrap();
        assert_eq!(&head, columns, "{tag}: {name} columns");
        assert!(!rows.is_empty(), "{tag}: {name} is empty");
        let h = read_header(&a).unwrap();
        assert_eq!(h["command"], tag, "{tag}: {name} header");
        assert_eq!(h["seed"], 3);
    }
}

const RESULT: &[&str] = &["target_name", "analytic", "mc_mean_re", "mc_mean_im", "stderr", "n", "seed", "pass"];

#[test]
fn moment_runs_are_reproducible() {
    let mut c = small(Command::Moments);
    c.suite = Some(MomentSuite::Finite);
    c.step = Some(2e-3);
    reproducible(c, "moments", &[("moments.csv", RESULT)]);
}

#[test]
fn ratio_runs_are_reproducible() {
    let mut c = small(Command::ZetaBs);
    c.delta = Some(1e-3);
    c.z = vec![C64::i(), C64::new(0.0, 0.0)];
    c.w = vec![-C64::i()];
    assert!(matches!(execute(&c), Err(zetalab::Error::Domain(_))));
    c.w = vec![-C64::i(), -C64::i()];
    reproducible(c, "zeta-bs", &[("zeta-bs.csv", RESULT)]);

    let mut c = small(Command::CircularBs);
    c.n = vec![6];
    reproducible(c.clone(), "circular-bs", &[("circular-bs.csv", RESULT)]);
    c.z = vec![C64::new(0.5, 0.0)];
    c.w = vec![-C64::i()];
    reproducible(c, "circular-bs", &[("circular-bs.csv", RESULT), ("circular-bs-ratios.csv", &["replicate", "re", "im"])]);
}

#[test]
fn sampler_runs_are_reproducible() {
    let mut c = small(Command::SampleSineb);
    c.samples = Some(4);
    c.window = Some(20.0);
    reproducible(
        c,
        "sample-sineb",
        &[("sineb-eigenvalues.csv", &["lambda"]), ("sineb-counting.csv", &["replicate", "lambda", "count", "alpha_over_2pi"])],
    );

    let mut c = small(Command::Dufresne);
    c.beta = vec![2.0];
    c.seeds = Some(1);
    c.delta = Some(1e-3);
    reproducible(c, "dufresne", &[("dufresne.csv", RESULT), ("dufresne-samples.csv", &["beta", "seed", "replicate", "b1"])]);
}

#[test]
fn zeta_grid_has_unit_value_at_origin() {
    let mut c = RunConfig::new(Command::ZetaEval);
    c.delta = Some(1e-2);
    c.window = Some(4.0);
    c.out = scratch("grid");
    execute(&c).unwrap();
    let (head, rows) = read_body(&c.out.join("zeta-grid.csv")).unwrap();
    assert_eq!(head, ["re_z", "im_z", "zeta_re", "zeta_im", "log_abs"]);
    let origin = rows.iter().find(|r| r[0].parse::<f64>().unwrap() == 0.0 && r[1].parse::<f64>().unwrap() == 0.0);
    let origin = origin.expect("grid contains the origin");
    // ζ(0) = 1 for the q-boundary normalisation.
    assert!((origin[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn cli_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_zetalab");
    let out = scratch("cli");
    let ok = Proc::new(exe)
        .args(["circular-bs", "--n", "8", "--samples", "2000", "--seed", "1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));
    assert!(out.join("circular-bs.csv").exists());

    let usage = Proc::new(exe).args(["moments", "--nonsense"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let both = Proc::new(exe).args(["moments", "--nu", "-1", "--delta", "0.5"]).output().unwrap();
    assert_eq!(both.status.code(), Some(2));

    let blocked = out.join("occupied");
    std::fs::write(&blocked, "").unwrap();
    let io = Proc::new(exe).args(["sample-sineb", "--samples", "1", "--out"]).arg(blocked.join("sub")).output().unwrap();
    assert_eq!(io.status.code(), Some(2));
}
