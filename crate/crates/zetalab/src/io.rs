//! CSV output. Every file starts with one `# {json}` line recording the
//! configuration that produced it, followed by a header row and data.

use num_complex::Complex64 as C64;
use serde::{Serialize, Serializer};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::secular::ZetaValue;
use crate::stats::MCEstimate;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "ZETALAB_OUT";

/// `explicit`, else `$ZETALAB_OUT`, else the current directory.
pub fn out_dir(explicit: Option<&Path>) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
    }
}

/// Python complex literal, e.g. `0.5-1.25j`.
pub fn complex_literal(c: C64) -> String {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", c.re, sign, c.im.abs())
}

fn ser_complex<S: Serializer>(c: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&complex_literal(*c))
}

/// One row of the results table shared by all Monte Carlo comparisons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub target_name: String,
    #[serde(serialize_with = "ser_complex")]
    pub analytic: C64,
    pub mc_mean_re: f64,
    pub mc_mean_im: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
    pub pass: bool,
}

impl ResultRow {
    pub fn new(target_name: impl Into<String>, analytic: C64, est: &MCEstimate, pass: bool) -> Self {
        ResultRow {
            target_name: target_name.into(),
            analytic,
            mc_mean_re: est.mean.re,
            mc_mean_im: est.mean.im,
            stderr: est.stderr,
            n: est.n,
            seed: est.seed,
            pass,
        }
    }
}

/// A deterministic ζ evaluation and the route that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaEvalRow {
    pub re_z: f64,
    pub im_z: f64,
    pub zeta_re: f64,
    pub zeta_im: f64,
    pub route: &'static str,
    pub err_estimate: f64,
}

impl From<&ZetaValue> for ZetaEvalRow {
    fn from(v: &ZetaValue) -> Self {
        ZetaEvalRow {
            re_z: v.z.re,
            im_z: v.z.im,
            zeta_re: v.value.re,
            zeta_im: v.value.im,
            route: v.route.as_str(),
            err_estimate: v.err_estimate,
        }
    }
}

/// A sampled ζ on a grid, for heat maps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaGridRow {
    pub re_z: f64,
    pub im_z: f64,
    pub zeta_re: f64,
    pub zeta_im: f64,
    pub log_abs: f64,
}

/// Writes `rows` to `path` under a JSON comment line built from `config`.
pub fn write_csv<C: Serialize, T: Serialize>(path: &Path, config: &C, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut f = File::create(path)?;
    let header = serde_json::to_string(config).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(f, "# {header}")?;
    let mut w = csv::Writer::from_writer(f);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a single named column of numbers.
pub fn write_column<C: Serialize>(path: &Path, config: &C, name: &str, values: &[f64]) -> Result<()> {
    #[derive(Serialize)]
    struct Row(f64);
    let mut tmp = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut tmp);
        w.write_record([name]).map_err(|e| Error::Io(e.to_string()))?;
        for &v in values {
            w.serialize(Row(v)).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut f = File::create(path)?;
    let header = serde_json::to_string(config).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(f, "# {header}")?;
    f.write_all(&tmp)?;
    Ok(())
}

/// Reads back the JSON comment line of a file written by this module.
pub fn read_header(path: &Path) -> Result<serde_json::Value> {
    let mut line = String::new();
    BufReader::new(File::open(path)?).read_line(&mut line)?;
    let body = line
        .strip_prefix("# ")
        .ok_or_else(|| Error::Io(format!("{} has no JSON header line", path.display())))?;
    serde_json::from_str(body.trim_end()).map_err(|e| Error::Io(e.to_string()))
}

/// Reads the CSV body (after the header comment) as string records.
pub fn read_body(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path)?;
    let body = text.split_once('\n').map(|(_, b)| b).unwrap_or("");
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let head = r.headers().map_err(|e| Error::Io(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| Error::Io(e.to_string()))?.iter().map(String::from).collect());
    }
    Ok((head, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals_parse_in_python_form() {
        assert_eq!(complex_literal(C64::new(0.5, -1.25)), "0.5-1.25j");
        assert_eq!(complex_literal(C64::new(1.0, 0.0)), "1+0j");
    }

    #[test]
    fn results_round_trip() {
        let dir = std::env::temp_dir().join(format!("zetalab-io-{}", std::process::id()));
        let path = dir.join("r.csv");
        let est = MCEstimate::from_real(&[1.0, 2.0, 3.0], 9).unwrap();
        let row = ResultRow::new("t", C64::new(2.0, 0.0), &est, true);
        let cfg = serde_json::json!({"beta": 2.0, "seed": 9});
        write_csv(&path, &cfg, &[row]).unwrap();
        assert_eq!(read_header(&path).unwrap(), cfg);
        let (head, rows) = read_body(&path).unwrap();
        assert_eq!(head, ["target_name", "analytic", "mc_mean_re", "mc_mean_im", "stderr", "n", "seed", "pass"]);
        assert_eq!(rows[0][0], "t");
        assert_eq!(rows[0][1], "2+0j");
        assert_eq!(rows[0][7], "true");
        write_column(&dir.join("c.csv"), &cfg, "lambda", &[1.5, -2.0]).unwrap();
        let (head, rows) = read_body(&dir.join("c.csv")).unwrap();
        assert_eq!(head, ["lambda"]);
        assert_eq!(rows, vec![vec!["1.5".to_string()], vec!["-2.0".to_string()]]);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn out_dir_precedence() {
        assert_eq!(out_dir(Some(Path::new("/x"))), PathBuf::from("/x"));
    }
}
