//! Monte Carlo bookkeeping, replicate random streams and the
//! Kolmogorov–Smirnov test.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Independent generator for one replicate. Stream `2k` carries the driving
/// noise of replicate `k`, stream `2k + 1` its auxiliary draws.
pub fn replicate_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sample mean of complex observations with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: C64,
    /// Standard error of the mean, √((Var Re + Var Im)/n).
    pub stderr: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub n: usize,
    pub seed: u64,
}

impl MCEstimate {
    pub fn from_samples(samples: &[C64], seed: u64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::Statistics(format!("need at least two samples, got {n}")));
        }
        let nf = n as f64;
        let mean = samples.iter().sum::<C64>() / nf;
        let (mut vr, mut vi) = (0.0, 0.0);
        for s in samples {
            let d = s - mean;
            vr += d.re * d.re;
            vi += d.im * d.im;
        }
        vr /= nf - 1.0;
        vi /= nf - 1.0;
        Ok(MCEstimate {
            mean,
            stderr: ((vr + vi) / nf).sqrt(),
            stderr_re: (vr / nf).sqrt(),
            stderr_im: (vi / nf).sqrt(),
            n,
            seed,
        })
    }

    pub fn from_real(samples: &[f64], seed: u64) -> Result<Self> {
        let c: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_samples(&c, seed)
    }

    /// |mean − target| in units of the standard error.
    pub fn z_score(&self, target: C64) -> f64 {
        (self.mean - target).norm() / self.stderr
    }

    pub fn within(&self, target: C64, n_se: f64) -> bool {
        (self.mean - target).norm() <= n_se * self.stderr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample KS test of `samples` against the continuous CDF `cdf`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::Statistics("KS test on an empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Statistics("KS test sample contains NaN".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    let sq = nf.sqrt();
    Ok(KsResult { statistic: d, p_value: kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d), n })
}

/// P(K > x) for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        // The alternating series converges slowly here; use the theta dual.
        let s: f64 = (1..=20)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (-(m * m) * std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp()
            })
            .sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn kolmogorov_quantiles() {
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        // Both branches agree where they meet.
        let lo = 1.0 - (2.0 * std::f64::consts::PI).sqrt() / 0.3
            * (1..=20).map(|k| (-(((2 * k - 1) as f64).powi(2)) * std::f64::consts::PI.powi(2) / 0.72).exp()).sum::<f64>();
        assert!((lo - kolmogorov_sf(0.3000001)).abs() < 1e-6);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_shift() {
        let mut rng = replicate_rng(3, 0);
        let u: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_test(&u, |x| x.clamp(0.0, 1.0)).unwrap().p_value > 0.01);
        let shifted: Vec<f64> = u.iter().map(|x| x * 0.9).collect();
        assert!(ks_test(&shifted, |x| x.clamp(0.0, 1.0)).unwrap().p_value < 1e-6);
    }

    #[test]
    fn streams_differ() {
        let a: u64 = replicate_rng(1, 0).random();
        let b: u64 = replicate_rng(1, 1).random();
        assert_ne!(a, b);
    }

    #[test]
    fn estimate_of_constant_has_zero_error() {
        let e = MCEstimate::from_real(&[2.0, 2.0, 2.0], 0).unwrap();
        assert_eq!(e.mean, C64::new(2.0, 0.0));
        assert_eq!(e.stderr, 0.0);
        assert!(MCEstimate::from_real(&[1.0], 0).is_err());
    }
}
