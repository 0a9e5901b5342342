//! Brownian drivers and the stochastic simulations built on them.
//!
//! Time runs in the logarithmic variable u ∈ [ν, u_end] with u = 0 the right
//! end of the operator. Every simulation of one replicate reads the same
//! increments, which is what couples ℋ(z) across z, α_λ across λ, and the
//! eigenvalues with ζ.
//!
//! The phase equation is integrated with the noise sign obtained from Itô's
//! formula applied to ℰ = 𝒜 − iℬ under the ℋ equation:
//!
//! dα = λ f_β du + (cos α − 1) db₁ + sin α db₂,
//! dL = sin α db₁ − (cos α − 1) db₂.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::stats::replicate_rng;

const OVERFLOW: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub beta: f64,
    pub nu: f64,
    pub h: f64,
    pub u_end: f64,
}

impl SdeConfig {
    pub fn new(beta: f64, nu: f64, h: f64, u_end: f64) -> Result<Self> {
        if !(beta > 0.0) || !(nu < 0.0) || !(h > 0.0) || !(u_end >= 0.0) || !(h <= -nu) {
            return Err(Error::Domain(format!(
                "SDE configuration needs β>0, ν<0, 0<h≤|ν|, u_end≥0; got β={beta}, ν={nu}, h={h}, u_end={u_end}"
            )));
        }
        Ok(SdeConfig { beta, nu, h, u_end })
    }

    /// ν chosen so that e^{βν/4} = `delta`.
    pub fn with_truncation(beta: f64, delta: f64, h: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("truncation e^(βν/4) = {delta} must lie in (0,1)")));
        }
        Self::new(beta, 4.0 / beta * delta.ln(), h, 0.0)
    }

    /// e^{βν/4} = 1e−10 and h = 2e−4.
    pub fn default_for(beta: f64) -> Result<Self> {
        Self::with_truncation(beta, 1e-10, 2e-4)
    }

    /// e^{βν/4}.
    pub fn truncation(&self) -> f64 {
        (0.25 * self.beta * self.nu).exp()
    }

    /// Number of steps from ν to 0; the actual step is |ν| divided by it.
    pub fn steps_to_zero(&self) -> usize {
        (-self.nu / self.h).ceil() as usize
    }

    pub fn step(&self) -> f64 {
        -self.nu / self.steps_to_zero() as f64
    }

    pub fn n_steps(&self) -> usize {
        self.steps_to_zero() + (self.u_end / self.step()).ceil() as usize
    }

    /// Grid time of index k, exact at k = 0 and at u = 0.
    pub fn u(&self, k: usize) -> f64 {
        let k0 = self.steps_to_zero();
        if k <= k0 {
            self.nu * (1.0 - k as f64 / k0 as f64)
        } else {
            (k - k0) as f64 * self.step()
        }
    }

    /// f_β(u) = (β/4) e^{βu/4}.
    pub fn f_beta(&self, u: f64) -> f64 {
        0.25 * self.beta * (0.25 * self.beta * u).exp()
    }
}

/// Increments of two independent Brownian motions on the configured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianDriver {
    pub seed: u64,
    pub replicate: u64,
    pub config: SdeConfig,
    pub db1: Vec<f64>,
    pub db2: Vec<f64>,
}

pub fn make_driver(seed: u64, replicate: u64, config: SdeConfig) -> BrownianDriver {
    let n = config.n_steps();
    let sd = config.step().sqrt();
    let mut rng = replicate_rng(seed, 2 * replicate);
    let mut db1 = Vec::with_capacity(n);
    let mut db2 = Vec::with_capacity(n);
    for _ in 0..n {
        db1.push(sd * rng.sample::<f64, _>(StandardNormal));
        db2.push(sd * rng.sample::<f64, _>(StandardNormal));
    }
    BrownianDriver { seed, replicate, config, db1, db2 }
}

impl BrownianDriver {
    pub fn n_steps(&self) -> usize {
        self.db1.len()
    }

    /// Index of u = 0 on the grid.
    pub fn zero_index(&self) -> usize {
        self.config.steps_to_zero()
    }

    /// Same driver with every increment set to zero.
    pub fn zeroed(config: SdeConfig) -> Self {
        let n = config.n_steps();
        BrownianDriver { seed: 0, replicate: 0, config, db1: vec![0.0; n], db2: vec![0.0; n] }
    }

    /// Generator for the replicate's auxiliary draws (q, U), separate from the noise.
    pub fn aux_rng(&self) -> rand_chacha::ChaCha8Rng {
        replicate_rng(self.seed, 2 * self.replicate + 1)
    }

    /// Standard Cauchy q = tan(π(V − ½)) from the auxiliary stream.
    pub fn draw_q(&self) -> f64 {
        let v: f64 = self.aux_rng().random();
        (PI * (v - 0.5)).tan()
    }

    /// (β/8) e^{βu_k/4} for every grid index k.
    fn half_f(&self) -> impl Iterator<Item = f64> + '_ {
        let c = self.config;
        (0..self.n_steps()).map(move |k| 0.5 * c.f_beta(c.u(k)))
    }
}

/// The affine path on the grid, normalized by x(0) = 0, y(0) = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePath {
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// y_u = e^{b₂(u) − u/2} exactly from summed increments; x by left-point
/// Itô sums of y db₁.
pub fn affine_path(driver: &BrownianDriver) -> AffinePath {
    let n = driver.n_steps();
    let k0 = driver.zero_index();
    let c = driver.config;
    let mut b2 = vec![0.0; n + 1];
    for k in 0..n {
        b2[k + 1] = b2[k] + driver.db2[k];
    }
    let shift = b2[k0];
    let u: Vec<f64> = (0..=n).map(|k| c.u(k)).collect();
    let y: Vec<f64> = (0..=n).map(|k| (b2[k] - shift - 0.5 * u[k]).exp()).collect();
    let mut integral = vec![0.0; n + 1];
    for k in 0..n {
        integral[k + 1] = integral[k] + y[k] * driver.db1[k];
    }
    let x = integral.iter().map(|v| v - integral[k0]).collect();
    AffinePath { u, x, y }
}

/// ℋ at u = 0 for each z and, when `stride > 0`, every `stride`-th state.
#[derive(Debug, Clone, PartialEq)]
pub struct HPaths {
    pub z: Vec<C64>,
    pub at_zero: Vec<[C64; 2]>,
    pub u: Vec<f64>,
    pub trajectory: Vec<Vec<[C64; 2]>>,
}

/// Euler–Maruyama for dℋ = [[0, −db₁], [0, db₂]]ℋ − z(β/8)e^{βu/4} Jℋ du
/// from ℋ_ν = [1, 0], all z on the same increments.
pub fn simulate_h(driver: &BrownianDriver, zs: &[C64], stride: usize) -> Result<HPaths> {
    let k0 = driver.zero_index();
    let mut state: Vec<[C64; 2]> = vec![[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]; zs.len()];
    let mut out = HPaths { z: zs.to_vec(), at_zero: state.clone(), u: Vec::new(), trajectory: Vec::new() };
    let h = driver.config.step();
    let record = |k: usize, st: &[[C64; 2]], out: &mut HPaths| {
        if stride > 0 && k % stride == 0 {
            out.u.push(driver.config.u(k));
            out.trajectory.push(st.to_vec());
        }
    };
    record(0, &state, &mut out);
    for (k, fh) in driver.half_f().enumerate() {
        if k == k0 {
            out.at_zero.copy_from_slice(&state);
        }
        let (d1, d2) = (driver.db1[k], driver.db2[k]);
        for (s, &z) in state.iter_mut().zip(zs) {
            let w = z * (fh * h);
            let [a, b] = *s;
            *s = [a - b * d1 + w * b, b + b * d2 - w * a];
        }
        if k % 4096 == 0 && state.iter().any(|s| !(s[0].norm() < OVERFLOW && s[1].norm() < OVERFLOW)) {
            return Err(Error::Overflow(format!(
                "ℋ exceeded 1e300 near u = {}; reduce |z| or the step",
                driver.config.u(k)
            )));
        }
        record(k + 1, &state, &mut out);
    }
    if k0 == driver.n_steps() {
        out.at_zero.copy_from_slice(&state);
    }
    if out.at_zero.iter().any(|s| !(s[0].is_finite() && s[1].is_finite())) {
        return Err(Error::Overflow("ℋ is not finite at u = 0; reduce |z| or the step".into()));
    }
    Ok(out)
}

/// ζ_ν and the related values of one replicate at a list of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaSample {
    pub seed: u64,
    pub replicate: u64,
    pub q: f64,
    pub z: Vec<C64>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl ZetaSample {
    pub fn zeta(&self, i: usize) -> C64 {
        self.a[i] - self.b[i] * self.q
    }
    pub fn hatzeta(&self, i: usize) -> C64 {
        self.zeta(i) / (1.0 + self.q * self.q).sqrt()
    }
    pub fn e(&self, i: usize) -> C64 {
        self.a[i] - C64::i() * self.b[i]
    }
    pub fn e_star(&self, i: usize) -> C64 {
        self.a[i] + C64::i() * self.b[i]
    }
}

pub fn sample_zeta(driver: &BrownianDriver, zs: &[C64]) -> Result<ZetaSample> {
    let paths = simulate_h(driver, zs, 0)?;
    Ok(ZetaSample {
        seed: driver.seed,
        replicate: driver.replicate,
        q: driver.draw_q(),
        z: zs.to_vec(),
        a: paths.at_zero.iter().map(|s| s[0]).collect(),
        b: paths.at_zero.iter().map(|s| s[1]).collect(),
    })
}

/// 𝔱 = ∫_ν^0 (x_u − q)/(2y_u) f_β(u) du by the trapezoidal rule on the grid.
pub fn integral_trace_sample(driver: &BrownianDriver, q: f64) -> f64 {
    let p = affine_path(driver);
    let c = driver.config;
    let k0 = driver.zero_index();
    let g = |k: usize| (p.x[k] - q) / (2.0 * p.y[k]) * c.f_beta(p.u[k]);
    (0..k0).map(|k| 0.5 * (g(k) + g(k + 1)) * (p.u[k + 1] - p.u[k])).sum()
}

/// Taylor coefficients 𝒜_n, ℬ_n (n = 0, …, n_max) at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorPaths {
    pub u: Vec<f64>,
    /// a[n][k] = 𝒜_n(u_k).
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl TaylorPaths {
    pub fn at_zero(&self, k0: usize) -> (Vec<f64>, Vec<f64>) {
        (self.a.iter().map(|v| v[k0]).collect(), self.b.iter().map(|v| v[k0]).collect())
    }
}

/// Euler–Maruyama for dℬ_n = ℬ_n db₂ − (β/8)e^{βu/4}𝒜_{n−1} du,
/// d𝒜_n = −ℬ_n db₁ + (β/8)e^{βu/4}ℬ_{n−1} du, zero data at ν for n ≥ 1.
pub fn taylor_sde(driver: &BrownianDriver, n_max: usize) -> Result<TaylorPaths> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let n = driver.n_steps();
    let h = driver.config.step();
    let mut a = vec![vec![0.0; n + 1]; n_max + 1];
    let mut b = vec![vec![0.0; n + 1]; n_max + 1];
    a[0].iter_mut().for_each(|v| *v = 1.0);
    for (k, fh) in driver.half_f().enumerate() {
        let (d1, d2) = (driver.db1[k], driver.db2[k]);
        for m in 1..=n_max {
            let (am, bm) = (a[m][k], b[m][k]);
            b[m][k + 1] = bm + bm * d2 - fh * a[m - 1][k] * h;
            a[m][k + 1] = am - bm * d1 + fh * b[m - 1][k] * h;
        }
    }
    Ok(TaylorPaths { u: (0..=n).map(|k| driver.config.u(k)).collect(), a, b })
}

/// ℬ₁(0) = −(β/8)∫_ν^0 e^{−b₂(s) + (β/4 + 1/2)s} ds by the trapezoidal rule
/// on the exact exponential of the driving path.
pub fn dufresne_b1(driver: &BrownianDriver) -> f64 {
    let p = affine_path(driver);
    let c = driver.config;
    let k0 = driver.zero_index();
    let g = |k: usize| 0.5 * c.f_beta(p.u[k]) / p.y[k];
    -(0..k0).map(|k| 0.5 * (g(k) + g(k + 1)) * (p.u[k + 1] - p.u[k])).sum::<f64>()
}

/// Stationary coefficients A_n = e^{−nβu/4}𝒜_n, B_n = e^{−nβu/4}ℬ_n,
/// integrated from zero data at ν by Euler–Maruyama.
pub fn stationary_taylor(driver: &BrownianDriver, n_max: usize) -> Result<TaylorPaths> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let c = driver.config;
    if -c.nu < 10.0 * 4.0 / c.beta {
        return Err(Error::Domain(format!("burn-in |ν| = {} shorter than 10·4/β", -c.nu)));
    }
    let n = driver.n_steps();
    let h = c.step();
    let e8 = c.beta / 8.0;
    let mut a = vec![vec![0.0; n + 1]; n_max + 1];
    let mut b = vec![vec![0.0; n + 1]; n_max + 1];
    a[0].iter_mut().for_each(|v| *v = 1.0);
    for k in 0..n {
        let (d1, d2) = (driver.db1[k], driver.db2[k]);
        for m in 1..=n_max {
            let (am, bm) = (a[m][k], b[m][k]);
            let rate = 0.25 * c.beta * m as f64;
            b[m][k + 1] = bm + bm * d2 - (e8 * a[m - 1][k] + rate * bm) * h;
            a[m][k + 1] = am - bm * d1 + (e8 * b[m - 1][k] - rate * am) * h;
        }
    }
    Ok(TaylorPaths { u: (0..=n).map(|k| c.u(k)).collect(), a, b })
}

/// Phase and log-modulus paths for one λ: 2 log ℰ_{ν,u}(λ) = L + iα.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseState {
    pub lambda: f64,
    pub u: Vec<f64>,
    pub alpha: Vec<f64>,
    pub l: Vec<f64>,
}

/// Floor (or ceiling for λ < 0) that α may not fall back through.
#[derive(Clone, Copy)]
struct Ratchet {
    sign: f64,
    level: f64,
}

impl Ratchet {
    fn new(lambda: f64) -> Self {
        Ratchet { sign: if lambda < 0.0 { -1.0 } else { 1.0 }, level: 0.0 }
    }

    /// Returns true when α was clamped.
    #[inline]
    fn apply(&mut self, alpha: &mut f64) -> bool {
        let a = self.sign * *alpha;
        if a < self.level {
            *alpha = self.sign * self.level;
            return true;
        }
        while a >= self.level + 2.0 * PI {
            self.level += 2.0 * PI;
        }
        false
    }
}

/// Integrates the phase equation for one λ, recording every grid point.
pub fn phase_alpha(driver: &BrownianDriver, lambda: f64) -> PhaseState {
    let c = driver.config;
    let n = driver.n_steps();
    let h = c.step();
    let mut st = PhaseState {
        lambda,
        u: (0..=n).map(|k| c.u(k)).collect(),
        alpha: Vec::with_capacity(n + 1),
        l: Vec::with_capacity(n + 1),
    };
    let (mut alpha, mut l) = (0.0f64, 0.0f64);
    let mut ratchet = Ratchet::new(lambda);
    st.alpha.push(alpha);
    st.l.push(l);
    for k in 0..n {
        let (s, co) = alpha.sin_cos();
        let (d1, d2) = (driver.db1[k], driver.db2[k]);
        alpha += lambda * c.f_beta(st.u[k]) * h + (co - 1.0) * d1 + s * d2;
        l += s * d1 - (co - 1.0) * d2;
        ratchet.apply(&mut alpha);
        st.alpha.push(alpha);
        st.l.push(l);
    }
    st
}

/// sin and cos of a small angle by truncated Taylor series; the error is
/// below 1e−16 for |d| < 0.05 and below 6e−9 for |d| < 0.5.
#[inline(always)]
fn small_sin_cos(d: f64) -> (f64, f64) {
    let d2 = d * d;
    let s = d * (1.0 - d2 / 6.0 * (1.0 - d2 / 20.0 * (1.0 - d2 / 42.0)));
    let c = 1.0 - d2 / 2.0 * (1.0 - d2 / 12.0 * (1.0 - d2 / 30.0 * (1.0 - d2 / 56.0)));
    (s, c)
}

/// α_λ(0) for many λ on the same driver.
pub fn alpha_at_zero(driver: &BrownianDriver, lambdas: &[f64]) -> Vec<f64> {
    alpha_slope_at_zero(driver, lambdas).0
}

/// α_λ(0) and its derivative in λ for the discrete scheme, for many λ on the
/// same driver.
///
/// A negative λ is run as |λ| against the driver with db1 reversed, where the
/// phase is −α and stays non-negative, so every lane shares one ratchet
/// rule. The phase is carried together with its (cos, sin), advanced by
/// rotation through the increment and resynchronised every 256 steps.
pub fn alpha_slope_at_zero(driver: &BrownianDriver, lambdas: &[f64]) -> (Vec<f64>, Vec<f64>) {
    const RESYNC: usize = 256;
    let c = driver.config;
    let k0 = driver.zero_index();
    let h = c.step();
    let m = lambdas.len();
    let mag: Vec<f64> = lambdas.iter().map(|l| l.abs()).collect();
    let sgn: Vec<f64> = lambdas.iter().map(|&l| if l < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut a = vec![0.0f64; m];
    let mut co = vec![1.0f64; m];
    let mut si = vec![0.0f64; m];
    let mut p = vec![0.0f64; m];
    let mut lvl = vec![0.0f64; m];
    let two_pi = 2.0 * PI;
    let growth = (0.25 * c.beta * h).exp();
    let mut fh = 0.0;
    for k in 0..k0 {
        if k % RESYNC == 0 {
            fh = c.f_beta(c.u(k)) * h;
            for i in 0..m {
                let (s, cc) = a[i].sin_cos();
                si[i] = s;
                co[i] = cc;
            }
        }
        let (d1, d2) = (driver.db1[k], driver.db2[k]);
        let mut big = false;
        let (a, co, si, p, lvl) = (&mut a[..m], &mut co[..m], &mut si[..m], &mut p[..m], &mut lvl[..m]);
        let (mag, sgn) = (&mag[..m], &sgn[..m]);
        for i in 0..m {
            let e1 = sgn[i] * d1;
            let (ci, s) = (co[i], si[i]);
            let d = mag[i] * fh + (ci - 1.0) * e1 + s * d2;
            big |= d.abs() >= 0.5;
            let pn = p[i] * (1.0 - s * e1 + ci * d2) + fh;
            let an = a[i] + d;
            let (sd, cd) = small_sin_cos(d);
            let clamped = an < lvl[i];
            a[i] = if clamped { lvl[i] } else { an };
            co[i] = if clamped { 1.0 } else { ci * cd - s * sd };
            si[i] = if clamped { 0.0 } else { s * cd + ci * sd };
            p[i] = if clamped { 0.0 } else { pn };
            lvl[i] = if a[i] >= lvl[i] + two_pi { lvl[i] + two_pi } else { lvl[i] };
        }
        if big {
            // Rare large increments: the series and the one-step ratchet
            // update are not accurate enough, so recompute both directly.
            for i in 0..m {
                let (s, cc) = a[i].sin_cos();
                si[i] = s;
                co[i] = cc;
                lvl[i] = lvl[i].max(two_pi * (a[i] / two_pi).floor());
            }
        }
        fh *= growth;
    }
    for i in 0..m {
        a[i] *= sgn[i];
    }
    (a, p)
}

/// Eigenvalues of the truncated operator in [−r, r] for one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SineBetaSample {
    pub seed: u64,
    pub replicate: u64,
    pub q: f64,
    /// U = 2 arg(q − i) mod 2π: the eigenvalues solve α_λ(0) ∈ U + 2πℤ.
    pub level: f64,
    pub eigenvalues: Vec<f64>,
    /// (λ, α_λ(0)) on the coarse grid used for isolation.
    pub grid: Vec<(f64, f64)>,
}

impl SineBetaSample {
    /// max over grid λ > 0 of |#(Λ ∩ [0, λ]) − α_λ(0)/2π|.
    pub fn counting_deviation(&self) -> f64 {
        self.grid
            .iter()
            .filter(|(l, _)| *l > 0.0)
            .map(|&(l, a)| {
                let count = self.eigenvalues.iter().filter(|&&x| x >= 0.0 && x <= l).count() as f64;
                (count - a / (2.0 * PI)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Σ_{|λ_k| ≤ r} 1/λ_k.
    pub fn pv_trace(&self, r: f64) -> f64 {
        self.eigenvalues.iter().filter(|x| x.abs() <= r).map(|x| 1.0 / x).sum()
    }
}

/// Root bracket for one level crossing and the next trial point.
struct Bracket {
    lo: f64,
    hi: f64,
    level: f64,
    x: f64,
}

/// Number of levels U + 2πm inside (min(a, b), max(a, b)].
fn level_index(alpha: f64, level: f64) -> f64 {
    ((alpha - level) / (2.0 * PI)).floor()
}

/// Grid spacing of the first isolation pass.
const COARSE_SPACING: f64 = PI;

/// Finds all λ ∈ [−r, r] with α_λ(0) ∈ U + 2πℤ: coarse grid, splitting of
/// intervals holding several levels, then batched Newton iterations kept
/// inside the bracket, to 1e−8(1 + |λ|).
pub fn sample_sine_beta(driver: &BrownianDriver, r: f64) -> Result<SineBetaSample> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("window radius {r} must be positive and finite")));
    }
    let q = driver.draw_q();
    let level = (2.0 * (C64::new(q, -1.0)).arg()).rem_euclid(2.0 * PI);

    let m = ((r / COARSE_SPACING).ceil() as usize).max(2);
    let mut lams: Vec<f64> = (1..=m).map(|i| r * i as f64 / m as f64).collect();
    lams.extend((1..=m).map(|i| -r * i as f64 / m as f64));
    let (alphas, slopes) = alpha_slope_at_zero(driver, &lams);
    // (λ, α, ∂α/∂λ)
    let mut pts: Vec<(f64, f64, f64)> = lams.into_iter().zip(alphas).zip(slopes).map(|((l, a), s)| (l, a, s)).collect();
    pts.push((0.0, 0.0, 0.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    type Pt = (f64, f64, f64);
    // Intervals [λa, λb] oriented away from 0, so α moves away from 0 too.
    let mut pending: Vec<(Pt, Pt)> =
        pts.windows(2).map(|w| if w[0].0 >= 0.0 { (w[0], w[1]) } else { (w[1], w[0]) }).collect();
    let count = |a: Pt, b: Pt| -> i64 {
        let d = if b.0 >= a.0 {
            level_index(b.1, level) - level_index(a.1, level)
        } else {
            level_index(a.1, level) - level_index(b.1, level)
        };
        d.max(0.0) as i64
    };
    let mut brackets: Vec<Bracket> = Vec::new();
    let mut eigen: Vec<f64> = Vec::new();
    let mut depth = 0;
    while !pending.is_empty() {
        depth += 1;
        let mut split: Vec<(Pt, Pt)> = Vec::new();
        for (a, b) in pending.drain(..) {
            match count(a, b) {
                0 => {}
                1 => {
                    let target = if b.0 >= a.0 {
                        level + 2.0 * PI * level_index(b.1, level)
                    } else {
                        // Levels below 0 are U − 2π(j+1); α is decreasing.
                        level + 2.0 * PI * (level_index(b.1, level) + 1.0)
                    };
                    let (lo, hi) = if a.0 < b.0 { (a, b) } else { (b, a) };
                    // Start from a Newton step off the nearer end, or the
                    // secant when that leaves the bracket.
                    let (glo, ghi) = (lo.1 - target, hi.1 - target);
                    let near = if glo.abs() < ghi.abs() { lo } else { hi };
                    let secant = lo.0 - glo * (hi.0 - lo.0) / (ghi - glo);
                    let x0 = if near.2 > 0.0 { near.0 - (near.1 - target) / near.2 } else { secant };
                    let x = if x0 > lo.0 && x0 < hi.0 { x0 } else { secant };
                    brackets.push(Bracket { lo: lo.0, hi: hi.0, level: target, x });
                }
                c => {
                    if (b.0 - a.0).abs() <= 1e-8 * (1.0 + a.0.abs()) || depth > 60 {
                        // Levels closer than the tolerance: report them together.
                        for _ in 0..c {
                            eigen.push(0.5 * (a.0 + b.0));
                        }
                    } else {
                        split.push((a, b));
                    }
                }
            }
        }
        if split.is_empty() {
            break;
        }
        let mids: Vec<f64> = split.iter().map(|(a, b)| 0.5 * (a.0 + b.0)).collect();
        let (vals, ders) = alpha_slope_at_zero(driver, &mids);
        for (k, (a, b)) in split.into_iter().enumerate() {
            let mp = (mids[k], vals[k], ders[k]);
            pts.push(mp);
            pending.push((a, mp));
            pending.push((mp, b));
        }
    }

    let tol = |x: f64| 1e-8 * (1.0 + x.abs());
    let mut active: Vec<usize> = (0..brackets.len()).collect();
    for _ in 0..200 {
        if active.is_empty() {
            break;
        }
        let trial: Vec<f64> = active.iter().map(|&i| brackets[i].x).collect();
        let (vals, ders) = alpha_slope_at_zero(driver, &trial);
        let mut next = Vec::with_capacity(active.len());
        for (k, &i) in active.iter().enumerate() {
            let b = &mut brackets[i];
            let x = trial[k];
            let g = vals[k] - b.level;
            let prev_width = b.hi - b.lo;
            if g < 0.0 {
                b.lo = x;
            } else if g > 0.0 {
                b.hi = x;
            } else {
                b.lo = x;
                b.hi = x;
            }
            let step = if ders[k] > 0.0 { g / ders[k] } else { f64::INFINITY };
            let converged = b.hi - b.lo <= tol(x) || step.abs() <= 0.25 * tol(x);
            if converged {
                b.x = x - if step.is_finite() { step } else { 0.0 };
                b.x = b.x.clamp(b.lo, b.hi);
                continue;
            }
            let newton = x - step;
            let shrunk = b.hi - b.lo <= 0.5 * prev_width || prev_width <= 0.0;
            b.x = if newton > b.lo && newton < b.hi && (shrunk || step.abs() < 0.25 * (b.hi - b.lo)) {
                newton
            } else {
                0.5 * (b.lo + b.hi)
            };
            next.push(i);
        }
        active = next;
    }
    if let Some(&i) = active.first() {
        let b = &brackets[i];
        return Err(Error::Bracket { lo: b.lo, hi: b.hi, reason: "root refinement did not converge".into() });
    }
    eigen.extend(brackets.iter().map(|b| b.x));
    eigen.sort_by(|a, b| a.total_cmp(b));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let grid = pts.into_iter().map(|(l, a, _)| (l, a)).collect();
    Ok(SineBetaSample { seed: driver.seed, replicate: driver.replicate, q, level, eigenvalues: eigen, grid })
}

/// Σ_{|λ_k| ≤ r} 1/λ_k over the replicate's eigenvalues.
pub fn pv_trace_sample(driver: &BrownianDriver, r: f64) -> Result<f64> {
    let s = sample_sine_beta(driver, r)?;
    if s.eigenvalues.len() < 20 {
        return Err(Error::Domain(format!("window r = {r} holds only {} points", s.eigenvalues.len())));
    }
    Ok(s.pv_trace(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_test, MCEstimate};

    fn cfg(beta: f64, delta: f64, h: f64) -> SdeConfig {
        SdeConfig::with_truncation(beta, delta, h).unwrap()
    }

    #[test]
    fn config_grid_hits_zero_and_validates() {
        let c = SdeConfig::new(2.0, -1.0, 0.3, 0.5).unwrap();
        assert_eq!(c.steps_to_zero(), 4);
        assert_eq!(c.u(0), -1.0);
        assert_eq!(c.u(4), 0.0);
        assert!(c.u(c.n_steps()) >= 0.5);
        assert!(SdeConfig::new(0.0, -1.0, 0.1, 0.0).is_err());
        assert!(SdeConfig::new(1.0, 1.0, 0.1, 0.0).is_err());
        assert!((cfg(4.0, 0.5, 1e-3).truncation() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn driver_is_deterministic_with_correct_variance() {
        let c = SdeConfig::new(2.0, -200.0, 2e-4, 0.0).unwrap();
        let d1 = make_driver(9, 3, c);
        let d2 = make_driver(9, 3, c);
        assert_eq!(d1.db1, d2.db1);
        assert_eq!(d1.db2, d2.db2);
        assert_ne!(make_driver(9, 4, c).db1[0], d1.db1[0]);
        let n = d1.n_steps() as f64;
        let h = c.step();
        let var = d1.db1.iter().map(|x| x * x).sum::<f64>() / n;
        // Var of x² is 2h², so the standard error of the mean square is h√(2/n).
        assert!((var - h).abs() < 3.0 * h * (2.0 / n).sqrt());
        let corr = d1.db1.iter().zip(&d1.db2).map(|(a, b)| a * b).sum::<f64>() / n / h;
        assert!(corr.abs() < 3.0 / n.sqrt());
    }

    #[test]
    fn zero_noise_path_is_deterministic_drift() {
        let c = SdeConfig::new(2.0, -3.0, 1e-2, 0.0).unwrap();
        let p = affine_path(&BrownianDriver::zeroed(c));
        for k in 0..p.u.len() {
            assert!((p.y[k] - (-0.5 * p.u[k]).exp()).abs() < 1e-12);
            assert_eq!(p.x[k], 0.0);
        }
        let real = affine_path(&make_driver(1, 0, c));
        let k0 = c.steps_to_zero();
        assert_eq!(real.x[k0], 0.0);
        assert!((real.y[k0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn h_is_trivial_at_zero_and_reflects() {
        let d = make_driver(2, 0, cfg(2.0, 1e-2, 1e-3));
        let zs = [C64::new(0.0, 0.0), C64::new(1.5, 0.7), C64::new(1.5, -0.7)];
        let p = simulate_h(&d, &zs, 0).unwrap();
        assert_eq!(p.at_zero[0], [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        for j in 0..2 {
            assert!((p.at_zero[1][j] - p.at_zero[2][j].conj()).norm() < 1e-12);
        }
        let s = sample_zeta(&d, &zs).unwrap();
        assert_eq!(s.zeta(0), C64::new(1.0, 0.0));
        let hz = s.hatzeta(1) * (1.0 + s.q * s.q).sqrt();
        assert!((hz - s.zeta(1)).norm() < 1e-12 * (1.0 + hz.norm()));
    }

    #[test]
    fn euler_taylor_coefficients_match_euler_h_exactly() {
        // Differentiating the Euler recursion in z gives the Euler recursion
        // of the coefficient system, so ζ must equal its Taylor polynomial.
        let d = make_driver(5, 0, cfg(2.0, 1e-2, 2e-3));
        let tp = taylor_sde(&d, 40).unwrap();
        let k0 = d.zero_index();
        let (a, b) = tp.at_zero(k0);
        for &z in &[C64::new(0.7, 0.0), C64::new(-1.0, 0.5)] {
            let h = simulate_h(&d, &[z], 0).unwrap().at_zero[0];
            let mut sa = C64::new(0.0, 0.0);
            let mut sb = C64::new(0.0, 0.0);
            let mut zn = C64::new(1.0, 0.0);
            for n in 0..=40 {
                sa += zn * a[n];
                sb += zn * b[n];
                zn *= z;
            }
            assert!((sa - h[0]).norm() < 1e-10 && (sb - h[1]).norm() < 1e-10);
        }
        assert!(tp.a[0].iter().all(|&v| v == 1.0) && tp.b[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dufresne_quadrature_agrees_with_taylor_sde() {
        let d = make_driver(8, 1, cfg(2.0, 1e-6, 1e-3));
        let q = dufresne_b1(&d);
        let tp = taylor_sde(&d, 1).unwrap();
        let e = tp.b[1][d.zero_index()];
        assert!(q < 0.0);
        assert!((q - e).abs() < 0.05 * q.abs(), "{q} vs {e}");
    }

    #[test]
    fn stationary_transform_holds_pathwise() {
        let c = cfg(4.0, 1e-6, 1e-4);
        let d = make_driver(3, 0, c);
        let s = stationary_taylor(&d, 1).unwrap();
        let t = taylor_sde(&d, 1).unwrap();
        let k0 = d.zero_index();
        for k in [k0 / 2, k0] {
            let scaled = (-c.beta * s.u[k] / 4.0).exp() * t.b[1][k];
            assert!((s.b[1][k] - scaled).abs() < 1e-2 * scaled.abs().max(0.1), "{} vs {scaled}", s.b[1][k]);
            let scaled_a = (-c.beta * s.u[k] / 4.0).exp() * t.a[1][k];
            assert!((s.a[1][k] - scaled_a).abs() < 1e-2 * scaled_a.abs().max(0.1));
        }
        assert!(stationary_taylor(&make_driver(0, 0, cfg(4.0, 0.5, 1e-3)), 1).is_err());
    }

    #[test]
    fn stationary_b1_has_dufresne_law() {
        let beta = 4.0;
        let c = SdeConfig::new(beta, -12.0, 2e-3, 0.0).unwrap();
        let samples: Vec<f64> = (0..400)
            .map(|r| {
                let d = make_driver(17, r, c);
                let s = stationary_taylor(&d, 1).unwrap();
                beta / (4.0 * -s.b[1][d.zero_index()])
            })
            .collect();
        let g = statrs::distribution::Gamma::new(1.0 + beta / 2.0, 1.0).unwrap();
        use statrs::distribution::ContinuousCDF;
        assert!(ks_test(&samples, |x| g.cdf(x)).unwrap().p_value > 1e-3);
    }

    #[test]
    fn phase_vanishes_at_zero_and_is_monotone_in_lambda() {
        let d = make_driver(4, 2, cfg(2.0, 1e-2, 1e-3));
        let p0 = phase_alpha(&d, 0.0);
        assert!(p0.alpha.iter().all(|&a| a == 0.0) && p0.l.iter().all(|&a| a == 0.0));
        let lams: Vec<f64> = (0..60).map(|i| -15.0 + 0.5 * i as f64).collect();
        let a = alpha_at_zero(&d, &lams);
        assert!(a.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{a:?}");
        // The rotated (cos, sin) agrees with direct evaluation.
        for (&l, &al) in lams.iter().zip(&a).step_by(7) {
            let direct = *phase_alpha(&d, l).alpha.get(d.zero_index()).unwrap();
            assert!((direct - al).abs() < 1e-8, "{l}: {direct} vs {al}");
        }
    }

    #[test]
    fn phase_slope_matches_finite_difference() {
        let d = make_driver(8, 1, cfg(4.0, 1e-2, 1e-3));
        let lams = [-23.7, -4.1, 2.9, 17.3];
        let (_, slope) = alpha_slope_at_zero(&d, &lams);
        let eps = 1e-6;
        let up: Vec<f64> = lams.iter().map(|l| l + eps).collect();
        let dn: Vec<f64> = lams.iter().map(|l| l - eps).collect();
        let (au, ad) = (alpha_at_zero(&d, &up), alpha_at_zero(&d, &dn));
        for i in 0..lams.len() {
            let fd = (au[i] - ad[i]) / (2.0 * eps);
            assert!((fd - slope[i]).abs() < 1e-4 * (1.0 + fd.abs()), "{}: {fd} vs {}", lams[i], slope[i]);
        }
    }

    #[test]
    fn phase_never_falls_back_through_a_multiple() {
        let d = make_driver(6, 0, cfg(1.0, 1e-2, 1e-2));
        let p = phase_alpha(&d, 8.0);
        let mut floor: f64 = 0.0;
        for &a in &p.alpha {
            assert!(a >= floor - 1e-12);
            floor = floor.max((a / (2.0 * PI)).floor() * 2.0 * PI);
        }
    }

    #[test]
    fn phase_mean_matches_drift_integral() {
        let c = cfg(2.0, 0.1, 2e-3);
        let lam = 3.0;
        let vals: Vec<f64> = (0..400).map(|r| alpha_at_zero(&make_driver(21, r, c), &[lam])[0]).collect();
        let e = MCEstimate::from_real(&vals, 21).unwrap();
        assert!(e.within(C64::new(lam * (1.0 - c.truncation()), 0.0), 3.0), "{e:?}");
    }

    #[test]
    fn eigenvalues_are_level_crossings_and_zeros_of_zeta() {
        let c = cfg(2.0, 1e-2, 1e-4);
        let d = make_driver(12, 0, c);
        let s = sample_sine_beta(&d, 30.0).unwrap();
        assert!(!s.eigenvalues.is_empty());
        assert!(s.counting_deviation() <= 1.05);
        for &l in &s.eigenvalues {
            let a = alpha_at_zero(&d, &[l])[0];
            let off = (a - s.level).rem_euclid(2.0 * PI);
            assert!(off.min(2.0 * PI - off) < 1e-6, "λ = {l}: α = {a}, U = {}", s.level);
        }
        // The two Euler schemes converge strongly at order ½, so the zeros of
        // the real function 𝒜 − qℬ sit within a few √h of the eigenvalues.
        for &l in s.eigenvalues.iter().filter(|l| l.abs() < 20.0) {
            let eps = 0.1;
            let z = simulate_h(&d, &[C64::new(l - eps, 0.0), C64::new(l + eps, 0.0)], 0).unwrap();
            let f = |h: [C64; 2]| (h[0] - h[1] * s.q).re;
            assert!(f(z.at_zero[0]) * f(z.at_zero[1]) < 0.0, "no sign change at {l}");
        }
    }

    #[test]
    fn pv_trace_tracks_the_integral_trace() {
        let c = cfg(4.0, 1e-3, 5e-4);
        let mut diffs = Vec::new();
        for r in 0..6 {
            let d = make_driver(31, r, c);
            let s = sample_sine_beta(&d, 150.0).unwrap();
            diffs.push((s.pv_trace(150.0) - integral_trace_sample(&d, s.q)).abs());
        }
        let med = {
            let mut v = diffs.clone();
            v.sort_by(|a, b| a.total_cmp(b));
            v[v.len() / 2]
        };
        assert!(med < 0.05, "{diffs:?}");
    }
}
