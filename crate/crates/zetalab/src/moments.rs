//! Exact moment targets for ℰ, ĥζ and ζ, the moment ODE system, and the
//! Monte Carlo harness that compares samples against them.
//!
//! Finite-ν closed forms are exact at every truncation and serve as the
//! reference whenever a limit formula and a simulation disagree.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ode;
use crate::quad;
use crate::stats::replicate_rng;
pub use crate::stats::{ks_test, KsResult, MCEstimate};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// E ĥζ(λ) = (2/π) cos(λ/2).
pub fn hatzeta_mean(lambda: f64) -> f64 {
    2.0 / PI * (0.5 * lambda).cos()
}

/// E ĥζ_ν(λ) at truncation δ = e^{βν/4}: (2/π) cos(λ(1 − δ)/2).
pub fn hatzeta_mean_truncated(lambda: f64, delta: f64) -> f64 {
    2.0 / PI * (0.5 * lambda * (1.0 - delta)).cos()
}

fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// lim E|ℰ_ν(λ)|² = 2E ĥζ(λ)² for β > 2, by quadrature of
/// 1 + (4/β)∫₀¹ t^{−4/β−1}(1 − cos λt) dt.
pub fn second_moment(beta: f64, lambda: f64) -> Result<f64> {
    if !(beta > 2.0) {
        return Err(Error::Moment(format!("second moment is infinite for β = {beta} ≤ 2")));
    }
    let p = -4.0 / beta - 1.0;
    let v = quad::graded(&mut |t: f64| t.powf(p) * one_minus_cos(lambda * t), 0.0, 1.0, 1e-14);
    Ok(1.0 + 4.0 / beta * v)
}

/// The same limit by its power series Σ (−1)^k λ^{2k} / ((2k)!(1 − βk/2)).
pub fn second_moment_series(beta: f64, lambda: f64) -> Result<f64> {
    if !(beta > 2.0) {
        return Err(Error::Moment(format!("second moment is infinite for β = {beta} ≤ 2")));
    }
    let l2 = lambda * lambda;
    let mut term = 1.0; // (−1)^k λ^{2k}/(2k)!
    let mut sum = 1.0;
    for k in 1..400 {
        let kf = k as f64;
        term *= -l2 / ((2.0 * kf - 1.0) * (2.0 * kf));
        sum += term / (1.0 - 0.5 * beta * kf);
        if term.abs() < 1e-18 * sum.abs().max(1.0) && kf > l2.sqrt() {
            break;
        }
    }
    Ok(sum)
}

/// Σ_{k≥1} (−1)^k x^{2k} / (2k (2k)!) = ∫₀^x (cos t − 1)/t dt.
fn cin_neg(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..400 {
        let kf = k as f64;
        term *= -x2 / ((2.0 * kf - 1.0) * (2.0 * kf));
        sum += term / (2.0 * kf);
        if term.abs() < 1e-18 && kf > x {
            break;
        }
    }
    sum
}

/// Ci(x) = γ + log x + ∫₀^x (cos t − 1)/t dt for x > 0.
pub fn cosine_integral(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Ci needs x > 0, got {x}")));
    }
    if x > 40.0 {
        return Err(Error::Domain(format!("series for Ci loses accuracy beyond 40, got {x}")));
    }
    Ok(EULER_GAMMA + x.ln() + cin_neg(x))
}

/// lim_{ν→−∞} (E|ℰ_ν(λ)|² + λ²ν/2) at β = 2:
/// λ²Ci|λ| − γλ² − λ² log|λ| − λ sin λ + cos λ, equal to 1 at λ = 0.
pub fn second_moment_beta2(lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let a = lambda.abs();
    let ci = cosine_integral(a)?;
    Ok(lambda * lambda * (ci - EULER_GAMMA - a.ln()) - lambda * lambda.sin() + lambda.cos())
}

/// r_*(u) = E|ℰ_{ν,u}(λ)|² = 1 + e^u ∫_ν^u e^{−s}(1 − cos(λ(e^{βs/4} − e^{βν/4}))) ds.
pub fn second_moment_finite(beta: f64, nu: f64, lambda: f64, u: f64) -> Result<f64> {
    if !(u >= nu) {
        return Err(Error::Domain(format!("need u ≥ ν, got u = {u}, ν = {nu}")));
    }
    let d = (0.25 * beta * nu).exp();
    let v = quad::adaptive(
        &mut |s: f64| (u - s).exp() * one_minus_cos(lambda * ((0.25 * beta * s).exp() - d)),
        nu,
        u,
        1e-13,
    );
    Ok(1.0 + v)
}

/// Moment system for r_η = E ∏ ℰ_{ν,u}(z_j)^{η_j}, η ∈ {±1}^k, with ℰ^{−1}
/// read as ℰ*. The index of η is the bitmask with bit j set when η_j = +1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSystem {
    pub k: usize,
    pub z: Vec<C64>,
    pub beta: f64,
    pub nu: f64,
    /// Row η of Ξ = Σ_{η_j = 1}(σ_j − 1) Σ_{η_l = −1}(σ_l − 1).
    pub xi: Vec<Vec<i64>>,
}

impl MomentSystem {
    pub fn new(z: Vec<C64>, beta: f64, nu: f64) -> Result<Self> {
        let k = z.len();
        if k == 0 || k > 12 {
            return Err(Error::Domain(format!("moment system needs 1 ≤ k ≤ 12, got {k}")));
        }
        if !(beta > 0.0) {
            return Err(Error::Domain(format!("β must be positive, got {beta}")));
        }
        let m = 1usize << k;
        let mut xi = vec![vec![0i64; m]; m];
        for (eta, row) in xi.iter_mut().enumerate() {
            for j in (0..k).filter(|j| eta >> j & 1 == 1) {
                for l in (0..k).filter(|l| eta >> l & 1 == 0) {
                    let (sj, sl) = (1 << j, 1 << l);
                    row[eta ^ sj ^ sl] += 1;
                    row[eta ^ sj] -= 1;
                    row[eta ^ sl] -= 1;
                    row[eta] += 1;
                }
            }
        }
        Ok(MomentSystem { k, z, beta, nu, xi })
    }

    pub fn eta(&self, index: usize) -> Vec<i8> {
        (0..self.k).map(|j| if index >> j & 1 == 1 { 1 } else { -1 }).collect()
    }

    pub fn index(&self, eta: &[i8]) -> usize {
        eta.iter().enumerate().filter(|(_, &e)| e > 0).map(|(j, _)| 1 << j).sum()
    }

    /// z·η for each index.
    fn z_dot_eta(&self) -> Vec<C64> {
        (0..1usize << self.k)
            .map(|i| self.z.iter().enumerate().map(|(j, &z)| if i >> j & 1 == 1 { z } else { -z }).sum())
            .collect()
    }
}

/// Solves r' = ½(i z·η f_β + Ξ) r from r(ν) = 1 up to u.
pub fn moment_ode(system: &MomentSystem, u: f64) -> Result<Vec<C64>> {
    if !(u >= system.nu) {
        return Err(Error::Domain(format!("need u ≥ ν, got u = {u}, ν = {}", system.nu)));
    }
    let m = 1usize << system.k;
    let zeta = system.z_dot_eta();
    let beta = system.beta;
    let xi = &system.xi;
    let f = |t: f64, r: &[C64], d: &mut [C64]| {
        let fb = 0.25 * beta * (0.25 * beta * t).exp();
        for e in 0..m {
            let mut acc = C64::i() * zeta[e] * fb * r[e];
            for (c, &x) in xi[e].iter().enumerate() {
                if x != 0 {
                    acc += r[c] * x as f64;
                }
            }
            d[e] = 0.5 * acc;
        }
    };
    ode::integrate(f, system.nu, u, &vec![C64::new(1.0, 0.0); m], 1e-13, 1e-15)
}

/// E ∏ ℰ_{ν,u}(z_j) = exp((i/2)Σz_j (e^{βu/4} − e^{βν/4})); the η = ±𝟙 rows
/// of the moment system.
pub fn all_one_moment(zs: &[C64], sign: i8, beta: f64, nu: f64, u: f64) -> C64 {
    let s: C64 = zs.iter().sum::<C64>() * sign as f64;
    (C64::i() * 0.5 * s * ((0.25 * beta * u).exp() - (0.25 * beta * nu).exp())).exp()
}

/// Limit E ∏ ℰ(λ_j) = ∏ e^{iλ_j/2}, claimed when k < 1 + β/2.
pub fn e_product_mean(lambdas: &[f64], beta: f64) -> Result<C64> {
    let k = lambdas.len() as f64;
    if k >= 1.0 + 0.5 * beta {
        return Err(Error::Moment(format!("k = {k} moments need k < 1 + β/2 = {}", 1.0 + 0.5 * beta)));
    }
    Ok(lambdas.iter().map(|&l| C64::new(0.0, 0.5 * l).exp()).product())
}

/// E ∏ ℰ_{ν,u}(z_j)^{η_j} with genuine reciprocals, for Im z_j < 0:
/// exp((i/2) s (e^{βu/4} − e^{βν/4})) with s = Σ η_j z_j.
pub fn ratio_mean(zs: &[C64], etas: &[i8], beta: f64, nu: f64, u: f64) -> Result<C64> {
    if zs.len() != etas.len() {
        return Err(Error::Domain("z and η lists differ in length".into()));
    }
    if let Some(z) = zs.iter().find(|z| !(z.im < 0.0)) {
        return Err(Error::Domain(format!("ratio moments need Im z < 0, got {z}")));
    }
    if etas.iter().any(|e| e.abs() != 1) {
        return Err(Error::Domain("η entries must be ±1".into()));
    }
    let s: C64 = zs.iter().zip(etas).map(|(&z, &e)| z * e as f64).sum();
    Ok((C64::i() * 0.5 * s * ((0.25 * beta * u).exp() - (0.25 * beta * nu).exp())).exp())
}

/// E ∏ ζ(z_j)/ζ(w_j) = exp(±(i/2)Σ(z_j − w_j)), + when all Im w_j < 0 and
/// − when all Im w_j > 0. The same value holds exactly for the circular
/// ensemble's ℰ_n ratios at every n.
pub fn borodin_strahov(zs: &[C64], ws: &[C64]) -> Result<C64> {
    if zs.len() != ws.len() {
        return Err(Error::Domain("z and w lists differ in length".into()));
    }
    let s: C64 = zs.iter().sum::<C64>() - ws.iter().sum::<C64>();
    if ws.iter().all(|w| w.im < 0.0) {
        Ok((C64::i() * s * 0.5).exp())
    } else if ws.iter().all(|w| w.im > 0.0) {
        Ok((-C64::i() * s * 0.5).exp())
    } else {
        Err(Error::Domain("all w_j must lie in the same open half-plane".into()))
    }
}

fn check_lengths(a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> Result<()> {
    if a.len() != b.len() || b.len() != c.len() || c.len() != d.len() {
        return Err(Error::Domain("coefficient lists differ in length".into()));
    }
    Ok(())
}

/// Which half-plane contains every −c_j/d_j: +1 when Im(c_j/d_j) > 0 for all j.
fn cauchy_side(c: &[C64], d: &[C64]) -> Result<f64> {
    let im: Vec<f64> = c.iter().zip(d).map(|(c, d)| (c / d).im).collect();
    if im.iter().all(|v| *v > 0.0) {
        Ok(1.0)
    } else if im.iter().all(|v| *v < 0.0) {
        Ok(-1.0)
    } else {
        Err(Error::Domain("Im(c_j/d_j) must be nonzero with a common sign".into()))
    }
}

/// E ∏ (a_j + q b_j)/(c_j + q d_j) for standard Cauchy q.
pub fn cauchy_average(a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> Result<C64> {
    check_lengths(a, b, c, d)?;
    let s = C64::new(0.0, cauchy_side(c, d)?);
    Ok((0..a.len()).map(|j| (a[j] + s * b[j]) / (c[j] + s * d[j])).product())
}

/// The Cauchy average by quadrature in θ with q = tan θ.
pub fn cauchy_average_quad(a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> Result<C64> {
    check_lengths(a, b, c, d)?;
    cauchy_side(c, d)?;
    let r = |th: f64| {
        let q = th.tan();
        (0..a.len()).map(|j| (a[j] + b[j] * q) / (c[j] + d[j] * q)).product::<C64>() / PI
    };
    let h = 0.5 * PI;
    let re = quad::adaptive(&mut |t| r(t).re, -h, h, 1e-12);
    let im = quad::adaptive(&mut |t| r(t).im, -h, h, 1e-12);
    Ok(C64::new(re, im))
}

fn check_circle(c: &[C64], d: &[C64]) -> Result<()> {
    if c.iter().zip(d).any(|(c, d)| !(d.norm() < c.norm())) {
        return Err(Error::Domain("circle average needs |d_j| < |c_j|".into()));
    }
    Ok(())
}

/// (1/2π)∫₀^{2π} ∏ (a_j − e^{it} b_j)/(c_j − e^{it} d_j) dt = ∏ a_j/c_j.
pub fn circle_average(a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> Result<C64> {
    check_lengths(a, b, c, d)?;
    check_circle(c, d)?;
    Ok(a.iter().zip(c).map(|(a, c)| a / c).product())
}

/// The circle average by the periodic trapezoidal rule, doubled until stable.
pub fn circle_average_quad(a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> Result<C64> {
    check_lengths(a, b, c, d)?;
    check_circle(c, d)?;
    let rule = |n: usize| {
        (0..n)
            .map(|i| {
                let e = C64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64);
                (0..a.len()).map(|j| (a[j] - e * b[j]) / (c[j] - e * d[j])).product::<C64>()
            })
            .sum::<C64>()
            / n as f64
    };
    let mut n = 64;
    let mut prev = rule(n);
    while n < 1 << 22 {
        n *= 2;
        let cur = rule(n);
        if (cur - prev).norm() <= 1e-14 * cur.norm().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Domain("trapezoidal rule did not converge; |d_j|/|c_j| too close to 1".into()))
}

/// r_* = E[ℰ_ν(λ₁) ℰ*_ν(λ₂)] at time u, written r_* = 1 + e^u a + i b with
/// a' = −(Δ/2)e^{−u} f_β b + e^{−u}(1 − cos(λ̄(e^{βu/4} − e^{βν/4}))),
/// b' = e^u (Δ/2) f_β a + (Δ/2) f_β, Δ = λ₁ − λ₂, λ̄ = (λ₁ + λ₂)/2.
pub fn two_point(beta: f64, nu: f64, l1: f64, l2: f64, u: f64) -> Result<C64> {
    if !(u >= nu) {
        return Err(Error::Domain(format!("need u ≥ ν, got u = {u}, ν = {nu}")));
    }
    let half_d = 0.5 * (l1 - l2);
    let mean = 0.5 * (l1 + l2);
    let delta = (0.25 * beta * nu).exp();
    let f = |t: f64, y: &[C64], dy: &mut [C64]| {
        let fb = 0.25 * beta * (0.25 * beta * t).exp();
        let (a, b) = (y[0].re, y[1].re);
        let c = one_minus_cos(mean * ((0.25 * beta * t).exp() - delta));
        dy[0] = C64::new(-half_d * (-t).exp() * fb * b + (-t).exp() * c, 0.0);
        dy[1] = C64::new(t.exp() * half_d * fb * a + half_d * fb, 0.0);
    };
    let y = ode::integrate(f, nu, u, &[C64::new(0.0, 0.0); 2], 1e-13, 1e-15)?;
    Ok(C64::new(1.0 + u.exp() * y[0].re, y[1].re))
}

/// Runs `sample(replicate)` for replicates 0..n and summarizes the results.
/// The sum is taken in replicate order, so the estimate does not depend on
/// the number of workers.
pub fn mc_run<F>(n: usize, seed: u64, workers: Option<usize>, sample: F) -> Result<MCEstimate>
where
    F: Fn(u64) -> Result<C64> + Sync + Send,
{
    let values = mc_collect(n, workers, sample)?;
    MCEstimate::from_samples(&values, seed)
}

/// Collects `sample(replicate)` for replicates 0..n in order.
pub fn mc_collect<T, F>(n: usize, workers: Option<usize>, sample: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let run = || (0..n as u64).into_par_iter().map(&sample).collect::<Result<Vec<T>>>();
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Euler–Maruyama for the linear diffusion dX = ηX dt + bX cos(W) dW, whose
/// noise coefficient is bounded by b|X|. The mean is X₀e^{ηt} in continuous
/// time and X₀(1 + ηh)^{t/h} for the scheme, so this calibrates the
/// integrator and the harness together.
pub fn linear_sde_sample(eta: f64, b: f64, x0: f64, t: f64, h: f64, seed: u64, replicate: u64) -> f64 {
    let n = (t / h).ceil() as usize;
    let h = t / n as f64;
    let sd = h.sqrt();
    let mut rng = replicate_rng(seed, replicate);
    let (mut x, mut w) = (x0, 0.0f64);
    for _ in 0..n {
        let dw = sd * rng.sample::<f64, _>(StandardNormal);
        x += eta * x * h + b * x * w.cos() * dw;
        w += dw;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn hatzeta_mean_values() {
        assert!((hatzeta_mean(0.0) - 0.636_619_772_367_581_4).abs() < 1e-15);
        assert!(hatzeta_mean(PI).abs() < 1e-16);
        assert_eq!(hatzeta_mean_truncated(1.3, 0.0), hatzeta_mean(1.3));
    }

    #[test]
    fn second_moment_quadrature_matches_series() {
        for &beta in &[3.0, 4.0, 8.0] {
            for i in 0..=20 {
                let l = 0.5 * i as f64;
                let q = second_moment(beta, l).unwrap();
                let s = second_moment_series(beta, l).unwrap();
                assert!((q - s).abs() < 1e-10, "β={beta} λ={l}: {q} vs {s}");
            }
        }
        // Partial sums 1 + 1/2 − 1/72 + 1/3600 − … settle at 1.4863853762353.
        assert!((second_moment_series(4.0, 1.0).unwrap() - 1.486_385_376_235_3).abs() < 1e-12);
        assert_eq!(second_moment(4.0, 0.0).unwrap(), 1.0);
        assert!(second_moment(2.0, 1.0).is_err());
    }

    #[test]
    fn second_moment_is_the_deep_truncation_limit() {
        // e^{βν/4} = 1e−12 leaves a bias far below the tolerance.
        let beta = 4.0;
        let nu = 4.0 / beta * (1e-12f64).ln();
        let lim = second_moment(beta, 1.7).unwrap();
        let fin = second_moment_finite(beta, nu, 1.7, 0.0).unwrap();
        assert!((lim - fin).abs() < 1e-8, "{lim} vs {fin}");
    }

    #[test]
    fn beta2_renormalized_limit() {
        for &l in &[0.3, 1.0, 2.5, 6.0] {
            let closed = second_moment_beta2(l).unwrap();
            let series = 1.0 - 1.5 * l * l
                + (2..60)
                    .map(|k| {
                        let kf = k as f64;
                        let fact: f64 = (1..=2 * k).map(|i| i as f64).product();
                        (-1f64).powi(k + 1) * l.powi(2 * k) / ((kf - 1.0) * fact)
                    })
                    .sum::<f64>();
            assert!((closed - series).abs() < 1e-9, "{closed} vs {series}");
            // Independent route: finite-ν quadrature plus λ²ν/2.
            let nu = -60.0;
            let fin = second_moment_finite(2.0, nu, l, 0.0).unwrap() + l * l * nu / 2.0;
            assert!((closed - fin).abs() < 1e-6, "λ={l}: {closed} vs {fin}");
        }
        assert_eq!(second_moment_beta2(0.0).unwrap(), 1.0);
        assert_eq!(second_moment_beta2(-1.2).unwrap(), second_moment_beta2(1.2).unwrap());
    }

    #[test]
    fn cosine_integral_reference_values() {
        // Ci(1) and Ci(5) from standard tables.
        assert!((cosine_integral(1.0).unwrap() - 0.337_403_922_900_968_1).abs() < 1e-13);
        assert!((cosine_integral(5.0).unwrap() + 0.190_029_749_656_643_9).abs() < 1e-12);
    }

    #[test]
    fn xi_rows_follow_the_involutions() {
        let s = MomentSystem::new(vec![C64::new(1.0, 0.0); 2], 2.0, -1.0).unwrap();
        let i = s.index(&[1, -1]);
        let mut expect = vec![0i64; 4];
        expect[s.index(&[-1, 1])] += 1;
        expect[s.index(&[-1, -1])] -= 1;
        expect[s.index(&[1, 1])] -= 1;
        expect[i] += 1;
        assert_eq!(s.xi[i], expect);
        assert!(s.xi[s.index(&[1, 1])].iter().all(|&x| x == 0));
        assert!(s.xi[s.index(&[-1, -1])].iter().all(|&x| x == 0));
        assert_eq!(s.eta(i), vec![1, -1]);
    }

    #[test]
    fn moment_ode_reduces_to_exponential_on_constant_signs() {
        let zs = vec![C64::new(1.0, 0.3), C64::new(-0.4, 2.0), C64::new(2.0, -1.0)];
        let (beta, nu) = (3.0, -4.0);
        let s = MomentSystem::new(zs.clone(), beta, nu).unwrap();
        let r = moment_ode(&s, 0.5).unwrap();
        let up = all_one_moment(&zs, 1, beta, nu, 0.5);
        let down = all_one_moment(&zs, -1, beta, nu, 0.5);
        assert!((r[s.index(&[1, 1, 1])] - up).norm() < 1e-10);
        assert!((r[s.index(&[-1, -1, -1])] - down).norm() < 1e-10);
    }

    #[test]
    fn two_point_routes_agree() {
        let (beta, nu) = (4.0, 4.0f64.recip() * 4.0 * 0.5f64.ln());
        let l = 1.0;
        let s = MomentSystem::new(vec![C64::new(l, 0.0); 2], beta, nu).unwrap();
        let r = moment_ode(&s, 0.0).unwrap()[s.index(&[1, -1])];
        let q = second_moment_finite(beta, nu, l, 0.0).unwrap();
        let t = two_point(beta, nu, l, l, 0.0).unwrap();
        assert!((r - q).norm() < 1e-10 && (t - q).norm() < 1e-10, "{r} {t} {q}");
        let (l1, l2) = (1.3, -0.4);
        let s = MomentSystem::new(vec![C64::new(l1, 0.0), C64::new(l2, 0.0)], beta, -3.0).unwrap();
        let r = moment_ode(&s, 0.0).unwrap()[s.index(&[1, -1])];
        let t = two_point(beta, -3.0, l1, l2, 0.0).unwrap();
        assert!((r - t).norm() < 1e-9, "{r} vs {t}");
    }

    #[test]
    fn product_and_ratio_means() {
        assert!((e_product_mean(&[PI], 4.0).unwrap() - C64::i()).norm() < 1e-15);
        assert_eq!(e_product_mean(&[], 1.0).unwrap(), C64::new(1.0, 0.0));
        assert!(e_product_mean(&[1.0, 1.0], 2.0).is_err());
        let nu = 4.0 / 4.0 * 0.5f64.ln();
        let r = ratio_mean(&[C64::new(0.0, -1.0)], &[1], 4.0, nu, 0.0).unwrap();
        assert!((r - 0.25f64.exp()).norm() < 1e-14);
        assert!(ratio_mean(&[C64::new(0.0, 1.0)], &[1], 4.0, nu, 0.0).is_err());
        let b = borodin_strahov(&[C64::i()], &[-C64::i()]).unwrap();
        assert!((b - (-1.0f64).exp()).norm() < 1e-15);
        assert!(borodin_strahov(&[C64::i(), C64::i()], &[C64::i(), -C64::i()]).is_err());
    }

    #[test]
    fn averages_match_quadrature() {
        let one = [C64::new(1.0, 0.0)];
        let v = cauchy_average(&one, &[C64::new(0.0, 0.0)], &[C64::i()], &one).unwrap();
        assert!((v - C64::new(0.0, -0.5)).norm() < 1e-15);
        let a = [C64::new(1.0, 2.0), C64::new(-0.5, 0.3)];
        let b = [C64::new(0.2, -1.0), C64::new(1.0, 1.0)];
        let c = [C64::new(0.3, -2.0), C64::new(1.0, -0.7)];
        let d = [C64::new(1.0, 0.1), C64::new(0.5, 0.0)];
        let closed = cauchy_average(&a, &b, &c, &d).unwrap();
        let quad = cauchy_average_quad(&a, &b, &c, &d).unwrap();
        assert!((closed - quad).norm() < 1e-8, "{closed} vs {quad}");

        let v = circle_average(&[C64::new(2.0, 0.0)], &one, &[C64::new(3.0, 0.0)], &one).unwrap();
        assert!((v - 2.0 / 3.0).norm() < 1e-15);
        let cc = [C64::new(2.0, 1.0), C64::new(0.0, 1.5)];
        let dd = [C64::new(1.0, -1.0), C64::new(0.9, 0.2)];
        let closed = circle_average(&a, &b, &cc, &dd).unwrap();
        let quad = circle_average_quad(&a, &b, &cc, &dd).unwrap();
        assert!((closed - quad).norm() < 1e-8, "{closed} vs {quad}");
        assert!(circle_average(&one, &one, &one, &[C64::new(2.0, 0.0)]).is_err());
    }

    #[test]
    fn linear_sde_calibration() {
        let (eta, b, x0, t) = (0.7, 0.5, 1.5, 1.0);
        let e = mc_run(4000, 77, None, |r| Ok(C64::new(linear_sde_sample(eta, b, x0, t, 1e-3, 77, r), 0.0))).unwrap();
        let target = x0 * (eta * t).exp();
        assert!(e.within(C64::new(target, 0.0), 3.0), "{e:?} vs {target}");
    }

    #[test]
    fn mc_run_is_worker_independent() {
        let f = |r: u64| Ok(C64::new(linear_sde_sample(0.1, 0.3, 1.0, 0.5, 1e-2, 5, r), 0.0));
        let a = mc_run(64, 5, Some(1), f).unwrap();
        let b = mc_run(64, 5, Some(3), f).unwrap();
        assert_eq!(a, b);
    }
}
