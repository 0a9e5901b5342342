//! Closed forms for the deterministic sine and Bessel operators.
//!
//! The Bessel functions are evaluated from their ascending series only,
//! which is accurate for the moderate arguments used here (|x| ≲ 25).

use num_complex::Complex64 as C64;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Sine operator on (0, σ] with R = I/2 and boundary angle θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineOracle {
    pub sigma: f64,
    pub theta: f64,
}

impl SineOracle {
    pub fn new(sigma: f64, theta: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(theta > 0.0 && theta < 2.0 * PI) {
            return Err(Error::Domain(format!("sine oracle needs σ>0 and θ∈(0,2π), got σ={sigma}, θ={theta}")));
        }
        Ok(SineOracle { sigma, theta })
    }

    /// Boundary parameter q = cot(θ/2).
    pub fn q(&self) -> f64 {
        1.0 / (0.5 * self.theta).tan()
    }

    pub fn zeta(&self, z: C64) -> C64 {
        ((self.theta + self.sigma * z) * 0.5).sin() / (0.5 * self.theta).sin()
    }

    /// H(t, z) = [cos(tz/2), −sin(tz/2)].
    pub fn h(&self, t: f64, z: C64) -> [C64; 2] {
        let w = z * (0.5 * t);
        [w.cos(), -w.sin()]
    }

    /// λ_k = (2πk − θ)/σ.
    pub fn eigenvalue(&self, k: i64) -> f64 {
        (2.0 * PI * k as f64 - self.theta) / self.sigma
    }

    /// Taylor coefficient r_n of ζ.
    pub fn taylor_coeff(&self, n: usize) -> f64 {
        let half = 0.5 * self.sigma;
        let mut c = 1.0;
        for k in 1..=n {
            c *= half / k as f64;
        }
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if n % 2 == 0 {
            sign * c
        } else {
            sign * c * self.q()
        }
    }
}

/// Bessel operator on (0, σ] with x ≡ 0, y = s^{−α}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOracle {
    pub sigma: f64,
    pub alpha: f64,
}

impl BesselOracle {
    pub fn new(sigma: f64, alpha: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(alpha > 0.0) {
            return Err(Error::Domain(format!("Bessel oracle needs σ>0 and α>0, got σ={sigma}, α={alpha}")));
        }
        Ok(BesselOracle { sigma, alpha })
    }

    pub fn zeta(&self, z: C64) -> C64 {
        hyp0f1(0.5 * (self.alpha + 1.0), -z * z * (self.sigma * self.sigma / 16.0))
    }

    /// H(t, z) written through ₀F₁ so that no complex powers are needed.
    pub fn h(&self, t: f64, z: C64) -> [C64; 2] {
        let a = self.alpha;
        let w = -z * z * (t * t / 16.0);
        let first = hyp0f1(0.5 * (a + 1.0), w);
        let second = -z * (t.powf(a + 1.0) / (2.0 * (a + 1.0))) * hyp0f1(0.5 * (a + 3.0), w);
        [first, second]
    }

    /// r_{2n} = (−1)^n 2^{−4n} σ^{2n} Γ((α+1)/2) / (n! Γ((α+1)/2 + n)); odd coefficients vanish.
    pub fn taylor_coeff(&self, m: usize) -> f64 {
        if m % 2 == 1 {
            return 0.0;
        }
        let n = m / 2;
        let a = 0.5 * (self.alpha + 1.0);
        let mut c = 1.0;
        for k in 0..n {
            c *= -(self.sigma * self.sigma / 16.0) / ((k as f64 + 1.0) * (a + k as f64));
        }
        c
    }

    /// Positive eigenvalues 2γ_k/σ, with γ_k the zeros of J_{(α−1)/2}.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        Ok(2.0 * bessel_zero(0.5 * (self.alpha - 1.0), k)? / self.sigma)
    }
}

/// ₀F₁(; a; w) = Σ_k w^k / ((a)_k k!).
pub fn hyp0f1(a: f64, w: C64) -> C64 {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut k = 0.0;
    loop {
        term *= w / ((a + k) * (k + 1.0));
        sum += term;
        k += 1.0;
        if term.norm() <= 1e-17 * sum.norm().max(1e-300) && k * k > w.norm() {
            break;
        }
        if k > 10_000.0 {
            break;
        }
    }
    sum
}

/// J_p(x) for real p ≥ 0 by the ascending series.
pub fn bessel_j(p: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if p == 0.0 { 1.0 } else { 0.0 };
    }
    let pre = (0.5 * x).abs().powf(p) / gamma(p + 1.0);
    let sign = if x < 0.0 && p.fract() == 0.0 && (p as i64) % 2 == 1 { -1.0 } else { 1.0 };
    sign * pre * hyp0f1(p + 1.0, C64::new(-0.25 * x * x, 0.0)).re
}

/// k-th positive zero of J_p by a sign scan and bisection on the series.
pub fn bessel_zero(p: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("zero index starts at 1".into()));
    }
    const SCAN_LIMIT: f64 = 25.0;
    let step = 0.05;
    let mut x0 = step;
    let mut f0 = bessel_j(p, x0);
    let mut found = 0;
    while x0 < SCAN_LIMIT {
        let x1 = x0 + step;
        let f1 = bessel_j(p, x1);
        if f0 == 0.0 || f0.signum() != f1.signum() {
            found += 1;
            if found == k {
                return bisect(|x| bessel_j(p, x), x0, x1, 1e-13);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    Err(Error::Bracket { lo: 0.0, hi: SCAN_LIMIT, reason: format!("zero #{k} of J_{p} beyond scan limit") })
}

pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket { lo, hi, reason: "no sign change".into() });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_examples() {
        let s = SineOracle::new(1.0, PI).unwrap();
        assert!((s.zeta(C64::new(0.0, 0.0)) - 1.0).norm() < 1e-15);
        assert!(s.zeta(C64::new(PI, 0.0)).norm() < 1e-15);
        let s2 = SineOracle::new(1.0, PI / 2.0).unwrap();
        assert!((s2.zeta(C64::new(1.0, 0.0)).re - 1.357008).abs() < 1e-6);
        assert!((s2.taylor_coeff(1) - 0.5).abs() < 1e-15);
        assert!((s2.taylor_coeff(2) + 0.125).abs() < 1e-15);
    }

    #[test]
    fn bessel_coefficients() {
        let b1 = BesselOracle::new(1.0, 1.0).unwrap();
        assert_eq!(b1.taylor_coeff(2), -0.0625);
        let b3 = BesselOracle::new(1.0, 3.0).unwrap();
        assert!((b3.taylor_coeff(2) + 1.0 / 32.0).abs() < 1e-16);
        assert_eq!(b3.taylor_coeff(3), 0.0);
    }

    #[test]
    fn bessel_j_zero_at_origin_and_sign_scan() {
        assert_eq!(bessel_j(0.0, 0.0), 1.0);
        assert!(bessel_zero(0.0, 0).is_err());
        assert!(bessel_zero(0.0, 100).is_err());
    }
}
