//! Circular beta ensemble through modified Verblunsky coefficients.
//!
//! All evaluations use the stabilized pair ℰ_k(z) = e^{−izk/2n} ψ_k(e^{iz/n})
//! and its reversed partner, so that nothing grows like e^{|Im z|}
//! beyond what the functions themselves do.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::PI;

use crate::dirac::{make_q_boundary, DiracSpec, GridPath, Interpolation};
use crate::error::{Error, Result};
use crate::secular::{zeta_ode_with, OdeOptions};
use crate::stats::replicate_rng;

/// Closer than this to 1, the last coefficient would put an eigenvalue at
/// angle 0 within round-off, so it is redrawn.
const UNIT_REJECT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerblunskySample {
    pub n: usize,
    pub beta: f64,
    pub gamma: Vec<C64>,
    pub seed: u64,
}

/// Draws γ_0, …, γ_{n−1} for the size-n circular β ensemble from `rng`.
pub fn draw_verblunsky<R: Rng + ?Sized>(rng: &mut R, n: usize, beta: f64) -> Vec<C64> {
    let mut gamma = Vec::with_capacity(n);
    for k in 0..n {
        let s = 0.5 * beta * (n - k - 1) as f64;
        loop {
            let modulus = if s == 0.0 {
                1.0
            } else {
                let v: f64 = rng.random();
                (1.0 - v.powf(1.0 / s)).sqrt()
            };
            let g = C64::from_polar(modulus, 2.0 * PI * rng.random::<f64>());
            if (g - 1.0).norm() > UNIT_REJECT {
                gamma.push(g);
                break;
            }
        }
    }
    gamma
}

pub fn sample_verblunsky(n: usize, beta: f64, seed: u64) -> Result<VerblunskySample> {
    if n == 0 || !(beta > 0.0) {
        return Err(Error::Domain(format!("need n ≥ 1 and β > 0, got n={n}, β={beta}")));
    }
    let mut rng = replicate_rng(seed, 0);
    Ok(VerblunskySample { n, beta, gamma: draw_verblunsky(&mut rng, n, beta), seed })
}

impl VerblunskySample {
    /// Builds a sample from given coefficients, checking the modulus constraints.
    pub fn from_gamma(gamma: Vec<C64>, beta: f64) -> Result<Self> {
        let n = gamma.len();
        if n == 0 {
            return Err(Error::Domain("empty coefficient list".into()));
        }
        for (k, g) in gamma.iter().enumerate() {
            let ok = if k + 1 < n { g.norm() < 1.0 } else { (g.norm() - 1.0).abs() < 1e-12 };
            if !ok {
                return Err(Error::Domain(format!("γ_{k} = {g} violates the modulus constraint")));
            }
        }
        if (gamma[n - 1] - 1.0).norm() <= UNIT_REJECT {
            return Err(Error::Domain("γ_{n−1} = 1 puts an eigenvalue at angle 0".into()));
        }
        Ok(VerblunskySample { n, beta, gamma, seed: 0 })
    }
}

/// One stabilized Szegő step (ℰ_k, ℰ*_k) → (ℰ_{k+1}, ℰ*_{k+1}).
#[inline]
fn szego_step(g: C64, rot: C64, e: C64, es: C64) -> (C64, C64) {
    let a = rot * e;
    let b = es / rot;
    ((a - g * b) / (1.0 - g), (b - g.conj() * a) / (1.0 - g.conj()))
}

/// (ℰ_k(z), ℰ*_k(z)) for k = 0, …, n.
pub fn szego_states(gamma: &[C64], z: C64) -> Vec<(C64, C64)> {
    let n = gamma.len();
    let rot = (C64::i() * z / (2.0 * n as f64)).exp();
    let mut out = Vec::with_capacity(n + 1);
    let (mut e, mut es) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    out.push((e, es));
    for &g in gamma {
        (e, es) = szego_step(g, rot, e, es);
        out.push((e, es));
    }
    out
}

/// ℰ_n(z) = p_n(e^{iz/n}) e^{−iz/2}.
pub fn char_poly(sample: &VerblunskySample, z: C64) -> Result<C64> {
    let v = e_at(&sample.gamma, sample.n, z);
    if !v.is_finite() {
        return Err(Error::Overflow(format!("characteristic polynomial overflowed at z = {z}")));
    }
    Ok(v)
}

/// ℰ_k(z) for the first k coefficients of a size-n sample.
fn e_at(gamma: &[C64], n: usize, z: C64) -> C64 {
    let rot = (C64::i() * z / (2.0 * n as f64)).exp();
    let (mut e, mut es) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    for &g in gamma {
        (e, es) = szego_step(g, rot, e, es);
    }
    e
}

/// Coefficients (constant term first) of the degree-n polynomial ψ_n with
/// ℰ_n(z) = e^{−iz/2}ψ_n(e^{iz/n}), from the polynomial form of the
/// stabilized recursion: ψ_{k+1} = (ζψ_k − γ_kψ*_k)/(1 − γ_k),
/// ψ*_{k+1} = (ψ*_k − γ̄_kζψ_k)/(1 − γ̄_k).
pub fn poly_coeffs(gamma: &[C64]) -> Vec<C64> {
    let n = gamma.len();
    let zero = C64::new(0.0, 0.0);
    let mut p = vec![zero; n + 1];
    let mut ps = vec![zero; n + 1];
    p[0] = C64::new(1.0, 0.0);
    ps[0] = C64::new(1.0, 0.0);
    for (k, &g) in gamma.iter().enumerate() {
        let mut np = vec![zero; n + 1];
        let mut nps = vec![zero; n + 1];
        for j in 0..=k {
            np[j + 1] += p[j];
            np[j] -= g * ps[j];
            nps[j] += ps[j];
            nps[j + 1] -= g.conj() * p[j];
        }
        let (d, ds) = (1.0 - g, 1.0 - g.conj());
        for j in 0..=k + 1 {
            p[j] = np[j] / d;
            ps[j] = nps[j] / ds;
        }
    }
    p
}

/// Eigenangles λ_j ∈ (0, 2π), ascending: the arguments of the zeros of ψ_n,
/// which lie on the unit circle. The zeros come from the companion matrix
/// and are polished by Newton steps on ψ_n restricted to the circle.
pub fn eigenangles(sample: &VerblunskySample) -> Result<Vec<f64>> {
    let n = sample.n;
    let c = poly_coeffs(&sample.gamma);
    let lead = c[n];
    // Column-major companion matrix of the monic ψ_n / lead.
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for i in 1..n {
        m[(i - 1) * n + i] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(n - 1) * n + i] = -c[i] / lead;
    }
    let roots = crate::linalg::eigvals_complex(&mut m, n).map_err(Error::Lapack)?;
    let eval = |zeta: C64| -> (C64, C64) {
        let (mut v, mut dv) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for &a in c.iter().rev() {
            dv = dv * zeta + v;
            v = v * zeta + a;
        }
        (v, dv)
    };
    let mut out = Vec::with_capacity(n);
    for r in roots {
        let mut t = r.arg();
        for _ in 0..4 {
            let zeta = C64::from_polar(1.0, t);
            let (v, dv) = eval(zeta);
            // d/dt ψ(e^{it}) = iζψ'(ζ); Newton in t, keeping t real.
            let step = (v / (C64::i() * zeta * dv)).re;
            if !step.is_finite() {
                break;
            }
            t -= step;
        }
        out.push(t.rem_euclid(2.0 * PI));
    }
    out.sort_by(|a, b| a.total_cmp(b));
    if out.windows(2).any(|w| w[1] - w[0] < 1e-12) {
        return Err(Error::Root("coincident eigenangles".into()));
    }
    Ok(out)
}

/// ∏_j sin(λ_j/2 − z/2n)/sin(λ_j/2).
pub fn product_form(angles: &[f64], n: usize, z: C64) -> C64 {
    angles
        .iter()
        .map(|&l| (C64::new(0.5 * l, 0.0) - z / (2.0 * n as f64)).sin() / (0.5 * l).sin())
        .product()
}

/// The path x_k + i y_k of the discrete operator, k = 0, …, n.
pub fn path_points(sample: &VerblunskySample) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = sample.n;
    let mut x = Vec::with_capacity(n + 1);
    let mut y = Vec::with_capacity(n + 1);
    x.push(0.0);
    y.push(1.0);
    for (k, &g) in sample.gamma.iter().enumerate() {
        if (1.0 - g).norm() == 0.0 {
            return Err(Error::Domain(format!("γ_{k} = 1")));
        }
        let m = 2.0 * g / (1.0 - g);
        let (w, v) = (m.re, -m.im);
        x.push(x[k] + v * y[k]);
        y.push(y[k] * (1.0 + w));
    }
    Ok((x, y))
}

/// Piecewise-constant path on [0, 1]: (x_k, y_k) on (k/n, (k+1)/n].
pub fn verblunsky_to_path(sample: &VerblunskySample) -> Result<GridPath> {
    let n = sample.n;
    let (x, y) = path_points(sample)?;
    let t = (1..=n).map(|i| i as f64 / n as f64).collect();
    GridPath::new(t, x[..n].to_vec(), y[..n].to_vec(), Interpolation::PiecewiseConstant)
}

/// The operator with u0 = [1, 0], u1 = [−x_n, −1].
pub fn discrete_dirac(sample: &VerblunskySample) -> Result<DiracSpec> {
    let (x, _) = path_points(sample)?;
    Ok(DiracSpec::new(verblunsky_to_path(sample)?, make_q_boundary(x[sample.n])?))
}

fn frame_condition(sample: &VerblunskySample) -> Result<f64> {
    let (x, y) = path_points(sample)?;
    Ok((0..sample.n).map(|k| (1.0 + x[k] * x[k] + y[k] * y[k]) / y[k]).fold(0.0, f64::max))
}

/// Secular function of the discrete operator by exact propagation across
/// its n constant cells.
///
/// On cell k, R = ½X_kᵀX_k with X_k = [[1, −x_k], [0, y_k]]/√y_k of unit
/// determinant, so the cell transfer matrix is X_k⁻¹ Rot X_k with Rot the
/// rotation by z/2n. Working with G = X_k H and passing between cells by
/// X_{k+1}X_k⁻¹ = [[1/√(1+w), −v/√(1+w)], [0, √(1+w)]] with
/// w − iv = 2γ_k/(1 − γ_k) read off the coefficient directly avoids the
/// 1/y_k growth of the entries of R that limits the ODE route.
pub fn zeta_transfer(sample: &VerblunskySample, z: C64) -> Result<C64> {
    let n = sample.n;
    let theta = z / (2.0 * n as f64);
    let (c, s) = (theta.cos(), theta.sin());
    let mut g = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let mut y = 1.0;
    for (k, &gk) in sample.gamma.iter().enumerate() {
        g = [g[0] * c + g[1] * s, -g[0] * s + g[1] * c];
        let m = 2.0 * gk / (1.0 - gk);
        let (w, v) = (m.re, -m.im);
        if k + 1 < n {
            let r = (1.0 + w).sqrt();
            g = [(g[0] - g[1] * v) / r, g[1] * r];
            y *= 1.0 + w;
        } else {
            // ζ = Hᵀ J u1 = Gᵀ X⁻ᵀ J u1 with J u1 = [1, −x_n], which is
            // [√y, −v√y] in the frame of the last cell.
            let sy = y.sqrt();
            let zeta = (g[0] - g[1] * v) * sy;
            if !zeta.is_finite() {
                return Err(Error::Overflow(format!("transfer product overflowed at z = {z}")));
            }
            return Ok(zeta);
        }
    }
    unreachable!("a sample has at least one coefficient")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub beta: f64,
    pub seed: u64,
    /// max |ζ_ode − ℰ_n| over the grid.
    pub max_dev_ode: f64,
    /// max |ζ_transfer − ℰ_n| over the grid.
    pub max_dev_transfer: f64,
    /// max |∏ sin(…)/sin(…) − ℰ_n| over the grid.
    pub max_dev_product: f64,
    /// max over cells of (1 + x_k² + y_k²)/y_k, the condition number of the
    /// frame change that the ODE route works through.
    pub frame_condition: f64,
    /// max |ζ_ode| over the grid, for scale.
    pub max_abs: f64,
    /// max distance between scaled eigenangles nλ_j and the zeros of ζ_ode on (0, 2πn).
    pub max_zero_dev: f64,
}

/// Compares the operator's secular function with the characteristic
/// polynomial and with the product over eigenangles on `z_grid`.
pub fn verify_identities(sample: &VerblunskySample, z_grid: &[C64]) -> Result<IdentityReport> {
    let spec = discrete_dirac(sample)?;
    let opts = OdeOptions { tol: 1e-13 };
    let angles = eigenangles(sample)?;
    let mut rep = IdentityReport {
        n: sample.n,
        beta: sample.beta,
        seed: sample.seed,
        max_dev_ode: 0.0,
        max_dev_transfer: 0.0,
        max_dev_product: 0.0,
        frame_condition: frame_condition(sample)?,
        max_abs: 0.0,
        max_zero_dev: 0.0,
    };
    for &z in z_grid {
        let cp = char_poly(sample, z)?;
        let ode = zeta_ode_with(&spec, z, Some(0.0), opts)?.value;
        rep.max_dev_ode = rep.max_dev_ode.max((ode - cp).norm());
        rep.max_dev_transfer = rep.max_dev_transfer.max((zeta_transfer(sample, z)? - cp).norm());
        rep.max_dev_product = rep.max_dev_product.max((product_form(&angles, sample.n, z) - cp).norm());
        rep.max_abs = rep.max_abs.max(ode.norm());
    }
    for &l in &angles {
        let x = sample.n as f64 * l;
        let v = zeta_ode_with(&spec, C64::new(x, 0.0), Some(0.0), opts)?.value;
        let h = 1e-6 * (1.0 + x);
        let dv = (zeta_ode_with(&spec, C64::new(x + h, 0.0), Some(0.0), opts)?.value
            - zeta_ode_with(&spec, C64::new(x - h, 0.0), Some(0.0), opts)?.value)
            / (2.0 * h);
        // One Newton step estimates the distance to the nearest zero.
        rep.max_zero_dev = rep.max_zero_dev.max((v / dv).norm());
    }
    Ok(rep)
}

/// ∏_j ℰ_n(z_j)/ℰ_n(w_j) for one sample.
pub fn bs_ratio(sample: &VerblunskySample, zs: &[C64], ws: &[C64]) -> Result<C64> {
    if zs.len() != ws.len() {
        return Err(Error::Domain("z and w lists differ in length".into()));
    }
    let mut r = C64::new(1.0, 0.0);
    for (&z, &w) in zs.iter().zip(ws) {
        r *= char_poly(sample, z)? / char_poly(sample, w)?;
    }
    if !r.is_finite() {
        return Err(Error::Overflow("ratio of characteristic polynomials".into()));
    }
    Ok(r)
}

/// The same ratio for a list of coefficient sets, one per replicate, drawn
/// from `seed` with replicate index as stream.
pub fn bs_samples(n: usize, beta: f64, seed: u64, replicates: usize, zs: &[C64], ws: &[C64]) -> Result<Vec<C64>> {
    use rayon::prelude::*;
    (0..replicates)
        .into_par_iter()
        .map(|k| {
            let mut rng = replicate_rng(seed, k as u64);
            let gamma = draw_verblunsky(&mut rng, n, beta);
            let s = VerblunskySample { n, beta, gamma, seed };
            bs_ratio(&s, zs, ws)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<C64> {
        (0..20).map(|k| C64::from_polar(10.0 * (k as f64 + 1.0) / 20.0, 0.7 * k as f64)).collect()
    }

    #[test]
    fn modulus_constraints_and_normalization() {
        let s = sample_verblunsky(6, 2.0, 11).unwrap();
        assert!(s.gamma[..5].iter().all(|g| g.norm() < 1.0));
        assert!((s.gamma[5].norm() - 1.0).abs() < 1e-14);
        assert!((char_poly(&s, C64::new(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        let one = sample_verblunsky(1, 1.0, 0).unwrap();
        assert_eq!(one.gamma.len(), 1);
        assert!(sample_verblunsky(0, 1.0, 0).is_err());
    }

    #[test]
    fn first_modulus_has_beta_mean() {
        // |γ_0|² ~ Beta(1, 2) for n = 3, β = 2: mean 1/3, variance 2/36.
        let mut rng = replicate_rng(5, 0);
        let m = 20_000;
        let mean = (0..m).map(|_| draw_verblunsky(&mut rng, 3, 2.0)[0].norm_sqr()).sum::<f64>() / m as f64;
        let se = (2.0f64 / 36.0 / m as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() < 3.0 * se);
    }

    #[test]
    fn path_ends_on_the_boundary() {
        let s = sample_verblunsky(8, 2.0, 2).unwrap();
        let (x, y) = path_points(&s).unwrap();
        assert_eq!((x[0], y[0]), (0.0, 1.0));
        let ymax = y.iter().cloned().fold(0.0, f64::max);
        assert!(y[..8].iter().all(|&v| v > 0.0));
        assert!(y[8].abs() < 1e-10 * ymax);
    }

    #[test]
    fn stabilized_pair_dominance() {
        let s = sample_verblunsky(12, 1.0, 4).unwrap();
        for &w in &[C64::new(0.3, -0.5), C64::new(-4.0, -2.0), C64::new(9.0, -0.01)] {
            for (e, es) in szego_states(&s.gamma, w) {
                assert!(e.norm() >= es.norm() * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn real_coefficients_give_conjugate_symmetry() {
        let s = sample_verblunsky(8, 4.0, 9).unwrap();
        for z in grid() {
            let a = char_poly(&s, z).unwrap();
            let b = char_poly(&s, z.conj()).unwrap().conj();
            assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn eigenangles_are_zeros() {
        let s = sample_verblunsky(8, 2.0, 7).unwrap();
        let ang = eigenangles(&s).unwrap();
        assert_eq!(ang.len(), 8);
        assert!(ang.windows(2).all(|w| w[0] < w[1]));
        for &l in &ang {
            assert!(l > 0.0 && l < 2.0 * PI);
            assert!(char_poly(&s, C64::new(8.0 * l, 0.0)).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn ode_and_product_agree_with_polynomial() {
        let s = sample_verblunsky(8, 2.0, 1).unwrap();
        let mut g = grid();
        g.push(C64::new(0.0, 0.0));
        let r = verify_identities(&s, &g).unwrap();
        assert!(r.max_dev_ode < 1e-8, "{r:?}");
        assert!(r.max_dev_transfer < 1e-11, "{r:?}");
        assert!(r.max_dev_product < 1e-8, "{r:?}");
        assert!(r.max_zero_dev < 1e-8, "{r:?}");
    }

    #[test]
    fn borodin_strahov_targets() {
        let t = crate::moments::borodin_strahov(&[C64::new(0.0, 0.0)], &[C64::new(0.0, -1.0)]).unwrap();
        assert!((t - (-0.5f64).exp()).norm() < 1e-15);
        let t2 = crate::moments::borodin_strahov(&[C64::new(0.0, 1.0)], &[C64::new(0.0, 1.0)]).unwrap();
        assert!((t2 - 1.0).norm() < 1e-15);
        assert!(crate::moments::borodin_strahov(&[C64::new(0.0, 0.0); 2], &[C64::new(0.0, 1.0), C64::new(0.0, -1.0)]).is_err());
    }
}
