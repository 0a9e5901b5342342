//! The secular function ζ of a Dirac operator, computed along independent
//! routes: Taylor coefficients from a one-dimensional recursion, the
//! canonical-system ODE J H' = z R H, and the regularized determinant of
//! the discretized resolvent. Also principal-value products and the
//! log-derivative formula driven by a zero-counting function.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dirac::{Coefficients, DiracSpec, DiscretizedResolvent, Mat2, CELL_ORDER};
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

/// H(t, z) together with the structure-function combinations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HEval {
    pub t: f64,
    pub z: C64,
    pub h: [C64; 2],
}

impl HEval {
    pub fn a(&self) -> C64 {
        self.h[0]
    }
    pub fn b(&self) -> C64 {
        self.h[1]
    }
    /// E = A − iB.
    pub fn e(&self) -> C64 {
        self.h[0] - C64::i() * self.h[1]
    }
    /// E* = A + iB.
    pub fn e_star(&self) -> C64 {
        self.h[0] + C64::i() * self.h[1]
    }
}

/// Which computation produced a ζ value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Taylor,
    Ode,
    Det2,
    Oracle,
    Product,
    Sde,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Taylor => "taylor",
            Route::Ode => "ode",
            Route::Det2 => "det2",
            Route::Oracle => "oracle",
            Route::Product => "product",
            Route::Sde => "sde",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaValue {
    pub z: C64,
    pub value: C64,
    pub route: Route,
    pub err_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCoeffs {
    /// d_n(σ), n = 0..=n_max.
    pub d: Vec<[f64; 2]>,
    /// r_n = d_n(σ) J u1, with r_0 = 1.
    pub r: Vec<f64>,
    pub n_max: usize,
    /// Base b of the bound |r_n| ≤ bⁿ.
    pub bound_base: f64,
    /// ∫‖R‖, giving |r_n| ≤ Lⁿ/n!; infinite for paths singular at 0.
    pub norm_integral: f64,
}

/// Row vector times R J.
#[inline]
fn row_rj(d: [f64; 2], r: &[[f64; 2]; 2]) -> [f64; 2] {
    [d[0] * r[0][1] + d[1] * r[1][1], -(d[0] * r[0][0] + d[1] * r[1][0])]
}

pub fn taylor_coeffs<P: Coefficients>(spec: &DiracSpec<P>, n_max: usize) -> Result<TaylorCoeffs> {
    if n_max < 1 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let g = GaussLegendre::new(CELL_ORDER);
    let p = g.len();
    let cells = spec.path.cells();
    let mut rmats = Vec::with_capacity((cells.len() - 1) * p);
    let mut halves = Vec::with_capacity(cells.len() - 1);
    for (ci, w) in cells.windows(2).enumerate() {
        halves.push(0.5 * (w[1] - w[0]));
        for s in g.nodes_on(w[0], w[1]) {
            let r = spec.r_at(s);
            if r.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Quadrature { cell: ci, t: s, reason: "R not finite".into() });
            }
            rmats.push(r);
        }
    }
    let u1 = spec.boundary.u1;
    let ju1 = [-u1[1], u1[0]];
    let mut prev = vec![spec.boundary.u0; rmats.len()];
    let mut next = vec![[0.0; 2]; rmats.len()];
    let mut d = vec![spec.boundary.u0];
    let mut r = vec![1.0];
    let mut gbuf = vec![[0.0; 2]; p];
    for _n in 1..=n_max {
        let mut start = [0.0, 0.0];
        for (ci, &half) in halves.iter().enumerate() {
            let off = ci * p;
            for m in 0..p {
                gbuf[m] = row_rj(prev[off + m], &rmats[off + m]);
            }
            for j in 0..p {
                let (mut s0, mut s1) = (0.0, 0.0);
                for m in 0..p {
                    let w = g.antideriv[j][m];
                    s0 += w * gbuf[m][0];
                    s1 += w * gbuf[m][1];
                }
                next[off + j] = [start[0] + half * s0, start[1] + half * s1];
            }
            for m in 0..p {
                start[0] += half * g.weights[m] * gbuf[m][0];
                start[1] += half * g.weights[m] * gbuf[m][1];
            }
        }
        std::mem::swap(&mut prev, &mut next);
        r.push(start[0] * ju1[0] + start[1] * ju1[1]);
        d.push(start);
    }
    let (bound_base, norm_integral) = coefficient_bounds(spec, &g, &cells, &rmats);
    Ok(TaylorCoeffs { d, r, n_max, bound_base, norm_integral })
}

/// ∫|u0ᵀRu1| + ∫∫_{s<t} u0ᵀR(s)u0 · u1ᵀR(t)u1, and ∫‖R‖.
fn coefficient_bounds<P: Coefficients>(
    spec: &DiracSpec<P>,
    g: &GaussLegendre,
    cells: &[f64],
    rmats: &[[[f64; 2]; 2]],
) -> (f64, f64) {
    let p = g.len();
    let (u0, u1) = (spec.boundary.u0, spec.boundary.u1);
    let quad = |r: &[[f64; 2]; 2], u: [f64; 2], v: [f64; 2]| {
        u[0] * (r[0][0] * v[0] + r[0][1] * v[1]) + u[1] * (r[1][0] * v[0] + r[1][1] * v[1])
    };
    let (mut single, mut double, mut acc0, mut norm) = (0.0, 0.0, 0.0, 0.0);
    for (ci, w) in cells.windows(2).enumerate() {
        let half = 0.5 * (w[1] - w[0]);
        let blk = &rmats[ci * p..(ci + 1) * p];
        let f0: Vec<f64> = blk.iter().map(|r| quad(r, u0, u0)).collect();
        for j in 0..p {
            let r = &blk[j];
            single += half * g.weights[j] * quad(r, u0, u1).abs();
            let inner = acc0 + half * (0..p).map(|m| g.antideriv[j][m] * f0[m]).sum::<f64>();
            double += half * g.weights[j] * inner * quad(r, u1, u1);
            let tr = r[0][0] + r[1][1];
            norm += half * g.weights[j] * 0.5 * (tr + (tr * tr - 1.0).max(0.0).sqrt());
        }
        acc0 += half * (0..p).map(|m| g.weights[m] * f0[m]).sum::<f64>();
    }
    let norm = if spec.path.regular_at_zero() { norm } else { f64::INFINITY };
    (single + double, norm)
}

fn ln_factorial(n: usize) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

impl TaylorCoeffs {
    /// Bound on |Σ_{n>N} r_n zⁿ| for truncation order N (`None` if no
    /// rigorous bound applies at this |z|).
    pub fn tail_bound(&self, n: usize, abs_z: f64) -> Option<f64> {
        if self.norm_integral.is_finite() {
            let lz = self.norm_integral * abs_z;
            if lz == 0.0 {
                return Some(0.0);
            }
            return Some(((n as f64 + 1.0) * lz.ln() - ln_factorial(n + 1) + lz).exp());
        }
        let bz = self.bound_base * abs_z;
        (bz < 1.0).then(|| bz.powi(n as i32 + 1) / (1.0 - bz))
    }

    /// Last-terms estimate used when no rigorous bound is available.
    fn heuristic_tail(&self, abs_z: f64) -> f64 {
        let n = self.n_max;
        (n.saturating_sub(3)..=n).map(|k| self.r[k].abs() * abs_z.powi(k as i32)).fold(0.0, f64::max) * 2.0
    }

    fn required_n(&self, abs_z: f64, tol: f64) -> usize {
        (self.n_max..self.n_max * 8 + 64)
            .find(|&n| self.tail_bound(n, abs_z).map(|b| b <= tol).unwrap_or(false))
            .unwrap_or(self.n_max * 2)
    }
}

/// 1 + Σ r_n zⁿ with the truncation error bound from the coefficient bounds.
pub fn zeta_taylor(coeffs: &TaylorCoeffs, z: C64, tol: f64) -> Result<ZetaValue> {
    let mut acc = C64::new(0.0, 0.0);
    for &rn in coeffs.r.iter().rev() {
        acc = acc * z + rn;
    }
    let az = z.norm();
    let err = match coeffs.tail_bound(coeffs.n_max, az) {
        Some(b) => b,
        None => coeffs.heuristic_tail(az),
    };
    if err > tol {
        return Err(Error::TruncationTooShort { bound: err, required_n_max: coeffs.required_n(az, tol) });
    }
    Ok(ZetaValue { z, value: acc, route: Route::Taylor, err_estimate: err })
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Local error target relative to 1 + ‖H‖.
    pub tol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { tol: 1e-12 }
    }
}

/// Accepted steps of the adaptive solve; `at` re-integrates from the
/// nearest knot to give H anywhere on [ε, σ].
pub struct HSolution<'a, P: Coefficients> {
    spec: &'a DiracSpec<P>,
    z: C64,
    opts: OdeOptions,
    cells: Vec<f64>,
    pub knots: Vec<(f64, [C64; 2])>,
    pub err_estimate: f64,
}

impl<P: Coefficients> HSolution<'_, P> {
    pub fn at(&self, t: f64) -> Result<HEval> {
        let (t0, _) = self.knots[0];
        let sigma = self.spec.sigma();
        if !(t >= t0 && t <= sigma) {
            return Err(Error::Domain(format!("t = {t} outside [{t0}, {sigma}]")));
        }
        let k = self.knots.partition_point(|(tk, _)| *tk <= t).max(1) - 1;
        let (tk, hk) = self.knots[k];
        let (h, _, _) = integrate_h(self.spec, self.z, &self.cells, tk, t, hk, self.opts)?;
        Ok(HEval { t, z: self.z, h })
    }

    pub fn end(&self) -> HEval {
        let (t, h) = *self.knots.last().unwrap();
        HEval { t, z: self.z, h }
    }
}

#[inline]
fn h_rhs<P: Coefficients>(spec: &DiracSpec<P>, z: C64, t: f64, h: [C64; 2]) -> [C64; 2] {
    let r = spec.r_at(t);
    [z * (h[0] * r[1][0] + h[1] * r[1][1]), -z * (h[0] * r[0][0] + h[1] * r[0][1])]
}

fn rk4_step<P: Coefficients>(spec: &DiracSpec<P>, z: C64, lo: f64, hi: f64, t: f64, dt: f64, h: [C64; 2]) -> [C64; 2] {
    // Keep evaluations inside the current smooth cell.
    let nudge = 1e-13 * (hi - lo);
    let at = |s: f64| s.clamp(lo + nudge, hi);
    let add = |a: [C64; 2], k: [C64; 2], c: f64| [a[0] + k[0] * c, a[1] + k[1] * c];
    let k1 = h_rhs(spec, z, at(t), h);
    let k2 = h_rhs(spec, z, at(t + 0.5 * dt), add(h, k1, 0.5 * dt));
    let k3 = h_rhs(spec, z, at(t + 0.5 * dt), add(h, k2, 0.5 * dt));
    let k4 = h_rhs(spec, z, at(t + dt), add(h, k3, dt));
    [
        h[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (dt / 6.0),
        h[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (dt / 6.0),
    ]
}

/// Exact propagation across a cell where R is constant. With
/// H' = zMH and M = [[R₁₀, R₁₁], [−R₀₀, −R₀₁]], M² = −(det R)I = −I/4, so
/// e^{LzM} = cos(Lz/2)I + 2 sin(Lz/2)M.
fn constant_cell_step(r: Mat2, z: C64, len: f64, h: [C64; 2]) -> [C64; 2] {
    let w = z * (0.5 * len);
    let (c, s2) = (w.cos(), w.sin() * 2.0);
    let m = [[r[1][0], r[1][1]], [-r[0][0], -r[0][1]]];
    [
        h[0] * c + (h[0] * m[0][0] + h[1] * m[0][1]) * s2,
        h[1] * c + (h[0] * m[1][0] + h[1] * m[1][1]) * s2,
    ]
}

fn norm2(h: [C64; 2]) -> f64 {
    (h[0].norm_sqr() + h[1].norm_sqr()).sqrt()
}

type Knots = Vec<(f64, [C64; 2])>;

/// Adaptive RK4 with step doubling from (t_start, h_start) to t_end.
fn integrate_h<P: Coefficients>(
    spec: &DiracSpec<P>,
    z: C64,
    cells: &[f64],
    t_start: f64,
    t_end: f64,
    h_start: [C64; 2],
    opts: OdeOptions,
) -> Result<([C64; 2], Knots, f64)> {
    let mut h = h_start;
    let mut knots = vec![(t_start, h)];
    let mut err_total = 0.0;
    if t_end <= t_start || z == C64::new(0.0, 0.0) {
        if t_end > t_start {
            knots.push((t_end, h));
        }
        return Ok((h, knots, 0.0));
    }
    let mut pts = vec![t_start];
    pts.extend(cells.iter().copied().filter(|&c| c > t_start && c < t_end));
    pts.push(t_end);
    let mut dt = 0.25 * (pts[1] - pts[0]);
    let exact = spec.path.constant_on_cells();
    for seg in pts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if exact {
            h = constant_cell_step(spec.r_at(0.5 * (a + b)), z, b - a, h);
            if !(h[0].is_finite() && h[1].is_finite()) {
                return Err(Error::Overflow(format!("H blew up near t = {b}")));
            }
            knots.push((b, h));
            continue;
        }
        let i = cells.partition_point(|&c| c <= a);
        let lo = if i == 0 { a } else { cells[i - 1] };
        let hi = cells.get(i).copied().unwrap_or(b).max(b);
        let mut t = a;
        dt = dt.min(b - a);
        while t < b {
            let step = dt.min(b - t);
            let full = rk4_step(spec, z, lo, hi, t, step, h);
            let half1 = rk4_step(spec, z, lo, hi, t, 0.5 * step, h);
            let half2 = rk4_step(spec, z, lo, hi, t + 0.5 * step, 0.5 * step, half1);
            let diff = [(half2[0] - full[0]) / 15.0, (half2[1] - full[1]) / 15.0];
            let err = norm2(diff);
            let scale = opts.tol * (1.0 + norm2(half2));
            if !err.is_finite() {
                return Err(Error::Overflow(format!("H blew up near t = {t}")));
            }
            if err <= scale {
                h = [half2[0] + diff[0], half2[1] + diff[1]];
                t = if step >= b - t { b } else { t + step };
                err_total += err;
                knots.push((t, h));
                let grow = if err == 0.0 { 2.0 } else { (0.9 * (scale / err).powf(0.2)).min(2.0) };
                dt = step * grow;
            } else {
                dt = step * (0.9 * (scale / err).powf(0.2)).max(0.1);
                if dt < 1e-13 * (b - a) {
                    return Err(Error::StepUnderflow { t });
                }
            }
        }
    }
    Ok((h, knots, err_total))
}

/// Default starting point: 0 for paths regular at the origin, 1e-8 otherwise.
pub fn default_eps<P: Coefficients>(spec: &DiracSpec<P>) -> f64 {
    if spec.path.regular_at_zero() {
        0.0
    } else {
        1e-8
    }
}

/// Solve J H' = z R H on [ε, σ] with H(ε) = u0.
pub fn solve_h<P: Coefficients>(spec: &DiracSpec<P>, z: C64, eps: f64, opts: OdeOptions) -> Result<HSolution<'_, P>> {
    let sigma = spec.sigma();
    if !(eps >= 0.0 && eps < sigma) || (eps == 0.0 && !spec.path.regular_at_zero()) {
        return Err(Error::Domain(format!("ε = {eps} not admissible on (0, {sigma})")));
    }
    let cells = spec.path.cells();
    let u0 = spec.boundary.u0;
    let h0 = [C64::new(u0[0], 0.0), C64::new(u0[1], 0.0)];
    let (_, knots, err) = integrate_h(spec, z, &cells, eps, sigma, h0, opts)?;
    Ok(HSolution { spec, z, opts, cells, knots, err_estimate: err })
}

fn zeta_from_h(spec_u1: [f64; 2], h: [C64; 2]) -> C64 {
    // Hᵀ J u1 with J u1 = [−u1[1], u1[0]].
    h[0] * (-spec_u1[1]) + h[1] * spec_u1[0]
}

/// ζ(z) = H(σ, z)ᵀ J u1. For paths singular at 0 the estimate includes the
/// difference between starting points ε and ε/4.
pub fn zeta_ode<P: Coefficients>(spec: &DiracSpec<P>, z: C64, eps: Option<f64>) -> Result<ZetaValue> {
    zeta_ode_with(spec, z, eps, OdeOptions::default())
}

pub fn zeta_ode_with<P: Coefficients>(spec: &DiracSpec<P>, z: C64, eps: Option<f64>, opts: OdeOptions) -> Result<ZetaValue> {
    let eps = eps.unwrap_or_else(|| default_eps(spec));
    let sol = solve_h(spec, z, eps, opts)?;
    let value = zeta_from_h(spec.boundary.u1, sol.end().h);
    let mut err = sol.err_estimate;
    if eps > 0.0 {
        let finer = solve_h(spec, z, 0.25 * eps, opts)?;
        err += (zeta_from_h(spec.boundary.u1, finer.end().h) - value).norm();
    }
    Ok(ZetaValue { z, value, route: Route::Ode, err_estimate: err })
}

/// e^{−z𝔱} ∏(1 − zν_k)e^{zν_k}, times e^{−z²m/2} where m is the squared
/// eigenvalue mass of the continuous operator beyond the matrix's reach.
pub fn zeta_det2(res: &DiscretizedResolvent, z: C64) -> ZetaValue {
    let mut log = -z * res.integral_trace;
    for &nu in &res.eigenvalues {
        let w = z * nu;
        log += (C64::new(1.0, 0.0) - w).ln() + w;
    }
    let tail = res.unresolved_mass();
    log -= z * z * (0.5 * tail);
    ZetaValue { z, value: log.exp(), route: Route::Det2, err_estimate: (z.norm_sqr() * 0.5 * tail).abs() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvProduct {
    pub value: C64,
    /// (radius, partial product) pairs in increasing radius.
    pub sequence: Vec<(f64, C64)>,
    /// |last − second to last|.
    pub convergence: f64,
}

/// Radii r, 2r, 4r, … not exceeding `max`.
pub fn default_radii(r0: f64, max: f64) -> Vec<f64> {
    let mut v = vec![];
    let mut r = r0;
    while r <= max {
        v.push(r);
        r *= 2.0;
    }
    v
}

/// ∏_{|λ_k| < r}(1 − z/λ_k) for each radius r.
pub fn pv_product(zeros: &[f64], z: C64, radii: &[f64]) -> Result<PvProduct> {
    if zeros.contains(&0.0) {
        return Err(Error::Domain("zero at the origin; use b_product".into()));
    }
    if radii.is_empty() {
        return Err(Error::Domain("no radii".into()));
    }
    let mut sorted: Vec<f64> = zeros.to_vec();
    sorted.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut seq = Vec::with_capacity(radii.len());
    let mut prod = C64::new(1.0, 0.0);
    let mut idx = 0;
    for &r in radii {
        while idx < sorted.len() && sorted[idx].abs() < r {
            prod *= C64::new(1.0, 0.0) - z / sorted[idx];
            idx += 1;
        }
        seq.push((r, prod));
    }
    let n = seq.len();
    let convergence = if n >= 2 { (seq[n - 1].1 - seq[n - 2].1).norm() } else { f64::NAN };
    Ok(PvProduct { value: seq[n - 1].1, sequence: seq, convergence })
}

/// Principal-value sum Σ_{|λ| ≤ r} 1/λ.
pub fn pv_sum(zeros: &[f64], r: f64) -> f64 {
    zeros.iter().filter(|l| l.abs() <= r && **l != 0.0).map(|l| 1.0 / l).sum()
}

/// B(z) = −z ∫₀^σ 1/(2y) · ∏_{0<|λ|}(1 − z/λ) over the supplied zeros of B.
pub fn b_product<P: Coefficients>(spec: &DiracSpec<P>, zeros_of_b: &[f64], z: C64) -> Result<C64> {
    if !zeros_of_b.contains(&0.0) {
        return Err(Error::Domain("zeros of B must include the origin".into()));
    }
    let slope = crate::dirac::integrate_cells(&spec.path, |s| 0.5 / spec.path.xy(s).1);
    let nonzero: Vec<f64> = zeros_of_b.iter().copied().filter(|&l| l != 0.0).collect();
    let r = nonzero.iter().fold(0.0f64, |m, l| m.max(l.abs())) * (1.0 + 1e-12) + 1e-300;
    let p = if nonzero.is_empty() { C64::new(1.0, 0.0) } else { pv_product(&nonzero, z, &[r])?.value };
    Ok(-z * slope * p)
}

/// ζ'/ζ(z) = ∫ (λ/ρ − N(λ))/(z − λ)² dλ − sign(Im z)·πi/ρ with N the
/// zero-counting function (N(0) = 0), integrated exactly between the jumps
/// over [−window, window]. The constant term follows from integrating
/// Σ 1/(z − λ_k) by parts, since ∫ λ/(z − λ)² dλ over ℝ equals sign(Im z)·πi.
pub fn log_derivative(zeros: &[f64], rho: f64, z: C64, window: f64) -> Result<C64> {
    if z.im == 0.0 {
        return Err(Error::Domain("log_derivative needs a nonreal z".into()));
    }
    let anti = |lam: f64, n: f64| (z / rho - n) / (z - lam) + (z - lam).ln() / rho;
    let mut pos: Vec<f64> = zeros.iter().copied().filter(|&l| l > 0.0 && l <= window).collect();
    let mut neg: Vec<f64> = zeros.iter().copied().filter(|&l| l < 0.0 && l >= -window).map(|l| -l).collect();
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    let mut total = C64::new(0.0, 0.0);
    // λ > 0: N jumps up by one at each zero.
    let mut left = 0.0;
    for (k, &l) in pos.iter().chain(std::iter::once(&window)).enumerate() {
        total += anti(l, k as f64) - anti(left, k as f64);
        left = l;
    }
    // λ < 0: N = −#{zeros in [λ, 0)}.
    let mut right = 0.0;
    for (k, &l) in neg.iter().chain(std::iter::once(&window)).enumerate() {
        total += anti(-right, -(k as f64)) - anti(-l, -(k as f64));
        right = l;
    }
    Ok(total - C64::new(0.0, z.im.signum() * std::f64::consts::PI / rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{bessel_spec, sine_spec};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sine_taylor_first_coefficients() {
        let tc = taylor_coeffs(&sine_spec(1.0, 1.0).unwrap(), 20).unwrap();
        assert_eq!(tc.r[0], 1.0);
        assert!((tc.r[1] - 0.5).abs() < 1e-14 && (tc.r[2] + 0.125).abs() < 1e-14);
    }

    #[test]
    fn bessel_r2() {
        let tc = taylor_coeffs(&bessel_spec(1.0, 1.0).unwrap(), 8).unwrap();
        assert!(tc.r[1].abs() < 1e-12);
        assert!((tc.r[2] + 0.0625).abs() < 1e-9, "{}", tc.r[2]);
    }

    #[test]
    fn taylor_zero_of_cosine() {
        let tc = taylor_coeffs(&sine_spec(1.0, 0.0).unwrap(), 40).unwrap();
        let v = zeta_taylor(&tc, c(PI, 0.0), 1e-12).unwrap();
        assert!(v.value.norm() < 1e-10);
        assert_eq!(zeta_taylor(&tc, c(0.0, 0.0), 1e-12).unwrap().value, c(1.0, 0.0));
    }

    #[test]
    fn short_expansion_is_rejected() {
        let tc = taylor_coeffs(&sine_spec(1.0, 0.0).unwrap(), 5).unwrap();
        match zeta_taylor(&tc, c(10.0, 0.0), 1e-10) {
            Err(Error::TruncationTooShort { required_n_max, .. }) => assert!(required_n_max > 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ode_sine_h_and_zero_z() {
        let spec = sine_spec(1.0, 1.0).unwrap();
        let sol = solve_h(&spec, c(2.0, 1.0), 0.0, OdeOptions::default()).unwrap();
        let h = sol.at(0.6).unwrap();
        let w = c(2.0, 1.0) * 0.3;
        assert!((h.a() - w.cos()).norm() < 1e-9 && (h.b() + w.sin()).norm() < 1e-9);
        let v = zeta_ode(&spec, c(1.0, 0.0), None).unwrap().value;
        assert!((v.re - 1.357008).abs() < 1e-6);
        let sol0 = solve_h(&spec, c(0.0, 0.0), 0.0, OdeOptions::default()).unwrap();
        assert_eq!(sol0.end().h, [c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(solve_h(&bessel_spec(1.0, 1.0).unwrap(), c(1.0, 0.0), 0.0, OdeOptions::default()).is_err());
    }

    #[test]
    fn pv_product_and_trace() {
        let zeros: Vec<f64> = (-2000..=2000).map(|k| 2.0 * PI * k as f64 - PI).collect();
        let p = pv_product(&zeros, c(PI, 0.0), &default_radii(10.0, 12000.0)).unwrap();
        assert!(p.value.norm() < 1e-12);
        assert!(pv_sum(&zeros, 3999.5 * PI).abs() < 1e-12);
        assert_eq!(pv_product(&[-1.0, 1.0], c(0.0, 0.0), &[2.0]).unwrap().value, c(1.0, 0.0));
        assert!(pv_product(&[0.0, 1.0], c(1.0, 0.0), &[2.0]).is_err());
    }

    #[test]
    fn b_product_sine() {
        let spec = sine_spec(1.0, 0.0).unwrap();
        let zeros: Vec<f64> = (-3000..=3000).map(|k| 2.0 * PI * k as f64).collect();
        let z = c(1.3, 0.4);
        let b = b_product(&spec, &zeros, z).unwrap();
        assert!((b + (z * 0.5).sin()).norm() < 1e-3);
        assert_eq!(b_product(&spec, &zeros, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(b_product(&spec, &[1.0], z).is_err());
    }

    #[test]
    fn log_derivative_of_cosine() {
        let zeros: Vec<f64> = (-20000..=20001).map(|k| PI * (2 * k - 1) as f64).collect();
        let w = 2.0 * PI * 20000.0;
        let v = log_derivative(&zeros, 2.0 * PI, c(0.0, 1.0), w).unwrap();
        assert!((v - c(0.0, -0.5 * 0.5f64.tanh())).norm() < 1e-4, "{v}");
        let vc = log_derivative(&zeros, 2.0 * PI, c(0.0, -1.0), w).unwrap();
        assert!((vc - v.conj()).norm() < 1e-12);
        assert!(log_derivative(&zeros, 2.0 * PI, c(1.0, 0.0), w).is_err());
    }
}
