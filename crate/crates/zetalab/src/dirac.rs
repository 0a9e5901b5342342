//! Dirac operators described by affine-group paths t ↦ (x(t), y(t)) and a
//! pair of boundary vectors.
//!
//! With X = [[1, −x], [0, y]] the coefficient is R = XᵀX / (2 det X), so
//! det R = 1/4. The resolvent kernel is built from a = X u0/√det X and
//! c = X u1/√det X.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::quad::GaussLegendre;

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// The symplectic matrix J = [[0, −1], [1, 0]].
pub const J: Mat2 = [[0.0, -1.0], [1.0, 0.0]];

/// Quadrature order used on every path cell.
pub(crate) const CELL_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    PiecewiseConstant,
    PiecewiseLinear,
}

/// Sampled path. On (t[i−1], t[i]] (with t[−1] = 0) the piecewise-constant
/// mode uses sample i; the piecewise-linear mode interpolates between
/// samples i−1 and i and is constant on (0, t[0]].
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    t: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    interpolation: Interpolation,
}

impl GridPath {
    pub fn new(t: Vec<f64>, x: Vec<f64>, y: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if t.is_empty() || t.len() != x.len() || t.len() != y.len() {
            return Err(Error::InvalidSpec("t, x, y must be non-empty and of equal length".into()));
        }
        if !(t[0] > 0.0) || t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSpec("t must be strictly increasing in (0, σ]".into()));
        }
        if let Some(i) = y.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidSpec(format!("y[{i}] = {} is not positive", y[i])));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!("x[{i}] is not finite")));
        }
        Ok(GridPath { t, x, y, interpolation })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn y(&self) -> &[f64] {
        &self.y
    }
    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }
}

/// Anything that can supply the path coefficients of a Dirac operator.
pub trait Coefficients: Send + Sync {
    fn sigma(&self) -> f64;
    fn xy(&self, t: f64) -> (f64, f64);
    /// Breakpoints 0 = c_0 < c_1 < … < c_m = σ between which the path is smooth.
    fn cells(&self) -> Vec<f64>;
    /// Whether R is integrable up to t = 0, so that integration may start there.
    fn regular_at_zero(&self) -> bool {
        true
    }
    /// Whether the path is constant between consecutive breakpoints.
    fn constant_on_cells(&self) -> bool {
        false
    }
}

impl Coefficients for GridPath {
    fn sigma(&self) -> f64 {
        *self.t.last().unwrap()
    }

    fn xy(&self, t: f64) -> (f64, f64) {
        let n = self.t.len();
        let i = self.t.partition_point(|&ti| ti < t).min(n - 1);
        match self.interpolation {
            Interpolation::PiecewiseConstant => (self.x[i], self.y[i]),
            Interpolation::PiecewiseLinear => {
                if i == 0 {
                    return (self.x[0], self.y[0]);
                }
                let w = ((t - self.t[i - 1]) / (self.t[i] - self.t[i - 1])).clamp(0.0, 1.0);
                (
                    self.x[i - 1] + w * (self.x[i] - self.x[i - 1]),
                    self.y[i - 1] + w * (self.y[i] - self.y[i - 1]),
                )
            }
        }
    }

    fn cells(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.t.len() + 1);
        c.push(0.0);
        c.extend_from_slice(&self.t);
        c
    }

    fn constant_on_cells(&self) -> bool {
        self.interpolation == Interpolation::PiecewiseConstant
    }
}

/// x ≡ 0, y ≡ 1 on (0, σ]: R = I/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinePath {
    pub sigma: f64,
}

impl Coefficients for SinePath {
    fn sigma(&self) -> f64 {
        self.sigma
    }
    fn xy(&self, _t: f64) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn cells(&self) -> Vec<f64> {
        (0..=16).map(|k| self.sigma * k as f64 / 16.0).collect()
    }
}

/// x ≡ 0, y = s^{−α} on (0, σ]; R is singular at 0 for α ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPath {
    pub sigma: f64,
    pub alpha: f64,
}

impl Coefficients for BesselPath {
    fn sigma(&self) -> f64 {
        self.sigma
    }
    fn xy(&self, t: f64) -> (f64, f64) {
        (0.0, t.powf(-self.alpha))
    }
    fn cells(&self) -> Vec<f64> {
        graded_cells(self.sigma, 1e-14, 32)
    }
    fn regular_at_zero(&self) -> bool {
        self.alpha < 1.0
    }
}

/// Breakpoints that halve towards 0 down to `tiny·σ`, then `uniform` equal cells.
pub fn graded_cells(sigma: f64, tiny: f64, uniform: usize) -> Vec<f64> {
    let h = sigma / uniform as f64;
    let mut small = vec![];
    let mut b = h;
    while b > tiny * sigma {
        b *= 0.5;
        small.push(b);
    }
    small.reverse();
    let mut c = vec![0.0];
    c.extend(small);
    c.extend((1..=uniform).map(|k| h * k as f64));
    c
}

/// Boundary vectors with u0ᵀ J u1 = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub u0: Vec2,
    pub u1: Vec2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl BoundaryCondition {
    pub fn new(u0: Vec2, u1: Vec2) -> Result<Self> {
        if u0 == [0.0, 0.0] || u1 == [0.0, 0.0] {
            return Err(Error::InvalidSpec("boundary vectors must be nonzero".into()));
        }
        let s = symplectic(u0, u1);
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!("u0ᵀJu1 = {s}, expected 1")));
        }
        Ok(BoundaryCondition { u0, u1, q: None })
    }
}

/// u0 = [1, 0], u1 = [−q, −1].
pub fn make_q_boundary(q: f64) -> Result<BoundaryCondition> {
    if !q.is_finite() {
        return Err(Error::Domain(format!("q must be finite, got {q}")));
    }
    Ok(BoundaryCondition { u0: [1.0, 0.0], u1: [-q, -1.0], q: Some(q) })
}

/// uᵀ J v.
pub fn symplectic(u: Vec2, v: Vec2) -> f64 {
    -u[0] * v[1] + u[1] * v[0]
}

pub fn r_matrix(x: f64, y: f64) -> Result<Mat2> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("y must be positive, got {y}")));
    }
    let s = 0.5 / y;
    Ok([[s, -x * s], [-x * s, (x * x + y * y) * s]])
}

pub fn a_c_vectors(x: f64, y: f64, boundary: &BoundaryCondition) -> Result<(Vec2, Vec2)> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("y must be positive, got {y}")));
    }
    let k = 1.0 / y.sqrt();
    let apply = |u: Vec2| [k * (u[0] - x * u[1]), k * y * u[1]];
    Ok((apply(boundary.u0), apply(boundary.u1)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracSpec<P = GridPath> {
    pub path: P,
    pub boundary: BoundaryCondition,
}

impl<P: Coefficients> DiracSpec<P> {
    pub fn new(path: P, boundary: BoundaryCondition) -> Self {
        DiracSpec { path, boundary }
    }

    pub fn sigma(&self) -> f64 {
        self.path.sigma()
    }

    pub fn r_at(&self, t: f64) -> Mat2 {
        let (x, y) = self.path.xy(t);
        r_matrix(x, y).expect("path invariant y > 0")
    }

    pub fn ac_at(&self, t: f64) -> (Vec2, Vec2) {
        let (x, y) = self.path.xy(t);
        a_c_vectors(x, y, &self.boundary).expect("path invariant y > 0")
    }
}

pub fn sine_spec(sigma: f64, q: f64) -> Result<DiracSpec<SinePath>> {
    Ok(DiracSpec::new(SinePath { sigma }, make_q_boundary(q)?))
}

/// Bessel operator with boundary u1 = [0, −1].
pub fn bessel_spec(sigma: f64, alpha: f64) -> Result<DiracSpec<BesselPath>> {
    if !(alpha > 0.0) {
        return Err(Error::Domain("α must be positive".into()));
    }
    Ok(DiracSpec::new(BesselPath { sigma, alpha }, make_q_boundary(0.0)?))
}

/// Sum of `f` over Gauss–Legendre nodes of all cells.
pub(crate) fn integrate_cells<P: Coefficients, F: FnMut(f64) -> f64>(path: &P, mut f: F) -> f64 {
    let g = GaussLegendre::new(CELL_ORDER);
    path.cells().windows(2).map(|w| g.integrate(w[0], w[1], &mut f)).sum()
}

/// ½ ∫₀^σ a(s)ᵀc(s) ds; equals ∫ (x − q)/(2y) for q-boundaries.
pub fn integral_trace<P: Coefficients>(spec: &DiracSpec<P>) -> f64 {
    integrate_cells(&spec.path, |s| {
        let (a, c) = spec.ac_at(s);
        0.5 * (a[0] * c[0] + a[1] * c[1])
    })
}

/// K(s, t) = ½ a(s)c(t)ᵀ for s < t and ½ c(s)a(t)ᵀ for s ≥ t.
pub fn resolvent_kernel<P: Coefficients>(spec: &DiracSpec<P>, s: f64, t: f64) -> Result<Mat2> {
    let sigma = spec.sigma();
    for v in [s, t] {
        if !(v > 0.0 && v <= sigma) {
            return Err(Error::Domain(format!("time {v} outside (0, {sigma}]")));
        }
    }
    let (a_s, c_s) = spec.ac_at(s);
    let (a_t, c_t) = spec.ac_at(t);
    Ok(if s < t { outer_half(a_s, c_t) } else { outer_half(c_s, a_t) })
}

fn outer_half(u: Vec2, v: Vec2) -> Mat2 {
    [[0.5 * u[0] * v[0], 0.5 * u[0] * v[1]], [0.5 * u[1] * v[0], 0.5 * u[1] * v[1]]]
}

/// ‖K‖²_HS = ½ ∫₀^σ |c(t)|² ∫₀^t |a(s)|² ds dt.
pub fn hs_norm_sq<P: Coefficients>(spec: &DiracSpec<P>) -> f64 {
    let g = GaussLegendre::new(CELL_ORDER);
    let p = g.len();
    let mut acc_a = 0.0;
    let mut total = 0.0;
    for w in spec.path.cells().windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half = 0.5 * (hi - lo);
        let nodes: Vec<f64> = g.nodes_on(lo, hi).collect();
        let (a2, c2): (Vec<f64>, Vec<f64>) = nodes
            .iter()
            .map(|&s| {
                let (a, c) = spec.ac_at(s);
                (a[0] * a[0] + a[1] * a[1], c[0] * c[0] + c[1] * c[1])
            })
            .unzip();
        for j in 0..p {
            let inner: f64 = acc_a + half * (0..p).map(|m| g.antideriv[j][m] * a2[m]).sum::<f64>();
            total += half * g.weights[j] * c2[j] * inner;
        }
        acc_a += half * (0..p).map(|m| g.weights[m] * a2[m]).sum::<f64>();
    }
    0.5 * total
}

/// Finite-matrix image of the resolvent: midpoint collocation on a uniform
/// grid with √(cell width) weights. Diagonal blocks take the mean of the two
/// one-sided kernel limits.
#[derive(Debug, Clone)]
pub struct DiscretizedResolvent {
    pub n_cells: usize,
    /// Row-major 2N × 2N symmetric matrix.
    pub matrix: Vec<f64>,
    /// Eigenvalues ν_k, sorted by magnitude, largest first.
    pub eigenvalues: Vec<f64>,
    /// Midpoint quadrature of ½ aᵀc (the trace of `matrix`).
    pub integral_trace: f64,
    /// ‖K‖²_HS of the continuous operator, by high-order quadrature.
    pub hs_norm_sq: f64,
}

impl DiscretizedResolvent {
    pub fn dim(&self) -> usize {
        2 * self.n_cells
    }

    /// Squared mass of the eigenvalues the matrix does not resolve.
    pub fn unresolved_mass(&self) -> f64 {
        self.hs_norm_sq - self.eigenvalues.iter().map(|v| v * v).sum::<f64>()
    }
}

pub fn discretize_resolvent<P: Coefficients>(spec: &DiracSpec<P>, n_cells: usize) -> Result<DiscretizedResolvent> {
    if n_cells < 2 {
        return Err(Error::Domain("n_cells must be at least 2".into()));
    }
    let sigma = spec.sigma();
    let h = sigma / n_cells as f64;
    let mut a = Vec::with_capacity(n_cells);
    let mut c = Vec::with_capacity(n_cells);
    for i in 0..n_cells {
        let s = (i as f64 + 0.5) * h;
        let (ai, ci) = spec.ac_at(s);
        if !(ai.iter().chain(ci.iter()).all(|v| v.is_finite())) {
            return Err(Error::Quadrature { cell: i, t: s, reason: "kernel not finite at midpoint".into() });
        }
        a.push(ai);
        c.push(ci);
    }
    let dim = 2 * n_cells;
    let mut m = vec![0.0; dim * dim];
    let mut trace = 0.0;
    for i in 0..n_cells {
        for j in 0..n_cells {
            let blk = if i < j {
                outer_half(a[i], c[j])
            } else if i > j {
                outer_half(c[i], a[j])
            } else {
                let p = outer_half(a[i], c[i]);
                let q = outer_half(c[i], a[i]);
                [[0.5 * (p[0][0] + q[0][0]), 0.5 * (p[0][1] + q[0][1])], [0.5 * (p[1][0] + q[1][0]), 0.5 * (p[1][1] + q[1][1])]]
            };
            for r in 0..2 {
                for s in 0..2 {
                    m[(2 * i + r) * dim + 2 * j + s] = h * blk[r][s];
                }
            }
            if i == j {
                trace += h * (blk[0][0] + blk[1][1]);
            }
        }
    }
    let mut work = m.clone();
    let mut ev = linalg::eigvalsh(&mut work, dim).map_err(Error::Lapack)?;
    ev.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
    Ok(DiscretizedResolvent { n_cells, matrix: m, eigenvalues: ev, integral_trace: trace, hs_norm_sq: hs_norm_sq(spec) })
}

#[derive(Serialize, Deserialize)]
struct GridPointDoc {
    t: f64,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    sigma: f64,
    grid: Vec<GridPointDoc>,
    boundary: BoundaryCondition,
    interpolation: Interpolation,
}

impl DiracSpec<GridPath> {
    pub fn to_json(&self) -> String {
        let p = &self.path;
        let doc = SpecDoc {
            sigma: p.sigma(),
            grid: (0..p.t.len()).map(|i| GridPointDoc { t: p.t[i], x: p.x[i], y: p.y[i] }).collect(),
            boundary: self.boundary,
            interpolation: p.interpolation,
        };
        serde_json::to_string(&doc).expect("spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SpecDoc = serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        let t: Vec<f64> = doc.grid.iter().map(|g| g.t).collect();
        if t.last().map(|&l| (l - doc.sigma).abs() > 1e-12 * doc.sigma.abs().max(1.0)).unwrap_or(true) {
            return Err(Error::InvalidSpec("last grid time must equal sigma".into()));
        }
        let path = GridPath::new(t, doc.grid.iter().map(|g| g.x).collect(), doc.grid.iter().map(|g| g.y).collect(), doc.interpolation)?;
        let b = doc.boundary;
        let boundary = match b.q {
            Some(q) => {
                let qb = make_q_boundary(q)?;
                if qb.u0 != b.u0 || qb.u1 != b.u1 {
                    return Err(Error::InvalidSpec("q disagrees with u0/u1".into()));
                }
                qb
            }
            None => BoundaryCondition::new(b.u0, b.u1)?,
        };
        Ok(DiracSpec { path, boundary })
    }
}
