//! Gauss–Legendre panels, spectral indefinite integration and graded
//! composite rules for integrable endpoint singularities.

use std::f64::consts::PI;

/// Gauss–Legendre rule on [-1, 1] together with the matrix that maps
/// values at the nodes to integrals from -1 up to each node.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `antideriv[j][m]` = ∫_{-1}^{x_j} ℓ_m(x) dx for the Lagrange basis ℓ_m.
    pub antideriv: Vec<Vec<f64>>,
}

/// Values P_0(x), …, P_{n}(x) of the Legendre polynomials.
fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for k in 1..n {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
    }
    p
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let p = legendre_all(n, x);
                let dp = n as f64 * (x * p[n] - p[n - 1]) / (x * x - 1.0);
                let dx = p[n] / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let p = legendre_all(n, x);
            let dp = n as f64 * (x * p[n] - p[n - 1]) / (x * x - 1.0);
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        // ℓ_m(x) = w_m Σ_k (2k+1)/2 P_k(x_m) P_k(x), exact for degree < n.
        // ∫_{-1}^{x} P_0 = x + 1 and ∫_{-1}^{x} P_k = (P_{k+1} − P_{k−1})/(2k+1).
        let pm: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_all(n, x)).collect();
        let mut antideriv = vec![vec![0.0; n]; n];
        for (j, &xj) in nodes.iter().enumerate() {
            let pj = &pm[j];
            let mut ints = vec![0.0; n];
            ints[0] = xj + 1.0;
            for k in 1..n {
                ints[k] = (pj[k + 1] - pj[k - 1]) / (2.0 * k as f64 + 1.0);
            }
            for m in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += (2.0 * k as f64 + 1.0) / 2.0 * pm[m][k] * ints[k];
                }
                antideriv[j][m] = weights[m] * s;
            }
        }
        GaussLegendre { nodes, weights, antideriv }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes mapped to [a, b].
    pub fn nodes_on(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().map(move |&x| m + r * x)
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(m + r * x);
        }
        s * r
    }
}

/// Adaptive bisection with a Gauss–Legendre panel pair (n vs 2n points).
pub fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> f64 {
    let lo = GaussLegendre::new(10);
    let hi = GaussLegendre::new(20);
    adaptive_rec(f, a, b, tol, &lo, &hi, 0)
}

fn adaptive_rec<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    lo: &GaussLegendre,
    hi: &GaussLegendre,
    depth: usize,
) -> f64 {
    let i1 = lo.integrate(a, b, &mut *f);
    let i2 = hi.integrate(a, b, &mut *f);
    if (i1 - i2).abs() <= tol.max(1e-15 * i2.abs()) || depth > 40 {
        return i2;
    }
    let m = 0.5 * (a + b);
    adaptive_rec(f, a, m, 0.5 * tol, lo, hi, depth + 1)
        + adaptive_rec(f, m, b, 0.5 * tol, lo, hi, depth + 1)
}

/// Composite rule on panels that shrink geometrically towards `a`, for
/// integrands with an integrable power singularity at the left endpoint.
pub fn graded<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut right = b;
    let width = b - a;
    for _ in 0..200 {
        let left = a + 0.5 * (right - a);
        let piece = adaptive(f, left, right, tol * 0.01);
        total += piece;
        right = left;
        if right - a < 1e-300 + width * 1e-18 || (piece.abs() < tol * 1e-3 && right - a < width * 1e-6) {
            break;
        }
    }
    total + adaptive(f, a, right, tol * 0.01)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let g = GaussLegendre::new(8);
        let v = g.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
    }

    #[test]
    fn antiderivative_matrix_integrates_polynomials() {
        let g = GaussLegendre::new(12);
        let f: Vec<f64> = g.nodes.iter().map(|x| 3.0 * x * x - x.powi(7)).collect();
        for (j, &xj) in g.nodes.iter().enumerate() {
            let s: f64 = (0..12).map(|m| g.antideriv[j][m] * f[m]).sum();
            let exact = (xj.powi(3) - xj.powi(8) / 8.0) - (-1.0 - 1.0 / 8.0);
            assert!((s - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn graded_handles_inverse_sqrt() {
        let v = graded(&mut |x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12);
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }
}
