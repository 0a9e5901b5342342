//! Adaptive Dormand–Prince 5(4) integrator for complex vector fields.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates y' = f(t, y) from t0 to t1 with mixed error control
/// |err_i| ≤ atol + rtol·|y_i|.
pub fn integrate<F>(mut f: F, t0: f64, t1: f64, y0: &[C64], rtol: f64, atol: f64) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    if t1 == t0 || n == 0 {
        return Ok(y);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut h = dir * (span * 1e-3).min(0.1);
    let mut k = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    f(t, &y, &mut k[0]);
    for _ in 0..10_000_000 {
        if (t1 - t) * dir <= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..s {
                    acc += k[j][i] * (h * A[s][j]);
                }
                tmp[i] = acc;
            }
            f(t + C[s] * h, &tmp, &mut k[s]);
        }
        // tmp now holds the fifth-order solution (FSAL row).
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = C64::new(0.0, 0.0);
            for s in 0..7 {
                e += k[s][i] * (B5[s] - B4[s]);
            }
            let scale = atol + rtol * y[i].norm().max(tmp[i].norm());
            err = err.max((e * h).norm() / scale);
        }
        if !err.is_finite() {
            return Err(Error::Overflow(format!("ODE solution not finite near t = {t}")));
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&tmp);
            k.swap(0, 6);
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h.abs() < 1e-14 * span.max(t.abs()) {
            return Err(Error::StepUnderflow { t });
        }
    }
    Err(Error::StepUnderflow { t })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_rotation() {
        let y = integrate(|_, y, d| d[0] = y[0] * C64::new(0.3, 2.0), 0.0, 3.0, &[C64::new(1.0, 0.0)], 1e-12, 1e-14)
            .unwrap();
        assert!((y[0] - (C64::new(0.3, 2.0) * 3.0).exp()).norm() < 1e-10);
        let back = integrate(|_, y, d| d[0] = y[0] * C64::new(0.3, 2.0), 3.0, 0.0, &y, 1e-12, 1e-14).unwrap();
        assert!((back[0] - 1.0).norm() < 1e-10);
    }

    #[test]
    fn time_dependent_system() {
        // y1' = y2, y2' = −t y1: compare with a fine fixed-step RK4.
        let f = |t: f64, y: &[C64], d: &mut [C64]| {
            d[0] = y[1];
            d[1] = -y[0] * t;
        };
        let y = integrate(f, 0.0, 4.0, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 1e-12, 1e-14).unwrap();
        let mut r = [1.0f64, 0.0];
        let n = 40_000;
        let h = 4.0 / n as f64;
        let g = |t: f64, r: [f64; 2]| [r[1], -t * r[0]];
        for i in 0..n {
            let t = i as f64 * h;
            let k1 = g(t, r);
            let k2 = g(t + h / 2.0, [r[0] + h / 2.0 * k1[0], r[1] + h / 2.0 * k1[1]]);
            let k3 = g(t + h / 2.0, [r[0] + h / 2.0 * k2[0], r[1] + h / 2.0 * k2[1]]);
            let k4 = g(t + h, [r[0] + h * k3[0], r[1] + h * k3[1]]);
            for j in 0..2 {
                r[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        assert!((y[0].re - r[0]).abs() < 1e-10 && (y[1].re - r[1]).abs() < 1e-10);
    }
}
