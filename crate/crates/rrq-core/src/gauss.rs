//! Gauss-Legendre rules and polynomial interpolation utilities on [-1, 1]:
//! barycentric evaluation (real and complex argument), spectral
//! differentiation, and the value-to-monomial-coefficient map.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::Mat;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut t = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        for _ in 0..100 {
            let (p, d) = legendre_pd(n, t);
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pd(n, t);
        x[i] = -t;
        x[n - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Legendre P_n and its derivative at t.
fn legendre_pd(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Barycentric interpolation weights for the node set.
pub fn bary_weights(t: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut w = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i] *= t[i] - t[j];
            }
        }
        w[i] = 1.0 / w[i];
    }
    w
}

/// Evaluate the interpolant of `(t, f)` at a real point (second barycentric
/// form with an exact fallback when `x` coincides with a node).
pub fn bary_eval(t: &[f64], w: &[f64], f: &[f64], x: f64) -> f64 {
    let n = t.len();
    for i in 0..n {
        if (x - t[i]).abs() < 1e-14 {
            return f[i];
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let c = w[i] / (x - t[i]);
        num += c * f[i];
        den += c;
    }
    num / den
}

/// Evaluate the interpolant of `(t, f)` and its derivative at complex `z`
/// (second barycentric form, valid for any z off the node set).
pub fn bary_eval_complex(t: &[f64], w: &[f64], f: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let n = t.len();
    for i in 0..n {
        let d = z - t[i];
        if d.norm() < 1e-14 {
            // on (or numerically on) a node: value is f_i; derivative from the
            // differentiated Lagrange form
            let mut dv = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let lj = w[j] / w[i] / (t[i] - t[j]);
                    dv += (f[j] - f[i]) * lj;
                }
            }
            return (Complex64::new(f[i], 0.0), dv);
        }
    }
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    let mut dnum = Complex64::new(0.0, 0.0);
    let mut dden = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let d = z - t[i];
        let c = w[i] / d;
        num += c * f[i];
        den += c;
        let c2 = c / d;
        dnum -= c2 * f[i];
        dden -= c2;
    }
    let val = num / den;
    let deriv = (dnum * den - num * dden) / (den * den);
    (val, deriv)
}

/// Spectral differentiation matrix on the node set.
pub fn diff_matrix(t: &[f64]) -> Mat {
    let n = t.len();
    let w = bary_weights(t);
    let mut d = Mat::zeros(n, n);
    for i in 0..n {
        let mut rowsum = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (t[i] - t[j]);
                d.set(i, j, v);
                rowsum += v;
            }
        }
        d.set(i, i, -rowsum);
    }
    d
}

/// Monomial coefficients of the interpolant of `(t, f)` (Björck-Pereyra:
/// divided differences, then Newton-to-monomial expansion). This applies the
/// coefficient map U as a product of bidiagonal steps, which is far more
/// accurate than forming U explicitly.
pub fn apply_u(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut c = bjorck_pereyra(t, f);
    // one step of iterative refinement against Horner evaluation tightens the
    // divided-difference rounding for the larger node counts
    for _ in 0..2 {
        let mut resid = f.to_vec();
        for (i, &ti) in t.iter().enumerate() {
            let mut v = 0.0;
            for k in (0..n).rev() {
                v = v * ti + c[k];
            }
            resid[i] -= v;
        }
        let dc = bjorck_pereyra(t, &resid);
        for (ci, di) in c.iter_mut().zip(dc.iter()) {
            *ci += di;
        }
    }
    c
}

fn bjorck_pereyra(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut c = f.to_vec();
    for k in 0..n.saturating_sub(1) {
        for i in (k + 1..n).rev() {
            c[i] = (c[i] - c[i - 1]) / (t[i] - t[i - 1 - k]);
        }
    }
    for k in (0..n.saturating_sub(1)).rev() {
        for i in k..n - 1 {
            let next = c[i + 1];
            c[i] -= t[k] * next;
        }
    }
    c
}

/// Apply Uᵀ to a vector by running the transposed Björck-Pereyra steps in
/// reverse order, so that `apply_u_transpose(t, y) · f == y · apply_u(t, f)`.
pub fn apply_u_transpose(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut z = bjorck_pereyra_transpose(t, y);
    // refinement against the transposed Vandermonde residual y_k - sum_i t_i^k z_i
    for _ in 0..2 {
        let mut resid = y.to_vec();
        let mut pw = vec![1.0; n];
        for r in resid.iter_mut() {
            let mut s = 0.0;
            for i in 0..n {
                s += pw[i] * z[i];
            }
            *r -= s;
            for (pi, ti) in pw.iter_mut().zip(t.iter()) {
                *pi *= ti;
            }
        }
        let dz = bjorck_pereyra_transpose(t, &resid);
        for (zi, di) in z.iter_mut().zip(dz.iter()) {
            *zi += di;
        }
    }
    z
}

fn bjorck_pereyra_transpose(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut z = y.to_vec();
    // transpose of the Newton-to-monomial stage
    for k in 0..n.saturating_sub(1) {
        for i in (k + 1..n).rev() {
            let prev = z[i - 1];
            z[i] -= t[k] * prev;
        }
    }
    // transpose of the divided-difference stage
    for k in (0..n.saturating_sub(1)).rev() {
        for i in k + 1..n {
            z[i] /= t[i] - t[i - 1 - k];
        }
        for i in k..n - 1 {
            let d = z[i + 1];
            z[i] -= d;
        }
    }
    z
}
