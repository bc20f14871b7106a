//! Small dense linear algebra: 3-vectors, row-major matrices, LU with partial
//! pivoting (forward and transposed solves off one factorization), a 1-norm
//! condition estimate, and unrestarted MGS-GMRES.

use alloc::vec;
use alloc::vec::Vec;

pub type V3 = [f64; 3];

pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn norm(a: V3) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn normalize(a: V3) -> V3 {
    scale(a, 1.0 / norm(a))
}

pub fn dist(a: V3, b: V3) -> f64 {
    norm(sub(a, b))
}

/// Row-major dense matrix.
#[derive(Clone, Debug)]
pub struct Mat {
    pub nrows: usize,
    pub ncols: usize,
    pub a: Vec<f64>,
}

impl Mat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Mat {
            nrows,
            ncols,
            a: vec![0.0; nrows * ncols],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.ncols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let row = self.row(i);
            let mut s = 0.0;
            for j in 0..self.ncols {
                s += row[j] * x[j];
            }
            y[i] = s;
        }
        y
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        for i in 0..self.nrows {
            let row = self.row(i);
            for j in 0..self.ncols {
                y[j] += row[j] * x[i];
            }
        }
        y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SingularMatrix;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
    anorm1: f64,
}

impl Lu {
    pub fn factor(m: &Mat) -> Result<Lu, SingularMatrix> {
        assert_eq!(m.nrows, m.ncols);
        let n = m.nrows;
        let mut lu = m.a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut anorm1: f64 = 0.0;
        for j in 0..n {
            let mut colsum = 0.0;
            for i in 0..n {
                colsum += m.get(i, j).abs();
            }
            anorm1 = anorm1.max(colsum);
        }
        for k in 0..n {
            let mut pmax = lu[k * n + k].abs();
            let mut prow = k;
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > pmax {
                    pmax = v;
                    prow = i;
                }
            }
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(SingularMatrix);
            }
            if prow != k {
                for j in 0..n {
                    lu.swap(k * n + j, prow * n + j);
                }
                piv.swap(k, prow);
            }
            let pivval = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivval;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Ok(Lu {
            n,
            lu,
            piv,
            anorm1,
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = b[self.piv[i]];
        }
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        b.copy_from_slice(&x);
    }

    /// Solve `Aᵀ x = b` in place using the same factorization
    /// (`Aᵀ = Uᵀ Lᵀ P`).
    pub fn solve_transpose(&self, b: &mut [f64]) {
        let n = self.n;
        // Uᵀ y = b (forward substitution)
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * b[j];
            }
            b[i] = s / self.lu[i * n + i];
        }
        // Lᵀ z = y (backward substitution, unit diagonal)
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i] * b[j];
            }
            b[i] = s;
        }
        // x = Pᵀ z
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.piv[i]] = b[i];
        }
        b.copy_from_slice(&x);
    }

    /// 1-norm condition estimate (Hager-style power iteration on `A⁻¹`).
    pub fn cond_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![1.0 / n as f64; n];
        let mut est: f64 = 0.0;
        for _ in 0..5 {
            let mut y = x.clone();
            self.solve(&mut y);
            let ynorm: f64 = y.iter().map(|v| v.abs()).sum();
            est = est.max(ynorm);
            let mut xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            self.solve_transpose(&mut xi);
            let (mut jmax, mut vmax) = (0, 0.0);
            for (j, v) in xi.iter().enumerate() {
                if v.abs() > vmax {
                    vmax = v.abs();
                    jmax = j;
                }
            }
            let xsum: f64 = x
                .iter()
                .zip(xi.iter())
                .map(|(a, b)| a * b)
                .sum();
            if vmax <= xsum.abs() {
                break;
            }
            x = vec![0.0; n];
            x[jmax] = 1.0;
        }
        est * self.anorm1
    }
}

/// Abstract operator for GMRES.
pub trait LinOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub struct GmresResult {
    pub iters: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Unrestarted GMRES with modified Gram-Schmidt.
pub fn gmres<A: LinOp + ?Sized>(
    op: &A,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> GmresResult {
    let n = op.dim();
    let bnorm = libm::sqrt(b.iter().map(|v| v * v).sum::<f64>());
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return GmresResult {
            iters: 0,
            residual: 0.0,
            converged: true,
        };
    }
    // zero initial guess
    x.iter_mut().for_each(|v| *v = 0.0);
    let mut v_basis: Vec<Vec<f64>> = Vec::new();
    let mut r0: Vec<f64> = b.to_vec();
    let beta = bnorm;
    r0.iter_mut().for_each(|v| *v /= beta);
    v_basis.push(r0);

    let m = max_iter.min(n);
    let mut h = vec![0.0; (m + 1) * m]; // Hessenberg, h[i * m + j]
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    g[0] = beta;
    let mut resid = 1.0;
    let mut k_done = 0;

    for k in 0..m {
        let mut w = vec![0.0; n];
        op.apply(&v_basis[k], &mut w);
        for i in 0..=k {
            let hik: f64 = w.iter().zip(v_basis[i].iter()).map(|(a, b)| a * b).sum();
            h[i * m + k] = hik;
            for (wj, vj) in w.iter_mut().zip(v_basis[i].iter()) {
                *wj -= hik * vj;
            }
        }
        let hnext = libm::sqrt(w.iter().map(|v| v * v).sum::<f64>());
        h[(k + 1) * m + k] = hnext;
        // apply accumulated Givens rotations to the new column
        for i in 0..k {
            let t = cs[i] * h[i * m + k] + sn[i] * h[(i + 1) * m + k];
            h[(i + 1) * m + k] = -sn[i] * h[i * m + k] + cs[i] * h[(i + 1) * m + k];
            h[i * m + k] = t;
        }
        let denom = libm::sqrt(h[k * m + k] * h[k * m + k] + hnext * hnext);
        if denom == 0.0 {
            k_done = k;
            break;
        }
        cs[k] = h[k * m + k] / denom;
        sn[k] = hnext / denom;
        h[k * m + k] = denom;
        h[(k + 1) * m + k] = 0.0;
        g[k + 1] = -sn[k] * g[k];
        g[k] *= cs[k];
        resid = g[k + 1].abs() / bnorm;
        k_done = k + 1;
        if resid <= tol || hnext == 0.0 {
            break;
        }
        let mut vnew = w;
        vnew.iter_mut().for_each(|v| *v /= hnext);
        v_basis.push(vnew);
    }

    // back substitution for y, then x = V y
    let kk = k_done;
    let mut y = vec![0.0; kk];
    for i in (0..kk).rev() {
        let mut s = g[i];
        for j in i + 1..kk {
            s -= h[i * m + j] * y[j];
        }
        y[i] = s / h[i * m + i];
    }
    for i in 0..kk {
        for (xj, vj) in x.iter_mut().zip(v_basis[i].iter()) {
            *xj += y[i] * vj;
        }
    }
    GmresResult {
        iters: kk,
        residual: resid,
        converged: resid <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize, seed: u64) -> Mat {
        let mut s = seed.max(1);
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                let v = (s as f64 / u64::MAX as f64) * 2.0 - 1.0;
                m.set(i, j, v + if i == j { 3.0 } else { 0.0 });
            }
        }
        m
    }

    #[test]
    fn lu_solve_and_transpose() {
        let n = 24;
        let m = test_matrix(n, 5);
        let lu = Lu::factor(&m).unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = m.matvec(&x_true);
        lu.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x_true[i]).abs() < 1e-12);
        }
        let mut bt = m.matvec_transpose(&x_true);
        lu.solve_transpose(&mut bt);
        for i in 0..n {
            assert!((bt[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_singular_detected() {
        let mut m = Mat::zeros(3, 3);
        m.set(0, 0, 1.0);
        m.set(1, 1, 1.0);
        // row 2 zero
        assert!(matches!(Lu::factor(&m), Err(SingularMatrix)));
    }

    #[test]
    fn cond_estimate_sane() {
        let m = test_matrix(16, 9);
        let lu = Lu::factor(&m).unwrap();
        let c = lu.cond_estimate();
        assert!(c >= 1.0 && c < 1e4);
    }

    struct DenseOp(Mat);
    impl LinOp for DenseOp {
        fn dim(&self) -> usize {
            self.0.nrows
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            y.copy_from_slice(&self.0.matvec(x));
        }
    }

    #[test]
    fn gmres_solves_dense_system() {
        let n = 40;
        let m = test_matrix(n, 77);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11).cos()).collect();
        let b = m.matvec(&x_true);
        let op = DenseOp(m);
        let mut x = vec![0.0; n];
        let res = gmres(&op, &b, &mut x, 1e-12, 200);
        assert!(res.converged);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn gmres_zero_rhs() {
        let op = DenseOp(test_matrix(8, 3));
        let b = vec![0.0; 8];
        let mut x = vec![1.0; 8];
        let res = gmres(&op, &b, &mut x, 1e-12, 20);
        assert!(res.converged && res.iters == 0);
        assert!(x.iter().all(|v| *v == 0.0));
    }
}
