//! Solid harmonics and friends: associated Legendre recurrences, the regular
//! solid harmonics R_l^m and their coordinate-cycled variant S^(l,m), the real
//! basis H^(l,m), gradients, second derivatives contracted with a direction,
//! and local-expansion translation.
//!
//! Normalization follows R_l^m = r^l Y_l^m / sqrt(2l+1) with Y_l^m carrying
//! neither the 1/sqrt(4pi) factor nor the Condon-Shortley phase. Most
//! references differ by one or both factors; all recurrences below are
//! consistent with this choice, giving e.g. R_1^0 = z, R_1^1 = (x+iy)/sqrt(2),
//! H^(1,1)(x,y,z) = z, and S^(l,-m) = (-1)^m conj(S^(l,m)) at real points.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::V3;

/// Index into a full (l, m) table of size (p+1)^2, -l <= m <= l.
#[inline]
pub fn tidx(l: usize, m: i32) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * (l + 1)) as i64 + m as i64) as usize
}

/// Index into a packed triangular table over 1 <= m <= l.
#[inline]
pub fn hidx(l: usize, m: usize) -> usize {
    l * (l - 1) / 2 + (m - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DomainError;

/// Associated Legendre table P_l^m(x) for 0 <= m <= l <= p, packed at
/// l(l+1)/2 + m, computed by the standard recurrences (Condon-Shortley
/// phase included, so P_1^1(0) = -1).
pub fn assoc_legendre_table(x: f64, p: usize) -> Result<Vec<f64>, DomainError> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(DomainError);
    }
    let pidx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut t = vec![0.0; (p + 1) * (p + 2) / 2];
    t[0] = 1.0;
    let s = libm::sqrt(1.0 - x * x);
    for l in 0..p {
        let lf = l as f64;
        // P_{l+1}^{l+1} = -(2l+1) sqrt(1-x^2) P_l^l
        t[pidx(l + 1, l + 1)] = -(2.0 * lf + 1.0) * s * t[pidx(l, l)];
        // P_{l+1}^l = (2l+1) x P_l^l
        t[pidx(l + 1, l)] = (2.0 * lf + 1.0) * x * t[pidx(l, l)];
    }
    for m in 0..=p {
        for l in (m + 1)..p {
            let (lf, mf) = (l as f64, m as f64);
            // (l-m+1) P_{l+1}^m = (2l+1) x P_l^m - (l+m) P_{l-1}^m
            t[pidx(l + 1, m)] = ((2.0 * lf + 1.0) * x * t[pidx(l, m)]
                - (lf + mf) * t[pidx(l - 1, m)])
                / (lf - mf + 1.0);
        }
    }
    Ok(t)
}

/// Values and gradients of a full solid-harmonic family at one point.
#[derive(Clone, Debug)]
pub struct HarmonicTable {
    pub p: usize,
    pub s: Vec<Complex64>,
    pub grad: Vec<[Complex64; 3]>,
}

impl HarmonicTable {
    #[inline]
    pub fn val(&self, l: usize, m: i32) -> Complex64 {
        self.s[tidx(l, m)]
    }

    #[inline]
    pub fn grad(&self, l: usize, m: i32) -> [Complex64; 3] {
        self.grad[tidx(l, m)]
    }
}

#[inline]
fn sq(v: f64) -> f64 {
    libm::sqrt(v)
}

/// R_l^m values at (x, y, z) for 0 <= l <= p, |m| <= l (trig-free recurrences).
fn r_values(r: V3, p: usize) -> Vec<Complex64> {
    let [x, y, z] = r;
    let r2 = x * x + y * y + z * z;
    let xiy = Complex64::new(x, y);
    let mut t = vec![Complex64::new(0.0, 0.0); (p + 1) * (p + 1)];
    t[tidx(0, 0)] = Complex64::new(1.0, 0.0);
    // diagonal and subdiagonal
    for m in 0..p {
        let mf = m as f64;
        let rmm = t[tidx(m, m as i32)];
        t[tidx(m + 1, (m + 1) as i32)] = sq((2.0 * mf + 1.0) / (2.0 * mf + 2.0)) * xiy * rmm;
        t[tidx(m + 1, m as i32)] = sq(2.0 * mf + 1.0) * z * rmm;
    }
    // upward in l
    for m in 0..=p {
        for l in (m + 1)..p {
            let (lf, mf) = (l as f64, m as f64);
            let num = (2.0 * lf + 1.0) * z * t[tidx(l, m as i32)]
                - sq((lf + mf) * (lf - mf)) * r2 * t[tidx(l - 1, m as i32)];
            t[tidx(l + 1, m as i32)] = num / sq((lf + mf + 1.0) * (lf - mf + 1.0));
        }
    }
    // negative m by symmetry (real argument): R_l^{-m} = (-1)^m conj(R_l^m)
    for l in 1..=p {
        for m in 1..=l as i32 {
            let v = t[tidx(l, m)].conj();
            t[tidx(l, -m)] = if m % 2 == 0 { v } else { -v };
        }
    }
    t
}

/// Gradient of R_l^m from the degree-(l-1) values.
fn r_gradients(vals: &[Complex64], p: usize) -> Vec<[Complex64; 3]> {
    let zero = Complex64::new(0.0, 0.0);
    let mut g = vec![[zero; 3]; (p + 1) * (p + 1)];
    let get = |l: i64, m: i64| -> Complex64 {
        if l < 0 || m.unsigned_abs() as i64 > l {
            zero
        } else {
            vals[tidx(l as usize, m as i32)]
        }
    };
    for l in 1..=p as i64 {
        for m in -l..=l {
            let (lf, mf) = (l as f64, m as f64);
            let a = sq((lf + mf) * (lf + mf - 1.0));
            let b = sq((lf - mf) * (lf - mf - 1.0));
            let c = sq((lf + mf) * (lf - mf));
            let rm1 = get(l - 1, m - 1);
            let rp1 = get(l - 1, m + 1);
            let r0 = get(l - 1, m);
            let dx = 0.5 * (a * rm1 - b * rp1);
            let dy = Complex64::new(0.0, 0.5) * (a * rm1 + b * rp1);
            let dz = c * r0;
            g[tidx(l as usize, m as i32)] = [dx, dy, dz];
        }
    }
    g
}

/// Full table of R_l^m and gradients at r.
pub fn solid_r_table(r: V3, p: usize) -> HarmonicTable {
    let s = r_values(r, p);
    let grad = r_gradients(&s, p);
    HarmonicTable { p, s, grad }
}

/// Full table of S^(l,m)(r) = R_l^m(y, z, x) and gradients at r.
pub fn solid_harmonic_table(r: V3, p: usize) -> HarmonicTable {
    let cycled = [r[1], r[2], r[0]];
    let s = r_values(cycled, p);
    let gr = r_gradients(&s, p);
    let grad = gr
        .iter()
        .map(|g| [g[2], g[0], g[1]])
        .collect();
    HarmonicTable { p, s, grad }
}

/// Table of second derivatives contracted with a fixed direction:
/// entry (l, m) holds grad(nu . grad S^(l,m)) at r.
pub fn hessian_dot_nu(r: V3, p: usize, nu: V3) -> Vec<[Complex64; 3]> {
    let zero = Complex64::new(0.0, 0.0);
    let cycled_r = [r[1], r[2], r[0]];
    let cycled_nu = [nu[1], nu[2], nu[0]];
    let vals = r_values(cycled_r, p);
    let grads = r_gradients(&vals, p);
    let getg = |l: i64, m: i64| -> [Complex64; 3] {
        if l < 0 || m.unsigned_abs() as i64 > l {
            [zero; 3]
        } else {
            grads[tidx(l as usize, m as i32)]
        }
    };
    let mut out = vec![[zero; 3]; (p + 1) * (p + 1)];
    for l in 1..=p as i64 {
        for m in -l..=l {
            let (lf, mf) = (l as f64, m as f64);
            let a = sq((lf + mf) * (lf + mf - 1.0));
            let b = sq((lf - mf) * (lf - mf - 1.0));
            let c = sq((lf + mf) * (lf - mf));
            // nu . grad R_l^m as a combination of R_{l-1}^{m'}
            let cm1 = 0.5 * Complex64::new(cycled_nu[0], cycled_nu[1]) * a;
            let cp1 = 0.5 * Complex64::new(-cycled_nu[0], cycled_nu[1]) * b;
            let c0 = Complex64::new(cycled_nu[2] * c, 0.0);
            let gm1 = getg(l - 1, m - 1);
            let gp1 = getg(l - 1, m + 1);
            let g0 = getg(l - 1, m);
            let mut w = [zero; 3];
            for d in 0..3 {
                w[d] = cm1 * gm1[d] + cp1 * gp1[d] + c0 * g0[d];
            }
            out[tidx(l as usize, m as i32)] = [w[2], w[0], w[1]];
        }
    }
    out
}

/// Real basis H^(l,m) = sqrt(2) Im(S^(l,m)) and gradients, 1 <= m <= l <= p,
/// packed at `hidx`.
#[derive(Clone, Debug)]
pub struct HBasis {
    pub p: usize,
    pub val: Vec<f64>,
    pub grad: Vec<V3>,
}

pub fn real_basis_h(r: V3, p: usize) -> HBasis {
    assert!(p >= 1);
    let st = solid_harmonic_table(r, p);
    let n = p * (p + 1) / 2;
    let mut val = vec![0.0; n];
    let mut grad = vec![[0.0; 3]; n];
    let s2 = libm::sqrt(2.0);
    for l in 1..=p {
        for m in 1..=l {
            let k = hidx(l, m);
            val[k] = s2 * st.val(l, m as i32).im;
            let g = st.grad(l, m as i32);
            grad[k] = [s2 * g[0].im, s2 * g[1].im, s2 * g[2].im];
        }
    }
    HBasis { p, val, grad }
}

fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || k > n || n < 0 {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// T_{jk,lm} = sqrt(C(l+m, j+k)) sqrt(C(l-m, j-k)); zero out of range.
pub fn translation_coeff(j: usize, k: i32, l: usize, m: i32) -> f64 {
    sq(binom((l as i64) + (m as i64), (j as i64) + (k as i64)))
        * sq(binom((l as i64) - (m as i64), (j as i64) - (k as i64)))
}

/// Translate a local expansion: coefficients D_j^k with
/// sum C_l^m S^(l,m)(r) = sum D_j^k S^(j,k)(r - r'). Cost O(p^4).
pub fn translate_local(c: &[Complex64], p: usize, rp: V3) -> Vec<Complex64> {
    // S^(l,m)(r) = R_l^m(Cr) with C the coordinate cycle, so the R-basis
    // translation identity applies verbatim with shift Crp.
    let cycled = [rp[1], rp[2], rp[0]];
    let rvals = r_values(cycled, p);
    let mut d = vec![Complex64::new(0.0, 0.0); (p + 1) * (p + 1)];
    for j in 0..=p {
        for k in -(j as i32)..=(j as i32) {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in j..=p {
                for m in -(l as i32)..=(l as i32) {
                    let dm = m - k;
                    if dm.unsigned_abs() as usize > l - j {
                        continue;
                    }
                    let t = translation_coeff(j, k, l, m);
                    if t != 0.0 {
                        acc += t * rvals[tidx(l - j, dm)] * c[tidx(l, m)];
                    }
                }
            }
            d[tidx(j, k)] = acc;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_stream(seed: u64, count: usize) -> Vec<f64> {
        let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).max(1);
        (0..count)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s as f64 / u64::MAX as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn legendre_examples() {
        let t = assoc_legendre_table(0.3, 4).unwrap();
        assert_eq!(t[0], 1.0);
        let t = assoc_legendre_table(0.0, 2).unwrap();
        // P_1^1(0) = -1 (Condon-Shortley included)
        assert!((t[2] + 1.0).abs() < 1e-15);
        let t = assoc_legendre_table(0.5, 2).unwrap();
        // P_2^0(0.5) = (3 x^2 - 1)/2 = -0.125
        assert!((t[3] + 0.125).abs() < 1e-15);
        assert_eq!(assoc_legendre_table(1.2, 3), Err(DomainError));
    }

    #[test]
    fn legendre_recurrences_hold_as_written() {
        let p = 9;
        let x = -0.37;
        let t = assoc_legendre_table(x, p).unwrap();
        let pv = |l: usize, m: usize| t[l * (l + 1) / 2 + m];
        let s = libm::sqrt(1.0 - x * x);
        for l in 0..p {
            let lf = l as f64;
            assert!((pv(l + 1, l + 1) + (2.0 * lf + 1.0) * s * pv(l, l)).abs() < 1e-12 * pv(l, l).abs().max(1.0));
            assert!((pv(l + 1, l) - (2.0 * lf + 1.0) * x * pv(l, l)).abs() < 1e-12 * pv(l, l).abs().max(1.0));
        }
        for m in 0..p {
            for l in (m + 1)..p {
                let (lf, mf) = (l as f64, m as f64);
                let lhs = (lf - mf + 1.0) * pv(l + 1, m);
                let rhs = (2.0 * lf + 1.0) * x * pv(l, m) - (lf + mf) * pv(l - 1, m);
                assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn r_matches_spherical_definition() {
        // R_l^m = r^l sqrt((l-m)!/(l+m)!) (-1)^m P_l^m(cos th) e^{i m phi}
        let p = 6;
        let pts = rand_stream(31, 9);
        for c in pts.chunks(3) {
            let r = [c[0], c[1], c[2] + 1.5];
            let rn = libm::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
            let ct = r[2] / rn;
            let phi = libm::atan2(r[1], r[0]);
            let tab = solid_r_table(r, p);
            let pl = assoc_legendre_table(ct, p).unwrap();
            for l in 0..=p {
                for m in 0..=l {
                    let mut fr = 1.0;
                    for q in (l - m + 1)..=(l + m) {
                        fr *= q as f64;
                    }
                    let mag = libm::pow(rn, l as f64) / libm::sqrt(fr)
                        * pl[l * (l + 1) / 2 + m]
                        * if m % 2 == 0 { 1.0 } else { -1.0 };
                    let expect = Complex64::new(0.0, m as f64 * phi).exp() * mag;
                    let got = tab.val(l, m as i32);
                    assert!(
                        (got - expect).norm() < 1e-12 * expect.norm().max(1.0),
                        "l={} m={} got={} expect={}",
                        l,
                        m,
                        got,
                        expect
                    );
                }
            }
        }
    }

    #[test]
    fn solid_harmonic_basics() {
        let r = [0.3, -0.2, 0.7];
        let t = solid_r_table(r, 3);
        assert!((t.val(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((t.val(1, 0) - Complex64::new(0.7, 0.0)).norm() < 1e-15);
        // homogeneity R_l^m(2r) = 2^l R_l^m(r)
        let t2 = solid_r_table([0.6, -0.4, 1.4], 3);
        for l in 0..=3usize {
            for m in -(l as i32)..=(l as i32) {
                let a = t2.val(l, m);
                let b = t.val(l, m) * libm::pow(2.0, l as f64);
                assert!((a - b).norm() <= 1e-13 * b.norm().max(1e-13));
            }
        }
        // S is R cycled; S^(1,1) = (y + i z)/sqrt(2), so H^(1,1) = z
        let s = solid_harmonic_table(r, 2);
        let expect = Complex64::new(r[1], r[2]) / libm::sqrt(2.0);
        assert!((s.val(1, 1) - expect).norm() < 1e-15);
        // conjugate symmetry
        for l in 0..=2usize {
            for m in 1..=(l as i32) {
                let a = s.val(l, -m);
                let b = s.val(l, m).conj() * if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn r_zero_point() {
        let t = solid_r_table([0.0, 0.0, 0.0], 3);
        for l in 0..=3usize {
            for m in -(l as i32)..=(l as i32) {
                let v = t.val(l, m).norm();
                if l == 0 {
                    assert!((v - 1.0).abs() < 1e-15);
                } else {
                    assert_eq!(v, 0.0);
                }
                let g = t.grad(l, m);
                let gn = g[0].norm() + g[1].norm() + g[2].norm();
                if l == 1 {
                    assert!(gn > 0.5);
                } else {
                    assert_eq!(gn, 0.0);
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = 7;
        let r = [0.41, -0.33, 0.52];
        let tab = solid_harmonic_table(r, p);
        let h = 1e-5;
        for l in 1..=p {
            for m in -(l as i32)..=(l as i32) {
                for d in 0..3 {
                    let mut rp = r;
                    rp[d] += h;
                    let mut rm = r;
                    rm[d] -= h;
                    let fp = solid_harmonic_table(rp, p).val(l, m);
                    let fm = solid_harmonic_table(rm, p).val(l, m);
                    let fd = (fp - fm) / (2.0 * h);
                    let gr = tab.grad(l, m)[d];
                    assert!(
                        (fd - gr).norm() <= 1e-7 * gr.norm().max(1.0),
                        "l={} m={} d={}",
                        l,
                        m,
                        d
                    );
                }
            }
        }
    }

    #[test]
    fn harmonicity_by_finite_differences() {
        let p = 6;
        let pts = rand_stream(77, 15);
        // discrete Laplacian via 7-point stencil at two spacings; Richardson
        // extrapolation removes the h^2 truncation term so the harmonicity
        // defect is bounded absolutely
        let discrete_lap = |r: [f64; 3], l: usize, m: i32, p: usize, h: f64| {
            let mut lap = -6.0 * solid_harmonic_table(r, p).val(l, m);
            for d in 0..3 {
                let mut rp = r;
                rp[d] += h;
                let mut rm = r;
                rm[d] -= h;
                lap += solid_harmonic_table(rp, p).val(l, m) + solid_harmonic_table(rm, p).val(l, m);
            }
            lap / (h * h)
        };
        for c in pts.chunks(3) {
            let r = [c[0], c[1], c[2]];
            for l in 0..=p {
                for m in -(l as i32)..=(l as i32) {
                    let h = 1e-3;
                    let coarse = discrete_lap(r, l, m, p, 2.0 * h);
                    let fine = discrete_lap(r, l, m, p, h);
                    let lap = (4.0 * fine - coarse) / 3.0;
                    assert!(lap.norm() < 1e-6, "l={} m={} lap={}", l, m, lap.norm());
                }
            }
        }
    }

    #[test]
    fn h_basis_flat_plane_property() {
        // on (x, y, 0): dH/dx = dH/dy = 0 for all (l, m)
        let p = 6;
        let pts = rand_stream(5, 8);
        for c in pts.chunks(2) {
            let b = real_basis_h([c[0], c[1], 0.0], p);
            for l in 1..=p {
                for m in 1..=l {
                    let g = b.grad[hidx(l, m)];
                    assert!(g[0].abs() < 1e-13 && g[1].abs() < 1e-13, "l={} m={}", l, m);
                }
            }
        }
        // H^(1,1) = z with gradient (0,0,1)
        let b = real_basis_h([0.3, 0.7, 0.2], 3);
        assert!((b.val[hidx(1, 1)] - 0.2).abs() < 1e-15);
        let g = b.grad[hidx(1, 1)];
        assert!((g[0]).abs() < 1e-15 && (g[1]).abs() < 1e-15 && (g[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn f22_on_plane_proportional_to_y() {
        // F^(l,m) = dH^(l,m)/dz on the plane; at l=m=2 it is proportional to y
        let p = 2;
        let b1 = real_basis_h([0.4, 0.25, 0.0], p);
        let b2 = real_basis_h([-0.8, 0.5, 0.0], p);
        let f1 = b1.grad[hidx(2, 2)][2];
        let f2 = b2.grad[hidx(2, 2)][2];
        assert!((f1 / 0.25 - f2 / 0.5).abs() < 1e-13);
        assert!(f1.abs() > 1e-3);
    }

    #[test]
    fn hessian_dot_nu_matches_fd() {
        let p = 5;
        let r = [0.21, 0.43, -0.37];
        let nu = crate::linalg::normalize([0.3, -0.8, 0.52]);
        let tab = hessian_dot_nu(r, p, nu);
        let h = 1e-5;
        for l in 1..=p {
            for m in -(l as i32)..=(l as i32) {
                let mut rp = r;
                let mut rm = r;
                for d in 0..3 {
                    rp[d] = r[d] + h * nu[d];
                    rm[d] = r[d] - h * nu[d];
                }
                let gp = solid_harmonic_table(rp, p).grad(l, m);
                let gm = solid_harmonic_table(rm, p).grad(l, m);
                for d in 0..3 {
                    let fd = (gp[d] - gm[d]) / (2.0 * h);
                    let got = tab[tidx(l, m)][d];
                    assert!(
                        (fd - got).norm() <= 2e-6 * got.norm().max(1.0),
                        "l={} m={} d={} fd={} got={}",
                        l,
                        m,
                        d,
                        fd,
                        got
                    );
                }
            }
        }
    }

    #[test]
    fn translation_coeff_examples() {
        assert_eq!(translation_coeff(0, 0, 5, 3), 1.0);
        assert!((translation_coeff(1, 1, 2, 2) - libm::sqrt(6.0)).abs() < 1e-15);
        for (j, k, l, m) in [(1usize, 1i32, 3usize, 2i32), (2, -1, 4, 3), (2, 0, 3, -1)] {
            assert!(
                (translation_coeff(j, k, l, m) - translation_coeff(j, -k, l, -m)).abs() < 1e-15
            );
        }
    }

    #[test]
    fn translation_identity() {
        let p = 10;
        let vals = rand_stream(13, 2 * (p + 1) * (p + 1) + 3 + 60);
        let mut c = vec![Complex64::new(0.0, 0.0); (p + 1) * (p + 1)];
        for l in 0..=p {
            for m in -(l as i32)..=(l as i32) {
                let k = tidx(l, m);
                c[k] = Complex64::new(vals[2 * k], vals[2 * k + 1]);
            }
        }
        let base = 2 * (p + 1) * (p + 1);
        let rp = [vals[base] * 0.4, vals[base + 1] * 0.4, vals[base + 2] * 0.4];
        let d = translate_local(&c, p, rp);

        // zero shift is the identity
        let d0 = translate_local(&c, p, [0.0, 0.0, 0.0]);
        for k in 0..c.len() {
            assert!((d0[k] - c[k]).norm() < 1e-13 * c[k].norm().max(1.0));
        }

        // pointwise agreement at random points
        for q in 0..20 {
            let pt = [
                vals[base + 3 + 3 * q] * 0.7,
                vals[base + 4 + 3 * q] * 0.7,
                vals[base + 5 + 3 * q] * 0.7,
            ];
            let srt = solid_harmonic_table(pt, p);
            let shifted = solid_harmonic_table(
                [pt[0] - rp[0], pt[1] - rp[1], pt[2] - rp[2]],
                p,
            );
            let mut lhs = Complex64::new(0.0, 0.0);
            let mut rhs = Complex64::new(0.0, 0.0);
            for l in 0..=p {
                for m in -(l as i32)..=(l as i32) {
                    lhs += c[tidx(l, m)] * srt.val(l, m);
                    rhs += d[tidx(l, m)] * shifted.val(l, m);
                }
            }
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0), "q={}", q);
        }

        // round trip
        let back = translate_local(&d, p, [-rp[0], -rp[1], -rp[2]]);
        for k in 0..c.len() {
            assert!((back[k] - c[k]).norm() <= 1e-11 * c[k].norm().max(1.0));
        }
    }
}
