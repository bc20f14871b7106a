//! Quaternion arithmetic over real or complex scalars.
//!
//! `f = (f0, **f**)` with the product
//! `fg = (f0 g0 − **f**·**g**, f0 **g** + g0 **f** + **f**×**g**)`.
//!
//! The conjugate flips only the vector part. In particular, for quaternions
//! with complex components the scalar entries are *not* complex-conjugated;
//! imaginary parts are extracted only at the very end of the reduction.

use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

/// Scalar fields the quaternion components live in (`f64` or `Complex64`).
pub trait Scalar:
    Copy
    + Zero
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Scalar for T where
    T: Copy
        + Zero
        + PartialEq
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion<T> {
    pub s: T,
    pub v: [T; 3],
}

pub type QuatF = Quaternion<f64>;
pub type QuatC = Quaternion<Complex64>;

impl<T: Scalar> Quaternion<T> {
    pub fn new(s: T, v: [T; 3]) -> Self {
        Quaternion { s, v }
    }

    pub fn zero() -> Self {
        Quaternion {
            s: T::zero(),
            v: [T::zero(); 3],
        }
    }

    /// Scalar embedding `(s, 0)`.
    pub fn scalar(s: T) -> Self {
        Quaternion {
            s,
            v: [T::zero(); 3],
        }
    }

    /// Pure-vector quaternion `(0, v)`.
    pub fn vector(v: [T; 3]) -> Self {
        Quaternion { s: T::zero(), v }
    }

    pub fn scalar_part(self) -> T {
        self.s
    }

    /// Quaternion conjugate `(f0, −**f**)`.
    pub fn qconj(self) -> Self {
        Quaternion {
            s: self.s,
            v: [-self.v[0], -self.v[1], -self.v[2]],
        }
    }

    /// Quaternion product via the dot/cross expansion.
    pub fn qmul(self, g: Self) -> Self {
        let (f0, f) = (self.s, self.v);
        let (g0, gv) = (g.s, g.v);
        let dot = f[0] * gv[0] + f[1] * gv[1] + f[2] * gv[2];
        let cross = [
            f[1] * gv[2] - f[2] * gv[1],
            f[2] * gv[0] - f[0] * gv[2],
            f[0] * gv[1] - f[1] * gv[0],
        ];
        Quaternion {
            s: f0 * g0 - dot,
            v: [
                f0 * gv[0] + g0 * f[0] + cross[0],
                f0 * gv[1] + g0 * f[1] + cross[1],
                f0 * gv[2] + g0 * f[2] + cross[2],
            ],
        }
    }

    pub fn scale(self, a: T) -> Self {
        Quaternion {
            s: a * self.s,
            v: [a * self.v[0], a * self.v[1], a * self.v[2]],
        }
    }
}

impl<T: Scalar> Add for Quaternion<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Quaternion {
            s: self.s + o.s,
            v: [
                self.v[0] + o.v[0],
                self.v[1] + o.v[1],
                self.v[2] + o.v[2],
            ],
        }
    }
}

impl<T: Scalar> Sub for Quaternion<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Quaternion {
            s: self.s - o.s,
            v: [
                self.v[0] - o.v[0],
                self.v[1] - o.v[1],
                self.v[2] - o.v[2],
            ],
        }
    }
}

impl<T: Scalar> Mul for Quaternion<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.qmul(o)
    }
}

impl Quaternion<f64> {
    pub fn norm(self) -> f64 {
        libm::sqrt(
            self.s * self.s + self.v[0] * self.v[0] + self.v[1] * self.v[1] + self.v[2] * self.v[2],
        )
    }

    pub fn to_complex(self) -> QuatC {
        Quaternion {
            s: Complex64::new(self.s, 0.0),
            v: [
                Complex64::new(self.v[0], 0.0),
                Complex64::new(self.v[1], 0.0),
                Complex64::new(self.v[2], 0.0),
            ],
        }
    }
}

impl Quaternion<Complex64> {
    /// Componentwise imaginary part.
    pub fn im(self) -> QuatF {
        Quaternion {
            s: self.s.im,
            v: [self.v[0].im, self.v[1].im, self.v[2].im],
        }
    }

    /// Componentwise real part.
    pub fn re(self) -> QuatF {
        Quaternion {
            s: self.s.re,
            v: [self.v[0].re, self.v[1].re, self.v[2].re],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn rand_stream(seed: u64, count: usize) -> Vec<f64> {
        // xorshift; plenty for test fixtures
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

    fn randq(vals: &[f64]) -> QuatF {
        Quaternion::new(vals[0], [vals[1], vals[2], vals[3]])
    }

    #[test]
    fn basis_products() {
        let i = QuatF::vector([1.0, 0.0, 0.0]);
        let j = QuatF::vector([0.0, 1.0, 0.0]);
        let k = QuatF::vector([0.0, 0.0, 1.0]);
        assert_eq!(i.qmul(j), k);
        assert_eq!(j.qmul(i), k.scale(-1.0));
    }

    #[test]
    fn scalar_embedding() {
        let g = QuatF::new(0.7, [-0.3, 0.1, 2.0]);
        let sg = QuatF::scalar(2.5).qmul(g);
        assert_eq!(sg, g.scale(2.5));
    }

    #[test]
    fn qmul_matches_16_term_expansion() {
        // brute-force multiplication table: e0=1, e1=i, e2=j, e3=k
        fn table_mul(f: [f64; 4], g: [f64; 4]) -> [f64; 4] {
            [
                f[0] * g[0] - f[1] * g[1] - f[2] * g[2] - f[3] * g[3],
                f[0] * g[1] + f[1] * g[0] + f[2] * g[3] - f[3] * g[2],
                f[0] * g[2] - f[1] * g[3] + f[2] * g[0] + f[3] * g[1],
                f[0] * g[3] + f[1] * g[2] - f[2] * g[1] + f[3] * g[0],
            ]
        }
        let vals = rand_stream(7, 8000);
        for c in vals.chunks(8) {
            let (f, g) = (randq(&c[..4]), randq(&c[4..]));
            let h = f.qmul(g);
            let ht = table_mul([f.s, f.v[0], f.v[1], f.v[2]], [g.s, g.v[0], g.v[1], g.v[2]]);
            let got = [h.s, h.v[0], h.v[1], h.v[2]];
            for a in 0..4 {
                let ulp = f64::EPSILON * got[a].abs().max(1.0);
                assert!((got[a] - ht[a]).abs() <= 4.0 * ulp);
            }
        }
    }

    #[test]
    fn conjugate_and_norm() {
        let f = QuatF::new(1.0, [2.0, 3.0, 4.0]);
        assert_eq!(f.qconj(), QuatF::new(1.0, [-2.0, -3.0, -4.0]));
        let ffbar = f.qmul(f.qconj());
        assert!((ffbar.s - 30.0).abs() < 1e-14);
        assert_eq!(ffbar.v, [0.0, 0.0, 0.0]);

        let nu = QuatF::vector([2.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0]);
        let unit = nu.qmul(nu.qconj());
        assert!((unit.s - 1.0).abs() < 1e-15);
        assert!(unit.v.iter().all(|c| c.abs() < 1e-15));

        let vals = rand_stream(11, 8000);
        for c in vals.chunks(8) {
            let (f, g) = (randq(&c[..4]), randq(&c[4..]));
            let lhs = f.qmul(g).norm();
            let rhs = f.norm() * g.norm();
            assert!((lhs - rhs).abs() <= 8.0 * f64::EPSILON * rhs.max(1.0));
        }
    }

    #[test]
    fn associativity() {
        let vals = rand_stream(23, 12000);
        for c in vals.chunks(12) {
            let (f, g, h) = (randq(&c[..4]), randq(&c[4..8]), randq(&c[8..]));
            let a = f.qmul(g).qmul(h);
            let b = f.qmul(g.qmul(h));
            let scale = a.norm().max(1e-30);
            assert!((a - b).norm() / scale <= 1e-14);
        }
    }

    #[test]
    fn pure_vector_scalar_part() {
        let a = [0.3, -1.2, 0.5];
        let b = [2.0, 0.25, -0.75];
        let p = QuatF::vector(a).qmul(QuatF::vector(b));
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        assert!((p.scalar_part() + dot).abs() < 1e-15);
    }

    #[test]
    fn complex_components_same_product_law() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        // (0, i e1) (0, i e2) = (0, -e3): complex scalars commute through
        let f = QuatC::vector([i, Complex64::zero(), Complex64::zero()]);
        let g = QuatC::vector([Complex64::zero(), i, Complex64::zero()]);
        let h = f.qmul(g);
        assert_eq!(h.s, Complex64::zero());
        assert_eq!(h.v[2], -one);
        // qconj does not conjugate the complex components
        let q = QuatC::new(i, [i, i, i]);
        let qc = q.qconj();
        assert_eq!(qc.s, i);
        assert_eq!(qc.v[0], -i);
    }
}
