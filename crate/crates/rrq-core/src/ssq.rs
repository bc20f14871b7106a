//! Singularity-swap quadrature for nearly singular line integrals over patch
//! boundary edges.
//!
//! After the surface reduction, every integral that has to be evaluated close
//! to a patch takes the form
//!
//! ```text
//!     ∫_{-1}^{1} F(t) / R(t)^m dt,    m = 1..4,
//! ```
//!
//! where `R(t) = |r(t) - x|` is the distance from the target `x` to the edge
//! curve and `F` is smooth. The squared distance extends to a polynomial in
//! complex `t`; its root `t0` nearest the segment (taken with `Im t0 > 0`)
//! controls the difficulty. Writing `w(t) = (t - t0)(t - conj t0)`, which is
//! `|t - t0|^2` for real `t`, the factor `F (w/R^2)^{m/2}` is smooth, so the
//! integral is interpolated at the edge nodes and the model moments
//! `∫ t^i w^{-m/2} dt` are integrated exactly by recurrence. The resulting
//! weights apply directly to samples of the raw integrand.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::gauss;
use crate::geometry::EdgeCurve;
use crate::linalg::{dist, norm, V3};

/// Bernstein-ellipse radius above which an edge integral is handed to plain
/// composite Gauss-Legendre panels instead of the swap.
pub const RHO_PLAIN: f64 = 3.0;

/// Upward recurrences are kept while the root stays inside this radius; the
/// homogeneous solutions grow like |t0|^i, so slightly past the unit circle
/// is still fine for the index ranges used here.
const UPWARD_LIMIT: f64 = 1.1;

/// The first-order m=3 recurrence amplifies by |Re t0| per step, so its
/// direction switches on the real part alone.
const UPWARD_LIMIT_RE: f64 = 1.05;

/// Reusable data for edge quadrature at one sampling degree: the
/// Gauss-Legendre parameter nodes the edge curves are stored at, their
/// weights and barycentric weights, and a 64-point rule that seeds the
/// backward model-integral recurrences.
pub struct EdgeQuadContext {
    pub ptilde: usize,
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub wb: Vec<f64>,
    t_seed: Vec<f64>,
    w_seed: Vec<f64>,
}

impl EdgeQuadContext {
    pub fn new(ptilde: usize) -> EdgeQuadContext {
        assert!((2..=32).contains(&ptilde), "edge sampling degree out of range");
        let (t, w) = gauss::gauss_legendre(ptilde);
        let wb = gauss::bary_weights(&t);
        let (t_seed, w_seed) = gauss::gauss_legendre(64);
        EdgeQuadContext {
            ptilde,
            t,
            w,
            wb,
            t_seed,
            w_seed,
        }
    }
}

/// How one edge must be integrated for one target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeRegime {
    /// Far enough that composite Gauss-Legendre panels converge.
    Plain,
    /// Nearly singular; swap onto this parameter-plane root.
    Swap(Complex64),
}

/// The squared-distance root search failed: Newton did not converge, or the
/// root landed on the real axis (the target lies on the edge curve itself).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RootError;

/// Complex root of the interpolated squared distance `|r(t) - x|^2` along an
/// edge, returned with positive imaginary part. The iteration starts at the
/// nearest sample node, displaced off the axis by the local distance-to-speed
/// ratio, which lands in the basin of the physically relevant root.
pub fn find_t0(ctx: &EdgeQuadContext, edge: &EdgeCurve, x: V3) -> Result<Complex64, RootError> {
    let n = ctx.ptilde;
    debug_assert_eq!(edge.pos.len(), n);
    let mut kmin = 0;
    let mut dmin = f64::INFINITY;
    for (k, p) in edge.pos.iter().enumerate() {
        let d = dist(*p, x);
        if d < dmin {
            dmin = d;
            kmin = k;
        }
    }
    let speed = norm(edge.tan[kmin]).max(1e-300);
    let mut z = Complex64::new(ctx.t[kmin], (dmin / speed).max(1e-12));

    let mut f = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        for d in 0..3 {
            f[d][i] = edge.pos[i][d] - x[d];
        }
    }
    // Far outside [-1, 1] the barycentric sums cancel and the update
    // stagnates around 1e-8 relative; such roots are only ever used for the
    // plain/swap decision, so track the best iterate and accept it at a
    // looser tolerance. Near the segment, where the root actually feeds the
    // swap weights, Newton reaches the strict tolerance.
    let mut best = (f64::INFINITY, z);
    for _ in 0..50 {
        let (v0, d0) = gauss::bary_eval_complex(&ctx.t, &ctx.wb, &f[0], z);
        let (v1, d1) = gauss::bary_eval_complex(&ctx.t, &ctx.wb, &f[1], z);
        let (v2, d2) = gauss::bary_eval_complex(&ctx.t, &ctx.wb, &f[2], z);
        let g = v0 * v0 + v1 * v1 + v2 * v2;
        let gp = 2.0 * (v0 * d0 + v1 * d1 + v2 * d2);
        if gp.norm() < 1e-300 {
            // stationary point of the interpolant; nudge off it
            z += Complex64::new(0.0, 1e-3);
            continue;
        }
        let dz = g / gp;
        z -= dz;
        let rel = dz.norm() / z.norm().max(1.0);
        if rel < best.0 {
            best = (rel, z);
        }
        if rel < 1e-13 {
            break;
        }
    }
    let mut z = best.1;
    if best.0 > 1e-6 {
        return Err(RootError);
    }
    if z.im < 0.0 {
        z = z.conj();
    }
    if z.im < 1e-8 {
        return Err(RootError);
    }
    Ok(z)
}

/// Radius of the Bernstein ellipse (foci ±1) through `z`; 1 on the segment
/// itself, growing with distance from it.
pub fn bernstein_radius(z: Complex64) -> f64 {
    let s = (z * z - Complex64::new(1.0, 0.0)).sqrt();
    (z + s).norm().max((z - s).norm())
}

/// Decide how one edge is integrated for one target. Targets farther than
/// 1.2 edge arc lengths from every sample skip the root search outright;
/// otherwise the Bernstein radius of the root makes the call.
pub fn classify_edge(
    ctx: &EdgeQuadContext,
    edge: &EdgeCurve,
    x: V3,
) -> Result<EdgeRegime, RootError> {
    let mut arclen = 0.0;
    let mut dmin = f64::INFINITY;
    for i in 0..ctx.ptilde {
        arclen += ctx.w[i] * norm(edge.tan[i]);
        dmin = dmin.min(dist(edge.pos[i], x));
    }
    if dmin > 1.2 * arclen {
        return Ok(EdgeRegime::Plain);
    }
    let t0 = match find_t0(ctx, edge, x) {
        Ok(t0) => t0,
        // No root converged. A swap-relevant root must have a Bernstein
        // radius under the plain cutoff, which bounds the target's distance
        // by roughly 0.6 arc lengths; farther targets (typical for points
        // well inside the curvature of a coarse patch, where the distance
        // along the edge is nearly constant and all roots are remote) are
        // safe for the plain rule even without a root.
        Err(e) => {
            return if dmin > 0.6 * arclen {
                Ok(EdgeRegime::Plain)
            } else {
                Err(e)
            };
        }
    };
    if bernstein_radius(t0) >= RHO_PLAIN {
        Ok(EdgeRegime::Plain)
    } else {
        Ok(EdgeRegime::Swap(t0))
    }
}

/// Affine image of a swap root when the edge parameter is restricted to
/// `[lo, hi]` and rescaled to `[-1, 1]`; used when an edge is split into
/// panels for the solid-angle integrals.
pub fn map_t0(t0: Complex64, lo: f64, hi: f64) -> Complex64 {
    (t0 - 0.5 * (hi + lo)) / (0.5 * (hi - lo))
}

fn sqrt_w(t: f64, t0: Complex64) -> f64 {
    (Complex64::new(t, 0.0) - t0).norm()
}

fn quad_real<F: Fn(f64) -> f64>(ctx: &EdgeQuadContext, f: F) -> f64 {
    let mut s = 0.0;
    for (t, w) in ctx.t_seed.iter().zip(ctx.w_seed.iter()) {
        s += w * f(*t);
    }
    s
}

fn quad_complex<F: Fn(f64) -> Complex64>(ctx: &EdgeQuadContext, f: F) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (t, w) in ctx.t_seed.iter().zip(ctx.w_seed.iter()) {
        s += f(*t) * *w;
    }
    s
}

/// Boundary term `[t^{i-1} sqrt(w)]` across [-1, 1].
fn bnd_sqrt(s1: f64, sm1: f64, i: usize) -> f64 {
    if i % 2 == 1 {
        s1 - sm1
    } else {
        s1 + sm1
    }
}

/// Boundary term `[t^{i-1} / sqrt(w)]` across [-1, 1].
fn bnd_inv_sqrt(s1: f64, sm1: f64, i: usize) -> f64 {
    if i % 2 == 1 {
        1.0 / s1 - 1.0 / sm1
    } else {
        1.0 / s1 + 1.0 / sm1
    }
}

/// `∫ t^i w^{-1/2} dt` for i = 0..n-1.
fn family_m1(ctx: &EdgeQuadContext, t0: Complex64, n: usize) -> Vec<f64> {
    let a = t0.re;
    let beta = t0.im;
    let b = -2.0 * a;
    let c = t0.norm_sqr();
    let s1 = sqrt_w(1.0, t0);
    let sm1 = sqrt_w(-1.0, t0);
    let mut out = vec![0.0; n];
    if t0.norm() <= UPWARD_LIMIT {
        out[0] = libm::asinh((1.0 - a) / beta) - libm::asinh((-1.0 - a) / beta);
        if n > 1 {
            out[1] = s1 - sm1 - 0.5 * b * out[0];
        }
        for i in 2..n {
            out[i] = (bnd_sqrt(s1, sm1, i)
                - (i as f64 - 0.5) * b * out[i - 1]
                - (i as f64 - 1.0) * c * out[i - 2])
                / i as f64;
        }
    } else {
        out[n - 1] = quad_real(ctx, |t| libm::pow(t, (n - 1) as f64) / sqrt_w(t, t0));
        if n >= 2 {
            out[n - 2] = quad_real(ctx, |t| libm::pow(t, (n - 2) as f64) / sqrt_w(t, t0));
        }
        for i in (2..n).rev() {
            out[i - 2] = (bnd_sqrt(s1, sm1, i)
                - i as f64 * out[i]
                - (i as f64 - 0.5) * b * out[i - 1])
                / ((i as f64 - 1.0) * c);
        }
    }
    out
}

/// `E_i = ∫ t^i / (t - t0) dt`; the m = 2 and 4 families both read off it.
fn family_e(ctx: &EdgeQuadContext, t0: Complex64, n: usize) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    if t0.norm() <= UPWARD_LIMIT {
        // the path of 1 - t0 .. -1 - t0 stays strictly below the real axis,
        // so the principal logs differ by the continuous branch
        e[0] = (one - t0).ln() - (-one - t0).ln();
        for i in 1..n {
            let ci = if i % 2 == 1 { 2.0 / i as f64 } else { 0.0 };
            e[i] = t0 * e[i - 1] + ci;
        }
    } else {
        e[n - 1] = quad_complex(ctx, |t| {
            libm::pow(t, (n - 1) as f64) / (Complex64::new(t, 0.0) - t0)
        });
        for i in (1..n).rev() {
            let ci = if i % 2 == 1 { 2.0 / i as f64 } else { 0.0 };
            e[i - 1] = (e[i] - ci) / t0;
        }
    }
    e
}

/// `∫ t^i w^{-3/2} dt` for i = 0..n-1; leans on the m = 1 table.
fn family_m3(ctx: &EdgeQuadContext, t0: Complex64, n: usize) -> Vec<f64> {
    let a = t0.re;
    let beta = t0.im;
    let s1 = sqrt_w(1.0, t0);
    let sm1 = sqrt_w(-1.0, t0);
    let m1 = family_m1(ctx, t0, n.max(2));
    let mut j = vec![0.0; n];
    if a.abs() <= UPWARD_LIMIT_RE {
        j[0] = if a.abs() <= 1.0 {
            ((1.0 - a) / s1 + (1.0 + a) / sm1) / (beta * beta)
        } else {
            // the two fractions cancel to O(beta^2) once the root passes an
            // endpoint; difference-of-squares keeps the value exact
            let u = (a - 1.0) / s1;
            let v = (a + 1.0) / sm1;
            4.0 * a / (s1 * s1 * sm1 * sm1 * (u + v))
        };
        for i in 1..n {
            let prev = if i >= 2 {
                (i as f64 - 1.0) * m1[i - 2]
            } else {
                0.0
            };
            j[i] = prev + a * j[i - 1] - bnd_inv_sqrt(s1, sm1, i);
        }
    } else {
        let s3 = |t: f64| {
            let s = sqrt_w(t, t0);
            s * s * s
        };
        j[n - 1] = quad_real(ctx, |t| libm::pow(t, (n - 1) as f64) / s3(t));
        for i in (1..n).rev() {
            let prev = if i >= 2 {
                (i as f64 - 1.0) * m1[i - 2]
            } else {
                0.0
            };
            j[i - 1] = (j[i] - prev + bnd_inv_sqrt(s1, sm1, i)) / a;
        }
    }
    j
}

/// `∫ t^i w^{-2} dt` via `E` and the derivative moments
/// `E2_i = ∫ t^i (t - t0)^{-2} dt = i E_{i-1} - [t^i/(t - t0)]`.
fn family_m4(ctx: &EdgeQuadContext, t0: Complex64, n: usize) -> Vec<f64> {
    let beta = t0.im;
    let one = Complex64::new(1.0, 0.0);
    let e = family_e(ctx, t0, n);
    let mut out = vec![0.0; n];
    for i in 0..n {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let bnd = one / (one - t0) - sign / (-one - t0);
        let e2 = if i >= 1 {
            i as f64 * e[i - 1] - bnd
        } else {
            -bnd
        };
        out[i] = (e[i].im / beta - e2.re) / (2.0 * beta * beta);
    }
    out
}

/// Model moments `∫_{-1}^{1} t^i w(t)^{-m/2} dt`, i = 0..n-1, with
/// `w(t) = |t - t0|^2` on the real line. Recurrences run upward while stable
/// and backward from 64-point Gauss-Legendre seeds otherwise.
pub fn model_integrals(ctx: &EdgeQuadContext, t0: Complex64, m: usize, n: usize) -> Vec<f64> {
    assert!(t0.im > 0.0, "swap root must lie in the upper half plane");
    assert!(n >= 1);
    match m {
        1 => family_m1(ctx, t0, n),
        2 => family_e(ctx, t0, n).iter().map(|e| e.im / t0.im).collect(),
        3 => family_m3(ctx, t0, n),
        4 => family_m4(ctx, t0, n),
        _ => panic!("model integral family must be m = 1..=4"),
    }
}

/// Quadrature weights for one edge, target and kernel power. Applied to
/// samples of the raw integrand `F(t)/R(t)^m` at the context nodes they
/// integrate the nearly singular edge integral with spectral accuracy in the
/// smooth factor.
pub fn swap_weights(ctx: &EdgeQuadContext, t0: Complex64, m: usize) -> Vec<f64> {
    let mm = model_integrals(ctx, t0, m, ctx.ptilde);
    let lam = gauss::apply_u_transpose(&ctx.t, &mm);
    lam.iter()
        .zip(ctx.t.iter())
        .map(|(l, ti)| {
            let w = (Complex64::new(*ti, 0.0) - t0).norm_sqr();
            l * libm::pow(w, 0.5 * m as f64)
        })
        .collect()
}
