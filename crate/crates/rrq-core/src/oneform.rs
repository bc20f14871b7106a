//! Reduction of layer-potential patch integrals to boundary 1-forms.
//!
//! Once a patch density has been fitted in the solid-harmonic bases (see
//! `density`), each kernel/basis surface integral is the integral of a closed
//! 2-form and collapses by Stokes' theorem to line integrals over the three
//! patch edges. All coordinates live in the patch-local frame. With
//! `d = r' - r(t)`, `R = |d|`, and `dr` the edge tangent differential, the
//! edge integrals needed for every kernel bundle into four families:
//!
//! ```text
//!   Q^(j,k) = oint (0, d/R) (0, Hess S^(j,k)(r) dr)       j = 2..p
//!   V^(j,k) = oint (d x grad S^(j,k)(r)) . dr / R         j = 1..p
//!   Omega   = -oint dr / R
//!   Omega0  = -oint ((d x u) . dr) / (R (R + u.d))
//! ```
//!
//! `u` is a fixed unit vector whose ray `{r' + s u, s >= 0}` misses the
//! patch; `Omega0` is then the solid angle the patch subtends at the target,
//! signed positive when the target sits on the inner (`-nu`) side. The
//! double- and single-layer weights for the real basis
//! `H^(l,m) = sqrt(2) Im S^(l,m)` assemble from the bundles and a
//! solid-harmonic table at the target:
//!
//! ```text
//!   W^(l,m)     = -sqrt(2)/(4 pi) Im[ sum_{j=2}^{l} c_{j,l} sum_k Q^(j,k)
//!                   S^(l-j,m-k)(r') T_{jk,lm} + (Omega0, Omega)(0, grad S^(l,m)(r')) ]
//!   Theta^(l,m) =  sqrt(2)/(4 pi) Im[ sum_{j=1}^{l} d_{j,l} sum_k V^(j,k)
//!                   S^(l-j,m-k)(r') T_{jk,lm} + S^(l,m)(r') Omega0 ]
//! ```
//!
//! with `c_{j,l} = (j-2)!(l-j)!/(l-1)!`, `d_{j,l} = (j-1)!(l-j)!/l!`, and `T`
//! the local-translation coefficients. The patch's double layer potential is
//! then `sum [W^(l,m) c^(l,m)]_0` and its single layer potential combines
//! `Theta` with a correction through `W` (see `evaluator`). Directional
//! derivatives of every bundle along a fixed target direction `nu'` are
//! produced alongside, which turns the same assemblies into the normal
//! derivatives of the potentials.
//!
//! Each edge is integrated either by composite Gauss-Legendre over two panels
//! (targets beyond the Bernstein-radius cutoff) or, for the polynomially
//! singular families Q, V, Omega, by singularity-swap weights on the stored
//! edge nodes. The solid-angle kernels are different: the extra factor
//! `R + u.d` is smooth along the edge but varies on the scale of the
//! target-to-edge distance, which caps the accuracy of a fixed-degree swap.
//! They are instead integrated by mild adaptive refinement: panels split
//! dyadically toward the swap root until the root is comfortably outside
//! each panel's Bernstein ellipse, and plain Gauss-Legendre is used on every
//! panel. The panel count grows only logarithmically in the target distance.

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::gauss;
use crate::geometry::EdgeCurve;
use crate::harmonics::{self, hidx, tidx};
use crate::linalg::{add, cross, dot, norm, scale, sub, V3};
use crate::quaternion::{QuatC, QuatF};
use crate::ssq::{self, EdgeQuadContext, EdgeRegime, RootError};

#[inline]
fn cc(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[inline]
fn vq(v: V3) -> QuatC {
    QuatC::vector([cc(v[0]), cc(v[1]), cc(v[2])])
}

#[inline]
fn qscale(q: QuatC, a: f64) -> QuatC {
    q.scale(cc(a))
}

/// `dot(a, b)` with a real and b complex.
#[inline]
fn dot_rc(a: V3, b: [Complex64; 3]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn fact(n: usize) -> f64 {
    let mut v = 1.0;
    for k in 2..=n {
        v *= k as f64;
    }
    v
}

/// The four bundle families for one (patch, target) pair, or their
/// directional derivatives along a fixed target direction. `q` and `v` are
/// indexed by `tidx(j, k)`; entries outside each family's `j` range stay
/// zero.
#[derive(Clone, Debug)]
pub struct Bundles {
    pub p: usize,
    pub q: Vec<QuatC>,
    pub v: Vec<Complex64>,
    pub omega: V3,
    pub omega0: f64,
}

impl Bundles {
    pub fn zero(p: usize) -> Bundles {
        let n = (p + 1) * (p + 1);
        Bundles {
            p,
            q: vec![QuatC::zero(); n],
            v: vec![Complex64::new(0.0, 0.0); n],
            omega: [0.0; 3],
            omega0: 0.0,
        }
    }
}

/// Target-independent solid-harmonic data at the sample nodes of one edge or
/// panel: the gradient table and the tangent-contracted Hessian table of
/// `S^(j,k)`, per node, indexed by `tidx`.
#[derive(Clone, Debug)]
pub struct EdgeTables {
    pub grad: Vec<Vec<[Complex64; 3]>>,
    pub hess_dr: Vec<Vec<[Complex64; 3]>>,
}

pub fn edge_tables(nodes: &EdgeCurve, p: usize) -> EdgeTables {
    let mut grad = Vec::with_capacity(nodes.pos.len());
    let mut hess_dr = Vec::with_capacity(nodes.pos.len());
    for i in 0..nodes.pos.len() {
        grad.push(harmonics::solid_harmonic_table(nodes.pos[i], p).grad);
        hess_dr.push(harmonics::hessian_dot_nu(nodes.pos[i], p, nodes.tan[i]));
    }
    EdgeTables { grad, hess_dr }
}

/// One patch's boundary, fully sampled: the stored edge curves, a two-panel
/// resampling of each edge, and the harmonic tables at both node sets.
/// Building this once per patch amortizes the table cost over all of the
/// patch's near targets.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub p: usize,
    pub edges: [EdgeCurve; 3],
    pub panels: [[EdgeCurve; 2]; 3],
    pub edge_tab: [EdgeTables; 3],
    pub panel_tab: [[EdgeTables; 2]; 3],
}

impl BoundaryData {
    pub fn new(edges: [EdgeCurve; 3], panels: [[EdgeCurve; 2]; 3], p: usize) -> BoundaryData {
        let edge_tab = [
            edge_tables(&edges[0], p),
            edge_tables(&edges[1], p),
            edge_tables(&edges[2], p),
        ];
        let panel_tab = [
            [edge_tables(&panels[0][0], p), edge_tables(&panels[0][1], p)],
            [edge_tables(&panels[1][0], p), edge_tables(&panels[1][1], p)],
            [edge_tables(&panels[2][0], p), edge_tables(&panels[2][1], p)],
        ];
        BoundaryData {
            p,
            edges,
            panels,
            edge_tab,
            panel_tab,
        }
    }
}

/// Accumulate the polynomially-singular families (Q, V, Omega and their
/// derivatives) over one node set. `w1` applies to the 1/R integrands and
/// `w3` (present iff the derivative set is requested) to the 1/R^3 pieces;
/// in the plain regime both are the Gauss-Legendre panel weights, in the
/// swap regime the m = 1 and m = 3 swap weights on the stored edge nodes.
fn accumulate_poly(
    nodes: &EdgeCurve,
    tab: &EdgeTables,
    w1: &[f64],
    rp: V3,
    out: &mut Bundles,
    mut deriv: Option<(&[f64], V3, &mut Bundles)>,
) {
    let p = out.p;
    for i in 0..nodes.pos.len() {
        let pos = nodes.pos[i];
        let tan = nodes.tan[i];
        let d = sub(rp, pos);
        let r = norm(d);
        let ri = 1.0 / r;
        let w1i = w1[i];
        let dq = vq(d);
        let txd = cross(tan, d);
        // per-node derivative precomputation
        let dprep = deriv.as_mut().map(|(w3, nup, _)| {
            let b = dot(*nup, d);
            (w3[i], *nup, b, vq(*nup), cross(tan, *nup))
        });
        for j in 1..=p {
            for k in -(j as i32)..=(j as i32) {
                let idx = tidx(j, k);
                let g = tab.grad[i][idx];
                // (d x grad S) . tan = grad S . (tan x d)
                let vint = dot_rc(txd, g);
                out.v[idx] += cc(w1i * ri) * vint;
                let qq = if j >= 2 {
                    let hq = QuatC::vector(tab.hess_dr[i][idx]);
                    let qq = dq.qmul(hq);
                    out.q[idx] = out.q[idx] + qscale(qq, w1i * ri);
                    Some((hq, qq))
                } else {
                    None
                };
                if let (Some((w3i, _, b, nq, txn)), Some((_, nup, dout))) =
                    (dprep, deriv.as_mut())
                {
                    let _ = nup;
                    dout.v[idx] += cc(w1i * ri) * dot_rc(txn, g) - cc(w3i * b * ri * ri * ri) * vint;
                    if let Some((hq, qq)) = qq {
                        dout.q[idx] = dout.q[idx] + qscale(nq.qmul(hq), w1i * ri)
                            - qscale(qq, w3i * b * ri * ri * ri);
                    }
                }
            }
        }
        out.omega = sub(out.omega, scale(tan, w1i * ri));
        if let (Some((w3i, _, b, _, _)), Some((_, _, dout))) = (dprep, deriv.as_mut()) {
            dout.omega = add(dout.omega, scale(tan, w3i * b * ri * ri * ri));
        }
    }
}

/// Accumulate the solid-angle family (Omega0 and its derivative) over one
/// panel with plain quadrature weights. The integrand is A / (R (R + u.d))
/// with A = (d x u).tan.
fn accumulate_omega0(
    nodes: &EdgeCurve,
    u: V3,
    w: &[f64],
    rp: V3,
    out: &mut Bundles,
    mut deriv: Option<(V3, &mut Bundles)>,
) {
    for i in 0..nodes.pos.len() {
        let pos = nodes.pos[i];
        let tan = nodes.tan[i];
        let d = sub(rp, pos);
        let r = norm(d);
        let a = dot(cross(d, u), tan);
        let c = dot(u, d);
        let rc = r + c;
        out.omega0 -= w[i] * a / (r * rc);
        if let Some((nup, dout)) = deriv.as_mut() {
            let da = dot(cross(*nup, u), tan);
            let b = dot(*nup, d);
            let un = dot(u, *nup);
            let t1 = da / (r * rc);
            let t2 = -a * b * (1.0 / (r * r * r * rc) + 1.0 / (r * r * rc * rc));
            let t3 = -a * un / (r * rc * rc);
            dout.omega0 -= w[i] * (t1 + t2 + t3);
        }
    }
}

/// Resample the interpolant of a stored edge curve onto the context's nodes
/// mapped into `[lo, hi]`. Tangents pick up the subinterval chain factor so
/// that quadrature against the context weights integrates `dr` correctly.
fn resample_edge(ctx: &EdgeQuadContext, edge: &EdgeCurve, lo: f64, hi: f64) -> EdgeCurve {
    let n = ctx.t.len();
    let mid = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo);
    let mut pos = Vec::with_capacity(n);
    let mut tan = Vec::with_capacity(n);
    let mut fp = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut ft = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        for c in 0..3 {
            fp[c][i] = edge.pos[i][c];
            ft[c][i] = edge.tan[i][c];
        }
    }
    for i in 0..n {
        let x = mid + half * ctx.t[i];
        let mut p = [0.0; 3];
        let mut t = [0.0; 3];
        for c in 0..3 {
            p[c] = gauss::bary_eval(&ctx.t, &ctx.wb, &fp[c], x);
            t[c] = half * gauss::bary_eval(&ctx.t, &ctx.wb, &ft[c], x);
        }
        pos.push(p);
        tan.push(t);
    }
    EdgeCurve { pos, tan }
}

/// Integrate the solid-angle family over one edge whose squared-distance
/// root `t0` is too close for the plain rule: split panels dyadically toward
/// the root until it clears each panel's Bernstein ellipse by a
/// degree-dependent margin, then apply plain Gauss-Legendre per panel. The
/// panel count grows like the logarithm of the root's distance to the edge.
fn omega0_adaptive(
    ctx: &EdgeQuadContext,
    edge: &EdgeCurve,
    t0: Complex64,
    u: V3,
    rp: V3,
    out: &mut Bundles,
    mut deriv: Option<(V3, &mut Bundles)>,
) {
    // Plain Gauss-Legendre converges like rho^(-2 ptilde); this margin puts
    // the per-panel truncation near 1e-12.
    let rho_star = libm::pow(10.0, 6.0 / ctx.ptilde as f64).max(ssq::RHO_PLAIN);
    let mut stack: Vec<(f64, f64, u32)> = vec![(-1.0, 1.0, 0)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let tp = ssq::map_t0(t0, lo, hi);
        if ssq::bernstein_radius(tp) >= rho_star || depth >= 48 {
            let nodes = resample_edge(ctx, edge, lo, hi);
            let dv = match deriv.as_mut() {
                Some((n, d)) => Some((*n, &mut **d)),
                None => None,
            };
            accumulate_omega0(&nodes, u, &ctx.w, rp, out, dv);
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
}

/// Compute the bundle families (and, if `nup` is given, their directional
/// derivatives along `nup`) for one target against one patch boundary. The
/// regime decision is made per edge: plain two-panel Gauss-Legendre when the
/// squared-distance root is far in the Bernstein sense, singularity-swap
/// weights otherwise. Fails only if a root search fails, which happens when
/// the target lies on an edge curve itself.
pub fn compute_bundles(
    ctx: &EdgeQuadContext,
    bd: &BoundaryData,
    rp: V3,
    u: V3,
    nup: Option<V3>,
) -> Result<(Bundles, Option<Bundles>), RootError> {
    let p = bd.p;
    let mut b = Bundles::zero(p);
    let mut db = nup.map(|_| Bundles::zero(p));
    for e in 0..3 {
        let regime = ssq::classify_edge(ctx, &bd.edges[e], rp)?;
        match regime {
            EdgeRegime::Plain => {
                for ip in 0..2 {
                    let nodes = &bd.panels[e][ip];
                    let tab = &bd.panel_tab[e][ip];
                    let dv = match (nup, db.as_mut()) {
                        (Some(n), Some(d)) => Some((ctx.w.as_slice(), n, d)),
                        _ => None,
                    };
                    accumulate_poly(nodes, tab, &ctx.w, rp, &mut b, dv);
                    let dv = match (nup, db.as_mut()) {
                        (Some(n), Some(d)) => Some((n, d)),
                        _ => None,
                    };
                    accumulate_omega0(nodes, u, &ctx.w, rp, &mut b, dv);
                }
            }
            EdgeRegime::Swap(t0) => {
                let w1 = ssq::swap_weights(ctx, t0, 1);
                let w3 = nup.map(|_| ssq::swap_weights(ctx, t0, 3));
                let dv = match (nup, w3.as_ref(), db.as_mut()) {
                    (Some(n), Some(w3), Some(d)) => Some((w3.as_slice(), n, d)),
                    _ => None,
                };
                accumulate_poly(&bd.edges[e], &bd.edge_tab[e], &w1, rp, &mut b, dv);
                let dv = match (nup, db.as_mut()) {
                    (Some(n), Some(d)) => Some((n, d)),
                    _ => None,
                };
                omega0_adaptive(ctx, &bd.edges[e], t0, u, rp, &mut b, dv);
            }
        }
    }
    Ok((b, db))
}

/// Solid angle of one patch from `rp`, integrating only the solid-angle
/// 1-form over the boundary with the string direction `u`. Lightweight
/// variant of `compute_bundles` for winding-number classification, where
/// none of the harmonic tables are needed.
pub fn omega0_only(
    ctx: &EdgeQuadContext,
    edges: &[EdgeCurve; 3],
    rp: V3,
    u: V3,
) -> Result<f64, RootError> {
    let mut b = Bundles::zero(1);
    for edge in edges {
        match ssq::classify_edge(ctx, edge, rp)? {
            EdgeRegime::Plain => {
                for (lo, hi) in [(-1.0, 0.0), (0.0, 1.0)] {
                    let nodes = resample_edge(ctx, edge, lo, hi);
                    accumulate_omega0(&nodes, u, &ctx.w, rp, &mut b, None);
                }
            }
            EdgeRegime::Swap(t0) => omega0_adaptive(ctx, edge, t0, u, rp, &mut b, None),
        }
    }
    Ok(b.omega0)
}

/// Signed solid angle of a flat triangle seen from `rp`, positive when `rp`
/// is on the side the normal points away from (the inner side for an outward
/// normal), matching the sign of `Bundles::omega0`. Standard
/// spherical-excess formula.
pub fn triangle_solid_angle(v: [V3; 3], rp: V3) -> f64 {
    let r1 = sub(v[0], rp);
    let r2 = sub(v[1], rp);
    let r3 = sub(v[2], rp);
    let (n1, n2, n3) = (norm(r1), norm(r2), norm(r3));
    let num = dot(r1, cross(r2, r3));
    let den = n1 * n2 * n3
        + dot(r1, r2) * n3
        + dot(r1, r3) * n2
        + dot(r2, r3) * n1;
    2.0 * libm::atan2(num, den)
}

/// Double-layer weights `W^(l,m)` at the target, indexed by `hidx(l, m)`.
/// `sum_l,m [W^(l,m) qmul c^(l,m)]_0` is the patch's double layer potential
/// for the fitted density coefficients `c`.
pub fn w_table(b: &Bundles, rp: V3) -> Vec<QuatF> {
    let p = b.p;
    let st = harmonics::solid_harmonic_table(rp, p);
    let om = QuatF::new(b.omega0, b.omega).to_complex();
    let mut out = vec![QuatF::zero(); p * (p + 1) / 2];
    let fac = -SQRT_2 / (4.0 * PI);
    for l in 1..=p {
        for m in 1..=l {
            let mi = m as i32;
            let mut acc = om.qmul(QuatC::vector(st.grad(l, mi)));
            for j in 2..=l {
                let cjl = fact(j - 2) * fact(l - j) / fact(l - 1);
                let span = (l - j) as i32;
                let kmin = (-(j as i32)).max(mi - span);
                let kmax = (j as i32).min(mi + span);
                for k in kmin..=kmax {
                    let t = harmonics::translation_coeff(j, k, l, mi);
                    if t == 0.0 {
                        continue;
                    }
                    let s = st.val(l - j, mi - k);
                    acc = acc + b.q[tidx(j, k)].scale(s * cc(cjl * t));
                }
            }
            out[hidx(l, m)] = acc.im().scale(fac);
        }
    }
    out
}

/// Single-layer weights `Theta^(l,m)` at the target, indexed by
/// `hidx(l, m)`. `sum Theta^(l,m) d^(l,m)` is the single layer potential of
/// the harmonic extension `sum H^(l,m) d^(l,m)`; the evaluator corrects it
/// by a double layer of the extension's surface values.
pub fn theta_table(b: &Bundles, rp: V3) -> Vec<f64> {
    let p = b.p;
    let st = harmonics::solid_harmonic_table(rp, p);
    let mut out = vec![0.0; p * (p + 1) / 2];
    let fac = SQRT_2 / (4.0 * PI);
    for l in 1..=p {
        for m in 1..=l {
            let mi = m as i32;
            let mut acc = st.val(l, mi) * cc(b.omega0);
            for j in 1..=l {
                let djl = fact(j - 1) * fact(l - j) / fact(l);
                let span = (l - j) as i32;
                let kmin = (-(j as i32)).max(mi - span);
                let kmax = (j as i32).min(mi + span);
                for k in kmin..=kmax {
                    let t = harmonics::translation_coeff(j, k, l, mi);
                    if t == 0.0 {
                        continue;
                    }
                    acc += b.v[tidx(j, k)] * st.val(l - j, mi - k) * cc(djl * t);
                }
            }
            out[hidx(l, m)] = fac * acc.im;
        }
    }
    out
}

/// Directional derivative of `w_table` along the target direction `nup`,
/// given the bundle derivatives from `compute_bundles`. This is the row
/// generator for the normal derivative of the double layer potential.
pub fn w_deriv_table(b: &Bundles, db: &Bundles, rp: V3, nup: V3) -> Vec<QuatF> {
    let p = b.p;
    let st = harmonics::solid_harmonic_table(rp, p);
    let hessn = harmonics::hessian_dot_nu(rp, p, nup);
    let om = QuatF::new(b.omega0, b.omega).to_complex();
    let dom = QuatF::new(db.omega0, db.omega).to_complex();
    let mut out = vec![QuatF::zero(); p * (p + 1) / 2];
    let fac = -SQRT_2 / (4.0 * PI);
    for l in 1..=p {
        for m in 1..=l {
            let mi = m as i32;
            let mut acc = dom.qmul(QuatC::vector(st.grad(l, mi)))
                + om.qmul(QuatC::vector(hessn[tidx(l, mi)]));
            for j in 2..=l {
                let cjl = fact(j - 2) * fact(l - j) / fact(l - 1);
                let span = (l - j) as i32;
                let kmin = (-(j as i32)).max(mi - span);
                let kmax = (j as i32).min(mi + span);
                for k in kmin..=kmax {
                    let t = harmonics::translation_coeff(j, k, l, mi);
                    if t == 0.0 {
                        continue;
                    }
                    let coef = cc(cjl * t);
                    acc = acc + db.q[tidx(j, k)].scale(st.val(l - j, mi - k) * coef);
                    acc = acc
                        + b.q[tidx(j, k)].scale(dot_rc(nup, st.grad(l - j, mi - k)) * coef);
                }
            }
            out[hidx(l, m)] = acc.im().scale(fac);
        }
    }
    out
}
