//! Analytic surface charts and curvilinear triangular patches: mapped
//! collocation/quadrature nodes with normals and area weights, patch-local
//! frames, boundary edge curves sampled at Gauss-Legendre parameter nodes,
//! and near-target classification.

use alloc::vec;
use alloc::vec::Vec;

use crate::gauss;
use crate::linalg::{add, cross, dist, dot, norm, normalize, scale, sub, V3};
use crate::nodes::NodeRule;

const PI: f64 = core::f64::consts::PI;

/// Fourier coefficients (i, j, delta_ij) of the stellarator boundary.
pub const STELLARATOR_DELTAS: [(f64, f64, f64); 7] = [
    (-1.0, -1.0, 0.17),
    (-1.0, 0.0, 0.11),
    (0.0, 0.0, 1.0),
    (1.0, 0.0, 4.5),
    (2.0, 0.0, -0.25),
    (0.0, 1.0, 0.07),
    (2.0, 1.0, -0.45),
];

/// Analytic description of a closed surface as one or more parametric charts.
#[derive(Clone, Debug)]
pub enum SurfaceDef {
    /// Torus with a modulated tube radius, ring radius `a`, tube radius
    /// `b + wc*cos(wn*phi + wm*theta)`.
    WTorus { a: f64, b: f64, wc: f64, wn: f64, wm: f64 },
    /// Unit sphere via six equiangular cube-face charts.
    Sphere,
    /// Cushion: radial graph r = sqrt(4/5 + 8 dy^2 dz^2) over the six
    /// cube-face charts of the sphere.
    Cushion,
    /// Stellarator-like toroidal surface from a small Fourier series.
    Stellarator,
    /// Four plain tori (ring 3, tube 1/2) spaced 4.95 along x, alternate ones
    /// rotated a quarter turn about x so consecutive rings interlock.
    InterlockingTori,
}

impl SurfaceDef {
    /// The warped torus with the standard parameter set.
    pub fn wtorus() -> SurfaceDef {
        SurfaceDef::WTorus {
            a: 1.0,
            b: 0.5,
            wc: 0.065,
            wn: 5.0,
            wm: 3.0,
        }
    }

    pub fn n_charts(&self) -> usize {
        match self {
            SurfaceDef::WTorus { .. } | SurfaceDef::Stellarator => 1,
            SurfaceDef::Sphere | SurfaceDef::Cushion => 6,
            SurfaceDef::InterlockingTori => 4,
        }
    }

    /// Parameter rectangle of one chart as ((u0, u1), (v0, v1)).
    pub fn chart_domain(&self) -> ((f64, f64), (f64, f64)) {
        match self {
            SurfaceDef::Sphere | SurfaceDef::Cushion => {
                ((-PI / 4.0, PI / 4.0), (-PI / 4.0, PI / 4.0))
            }
            _ => ((0.0, 2.0 * PI), (0.0, 2.0 * PI)),
        }
    }

    /// Position and the two parameter partials at (u, v) on one chart.
    pub fn eval(&self, chart: usize, u: f64, v: f64) -> (V3, V3, V3) {
        match *self {
            SurfaceDef::WTorus { a, b, wc, wn, wm } => torus_eval(a, b, wc, wn, wm, u, v),
            SurfaceDef::Sphere => radial_eval(chart, u, v, |_| (1.0, [0.0; 3])),
            SurfaceDef::Cushion => radial_eval(chart, u, v, |d| {
                let f = libm::sqrt(0.8 + 8.0 * d[1] * d[1] * d[2] * d[2]);
                (
                    f,
                    [
                        0.0,
                        8.0 * d[1] * d[2] * d[2] / f,
                        8.0 * d[1] * d[1] * d[2] / f,
                    ],
                )
            }),
            SurfaceDef::Stellarator => stellarator_eval(u, v),
            SurfaceDef::InterlockingTori => {
                let (p, ru, rv) = torus_eval(3.0, 0.5, 0.0, 0.0, 0.0, u, v);
                let rot = |w: V3| -> V3 {
                    if chart % 2 == 1 {
                        [w[0], -w[2], w[1]]
                    } else {
                        w
                    }
                };
                let shift = [4.95 * chart as f64, 0.0, 0.0];
                (add(rot(p), shift), rot(ru), rot(rv))
            }
        }
    }
}

fn torus_eval(a: f64, b: f64, wc: f64, wn: f64, wm: f64, th: f64, ph: f64) -> (V3, V3, V3) {
    let arg = wn * ph + wm * th;
    let f = b + wc * libm::cos(arg);
    let ft = -wc * wm * libm::sin(arg);
    let fp = -wc * wn * libm::sin(arg);
    let (st, ct) = (libm::sin(th), libm::cos(th));
    let (sp, cp) = (libm::sin(ph), libm::cos(ph));
    let ring = a + f * ct;
    let pos = [ring * cp, ring * sp, f * st];
    let dth = [
        (ft * ct - f * st) * cp,
        (ft * ct - f * st) * sp,
        ft * st + f * ct,
    ];
    let dph = [
        fp * ct * cp - ring * sp,
        fp * ct * sp + ring * cp,
        fp * st,
    ];
    (pos, dth, dph)
}

fn stellarator_eval(u: f64, v: f64) -> (V3, V3, V3) {
    let (sv, cv) = (libm::sin(v), libm::cos(v));
    let mut pos = [0.0; 3];
    let mut du = [0.0; 3];
    let mut dv = [0.0; 3];
    for &(i, j, d) in STELLARATOR_DELTAS.iter() {
        let k = 1.0 - i;
        let arg = k * u + j * v;
        let (s, c) = (libm::sin(arg), libm::cos(arg));
        pos = add(pos, [d * cv * c, d * sv * c, d * s]);
        du = add(du, [-d * k * cv * s, -d * k * sv * s, d * k * c]);
        dv = add(
            dv,
            [
                d * (-sv * c - j * cv * s),
                d * (cv * c - j * sv * s),
                d * j * c,
            ],
        );
    }
    (pos, du, dv)
}

/// Equiangular cube-face chart scaled by a radial factor rho(direction);
/// `rho` returns the factor and its gradient w.r.t. the direction.
fn radial_eval(face: usize, u: f64, v: f64, rho: impl Fn(V3) -> (f64, [f64; 3])) -> (V3, V3, V3) {
    let (x, y) = (libm::tan(u), libm::tan(v));
    let (dx, dy) = (1.0 + x * x, 1.0 + y * y);
    // raw cube point and its partials w.r.t. the tangents (X, Y), arranged so
    // each face is outward oriented
    let (raw, rx, ry): (V3, V3, V3) = match face {
        0 => ([1.0, x, y], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
        1 => ([-1.0, y, x], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]),
        2 => ([y, 1.0, x], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]),
        3 => ([x, -1.0, y], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
        4 => ([x, y, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        _ => ([y, x, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]),
    };
    let vu = scale(rx, dx);
    let vv = scale(ry, dy);
    let n2 = dot(raw, raw);
    let n1 = libm::sqrt(n2);
    let d = scale(raw, 1.0 / n1);
    let proj = |w: V3| -> V3 {
        // derivative of raw/|raw| along w
        let c = dot(raw, w) / (n2 * n1);
        sub(scale(w, 1.0 / n1), scale(raw, c))
    };
    let du = proj(vu);
    let dv = proj(vv);
    let (f, g) = rho(d);
    let ru = add(scale(d, dot(g, du)), scale(du, f));
    let rv = add(scale(d, dot(g, dv)), scale(dv, f));
    (scale(d, f), ru, rv)
}

/// One boundary edge of a patch sampled at Gauss-Legendre parameter nodes on
/// [-1, 1], stored in the patch-local frame.
#[derive(Clone, Debug)]
pub struct EdgeCurve {
    pub pos: Vec<V3>,
    pub tan: Vec<V3>,
}

/// A curvilinear triangular patch with all per-node data precomputed.
#[derive(Clone, Debug)]
pub struct Patch {
    pub chart: usize,
    /// Affine map reference -> parameter plane: q = q0 + xi*eu + eta*ev.
    pub q0: [f64; 2],
    pub eu: [f64; 2],
    pub ev: [f64; 2],
    /// Images of the reference vertices (0,0), (1,0), (0,1).
    pub verts: [V3; 3],
    pub nodes_x: Vec<V3>,
    pub nodes_nu: Vec<V3>,
    /// Quadrature weights including the area element (sum = patch area).
    pub weights: Vec<f64>,
    /// Node positions and normals in the local frame.
    pub nodes_local: Vec<V3>,
    pub nu_local: Vec<V3>,
    /// Local frame: x_local = R (x - c) with R rows e1, e2, e3.
    pub frame_c: V3,
    pub frame_r: [V3; 3],
    pub edges: [EdgeCurve; 3],
    pub center: V3,
    pub radius: f64,
    pub diameter: f64,
}

impl Patch {
    pub fn to_local(&self, x: V3) -> V3 {
        let d = sub(x, self.frame_c);
        [
            dot(self.frame_r[0], d),
            dot(self.frame_r[1], d),
            dot(self.frame_r[2], d),
        ]
    }

    /// Rotate a direction (normal, tangent) into the local frame.
    pub fn rotate_to_local(&self, w: V3) -> V3 {
        [
            dot(self.frame_r[0], w),
            dot(self.frame_r[1], w),
            dot(self.frame_r[2], w),
        ]
    }

    pub fn from_local(&self, y: V3) -> V3 {
        let r = &self.frame_r;
        add(
            [
                r[0][0] * y[0] + r[1][0] * y[1] + r[2][0] * y[2],
                r[0][1] * y[0] + r[1][1] * y[1] + r[2][1] * y[2],
                r[0][2] * y[0] + r[1][2] * y[1] + r[2][2] * y[2],
            ],
            self.frame_c,
        )
    }

    /// Reference-triangle endpoints of edge e (counterclockwise loop).
    pub fn edge_ref_endpoints(e: usize) -> ([f64; 2], [f64; 2]) {
        match e {
            0 => ([0.0, 0.0], [1.0, 0.0]),
            1 => ([1.0, 0.0], [0.0, 1.0]),
            _ => ([0.0, 1.0], [0.0, 0.0]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BuildError {
    /// Jacobian vanished (or was not finite) at a node of the named patch.
    DegenerateJacobian { patch: usize },
    /// The bundled node table has no rule for this degree.
    MissingNodeRule { p: usize },
}

impl core::fmt::Display for BuildError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BuildError::DegenerateJacobian { patch } => {
                write!(f, "degenerate Jacobian while building patch {}", patch)
            }
            BuildError::MissingNodeRule { p } => {
                write!(f, "no collocation rule available for p={}", p)
            }
        }
    }
}

/// A closed surface discretized into curvilinear triangular patches.
#[derive(Clone, Debug)]
pub struct Surface {
    pub def: SurfaceDef,
    pub p: usize,
    pub ptilde: usize,
    pub n_per_patch: usize,
    pub patches: Vec<Patch>,
}

impl Surface {
    /// Build the 2*n_charts*nu*nv patch discretization at degree p with
    /// edge curves sampled at ptilde Gauss-Legendre nodes.
    pub fn build(
        def: SurfaceDef,
        nu: usize,
        nv: usize,
        rule: &NodeRule,
        ptilde: usize,
    ) -> Result<Surface, BuildError> {
        assert!(nu >= 1 && nv >= 1);
        let (tgl, _) = gauss::gauss_legendre(ptilde);
        let mut surf = Self::build_oriented(&def, nu, nv, rule, &tgl, false)?;
        if surf.signed_volume() < 0.0 {
            surf = Self::build_oriented(&def, nu, nv, rule, &tgl, true)?;
        }
        Ok(surf)
    }

    fn build_oriented(
        def: &SurfaceDef,
        nu: usize,
        nv: usize,
        rule: &NodeRule,
        tgl: &[f64],
        flip: bool,
    ) -> Result<Surface, BuildError> {
        let ((u0, u1), (v0, v1)) = def.chart_domain();
        let (du, dv) = ((u1 - u0) / nu as f64, (v1 - v0) / nv as f64);
        let mut patches = Vec::with_capacity(def.n_charts() * nu * nv * 2);
        for chart in 0..def.n_charts() {
            for iu in 0..nu {
                for iv in 0..nv {
                    let a = [u0 + iu as f64 * du, v0 + iv as f64 * dv];
                    let b = [a[0] + du, a[1]];
                    let c = [a[0] + du, a[1] + dv];
                    let d = [a[0], a[1] + dv];
                    for tri in [[a, b, c], [a, c, d]] {
                        let t = if flip {
                            [tri[0], tri[2], tri[1]]
                        } else {
                            tri
                        };
                        let idx = patches.len();
                        patches.push(build_patch(def, chart, t, rule, tgl, idx)?);
                    }
                }
            }
        }
        Ok(Surface {
            def: def.clone(),
            p: rule.p,
            ptilde: tgl.len(),
            n_per_patch: rule.n,
            patches,
        })
    }

    pub fn n_points(&self) -> usize {
        self.patches.len() * self.n_per_patch
    }

    pub fn global_index(&self, ipatch: usize, inode: usize) -> usize {
        ipatch * self.n_per_patch + inode
    }

    /// Position and reference-coordinate partials at (xi, eta) on a patch.
    pub fn eval_ref(&self, ipatch: usize, xi: f64, eta: f64) -> (V3, V3, V3) {
        let pa = &self.patches[ipatch];
        let u = pa.q0[0] + xi * pa.eu[0] + eta * pa.ev[0];
        let v = pa.q0[1] + xi * pa.eu[1] + eta * pa.ev[1];
        let (pos, ru, rv) = self.def.eval(pa.chart, u, v);
        let dxi = add(scale(ru, pa.eu[0]), scale(rv, pa.eu[1]));
        let deta = add(scale(ru, pa.ev[0]), scale(rv, pa.ev[1]));
        (pos, dxi, deta)
    }

    /// Resample a sub-interval [lo, hi] of edge e of a patch at the given
    /// parameter nodes (local frame), directly from the chart.
    pub fn sample_edge(
        &self,
        ipatch: usize,
        e: usize,
        lo: f64,
        hi: f64,
        t: &[f64],
    ) -> EdgeCurve {
        let pa = &self.patches[ipatch];
        let (a, b) = Patch::edge_ref_endpoints(e);
        let mut pos = Vec::with_capacity(t.len());
        let mut tan = Vec::with_capacity(t.len());
        for &s in t {
            let tau = 0.5 * (lo + hi) + 0.5 * s * (hi - lo);
            let xi = a[0] + 0.5 * (tau + 1.0) * (b[0] - a[0]);
            let eta = a[1] + 0.5 * (tau + 1.0) * (b[1] - a[1]);
            let (p, dxi, deta) = self.eval_ref(ipatch, xi, eta);
            // d/ds = (d ref/d tau)(d tau/d s)
            let fac = 0.25 * (hi - lo);
            let dr = scale(
                add(scale(dxi, b[0] - a[0]), scale(deta, b[1] - a[1])),
                fac,
            );
            pos.push(pa.to_local(p));
            tan.push(pa.rotate_to_local(dr));
        }
        EdgeCurve { pos, tan }
    }

    pub fn area(&self) -> f64 {
        self.patches
            .iter()
            .map(|pa| pa.weights.iter().sum::<f64>())
            .sum()
    }

    /// Signed enclosed volume from the divergence theorem.
    pub fn signed_volume(&self) -> f64 {
        let mut v = 0.0;
        for pa in &self.patches {
            for i in 0..pa.weights.len() {
                v += pa.weights[i] * dot(pa.nodes_x[i], pa.nodes_nu[i]);
            }
        }
        v / 3.0
    }

    /// Integral of the outward normal; zero for a closed surface.
    pub fn normal_flux(&self) -> V3 {
        let mut f = [0.0; 3];
        for pa in &self.patches {
            for i in 0..pa.weights.len() {
                f = add(f, scale(pa.nodes_nu[i], pa.weights[i]));
            }
        }
        f
    }

    pub fn max_diameter(&self) -> f64 {
        self.patches
            .iter()
            .map(|p| p.diameter)
            .fold(0.0, f64::max)
    }
}

fn build_patch(
    def: &SurfaceDef,
    chart: usize,
    tri: [[f64; 2]; 3],
    rule: &NodeRule,
    tgl: &[f64],
    idx: usize,
) -> Result<Patch, BuildError> {
    let q0 = tri[0];
    let eu = [tri[1][0] - tri[0][0], tri[1][1] - tri[0][1]];
    let ev = [tri[2][0] - tri[0][0], tri[2][1] - tri[0][1]];
    let at = |xi: f64, eta: f64| -> (V3, V3, V3) {
        let u = q0[0] + xi * eu[0] + eta * ev[0];
        let v = q0[1] + xi * eu[1] + eta * ev[1];
        let (pos, ru, rv) = def.eval(chart, u, v);
        let dxi = add(scale(ru, eu[0]), scale(rv, eu[1]));
        let deta = add(scale(ru, ev[0]), scale(rv, ev[1]));
        (pos, dxi, deta)
    };

    let verts = [at(0.0, 0.0).0, at(1.0, 0.0).0, at(0.0, 1.0).0];
    let frame_c = scale(add(add(verts[0], verts[1]), verts[2]), 1.0 / 3.0);
    let e1 = normalize(sub(verts[1], verts[0]));
    let e3 = normalize(cross(sub(verts[1], verts[0]), sub(verts[2], verts[0])));
    let e2 = cross(e3, e1);
    let frame_r = [e1, e2, e3];

    let diam_guess = dist(verts[0], verts[1])
        .max(dist(verts[1], verts[2]))
        .max(dist(verts[2], verts[0]));

    let n = rule.n;
    let mut nodes_x = Vec::with_capacity(n);
    let mut nodes_nu = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let (xi, eta) = (rule.xy[i][0], rule.xy[i][1]);
        let (pos, dxi, deta) = at(xi, eta);
        let cr = cross(dxi, deta);
        let j = norm(cr);
        if j.is_nan() || j <= 1e-12 * diam_guess * diam_guess {
            return Err(BuildError::DegenerateJacobian { patch: idx });
        }
        nodes_x.push(pos);
        nodes_nu.push(scale(cr, 1.0 / j));
        weights.push(rule.w[i] * j);
    }

    let to_local = |x: V3| -> V3 {
        let d = sub(x, frame_c);
        [dot(frame_r[0], d), dot(frame_r[1], d), dot(frame_r[2], d)]
    };
    let rot_local = |w: V3| -> V3 { [dot(frame_r[0], w), dot(frame_r[1], w), dot(frame_r[2], w)] };
    let nodes_local: Vec<V3> = nodes_x.iter().map(|&x| to_local(x)).collect();
    let nu_local: Vec<V3> = nodes_nu.iter().map(|&w| rot_local(w)).collect();

    // edge curves at the GL parameter nodes, stored in the local frame
    let mut edges = Vec::with_capacity(3);
    let mut global_edge_pts: Vec<V3> = Vec::with_capacity(3 * tgl.len());
    for e in 0..3 {
        let (a, b) = Patch::edge_ref_endpoints(e);
        let mut pos = Vec::with_capacity(tgl.len());
        let mut tan = Vec::with_capacity(tgl.len());
        for &s in tgl {
            let xi = a[0] + 0.5 * (s + 1.0) * (b[0] - a[0]);
            let eta = a[1] + 0.5 * (s + 1.0) * (b[1] - a[1]);
            let (p, dxi, deta) = at(xi, eta);
            let dr = scale(
                add(scale(dxi, b[0] - a[0]), scale(deta, b[1] - a[1])),
                0.5,
            );
            global_edge_pts.push(p);
            pos.push(to_local(p));
            tan.push(rot_local(dr));
        }
        edges.push(EdgeCurve { pos, tan });
    }
    let edges = [edges.remove(0), edges.remove(0), edges.remove(0)];

    // bounding data over nodes, vertices, and edge samples
    let mut center = [0.0; 3];
    for &x in &nodes_x {
        center = add(center, x);
    }
    center = scale(center, 1.0 / n as f64);
    let mut radius: f64 = 0.0;
    for x in nodes_x
        .iter()
        .chain(verts.iter())
        .chain(global_edge_pts.iter())
    {
        radius = radius.max(dist(*x, center));
    }

    Ok(Patch {
        chart,
        q0,
        eu,
        ev,
        verts,
        nodes_x,
        nodes_nu,
        weights,
        nodes_local,
        nu_local,
        frame_c,
        frame_r,
        edges,
        center,
        radius,
        diameter: 2.0 * radius,
    })
}

/// Near/far split of evaluation targets against patch bounding spheres.
pub struct NearLists {
    /// For each patch, indices of targets needing corrected quadrature.
    pub per_patch: Vec<Vec<usize>>,
    /// Targets with no near patch at all.
    pub far: Vec<bool>,
}

pub fn classify_targets(surf: &Surface, targets: &[V3], eta: f64) -> NearLists {
    assert!(eta > 0.0);
    let mut per_patch = vec![Vec::new(); surf.patches.len()];
    let mut far = vec![true; targets.len()];
    for (ip, pa) in surf.patches.iter().enumerate() {
        for (it, &t) in targets.iter().enumerate() {
            if dist(t, pa.center) <= eta * pa.radius {
                per_patch[ip].push(it);
                far[it] = false;
            }
        }
    }
    NearLists { per_patch, far }
}
