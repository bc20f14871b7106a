//! Near-field corrected evaluation of the four Laplace layer potentials
//! S, D, S', D' over a patched surface.
//!
//! Evaluation splits per (target, patch) pair. Far pairs use the smooth
//! collocation rule directly. Near pairs replace the smooth value by the
//! reduction pipeline: fit the patch density in the solid-harmonic bases,
//! reduce each basis integral to the patch boundary, and integrate the
//! boundary 1-forms with root-aware quadrature. Everything per patch
//! (fit factorization, boundary tables) is built once and serves all of
//! that patch's near targets; everything per target is pure, so callers may
//! parallelize over patches or targets freely.
//!
//! Both evaluation modes of the scheme are provided: `near_value` applies
//! the pipeline to sampled density values, and `correction_row` returns the
//! same linear functional as an explicit row over the patch's nodes with the
//! smooth rule subtracted, which is what a boundary-integral solver adds to
//! its smooth matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::density::PatchFit;
use crate::geometry::{classify_targets, Surface};
use crate::linalg::{cross, dot, norm, scale, sub, SingularMatrix, V3};
use crate::oneform::{
    compute_bundles, omega0_only, theta_table, triangle_solid_angle, w_deriv_table, w_table,
    BoundaryData, Bundles,
};
use crate::quaternion::QuatF;
use crate::ssq::{EdgeQuadContext, RootError};

const PI: f64 = core::f64::consts::PI;

/// Which layer potential to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// Single layer S.
    S,
    /// Double layer D.
    D,
    /// Normal derivative of the single layer, S'.
    Sp,
    /// Normal derivative of the double layer, D'.
    Dp,
}

impl Kernel {
    pub fn needs_direction(self) -> bool {
        matches!(self, Kernel::Sp | Kernel::Dp)
    }
}

/// Evaluation parameters. `eta` scales the patch bounding radius for the
/// near/far split; `rho0` and `panels` document the regime threshold and
/// plain-regime panel count baked into the boundary quadrature.
#[derive(Clone, Copy, Debug)]
pub struct EvalConfig {
    pub p: usize,
    pub ptilde: usize,
    pub eta: f64,
    pub rho0: f64,
    pub panels: usize,
}

impl EvalConfig {
    pub fn new(p: usize) -> EvalConfig {
        EvalConfig {
            p,
            ptilde: 2 * p,
            eta: 2.0,
            rho0: crate::ssq::RHO_PLAIN,
            panels: 2,
        }
    }
}

/// Why an evaluation failed, with the offending pair attached.
#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    /// Boundary root search failed (target on an edge curve).
    Root { patch: usize, target: usize },
    /// A patch fitting system was numerically singular.
    Fit { patch: usize },
    /// A direction was required (S', D') but not supplied.
    MissingDirection,
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::Root { patch, target } => write!(
                f,
                "boundary root search failed for target {} against patch {}",
                target, patch
            ),
            EvalError::Fit { patch } => {
                write!(f, "singular density-fitting system on patch {}", patch)
            }
            EvalError::MissingDirection => {
                write!(f, "kernel needs a target direction but none was given")
            }
        }
    }
}

/// Per-patch state for near evaluation: the density-fit factorizations and
/// the boundary curves with their harmonic tables. Ephemeral by design --
/// build it, serve every near target of the patch, drop it.
pub struct PatchCtx {
    pub fit: PatchFit,
    pub bd: BoundaryData,
}

/// Holds the surface, the edge quadrature context, and the evaluation
/// parameters. All methods are pure; per-patch/per-target work is exposed
/// separately so drivers can schedule it as they like.
pub struct Evaluator {
    pub surf: Surface,
    pub ctx: EdgeQuadContext,
    pub cfg: EvalConfig,
}

impl Evaluator {
    pub fn new(surf: Surface, cfg: EvalConfig) -> Evaluator {
        assert_eq!(surf.p, cfg.p, "surface and config degree must agree");
        let ctx = EdgeQuadContext::new(cfg.ptilde);
        Evaluator { surf, ctx, cfg }
    }

    /// Build the per-patch fit and boundary tables (pipeline steps that are
    /// independent of the target).
    pub fn patch_ctx(&self, ip: usize) -> Result<PatchCtx, SingularMatrix> {
        let pa = &self.surf.patches[ip];
        let fit = PatchFit::new(&pa.nodes_local, &pa.nu_local, self.cfg.p)?;
        let panels = [
            [
                self.surf.sample_edge(ip, 0, -1.0, 0.0, &self.ctx.t),
                self.surf.sample_edge(ip, 0, 0.0, 1.0, &self.ctx.t),
            ],
            [
                self.surf.sample_edge(ip, 1, -1.0, 0.0, &self.ctx.t),
                self.surf.sample_edge(ip, 1, 0.0, 1.0, &self.ctx.t),
            ],
            [
                self.surf.sample_edge(ip, 2, -1.0, 0.0, &self.ctx.t),
                self.surf.sample_edge(ip, 2, 0.0, 1.0, &self.ctx.t),
            ],
        ];
        let bd = BoundaryData::new(pa.edges.clone(), panels, self.cfg.p);
        Ok(PatchCtx { fit, bd })
    }

    /// Smooth-rule value of one patch's contribution at a target.
    pub fn smooth_patch(
        &self,
        ip: usize,
        dens: &[f64],
        rp: V3,
        kernel: Kernel,
        nup: Option<V3>,
    ) -> f64 {
        let pa = &self.surf.patches[ip];
        let mut acc = 0.0;
        for i in 0..dens.len() {
            acc += pa.weights[i]
                * kernel_value(kernel, rp, pa.nodes_x[i], pa.nodes_nu[i], nup)
                * dens[i];
        }
        acc
    }

    /// String direction for the solid-angle kernels, in the local frame. The
    /// ray `{target + s u}` must miss the patch: vertical rays do, except
    /// when the target's in-plane footprint lands inside the patch and the
    /// ray points back through it, so the side of the surface decides the
    /// sign there. On-surface targets always take the inward string, which
    /// fixes the interior-limit convention for the jump.
    fn string_dir(&self, ip: usize, rpl: V3, on_surface: bool) -> V3 {
        if on_surface {
            return [0.0, 0.0, -1.0];
        }
        if let Some((xi, eta, zfoot)) = self.footprint(ip, rpl) {
            let inside = xi >= 0.0 && eta >= 0.0 && xi + eta <= 1.0;
            if inside && rpl[2] > zfoot {
                return [0.0, 0.0, 1.0];
            }
        }
        [0.0, 0.0, -1.0]
    }

    /// Newton solve for the patch point directly below/above the target in
    /// the local frame: find (xi, eta) with r_xy(xi, eta) = target_xy.
    /// Returns the reference coordinates and the patch height there.
    fn footprint(&self, ip: usize, rpl: V3) -> Option<(f64, f64, f64)> {
        let pa = &self.surf.patches[ip];
        let (mut xi, mut eta) = (1.0 / 3.0, 1.0 / 3.0);
        for _ in 0..12 {
            let (pos, dxi, deta) = self.surf.eval_ref(ip, xi, eta);
            let pl = pa.to_local(pos);
            let dl1 = pa.rotate_to_local(dxi);
            let dl2 = pa.rotate_to_local(deta);
            let f = [pl[0] - rpl[0], pl[1] - rpl[1]];
            let det = dl1[0] * dl2[1] - dl2[0] * dl1[1];
            if det.abs() < 1e-14 {
                return None;
            }
            let sx = (f[0] * dl2[1] - f[1] * dl2[0]) / det;
            let sy = (f[1] * dl1[0] - f[0] * dl1[1]) / det;
            xi -= sx;
            eta -= sy;
            if !(xi.is_finite() && eta.is_finite()) || xi.abs() + eta.abs() > 8.0 {
                return None;
            }
            if sx.abs() + sy.abs() < 1e-12 {
                let (pos, _, _) = self.surf.eval_ref(ip, xi, eta);
                return Some((xi, eta, pa.to_local(pos)[2]));
            }
        }
        None
    }

    /// Bundles for one near (patch, target) pair, in the local frame.
    fn bundles_for(
        &self,
        pc: &PatchCtx,
        ip: usize,
        rp: V3,
        nup: Option<V3>,
        on_surface: bool,
    ) -> Result<(V3, Option<V3>, Bundles, Option<Bundles>), RootError> {
        let pa = &self.surf.patches[ip];
        let rpl = pa.to_local(rp);
        let nupl = nup.map(|n| pa.rotate_to_local(n));
        let u = self.string_dir(ip, rpl, on_surface);
        let (b, db) = compute_bundles(&self.ctx, &pc.bd, rpl, u, nupl)?;
        Ok((rpl, nupl, b, db))
    }

    /// Corrected value of one patch's contribution at a near target. For S'
    /// and D' the direction `nup` must be set. `on_surface` marks targets
    /// that lie on the surface itself (collocation nodes), selecting the
    /// interior-limit convention.
    pub fn near_value(
        &self,
        pc: &PatchCtx,
        ip: usize,
        dens: &[f64],
        rp: V3,
        kernel: Kernel,
        nup: Option<V3>,
        on_surface: bool,
    ) -> Result<f64, RootError> {
        let want_db = matches!(kernel, Kernel::Dp);
        let (rpl, nupl, b, db) =
            self.bundles_for(pc, ip, rp, if want_db { nup } else { None }, on_surface)?;
        let nupl = nupl.or_else(|| nup.map(|n| self.surf.patches[ip].rotate_to_local(n)));
        let wt = w_table(&b, rpl);
        Ok(match kernel {
            Kernel::D => {
                let c = pc.fit.fit_dlp(dens);
                (0..wt.len()).map(|i| wt[i].qmul(c[i]).scalar_part()).sum()
            }
            Kernel::S => {
                let th = theta_table(&b, rpl);
                let (d, g) = pc.fit.fit_slp(dens);
                (0..wt.len())
                    .map(|i| th[i] * d[i] + wt[i].qmul(g[i]).scalar_part())
                    .sum()
            }
            Kernel::Sp => {
                let w = pc.fit.fit_sprime(dens);
                let acc = (0..wt.len()).fold(QuatF::zero(), |a, i| a + wt[i].qmul(w[i]));
                QuatF::vector(nupl.expect("S' needs a direction"))
                    .qmul(acc)
                    .scalar_part()
            }
            Kernel::Dp => {
                let c = pc.fit.fit_dlp(dens);
                let dwt = w_deriv_table(&b, &db.expect("derivative bundles"), rpl, nupl.unwrap());
                (0..dwt.len()).map(|i| dwt[i].qmul(c[i]).scalar_part()).sum()
            }
        })
    }

    /// The same linear functional as `near_value` minus the smooth rule,
    /// returned as an explicit row over the patch's node samples:
    /// `row . dens = near_value(dens) - smooth_patch(dens)` for every
    /// density, to rounding.
    pub fn correction_row(
        &self,
        pc: &PatchCtx,
        ip: usize,
        rp: V3,
        kernel: Kernel,
        nup: Option<V3>,
        on_surface: bool,
    ) -> Result<Vec<f64>, RootError> {
        let pa = &self.surf.patches[ip];
        let n = pc.fit.n;
        let want_db = matches!(kernel, Kernel::Dp);
        let (rpl, nupl, b, db) =
            self.bundles_for(pc, ip, rp, if want_db { nup } else { None }, on_surface)?;
        let nupl = nupl.or_else(|| nup.map(|n| pa.rotate_to_local(n)));
        let wt = w_table(&b, rpl);

        // the potential is rowvec(tables) . solve(collocation rhs(dens));
        // transpose-solving moves the tables onto the node samples
        let mut row = match kernel {
            Kernel::D => {
                let mut r = quat_row(&wt, n);
                pc.fit.solve_a_transpose(&mut r);
                r.truncate(n);
                r
            }
            Kernel::Dp => {
                let dwt = w_deriv_table(&b, &db.expect("derivative bundles"), rpl, nupl.unwrap());
                let mut r = quat_row(&dwt, n);
                pc.fit.solve_a_transpose(&mut r);
                r.truncate(n);
                r
            }
            Kernel::Sp => {
                let nq = QuatF::vector(nupl.expect("S' needs a direction"));
                let s: Vec<QuatF> = wt.iter().map(|&w| nq.qmul(w)).collect();
                let mut r = quat_row(&s, n);
                pc.fit.solve_a_transpose(&mut r);
                // the S' right-hand side is the pure vector sigma*nu per node
                (0..n)
                    .map(|i| {
                        let nu = self.surf.patches[ip].nu_local[i];
                        r[n + i] * nu[0] + r[2 * n + i] * nu[1] + r[3 * n + i] * nu[2]
                    })
                    .collect()
            }
            Kernel::S => {
                let th = theta_table(&b, rpl);
                let mut r = quat_row(&wt, n);
                pc.fit.solve_a_transpose(&mut r);
                // value = th . d + y0 . (Hval d) with d = B^{-1} sigma
                let mut s = vec![0.0; n];
                for i in 0..n {
                    s[i] = th[i];
                    for j in 0..n {
                        s[i] += pc.fit.hval().get(j, i) * r[j];
                    }
                }
                pc.fit.solve_b_transpose(&mut s);
                s
            }
        };
        for i in 0..n {
            row[i] -=
                pa.weights[i] * kernel_value(kernel, rp, pa.nodes_x[i], pa.nodes_nu[i], nup);
        }
        Ok(row)
    }

    /// Evaluate one kernel for sampled density at arbitrary targets: smooth
    /// rule for far pairs, corrected quadrature for near ones. `nups` must
    /// supply one direction per target for S' and D'. Serial reference
    /// driver; the per-patch pieces it calls are all pure.
    pub fn eval_potential(
        &self,
        dens: &[f64],
        targets: &[V3],
        kernel: Kernel,
        nups: Option<&[V3]>,
    ) -> Result<Vec<f64>, EvalError> {
        assert_eq!(dens.len(), self.surf.n_points());
        if kernel.needs_direction() {
            match nups {
                Some(ns) => assert_eq!(ns.len(), targets.len()),
                None => return Err(EvalError::MissingDirection),
            }
        }
        let near = classify_targets(&self.surf, targets, self.cfg.eta);
        let mut out = vec![0.0; targets.len()];
        let npp = self.surf.n_per_patch;
        for ip in 0..self.surf.patches.len() {
            let dp = &dens[ip * npp..(ip + 1) * npp];
            for (it, &rp) in targets.iter().enumerate() {
                out[it] += self.smooth_patch(ip, dp, rp, kernel, nups.map(|ns| ns[it]));
            }
            if near.per_patch[ip].is_empty() {
                continue;
            }
            let pc = self
                .patch_ctx(ip)
                .map_err(|_| EvalError::Fit { patch: ip })?;
            for &it in &near.per_patch[ip] {
                let rp = targets[it];
                let nup = nups.map(|ns| ns[it]);
                let nv = self
                    .near_value(&pc, ip, dp, rp, kernel, nup, false)
                    .map_err(|_| EvalError::Root {
                        patch: ip,
                        target: it,
                    })?;
                out[it] += nv - self.smooth_patch(ip, dp, rp, kernel, nup);
            }
        }
        Ok(out)
    }

    /// Total solid angle of the surface seen from `rp`: 4 pi (per enclosing
    /// component) inside, 0 outside. Far patches reduce to the flat triangle
    /// of their corner vertices — the curved-edge corrections are shared
    /// between neighbors with opposite orientation and cancel in the sum —
    /// while near patches integrate the true boundary so that targets in the
    /// thin gap between a patch and its chordal triangle still resolve.
    pub fn solid_angle_sum(&self, rp: V3) -> Result<f64, EvalError> {
        let mut total = 0.0;
        for (ip, pa) in self.surf.patches.iter().enumerate() {
            if norm(sub(rp, pa.center)) > self.cfg.eta * pa.radius {
                total += triangle_solid_angle(pa.verts, rp);
            } else {
                let rpl = pa.to_local(rp);
                let u = self.string_dir(ip, rpl, false);
                total += omega0_only(&self.ctx, &pa.edges, rpl, u).map_err(|_| {
                    EvalError::Root {
                        patch: ip,
                        target: usize::MAX,
                    }
                })?;
            }
        }
        Ok(total)
    }
}

/// Pointwise kernel for the smooth rule. `x`, `nu` are the source node and
/// its outward normal; `nup` is the target direction for S' and D'. A target
/// coinciding with the source node contributes zero: on-surface collocation
/// simply skips the singular diagonal, and the corrected near value replaces
/// the whole patch contribution anyway.
pub fn kernel_value(kernel: Kernel, rp: V3, x: V3, nu: V3, nup: Option<V3>) -> f64 {
    let d = sub(rp, x);
    let r = norm(d);
    if r < 1e-300 {
        return 0.0;
    }
    match kernel {
        Kernel::S => 1.0 / (4.0 * PI * r),
        Kernel::D => dot(nu, d) / (4.0 * PI * r * r * r),
        Kernel::Sp => {
            let np = nup.expect("S' needs a direction");
            -dot(np, d) / (4.0 * PI * r * r * r)
        }
        Kernel::Dp => {
            let np = nup.expect("D' needs a direction");
            (dot(nu, np) - 3.0 * dot(nu, d) * dot(np, d) / (r * r)) / (4.0 * PI * r * r * r)
        }
    }
}

/// Unpack the linear functional `sum_i [t_i qmul q_i]_0` over quaternion
/// coefficients into a stacked real row (scalar block, then the three
/// vector blocks) matching the collocation system layout.
fn quat_row(t: &[QuatF], n: usize) -> Vec<f64> {
    let mut r = vec![0.0; 4 * n];
    for i in 0..n {
        r[i] = t[i].s;
        r[n + i] = -t[i].v[0];
        r[2 * n + i] = -t[i].v[1];
        r[3 * n + i] = -t[i].v[2];
    }
    r
}
