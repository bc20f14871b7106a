//! Per-patch density fitting by quaternion combinations of solid-harmonic
//! gradients.
//!
//! In the patch-local frame every density is interpolated by a field
//!
//! ```text
//!     F(x) = Σ_j (0, ∇H_j(x)) * c_j ,
//! ```
//!
//! a quaternion product of the pure-vector gradients of the real solid
//! harmonics `H^(l,m)`, `1 <= m <= l <= p`, with quaternion coefficients
//! `c_j`. Collocating at the `n = p(p+1)/2` interior nodes produces one
//! square real system of size `4n` whose blocks are the three gradient
//! component matrices. The double layer density is matched in the scalar
//! part; the single layer normal derivative is matched along `σ ν` in the
//! vector part; the single layer itself goes through a harmonic extension
//! whose normal derivative matches `σ`, followed by a double-layer refit of
//! the surface values that extension leaves behind.

use alloc::vec;
use alloc::vec::Vec;

use crate::harmonics::real_basis_h;
use crate::linalg::{Lu, Mat, SingularMatrix, V3};
use crate::quaternion::Quaternion;

/// Factorized collocation systems for one patch.
pub struct PatchFit {
    /// Basis size and interior node count.
    pub n: usize,
    nu: Vec<V3>,
    a: Lu,
    b: Lu,
    hval: Mat,
}

impl PatchFit {
    /// Assemble and factor the fitting systems from the node positions and
    /// unit normals, both in the patch-local frame.
    pub fn new(nodes: &[V3], nu: &[V3], p: usize) -> Result<PatchFit, SingularMatrix> {
        let n = p * (p + 1) / 2;
        assert_eq!(nodes.len(), n, "node count must equal the basis size");
        assert_eq!(nu.len(), n);
        let mut amat = Mat::zeros(4 * n, 4 * n);
        let mut bmat = Mat::zeros(n, n);
        let mut hval = Mat::zeros(n, n);
        for i in 0..n {
            let basis = real_basis_h(nodes[i], p);
            for j in 0..n {
                let [f1, f2, f3] = basis.grad[j];
                hval.set(i, j, basis.val[j]);
                bmat.set(i, j, f1 * nu[i][0] + f2 * nu[i][1] + f3 * nu[i][2]);
                // left multiplication by the pure vector (0, f): scalar row
                // -f·c, vector rows c0 f + f × c
                amat.set(i, n + j, -f1);
                amat.set(i, 2 * n + j, -f2);
                amat.set(i, 3 * n + j, -f3);
                amat.set(n + i, j, f1);
                amat.set(n + i, 2 * n + j, -f3);
                amat.set(n + i, 3 * n + j, f2);
                amat.set(2 * n + i, j, f2);
                amat.set(2 * n + i, n + j, f3);
                amat.set(2 * n + i, 3 * n + j, -f1);
                amat.set(3 * n + i, j, f3);
                amat.set(3 * n + i, n + j, -f2);
                amat.set(3 * n + i, 2 * n + j, f1);
            }
        }
        let a = Lu::factor(&amat)?;
        let b = Lu::factor(&bmat)?;
        Ok(PatchFit {
            n,
            nu: nu.to_vec(),
            a,
            b,
            hval,
        })
    }

    /// Quaternion coefficients whose field has scalar part `mu` and zero
    /// vector part at the nodes (double layer).
    pub fn fit_dlp(&self, mu: &[f64]) -> Vec<Quaternion<f64>> {
        let n = self.n;
        let mut rhs = vec![0.0; 4 * n];
        rhs[..n].copy_from_slice(mu);
        self.a.solve(&mut rhs);
        pack(&rhs, n)
    }

    /// Quaternion coefficients whose field is the pure vector `sigma nu` at
    /// the nodes (normal derivative of the single layer).
    pub fn fit_sprime(&self, sigma: &[f64]) -> Vec<Quaternion<f64>> {
        let n = self.n;
        let mut rhs = vec![0.0; 4 * n];
        for i in 0..n {
            rhs[n + i] = sigma[i] * self.nu[i][0];
            rhs[2 * n + i] = sigma[i] * self.nu[i][1];
            rhs[3 * n + i] = sigma[i] * self.nu[i][2];
        }
        self.a.solve(&mut rhs);
        pack(&rhs, n)
    }

    /// Single layer: harmonic-extension coefficients `d` with normal
    /// derivative `sigma` at the nodes, plus the double-layer refit `g` of
    /// the values `Σ H_j d_j` the extension takes on the patch.
    pub fn fit_slp(&self, sigma: &[f64]) -> (Vec<f64>, Vec<Quaternion<f64>>) {
        let mut d = sigma.to_vec();
        self.b.solve(&mut d);
        let rho = self.hval.matvec(&d);
        let g = self.fit_dlp(&rho);
        (d, g)
    }

    /// Transpose solve with the quaternion collocation matrix (length `4n`),
    /// used to turn per-target evaluations into rows acting on node values.
    pub fn solve_a_transpose(&self, rhs: &mut [f64]) {
        self.a.solve_transpose(rhs);
    }

    /// Transpose solve with the normal-derivative system (length `n`).
    pub fn solve_b_transpose(&self, rhs: &mut [f64]) {
        self.b.solve_transpose(rhs);
    }

    /// Values H_j(x_i) at the nodes.
    pub fn hval(&self) -> &Mat {
        &self.hval
    }

    pub fn cond_a(&self) -> f64 {
        self.a.cond_estimate()
    }

    pub fn cond_b(&self) -> f64 {
        self.b.cond_estimate()
    }
}

fn pack(x: &[f64], n: usize) -> Vec<Quaternion<f64>> {
    (0..n)
        .map(|j| Quaternion::new(x[j], [x[n + j], x[2 * n + j], x[3 * n + j]]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Surface, SurfaceDef};
    use crate::nodes::NodeTable;

    fn flat_fit(p: usize) -> PatchFit {
        let table = NodeTable::builtin();
        let rule = table.rule(p).unwrap();
        let nodes: Vec<V3> = rule.xy.iter().map(|q| [q[0], q[1], 0.0]).collect();
        let nu = vec![[0.0, 0.0, 1.0]; nodes.len()];
        PatchFit::new(&nodes, &nu, p).unwrap()
    }

    #[test]
    fn flat_patch_constants_have_single_coefficients() {
        // On z = 0 with nu = e_z the whole story is H^(1,1) = z: the double
        // layer needs the coefficient -k, the normal-derivative fit the
        // identity quaternion, and the single layer d = 1 with no refit.
        let p = 4;
        let fit = flat_fit(p);
        let n = fit.n;
        let ones = vec![1.0; n];
        let idx = crate::harmonics::hidx(1, 1);

        let c = fit.fit_dlp(&ones);
        for (j, q) in c.iter().enumerate() {
            let want = if j == idx {
                Quaternion::new(0.0, [0.0, 0.0, -1.0])
            } else {
                Quaternion::zero()
            };
            assert!((*q - want).norm() < 1e-12, "dlp coeff {}", j);
        }

        let w = fit.fit_sprime(&ones);
        for (j, q) in w.iter().enumerate() {
            let want = if j == idx {
                Quaternion::scalar(1.0)
            } else {
                Quaternion::zero()
            };
            assert!((*q - want).norm() < 1e-12, "sprime coeff {}", j);
        }

        let (d, g) = fit.fit_slp(&ones);
        for (j, dj) in d.iter().enumerate() {
            let want = if j == idx { 1.0 } else { 0.0 };
            assert!((dj - want).abs() < 1e-12, "slp coeff {}", j);
        }
        for q in g.iter() {
            assert!(q.norm() < 1e-12);
        }
    }

    #[test]
    fn fits_reproduce_the_prescribed_fields_on_a_curved_patch() {
        let p = 6;
        let table = NodeTable::builtin();
        let rule = table.rule(p).unwrap();
        let surf = Surface::build(SurfaceDef::Sphere, 1, 1, rule, 12).unwrap();
        let patch = &surf.patches[3];
        let fit = PatchFit::new(&patch.nodes_local, &patch.nu_local, p).unwrap();
        let n = fit.n;

        let mu: Vec<f64> = patch
            .nodes_local
            .iter()
            .map(|x| 1.0 + x[0] - 0.5 * x[1] + 0.3 * x[0] * x[1])
            .collect();

        // residuals of the collocation equations, independent of the solver path
        let c = fit.fit_dlp(&mu);
        for i in 0..n {
            let basis = real_basis_h(patch.nodes_local[i], p);
            let mut field = Quaternion::zero();
            for j in 0..n {
                field = field + Quaternion::vector(basis.grad[j]).qmul(c[j]);
            }
            let want = Quaternion::scalar(mu[i]);
            assert!((field - want).norm() < 1e-9, "dlp node {}: {:?}", i, field);
        }

        let w = fit.fit_sprime(&mu);
        for i in 0..n {
            let basis = real_basis_h(patch.nodes_local[i], p);
            let mut field = Quaternion::zero();
            for j in 0..n {
                field = field + Quaternion::vector(basis.grad[j]).qmul(w[j]);
            }
            let want = Quaternion::vector(crate::linalg::scale(patch.nu_local[i], mu[i]));
            assert!((field - want).norm() < 1e-9, "sprime node {}", i);
        }

        let (d, g) = fit.fit_slp(&mu);
        for i in 0..n {
            let basis = real_basis_h(patch.nodes_local[i], p);
            let mut dn = 0.0;
            let mut rho = 0.0;
            for j in 0..n {
                dn += d[j] * crate::linalg::dot(basis.grad[j], patch.nu_local[i]);
                rho += d[j] * basis.val[j];
            }
            assert!((dn - mu[i]).abs() < 1e-9, "slp normal derivative node {}", i);
            // the refit reproduces the extension's surface values
            let mut field = Quaternion::zero();
            for j in 0..n {
                field = field + Quaternion::vector(basis.grad[j]).qmul(g[j]);
            }
            assert!((field - Quaternion::scalar(rho)).norm() < 1e-9);
        }
    }

    #[test]
    fn systems_factor_on_real_patches_at_high_order() {
        let table = NodeTable::builtin();
        for p in [6, 10] {
            let rule = table.rule(p).unwrap();
            let surf = Surface::build(SurfaceDef::wtorus(), 2, 4, rule, 2 * p).unwrap();
            for patch in surf.patches.iter() {
                let fit = PatchFit::new(&patch.nodes_local, &patch.nu_local, p).unwrap();
                assert!(fit.cond_a().is_finite());
                assert!(fit.cond_b().is_finite());
            }
        }
    }
}
