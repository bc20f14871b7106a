#!/usr/bin/env python3
"""Generate symmetric Gauss-like quadrature/interpolation node tables for the
reference triangle (0,0)-(1,0)-(0,1).

For each order p the rule has n = p(p+1)/2 strictly interior points with
positive weights, organized in S3 orbits seeded from the close-packed lattice
arrangement, and integrates polynomials exactly up to degree floor((3p-1)/2).
The points double as unisolvent interpolation nodes for total degree p-1.

Writes crates/rrq-core/data/triangle_nodes.txt.

Usage: python3 tools/gen_nodes.py [pmax]
"""

import sys
import numpy as np
from scipy.optimize import least_squares
from scipy.special import eval_jacobi

V = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

PERMS3 = [(0, 0, 1), (0, 1, 0), (1, 0, 0)]  # index of the 'c' slot in (a,a,c)
PERMS6 = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]


def basis_pairs(d):
    return [(m, n) for m in range(d + 1) for n in range(d + 1 - m)]


def koornwinder_block(pairs, x, y):
    """K[q, i] plus dK/dx and dK/dy, for all basis pairs at the points."""
    yy = np.minimum(y, 1.0 - 1e-13)
    g = 1.0 - yy
    a = 2.0 * x / g - 1.0
    b = 2.0 * y - 1.0
    nq, npt = len(pairs), len(x)
    K = np.empty((nq, npt))
    Kx = np.empty((nq, npt))
    Ky = np.empty((nq, npt))
    for q, (m, n) in enumerate(pairs):
        c = np.sqrt(2.0 * (2 * m + 1) * (m + n + 1))
        Pm = eval_jacobi(m, 0, 0, a)
        dPm = 0.5 * (m + 1) * eval_jacobi(m - 1, 1, 1, a) if m >= 1 else np.zeros(npt)
        Pn = eval_jacobi(n, 2 * m + 1, 0, b)
        dPn = 0.5 * (n + 2 * m + 2) * eval_jacobi(n - 1, 2 * m + 2, 1, b) if n >= 1 else np.zeros(npt)
        gm = g ** m
        gm1 = g ** (m - 1) if m >= 1 else np.zeros(npt)
        K[q] = c * Pm * gm * Pn
        Kx[q] = c * dPm * (2.0 / g) * gm * Pn
        Ky[q] = c * (dPm * (2.0 * x / g ** 2) * gm * Pn
                     - m * Pm * gm1 * Pn
                     + Pm * gm * dPn * 2.0)
    return K, Kx, Ky


def lattice_orbits(p):
    """Group the close-packed lattice multi-indices i+j+k = p-1 into S3 orbits."""
    seen = set()
    orbits = []
    for i in range(p):
        for j in range(p - i):
            k = p - 1 - i - j
            key = tuple(sorted((i, j, k)))
            if key in seen:
                continue
            seen.add(key)
            lam = (np.array([i, j, k], dtype=float) + 1.0 / 3.0) / p
            if i == j == k:
                orbits.append((1, ()))
            elif key[0] == key[1] or key[1] == key[2]:
                rep = (np.array(key, dtype=float) + 1.0 / 3.0) / p
                a = rep[0] if key[0] == key[1] else rep[1]
                orbits.append((3, (a,)))
            else:
                orbits.append((6, (lam[0], lam[1])))
    return orbits


def orbit_lambdas(kind, params):
    if kind == 1:
        return [np.array([1, 1, 1]) / 3.0], []
    if kind == 3:
        a = params[0]
        lams, dlams = [], []
        for perm in PERMS3:
            lam = np.where(np.array(perm) == 1, 1.0 - 2.0 * a, a)
            dlam = np.where(np.array(perm) == 1, -2.0, 1.0)
            lams.append(lam)
            dlams.append([dlam])
        return lams, dlams
    a, b = params
    vals = np.array([a, b, 1.0 - a - b])
    da = np.array([1.0, 0.0, -1.0])
    db = np.array([0.0, 1.0, -1.0])
    lams, dlams = [], []
    for perm in PERMS6:
        lams.append(vals[list(perm)])
        dlams.append([da[list(perm)], db[list(perm)]])
    return lams, dlams


def unpack(theta, orbits):
    pts, wts = [], []
    pos = 0
    for kind, init in orbits:
        w = theta[pos]
        pos += 1
        params = tuple(theta[pos:pos + len(init)])
        pos += len(init)
        lams, _ = orbit_lambdas(kind, params)
        for lam in lams:
            pts.append(lam @ V)
            wts.append(w)
    return np.array(pts), np.array(wts)


def pack_init(orbits, n):
    theta = [v for kind, init in orbits for v in (0.5 / n,) + tuple(init)]
    return np.array(theta)


def res_jac(theta, orbits, pairs):
    pts, wts = unpack(theta, orbits)
    K, Kx, Ky = koornwinder_block(pairs, pts[:, 0], pts[:, 1])
    r = K @ wts
    r[0] -= 1.0 / np.sqrt(2.0)
    J = np.zeros((len(pairs), len(theta)))
    pos = 0
    ip = 0
    for kind, init in orbits:
        lams, dlams = orbit_lambdas(kind, tuple(theta[pos + 1:pos + 1 + len(init)]))
        npts = len(lams)
        w = theta[pos]
        J[:, pos] = K[:, ip:ip + npts].sum(axis=1)
        for c in range(len(init)):
            col = np.zeros(len(pairs))
            for t in range(npts):
                dxy = dlams[t][c] @ V
                col += Kx[:, ip + t] * dxy[0] + Ky[:, ip + t] * dxy[1]
            J[:, pos + 1 + c] = w * col
        pos += 1 + len(init)
        ip += npts
    return r, J


def residual(theta, orbits, pairs):
    return res_jac(theta, orbits, pairs)[0]


def jacobian(theta, orbits, pairs):
    return res_jac(theta, orbits, pairs)[1]


def admissibility(theta, orbits):
    pts, wts = unpack(theta, orbits)
    bary = np.column_stack([pts[:, 0], pts[:, 1], 1.0 - pts[:, 0] - pts[:, 1]])
    return np.min(wts), np.min(bary)


def hinge_terms(theta, orbits, n, p):
    wmin = 0.05 * 0.5 / n
    bmin = 0.08 / p
    hinges = []
    pos = 0
    for kind, init in orbits:
        w = theta[pos]
        hinges.append(10.0 * max(0.0, wmin - w))
        pos += 1
        if kind == 3:
            a = theta[pos]
            pos += 1
            barys = (a, 1.0 - 2.0 * a)
        elif kind == 6:
            a, b = theta[pos], theta[pos + 1]
            pos += 2
            barys = (a, b, 1.0 - a - b)
        else:
            barys = ()
        hinges.extend(10.0 * max(0.0, bmin - v) for v in barys)
    return np.array(hinges)


def residual_regularized(theta, orbits, pairs, theta0, n, p):
    r = residual(theta, orbits, pairs)
    hinges = hinge_terms(theta, orbits, n, p)
    ridge = 3e-4 * (theta - theta0)
    return np.concatenate([r, hinges, ridge])


def gauss_newton_polish(theta, orbits, pairs, iters=10):
    for _ in range(iters):
        r, J = res_jac(theta, orbits, pairs)
        if np.max(np.abs(r)) < 1e-15:
            break
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        theta = theta + step
    return theta


def solve_rule(p, seed=0):
    n = p * (p + 1) // 2
    d = (3 * p - 1) // 2
    orbits = lattice_orbits(p)
    pairs = basis_pairs(d)
    rng = np.random.default_rng(seed)
    theta0 = pack_init(orbits, n)
    best = None
    for attempt in range(24):
        t0 = theta0.copy()
        if attempt > 0:
            t0 += rng.normal(scale=0.002 * (1 + attempt % 8), size=t0.shape) * (t0 != 0)
        pre = least_squares(residual_regularized, t0,
                            args=(orbits, pairs, theta0, n, p), method="trf",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000)
        sol = least_squares(residual, pre.x, jac=jacobian, args=(orbits, pairs),
                            method="lm", xtol=3e-16, ftol=3e-16, gtol=3e-16,
                            max_nfev=20000)
        theta = gauss_newton_polish(sol.x, orbits, pairs)
        res = np.max(np.abs(residual(theta, orbits, pairs)))
        wmin, bmin = admissibility(theta, orbits)
        ok = res < 5e-14 and wmin > 1e-6 and bmin > 1e-4
        if best is None or (ok and not best[3]) or (ok == best[3] and res < best[0]):
            best = (res, theta, attempt, ok)
        if ok:
            return theta, orbits, res
    raise RuntimeError(f"p={p}: no admissible rule found, best residual {best[0]:.3e}, "
                       f"wmin/bmin {admissibility(best[1], orbits)}")


def vandermonde_cond(p, pts):
    pairs = basis_pairs(p - 1)
    K, _, _ = koornwinder_block(pairs, pts[:, 0], pts[:, 1])
    return np.linalg.cond(K.T)


def main():
    pmax = int(sys.argv[1]) if len(sys.argv) > 1 else 14
    blocks = []
    for p in range(1, pmax + 1):
        n = p * (p + 1) // 2
        d = (3 * p - 1) // 2
        if p == 1:
            pts = np.array([[1 / 3, 1 / 3]])
            wts = np.array([0.5])
            res = 0.0
        else:
            theta, orbits, res = solve_rule(p)
            pts, wts = unpack(theta, orbits)
        cond = vandermonde_cond(p, pts)
        print(f"p={p:2d} n={n:3d} degree={d:2d} moment-res={res:.2e} "
              f"min-w={np.min(wts):.3e} "
              f"min-bary={min(np.min(pts), np.min(1-pts[:,0]-pts[:,1])):.3e} "
              f"interp-cond={cond:.2e} sum-w={np.sum(wts):.16f}", flush=True)
        lines = [f"p {p} n {n} degree {d}"]
        for (x, y), w in zip(pts, wts):
            lines.append(f"{x:.17e} {y:.17e} {w:.17e}")
        blocks.append("\n".join(lines))
    header = ("# Symmetric interpolation/quadrature nodes for the reference triangle\n"
              "# (0,0)-(1,0)-(0,1). Block: 'p <p> n <n> degree <d>' then n lines 'x y w'.\n"
              "# Weights sum to 1/2; rule is exact for polynomials of total degree <= d.\n"
              "# Generated by tools/gen_nodes.py.\n")
    out = header + "\n".join(blocks) + "\n"
    with open("crates/rrq-core/data/triangle_nodes.txt", "w") as f:
        f.write(out)
    print("wrote crates/rrq-core/data/triangle_nodes.txt")


if __name__ == "__main__":
    main()
