"""Independent oracles for the test suite.

Everything here is deliberately written against first principles (group
action matrices, pointwise quadrature, explicit ladder elimination, finite
differences, hand-derived closed forms) rather than through the package's
own code paths, so agreement is evidence and not tautology.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from snhopf.poly import Monomial, VectorPoly
from snhopf.symmetry import component_weight


# ---------------------------------------------------------------------------
# group averaging by pointwise quadrature
# ---------------------------------------------------------------------------

def torus_element(p: int, thetas, ncomp: int) -> np.ndarray:
    """Diagonal action matrix diag(1, e^{i th_1}, e^{-i th_1}, ...) extended
    by identity rows for any trailing (nu/mu) components."""
    diag = [1.0 + 0.0j]
    for th in thetas:
        diag.extend([np.exp(1j * th), np.exp(-1j * th)])
    while len(diag) < ncomp:
        diag.append(1.0 + 0.0j)
    return np.diag(diag)


def haar_average_pointwise(f: VectorPoly, points, n_grid: int = 64,
                           freeze_nu: bool = False) -> np.ndarray:
    """Numeric Haar average of gamma f(gamma^{-1} x) evaluated at points.

    Product trapezoid rule on the torus with n_grid points per circle;
    exact for the trigonometric degrees that arise here.  Returns an array
    of shape (len(points), ncomp).
    """
    sp = f.space
    p = sp.p
    out = np.zeros((len(points), sp.ncomp), dtype=complex)
    grids = [np.arange(n_grid) * (2 * math.pi / n_grid)] * p
    for thetas in itertools.product(*grids):
        g = torus_element(p, thetas, sp.ncomp)
        ginv_vars = torus_element(p, [-t for t in thetas], sp.nvars)
        for i, pt in enumerate(points):
            x = ginv_vars @ np.asarray(pt, dtype=complex)
            if freeze_nu:
                x = x.copy()
                x[sp.nu_index] = 0.0
            out[i] += g @ f.eval(x)
    return out / (n_grid ** p)


def fixed_subspace_dimension(space, n_grid: int = 16) -> int:
    """Rank of the Haar-averaged action on the coefficient space, computed
    from the defining diagonal matrices (independent of the package's
    integer resonance test)."""
    from snhopf.poly import enumerate_basis
    basis = enumerate_basis(space)
    p = space.p
    grids = [np.arange(n_grid) * (2 * math.pi / n_grid)] * p
    P = np.zeros((len(basis), len(basis)), dtype=complex)
    for thetas in itertools.product(*grids):
        phases = np.empty(len(basis), dtype=complex)
        comp_diag = np.diag(torus_element(p, thetas, space.ncomp))
        var_diag = np.diag(torus_element(p, thetas, space.nvars))
        for i, (k, m) in enumerate(basis):
            mono_phase = np.prod(var_diag ** np.asarray(m))
            phases[i] = comp_diag[k] / mono_phase
        P += np.diag(phases)
    P /= n_grid ** p
    sv = np.linalg.svd(P, compute_uv=False)
    return int(np.sum(sv > 0.5))


# ---------------------------------------------------------------------------
# explicit ladder elimination for the homological equation
# ---------------------------------------------------------------------------

def ladder_solve(g: VectorPoly, omegas) -> VectorPoly:
    """Solve the homological equation by explicit elimination.

    Monomials sharing a component, rotation exponents and parameter part
    form a ladder along which one power of x0 trades for one power of nu.
    On non-resonant ladders the bidiagonal system solves forward; on
    resonant ladders the diagonal vanishes and the shift inverts directly
    (the solvability condition is exactly that the nu-free end of the
    ladder carries no data).
    """
    sp = g.space
    p = sp.p
    nu = sp.nu_index
    om = np.asarray(omegas, dtype=float)
    ladders: dict[tuple, dict[int, complex]] = {}
    for k, m, c in g.terms():
        rot = tuple(m[1:2 * p + 1])
        mu = tuple(m[2 * p + 2:])
        key = (k, rot, mu, m[0] + m[nu])
        ladders.setdefault(key, {})[m[nu]] = c
    comps: list[dict] = [dict() for _ in range(sp.ncomp)]
    for (k, rot, mu, total), data in ladders.items():
        w = component_weight(sp, k)
        charge = tuple(rot[2 * j] - rot[2 * j + 1] for j in range(p))
        d = 1j * float(np.dot([a - b for a, b in zip(charge, w)], om))
        h = {}
        if abs(d) > 0:
            # (L h)_c = d h_c + (total - c + 1) h_{c-1}
            for c_exp in range(0, total + 1):
                rhs = data.get(c_exp, 0.0)
                prev = h.get(c_exp - 1, 0.0)
                h[c_exp] = (rhs - (total - c_exp + 1) * prev) / d
        else:
            # nilpotent ladder: (L h)_c = (total - c + 1) h_{c-1}
            if abs(data.get(0, 0.0)) > 1e-12:
                raise ValueError("rhs not solvable: nu-free resonant data")
            for c_exp in range(1, total + 1):
                h[c_exp - 1] = data.get(c_exp, 0.0) / (total - c_exp + 1)
        for c_exp, val in h.items():
            if val == 0:
                continue
            m = [0] * sp.nvars
            m[0] = total - c_exp
            for i, e in enumerate(rot):
                m[1 + i] = e
            m[nu] = c_exp
            for i, e in enumerate(mu):
                m[2 * p + 2 + i] = e
            comps[k][Monomial(m)] = val
    return VectorPoly(sp, comps, _validate=False)


# ---------------------------------------------------------------------------
# finite differences of the flow conjugation
# ---------------------------------------------------------------------------

def flow_conjugated(f: VectorPoly, omegas, s: float) -> VectorPoly:
    """e^{-Bs} f(e^{Bs} x + s nu e0, nu, mu): the one-parameter conjugation
    whose derivative at s=0 is the homological operator."""
    from snhopf.poly import compose_linear
    sp = f.space
    p = sp.p
    lam = [0.0] + [sgn * w for w in omegas for sgn in (1.0, -1.0)]
    n = sp.nstate
    M = np.zeros((n, n), dtype=complex)
    for i in range(2 * p + 1):
        M[i, i] = np.exp(lam[i] * 1j * s)
    M[0, sp.nu_index] = s
    M[sp.nu_index, sp.nu_index] = 1.0
    g = compose_linear(f, M)
    comps = [{m: np.exp(-lam[k] * 1j * s) * c for m, c in comp.items()}
             for k, comp in enumerate(g.coeffs)]
    return VectorPoly(g.space, comps, _validate=False)


def homological_fd(f: VectorPoly, omegas, h: float = 1e-5) -> VectorPoly:
    plus = flow_conjugated(f, omegas, h)
    minus = flow_conjugated(f, omegas, -h)
    return (plus - minus) * (1.0 / (2 * h))


# ---------------------------------------------------------------------------
# small dict-polynomial arithmetic (independent of snhopf.poly helpers)
# ---------------------------------------------------------------------------

def dmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            key = tuple(x + y for x, y in zip(ma, mb))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def ddiff(a: dict, var: int) -> dict:
    out = {}
    for m, c in a.items():
        if m[var]:
            key = m[:var] + (m[var] - 1,) + m[var + 1:]
            out[key] = out.get(key, 0.0) + m[var] * c
    return out


def degree3_pushforward(f2: VectorPoly, U2: VectorPoly,
                        g2: VectorPoly) -> VectorPoly:
    """Classical cross-degree term of a quadratic transformation applied to
    a quadratic field: Df2 . U2 - DU2 . g2 (all homogeneous of degree 3)."""
    sp = f2.space
    nx = 2 * sp.p + 1
    comps: list[dict] = [dict() for _ in range(sp.ncomp)]
    for k in range(sp.ncomp):
        f2k = {tuple(m): c for m, c in f2.coeffs[k].items()}
        U2k = {tuple(m): c for m, c in U2.coeffs[k].items()}
        acc: dict = {}
        for i in range(nx):
            ui = {tuple(m): c for m, c in U2.coeffs[i].items()}
            gi = {tuple(m): c for m, c in g2.coeffs[i].items()}
            for m, c in dmul(ddiff(f2k, i), ui).items():
                acc[m] = acc.get(m, 0.0) + c
            for m, c in dmul(ddiff(U2k, i), gi).items():
                acc[m] = acc.get(m, 0.0) - c
        comps[k] = {Monomial(m): c for m, c in acc.items() if c != 0}
    return VectorPoly(sp.with_(ell=3), comps, _validate=False)


# ---------------------------------------------------------------------------
# closed forms for the two-delay quadratic interaction
# ---------------------------------------------------------------------------

def snhopf_degree2_closed_forms(A: dict, tau, data) -> tuple[float, float, float]:
    """Hand-derived degree-2 radial coefficients (a1, a2, b1) of the
    quadratic two-delay nonlinearity at a single Hopf pair."""
    t1, t2 = tau
    om = data.omegas[0]
    u0 = data.u0
    u1 = data.psi0[1]
    a1 = u0 * (A["A20"] + A["A11"] + A["A02"])
    a2 = u0 * (2 * A["A20"] + 2 * math.cos(om * (t1 - t2)) * A["A11"]
               + 2 * A["A02"])
    b1 = (u1 * (2 * np.exp(1j * om * t1) * A["A20"]
                + (np.exp(1j * om * t1) + np.exp(1j * om * t2)) * A["A11"]
                + 2 * np.exp(1j * om * t2) * A["A02"])).real
    return float(a1), float(a2), float(b1)


def snhopf_degree2_angular_closed_form(A: dict, tau, data) -> float:
    """Imag counterpart of b1: the degree-1 angular coefficient of rho0."""
    t1, t2 = tau
    om = data.omegas[0]
    u1 = data.psi0[1]
    return float((u1 * (2 * np.exp(1j * om * t1) * A["A20"]
                        + (np.exp(1j * om * t1) + np.exp(1j * om * t2)) * A["A11"]
                        + 2 * np.exp(1j * om * t2) * A["A02"])).imag)


# ---------------------------------------------------------------------------
# numeric quadrature of the adjoint pairing
# ---------------------------------------------------------------------------

def pairing_quadrature(kernel, lam: complex, lam2: complex,
                       n: int = 4001) -> complex:
    """Simpson quadrature of psi(0)phi(0) - sum_i w_i int_0^{theta_i}
    psi(xi - theta_i) phi(xi) dxi with psi(xi) = e^{-lam xi}/Delta'(lam),
    phi(theta) = e^{lam2 theta}."""
    from snhopf.spectral import char_derivative
    dp = char_derivative(kernel, lam)
    total = 1.0 / dp  # psi(0) phi(0)
    for theta, w in kernel.atoms:
        if w == 0.0 or theta == 0.0:
            continue
        xs = np.linspace(0.0, theta, n)
        vals = np.exp(-lam * (xs - theta)) / dp * np.exp(lam2 * xs)
        h = (xs[1] - xs[0])
        simp = (vals[0] + vals[-1] + 4 * np.sum(vals[1:-1:2])
                + 2 * np.sum(vals[2:-2:2])) * h / 3.0
        total -= w * simp
    return complex(total)
