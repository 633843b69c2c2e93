"""Group actions on the graded spaces and the associated projections.

The torus acts diagonally on the center variables (weight +1 on each x_j
row, -1 on each conjugate row); the saddle-node nilpotency adds a
non-compact one-parameter shear.  On monomials the torus average is an
exact integer test: a monomial survives iff its charge matches the
component weight.  Rational independence of the frequencies makes this
filter exact -- no floating comparison of frequency combinations is ever
needed, which removes all tolerance ambiguity from the core projections.

Also here: the radial/angular decoupling of equivariant fields in polar
coordinates, the reflection-equivariant radial spaces they land in, and
the time-average operator used as an independent check of the projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NumericalError, PreconditionError
from .poly import (CENTER, FULL, MU_INDEPENDENT, NU_INDEPENDENT, RADIAL,
                   TOL_STRUCT, VANISHING_AT_MU0, Monomial, SpaceDesc,
                   VectorPoly, enumerate_basis)

TORUS = "torus"
FULL_GROUP = "full_group"

#: SVD cutoff for the numerically computed full-group basis
NULLSPACE_CUTOFF = 1e-10


def component_weight(space: SpaceDesc, k: int) -> tuple[int, ...]:
    """Torus weight of component k: 0 for x0/nu/mu rows, +-e_j for x_j rows."""
    w = [0] * space.p
    if 1 <= k <= 2 * space.p:
        j = (k + 1) // 2
        w[j - 1] = 1 if k % 2 == 1 else -1
    return tuple(w)


def monomial_charge(space: SpaceDesc, m: Sequence[int]) -> tuple[int, ...]:
    return tuple(m[2 * j - 1] - m[2 * j] for j in range(1, space.p + 1))


def resonance_defect(space: SpaceDesc, k: int, m: Sequence[int]) -> tuple[int, ...]:
    """Integer defect delta(k, m); zero iff the monomial is torus-resonant."""
    q = monomial_charge(space, m)
    w = component_weight(space, k)
    return tuple(a - b for a, b in zip(q, w))


def is_resonant(space: SpaceDesc, k: int, m: Sequence[int]) -> bool:
    return all(d == 0 for d in resonance_defect(space, k, m))


def _require_center(f: VectorPoly, op: str) -> None:
    if f.space.layout != CENTER:
        raise PreconditionError(f"{op} requires the center layout")


def project_equivariant_nu0(f: VectorPoly) -> VectorPoly:
    """Torus average with the saddle-node variable frozen at zero.

    Keeps exactly the monomials that are torus-resonant in their component
    and carry no power of nu; everything else averages to zero.  The image
    is the nu-independent equivariant space, and the operator is idempotent
    by construction (it is a set-membership filter on monomials).
    """
    _require_center(f, "project_equivariant_nu0")
    space = f.space
    nu = space.nu_index
    comps: list[dict] = [dict() for _ in range(space.ncomp)]
    for k, m, c in f.terms():
        if m[nu] == 0 and is_resonant(space, k, m):
            comps[k][m] = c
    return VectorPoly(space.with_(flavor=NU_INDEPENDENT), comps, _validate=False)


def project_equivariant(f: VectorPoly) -> VectorPoly:
    """Plain torus average of a nu-independent field (no freezing needed)."""
    _require_center(f, "project_equivariant")
    space = f.space
    nu = space.nu_index
    comps: list[dict] = [dict() for _ in range(space.ncomp)]
    for k, m, c in f.terms():
        if m[nu] != 0:
            raise PreconditionError(
                "project_equivariant expects a nu-independent field; "
                f"found monomial {tuple(m)} in component {k}")
        if is_resonant(space, k, m):
            comps[k][m] = c
    return VectorPoly(space.with_(flavor=NU_INDEPENDENT), comps, _validate=False)


# ---------------------------------------------------------------------------
# equivariant bases
# ---------------------------------------------------------------------------

def _torus_basis(p: int, s: int, ell: int) -> tuple[VectorPoly, ...]:
    space = SpaceDesc(p, s, ell, ncomp=2 * p + 1, flavor=NU_INDEPENDENT,
                      layout=CENTER)
    out: list[VectorPoly] = []
    seen_monos = sorted({m for _, m in enumerate_basis(space)},
                        key=Monomial.sort_key)
    for m in seen_monos:
        if is_resonant(space, 0, m):
            out.append(VectorPoly.single(space, 0, m, 1.0))
    for j in range(1, p + 1):
        k, kc = 2 * j - 1, 2 * j
        for m in seen_monos:
            if not is_resonant(space, k, m):
                continue
            mc = space.conj_monomial(m)
            comps_re: list[dict] = [dict() for _ in range(space.ncomp)]
            comps_re[k] = {m: 1.0}
            comps_re[kc] = {mc: 1.0}
            comps_im: list[dict] = [dict() for _ in range(space.ncomp)]
            comps_im[k] = {m: 1.0j}
            comps_im[kc] = {mc: -1.0j}
            out.append(VectorPoly(space, comps_re, _validate=False))
            out.append(VectorPoly(space, comps_im, _validate=False))
    return tuple(out)


def _shear_constraint_matrix(space: SpaceDesc,
                             sub_basis: list[tuple[int, Monomial]]) -> np.ndarray:
    """Linear conditions for commuting with the one-parameter shear group.

    Infinitesimally: every component except the nu row must be
    nu-independent, and the x0 component must equal x0 * d(f_nu)/d(nu).
    """
    nu_row = 2 * space.p + 1
    nu_var = space.nu_index
    rows: dict[tuple, dict[int, complex]] = {}

    def add(row_key, col, val):
        row = rows.setdefault(row_key, {})
        row[col] = row.get(col, 0.0) + val

    for i, (k, m) in enumerate(sub_basis):
        c_nu = m[nu_var]
        if k != nu_row:
            if c_nu > 0:
                dm = tuple(m[:nu_var]) + (c_nu - 1,) + tuple(m[nu_var + 1:])
                add(("dnu", k, dm), i, c_nu)
        else:
            if c_nu > 0:
                dm = list(m)
                dm[nu_var] -= 1
                dm[0] += 1
                add(("nurow", tuple(dm)), i, c_nu)
        if k == 0:
            add(("nurow", tuple(m)), i, -1.0)
    if not rows:
        return np.zeros((0, len(sub_basis)), dtype=complex)
    C = np.zeros((len(rows), len(sub_basis)), dtype=complex)
    for r, (key, entries) in enumerate(sorted(rows.items(), key=lambda kv: repr(kv[0]))):
        for i, val in entries.items():
            C[r, i] = val
    return C


def _conjugation_permutation(space: SpaceDesc,
                             basis: Sequence[tuple[int, Monomial]]) -> np.ndarray:
    idx = {km: i for i, km in enumerate(basis)}
    perm = np.empty(len(basis), dtype=int)
    for i, (k, m) in enumerate(basis):
        perm[i] = idx[(space.conj_component(k), space.conj_monomial(m))]
    return perm


def _realify(vectors: np.ndarray, perm: np.ndarray, cutoff: float) -> np.ndarray:
    """Extract a real basis (fixed points of the reality involution) from a
    conjugation-invariant complex span.  Rows of ``vectors`` span the space."""
    cands = []
    for v in vectors:
        jv = np.conj(v[perm])
        cands.append(v + jv)
        cands.append(-1j * (v - jv))
    A = np.array(cands)
    stacked = np.hstack([A.real, A.imag])
    u, sv, vt = np.linalg.svd(stacked, full_matrices=False)
    rank = int(np.sum(sv > cutoff * sv[0])) if len(sv) else 0
    real_rows = vt[:rank]
    n = vectors.shape[1]
    return real_rows[:, :n] + 1j * real_rows[:, n:]


def equivariant_basis(p: int, s: int, ell: int, kind: str = TORUS
                      ) -> tuple[VectorPoly, ...]:
    """Real basis of the degree-ell equivariant fields.

    kind="torus": nu-independent torus-equivariant fields on the 2p+1
    center components, built directly (resonant monomials, conjugate
    symmetrized into Re/Im pairs).

    kind="full_group": fields on all 2p+2+s components equivariant under
    the torus and the shear; computed numerically as the nullspace of the
    shear commutation equations restricted to the torus-resonant subspace.
    """
    if kind == TORUS:
        return _torus_basis(p, s, ell)
    if kind != FULL_GROUP:
        raise ValueError(f"unknown equivariant basis kind {kind!r}")
    space = SpaceDesc(p, s, ell, ncomp=2 * p + 2 + s, flavor=FULL, layout=CENTER)
    sub_basis = [(k, m) for (k, m) in enumerate_basis(space)
                 if is_resonant(space, k, m)]
    C = _shear_constraint_matrix(space, sub_basis)
    if C.shape[0] == 0:
        null = np.eye(len(sub_basis), dtype=complex)
    else:
        u, sv, vt = np.linalg.svd(C)
        tol = NULLSPACE_CUTOFF * (sv[0] if len(sv) else 1.0)
        rank = int(np.sum(sv > tol))
        null = vt[rank:].conj()
    if null.shape[0] == 0:
        return ()
    perm = _conjugation_permutation(space, sub_basis)
    real_rows = _realify(null, perm, NULLSPACE_CUTOFF)
    out = []
    for row in real_rows:
        comps: list[dict] = [dict() for _ in range(space.ncomp)]
        for val, (k, m) in zip(row, sub_basis):
            if abs(val) > 1e-13:
                comps[k][m] = complex(val)
        out.append(VectorPoly(space, comps, _validate=False))
    return tuple(out)


# ---------------------------------------------------------------------------
# radial / angular decoupling
# ---------------------------------------------------------------------------

def radial_space(p: int, s: int, ell: int, flavor: str = FULL) -> SpaceDesc:
    return SpaceDesc(p, s, ell, ncomp=p + 1, flavor=flavor, layout=RADIAL)


def zp2_ok(p: int, comp: int, m: Sequence[int]) -> bool:
    """Reflection equivariance: row 0 even in every rho_j; row j odd in
    rho_j and even in the others (mu and rho_0 unconstrained)."""
    for j in range(1, p + 1):
        want_odd = (comp == j)
        if (m[j] % 2 == 1) != want_odd:
            return False
    return True


def zp2_equivariant_basis(space: SpaceDesc) -> tuple[tuple[int, Monomial], ...]:
    """Basis of the reflection-equivariant subspace of a radial space."""
    if space.layout != RADIAL:
        raise PreconditionError("zp2_equivariant_basis needs a radial space")
    return tuple((k, m) for (k, m) in enumerate_basis(space)
                 if zp2_ok(space.p, k, m))


def _radial_image_monomial(p: int, k: int, m: Monomial) -> tuple[int, Monomial]:
    """Polar image of a resonant center monomial: x0 -> rho0, x_j -> rho_j e^{i theta_j}."""
    a0 = m[0]
    mu = tuple(m[2 * p + 2:])
    if k == 0:
        exps = (a0,) + tuple(2 * m[2 * j - 1] for j in range(1, p + 1)) + mu
        return 0, Monomial(exps)
    j = (k + 1) // 2
    rho = [0] * p
    for jj in range(1, p + 1):
        if jj == j:
            rho[jj - 1] = m[2 * jj - 1] + m[2 * jj]  # a_j + b_j = 2 b_j + 1
        else:
            rho[jj - 1] = 2 * m[2 * jj - 1]
    exps = (a0,) + tuple(rho) + mu
    return j, Monomial(exps)


def _check_polar_input(f: VectorPoly, op: str) -> None:
    _require_center(f, op)
    space = f.space
    if space.ncomp != 2 * space.p + 1:
        raise PreconditionError(f"{op} needs the 2p+1 center components")
    nu = space.nu_index
    for k, m, c in f.terms():
        if m[nu] != 0 or not is_resonant(space, k, m):
            raise PreconditionError(
                f"{op}: non-equivariant monomial {tuple(m)} in component {k}")


def radial_part(f: VectorPoly, imag_tol: float = 1e-9) -> VectorPoly:
    """Radial block of an equivariant field in polar coordinates.

    Component 0 maps through x0 = rho0, x_j xbar_j = rho_j^2; component j
    collects Re(a_j) rho_j.  The input must pass the resonance filter.
    The output is reflection equivariant by construction.
    """
    _check_polar_input(f, "radial_part")
    p, s = f.space.p, f.space.s
    out_space = radial_space(p, s, f.space.ell, flavor=f.space.flavor
                             if f.space.flavor in (MU_INDEPENDENT, VANISHING_AT_MU0)
                             else FULL)
    comps: list[dict] = [dict() for _ in range(p + 1)]
    scale = max(f.norm(), 1.0)
    for k, m, c in f.terms():
        if k != 0 and k % 2 == 0:
            continue  # conjugate rows are redundant for a real field
        comp, mono = _radial_image_monomial(p, k, m)
        if k == 0:
            comps[0][mono] = comps[0].get(mono, 0.0) + c
        else:
            comps[comp][mono] = comps[comp].get(mono, 0.0) + complex(c).real
    resid = max((abs(complex(c).imag) for c in comps[0].values()), default=0.0)
    if resid > imag_tol * scale:
        raise NumericalError(
            f"radial_part: component 0 carries imaginary residue {resid:g}")
    comps[0] = {m: complex(c).real for m, c in comps[0].items()}
    return VectorPoly(out_space, comps, _validate=False)


def angular_part(f: VectorPoly) -> VectorPoly:
    """Angular right-hand sides Im(a_j) in radial variables, degree ell-1.

    The constant rotation rates omega_j are not part of the jet and are
    reported separately by the callers that know them.
    """
    _check_polar_input(f, "angular_part")
    p, s = f.space.p, f.space.s
    out_space = SpaceDesc(p, s, f.space.ell - 1, ncomp=p, flavor=FULL,
                          layout=RADIAL)
    comps: list[dict] = [dict() for _ in range(p)]
    for k, m, c in f.terms():
        if k == 0 or k % 2 == 0:
            continue
        j = (k + 1) // 2
        a0 = m[0]
        rho = [0] * p
        for jj in range(1, p + 1):
            rho[jj - 1] = 2 * (m[2 * jj] if jj == j else m[2 * jj - 1])
        mono = Monomial((a0,) + tuple(rho) + tuple(m[2 * p + 2:]))
        comps[j - 1][mono] = comps[j - 1].get(mono, 0.0) + complex(c).imag
    return VectorPoly(out_space, comps, _validate=False)


# ---------------------------------------------------------------------------
# time averaging (independent route to the projection)
# ---------------------------------------------------------------------------

def time_average(f: VectorPoly, omegas: Sequence[float], T: float,
                 n_steps: int) -> VectorPoly:
    """Trapezoid quadrature of the flow average (1/T) int_0^T e^{Bs} f(e^{-Bs}x) ds.

    Under the diagonal flow each monomial just picks up the phase
    exp(-i <defect, omega> s), so the quadrature reduces to averaging those
    phase factors.  Converges to the torus projection as T grows, with the
    usual O(1/T) Cesaro remainder for the non-resonant monomials.
    """
    _require_center(f, "time_average")
    if T <= 0:
        raise PreconditionError("T > 0 required")
    space = f.space
    nu = space.nu_index
    omegas = np.asarray(omegas, dtype=float)
    if len(omegas) != space.p:
        raise PreconditionError("omegas length must equal p")
    max_rate = (space.ell + 1) * float(np.max(omegas)) if space.p else 0.0
    h = T / n_steps
    if max_rate > 0 and h * max_rate > math.pi / 4:
        raise PreconditionError(
            f"n_steps={n_steps} undersamples T={T}: need at least "
            f"{int(math.ceil(4 * T * max_rate / math.pi))} steps for "
            f"max phase rate {max_rate:g}")
    grid = np.linspace(0.0, T, n_steps + 1)
    weights = np.full(n_steps + 1, h / T)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    comps: list[dict] = [dict() for _ in range(space.ncomp)]
    for k, m, c in f.terms():
        if m[nu] != 0:
            raise PreconditionError("time_average expects a nu-independent field")
        rate = -float(np.dot(resonance_defect(space, k, m), omegas))
        if rate == 0.0:
            comps[k][m] = c
        else:
            factor = np.sum(weights * np.exp(1j * rate * grid))
            val = c * factor
            if val != 0:
                comps[k][m] = val
    return VectorPoly(space, comps, _validate=False)


# ---------------------------------------------------------------------------
# radial jets
# ---------------------------------------------------------------------------

@dataclass
class RadialJet:
    """Element of the direct sum over degrees 2..ell of the
    reflection-equivariant radial spaces: the target and output type of the
    realizability problem."""

    p: int
    s: int
    terms: dict[int, VectorPoly] = field(default_factory=dict)

    def __post_init__(self):
        for deg, f in self.terms.items():
            self._check_term(deg, f)

    def _check_term(self, deg: int, f: VectorPoly) -> None:
        if f.space.layout != RADIAL or f.space.ncomp != self.p + 1:
            raise PreconditionError("radial jet terms live in the radial space")
        if f.space.p != self.p or f.space.s != self.s or f.space.ell != deg:
            raise PreconditionError(f"degree-{deg} term has mismatched space")

    @staticmethod
    def zero(p: int, s: int) -> "RadialJet":
        return RadialJet(p, s, {})

    def degrees(self) -> list[int]:
        return sorted(d for d, f in self.terms.items() if not f.is_zero())

    def max_degree(self) -> int:
        degs = self.degrees()
        return degs[-1] if degs else 1

    def term(self, deg: int, flavor: str = FULL) -> VectorPoly:
        f = self.terms.get(deg)
        if f is not None:
            return f
        return VectorPoly.zero(radial_space(self.p, self.s, deg, flavor))

    def with_term(self, deg: int, f: VectorPoly) -> "RadialJet":
        self._check_term(deg, f)
        terms = dict(self.terms)
        terms[deg] = f
        return RadialJet(self.p, self.s, terms)

    def __add__(self, other: "RadialJet") -> "RadialJet":
        if (other.p, other.s) != (self.p, self.s):
            raise PreconditionError("radial jet shape mismatch")
        terms = {}
        for d in set(self.terms) | set(other.terms):
            terms[d] = self.term(d) + other.term(d)
        return RadialJet(self.p, self.s, terms)

    def __sub__(self, other: "RadialJet") -> "RadialJet":
        return self + (other * -1.0)

    def __mul__(self, scalar) -> "RadialJet":
        return RadialJet(self.p, self.s,
                         {d: f * scalar for d, f in self.terms.items()})

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.sqrt(sum(f.norm() ** 2 for f in self.terms.values()))

    def mu_zero(self) -> "RadialJet":
        """Slice at mu = 0 (the mu-independent part of every degree)."""
        from .poly import split_parameter
        return RadialJet(self.p, self.s,
                         {d: split_parameter(f)[0] for d, f in self.terms.items()})

    def mu_vanishing(self) -> "RadialJet":
        from .poly import split_parameter
        return RadialJet(self.p, self.s,
                         {d: split_parameter(f)[1] for d, f in self.terms.items()})

    def extend_mu(self, s_new: int) -> "RadialJet":
        from .poly import extend_mu
        return RadialJet(self.p, s_new,
                         {d: extend_mu(f, s_new) for d, f in self.terms.items()})

    def is_zp2_equivariant(self, tol: float = TOL_STRUCT) -> bool:
        for d, f in self.terms.items():
            for k, m, c in f.terms():
                if abs(c) > tol and not zp2_ok(self.p, k, m):
                    return False
        return True
