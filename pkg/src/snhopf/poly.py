"""Graded homogeneous polynomial spaces over the bifurcation variables.

Everything downstream (projections, homological solves, delay lifts) is
linear algebra over monomial bases of spaces of homogeneous vector-valued
polynomials.  This module fixes the variable orderings, enumerates bases
deterministically, and implements the three primitive operations the rest
of the package is built from: linear substitution, the parameter split
into mu-independent and vanishing-at-mu=0 parts, and the reality audit.

Variable layouts (p = number of Hopf pairs, s = number of unfolding
parameters mu, d = number of delay slots):

* ``center``       -- (x0; x1, x1bar; ...; xp, xpbar; nu; mu_1..mu_s)
* ``radial``       -- (rho0, rho1, ..., rhop; mu_1..mu_s)
* ``delay_plain``  -- (v0, ..., v_{d-1}; mu_1..mu_s), one slot per delay
* ``delay_paired`` -- (v0, w0, ..., v_{d-1}, w_{d-1}; mu_1..mu_s)

Degree grading counts state variables, nu and mu jointly.  Monomials are
ordered graded-lexicographically with the fixed variable order above
(higher powers of earlier variables first), which pins every basis and
therefore every matrix in the package.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

FULL = "full"
MU_INDEPENDENT = "mu_independent"
VANISHING_AT_MU0 = "vanishing_at_mu0"
NU_INDEPENDENT = "nu_independent"
FLAVORS = (FULL, MU_INDEPENDENT, VANISHING_AT_MU0, NU_INDEPENDENT)

CENTER = "center"
RADIAL = "radial"
DELAY_PLAIN = "delay_plain"
DELAY_PAIRED = "delay_paired"
LAYOUTS = (CENTER, RADIAL, DELAY_PLAIN, DELAY_PAIRED)

#: structural checks (reality, idempotence) use this tolerance
TOL_STRUCT = 1e-12
#: composed / solved results are compared at this tolerance
TOL_COMPOSED = 1e-10


class Monomial(tuple):
    """Exponent vector over one of the fixed variable orders.

    A thin tuple subclass: hashable, immutable, compared in graded-lex
    order (total degree first, then higher powers of earlier variables
    first), which matches the enumeration order of ``enumerate_basis``.
    """

    __slots__ = ()

    def __new__(cls, exponents: Iterable[int]) -> "Monomial":
        exps = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in monomial {exps}")
        return super().__new__(cls, exps)

    @property
    def degree(self) -> int:
        return sum(self)

    def sort_key(self) -> tuple:
        return (self.degree, tuple(-e for e in self))

    def __lt__(self, other) -> bool:
        return self.sort_key() < Monomial(other).sort_key()

    def __le__(self, other) -> bool:
        return self.sort_key() <= Monomial(other).sort_key()

    def __gt__(self, other) -> bool:
        return self.sort_key() > Monomial(other).sort_key()

    def __ge__(self, other) -> bool:
        return self.sort_key() >= Monomial(other).sort_key()

    def __repr__(self) -> str:
        return f"Monomial{tuple(self)}"


@dataclass(frozen=True)
class SpaceDesc:
    """Descriptor of one graded space of vector-valued polynomials.

    ``ncomp`` is the number of output components (1 scalar, p+1 radial,
    2p+1 center, 2p+2+s full-group).  ``nslots`` is the number of delay
    slots and is only meaningful for the delay layouts (default p+1).
    """

    p: int
    s: int
    ell: int
    ncomp: int
    flavor: str = FULL
    layout: str = CENTER
    nslots: int | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p >= 1 required")
        if self.s < 0:
            raise ValueError("s >= 0 required")
        if self.ell < 1:
            raise ValueError("degree >= 1 required")
        if self.ncomp < 1:
            raise ValueError("ncomp >= 1 required")
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if self.layout not in LAYOUTS:
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.layout in (DELAY_PLAIN, DELAY_PAIRED):
            if self.nslots is None:
                object.__setattr__(self, "nslots", self.p + 1)
            elif self.nslots < 1:
                raise ValueError("nslots >= 1 required")
        elif self.nslots is not None:
            raise ValueError("nslots only applies to delay layouts")
        if self.flavor == NU_INDEPENDENT and self.layout != CENTER:
            raise ValueError("nu_independent flavor requires the center layout")

    # -- variable bookkeeping -------------------------------------------------

    @property
    def nstate(self) -> int:
        """Number of non-mu variables (these are what substitutions act on)."""
        if self.layout == CENTER:
            return 2 * self.p + 2
        if self.layout == RADIAL:
            return self.p + 1
        if self.layout == DELAY_PLAIN:
            return self.nslots
        return 2 * self.nslots

    @property
    def nvars(self) -> int:
        return self.nstate + self.s

    @property
    def nu_index(self) -> int | None:
        return 2 * self.p + 1 if self.layout == CENTER else None

    @property
    def mu_start(self) -> int:
        return self.nstate

    def mu_degree(self, m: Sequence[int]) -> int:
        return sum(m[self.mu_start:])

    def monomial_in_flavor(self, m: Sequence[int]) -> bool:
        if self.flavor == MU_INDEPENDENT:
            return self.mu_degree(m) == 0
        if self.flavor == VANISHING_AT_MU0:
            return self.mu_degree(m) >= 1
        if self.flavor == NU_INDEPENDENT:
            return m[self.nu_index] == 0
        return True

    def with_(self, **changes) -> "SpaceDesc":
        fields = dict(p=self.p, s=self.s, ell=self.ell, ncomp=self.ncomp,
                      flavor=self.flavor, layout=self.layout, nslots=self.nslots)
        fields.update(changes)
        if fields["layout"] not in (DELAY_PLAIN, DELAY_PAIRED):
            fields["nslots"] = None
        return SpaceDesc(**fields)

    # -- conjugation structure (center layout) --------------------------------

    def conj_monomial(self, m: Monomial) -> Monomial:
        """Image of a monomial under complex conjugation of the variables."""
        if self.layout != CENTER:
            return Monomial(m)
        e = list(m)
        for j in range(1, self.p + 1):
            e[2 * j - 1], e[2 * j] = e[2 * j], e[2 * j - 1]
        return Monomial(e)

    def conj_component(self, k: int) -> int:
        """Index of the component conjugate to component ``k``."""
        if self.layout != CENTER or k == 0 or k > 2 * self.p:
            return k
        return k + 1 if k % 2 == 1 else k - 1


def _homogeneous_monomials(nvars: int, ell: int) -> list[Monomial]:
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), ell):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(Monomial(e))
    return out


@lru_cache(maxsize=None)
def enumerate_basis(space: SpaceDesc) -> tuple[tuple[int, Monomial], ...]:
    """Ordered basis of the space: all (component, monomial) pairs.

    Component-major, monomials in graded-lex order.  The enumeration is
    exhaustive and duplicate-free; for the ``full`` flavor its length is
    ``ncomp * C(nvars + ell - 1, ell)``.
    """
    if space.ell < 2:
        raise ValueError("graded spaces start at degree 2")
    monos = [m for m in _homogeneous_monomials(space.nvars, space.ell)
             if space.monomial_in_flavor(m)]
    return tuple((k, m) for k in range(space.ncomp) for m in monos)


@lru_cache(maxsize=None)
def basis_index(space: SpaceDesc) -> Mapping[tuple[int, Monomial], int]:
    return {km: i for i, km in enumerate(enumerate_basis(space))}


def space_dim(space: SpaceDesc) -> int:
    return len(enumerate_basis(space))


def full_dim(nvars: int, ell: int) -> int:
    """dim of the scalar homogeneous space: stars and bars."""
    return math.comb(nvars + ell - 1, ell)


class VectorPoly:
    """Homogeneous vector-valued polynomial: one coefficient dict per component.

    Immutable after construction; all operations return new instances.
    Coefficients are complex floating point -- the frequencies omega_j and
    the delay phases e^{i omega tau} are transcendental, so exact arithmetic
    is not attainable downstream.  Reality of the underlying real vector
    field is an auditable invariant (``check_reality``), not a storage type.
    """

    __slots__ = ("space", "coeffs")

    def __init__(self, space: SpaceDesc, coeffs: Sequence[Mapping] | None = None,
                 *, _validate: bool = True):
        comps: list[dict[Monomial, complex]] = [dict() for _ in range(space.ncomp)]
        if coeffs is not None:
            if len(coeffs) != space.ncomp:
                raise ValueError(
                    f"expected {space.ncomp} components, got {len(coeffs)}")
            for k, comp in enumerate(coeffs):
                for m, c in comp.items():
                    c = complex(c)
                    if c == 0:
                        continue
                    mm = m if isinstance(m, Monomial) else Monomial(m)
                    if _validate:
                        if len(mm) != space.nvars:
                            raise ValueError(
                                f"monomial {tuple(mm)} has {len(mm)} vars, "
                                f"space has {space.nvars}")
                        if mm.degree != space.ell:
                            raise ValueError(
                                f"monomial {tuple(mm)} has degree {mm.degree}, "
                                f"space is homogeneous of degree {space.ell}")
                        if not space.monomial_in_flavor(mm):
                            raise ValueError(
                                f"monomial {tuple(mm)} violates flavor "
                                f"{space.flavor!r}")
                    comps[k][mm] = comps[k].get(mm, 0.0) + c
        self.space = space
        self.coeffs = tuple(comps)

    # -- construction helpers --------------------------------------------------

    @staticmethod
    def zero(space: SpaceDesc) -> "VectorPoly":
        return VectorPoly(space)

    @staticmethod
    def single(space: SpaceDesc, comp: int, m, coeff=1.0) -> "VectorPoly":
        comps = [dict() for _ in range(space.ncomp)]
        comps[comp] = {Monomial(m): coeff}
        return VectorPoly(space, comps)

    # -- algebra ----------------------------------------------------------------

    def _binary(self, other: "VectorPoly", sign: float) -> "VectorPoly":
        if (other.space.layout, other.space.p, other.space.s, other.space.ell,
                other.space.ncomp, other.space.nslots) != (
                self.space.layout, self.space.p, self.space.s, self.space.ell,
                self.space.ncomp, self.space.nslots):
            raise ValueError("space mismatch in VectorPoly arithmetic")
        space = self.space if other.space.flavor == self.space.flavor \
            else self.space.with_(flavor=FULL)
        comps = []
        for a, b in zip(self.coeffs, other.coeffs):
            out = dict(a)
            for m, c in b.items():
                out[m] = out.get(m, 0.0) + sign * c
            comps.append(out)
        return VectorPoly(space, comps, _validate=False)

    def __add__(self, other: "VectorPoly") -> "VectorPoly":
        return self._binary(other, +1.0)

    def __sub__(self, other: "VectorPoly") -> "VectorPoly":
        return self._binary(other, -1.0)

    def __mul__(self, scalar) -> "VectorPoly":
        comps = [{m: scalar * c for m, c in comp.items()} for comp in self.coeffs]
        return VectorPoly(self.space, comps, _validate=False)

    __rmul__ = __mul__

    def __neg__(self) -> "VectorPoly":
        return self * (-1.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for comp in self.coeffs for c in comp.values())

    def norm(self) -> float:
        """l2 norm of the coefficient vector."""
        return math.sqrt(sum(abs(c) ** 2
                             for comp in self.coeffs for c in comp.values()))

    def clean(self, tol: float = 0.0) -> "VectorPoly":
        comps = [{m: c for m, c in comp.items() if abs(c) > tol}
                 for comp in self.coeffs]
        return VectorPoly(self.space, comps, _validate=False)

    def terms(self) -> Iterable[tuple[int, Monomial, complex]]:
        for k, comp in enumerate(self.coeffs):
            for m, c in comp.items():
                yield k, m, c

    def eval(self, point: Sequence[complex]) -> np.ndarray:
        """Evaluate all components at one point (length nvars)."""
        pt = np.asarray(point, dtype=complex)
        if pt.shape != (self.space.nvars,):
            raise ValueError("evaluation point has wrong length")
        out = np.zeros(self.space.ncomp, dtype=complex)
        for k, comp in enumerate(self.coeffs):
            acc = 0.0 + 0.0j
            for m, c in comp.items():
                term = c
                for v, e in zip(pt, m):
                    if e:
                        term = term * v ** e
                acc += term
            out[k] = acc
        return out

    def __repr__(self) -> str:
        nterms = sum(len(comp) for comp in self.coeffs)
        return (f"VectorPoly(layout={self.space.layout}, ell={self.space.ell}, "
                f"ncomp={self.space.ncomp}, terms={nterms})")


def to_vec(f: VectorPoly) -> np.ndarray:
    """Coefficient vector of f over enumerate_basis(f.space)."""
    idx = basis_index(f.space)
    v = np.zeros(len(idx), dtype=complex)
    for k, m, c in f.terms():
        v[idx[(k, m)]] = c
    return v


def from_vec(space: SpaceDesc, v: np.ndarray, tol: float = 0.0) -> VectorPoly:
    basis = enumerate_basis(space)
    if len(v) != len(basis):
        raise ValueError("coefficient vector length mismatch")
    comps: list[dict] = [dict() for _ in range(space.ncomp)]
    for (k, m), c in zip(basis, v):
        if abs(c) > tol:
            comps[k][m] = complex(c)
    return VectorPoly(space, comps, _validate=False)


# ---------------------------------------------------------------------------
# linear substitution
# ---------------------------------------------------------------------------

def _expand_state_monomial(m_state: tuple[int, ...], M: np.ndarray,
                           cache: dict) -> dict[tuple[int, ...], complex]:
    """Expansion of prod_i (row_i . newvars)^{m_i} over new-state monomials."""
    if m_state in cache:
        return cache[m_state]
    n_new = M.shape[1]
    if sum(m_state) == 0:
        out = {(0,) * n_new: 1.0 + 0.0j}
        cache[m_state] = out
        return out
    i = next(j for j, e in enumerate(m_state) if e > 0)
    parent = list(m_state)
    parent[i] -= 1
    base = _expand_state_monomial(tuple(parent), M, cache)
    row = M[i]
    out: dict[tuple[int, ...], complex] = {}
    for mono, c in base.items():
        for j in range(n_new):
            a = row[j]
            if a == 0:
                continue
            key = mono[:j] + (mono[j] + 1,) + mono[j + 1:]
            out[key] = out.get(key, 0.0) + c * a
    cache[m_state] = out
    return out


def compose_linear(f: VectorPoly, M: np.ndarray,
                   out_space: SpaceDesc | None = None) -> VectorPoly:
    """Exact polynomial substitution f(M . vars, mu).

    ``M`` expresses each old (non-mu) variable as a linear form in the new
    ones: old_i = sum_j M[i, j] new_j.  The mu parameters pass through
    identically, so both spaces must share ``s``.  With ``out_space`` omitted
    the substitution stays inside ``f.space`` (square ``M``).
    """
    space = f.space
    if out_space is None:
        out_space = space if space.flavor == FULL else space.with_(flavor=FULL)
    M = np.asarray(M, dtype=complex)
    if M.shape != (space.nstate, out_space.nstate):
        raise ValueError(
            f"substitution matrix shape {M.shape} does not match "
            f"({space.nstate}, {out_space.nstate})")
    if out_space.s != space.s:
        raise ValueError("mu parameters must pass through: s mismatch")
    if out_space.ncomp != space.ncomp or out_space.ell != space.ell:
        raise ValueError("out_space must preserve components and degree")
    cache: dict = {}
    comps: list[dict] = [dict() for _ in range(space.ncomp)]
    ns = space.nstate
    for k, m, c in f.terms():
        m_state, m_mu = tuple(m[:ns]), tuple(m[ns:])
        for new_state, ec in _expand_state_monomial(m_state, M, cache).items():
            key = Monomial(new_state + m_mu)
            comps[k][key] = comps[k].get(key, 0.0) + c * ec
    return VectorPoly(out_space, comps)


def split_parameter(f: VectorPoly) -> tuple[VectorPoly, VectorPoly]:
    """Split f = h + q with h mu-independent and q vanishing at mu = 0."""
    space = f.space
    h_comps: list[dict] = [dict() for _ in range(space.ncomp)]
    q_comps: list[dict] = [dict() for _ in range(space.ncomp)]
    for k, m, c in f.terms():
        (h_comps if space.mu_degree(m) == 0 else q_comps)[k][m] = c
    h = VectorPoly(space.with_(flavor=MU_INDEPENDENT), h_comps, _validate=False)
    q = VectorPoly(space.with_(flavor=VANISHING_AT_MU0), q_comps, _validate=False)
    return h, q


def check_reality(f: VectorPoly, tol: float = TOL_STRUCT):
    """Audit that f represents a real vector field.

    Center layout: component 0 (and any nu/mu rows) must satisfy
    coeff(conj m) = conj(coeff m), and each x_j row must be the conjugate
    image of its xbar_j partner.  Radial/delay layouts: real coefficients.
    Returns ``(ok, violation)`` where violation is the first offending
    ``(component, monomial, residual)``.
    """
    space = f.space
    if space.layout == CENTER:
        if space.ncomp not in (2 * space.p + 1, 2 * space.p + 2 + space.s):
            raise ValueError(
                f"reality audit needs {2 * space.p + 1} or "
                f"{2 * space.p + 2 + space.s} components, got {space.ncomp}")
        for k, comp in enumerate(f.coeffs):
            kc = space.conj_component(k)
            partner = f.coeffs[kc]
            for m, c in comp.items():
                mc = space.conj_monomial(m)
                res = abs(partner.get(mc, 0.0) - c.conjugate())
                if res > tol:
                    return False, (k, m, res)
        return True, None
    for k, comp in enumerate(f.coeffs):
        for m, c in comp.items():
            if abs(c.imag) > tol:
                return False, (k, m, abs(c.imag))
    return True, None


# ---------------------------------------------------------------------------
# plain dict-polynomial helpers (inhomogeneous, used by the normal-form engine)
# ---------------------------------------------------------------------------
# Keys are bare exponent tuples; values complex.  These stay internal: the
# public surface works with homogeneous VectorPoly values.

def dict_add(a: dict, b: dict, scale=1.0) -> dict:
    out = dict(a)
    for m, c in b.items():
        out[m] = out.get(m, 0.0) + scale * c
    return {m: c for m, c in out.items() if c != 0}


def dict_mul(a: dict, b: dict, max_deg: int) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        da = sum(ma)
        for mb, cb in b.items():
            if da + sum(mb) > max_deg:
                continue
            key = tuple(x + y for x, y in zip(ma, mb))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def dict_diff(a: dict, var: int) -> dict:
    out = {}
    for m, c in a.items():
        e = m[var]
        if e:
            key = m[:var] + (e - 1,) + m[var + 1:]
            out[key] = out.get(key, 0.0) + e * c
    return out


def dict_degree_part(a: dict, deg: int) -> dict:
    return {m: c for m, c in a.items() if sum(m) == deg}


def extend_mu(f: VectorPoly, s_new: int) -> VectorPoly:
    """Re-embed f into the same layout with s_new >= s mu parameters."""
    space = f.space
    if s_new < space.s:
        raise ValueError("cannot drop mu parameters")
    if s_new == space.s:
        return f
    pad = (0,) * (s_new - space.s)
    out_space = space.with_(s=s_new)
    comps: list[dict] = [dict() for _ in range(space.ncomp)]
    for k, m, c in f.terms():
        comps[k][Monomial(tuple(m) + pad)] = c
    return VectorPoly(out_space, comps, _validate=False)
