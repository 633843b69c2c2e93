"""The homological operator of the singular linear part and its solver.

On a degree-ell monomial basis the operator is bidiagonal: a purely
imaginary diagonal i<defect, omega> from the rotations, plus a nilpotent
shift (one unit of x0 traded for one unit of nu, weighted by the x0
exponent) from the saddle-node coupling.  Its range is exactly the kernel
of the frozen torus projection, which is what makes the normal-form steps
solvable degree by degree.

The solver goes through rank-revealing minimal-norm least squares rather
than the explicit integral construction; the construction survives as an
independent oracle in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import NumericalError, PreconditionError
from .poly import (CENTER, FULL, Monomial, SpaceDesc, VectorPoly,
                   enumerate_basis, from_vec, to_vec)
from .symmetry import (TORUS, equivariant_basis, is_resonant,
                       project_equivariant_nu0, resonance_defect)

#: relative residual allowed when solving the homological equation
SOLVE_TOL = 1e-9
#: kernel-membership check tolerance for the right-hand side
KER_TOL = 1e-10
#: singular values below cutoff * sigma_max count as zero in rank decisions
RANK_CUTOFF = 1e-12


def center_space(p: int, s: int, ell: int) -> SpaceDesc:
    return SpaceDesc(p, s, ell, ncomp=2 * p + 1, flavor=FULL, layout=CENTER)


def _as_full(f: VectorPoly) -> VectorPoly:
    if f.space.flavor == FULL:
        return f
    return VectorPoly(f.space.with_(flavor=FULL), f.coeffs, _validate=False)


def apply_homological(f: VectorPoly, omegas: Sequence[float]) -> VectorPoly:
    """Image of f under the homological operator of the singular linear part.

    Diagonal part: each monomial is scaled by i<defect, omega>.  Shift part:
    the nu times d/dx0 coupling sends (a0, ..., c) to (a0-1, ..., c+1) with
    weight a0.  Degree is preserved.
    """
    space = f.space
    if space.layout != CENTER:
        raise PreconditionError("apply_homological needs the center layout")
    omegas = np.asarray(omegas, dtype=float)
    if len(omegas) != space.p:
        raise PreconditionError("omegas length must equal p")
    nu = space.nu_index
    comps: list[dict] = [dict() for _ in range(space.ncomp)]
    for k, m, c in f.terms():
        lam = 1j * float(np.dot(resonance_defect(space, k, m), omegas))
        if lam != 0:
            comps[k][m] = comps[k].get(m, 0.0) + lam * c
        a0 = m[0]
        if a0 > 0:
            shifted = list(m)
            shifted[0] -= 1
            shifted[nu] += 1
            m2 = Monomial(shifted)
            comps[k][m2] = comps[k].get(m2, 0.0) + a0 * c
    return VectorPoly(space.with_(flavor=FULL), comps, _validate=False)


@dataclass(frozen=True)
class HomologicalMatrix:
    """Dense matrix of the homological operator over the enumerated basis.

    Bidiagonal structure: at most two nonzeros per column (the imaginary
    diagonal and the nilpotent x0 -> nu shift below it).
    """

    space: SpaceDesc
    omegas: tuple[float, ...]
    matrix: np.ndarray

    def max_nnz_per_column(self) -> int:
        return int(np.max(np.count_nonzero(self.matrix, axis=0)))

    def numerical_rank(self) -> int:
        sv = np.linalg.svd(self.matrix, compute_uv=False)
        if len(sv) == 0 or sv[0] == 0:
            return 0
        cutoff = RANK_CUTOFF * max(self.matrix.shape) * sv[0]
        return int(np.sum(sv > cutoff))


@lru_cache(maxsize=64)
def homological_matrix(p: int, s: int, ell: int,
                       omegas: tuple[float, ...]) -> HomologicalMatrix:
    """Matrix M with M . vec(f) = vec(apply_homological(f))."""
    space = center_space(p, s, ell)
    basis = enumerate_basis(space)
    idx = {km: i for i, km in enumerate(basis)}
    n = len(basis)
    M = np.zeros((n, n), dtype=complex)
    om = np.asarray(omegas, dtype=float)
    nu = space.nu_index
    for col, (k, m) in enumerate(basis):
        lam = 1j * float(np.dot(resonance_defect(space, k, m), om))
        if lam != 0:
            M[col, col] = lam
        a0 = m[0]
        if a0 > 0:
            shifted = list(m)
            shifted[0] -= 1
            shifted[nu] += 1
            M[idx[(k, Monomial(shifted))], col] = a0
    return HomologicalMatrix(space, tuple(float(w) for w in omegas), M)


def solve_homological(g: VectorPoly, omegas: Sequence[float]
                      ) -> tuple[VectorPoly, float]:
    """Minimal-norm h with (homological operator) h = g.

    Requires g in the kernel of the frozen torus projection (checked to
    1e-10 relative); that is exactly the solvability condition.  The
    minimal-norm choice pins down the nontrivial kernel of the operator and
    keeps outputs deterministic.
    """
    space = g.space
    if space.layout != CENTER or space.ncomp != 2 * space.p + 1:
        raise PreconditionError("solve_homological needs 2p+1 center components")
    g = _as_full(g)
    gnorm = g.norm()
    remainder = project_equivariant_nu0(g)
    if remainder.norm() > KER_TOL * max(gnorm, 1e-30):
        raise PreconditionError(
            "right-hand side is not in the solvable complement: projection "
            f"remainder has norm {remainder.norm():g} (rhs norm {gnorm:g})")
    if g.is_zero():
        return VectorPoly.zero(g.space), 0.0
    hm = homological_matrix(space.p, space.s, space.ell,
                            tuple(float(w) for w in omegas))
    gv = to_vec(g)
    hv, *_ = np.linalg.lstsq(hm.matrix, gv, rcond=RANK_CUTOFF)
    resid = float(np.linalg.norm(hm.matrix @ hv - gv) / gnorm)
    if resid > SOLVE_TOL:
        raise NumericalError(
            f"homological solve failed: relative residual {resid:g} "
            f"exceeds {SOLVE_TOL:g} (likely rank failure)")
    return from_vec(g.space, hv, tol=0.0), resid


@dataclass
class SplittingReport:
    """Numerical audit of the splitting of the full graded space into the
    equivariant complement and the operator range, with the mu-split
    refinements.  All booleans must be true on a healthy install."""

    p: int
    s: int
    ell: int
    dim_total: int
    dim_equivariant: int
    dim_range: int
    idempotent_ok: bool
    containment_max_residual: float
    containment_ok: bool
    direct_sum_rank: int
    direct_sum_ok: bool
    mu_independent_range_dim: int
    mu_independent_expected: int
    mu_vanishing_range_dim: int
    mu_vanishing_expected: int
    mu_split_preserved: bool
    mu_split_ok: bool

    @property
    def all_ok(self) -> bool:
        return (self.idempotent_ok and self.containment_ok
                and self.direct_sum_ok and self.mu_split_ok
                and self.dim_equivariant + self.dim_range == self.dim_total)

    def summary(self) -> str:
        return (f"p={self.p} s={self.s} ell={self.ell}: "
                f"{self.dim_total} = {self.dim_equivariant} + {self.dim_range}, "
                f"idempotent={self.idempotent_ok}, "
                f"containment<={self.containment_max_residual:.2e}, "
                f"direct_sum={self.direct_sum_ok}, mu_split={self.mu_split_ok}")


def verify_splitting(p: int, s: int, ell: int,
                     omegas: Sequence[float]) -> SplittingReport:
    """Check the direct-sum decomposition at one (p, s, ell) triple."""
    space = center_space(p, s, ell)
    basis = enumerate_basis(space)
    n = len(basis)
    hm = homological_matrix(p, s, ell, tuple(float(w) for w in omegas))
    nu = space.nu_index

    res_mask = np.array([m[nu] == 0 and is_resonant(space, k, m)
                         for (k, m) in basis])
    mu0_mask = np.array([space.mu_degree(m) == 0 for (_, m) in basis])

    # idempotence on a deterministic dense test element (exact filter)
    rng = np.random.default_rng(20260810)
    test = from_vec(space, rng.standard_normal(n) + 1j * rng.standard_normal(n))
    once = project_equivariant_nu0(test)
    idempotent_ok = (project_equivariant_nu0(once) - once).is_zero()

    # range of the operator sits inside the projection kernel
    containment = float(np.max(np.abs(hm.matrix[res_mask, :]))) if n else 0.0
    containment_ok = containment <= 1e-10

    eq_basis = equivariant_basis(p, s, ell, TORUS)
    dim_eq = len(eq_basis)

    u, sv, vt = np.linalg.svd(hm.matrix)
    cutoff = RANK_CUTOFF * n * (sv[0] if len(sv) else 1.0)
    rank = int(np.sum(sv > cutoff))
    range_basis = u[:, :rank]

    eq_mat = np.stack([to_vec(_as_full(f)) for f in eq_basis], axis=1) \
        if dim_eq else np.zeros((n, 0), dtype=complex)
    stacked = np.hstack([eq_mat, range_basis])
    sv2 = np.linalg.svd(stacked, compute_uv=False)
    cut2 = RANK_CUTOFF * n * (sv2[0] if len(sv2) else 1.0)
    stacked_rank = int(np.sum(sv2 > cut2))
    direct_sum_ok = stacked_rank == dim_eq + rank == n

    # mu-split refinement: restrictions of the projection are projections
    # onto the mu-independent / vanishing equivariant subspaces, and the
    # operator never mixes the two blocks.
    keep = res_mask
    dim_r1 = int(np.sum(keep & mu0_mask))
    dim_r2 = int(np.sum(keep & ~mu0_mask))
    exp_r1 = sum(1 for f in eq_basis
                 if all(space.mu_degree(m) == 0 for _, m, _ in f.terms()))
    exp_r2 = dim_eq - exp_r1
    block_off1 = hm.matrix[~mu0_mask][:, mu0_mask]
    block_off2 = hm.matrix[mu0_mask][:, ~mu0_mask]
    mu_split_preserved = (not block_off1.size or np.max(np.abs(block_off1)) == 0) \
        and (not block_off2.size or np.max(np.abs(block_off2)) == 0)
    mu_split_ok = (dim_r1 == exp_r1 and dim_r2 == exp_r2 and mu_split_preserved)

    return SplittingReport(
        p=p, s=s, ell=ell,
        dim_total=n, dim_equivariant=dim_eq, dim_range=rank,
        idempotent_ok=idempotent_ok,
        containment_max_residual=containment, containment_ok=containment_ok,
        direct_sum_rank=stacked_rank, direct_sum_ok=direct_sum_ok,
        mu_independent_range_dim=dim_r1, mu_independent_expected=exp_r1,
        mu_vanishing_range_dim=dim_r2, mu_vanishing_expected=exp_r2,
        mu_split_preserved=mu_split_preserved, mu_split_ok=mu_split_ok,
    )
